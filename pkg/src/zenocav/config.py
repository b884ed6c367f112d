"""Flat key/value configuration files for models and runs.

Format: one ``key = value`` pair per line, ``#`` comments, blank lines
ignored.  Model keys: omega, omega_mw, delta, gamma, kappa, phi, n_max,
variant.  Run keys: t_end, dt, sample_stride, initial_state.

``initial_state`` is either a single state label (pure state) or
whitespace-separated ``label:weight`` pairs (diagonal mixture), e.g.::

    initial_state = g00:0.3 g11:0.15 g10:0.45 g01:0.1

Weights must sum to 1.  Valid labels: S, T, D, t2, g00, g01, g10, g11.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .models import STATE_LABELS, ModelParams, Variant, named_state

MODEL_KEYS = ("omega", "omega_mw", "delta", "gamma", "kappa", "phi", "n_max", "variant")
RUN_KEYS = ("t_end", "dt", "sample_stride", "initial_state")

# Default integration steps: the full models carry the stiff atom-cavity
# coupling (rate 1 in g units), the reduced models only weak rates.
DEFAULT_DT_FULL = 0.002
DEFAULT_DT_EFFECTIVE = 0.01
DEFAULT_SAMPLE_STRIDE = 100

WEIGHT_SUM_TOL = 1e-6


class ConfigError(ValueError):
    """Malformed configuration; carries file origin and line number."""

    def __init__(self, message, origin="<config>", line=None):
        self.origin = origin
        self.line = line
        where = origin if line is None else f"{origin}:{line}"
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class RunSettings:
    """Time-evolution settings; t_end and initial_state have no defaults."""

    t_end: float
    dt: float
    sample_stride: int
    initial_state: tuple  # ((label, weight), ...)

    def __post_init__(self):
        if self.t_end < 0:
            raise ValueError(f"t_end must be non-negative, got {self.t_end}")
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.sample_stride < 1:
            raise ValueError(f"sample_stride must be >= 1, got {self.sample_stride}")
        if not self.initial_state:
            raise ValueError("initial_state is empty")


@dataclass(frozen=True)
class Config:
    params: ModelParams
    run: RunSettings | None
    origin: str

    def require_run(self) -> RunSettings:
        if self.run is None:
            raise ConfigError(
                "time evolution needs t_end and initial_state", self.origin
            )
        return self.run


def _parse_float(value, key, origin, line):
    if value.strip().lower() == "pi":
        return math.pi
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {value!r}", origin, line) from None


def _parse_int(value, key, origin, line):
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {value!r}", origin, line) from None


def _parse_initial_state(value, origin, line):
    tokens = value.split()
    if not tokens:
        raise ConfigError("initial_state is empty", origin, line)
    if len(tokens) == 1 and ":" not in tokens[0]:
        label = tokens[0]
        if label not in STATE_LABELS:
            raise ConfigError(f"unknown state label {label!r}", origin, line)
        return ((label, 1.0),)
    pairs = []
    for tok in tokens:
        if ":" not in tok:
            raise ConfigError(
                f"expected label:weight, got {tok!r}", origin, line
            )
        label, _, weight_text = tok.partition(":")
        if label not in STATE_LABELS:
            raise ConfigError(f"unknown state label {label!r}", origin, line)
        weight = _parse_float(weight_text, "weight", origin, line)
        if weight < 0:
            raise ConfigError(f"negative weight for {label!r}", origin, line)
        pairs.append((label, weight))
    total = sum(w for _, w in pairs)
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise ConfigError(f"mixture weights sum to {total!r}, expected 1", origin, line)
    return tuple(pairs)


def parse_config_text(text: str, origin: str = "<config>") -> Config:
    """Parse configuration text; raises ConfigError with line numbers."""
    raw = {}
    lines = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected key = value, got {stripped!r}", origin, lineno)
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in MODEL_KEYS and key not in RUN_KEYS:
            raise ConfigError(f"unknown key {key!r}", origin, lineno)
        if key in raw:
            raise ConfigError(f"duplicate key {key!r}", origin, lineno)
        if not value:
            raise ConfigError(f"empty value for {key!r}", origin, lineno)
        raw[key] = value
        lines[key] = lineno

    for key in ("omega", "omega_mw", "delta", "gamma", "kappa", "variant"):
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}", origin)

    try:
        variant = Variant.parse(raw["variant"])
    except ValueError as exc:
        raise ConfigError(str(exc), origin, lines["variant"]) from None

    kwargs = {
        key: _parse_float(raw[key], key, origin, lines[key])
        for key in ("omega", "omega_mw", "delta", "gamma", "kappa")
    }
    if "phi" in raw:
        kwargs["phi"] = _parse_float(raw["phi"], "phi", origin, lines["phi"])
    if "n_max" in raw:
        kwargs["n_max"] = _parse_int(raw["n_max"], "n_max", origin, lines["n_max"])
    try:
        params = ModelParams(variant=variant, **kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc), origin) from None

    run = None
    if "t_end" in raw or "initial_state" in raw:
        for key in ("t_end", "initial_state"):
            if key not in raw:
                raise ConfigError(
                    f"run settings need both t_end and initial_state; missing {key!r}",
                    origin,
                )
        t_end = _parse_float(raw["t_end"], "t_end", origin, lines["t_end"])
        if t_end < 0:
            raise ConfigError("t_end must be non-negative", origin, lines["t_end"])
        default_dt = DEFAULT_DT_FULL if variant.is_full else DEFAULT_DT_EFFECTIVE
        dt = (
            _parse_float(raw["dt"], "dt", origin, lines["dt"])
            if "dt" in raw
            else default_dt
        )
        if dt <= 0:
            raise ConfigError("dt must be positive", origin, lines.get("dt"))
        stride = (
            _parse_int(raw["sample_stride"], "sample_stride", origin, lines["sample_stride"])
            if "sample_stride" in raw
            else DEFAULT_SAMPLE_STRIDE
        )
        if stride < 1:
            raise ConfigError(
                "sample_stride must be >= 1", origin, lines.get("sample_stride")
            )
        initial = _parse_initial_state(
            raw["initial_state"], origin, lines["initial_state"]
        )
        run = RunSettings(t_end, dt, stride, initial)
    elif "dt" in raw or "sample_stride" in raw:
        raise ConfigError(
            "dt/sample_stride given without t_end and initial_state", origin
        )

    return Config(params=params, run=run, origin=origin)


def load_config(path) -> Config:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", str(path)) from None
    return parse_config_text(text, origin=str(path))


def initial_density_matrix(pairs, params: ModelParams) -> np.ndarray:
    """Diagonal mixture sum_i w_i |label_i><label_i| in the variant's basis."""
    dim = params.dim
    rho = np.zeros((dim, dim), dtype=complex)
    for label, weight in pairs:
        rho += weight * named_state(label, params).projector
    return rho


def apply_overrides(config: Config, assignments) -> Config:
    """Apply ``key=value`` overrides on top of a parsed config.

    Values are parsed exactly as in the file format.  Overriding a run key
    requires the config to already define a run section.
    """
    from dataclasses import replace

    def safe_replace(obj, origin, **kw):
        try:
            return replace(obj, **kw)
        except ValueError as exc:
            raise ConfigError(str(exc), origin) from None

    params = config.params
    run = config.run
    for raw in assignments:
        if "=" not in raw:
            raise ConfigError(f"override must be key=value, got {raw!r}", config.origin)
        key, _, value = raw.partition("=")
        key = key.strip()
        value = value.strip()
        origin = f"{config.origin} (override)"
        if key == "variant":
            try:
                params = params.with_variant(Variant.parse(value))
            except ValueError as exc:
                raise ConfigError(str(exc), origin) from None
        elif key in ("omega", "omega_mw", "delta", "gamma", "kappa", "phi"):
            params = safe_replace(params, origin, **{key: _parse_float(value, key, origin, None)})
        elif key == "n_max":
            params = safe_replace(params, origin, n_max=_parse_int(value, key, origin, None))
        elif key in RUN_KEYS:
            if run is None:
                raise ConfigError(
                    f"cannot override {key!r}: config has no run settings", origin
                )
            if key == "t_end":
                run = safe_replace(run, origin, t_end=_parse_float(value, key, origin, None))
            elif key == "dt":
                run = safe_replace(run, origin, dt=_parse_float(value, key, origin, None))
            elif key == "sample_stride":
                run = safe_replace(run, origin, sample_stride=_parse_int(value, key, origin, None))
            else:
                run = safe_replace(
                    run, origin, initial_state=_parse_initial_state(value, origin, None)
                )
        else:
            raise ConfigError(f"unknown key {key!r}", origin)
    return Config(params=params, run=run, origin=config.origin)


# -- bundled preset configs ----------------------------------------------------


def list_presets():
    """Names of the configuration files shipped with the package."""
    root = resources.files(__package__) / "presets"
    return tuple(sorted(p.name[: -len(".cfg")] for p in root.iterdir() if p.name.endswith(".cfg")))


def preset_path(name: str) -> Path:
    """Filesystem path of a bundled preset config."""
    root = resources.files(__package__) / "presets"
    candidate = root / f"{name}.cfg"
    if not candidate.is_file():
        raise KeyError(f"no bundled preset {name!r}; available: {', '.join(list_presets())}")
    return Path(str(candidate))


def resolve_config(spec: str) -> Config:
    """Load a config from a path, or from the bundled presets by bare name."""
    path = Path(spec)
    if path.is_file():
        return load_config(path)
    if path.suffix == "" and "/" not in spec:
        try:
            return load_config(preset_path(spec))
        except KeyError:
            pass
    raise ConfigError(f"config file not found: {spec}", str(spec))
