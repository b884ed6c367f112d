"""Fixed-step time evolution of master equations.

The generator is time independent, so a classical 4th-order Runge-Kutta step
of size h on the vectorized equation is exactly the degree-4 Taylor
polynomial of exp(h L) applied to the state.  That matrix is built once and
raised to the sampling stride, which turns a million-step integration into a
handful of dense matrix products plus one matrix-vector product per sample.
Fixed steps keep sample grids bit-reproducible so overlay comparisons between
models are well defined.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import MasterEquationSpec
from .operators import (
    ALGEBRAIC_TOL,
    INTEGRATION_TOL,
    DensityMatrixReport,
    hermiticity_defect,
    liouvillian,
    validate_density_matrix,
    vectorize,
)

# Populations may undershoot/overshoot their exact range by integrator error.
POPULATION_SLACK = 1e-6
# Trace drift above this is a hard failure: the step size is too large.
TRACE_ABORT = 1e-4
# Sample times are compared with this absolute tolerance (floating-point
# accumulation of n*dt differs between runs with different strides).
TIME_ATOL = 1e-9


class IntegrationError(RuntimeError):
    """Integration left the physical regime; carries a diagnostic message."""


@dataclass(frozen=True)
class Trajectory:
    """Sampled observable records of one evolution.

    times are in units of 1/g.  records maps observable label to an array of
    real values, one per time point.  states holds the sampled density
    matrices only when requested at evolve time.
    """

    times: np.ndarray
    records: dict
    final_state: np.ndarray
    final_report: DensityMatrixReport
    states: tuple | None = None

    @property
    def labels(self) -> tuple:
        return tuple(self.records)

    def value(self, label: str, index: int = -1) -> float:
        return float(self.records[label][index])

    def to_csv(self, path) -> None:
        """Write time plus one column per observable, 12 significant digits."""
        labels = self.labels
        with open(path, "w") as fh:
            fh.write("# units: g = 1; time in 1/g\n")
            fh.write(",".join(["time", *labels]) + "\n")
            for i, t in enumerate(self.times):
                row = [f"{t:.11e}"] + [f"{self.records[lb][i]:.11e}" for lb in labels]
                fh.write(",".join(row) + "\n")


def rk4_propagator(liouv: np.ndarray, dt: float) -> np.ndarray:
    """One Runge-Kutta step as a matrix: the degree-4 Taylor sum of exp(dt L)."""
    a = dt * liouv
    eye = np.eye(a.shape[0], dtype=complex)
    # Horner form: I + A(I + A/2 (I + A/3 (I + A/4)))
    t = eye + a / 4.0
    t = eye + (a / 3.0) @ t
    t = eye + (a / 2.0) @ t
    return eye + a @ t


def _is_projector(op: np.ndarray) -> bool:
    return (
        hermiticity_defect(op) <= ALGEBRAIC_TOL
        and np.max(np.abs(op @ op - op)) <= ALGEBRAIC_TOL
    )


def evolve(
    me: MasterEquationSpec,
    rho0: np.ndarray,
    t_end: float,
    dt: float,
    observables,
    sample_stride: int = 1,
    store_states: bool = False,
) -> Trajectory:
    """Integrate the master equation and record observables.

    Parameters
    ----------
    me : MasterEquationSpec
        Hamiltonian and collapse operators.
    rho0 : ndarray
        Initial density matrix; validated before the run.
    t_end, dt : float
        Total time and step size, in units of 1/g.  A shorter final step
        covers t_end when it is not a multiple of dt.
    observables : sequence of (label, ndarray)
        Hermitian operators to record.  Projector-valued observables are
        range-checked as populations.
    sample_stride : int
        Record every this many steps; the initial and final points are
        always recorded.
    store_states : bool
        Also keep the sampled density matrices (memory permitting).

    Raises IntegrationError when the trace drifts beyond 1e-4, which means
    dt is too large for the generator's stiffness.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != me.hamiltonian.shape:
        raise ValueError(f"initial state shape {rho0.shape} != model {me.hamiltonian.shape}")
    report = validate_density_matrix(rho0)
    if not report.passed:
        raise ValueError(f"initial state is not a density matrix: {report.summary()}")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t_end < 0:
        raise ValueError(f"t_end must be non-negative, got {t_end}")
    if sample_stride < 1:
        raise ValueError(f"sample_stride must be >= 1, got {sample_stride}")

    labels = []
    ops = []
    population_guard = []
    for label, op in observables:
        op = np.asarray(op, dtype=complex)
        if op.shape != rho0.shape:
            raise ValueError(f"observable {label!r} shape {op.shape} != state {rho0.shape}")
        labels.append(label)
        ops.append(op)
        population_guard.append(_is_projector(op))

    n_steps = int(np.floor(t_end / dt + 1e-12))
    remainder = t_end - n_steps * dt
    if remainder < 1e-12 * max(1.0, abs(t_end)):
        remainder = 0.0

    liouv = liouvillian(me.hamiltonian, me.collapse_ops)
    step_prop = rk4_propagator(liouv, dt) if n_steps > 0 else None
    prop_cache = {}

    def propagator_power(k):
        if k not in prop_cache:
            prop_cache[k] = np.linalg.matrix_power(step_prop, k)
        return prop_cache[k]

    times = []
    values = [[] for _ in labels]
    states = [] if store_states else None
    vec = vectorize(rho0)
    dim = rho0.shape[0]
    diag_idx = np.arange(dim) * (dim + 1)

    def record(t, vec):
        rho_t = vec.reshape((dim, dim), order="F")
        trace = vec[diag_idx].sum()
        drift = abs(trace - 1.0)
        if drift > TRACE_ABORT:
            raise IntegrationError(
                f"trace drifted by {drift:.3e} at t={t:g} (dt={dt:g}); "
                "the step size is too large for this generator"
            )
        times.append(t)
        for k, op in enumerate(ops):
            val = np.trace(op @ rho_t)
            if population_guard[k] and abs(val.imag) > 1e-8:
                raise IntegrationError(
                    f"population {labels[k]!r} has imaginary residue {val.imag:.3e} at t={t:g}"
                )
            real = float(val.real)
            if population_guard[k] and not (
                -POPULATION_SLACK <= real <= 1.0 + POPULATION_SLACK
            ):
                raise IntegrationError(
                    f"population {labels[k]!r} = {real!r} out of range at t={t:g}"
                )
            values[k].append(real)
        if states is not None:
            states.append(rho_t.copy())

    record(0.0, vec)
    step = 0
    while step < n_steps:
        advance = min(sample_stride, n_steps - step)
        vec = propagator_power(advance) @ vec
        step += advance
        if remainder == 0.0 and step == n_steps:
            record(t_end, vec)
        else:
            record(step * dt, vec)
    if remainder > 0.0:
        vec = rk4_propagator(liouv, remainder) @ vec
        record(t_end, vec)

    final_state = vec.reshape((dim, dim), order="F")
    final_report = validate_density_matrix(final_state, INTEGRATION_TOL)
    return Trajectory(
        times=np.array(times),
        records={lb: np.array(vals) for lb, vals in zip(labels, values)},
        final_state=final_state,
        final_report=final_report,
        states=tuple(states) if states is not None else None,
    )


def compare_trajectories(a: Trajectory, b: Trajectory, label: str) -> float:
    """Max absolute deviation of one observable between two runs.

    The runs must share the sample grid (same times within 1e-9).
    """
    if len(a.times) != len(b.times):
        raise ValueError(
            f"sample grids differ in length: {len(a.times)} vs {len(b.times)}"
        )
    if np.max(np.abs(a.times - b.times)) > TIME_ATOL:
        raise ValueError("sample grids differ beyond tolerance")
    if label not in a.records or label not in b.records:
        raise KeyError(f"observable {label!r} missing from one trajectory")
    return float(np.max(np.abs(a.records[label] - b.records[label])))
