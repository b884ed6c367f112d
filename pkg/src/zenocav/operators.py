"""Dense operator algebra and superoperator construction.

Everything in this package works on plain complex numpy arrays.  A square
array of shape ``(dim, dim)`` is an operator on a ``dim``-dimensional Hilbert
space; a ``(dim**2, dim**2)`` array is a superoperator acting on
column-stacked density matrices.

Vectorization is column stacking throughout::

    vec(rho) = rho.flatten(order="F")
    vec(A @ X @ B) = kron(B.T, A) @ vec(X)

Every superoperator formula in this package follows that one convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Shared tolerances.  Algebraic identities (projector algebra, hermiticity of
# constructed operators) must hold to ALGEBRAIC_TOL; physical state properties
# (trace, positivity) to PHYSICAL_TOL; states coming out of long fixed-step
# integrations to INTEGRATION_TOL.
ALGEBRAIC_TOL = 1e-10
PHYSICAL_TOL = 1e-9
INTEGRATION_TOL = 1e-6


def _as_square(a, name: str = "operator") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    return a


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product of two operators.

    Entry ``((i*q + k), (j*q + l))`` of the result is ``a[i, j] * b[k, l]``
    for ``q = b.shape[0]``, i.e. the first factor indexes the slow (leftmost)
    subsystem.
    """
    return np.kron(_as_square(a, "a"), _as_square(b, "b"))


def dagger(a) -> np.ndarray:
    """Conjugate transpose."""
    return _as_square(a).conj().T.copy()


def hermiticity_defect(a) -> float:
    """Largest entrywise deviation of ``a`` from its conjugate transpose."""
    a = _as_square(a)
    return float(np.max(np.abs(a - a.conj().T)))


def expectation(obs, rho) -> float:
    """Real part of ``Tr(obs @ rho)``.

    For a Hermitian observable the imaginary residue of the trace must stay
    below 1e-8; a larger residue signals a corrupted state and raises.
    """
    obs = _as_square(obs, "observable")
    rho = _as_square(rho, "state")
    if obs.shape != rho.shape:
        raise ValueError(
            f"dimension mismatch: observable {obs.shape[0]}, state {rho.shape[0]}"
        )
    value = complex(np.trace(obs @ rho))
    if hermiticity_defect(obs) <= ALGEBRAIC_TOL and abs(value.imag) > 1e-8:
        raise ValueError(
            f"expectation of Hermitian observable has imaginary part {value.imag:.3e}"
        )
    return value.real


def liouvillian(h, collapse_ops=()) -> np.ndarray:
    """Matrix form of the Lindblad generator.

    Maps ``rho`` to ``-i[h, rho] + sum_k (L_k rho L_k^dag
    - (L_k^dag L_k rho + rho L_k^dag L_k)/2)`` under column stacking.
    """
    h = _as_square(h, "hamiltonian")
    n = h.shape[0]
    eye = np.eye(n)
    sop = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for k, c in enumerate(collapse_ops):
        c = _as_square(c, f"collapse operator {k}")
        if c.shape[0] != n:
            raise ValueError(
                f"collapse operator {k} has dim {c.shape[0]}, hamiltonian has {n}"
            )
        cdc = c.conj().T @ c
        sop += np.kron(c.conj(), c) - 0.5 * (np.kron(eye, cdc) + np.kron(cdc.T, eye))
    return sop


def vectorize(rho) -> np.ndarray:
    """Column-stack a square matrix into a vector."""
    return _as_square(rho, "matrix").flatten(order="F")


def devectorize(v) -> np.ndarray:
    """Inverse of :func:`vectorize`; the length must be a perfect square."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    n = math.isqrt(v.size)
    if n * n != v.size:
        raise ValueError(f"vector of length {v.size} is not a vectorized square matrix")
    return v.reshape((n, n), order="F")


@dataclass(frozen=True)
class DensityMatrixReport:
    """Diagnostics from :func:`validate_density_matrix`; never raises."""

    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float
    tol: float

    @property
    def passed(self) -> bool:
        return (
            self.hermiticity_defect <= self.tol
            and self.trace_defect <= self.tol
            and self.min_eigenvalue >= -self.tol
        )

    def summary(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return (
            f"{status} (tol={self.tol:.1e}): hermiticity defect "
            f"{self.hermiticity_defect:.3e}, trace defect {self.trace_defect:.3e}, "
            f"min eigenvalue {self.min_eigenvalue:.3e}"
        )


def validate_density_matrix(op, tol: float = PHYSICAL_TOL) -> DensityMatrixReport:
    """Report hermiticity defect, trace defect, and minimum eigenvalue."""
    op = _as_square(op, "density matrix")
    herm = hermiticity_defect(op)
    trace_defect = float(abs(np.trace(op) - 1.0))
    min_eig = float(np.linalg.eigvalsh((op + op.conj().T) / 2).min())
    return DensityMatrixReport(herm, trace_defect, min_eig, tol)


def operator_to_dict(a) -> dict:
    """Serialize to ``{"dim": n, "entries": [[re, im], ...]}``, row-major."""
    a = _as_square(a)
    return {
        "dim": int(a.shape[0]),
        "entries": [[float(z.real), float(z.imag)] for z in a.ravel(order="C")],
    }


def operator_from_dict(d) -> np.ndarray:
    """Inverse of :func:`operator_to_dict`, with shape and finiteness checks."""
    dim = int(d["dim"])
    entries = d["entries"]
    if dim <= 0:
        raise ValueError(f"dim must be positive, got {dim}")
    if len(entries) != dim * dim:
        raise ValueError(f"expected {dim * dim} entries for dim {dim}, got {len(entries)}")
    flat = np.array([complex(re, im) for re, im in entries])
    if not np.all(np.isfinite(flat.real)) or not np.all(np.isfinite(flat.imag)):
        raise ValueError("operator entries must be finite")
    return flat.reshape((dim, dim))
