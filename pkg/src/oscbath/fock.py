"""Brute-force referee: dense Lindblad integration in a truncated number basis.

Used by tests and the ``oracle`` CLI subcommand to validate every moment flow
in :mod:`oscbath.flows` against a direct density-matrix integration.  Scope is
deliberately small (1-2 modes, low occupation) so runs stay seconds-fast.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.linalg import expm

__all__ = [
    "TruncatedLindbladSpec",
    "destroy",
    "mode_operators",
    "build_superoperator",
    "integrate",
    "moments",
    "vacuum_rho",
    "thermal_rho",
    "coherent_rho",
    "squeezed_vacuum_rho",
    "kron_rho",
    "assert_density_matrix",
]


def destroy(dim: int) -> np.ndarray:
    """Single-mode annihilation operator on a dim-level truncation."""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)


def mode_operators(n_modes: int, cutoff: int) -> list[np.ndarray]:
    """Annihilation operators of each mode on the full truncated product space."""
    dim = cutoff + 1
    a = destroy(dim)
    eye = np.eye(dim)
    if n_modes == 1:
        return [a]
    if n_modes == 2:
        return [np.kron(a, eye), np.kron(eye, a)]
    raise ValueError("the Fock referee supports 1 or 2 modes only")


@dataclass(frozen=True)
class TruncatedLindbladSpec:
    """Quadratic Lindblad generator on a truncated Fock space.

    ``h`` is the one-particle Hamiltonian matrix (H = sum h_jk a_j^dag a_k),
    ``drive`` the coefficients of a_j^dag in a linear drive term, and
    ``k_emit``/``k_abs`` the Hermitian PSD rate matrices of the emission and
    absorption dissipators.  ``literal_plus_sign`` flips the anticommutator
    sign to the (non-trace-preserving) literal form, for negative tests only.
    """

    n_modes: int
    cutoff: int
    h: np.ndarray
    k_emit: np.ndarray
    k_abs: np.ndarray
    drive: np.ndarray | None = None
    literal_plus_sign: bool = False

    def __post_init__(self):
        if self.n_modes not in (1, 2):
            raise ValueError("n_modes must be 1 or 2")
        if self.cutoff < 4:
            raise ValueError("cutoff must be at least 4")
        h = np.atleast_2d(np.asarray(self.h, dtype=complex))
        ke = np.atleast_2d(np.asarray(self.k_emit, dtype=complex))
        ka = np.atleast_2d(np.asarray(self.k_abs, dtype=complex))
        n = self.n_modes
        for name, m in (("h", h), ("k_emit", ke), ("k_abs", ka)):
            if m.shape != (n, n):
                raise ValueError(f"{name} must be {n}x{n}")
            if np.abs(m - m.T.conj()).max() > 1e-10 * max(np.abs(m).max(), 1.0):
                raise ValueError(f"{name} must be Hermitian")
        for name, m in (("k_emit", ke), ("k_abs", ka)):
            if np.linalg.eigvalsh(m).min() < -1e-12 * max(np.abs(m).max(), 1.0):
                raise ValueError(f"{name} must be positive semidefinite")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "k_emit", ke)
        object.__setattr__(self, "k_abs", ka)
        if self.drive is not None:
            f = np.atleast_1d(np.asarray(self.drive, dtype=complex))
            if f.shape != (n,):
                raise ValueError(f"drive must have {n} entries")
            object.__setattr__(self, "drive", f)

    @property
    def dim(self) -> int:
        return (self.cutoff + 1) ** self.n_modes


def build_superoperator(spec: TruncatedLindbladSpec) -> sp.csr_matrix:
    """Sparse matrix acting on row-major vec(rho) as the master-equation generator.

    vec(A rho B) = (A kron B^T) vec(rho) for row-major flattening, so
    -i[H, .] maps to -i(H kron 1 - 1 kron H^T) and each dissipator term
    g (L . R^dag - {R^dag L, .}/2) to its three Kronecker pieces.
    """
    ops = [sp.csr_matrix(a) for a in mode_operators(spec.n_modes, spec.cutoff)]
    n = spec.n_modes
    d = spec.dim
    eye = sp.identity(d, dtype=complex, format="csr")
    ham = sp.csr_matrix((d, d), dtype=complex)
    for j in range(n):
        for k in range(n):
            if spec.h[j, k] != 0:
                ham = ham + spec.h[j, k] * (ops[j].T.conj() @ ops[k])
    if spec.drive is not None:
        for j in range(n):
            ham = ham + spec.drive[j] * ops[j].T.conj() + np.conj(spec.drive[j]) * ops[j]

    lind = -1j * (sp.kron(ham, eye) - sp.kron(eye, ham.T))
    anticomm_sign = 1.0 if spec.literal_plus_sign else -1.0
    terms = []
    for j in range(n):
        for k in range(n):
            if spec.k_emit[j, k] != 0:
                terms.append((spec.k_emit[j, k], ops[j], ops[k]))
            if spec.k_abs[j, k] != 0:
                terms.append((spec.k_abs[j, k], ops[j].T.conj(), ops[k].T.conj()))
    for g, left, right in terms:
        rdl = right.T.conj() @ left
        lind = lind + g * (sp.kron(left, right.conj())
                           + 0.5 * anticomm_sign * (sp.kron(rdl, eye)
                                                    + sp.kron(eye, rdl.T)))
    return sp.csr_matrix(lind)


def integrate(spec: TruncatedLindbladSpec, rho0: np.ndarray, t: float,
              rtol: float = 1e-10, atol: float = 1e-12):
    """Adaptive RK45 integration of the truncated master equation to time t."""
    lind = build_superoperator(spec)
    d = spec.dim
    if rho0.shape != (d, d):
        raise ValueError(f"rho0 must be {d}x{d}")
    if t == 0:
        return rho0.astype(complex)

    def f(_t, y):
        return lind @ y

    sol = solve_ivp(f, (0.0, float(t)), rho0.astype(complex).ravel(),
                    method="RK45", rtol=rtol, atol=atol)
    if not sol.success:
        raise ArithmeticError(f"Lindblad integration failed: {sol.message}")
    rho = sol.y[:, -1].reshape(d, d)
    return 0.5 * (rho + rho.T.conj())


def moments(rho: np.ndarray, n_modes: int, cutoff: int):
    """Mean vector and covariance matrix of rho in the package's conventions.

    Warns when occupation of the top truncation level exceeds 1e-6, which
    signals that the reported moments may be truncation-biased.
    """
    ops = mode_operators(n_modes, cutoff)
    dim = cutoff + 1
    top = np.zeros(dim)
    top[-1] = 1.0
    for j in range(n_modes):
        if n_modes == 1:
            proj = np.diag(top)
        else:
            proj = np.diag(np.kron(top, np.ones(dim)) if j == 0 else np.kron(np.ones(dim), top))
        occupancy = float(np.real(np.trace(rho @ proj)))
        if occupancy > 1e-6:
            warnings.warn(
                f"mode {j} occupies the truncation edge with weight {occupancy:.2e}; "
                "moments may be biased", UserWarning)
    amps = np.array([np.trace(rho @ op) for op in ops])
    mean = np.concatenate([np.sqrt(2.0) * amps.real, np.sqrt(2.0) * amps.imag])
    nmat = np.zeros((n_modes, n_modes), dtype=complex)
    mmat = np.zeros((n_modes, n_modes), dtype=complex)
    for j in range(n_modes):
        for k in range(n_modes):
            nmat[j, k] = np.trace(rho @ ops[j].T.conj() @ ops[k]) - np.conj(amps[j]) * amps[k]
            mmat[j, k] = np.trace(rho @ ops[j] @ ops[k]) - amps[j] * amps[k]
    cxx = np.eye(n_modes) + 2.0 * (nmat.real + mmat.real)
    cpp = np.eye(n_modes) + 2.0 * (nmat.real - mmat.real)
    cxp = 2.0 * (mmat.imag + nmat.imag)
    cov = np.block([[cxx, cxp], [cxp.T, cpp]])
    return mean, 0.5 * (cov + cov.T)


def vacuum_rho(cutoff: int) -> np.ndarray:
    out = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    out[0, 0] = 1.0
    return out


def thermal_rho(nbar: float, cutoff: int) -> np.ndarray:
    """Thermal single-mode state, renormalized on the truncated space."""
    if nbar < 0:
        raise ValueError("nbar must be >= 0")
    if nbar == 0:
        return vacuum_rho(cutoff)
    p = (nbar / (1.0 + nbar)) ** np.arange(cutoff + 1)
    return np.diag(p / p.sum()).astype(complex)


def coherent_rho(alpha: complex, cutoff: int) -> np.ndarray:
    a = destroy(cutoff + 1)
    disp = expm(alpha * a.T.conj() - np.conj(alpha) * a)
    rho = disp @ vacuum_rho(cutoff) @ disp.T.conj()
    return rho / np.trace(rho).real


def squeezed_vacuum_rho(r_sq: float, cutoff: int) -> np.ndarray:
    """Squeezed vacuum with cov diag(e^{-2r}, e^{2r}) in the package convention."""
    a = destroy(cutoff + 1)
    sq = expm(0.5 * r_sq * (a @ a - a.T.conj() @ a.T.conj()))
    rho = sq @ vacuum_rho(cutoff) @ sq.T.conj()
    return rho / np.trace(rho).real


def kron_rho(rho_a: np.ndarray, rho_b: np.ndarray) -> np.ndarray:
    return np.kron(rho_a, rho_b)


def assert_density_matrix(rho: np.ndarray, herm_tol: float = 1e-12,
                          trace_tol: float = 1e-10, eig_tol: float = -1e-8):
    """Raise when rho fails Hermiticity, unit trace, or positivity tolerances."""
    if np.abs(rho - rho.T.conj()).max() > herm_tol:
        raise AssertionError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > trace_tol:
        raise AssertionError(f"trace {np.trace(rho).real} deviates from 1")
    if np.linalg.eigvalsh(0.5 * (rho + rho.T.conj())).min() < eig_tol:
        raise AssertionError("density matrix has a significantly negative eigenvalue")
