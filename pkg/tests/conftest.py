"""Shared test helpers: random physical states and Fock-space utilities."""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm, sqrtm

from oscbath.gaussian import GaussianState, symplectic_form


def random_symplectic(rng, n_modes: int, scale: float = 0.4) -> np.ndarray:
    """Random symplectic matrix exp(sigma G) with G symmetric."""
    d = 2 * n_modes
    g = rng.normal(size=(d, d))
    g = 0.5 * (g + g.T) * scale
    return expm(symplectic_form(n_modes) @ g)


def random_physical_state(rng, n_modes: int, min_nu: float = 1.05,
                          max_nu: float = 3.0, mean_scale: float = 1.0) -> GaussianState:
    """Random mixed Gaussian state with symplectic spectrum in [min_nu, max_nu]."""
    nus = rng.uniform(min_nu, max_nu, n_modes)
    diag = np.diag(np.concatenate([nus, nus]))
    s = random_symplectic(rng, n_modes)
    cov = s @ diag @ s.T
    mean = rng.normal(0.0, mean_scale, 2 * n_modes)
    return GaussianState(n_modes, mean, 0.5 * (cov + cov.T))


def random_symplectic_orthogonal(rng, n_modes: int) -> np.ndarray:
    """Random passive (symplectic and orthogonal) phase-space transformation."""
    o = np.linalg.qr(rng.normal(size=(n_modes, n_modes)))[0]
    block = np.block([[o, np.zeros_like(o)], [np.zeros_like(o), o]])
    theta = rng.uniform(0, 2 * np.pi)
    rot = np.cos(theta) * np.eye(2 * n_modes) + np.sin(theta) * symplectic_form(n_modes)
    return rot @ block


def fock_uhlmann_fidelity(rho1: np.ndarray, rho2: np.ndarray) -> float:
    """(Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2 by dense linear algebra."""
    root = sqrtm(0.5 * (rho1 + rho1.T.conj()))
    mid = root @ rho2 @ root
    mid = 0.5 * (mid + mid.T.conj())
    eig = np.linalg.eigvalsh(mid)
    return float(np.sum(np.sqrt(np.clip(eig, 0.0, None))) ** 2)


def fock_partial_trace_first(rho: np.ndarray, dim: int) -> np.ndarray:
    """Trace out the second mode of a two-mode density matrix (dim per mode)."""
    r = rho.reshape(dim, dim, dim, dim)
    return np.einsum("ikjk->ij", r)
