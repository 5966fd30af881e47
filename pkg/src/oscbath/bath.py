"""Ohmic bath model: spectral density, discretization, rates, shifts, correlations.

The continuous bath is J(omega) = alpha * omega * exp(-omega/omega_c).  A finite
simulation bath is a set of modes {omega_j, g_j} with g_j^2 = J(omega_j) * dw on
an equally spaced grid, so that sum_j g_j^2 delta(omega - omega_j) -> J(omega).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import expi

__all__ = [
    "OhmicSpectrum",
    "BathCouplings",
    "j_of",
    "total_spectral_weight",
    "omega_range",
    "discretize",
    "bose_occupation",
    "decay_rate",
    "lamb_shift",
    "thermal_shift",
    "corr_c0",
    "corr_ct",
    "trigamma",
    "principal_value_integral",
    "fwhh",
    "system_timescale",
]


class SpectralDensity(Protocol):
    """Anything exposing J(omega); only the Ohmic family is implemented here."""

    def j(self, omega): ...


@dataclass(frozen=True)
class OhmicSpectrum:
    """Ohmic spectral density alpha * omega * exp(-omega/omega_c)."""

    alpha: float
    omega_c: float

    def __post_init__(self):
        if self.alpha <= 0 or self.omega_c <= 0:
            raise ValueError("alpha and omega_c must be positive")

    def j(self, omega):
        omega = np.asarray(omega, dtype=float)
        if np.any(omega < 0):
            raise ValueError("spectral density defined for omega >= 0")
        return self.alpha * omega * np.exp(-omega / self.omega_c)


@dataclass(frozen=True)
class BathCouplings:
    """Discretized bath: ascending frequencies omega_j and couplings g_j >= 0."""

    frequencies: np.ndarray
    couplings: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=float)
        gs = np.asarray(self.couplings, dtype=float)
        if freqs.ndim != 1 or freqs.shape != gs.shape:
            raise ValueError("frequencies and couplings must be 1-d arrays of equal length")
        if np.any(np.diff(freqs) <= 0):
            raise ValueError("bath frequencies must be strictly increasing")
        if np.any(gs < 0):
            raise ValueError("couplings must be non-negative")
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "couplings", gs)

    @property
    def size(self) -> int:
        return self.frequencies.size


def j_of(spectrum: OhmicSpectrum, omega):
    """Evaluate J(omega); raises for negative omega."""
    return spectrum.j(omega)


def total_spectral_weight(spectrum: OhmicSpectrum) -> float:
    """Integral of J over (0, inf), equal to alpha * omega_c^2."""
    return spectrum.alpha * spectrum.omega_c**2


def omega_range(spectrum: OhmicSpectrum, mode: str = "equal_tails", *,
                floor: float | None = None, omega_min: float | None = None):
    """Frequency window (omega_1, omega_max) covering the spectral density.

    ``equal_tails`` picks omega_max so that the neglected left tail
    (0, omega_1) and right tail (omega_max, inf) carry equal spectral weight;
    omega_1 defaults to omega_c / 1000.  ``floor`` sets omega_1 = floor and
    solves J(omega_max) = J(floor) on the decaying side omega_max > omega_c.
    """
    wc = spectrum.omega_c
    if mode == "equal_tails":
        w1 = wc * 1e-3 if omega_min is None else float(omega_min)
        if not 0 < w1 < wc:
            raise ValueError("omega_min must lie in (0, omega_c)")
        # tail masses divided by alpha*omega_c: left = omega_c - e^{-w1/wc}(w1+wc)
        target = wc - np.exp(-w1 / wc) * (w1 + wc)
        fun = lambda w: (w + wc) * np.exp(-w / wc) - target
    elif mode == "floor":
        if floor is None or not 0 < floor < wc:
            raise ValueError("floor mode requires 0 < floor < omega_c")
        w1 = float(floor)
        jc = float(spectrum.j(w1))
        fun = lambda w: float(spectrum.j(w)) - jc
    else:
        raise ValueError(f"unknown range mode {mode!r}")

    lo, hi = wc, 2.0 * wc
    for _ in range(200):
        if fun(hi) < 0:
            break
        hi *= 1.5
    else:
        raise ArithmeticError(f"no sign change while bracketing omega_max in [{wc}, {hi}]")
    try:
        wmax = brentq(fun, lo, hi, xtol=1e-14, rtol=1e-15)
    except (ValueError, RuntimeError) as exc:
        raise ArithmeticError(f"omega_max root-finding failed on bracket [{lo}, {hi}]") from exc
    return w1, float(wmax)


def discretize(spectrum: OhmicSpectrum, n_modes: int, rng: tuple[float, float]) -> BathCouplings:
    """Equally spaced bath modes on [omega_1, omega_max] with g_j^2 = J(omega_j) dw."""
    if n_modes < 2:
        raise ValueError("need at least 2 bath modes")
    w1, wmax = rng
    if not 0 < w1 < wmax:
        raise ValueError(f"invalid frequency range ({w1}, {wmax})")
    freqs = np.linspace(w1, wmax, n_modes)
    dw = (wmax - w1) / (n_modes - 1)
    gs = np.sqrt(spectrum.j(freqs) * dw)
    return BathCouplings(freqs, gs)


def bose_occupation(omega, temperature: float):
    """Bose-Einstein occupation 1/(exp(omega/T) - 1); zero at T = 0."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("bose_occupation requires omega > 0")
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    if temperature == 0:
        out = np.zeros_like(omega)
        return float(out) if out.ndim == 0 else out
    # exp(-x)/(1 - exp(-x)) never overflows, unlike 1/expm1(x)
    ex = np.exp(-omega / temperature)
    out = ex / (1.0 - ex)
    return float(out) if out.ndim == 0 else out


def decay_rate(spectrum: OhmicSpectrum, nu: float) -> float:
    """Golden-rule decay rate gamma(nu) = pi * J(nu)."""
    if nu <= 0:
        raise ValueError("decay_rate requires nu > 0")
    return float(np.pi * spectrum.j(nu))


def lamb_shift(spectrum: OhmicSpectrum, nu: float) -> float:
    """Frequency shift Delta(nu) = alpha*nu*exp(-nu/omega_c)*Ei(nu/omega_c) - alpha*omega_c.

    Closed form of the principal-value integral of J(omega)/(nu - omega); the
    temperature never enters.
    """
    if nu <= 0:
        raise ValueError("lamb_shift requires nu > 0")
    x = nu / spectrum.omega_c
    return float(spectrum.alpha * nu * np.exp(-x) * expi(x) - spectrum.alpha * spectrum.omega_c)


def principal_value_integral(f: Callable[[float], float], nu: float, upper: float) -> float:
    """P.V. integral of f(omega)/(nu - omega) over (0, upper) with 0 < nu < upper.

    The singular window (nu-h, nu+h) is folded into the regular integrand
    [f(nu-u) - f(nu+u)]/u; the remaining smooth pieces use adaptive quadrature.
    """
    if not 0 < nu < upper:
        raise ValueError("singularity must lie inside (0, upper)")
    h = 0.5 * min(nu, upper - nu)
    sym, _ = quad(lambda u: (f(nu - u) - f(nu + u)) / u, 0.0, h, limit=200)
    left, _ = quad(lambda w: f(w) / (nu - w), 0.0, nu - h, limit=200)
    pieces = [sym, left]
    # split the long right tail so the quadrature resolves the exponential decay
    cuts = [nu + h]
    for c in (nu + 10 * h, upper / 2):
        if cuts[-1] < c < upper:
            cuts.append(c)
    cuts.append(upper)
    for a, b in zip(cuts[:-1], cuts[1:]):
        val, _ = quad(lambda w: f(w) / (nu - w), a, b, limit=200)
        pieces.append(val)
    return float(sum(pieces))


def thermal_shift(spectrum: OhmicSpectrum, nu: float, temperature: float) -> float:
    """Thermal counterpart Delta'(nu) = P.V. integral of J(omega) n(omega,T)/(nu - omega).

    Diagnostic only: the implemented master equations carry the bare shift.
    """
    if nu <= 0:
        raise ValueError("thermal_shift requires nu > 0")
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    if temperature == 0:
        return 0.0

    def f(w):
        if w <= 0:
            return spectrum.alpha * temperature  # limit of J(w)*n(w) as w -> 0
        return float(spectrum.j(w)) * float(bose_occupation(w, temperature))

    upper = nu + 40.0 * spectrum.omega_c
    return principal_value_integral(f, nu, upper)


def corr_c0(spectrum: OhmicSpectrum, s):
    """Zero-temperature bath correlation C0(s) = alpha*omega_c^2/(1 + i*s*omega_c)^2."""
    s = np.asarray(s, dtype=float)
    out = spectrum.alpha * spectrum.omega_c**2 / (1j * s * spectrum.omega_c + 1.0) ** 2
    return complex(out) if out.ndim == 0 else out


_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6)


def trigamma(q):
    """Trigamma psi'(q) = zeta(2, q) for complex q with Re q > 0.

    Recurrence psi'(q) = psi'(q+1) + 1/q^2 until Re q >= 10, then the
    asymptotic Bernoulli series; relative accuracy ~1e-15 on that domain.
    """
    q = np.atleast_1d(np.asarray(q, dtype=complex)).copy()
    if np.any(q.real <= 0):
        raise ValueError("trigamma implemented for Re q > 0 only")
    scalar = q.size == 1
    acc = np.zeros_like(q)
    shifts = np.maximum(0, np.ceil(10.0 - q.real)).astype(int)
    for j in range(int(shifts.max(initial=0))):
        mask = j < shifts
        acc[mask] += 1.0 / q[mask] ** 2
        q[mask] += 1.0
    tail = 1.0 / q + 0.5 / q**2
    qpow = q**3
    for b in _BERNOULLI:
        tail += b / qpow
        qpow *= q**2
    out = acc + tail
    return complex(out[0]) if scalar else out


def corr_ct(spectrum: OhmicSpectrum, s, temperature: float):
    """Finite-temperature correlation C(s,T) = alpha*T^2*zeta(2, 1 + i*s*T + T/omega_c).

    Expanding the Bose factor in exp(-k*omega/T) and integrating term by term
    gives the Hurwitz zeta with argument 1 + T/omega_c + i*s*T; this carries
    Im C < 0 for s > 0, consistent with the e^{-i omega s} transform of J
    (and with corr_c0), and is checked against direct quadrature in the tests.
    """
    if temperature <= 0:
        raise ValueError("corr_ct requires T > 0")
    s = np.asarray(s, dtype=float)
    q = 1.0 + 1j * s * temperature + temperature / spectrum.omega_c
    out = spectrum.alpha * temperature**2 * trigamma(q)
    return complex(out) if np.ndim(s) == 0 else out


def fwhh(f: Callable[[float], float], search_bound: float) -> float:
    """Full width at half height of |f|: twice the first s > 0 with |f(s)| = f(0)/2."""
    f0 = abs(f(0.0))
    if f0 <= 0:
        raise ValueError("fwhh requires f(0) > 0")
    half = 0.5 * f0
    g = lambda s: abs(f(s)) - half
    grid = np.linspace(0.0, search_bound, 4097)
    vals = np.array([g(s) for s in grid])
    below = np.nonzero(vals < 0)[0]
    if below.size == 0:
        raise ArithmeticError(f"|f| never crosses half height within [0, {search_bound}]")
    i = below[0]
    root = brentq(g, grid[i - 1], grid[i], xtol=1e-14, rtol=1e-15)
    return 2.0 * float(root)


def system_timescale(spectrum: OhmicSpectrum) -> float:
    """Rough system evolution timescale 1/sqrt(alpha) (diagnostic only)."""
    return 1.0 / np.sqrt(spectrum.alpha)
