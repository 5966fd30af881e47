"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion lines
as they complete.  Tolerances are pinned here and never loosened at runtime.
"""

import time
import warnings

import numpy as np
from conftest import random_physical_state
from scipy.integrate import quad

from oscbath import fock
from oscbath.bath import (OhmicSpectrum, bose_occupation, corr_c0, corr_ct,
                          decay_rate, discretize, fwhh, j_of, lamb_shift,
                          omega_range)
from oscbath.config import ScenarioConfig
from oscbath.exact import (PropagatorCache, build_single, global_initial_state,
                           propagator, recurrence_time_estimate, reduced_state)
from oscbath.experiments import (driven_variant_error, linear_fit,
                                 recurrence_onset, run_factorization_distance,
                                 run_recurrence_map)
from oscbath.flows import (evolve_flow, flow_driven, flow_single,
                           flow_two_large_beta, flow_two_small_beta, k_matrices,
                           steady_state)
from oscbath.gaussian import (GaussianState, db_distance, fidelity_multi,
                              fidelity_one_mode, make_thermal, make_vacuum,
                              physicality_violation)


def report(number: int, description: str):
    def wrap(fn):
        def run():
            try:
                fn()
            except Exception:
                print(f"\nACCEPTANCE {number}: FAIL - {description}")
                raise
            print(f"\nACCEPTANCE {number}: PASS - {description}")
        run.__name__ = fn.__name__
        return run
    return wrap


def _flow_vs_fock(flow, spec, rho0, times, tol):
    mean0, cov0 = fock.moments(rho0, spec.n_modes, spec.cutoff)
    state0 = GaussianState(spec.n_modes, mean0, cov0)
    worst = 0.0
    for t in times:
        rho_t = fock.integrate(spec, rho0, t)
        mean_t, cov_t = fock.moments(rho_t, spec.n_modes, spec.cutoff)
        out = evolve_flow(flow, state0, t)
        worst = max(worst, np.abs(out.mean - mean_t).max(),
                    np.abs(out.cov - cov_t).max())
    assert worst <= tol, f"worst moment deviation {worst:.2e} > {tol}"


@report(1, "moment flows match the Fock referee to 1e-5 for all four families")
def test_criterion_1_oracle_equivalence():
    tic = time.time()
    tol = 1e-5
    cut1, cut2 = 30, 12

    # damped oscillator, three parameter points over three relaxation times
    for omega, gamma, nbar in ((1.0, 0.05, 0.0), (1.0, 0.05, 0.3), (1.3, 0.1, 0.8)):
        spec = fock.TruncatedLindbladSpec(
            1, 35, [[omega]], [[2 * gamma * (nbar + 1)]], [[2 * gamma * nbar]])
        rho0 = fock.squeezed_vacuum_rho(0.5, 35)
        horizon = 3.0 / (2 * gamma)
        _flow_vs_fock(flow_single(omega, gamma, nbar), spec, rho0,
                      (horizon / 3, horizon), tol)

    # weak-coupling two-oscillator equation
    for beta, gammas, nbars in ((0.01, (0.06, 0.06), (0.25, 0.25)),
                                (0.05, (0.05, 0.08), (0.3, 0.1)),
                                (0.08, (0.1, 0.1), (0.0, 0.3))):
        spec = fock.TruncatedLindbladSpec(
            2, cut2, [[1.0, beta], [beta, 1.0]],
            np.diag([2 * g * (n + 1) for g, n in zip(gammas, nbars)]),
            np.diag([2 * g * n for g, n in zip(gammas, nbars)]))
        rho0 = fock.kron_rho(fock.coherent_rho(0.35, cut2),
                             fock.thermal_rho(0.15, cut2))
        flow = flow_two_small_beta((1.0, 1.0), beta, gammas, nbars)
        horizon = 3.0 / (2 * min(gammas))
        _flow_vs_fock(flow, spec, rho0, (horizon / 3, horizon), tol)

    # strong-coupling two-oscillator equation (cross-mode rates); temperatures
    # kept below the lower normal mode so the cutoff-12 truncation stays clean
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for alpha, temps, beta in ((0.01, (0.5, 0.2), 0.3),
                                   (0.02, (0.4, 0.4), 0.2),
                                   (0.015, (0.5, 0.05), 0.25)):
            spectrum = OhmicSpectrum(alpha, 3.0)
            coeffs = k_matrices((spectrum, spectrum), temps, 1.0, beta)
            flow = flow_two_large_beta(coeffs)
            spec = fock.TruncatedLindbladSpec(
                2, cut2, [[coeffs.omega_bar, coeffs.beta_bar],
                          [coeffs.beta_bar, coeffs.omega_bar]],
                coeffs.k_emit, coeffs.k_abs)
            rho0 = fock.kron_rho(fock.coherent_rho(0.3, cut2),
                                 fock.squeezed_vacuum_rho(0.2, cut2))
            gmin = np.linalg.eigvalsh(coeffs.k_emit - coeffs.k_abs).min() / 2
            horizon = 3.0 / (2 * gmin)
            _flow_vs_fock(flow, spec, rho0, (horizon / 3, horizon), tol)

    # driven oscillator in the rotating frame
    for detuning, gamma, nbar, r_bar in ((1.0, 0.05, 0.0, 0.1 + 0.02j),
                                         (0.5, 0.08, 0.2, 0.15),
                                         (2.0, 0.1, 0.1, 0.2 - 0.05j)):
        omega_bar = 1.0 + detuning
        flow = flow_driven(omega_bar, gamma, nbar, r_bar, 1.0)
        spec = fock.TruncatedLindbladSpec(
            1, cut1, [[detuning]], [[2 * gamma * (nbar + 1)]],
            [[2 * gamma * nbar]], drive=[np.conj(r_bar)])
        rho0 = fock.coherent_rho(0.2, cut1)
        horizon = 3.0 / (2 * gamma)
        _flow_vs_fock(flow, spec, rho0, (horizon / 3, horizon), tol)

    elapsed = time.time() - tic
    assert elapsed < 120.0, f"oracle equivalence took {elapsed:.0f}s > 2 min"


@report(2, "propagator symplectic-orthogonality and group law at M = 350, t <= 200")
def test_criterion_2_propagator_invariants():
    spec = OhmicSpectrum(0.01, 3.0)
    bath = discretize(spec, 350, omega_range(spec, "equal_tails"))
    coupling = build_single(1.0, bath)
    tic = time.time()
    cache = PropagatorCache.build(coupling)
    assert time.time() - tic < 60.0
    n = cache.dim
    assert 2 * n == 702
    sigma = np.zeros((2 * n, 2 * n))
    sigma[:n, n:] = np.eye(n)
    sigma[n:, :n] = -np.eye(n)
    for t in (50.0, 200.0):
        m = propagator(cache, t)
        assert np.abs(m @ sigma @ m.T - sigma).max() <= 1e-9
    m1, m2 = propagator(cache, 78.5), propagator(cache, 121.5)
    assert np.abs(propagator(cache, 200.0) - m1 @ m2).max() <= 1e-9


@report(3, "Markovian steady covariance is (2n+1)I and the exact state relaxes to it")
def test_criterion_3_steady_state_and_relaxation():
    for nbar in (0.0, 0.4, 2.0):
        ss = steady_state(flow_single(1.0, 0.03, nbar))
        assert np.abs(ss.cov - (2 * nbar + 1) * np.eye(2)).max() <= 1e-10

    alpha, temp = 0.01, 1.0
    spec = OhmicSpectrum(alpha, 3.0)
    bath = discretize(spec, 150, omega_range(spec, "floor", floor=0.1))
    coupling = build_single(1.0, bath)
    cache = PropagatorCache.build(coupling)
    global0 = global_initial_state(coupling, make_thermal([1.0], 5.0), [bath], [temp])
    flow = flow_single(1.0 + lamb_shift(spec, 1.0), decay_rate(spec, 1.0),
                       bose_occupation(1.0, temp))
    target = steady_state(flow)
    horizon = 0.9 * recurrence_time_estimate(bath)
    dists = [db_distance(reduced_state(cache, t, global0), target)
             for t in np.linspace(0.0, horizon, 8)]
    assert all(b <= a + 1e-3 for a, b in zip(dists, dists[1:])), dists
    assert dists[-1] < 0.5 * dists[0]


@report(4, "steady-state fidelity of the two coupled-oscillator equations >= 0.9999")
def test_criterion_4_equal_temperature_steady_fidelity():
    # Regime with T below Omega for every tested temperature (see the decisions
    # ledger: at Omega ~ T the bound only holds for beta <~ 0.015 Omega).
    omega, omega_c, alpha = 100.0, 300.0, 0.01
    spectrum = OhmicSpectrum(alpha, omega_c)
    gamma = decay_rate(spectrum, omega)
    shift = lamb_shift(spectrum, omega)
    worst = 1.0
    for temp in (0.1, 1.0, 10.0):
        nbar = bose_occupation(omega, temp)
        for frac in (0.02, 0.05, 0.1):
            beta = frac * omega
            small = flow_two_small_beta((omega + shift,) * 2, beta,
                                        (gamma,) * 2, (nbar,) * 2)
            large = flow_two_large_beta(
                k_matrices((spectrum, spectrum), (temp, temp), omega, beta))
            f = fidelity_multi(steady_state(small), steady_state(large))
            worst = min(worst, f)
    assert worst >= 0.9999, f"worst steady-state fidelity {worst:.6f}"


@report(5, "recurrence onset grows linearly with bath size (R^2 > 0.9)")
def test_criterion_5_recurrence_scaling():
    tic = time.time()
    sizes = (50, 100, 150, 200)
    cfg = ScenarioConfig(scenario="single", omega=1.0, alpha=0.01, omega_c=3.0,
                         range_mode="equal_tails", temperature=1.0,
                         initial="thermal", initial_temperature=30.0,
                         t_max=1.0, samples=320)
    spec = OhmicSpectrum(cfg.alpha, cfg.omega_c)
    onsets = []
    for m in sizes:
        bath = discretize(spec, m, omega_range(spec, "equal_tails"))
        tau = recurrence_time_estimate(bath)
        from dataclasses import replace
        res = run_recurrence_map(replace(cfg, t_max=1.6 * tau,
                                         sweep_parameter="modes",
                                         sweep_values=(m,)))
        curve = [(t, v) for _, sv, t, q, v in res.rows if q == "bures_db"]
        times = np.array([t for t, _ in curve])
        vals = np.array([v for _, v in curve])
        onsets.append(recurrence_onset(times, vals, baseline_end=0.5 * tau))
    slope, _, r2 = linear_fit(sizes, onsets)
    assert slope > 0, onsets
    assert r2 > 0.9, (onsets, r2)
    assert time.time() - tic < 300.0


@report(6, "correlation kernels match quadrature; FWHH values and trend hold")
def test_criterion_6_correlation_kernels():
    spec = OhmicSpectrum(0.01, 3.0)
    upper = 60 * spec.omega_c

    def transform(f, s):
        if s == 0.0:
            re, _ = quad(f, 0, upper, limit=400)
            return re + 0j
        re, _ = quad(f, 0, upper, weight="cos", wvar=s, limit=400)
        im, _ = quad(f, 0, upper, weight="sin", wvar=s, limit=400)
        return re - 1j * im

    for s in (0.1, 1.0, 10.0):
        ref = transform(lambda w: j_of(spec, w), s)
        assert abs(corr_c0(spec, s) - ref) <= 1e-7

    for s, temp in ((0.0, 1.0), (1.0, 1.0), (1.0, 0.1)):
        f = lambda w: (j_of(spec, w) * bose_occupation(w, temp)
                       if w > 0 else spec.alpha * temp)
        ref = transform(f, s)
        assert abs(corr_ct(spec, s, temp) - ref) <= 1e-7

    width0 = fwhh(lambda s: abs(corr_c0(spec, s)), 10.0)
    assert abs(width0 - 2.0 / spec.omega_c) <= 1e-10

    widths = [fwhh(lambda s: abs(corr_ct(spec, s, t)), 60.0)
              for t in (1.0, 2.0, 5.0, 10.0, 20.0)]
    assert all(b <= a + 1e-9 for a, b in zip(widths, widths[1:])), widths


@report(7, "driven-variant error ordering across the detuning regimes")
def test_criterion_7_driven_variant_ordering():
    base = dict(scenario="driven", omega=1.0, alpha=0.01, omega_c=3.0,
                bath_modes=150, range_mode="floor", range_floor=0.1,
                temperature=0.2, initial="vacuum", rabi=0.3,
                t_max=40.0, samples=120)
    gamma = decay_rate(OhmicSpectrum(0.01, 3.0), 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for sign in (+1.0, -1.0):
            far = ScenarioConfig(**base, omega_l=1.0 + sign * 5 * gamma)
            assert (driven_variant_error(far, "plain")
                    > driven_variant_error(far, "no_secular"))
            near = ScenarioConfig(**base, omega_l=1.0 + sign * 0.1 * gamma)
            assert (driven_variant_error(near, "off_resonant")
                    > driven_variant_error(near, "plain"))


@report(8, "Gaussian-core formulas agree and invariants hold on 1000 random states")
def test_criterion_8_gaussian_core():
    rng = np.random.default_rng(2024)

    worst = 0.0
    for _ in range(100):
        a = random_physical_state(rng, 1)
        b = random_physical_state(rng, 1)
        worst = max(worst, abs(fidelity_one_mode(a, b) - fidelity_multi(a, b)))
    assert worst <= 1e-10

    for nbar in (0.3, 1.0, 4.0):
        rho = fock.thermal_rho(nbar, 250)
        th = GaussianState(1, np.zeros(2), (2 * nbar + 1) * np.eye(2))
        assert abs(fidelity_one_mode(make_vacuum(1), th) - rho[0, 0].real) <= 1e-8

    states = [random_physical_state(rng, rng.integers(1, 4)) for _ in range(1000)]
    for st in states:
        assert physicality_violation(st) >= -1e-10
    for _ in range(200):
        i, j = rng.integers(0, 1000, 2)
        if states[i].n_modes != states[j].n_modes:
            continue
        f_ab = fidelity_multi(states[i], states[j])
        f_ba = fidelity_multi(states[j], states[i])
        assert abs(f_ab - f_ba) <= 1e-12


@report(9, "factorization distance: zero start, monotone growth, slope ordered in alpha")
def test_criterion_9_factorization_trends():
    tic = time.time()
    cfg = ScenarioConfig(scenario="single", omega=1.0, omega_c=3.0,
                         bath_modes=40, range_mode="floor", range_floor=0.1,
                         temperature=1.0, initial="thermal",
                         initial_temperature=30.0, t_max=12.0, samples=60,
                         sweep_parameter="alpha",
                         sweep_values=(0.0005, 0.002, 0.008))
    res = run_factorization_distance(cfg)
    slopes = []
    for alpha in cfg.sweep_values:
        key = format(alpha, ".17g")
        curve = [(t, v) for _, sv, t, q, v in res.rows
                 if q == "bures_db" and sv == key]
        vals = np.array([v for _, v in curve])
        # D_B = sqrt(1 - F) amplifies the ~1e-9 fidelity rounding of the
        # 41-mode evaluation: "zero" start means below 1e-4 here
        assert vals[0] <= 1e-4
        assert np.all(np.diff(vals) >= -1e-6)
        slopes.append(vals[-1] / curve[-1][0])
    assert slopes[0] < slopes[1] < slopes[2], slopes
    assert time.time() - tic < 180.0
