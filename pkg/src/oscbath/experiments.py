"""Experiment runners: each reproduces one figure-class of the study as a tidy table.

Every runner takes a ScenarioConfig and returns an ExperimentResult whose rows
are (sweep_param, sweep_value, t, quantity, value).  Runs are deterministic:
identical configs produce byte-identical CSV, regardless of thread count
(threads only parallelize independent sweep points; results are ordered).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .bath import (OhmicSpectrum, bose_occupation, corr_c0, corr_ct, decay_rate,
                   discretize, fwhh, lamb_shift, omega_range)
from .config import ConfigError, ScenarioConfig, config_text, validate
from .exact import (PropagatorCache, build_drive, build_single, build_two,
                    global_initial_state, propagator, reduced_driven_state,
                    reduced_state)
from .flows import (evolve_flow, flow_driven, flow_single, flow_two_large_beta,
                    flow_two_small_beta, k_matrices, rabi_renormalizations)
from .gaussian import (GaussianState, db_distance, fidelity_multi, make_coherent,
                       make_squeezed_vacuum, make_thermal, make_vacuum,
                       partial_trace, tensor_product)

__all__ = [
    "ExperimentResult",
    "run_experiment",
    "run_variance_trajectory",
    "run_fidelity_vs_time",
    "run_recurrence_map",
    "run_correlation_study",
    "run_factorization_distance",
    "run_two_oscillator_suite",
    "run_driven_suite",
    "recurrence_onset",
    "linear_fit",
    "driven_variant_error",
]

CSV_HEADER = "sweep_param,sweep_value,t,quantity,value"

_CONVENTION_NOTE = ("x=(a+a^dag)/sqrt(2), block (x...,p...) ordering, vacuum "
                    "covariance = identity; driven runs are reported in the "
                    "frame rotating at omega_l")


def _g17(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class ExperimentResult:
    """Tidy rows plus a metadata header echoing the full configuration."""

    name: str
    config: ScenarioConfig
    rows: list

    def to_csv(self) -> str:
        lines = [f"# oscbath {__version__}", f"# experiment: {self.name}",
                 f"# conventions: {_CONVENTION_NOTE}", "# config:"]
        for line in config_text(self.config).splitlines():
            lines.append(f"# {line}" if line else "#")
        lines.append(CSV_HEADER)
        for sweep_param, sweep_value, t, quantity, value in self.rows:
            lines.append(f"{sweep_param},{sweep_value},{_g17(t)},{quantity},{_g17(value)}")
        return "\n".join(lines) + "\n"


def config_from_csv(text: str) -> ScenarioConfig:
    """Recover the configuration echoed in a result header (round-trip contract)."""
    from .config import parse_config

    lines = []
    in_config = False
    for line in text.splitlines():
        if line.startswith("# config:"):
            in_config = True
            continue
        if in_config:
            if not line.startswith("#"):
                break
            lines.append(line[2:] if line.startswith("# ") else "")
    return parse_config("\n".join(lines))


def _pmap(fn, items, threads: int):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# scenario assembly helpers

def _spectrum(config: ScenarioConfig) -> OhmicSpectrum:
    return OhmicSpectrum(config.alpha, config.omega_c)


def _bath(config: ScenarioConfig, spectrum: OhmicSpectrum, modes: int | None = None):
    m = config.bath_modes if modes is None else modes
    if m == 0:
        return None
    omega_min = config.range_omega_min if config.range_omega_min > 0 else None
    rng = omega_range(spectrum, config.range_mode, floor=config.range_floor,
                      omega_min=omega_min)
    return discretize(spectrum, m, rng)


def _system_state(config: ScenarioConfig, n_modes: int) -> GaussianState:
    if config.initial == "vacuum":
        return make_vacuum(n_modes)
    if config.initial == "thermal":
        freqs = [config.omega, config.omega2][:n_modes]
        return make_thermal(freqs, config.initial_temperature)
    if config.initial == "squeezed":
        state = make_squeezed_vacuum(config.initial_squeeze)
    else:
        state = make_coherent(complex(config.initial_coherent_re,
                                      config.initial_coherent_im))
    if n_modes == 2:
        state = tensor_product(state, state)
    return state


def _times(config: ScenarioConfig) -> np.ndarray:
    return np.linspace(0.0, config.t_max, config.samples)


def _single_pieces(config: ScenarioConfig, *, temperature=None, modes=None,
                   spectrum=None):
    """Coupling cache, global initial state, and flow inputs for one oscillator."""
    spec = spectrum if spectrum is not None else _spectrum(config)
    temp = config.temperature if temperature is None else temperature
    bath = _bath(config, spec, modes)
    coupling = build_single(config.omega, bath)
    cache = PropagatorCache.build(coupling)
    sys0 = _system_state(config, 1)
    global0 = global_initial_state(coupling, sys0, [bath], [temp])
    gamma = decay_rate(spec, config.omega)
    nbar = bose_occupation(config.omega, temp)
    shift = lamb_shift(spec, config.omega)
    return spec, bath, cache, sys0, global0, gamma, nbar, shift


# ---------------------------------------------------------------------------
# experiments

def run_variance_trajectory(config: ScenarioConfig, threads: int = 1) -> ExperimentResult:
    """2(dx)^2 of the oscillator: exact bath vs Markovian flow with/without shift."""
    if config.scenario != "single":
        raise ConfigError("variance_trajectory requires scenario=single")
    times = _times(config)
    rows = []
    spec, bath, cache, sys0, global0, gamma, nbar, shift = _single_pieces(config)
    have_flow = bath is not None
    if have_flow:
        flow_shift = flow_single(config.omega + shift, gamma, nbar)
        flow_plain = flow_single(config.omega, gamma, nbar)
    for t in times:
        exact = reduced_state(cache, t, global0)
        rows.append(("none", "", t, "var2x_exact", exact.cov[0, 0]))
        if have_flow:
            rows.append(("none", "", t, "var2x_markov_shift",
                         evolve_flow(flow_shift, sys0, t).cov[0, 0]))
            rows.append(("none", "", t, "var2x_markov_noshift",
                         evolve_flow(flow_plain, sys0, t).cov[0, 0]))
    return ExperimentResult("variance_trajectory", config, rows)


def _single_fidelity_curve(config: ScenarioConfig, temperature: float) -> list:
    _, _, cache, sys0, global0, gamma, nbar, shift = _single_pieces(
        config, temperature=temperature)
    flow = flow_single(config.omega + shift, gamma, nbar)
    out = []
    for t in _times(config):
        exact = reduced_state(cache, t, global0)
        markov = evolve_flow(flow, sys0, t)
        out.append((t, fidelity_multi(exact, markov)))
    return out


def run_fidelity_vs_time(config: ScenarioConfig, threads: int = 1) -> ExperimentResult:
    """Fidelity between exact reduced state and the Markovian prediction over time."""
    rows = []
    if config.scenario == "single":
        temps = [float(v) for v in config.sweep_values] \
            if config.sweep_parameter == "temperature" else [config.temperature]
        curves = _pmap(lambda T: _single_fidelity_curve(config, T), temps, threads)
        for temp, curve in zip(temps, curves):
            for t, f in curve:
                rows.append(("temperature", _g17(temp), t, "fidelity", f))
    elif config.scenario == "two_coupled":
        for eq, curve in _two_oscillator_curves(config, threads).items():
            for t, f in curve:
                rows.append(("equation", eq, t, "fidelity", f))
    else:
        variants = [str(v) for v in config.sweep_values] \
            if config.sweep_parameter == "variant" else list(("plain", "off_resonant", "no_secular"))
        curves = _pmap(lambda v: _driven_fidelity_curve(config, v), variants, threads)
        for variant, curve in zip(variants, curves):
            for t, f in curve:
                rows.append(("variant", variant, t, "fidelity", f))
    return ExperimentResult("fidelity_vs_time", config, rows)


def _recurrence_curve(config: ScenarioConfig, modes: int) -> list:
    _, _, cache, sys0, global0, gamma, nbar, shift = _single_pieces(config, modes=modes)
    flow = flow_single(config.omega + shift, gamma, nbar)
    out = []
    for t in _times(config):
        exact = reduced_state(cache, t, global0)
        markov = evolve_flow(flow, sys0, t)
        out.append((t, db_distance(exact, markov)))
    return out


def run_recurrence_map(config: ScenarioConfig, threads: int = 1) -> ExperimentResult:
    """D_B between exact and Markovian states on a (t, bath size) grid."""
    if config.scenario != "single":
        raise ConfigError("recurrence_map requires scenario=single")
    if config.sweep_parameter != "modes" or not config.sweep_values:
        raise ConfigError("recurrence_map requires a sweep over modes")
    sizes = [int(v) for v in config.sweep_values]
    curves = _pmap(lambda m: _recurrence_curve(config, m), sizes, threads)
    rows = []
    for m, curve in zip(sizes, curves):
        for t, d in curve:
            rows.append(("modes", str(m), t, "bures_db", d))
    return ExperimentResult("recurrence_map", config, rows)


def run_correlation_study(config: ScenarioConfig, threads: int = 1) -> ExperimentResult:
    """|C(s,T)| curves and FWHH(T), plus the zero-temperature kernel."""
    spec = _spectrum(config)
    temps = [float(v) for v in config.sweep_values] \
        if config.sweep_parameter == "temperature" else [config.temperature]
    s_grid = _times(config)
    bound = max(config.t_max, 20.0 / spec.omega_c)
    rows = []
    for s in s_grid:
        rows.append(("none", "", s, "abs_corr_c0", abs(corr_c0(spec, s))))
    rows.append(("none", "", 0.0, "fwhh_c0",
                 fwhh(lambda s: abs(corr_c0(spec, s)), bound)))
    for temp in temps:
        if temp <= 0:
            raise ConfigError("correlation_study temperatures must be positive")
        for s in s_grid:
            rows.append(("temperature", _g17(temp), s, "abs_corr_ct",
                         abs(corr_ct(spec, s, temp))))
        # the thermal kernel broadens like 1/T, so the width search must too
        rows.append(("temperature", _g17(temp), 0.0, "fwhh_ct",
                     fwhh(lambda s: abs(corr_ct(spec, s, temp)),
                          max(bound, 10.0 / temp))))
    return ExperimentResult("correlation_study", config, rows)


def _factorization_curve(config: ScenarioConfig, alpha: float) -> list:
    spec = OhmicSpectrum(alpha, config.omega_c)
    _, bath, cache, sys0, global0, _, _, _ = _single_pieces(config, spectrum=spec)
    bath_thermal = make_thermal(bath.frequencies, config.temperature)
    n = cache.dim
    out = []
    for t in _times(config):
        prop = propagator(cache, t)
        full = GaussianState(n, prop @ global0.mean, prop @ global0.cov @ prop.T)
        ansatz = tensor_product(partial_trace(full, {0}), bath_thermal)
        out.append((t, db_distance(full, ansatz)))
    return out


def run_factorization_distance(config: ScenarioConfig, threads: int = 1) -> ExperimentResult:
    """D_B between the full evolved state and the product ansatz rho_S(t) x rho_th."""
    if config.scenario != "single":
        raise ConfigError("factorization_distance requires scenario=single")
    if config.bath_modes > 60:
        raise ConfigError("factorization_distance caps the bath at 60 modes "
                          "(full-state fidelity)")
    alphas = [float(v) for v in config.sweep_values] \
        if config.sweep_parameter == "alpha" else [config.alpha]
    curves = _pmap(lambda a: _factorization_curve(config, a), alphas, threads)
    rows = []
    for alpha, curve in zip(alphas, curves):
        for t, d in curve:
            rows.append(("alpha", _g17(alpha), t, "bures_db", d))
    return ExperimentResult("factorization_distance", config, rows)


# -- two-oscillator machinery -----------------------------------------------

def _two_pieces(config: ScenarioConfig, beta: float | None = None):
    if config.omega2 != config.omega:
        raise ConfigError("the two-oscillator study assumes equal frequencies "
                          "Omega1 = Omega2")
    b = config.beta if beta is None else beta
    spec = _spectrum(config)
    t1, t2 = config.bath_temperatures
    bath1 = _bath(config, spec)
    bath2 = _bath(config, spec)
    coupling = build_two(config.omega, config.omega2, b, bath1, bath2)
    cache = PropagatorCache.build(coupling)
    sys0 = _system_state(config, 2)
    global0 = global_initial_state(coupling, sys0, [bath1, bath2], [t1, t2])
    gammas = (decay_rate(spec, config.omega), decay_rate(spec, config.omega2))
    nbars = (bose_occupation(config.omega, t1), bose_occupation(config.omega2, t2))
    shift = lamb_shift(spec, config.omega)
    small = flow_two_small_beta((config.omega + shift, config.omega2 + shift),
                                b, gammas, nbars)
    large = flow_two_large_beta(k_matrices((spec, spec), (t1, t2), config.omega, b))
    return cache, sys0, global0, small, large


def _two_oscillator_curves(config: ScenarioConfig, threads: int = 1):
    cache, sys0, global0, small, large = _two_pieces(config)
    curves = {"small_beta": [], "large_beta": []}
    for t in _times(config):
        exact = reduced_state(cache, t, global0)
        curves["small_beta"].append((t, fidelity_multi(exact, evolve_flow(small, sys0, t))))
        curves["large_beta"].append((t, fidelity_multi(exact, evolve_flow(large, sys0, t))))
    return curves


DEFAULT_BETA_GRID = (0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2)


def run_two_oscillator_suite(config: ScenarioConfig, threads: int = 1) -> ExperimentResult:
    """Fidelity vs t for both equations, vs beta at t_max, and between equations."""
    if config.scenario != "two_coupled":
        raise ConfigError("two_oscillator_suite requires scenario=two_coupled")
    rows = []
    for eq, curve in _two_oscillator_curves(config, threads).items():
        for t, f in curve:
            rows.append(("equation", eq, t, "fidelity", f))

    betas = [float(v) for v in config.sweep_values] \
        if config.sweep_parameter == "beta" else \
        [b * config.omega for b in DEFAULT_BETA_GRID]

    def at_fixed_time(beta):
        cache, sys0, global0, small, large = _two_pieces(config, beta=beta)
        t = config.t_max
        exact = reduced_state(cache, t, global0)
        return (fidelity_multi(exact, evolve_flow(small, sys0, t)),
                fidelity_multi(exact, evolve_flow(large, sys0, t)))

    for beta, (f_small, f_large) in zip(betas, _pmap(at_fixed_time, betas, threads)):
        rows.append(("beta", _g17(beta), config.t_max, "fidelity_small_beta", f_small))
        rows.append(("beta", _g17(beta), config.t_max, "fidelity_large_beta", f_large))

    cache, sys0, global0, small, large = _two_pieces(config)
    for t in _times(config):
        f = fidelity_multi(evolve_flow(small, sys0, t), evolve_flow(large, sys0, t))
        rows.append(("none", "", t, "fidelity_between_equations", f))
    return ExperimentResult("two_oscillator_suite", config, rows)


# -- driven machinery ---------------------------------------------------------

def _driven_pieces(config: ScenarioConfig, variant: str, *, rabi=None, omega_l=None):
    spec = _spectrum(config)
    r = config.rabi if rabi is None else rabi
    wl = config.omega_l if omega_l is None else omega_l
    bath = _bath(config, spec)
    coupling = build_single(config.omega, bath)
    drive = build_drive(coupling, r, wl)
    sys0 = _system_state(config, 1)
    global0 = global_initial_state(coupling, sys0, [bath], [config.temperature])
    gamma = decay_rate(spec, config.omega)
    nbar = bose_occupation(config.omega, config.temperature)
    omega_bar = config.omega + lamb_shift(spec, config.omega)
    r_bar = rabi_renormalizations(spec, config.omega, wl, r, variant)
    flow = flow_driven(omega_bar, gamma, nbar, r_bar, wl)
    return drive, sys0, global0, flow


def _driven_fidelity_curve(config: ScenarioConfig, variant: str, *, rabi=None,
                           omega_l=None) -> list:
    drive, sys0, global0, flow = _driven_pieces(config, variant, rabi=rabi,
                                                omega_l=omega_l)
    out = []
    for t in _times(config):
        exact = reduced_driven_state(drive, t, global0)
        markov = evolve_flow(flow, sys0, t)
        out.append((t, fidelity_multi(exact, markov)))
    return out


def driven_variant_error(config: ScenarioConfig, variant: str, *, rabi=None,
                         omega_l=None) -> float:
    """Time-averaged D_B between exact and Markovian driven evolution."""
    drive, sys0, global0, flow = _driven_pieces(config, variant, rabi=rabi,
                                                omega_l=omega_l)
    dists = []
    for t in _times(config):
        exact = reduced_driven_state(drive, t, global0)
        markov = evolve_flow(flow, sys0, t)
        dists.append(db_distance(exact, markov))
    return float(np.mean(dists))


DEFAULT_DETUNING_GRID = (-0.5, -0.2, -0.1, -0.05, -0.02, -0.005,
                         0.005, 0.02, 0.05, 0.1, 0.2, 0.5)
DEFAULT_RABI_GRID = (0.01, 0.02, 0.05, 0.1, 0.2, 0.5)
VARIANTS = ("plain", "off_resonant", "no_secular")


def run_driven_suite(config: ScenarioConfig, threads: int = 1) -> ExperimentResult:
    """Driven-oscillator fidelities vs time, detuning (at t_max) and Rabi frequency."""
    if config.scenario != "driven":
        raise ConfigError("driven_suite requires scenario=driven")
    rows = []
    curves = _pmap(lambda v: _driven_fidelity_curve(config, v), VARIANTS, threads)
    for variant, curve in zip(VARIANTS, curves):
        for t, f in curve:
            rows.append(("variant", variant, t, "fidelity", f))

    detunings = [float(v) for v in config.sweep_values] \
        if config.sweep_parameter == "detuning" else list(DEFAULT_DETUNING_GRID)

    def at_detuning(delta):
        wl = config.omega + delta
        out = []
        for variant in VARIANTS:
            curve = _driven_fidelity_curve(config, variant, omega_l=wl)
            out.append(curve[-1][1])
        return out

    for delta, fids in zip(detunings, _pmap(at_detuning, detunings, threads)):
        for variant, f in zip(VARIANTS, fids):
            rows.append(("detuning", _g17(delta), config.t_max,
                         f"fidelity_{variant}", f))

    rabis = [float(v) for v in config.sweep_values] \
        if config.sweep_parameter == "rabi" else list(DEFAULT_RABI_GRID)

    def at_rabi(r):
        return [_driven_fidelity_curve(config, v, rabi=r)[-1][1] for v in VARIANTS]

    for r, fids in zip(rabis, _pmap(at_rabi, rabis, threads)):
        for variant, f in zip(VARIANTS, fids):
            rows.append(("rabi", _g17(r), config.t_max, f"fidelity_{variant}", f))
    return ExperimentResult("driven_suite", config, rows)


_RUNNERS = {
    "variance_trajectory": run_variance_trajectory,
    "fidelity_vs_time": run_fidelity_vs_time,
    "recurrence_map": run_recurrence_map,
    "correlation_study": run_correlation_study,
    "factorization_distance": run_factorization_distance,
    "two_oscillator_suite": run_two_oscillator_suite,
    "driven_suite": run_driven_suite,
}


def run_experiment(name: str, config: ScenarioConfig, threads: int = 1) -> ExperimentResult:
    validate(config)
    if name not in _RUNNERS:
        raise ConfigError(f"unknown experiment {name!r}")
    return _RUNNERS[name](config, threads)


# ---------------------------------------------------------------------------
# analysis helpers

def recurrence_onset(times, values, baseline_end: float, factor: float = 3.0) -> float:
    """First time the distance exceeds ``factor`` times its pre-recurrence median.

    The baseline window starts after the initial adjustment transient (first
    tenth of the window) and ends at ``baseline_end``.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    window = (times > 0.1 * baseline_end) & (times <= baseline_end)
    if window.sum() < 3:
        raise ValueError("baseline window too short to estimate an onset")
    threshold = factor * np.median(values[window])
    beyond = np.nonzero((times > baseline_end) & (values > threshold))[0]
    if beyond.size == 0:
        raise ArithmeticError("no recurrence onset detected within the time grid")
    return float(times[beyond[0]])


def linear_fit(x, y):
    """Least-squares line fit returning (slope, intercept, r_squared)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    total = y - y.mean()
    r2 = 1.0 - float(resid @ resid) / float(total @ total)
    return float(slope), float(intercept), r2
