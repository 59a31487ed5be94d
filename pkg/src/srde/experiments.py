"""Monte Carlo campaigns confronting simulation with every checkable bound.

Each run_* function consumes a frozen config dataclass, loops replicas in
index order with per-replica noise streams, and returns a report object the
CLI serializes.  Replica statistics use batch-mean standard errors (sup-type
statistics are far from Gaussian, batch means stay robust).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import moment_bounds
from .coefficients import CoefficientSpec, MollifiedFamily, coefficient_preset, mollify
from .convolution import (
    stoch_conv_direct_at_nodes,
    stoch_conv_direct_full,
    stoch_conv_direct_series,
    variance_closed_form,
)
from .errors import ConfigError, HorizonError, InvalidArgumentError, InsufficientLagsError
from .grid import Field, GridSpec, Trajectory
from .gronwall import (
    PiecewiseConstantRates,
    ZeroForcingData,
    verify_log_gronwall,
    zero_forcing_bound,
    zero_forcing_bound_log,
    zero_forcing_iterations,
    zero_forcing_t_star,
)
from .heat_kernel import KernelEstimateId, kernel_row, sweep_estimate
from .noise import sample_noise, split_stream
from .reporting import batch_standard_error
from .solver import SolveConfig, StoppingMonitor, resolution_overshoot, solve, solve_tracked, stopping_times
from .weights import WeightParams, WeightSchedule, beta, static_weighted_norm, weighted_sup_values


# --- kernel inequality sweep -------------------------------------------------

@dataclass(frozen=True)
class KernelSweepConfig:
    samples: int = 1000
    seed: int = 7
    t_range: tuple[float, float] = (0.02, 3.0)
    x_range: tuple[float, float] = (-4.0, 4.0)
    eta_range: tuple[float, float] = (0.01, 2.5)


@dataclass(frozen=True)
class KernelSweepReport:
    rows: list  # KernelSweepRow
    violations: int


def run_kernel_sweep(cfg: KernelSweepConfig) -> KernelSweepReport:
    rows = []
    for stream, est in enumerate(KernelEstimateId):
        rows.extend(
            sweep_estimate(
                est,
                samples=cfg.samples,
                seed=cfg.seed,
                t_range=cfg.t_range,
                x_range=cfg.x_range,
                eta_range=cfg.eta_range,
                stream=stream,
            )
        )
    return KernelSweepReport(rows=rows, violations=sum(r.violated for r in rows))


# --- Gronwall sweeps ---------------------------------------------------------

@dataclass(frozen=True)
class GronwallSweepConfig:
    families: int = 100
    seed: int = 7
    t_max: float = 1.0
    segments: int = 8
    steps: int = 256
    ratio_tolerance: float = 1e-4
    theta_levels: int = 12
    zero_forcing_rate: float = 1.0  # c in c3 = c/(1-theta)


@dataclass(frozen=True)
class GronwallSweepReport:
    family_ratios: np.ndarray
    max_ratio: float
    times: np.ndarray
    zero_forcing_thetas: np.ndarray
    zero_forcing_log_bounds: np.ndarray
    zero_forcing_bounds: np.ndarray
    zero_forcing_t_star: float
    zero_forcing_iterations: int
    strictly_decreasing: bool
    final_bound: float
    rows: list  # (family, t, ode, bound, ratio) for the CSV


def run_gronwall_sweep(cfg: GronwallSweepConfig) -> GronwallSweepReport:
    rng = np.random.Generator(np.random.Philox(key=np.array([cfg.seed, 0], dtype=np.uint64)))
    ratios = np.empty(cfg.families)
    rows: list[tuple] = []
    for fam in range(cfg.families):
        c1_vals = rng.uniform(0.0, 1.5, cfg.segments)
        c2_vals = rng.uniform(0.0, 1.5, cfg.segments)
        m0 = rng.uniform(1.0, 3.0)
        rates = PiecewiseConstantRates(c1_vals, c2_vals, cfg.t_max)
        report = verify_log_gronwall(
            rates.data(M=m0), cfg.t_max, steps=cfg.steps, tolerance=cfg.ratio_tolerance
        )
        ratios[fam] = report.max_ratio
        stride = max(1, len(report.times) // 16)
        for idx in range(0, len(report.times), stride):
            rows.append(
                (
                    fam,
                    report.times[idx],
                    report.ode_values[idx],
                    report.bounds[idx],
                    report.ode_values[idx] / report.bounds[idx]
                    if report.bounds[idx] not in (0.0, math.inf)
                    else math.nan,
                )
            )

    # canonical zero-forcing family: c2 = 0, c3 = c/(1-theta)
    c = cfg.zero_forcing_rate
    zf = ZeroForcingData(
        c1=lambda t: 0.0,
        c2=lambda t: 0.0,
        c3=lambda t, th: c / (1.0 - th),
        T=1.0,
        delta_T=c,
    )
    ks = np.arange(1, cfg.theta_levels + 1)
    thetas = 1.0 - 2.0 ** (-ks.astype(np.float64))
    log_bounds = np.array([zero_forcing_bound_log(zf, th) for th in thetas])
    bounds = np.array([zero_forcing_bound(zf, th) for th in thetas])
    decreasing = bool(np.all(np.diff(log_bounds) < 0.0))
    return GronwallSweepReport(
        family_ratios=ratios,
        max_ratio=float(ratios.max()),
        times=np.linspace(0.0, cfg.t_max, cfg.steps + 1),
        zero_forcing_thetas=thetas,
        zero_forcing_log_bounds=log_bounds,
        zero_forcing_bounds=bounds,
        zero_forcing_t_star=zero_forcing_t_star(zf),
        zero_forcing_iterations=zero_forcing_iterations(zf),
        strictly_decreasing=decreasing,
        final_bound=float(bounds[-1]),
        rows=rows,
    )


# --- moment bounds -----------------------------------------------------------

@dataclass(frozen=True)
class MomentConfig:
    grid: GridSpec = field(default_factory=lambda: GridSpec(5.0, 101, 1e-3, 100))
    drift: str = "zero"
    sigma: str = "constant-diffusion(1.0)"
    p_high: float = 12.0
    p_low: float = 1.0
    epsilon: float = 0.25
    h_terminal: float = 1.0
    replicas: int = 1000
    seed: int = 7
    variance_check: bool = True
    variance_replicas: int = 10000
    variance_grid: GridSpec = field(default_factory=lambda: GridSpec(6.0, 121, 1e-3, 1000))
    rhs_scale: float = 1.0  # test hook; a corrupted (<1) scale must trip the verifier


@dataclass(frozen=True)
class MomentReport:
    p_high: float
    lhs_high: float
    lhs_high_se: float
    rhs_high: float
    log10_rhs_high: float
    margin_high: float
    p_low: float
    epsilon: float
    lhs_low: float
    lhs_low_se: float
    rhs_low: float
    log10_constant_low: float
    margin_low: float
    high_ok: bool
    low_ok: bool
    constant_increasing_in_T: bool
    constant_decreasing_to_zero: bool
    sweep_T: np.ndarray
    sweep_log_constant: np.ndarray
    variance: "VarianceReport | None" = None


@dataclass(frozen=True)
class VarianceReport:
    estimate: float
    target: float
    band: tuple[float, float]
    inside: bool
    replicas: int


def _margin(rhs: float, lhs: float) -> float:
    if lhs == 0.0:
        return 1.0 if rhs == 0.0 else math.inf
    return rhs / lhs


def run_variance_check(cfg: MomentConfig) -> VarianceReport:
    """Pointwise variance of the unit-diffusion convolution at t = horizon, x = 0."""
    g = cfg.variance_grid
    xs = g.nodes()
    # exact-lag kernel values against each noise slice, built once; the
    # increments already carry the dt*dx cell scale
    lags = (g.nt - np.arange(g.nt)) * g.dt
    rows = np.stack([kernel_row(lag, 0.0, xs) for lag in lags])
    samples = np.empty(cfg.variance_replicas)
    for r in range(cfg.variance_replicas):
        slab = sample_noise(g, *split_stream(cfg.seed, r))
        samples[r] = float(np.sum(rows * slab.increments))
    est = float(np.var(samples, ddof=1))
    target = variance_closed_form(g.horizon)
    band = (0.95 * target, 1.05 * target)
    return VarianceReport(
        estimate=est,
        target=target,
        band=band,
        inside=band[0] <= est <= band[1],
        replicas=cfg.variance_replicas,
    )


def _sigma_frames_for(cfg_grid: GridSpec, coeffs: CoefficientSpec, replica_slab, weights) -> np.ndarray:
    """Per-step sigma(u) frames; constant-sigma presets skip the solve."""
    probe = np.array([-1.0, 0.0, 2.0])
    sig_vals = np.asarray(coeffs.sigma(probe), dtype=np.float64)
    drift_vals = np.asarray(coeffs.b(probe), dtype=np.float64)
    if np.all(drift_vals == 0.0) and np.all(sig_vals == sig_vals[0]):
        return np.full((cfg_grid.nt, cfg_grid.nx), sig_vals[0])
    solve_cfg = SolveConfig(
        grid=cfg_grid,
        coeffs=coeffs,
        weights=weights,
        initial=Field(cfg_grid, np.zeros(cfg_grid.nx)),
        noise=replica_slab,
        monitor=None,
    )
    traj = solve(solve_cfg)
    u = traj.stacked()[: cfg_grid.nt]
    return np.asarray(coeffs.sigma(u), dtype=np.float64)


def run_moment_experiment(cfg: MomentConfig) -> MomentReport:
    coeffs = coefficient_preset(cfg.drift, cfg.sigma)
    g = cfg.grid
    if cfg.replicas < 2:
        raise ConfigError("config field 'run.replicas' must be >= 2 for moment estimation")
    weights = WeightParams(lam=max(cfg.h_terminal, 1e-6), kappa=max(coeffs.c1, 0.0))
    probe = np.array([-1.0, 0.0, 2.0])
    sigma_probe = np.asarray(coeffs.sigma(probe), dtype=np.float64)
    fast = np.all(np.asarray(coeffs.b(probe)) == 0.0) and np.all(sigma_probe == sigma_probe[0])
    if not fast and resolution_overshoot(g) > 0.01:
        raise ConfigError(
            "config section 'grid' under-resolves the one-step kernel for a "
            "solve-backed moment run; increase dt or refine dx"
        )

    xs = g.nodes()
    h = cfg.h_terminal
    weight_mat = np.exp(-h * np.abs(xs))[None, :]
    T = g.horizon

    sups = np.empty(cfg.replicas)
    sup_sigma = np.empty(cfg.replicas)
    integrals_low = np.empty(cfg.replicas)
    integrals_high = np.empty(cfg.replicas)
    w_space = np.full(g.nx, g.dx)
    w_space[0] = w_space[-1] = 0.5 * g.dx
    const_sig = np.full((g.nt, g.nx), sigma_probe[0]) if fast else None
    for r in range(cfg.replicas):
        slab = sample_noise(g, *split_stream(cfg.seed, r))
        sig = const_sig if fast else _sigma_frames_for(g, coeffs, slab, weights)
        v = stoch_conv_direct_full(sig, slab)
        sups[r] = float(np.max(np.abs(v) * weight_mat))
        sup_sigma[r] = float(np.max(np.abs(sig) * weight_mat))
        # grid quadrature of int |sigma|^p e^{-p h |x|} dx dt (left endpoint
        # in time, trapezoid in space); a grid quadrature under the full-line
        # integral, so using it on the bound side only tightens the check
        for p, store in ((cfg.p_low, integrals_low), (cfg.p_high, integrals_high)):
            integrand = np.abs(sig) ** p * np.exp(-p * h * np.abs(xs))[None, :]
            store[r] = float(np.sum(integrand @ w_space) * g.dt)

    K = coeffs.K_sigma

    # high order: E sup (|V| e^{-h|x|})^p <= C(p) * int |sigma|^p e^{-p h |x|}
    lhs_high_samples = sups ** cfg.p_high
    lhs_high = float(np.mean(lhs_high_samples))
    lhs_high_se = batch_standard_error(lhs_high_samples)
    log_c_high = moment_bounds.log_constant_high_order(cfg.p_high, h, T)
    if fast:
        # constant sigma: the full-line integral in closed form
        integral_high = 0.0 if K == 0.0 else 2.0 * T * K**cfg.p_high / (cfg.p_high * h)
    else:
        integral_high = float(np.mean(integrals_high))
    if integral_high == 0.0:
        rhs_high = 0.0
        log_rhs_high = -math.inf
    else:
        log_rhs_high = log_c_high + math.log(integral_high) + math.log(cfg.rhs_scale)
        rhs_high = math.exp(log_rhs_high) if log_rhs_high < 709.0 else math.inf
    margin_high = _margin(rhs_high, lhs_high)
    high_ok = rhs_high >= lhs_high - 3.0 * lhs_high_se

    # lower order: E sup^p <= eps E sup(|sigma|e^{-h|x|})^p + C(eps,p) * integral
    lhs_low_samples = sups ** cfg.p_low
    lhs_low = float(np.mean(lhs_low_samples))
    lhs_low_se = batch_standard_error(lhs_low_samples)
    log_c_low = moment_bounds.log_constant_lower_order(cfg.epsilon, cfg.p_low, h, T)
    integral_low = float(np.mean(integrals_low))
    eps_term = cfg.epsilon * float(np.mean(sup_sigma ** cfg.p_low))
    log_c_low_scaled = log_c_low + math.log(cfg.rhs_scale)
    c_low = math.exp(log_c_low_scaled) if log_c_low_scaled < 709.0 else math.inf
    rhs_low = eps_term + (0.0 if integral_low == 0.0 else c_low * integral_low)
    margin_low = _margin(rhs_low, lhs_low)
    low_ok = rhs_low >= lhs_low - 3.0 * lhs_low_se

    # monotonicity of the explicit lower-order constant in the horizon
    sweep_up = np.array([0.05, 0.1, 0.2, 0.4])
    logs_up = np.array(
        [moment_bounds.log_constant_lower_order(cfg.epsilon, cfg.p_low, h, t) for t in sweep_up]
    )
    sweep_down = 10.0 ** (-np.arange(1, 5, dtype=np.float64))
    logs_down = np.array(
        [moment_bounds.log_constant_lower_order(cfg.epsilon, cfg.p_low, h, t) for t in sweep_down]
    )
    increasing = bool(np.all(np.diff(logs_up) > 0.0))
    decreasing = bool(np.all(np.diff(logs_down) < 0.0))

    variance = run_variance_check(cfg) if cfg.variance_check else None
    return MomentReport(
        p_high=cfg.p_high,
        lhs_high=lhs_high,
        lhs_high_se=lhs_high_se,
        rhs_high=rhs_high,
        log10_rhs_high=log_rhs_high / math.log(10.0),
        margin_high=margin_high,
        p_low=cfg.p_low,
        epsilon=cfg.epsilon,
        lhs_low=lhs_low,
        lhs_low_se=lhs_low_se,
        rhs_low=rhs_low,
        log10_constant_low=log_c_low / math.log(10.0),
        margin_low=margin_low,
        high_ok=high_ok,
        low_ok=low_ok,
        constant_increasing_in_T=increasing,
        constant_decreasing_to_zero=decreasing,
        sweep_T=np.concatenate([sweep_down[::-1], sweep_up]),
        sweep_log_constant=np.concatenate([logs_down[::-1], logs_up]),
        variance=variance,
    )


# --- a-priori pathwise bound -------------------------------------------------

@dataclass(frozen=True)
class AprioriConfig:
    grid: GridSpec = field(default_factory=lambda: GridSpec(10.0, 201, 1e-2, 10))
    drift: str = "xlogx(1.0)"
    sigma: str = "tanh-diffusion(0.4)"
    initial: str = "gaussian(1.0, 1.0)"
    decay: float = 2.0  # lambda
    replicas: int = 200
    seed: int = 11


@dataclass(frozen=True)
class AprioriChain:
    """The explicit constant chain of the pathwise bound, all factors named."""

    lam: float
    c1: float
    c2: float
    T: float
    beta: float
    peak_growth: float        # Psi(T) = exp((lam^2/(4 beta)) e^(2 beta T - 1))
    absorption: float         # (c1/beta) * Psi(T), must be <= 1/2
    moment_rate: float        # 2 Psi(T) (lam^2 e^(2 beta T) T + lam e^(beta T) sqrt(T/(2 pi)))
    rate_linear: float        # doubled linear Gronwall rate
    rate_log: float           # doubled log Gronwall rate

    @classmethod
    def build(cls, lam: float, c1: float, c2: float, T: float) -> "AprioriChain":
        b = beta(lam, c1) if c1 > 0 else beta(lam, 0.0)
        psi = math.exp(lam * lam / (4.0 * b) * math.exp(2.0 * b * T - 1.0))
        absorption = (c1 / b) * psi
        moment_rate = 2.0 * psi * (
            lam * lam * math.exp(2.0 * b * T) * T
            + lam * math.exp(b * T) * math.sqrt(T / (2.0 * math.pi))
        )
        return cls(
            lam=lam, c1=c1, c2=c2, T=T, beta=b,
            peak_growth=psi,
            absorption=absorption,
            moment_rate=moment_rate,
            rate_linear=2.0 * c1 * moment_rate,
            rate_log=4.0 * c1 * psi,
        )

    def rhs(self, u0_norm: float, v_norm: float) -> float:
        # after absorbing (c1/beta) Psi U(T) <= U(T)/2 and doubling:
        # U(T) <= M + rate_linear * int U + rate_log * int U log+ U,
        # M = max(1, 2*(2 e^(lam^2 T/2) |u0| + |V| + c2 T)),
        # then the log-Gronwall closed form with constant rates.
        if self.absorption > 0.5 + 1e-12:
            raise HorizonError(
                f"absorption factor {self.absorption} exceeds 1/2; horizon past t_star"
            )
        head = 2.0 * math.exp(self.lam * self.lam * self.T / 2.0) * u0_norm
        M = max(1.0, 2.0 * (head + v_norm + self.c2 * self.T))
        E = math.exp(self.rate_log * self.T)
        if self.rate_log > 0:
            inner = self.rate_linear / self.rate_log * (1.0 - math.exp(-self.rate_log * self.T))
        else:
            inner = self.rate_linear * self.T
        log_rhs = E * math.log(M) + E * inner
        return math.exp(log_rhs) if log_rhs < 709.0 else math.inf


@dataclass(frozen=True)
class AprioriReport:
    chain: AprioriChain
    t_star: float
    u_norms: np.ndarray
    rhs_values: np.ndarray
    margins: np.ndarray
    violations: int
    incomplete: int
    tail_budget: float
    tail_budget_ok: bool


def run_apriori_experiment(cfg: AprioriConfig) -> AprioriReport:
    from .config import InitialSection

    coeffs = coefficient_preset(cfg.drift, cfg.sigma)
    if coeffs.c1 <= 0:
        raise ConfigError("config field 'coefficients.drift' must have c1 > 0 for the pathwise bound")
    weights = WeightParams(lam=cfg.decay, kappa=coeffs.c1)
    g = cfg.grid
    if g.horizon > weights.t_star * (1 + 1e-12):
        raise HorizonError(
            f"horizon {g.horizon} exceeds t_star={weights.t_star} for "
            f"(lambda={cfg.decay}, kappa={coeffs.c1}); lower the horizon or lambda"
        )
    initial = InitialSection(cfg.initial).build(g)
    chain = AprioriChain.build(cfg.decay, coeffs.c1, coeffs.c2, g.horizon)
    u0_norm = static_weighted_norm(initial, cfg.decay)
    xs = g.nodes()
    abs_xs = np.abs(xs)
    h_of_t = cfg.decay * np.exp(chain.beta * np.arange(g.nt + 1) * g.dt)

    u_norms = np.empty(cfg.replicas)
    rhs_values = np.empty(cfg.replicas)
    incomplete = 0
    for r in range(cfg.replicas):
        slab = sample_noise(g, *split_stream(cfg.seed, r))
        out = solve_tracked(
            SolveConfig(
                grid=g, coeffs=coeffs, weights=weights, initial=initial,
                noise=slab, monitor=None, enforce_horizon=True,
            ),
            track_stoch=True,
        )
        if not out.trajectory.status.is_completed:
            incomplete += 1
        values = out.trajectory.stacked()
        n_frames = values.shape[0]
        u_norms[r] = weighted_sup_values(values, xs, h_of_t[:n_frames])
        v_norm = float(np.max(np.abs(out.stoch_convolution) * np.exp(-cfg.decay * abs_xs)[None, :]))
        rhs_values[r] = chain.rhs(u0_norm, v_norm)

    margins = rhs_values / np.maximum(u_norms, 1e-300)
    violations = int(np.sum(u_norms > rhs_values))
    tail_budget = math.exp(-cfg.decay * g.half_width) * float(np.mean(rhs_values))
    tail_ok = tail_budget < 1e-6 * float(np.mean(u_norms))
    return AprioriReport(
        chain=chain,
        t_star=weights.t_star,
        u_norms=u_norms,
        rhs_values=rhs_values,
        margins=margins,
        violations=violations,
        incomplete=incomplete,
        tail_budget=tail_budget,
        tail_budget_ok=tail_ok,
    )


# --- Hoelder moduli ----------------------------------------------------------

@dataclass(frozen=True)
class HolderConfig:
    # lag/separation windows sit inside the scaling regime of the discrete
    # object: time lags well above dt (endpoint bias ~ 1/sqrt(lag/dt)) and
    # separations between ~4*sqrt(dt) (below which the time cutoff makes the
    # moment quadratic) and ~0.3*sqrt(T) (above which it saturates)
    time_grid: GridSpec = field(default_factory=lambda: GridSpec(10.0, 201, 1e-3, 262))
    time_lags: tuple[int, ...] = (32, 48, 72, 108, 162)
    time_bases: tuple[int, ...] = (60, 70, 80, 90, 100)
    time_node_offsets: tuple[int, ...] = (-80, -40, 0, 40, 80)
    time_replicas: int = 250
    space_grid: GridSpec = field(default_factory=lambda: GridSpec(10.0, 401, 2.5e-4, 2000))
    space_seps: tuple[int, ...] = (2, 3, 4, 6, 8)
    space_base_span: int = 40
    space_base_step: int = 10
    space_replicas: int = 250
    sigma: str = "constant-diffusion(1.0)"
    seed: int = 13
    batches: int = 10


@dataclass(frozen=True)
class HolderReport:
    time_lags: np.ndarray
    time_moments: np.ndarray
    time_slope: float
    time_slope_se: float
    space_seps: np.ndarray
    space_moments: np.ndarray
    space_slope: float
    space_slope_se: float
    degenerate: bool


def _fit_slope(log_x: np.ndarray, log_y: np.ndarray) -> float:
    return float(np.polyfit(log_x, log_y, 1)[0])


def run_holder_experiment(cfg: HolderConfig) -> HolderReport:
    if len(cfg.time_lags) < 5 or len(cfg.space_seps) < 5:
        raise InsufficientLagsError("scaling fits need at least 5 lags/separations")
    coeffs = coefficient_preset("zero", cfg.sigma)
    if coeffs.K_sigma == 0.0:
        return HolderReport(
            time_lags=np.asarray(cfg.time_lags, dtype=float),
            time_moments=np.zeros(len(cfg.time_lags)),
            time_slope=math.nan, time_slope_se=math.nan,
            space_seps=np.asarray(cfg.space_seps, dtype=float),
            space_moments=np.zeros(len(cfg.space_seps)),
            space_slope=math.nan, space_slope_se=math.nan,
            degenerate=True,
        )

    # time moduli: E |V(t0 + l dt, 0) - V(t0, 0)|^2 against the lag
    gt = cfg.time_grid
    if max(b + l for b in cfg.time_bases for l in cfg.time_lags) > gt.nt:
        raise ConfigError("config field 'holder.time_lags/time_bases' exceed the grid horizon")
    nodes = np.asarray(
        [gt.nx // 2 + off for off in cfg.time_node_offsets], dtype=np.int64
    )
    if nodes.min() < 0 or nodes.max() >= gt.nx:
        raise ConfigError("config field 'holder.time_node_offsets' exceed the grid width")
    sig_const = float(np.asarray(coeffs.sigma(np.zeros(1)))[0])
    sig_frames_t = np.full((gt.nt, gt.nx), sig_const)
    sq_time = np.zeros((cfg.time_replicas, len(cfg.time_lags)))
    base_idx = np.asarray(cfg.time_bases, dtype=np.int64)
    for r in range(cfg.time_replicas):
        slab = sample_noise(gt, *split_stream(cfg.seed, r))
        series = stoch_conv_direct_series(sig_frames_t, slab, nodes)
        for i, lag in enumerate(cfg.time_lags):
            diffs = series[base_idx + lag, :] - series[base_idx, :]
            sq_time[r, i] = float(np.mean(diffs**2))
    time_moments = sq_time.mean(axis=0)
    log_lags = np.log(np.asarray(cfg.time_lags, dtype=float) * gt.dt)
    time_slope = _fit_slope(log_lags, np.log(time_moments))
    time_slope_se = _batch_slope_se(sq_time, log_lags, cfg.batches)

    # space moduli: E |V(T, x) - V(T, y)|^2 against |x - y|
    gs = cfg.space_grid
    bases = gs.nx // 2 + np.arange(-cfg.space_base_span, cfg.space_base_span + 1, cfg.space_base_step)
    if bases.min() < 0 or bases.max() + max(cfg.space_seps) >= gs.nx:
        raise ConfigError("config field 'holder.space_base_span/seps' exceed the grid width")
    node_set = np.unique(np.concatenate([bases + s for s in (0, *cfg.space_seps)]))
    pos = {int(n): i for i, n in enumerate(node_set)}
    sq_space = np.zeros((cfg.space_replicas, len(cfg.space_seps)))
    sig_frames = np.full((gs.nt, gs.nx), sig_const)
    for r in range(cfg.space_replicas):
        slab = sample_noise(gs, *split_stream(cfg.seed + 1, r))
        terminal = stoch_conv_direct_at_nodes(sig_frames, slab, gs.nt, node_set)
        for i, sep in enumerate(cfg.space_seps):
            diffs = np.array(
                [terminal[pos[int(b + sep)]] - terminal[pos[int(b)]] for b in bases]
            )
            sq_space[r, i] = float(np.mean(diffs**2))
    space_moments = sq_space.mean(axis=0)
    log_seps = np.log(np.asarray(cfg.space_seps, dtype=float) * gs.dx)
    space_slope = _fit_slope(log_seps, np.log(space_moments))
    space_slope_se = _batch_slope_se(sq_space, log_seps, cfg.batches)

    return HolderReport(
        time_lags=np.asarray(cfg.time_lags, dtype=float) * gt.dt,
        time_moments=time_moments,
        time_slope=time_slope,
        time_slope_se=time_slope_se,
        space_seps=np.asarray(cfg.space_seps, dtype=float) * gs.dx,
        space_moments=space_moments,
        space_slope=space_slope,
        space_slope_se=space_slope_se,
        degenerate=False,
    )


def _batch_slope_se(per_replica: np.ndarray, log_x: np.ndarray, batches: int) -> float:
    n = per_replica.shape[0]
    b = min(batches, n)
    cut = (n // b) * b
    means = per_replica[:cut].reshape(b, -1, per_replica.shape[1]).mean(axis=1)
    slopes = np.array([_fit_slope(log_x, np.log(m)) for m in means])
    return float(np.std(slopes, ddof=1) / math.sqrt(b))


# --- shared-noise uniqueness probe --------------------------------------------

@dataclass(frozen=True)
class UniquenessConfig:
    grid: GridSpec = field(default_factory=lambda: GridSpec(10.0, 201, 1e-2, 10))
    drift: str = "xlogx(1.0)"
    sigma: str = "tanh-diffusion(0.4)"
    initial: str = "gaussian(1.0, 1.0)"
    decay: float = 2.0
    levels: tuple[int, ...] = (4, 8, 16)
    replicas: int = 48
    seed: int = 17
    ceiling: float = 1e-2
    blow_up_level: float = 1e6
    closeness_level: float = math.exp(-1.0)
    mollifier_quad_points: int = 128


@dataclass(frozen=True)
class UniquenessReport:
    levels: np.ndarray
    distances: np.ndarray          # stopped variant (sup up to tau_M^delta)
    distances_se: np.ndarray
    distances_unstopped: np.ndarray
    distances_unstopped_se: np.ndarray
    tau_m_hits: np.ndarray
    tau_delta_hits: np.ndarray
    nonincreasing_within_2se: bool
    final_below_ceiling: bool
    zero_forcing_ceiling_log: float


def run_uniqueness_probe(cfg: UniquenessConfig) -> UniquenessReport:
    from .config import InitialSection

    base = coefficient_preset(cfg.drift, cfg.sigma)
    if base.c3 is None or base.c4 is None or base.c5 is None:
        raise ConfigError(
            "config field 'coefficients.drift' must be a log-Lipschitz preset "
            "(xlogx or linear) for the uniqueness probe"
        )
    levels = tuple(cfg.levels)
    if any(l < 1 for l in levels) or list(levels) != sorted(levels):
        raise ConfigError("config field 'uniqueness.levels' must be increasing positive integers")
    kappa = base.c4 if base.c4 > 0 else base.c1
    weights = WeightParams(lam=cfg.decay, kappa=kappa)
    g = cfg.grid
    if g.horizon > weights.t_star * (1 + 1e-12):
        raise HorizonError(
            f"horizon {g.horizon} exceeds t_star={weights.t_star}; lower horizon or lambda"
        )
    initial = InitialSection(cfg.initial).build(g)
    monitor = StoppingMonitor(
        blow_up_level=cfg.blow_up_level,
        closeness_level=cfg.closeness_level,
        enabled=True,
    )

    needed = sorted({n for n in levels} | {2 * n for n in levels})
    families = {n: mollify(base, n, cfg.mollifier_quad_points) for n in needed}
    sched = weights.schedule()
    xs = g.nodes()
    abs_xs = np.abs(xs)

    z_stopped = np.zeros((cfg.replicas, len(levels)))
    z_full = np.zeros((cfg.replicas, len(levels)))
    tau_m_hits = np.zeros(len(levels))
    tau_d_hits = np.zeros(len(levels))
    for r in range(cfg.replicas):
        slab = sample_noise(g, *split_stream(cfg.seed, r))
        trajs: dict[int, Trajectory] = {}
        for n in needed:
            trajs[n] = solve(
                SolveConfig(
                    grid=g, coeffs=families[n], weights=weights,
                    initial=initial, noise=slab, monitor=None,
                )
            )
        for i, n in enumerate(levels):
            a, b2 = trajs[n], trajs[2 * n]
            taus = stopping_times(a, b2, monitor, weights)
            n_frames = min(len(a.frames), len(b2.frames))
            diffs = a.stacked()[:n_frames] - b2.stacked()[:n_frames]
            h_of_t = np.array([sched.h(k * g.dt) for k in range(n_frames)])
            wdiff = np.abs(diffs) * np.exp(-h_of_t[:, None] * abs_xs[None, :])
            per_frame = wdiff.max(axis=1)
            z_full[r, i] = float(per_frame.max())
            k_stop = min(int(round(taus.tau / g.dt)), n_frames - 1)
            z_stopped[r, i] = float(per_frame[: k_stop + 1].max())
            if taus.tau_M < math.inf:
                tau_m_hits[i] += 1
            if taus.tau_delta < math.inf:
                tau_d_hits[i] += 1

    dist = z_stopped.mean(axis=0)
    dist_se = np.array([batch_standard_error(z_stopped[:, i]) for i in range(len(levels))])
    dist_full = z_full.mean(axis=0)
    dist_full_se = np.array([batch_standard_error(z_full[:, i]) for i in range(len(levels))])

    ok = True
    for i in range(len(levels) - 1):
        allowance = 2.0 * math.hypot(dist_se[i], dist_se[i + 1])
        if dist[i + 1] > dist[i] + allowance:
            ok = False

    # certified theta-sweep ceiling for the same constant structure (reported
    # for context; the configured ceiling governs the pass/fail)
    zf = ZeroForcingData(
        c1=lambda t: 1.0, c2=lambda t: 1.0, c3=lambda t, th: 1.0 / (1.0 - th),
        T=g.horizon, delta_T=1.0,
    )
    zf_log = zero_forcing_bound_log(zf, 1.0 - 2.0**-12)

    return UniquenessReport(
        levels=np.asarray(levels, dtype=int),
        distances=dist,
        distances_se=dist_se,
        distances_unstopped=dist_full,
        distances_unstopped_se=dist_full_se,
        tau_m_hits=tau_m_hits,
        tau_delta_hits=tau_d_hits,
        nonincreasing_within_2se=ok,
        final_below_ceiling=bool(dist[-1] <= cfg.ceiling),
        zero_forcing_ceiling_log=zf_log,
    )
