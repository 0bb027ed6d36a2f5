"""Randomized protocol/decoherence ensembles and time-constant scaling studies."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import curve_fit

from wstab.analysis import NoAdmissibleWindow, fit_time_constant, w_decay_rate
from wstab.dynamics import EvolutionSettings, LindbladGenerator, evolve
from wstab.protocol.hamiltonian import HamiltonianSpec, build_hamiltonian
from wstab.protocol.hypergraph import HypergraphConfig
from wstab.protocol.jumps import modular_jump_coefficients
from wstab.protocol.spec import DEFAULT_LAMBDA, DecoherenceRates, ProtocolSpec, build_protocol, dissipators_for_config

log = logging.getLogger(__name__)

FAILURE_PLATEAU = 1e-6
SCALING_MODELS = ("poly2", "poly3", "exponential")
ANGLE_DOMAIN = (0.0, 2 * np.pi)
RSS_FLOOR = 1e-30


def sample_seed(base_seed: int, index: int) -> int:
    """Per-sample seed: first 64-bit word of ``SeedSequence([base_seed, index])``."""
    return int(np.random.SeedSequence([int(base_seed), int(index)]).generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class Distribution:
    samples: tuple[float, ...]

    @property
    def summary(self) -> dict:
        x = np.asarray([s for s in self.samples if np.isfinite(s)], dtype=float)
        if x.size == 0:
            return {"count": 0, "median": None, "q1": None, "q3": None, "min": None, "max": None}
        q1, med, q3 = np.percentile(x, [25, 50, 75])
        return {
            "count": int(x.size),
            "median": float(med),
            "q1": float(q1),
            "q3": float(q3),
            "min": float(x.min()),
            "max": float(x.max()),
        }


@dataclass
class SampleResult:
    sample_index: int
    seed: int
    params: dict
    tau: float = float("nan")
    rate: float = float("nan")
    epsilon_inf: float = float("nan")
    r_squared: float = float("nan")
    converged: bool = False
    failed: bool = False
    note: str = ""


@dataclass
class SweepResult:
    kind: str
    samples: list
    settings: dict
    meta: dict = field(default_factory=dict)

    @property
    def n_failed(self) -> int:
        return sum(s.failed for s in self.samples)

    def rates(self) -> Distribution:
        return Distribution(tuple(s.rate for s in self.samples))

    def epsilons(self) -> Distribution:
        return Distribution(tuple(s.epsilon_inf for s in self.samples))


def _run_stabilization(protocol: ProtocolSpec, settings: EvolutionSettings) -> dict:
    trace = evolve(LindbladGenerator(protocol), None, settings)
    out = {"epsilon_inf": trace.epsilon_inf, "converged": trace.converged}
    try:
        fit = fit_time_constant(trace)
        out.update(tau=fit.tau, rate=1.0 / fit.tau, r_squared=fit.r_squared, failed=False, note="")
    except NoAdmissibleWindow as exc:
        # A missing window only counts as failure when the infidelity also stalls.
        out.update(failed=trace.epsilon_inf > FAILURE_PLATEAU, note=str(exc))
    return out


def _protocol_task(args):
    config, hamiltonian, lam, index, seed, settings, fixed = args
    if fixed is None:
        rng = np.random.default_rng(seed)
        draws = rng.uniform(*ANGLE_DOMAIN, size=(config.m, 2))
    else:
        draws = np.tile(np.asarray(fixed, dtype=float), (config.m, 1))
    coeffs = [modular_jump_coefficients(th, ph, 1.0) for th, ph in draws]
    protocol = ProtocolSpec(hamiltonian, dissipators_for_config(config, coeffs), lam)
    params = {}
    for j, (th, ph) in enumerate(draws, start=1):
        params[f"theta_{j}"] = float(th)
        params[f"phi_{j}"] = float(ph)
    res = SampleResult(index, seed, params, **_run_stabilization(protocol, settings))
    return res


def _map(fn, tasks, workers: int):
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def protocol_sweep(
    config: HypergraphConfig,
    hamiltonian: HamiltonianSpec | str,
    n_samples: int,
    seed: int,
    settings: EvolutionSettings = EvolutionSettings(),
    lam: float = DEFAULT_LAMBDA,
    workers: int = 1,
    fixed_angles: tuple[float, float] | None = None,
) -> SweepResult:
    """Stabilization rates with every dissipator's ``(theta, phi)`` drawn uniformly on ``[0, 2pi)``.

    ``fixed_angles`` replaces the draws with one shared pair (single reference run).
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if isinstance(hamiltonian, str):
        hamiltonian = build_hamiltonian(config.n_qubits, hamiltonian)
    tasks = [
        (config, hamiltonian, lam, i, sample_seed(seed, i), settings, fixed_angles) for i in range(n_samples)
    ]
    samples = sorted(_map(_protocol_task, tasks, workers), key=lambda s: s.sample_index)
    meta = {"config": str(config), "base_seed": seed, "angle_domain": list(ANGLE_DOMAIN), "n_samples": n_samples}
    return SweepResult("protocol", samples, settings.to_dict(), meta)


def draw_decoherence(n_qubits: int, gamma_w_target: float, rng: np.random.Generator) -> DecoherenceRates:
    """Uniform per-qubit rates, jointly rescaled so the W decay rate hits the target."""
    gm = rng.uniform(size=n_qubits)
    gz = rng.uniform(size=n_qubits)
    raw = w_decay_rate(n_qubits, DecoherenceRates(gm, gz))
    s = gamma_w_target / raw
    return DecoherenceRates(gm * s, gz * s)


def _decoherence_task(args):
    protocol, gamma_w_target, index, seed, settings = args
    rates = draw_decoherence(protocol.n_qubits, gamma_w_target, np.random.default_rng(seed))
    trace = evolve(LindbladGenerator(protocol.with_decoherence(rates)), None, settings)
    params = {f"gamma_minus_{j}": g for j, g in enumerate(rates.gamma_minus, start=1)}
    params.update({f"gamma_z_{j}": g for j, g in enumerate(rates.gamma_z, start=1)})
    params["gamma_w"] = w_decay_rate(protocol.n_qubits, rates)
    return SampleResult(
        index, seed, params, epsilon_inf=trace.epsilon_inf, converged=trace.converged, failed=not trace.converged
    )


def decoherence_sweep(
    protocol: ProtocolSpec,
    gamma_w_target: float,
    n_samples: int,
    seed: int,
    settings: EvolutionSettings = EvolutionSettings(epsilon_stop=None),
    workers: int = 1,
) -> SweepResult:
    """Steady-state infidelity under random asymmetric decoherence at fixed W decay rate."""
    if not gamma_w_target > 0:
        raise ValueError("gamma_w_target must be positive")
    tasks = [(protocol, gamma_w_target, i, sample_seed(seed, i), settings) for i in range(n_samples)]
    samples = sorted(_map(_decoherence_task, tasks, workers), key=lambda s: s.sample_index)
    meta = {"gamma_w_target": gamma_w_target, "base_seed": seed, "n_samples": n_samples}
    return SweepResult("decoherence", samples, settings.to_dict(), meta)


@dataclass(frozen=True)
class ScalingPoint:
    n_qubits: int
    tau: float
    r_squared: float
    epsilon_inf: float


def _scaling_task(args):
    family, n, settings = args
    trace = evolve(LindbladGenerator(build_protocol(n, family)), None, settings)
    fit = fit_time_constant(trace)
    return ScalingPoint(n, fit.tau, fit.r_squared, trace.epsilon_inf)


def scaling_study(
    family: str,
    n_range,
    settings: EvolutionSettings = EvolutionSettings(t_max=40000.0),
    workers: int = 1,
) -> list[ScalingPoint]:
    """Fitted ``tau`` from ``|0..0>`` for each ``N`` of a protocol family."""
    ns = list(n_range)
    if not ns or min(ns) < 3 or max(ns) > 8:
        raise ValueError("n_range must lie within 3..8")
    return _map(_scaling_task, [(family, n, settings) for n in ns], workers)


@dataclass(frozen=True)
class ModelFit:
    model: str
    params: tuple[float, ...]
    rss: float
    aicc: float
    relative_residuals: tuple[float, ...]

    def predict(self, n) -> np.ndarray:
        return _predict(self.model, self.params, np.asarray(n, dtype=float))


def _predict(model: str, params, n: np.ndarray) -> np.ndarray:
    if model == "exponential":
        a, b = params
        return a * np.exp(b * n)
    return np.polyval(params, n)


def _aicc(rss: float, n: int, k: int) -> float:
    if n - k - 1 <= 0:
        return float("inf")
    return n * np.log(max(rss, RSS_FLOOR) / n) + 2 * k + 2 * k * (k + 1) / (n - k - 1)


def fit_scaling_model(points, models=SCALING_MODELS) -> list[ModelFit]:
    """Fit each model by relative least squares and rank by corrected AIC.

    ``points`` is a sequence of ``(N, tau)``.  Ties go to the model with
    fewer parameters.
    """
    pts = np.asarray([(float(p[0]), float(p[1])) for p in points])
    if pts.shape[0] < 4:
        raise ValueError("need at least 4 points")
    n, tau = pts[:, 0], pts[:, 1]
    if np.allclose(tau, tau[0], rtol=1e-12, atol=0):
        raise ValueError("degenerate input: all tau equal")
    if np.any(tau <= 0):
        raise ValueError("tau must be positive")
    fits = []
    for model in models:
        if model in ("poly2", "poly3"):
            deg = int(model[-1])
            params = tuple(np.polyfit(n, tau, deg, w=1.0 / tau))
        elif model == "exponential":
            b0, loga = np.polyfit(n, np.log(tau), 1)
            popt, _ = curve_fit(
                lambda x, a, b: a * np.exp(b * x), n, tau, p0=(np.exp(loga), b0), sigma=tau, maxfev=20000
            )
            params = tuple(float(v) for v in popt)
        else:
            raise ValueError(f"unknown model {model!r}")
        rel = (_predict(model, params, n) - tau) / tau
        rss = float(np.sum(rel**2))
        fits.append(ModelFit(model, tuple(float(v) for v in params), rss, _aicc(rss, n.size, len(params)), tuple(rel)))
    return sorted(fits, key=lambda f: (f.aicc, len(f.params)))


def sample_rows(result: SweepResult) -> list[dict]:
    rows = []
    for s in result.samples:
        row = {"sample_index": s.sample_index, "seed": s.seed}
        row.update(s.params)
        row.update(tau=s.tau, rate=s.rate, epsilon_inf=s.epsilon_inf, failed=int(s.failed))
        rows.append(row)
    return rows


def result_summary(result: SweepResult) -> dict:
    return {
        "kind": result.kind,
        "n_samples": len(result.samples),
        "n_failed": result.n_failed,
        "rate": result.rates().summary,
        "epsilon_inf": result.epsilons().summary,
        "settings": result.settings,
        "meta": result.meta,
        "samples": [asdict(s) for s in result.samples],
    }
