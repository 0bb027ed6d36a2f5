"""Trace post-processing and closed-form decay, witness and kernel results."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from math import comb

import numpy as np

from wstab.protocol.spec import DecoherenceRates

KERNEL_SV_TOL = 1e-10


class NoAdmissibleWindow(ValueError):
    """Raised when a trace has no stretch of clean exponential decay to fit."""


@dataclass(frozen=True)
class FitPolicy:
    """Window selection for the exponential fit of an infidelity trace.

    The local log-slope (a centred difference spanning ``slope_stride_fraction``
    of the admissible samples on each side, which suppresses integrator noise
    near the floor) is compared with a reference slope (median over the last
    ``reference_fraction`` of admissible samples); the window opens at
    the first sample after which every slope stays within ``slope_tolerance``
    of the reference, and keeps samples with
    ``floor <= eps <= ceiling_fraction * eps(knee)``.  With
    ``subtract_plateau`` the fit runs on ``eps - plateau`` instead, which
    keeps the log-slope straight for traces that level off at a known value.
    """

    slope_tolerance: float = 0.05
    slope_stride_fraction: float = 0.05
    reference_fraction: float = 0.25
    ceiling_fraction: float = 0.5
    floor_min: float = 1e-9
    floor_plateau_factor: float = 10.0
    min_samples: int = 20
    subtract_plateau: bool = False


@dataclass(frozen=True)
class FitResult:
    epsilon0: float
    tau: float
    r_squared: float
    fit_window: tuple[float, float]
    n_points: int


@dataclass
class SimulationTrace:
    times: np.ndarray
    epsilon: np.ndarray
    fitted: FitResult | None = None
    epsilon_inf: float | None = None
    converged: bool = False
    final_state: np.ndarray | None = field(default=None, repr=False)
    renormalizations: list = field(default_factory=list)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.epsilon = np.asarray(self.epsilon, dtype=float)
        if self.times.shape != self.epsilon.shape:
            raise ValueError("times and epsilon lengths differ")
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def summary(self) -> dict:
        fit = asdict(self.fitted) if self.fitted else None
        return {
            "tau": fit["tau"] if fit else None,
            "epsilon0": fit["epsilon0"] if fit else None,
            "r_squared": fit["r_squared"] if fit else None,
            "fit_window": list(fit["fit_window"]) if fit else None,
            "epsilon_inf": self.epsilon_inf,
            "converged": self.converged,
            "renormalizations": len(self.renormalizations),
        }


def fit_time_constant(trace, policy: FitPolicy = FitPolicy(), plateau: float | None = None) -> FitResult:
    """Fit ``eps(t) = eps0 * exp(-t / tau)`` on the late, clean part of a trace.

    ``trace`` is a :class:`SimulationTrace` or a ``(times, epsilon)`` pair.
    ``plateau`` defaults to the trace's ``epsilon_inf`` (zero if unknown).
    """
    if isinstance(trace, SimulationTrace):
        t, eps = trace.times, trace.epsilon
        if plateau is None:
            plateau = trace.epsilon_inf
    else:
        t, eps = (np.asarray(x, dtype=float) for x in trace)
    plateau = max(float(plateau or 0.0), 0.0)
    floor = max(policy.floor_min, policy.floor_plateau_factor * plateau)
    if policy.subtract_plateau:
        eps, floor = eps - plateau, floor - plateau

    usable = np.flatnonzero(eps >= floor)
    if usable.size < policy.min_samples:
        raise NoAdmissibleWindow(f"only {usable.size} samples above the floor {floor:.3g}")
    # Samples above the floor form a prefix for a decaying trace; stop at the first gap.
    breaks = np.flatnonzero(np.diff(usable) != 1)
    if breaks.size:
        usable = usable[: breaks[0] + 1]
    tu, logu = t[usable], np.log(eps[usable])
    if tu.size < max(policy.min_samples, 3):
        raise NoAdmissibleWindow("too few contiguous samples above the floor")
    slope = _local_slope(tu, logu, max(1, int(round(policy.slope_stride_fraction * tu.size))))
    n_ref = max(3, int(np.ceil(policy.reference_fraction * tu.size)))
    ref = float(np.median(slope[-n_ref:]))
    if not ref < 0:
        raise NoAdmissibleWindow("trace is not decaying at late times")
    bad = np.flatnonzero(np.abs(slope - ref) > policy.slope_tolerance * abs(ref))
    knee = int(bad[-1]) + 1 if bad.size else 0
    if knee >= tu.size:
        raise NoAdmissibleWindow("local log-slope never settles")
    ceiling = policy.ceiling_fraction * float(np.exp(logu[knee]))
    sel = np.arange(knee, tu.size)
    sel = sel[np.exp(logu[sel]) <= ceiling]
    if sel.size < policy.min_samples:
        raise NoAdmissibleWindow(f"window holds {sel.size} < {policy.min_samples} samples")
    x, y = tu[sel], logu[sel]
    coeffs = np.polyfit(x, y, 1)
    slope_fit, intercept = coeffs
    if not slope_fit < 0:
        raise NoAdmissibleWindow("fitted slope is not negative")
    ss_res = float(np.sum((y - np.polyval(coeffs, x)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    r2 = min(max(r2, 0.0), 1.0)
    return FitResult(float(np.exp(intercept)), float(-1.0 / slope_fit), r2, (float(x[0]), float(x[-1])), int(sel.size))


def _local_slope(t: np.ndarray, y: np.ndarray, stride: int) -> np.ndarray:
    i = np.arange(t.size)
    lo = np.maximum(i - stride, 0)
    hi = np.minimum(i + stride, t.size - 1)
    return (y[hi] - y[lo]) / (t[hi] - t[lo])


def initial_log_slope(times, values, n_points: int | None = None) -> float:
    """Slope at ``t = times[0]`` of ``log(values)`` from a quadratic fit to the first samples."""
    t = np.asarray(times, dtype=float)
    y = np.log(np.asarray(values, dtype=float))
    if n_points is not None:
        t, y = t[:n_points], y[:n_points]
    if t.size < 3:
        raise ValueError("need at least three samples")
    c = np.polyfit(t - t[0], y, 2)
    return float(c[1])


def decay_rate_symmetric(alpha: complex, beta: complex, overlap: complex, rates: DecoherenceRates) -> float:
    """Initial decay rate of a permutation-symmetric state written as
    ``alpha|0>|phi0> + beta|1>|phi1>`` (first qubit split off).

    ``overlap`` is ``<phi1|phi0>``.  The result depends on the rates only
    through their sums.
    """
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1) > 1e-10:
        raise ValueError("|alpha|^2 + |beta|^2 must equal 1")
    if abs(overlap) > 1 + 1e-12:
        raise ValueError("|overlap| must not exceed 1")
    relax = abs(beta) ** 2 * (1 - abs(alpha) ** 2 * abs(overlap) ** 2) * sum(rates.gamma_minus)
    dephase = 4 * np.real((alpha * np.conj(beta)) ** 2) * sum(rates.gamma_z)
    return float(relax + dephase)


def w_decay_rate(n_qubits: int, rates: DecoherenceRates) -> float:
    """Initial decay rate of ``|W^N>``: mean relaxation plus ``4(N-1)/N`` times mean dephasing."""
    if rates.n_qubits != n_qubits:
        raise ValueError("rate lists must have one entry per qubit")
    return float(np.mean(rates.gamma_minus) + 4 * (n_qubits - 1) / n_qubits * np.mean(rates.gamma_z))


def ghz_decay_rate(n_qubits: int, rates: DecoherenceRates) -> float:
    """Initial decay rate of the GHZ state, ``sum(gm)/2 + sum(gz)``."""
    if rates.n_qubits != n_qubits:
        raise ValueError("rate lists must have one entry per qubit")
    return decay_rate_symmetric(1 / np.sqrt(2), 1 / np.sqrt(2), 0.0, rates)


def witness_expectation(epsilon_inf: float, n_qubits: int) -> tuple[float, bool]:
    """Projector-witness value ``eps - 1/N``; negative certifies N-qubit entanglement."""
    if not -1e-12 <= epsilon_inf <= 1 + 1e-12:
        raise ValueError("epsilon must lie in [0, 1]")
    value = epsilon_inf - 1.0 / n_qubits
    return value, value < 0


def witness_operator(n_qubits: int) -> np.ndarray:
    """``((N-1)/N) I - |W><W|`` as a dense matrix."""
    from wstab.qalg import w_state

    w = w_state(n_qubits).amplitudes
    return (n_qubits - 1) / n_qubits * np.eye(2**n_qubits) - np.outer(w, w.conj())


def jump_kernel(jump_operators, ambient_n: int, tol: float = KERNEL_SV_TOL) -> tuple[int, np.ndarray]:
    """Common null space of the jump operators: ``(dimension, orthonormal basis columns)``."""
    if ambient_n > 8:
        raise ValueError("jump_kernel limited to ambient_n <= 8")
    dim = 2**ambient_n
    blocks = [c.matrix(ambient_n).toarray() for c in jump_operators]
    stacked = np.vstack(blocks) if blocks else np.zeros((1, dim), dtype=complex)
    _, s, vh = np.linalg.svd(stacked)
    s_full = np.zeros(dim)
    s_full[: s.size] = s
    null = vh[s_full <= tol].conj().T
    return null.shape[1], null


def projector_distance(basis_a: np.ndarray, basis_b: np.ndarray) -> float:
    """Spectral-norm distance between the orthogonal projectors onto two column spans."""
    qa, _ = np.linalg.qr(basis_a)
    qb, _ = np.linalg.qr(basis_b)
    return float(np.linalg.norm(qa @ qa.conj().T - qb @ qb.conj().T, 2))


def global_kernel_dimension(n_qubits: int) -> int:
    return comb(n_qubits, n_qubits // 2)


def rate_model_ratio(epsilon_inf: float, tau: float, gamma_w: float) -> float:
    if min(epsilon_inf, tau, gamma_w) <= 0:
        raise ValueError("all inputs must be positive")
    return float(epsilon_inf / (tau * gamma_w))


def trace_distance(rho_a: np.ndarray, rho_b: np.ndarray) -> float:
    diff = np.asarray(rho_a) - np.asarray(rho_b)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))
