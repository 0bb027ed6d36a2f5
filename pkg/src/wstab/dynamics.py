"""Lindblad generator, density-matrix time evolution and a dense spectral oracle."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import RK45

from wstab.analysis import SimulationTrace
from wstab.protocol.hamiltonian import hamiltonian_dense, hamiltonian_matrix, require_valid
from wstab.protocol.spec import ProtocolSpec
from wstab.qalg import DensityMatrix, QuantumState, ground_state, site_operator, w_state

log = logging.getLogger(__name__)

DENSE_ORACLE_MAX_QUBITS = 5
ZERO_EIG_TOL = 1e-9
TRACE_DRIFT_TOL = 1e-9


class StepSizeUnderflow(RuntimeError):
    pass


@dataclass(frozen=True)
class EvolutionSettings:
    """Integration and stopping controls; times are in inverse unit dissipation rate.

    ``steady_state_floor`` bounds the denominator of the windowed relative
    change test; ``epsilon_stop`` ends a run (as converged) once the
    infidelity drops below it.
    """

    t_max: float = 4000.0
    sample_interval: float = 1.0
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    steady_state_window: float = 20.0
    steady_state_threshold: float = 1e-6
    steady_state_floor: float = 1e-6
    epsilon_stop: float | None = 1e-10
    stop_on_steady_state: bool = True
    squared_infidelity: bool = False

    def __post_init__(self):
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if not self.sample_interval > 0:
            raise ValueError("sample_interval must be positive")
        for name in ("rel_tol", "abs_tol"):
            if not 0 < getattr(self, name) <= 1e-2:
                raise ValueError(f"{name} must lie in (0, 1e-2]")

    def to_dict(self) -> dict:
        return asdict(self)


class LindbladGenerator:
    """Engineered Hamiltonian and jump terms plus local relaxation and dephasing.

    The Hamiltonian gate refuses specs whose constraint residual is at least
    1e-8 unless ``force`` is set.
    """

    def __init__(self, protocol: ProtocolSpec, force: bool = False):
        if not force:
            require_valid(protocol.hamiltonian)
        self.protocol = protocol
        n = protocol.n_qubits
        self.n_qubits = n
        self.dim = 2**n
        self.hamiltonian = hamiltonian_matrix(protocol.hamiltonian)
        jumps = [np.sqrt(c.gamma) * c.matrix(n) for c in protocol.dissipators]
        dec = protocol.decoherence
        self._dephase_mask = None
        if dec is not None:
            for q, g in enumerate(dec.gamma_minus, start=1):
                if g > 0:
                    jumps.append(np.sqrt(g) * site_operator(n, q, "lower").to_sparse())
            if any(dec.gamma_z):
                idx = np.arange(self.dim)
                mask = np.zeros((self.dim, self.dim))
                for q, g in enumerate(dec.gamma_z, start=1):
                    if g > 0:
                        z = np.where(idx & (1 << (n - q)), -1.0, 1.0)
                        mask += g * (np.outer(z, z) - 1.0)
                self._dephase_mask = mask
        self.jumps = [j.tocsr() for j in jumps]
        # Stacked forms let the fast path apply every jump with two products.
        self._n_jumps = len(self.jumps)
        if self.jumps:
            col, row = sp.vstack(self.jumps).tocsr(), sp.hstack(self.jumps).tocsr()
            small = self.dim <= 64
            self._jcol = col.toarray() if small else col
            self._jrow = row.toarray() if small else row
        heff = -1j * protocol.lam * self.hamiltonian
        for j in self.jumps:
            heff = heff - 0.5 * (j.conj().T @ j)
        self.heff = np.asarray(heff.toarray()) if self.dim <= 512 else heff.tocsr()

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Generator applied to an arbitrary square matrix."""
        rho = np.asarray(rho)
        if rho.shape != (self.dim, self.dim):
            raise ValueError(f"expected a {self.dim}x{self.dim} matrix, got {rho.shape}")
        out = self.heff @ rho + (self.heff @ rho.conj().T).conj().T
        for j in self.jumps:
            out = out + j @ (j @ rho.conj().T).conj().T
        if self._dephase_mask is not None:
            out = out + self._dephase_mask * rho
        return out

    def apply_hermitian(self, rho: np.ndarray) -> np.ndarray:
        """Faster path valid only for Hermitian ``rho``."""
        x = self.heff @ rho
        out = x + x.conj().T
        if self._n_jumps:
            y = (self._jcol @ rho).reshape(self._n_jumps, self.dim, self.dim)
            out += self._jrow @ y.conj().transpose(0, 2, 1).reshape(-1, self.dim)
        if self._dephase_mask is not None:
            out += self._dephase_mask * rho
        return out


def lindblad_rhs(generator: LindbladGenerator, rho) -> np.ndarray:
    mat = rho.matrix if isinstance(rho, DensityMatrix) else rho
    return generator.apply(mat)


def _as_matrix(state, dim: int) -> np.ndarray:
    if isinstance(state, DensityMatrix):
        return np.array(state.matrix, dtype=complex)
    if isinstance(state, QuantumState):
        return np.outer(state.amplitudes, state.amplitudes.conj())
    arr = np.asarray(state, dtype=complex)
    if arr.shape == (dim,):
        return np.outer(arr, arr.conj())
    if arr.shape != (dim, dim):
        raise ValueError(f"initial state has shape {arr.shape}, expected ({dim},) or ({dim}, {dim})")
    return arr.copy()


def infidelity(rho: np.ndarray, target: np.ndarray, squared: bool = False) -> float:
    f = float(np.real(target.conj() @ rho @ target))
    return 1.0 - (f * f if squared else f)


def evolve(
    generator: LindbladGenerator,
    rho0=None,
    settings: EvolutionSettings = EvolutionSettings(),
    target=None,
) -> SimulationTrace:
    """Integrate from ``rho0`` (default ``|0..0>``) and sample the infidelity to ``target``.

    ``target`` defaults to ``|W^N>``.  The trace's ``epsilon_inf`` is the last
    sampled infidelity and ``converged`` reports whether a stopping criterion
    other than ``t_max`` fired.
    """
    n, dim = generator.n_qubits, generator.dim
    rho = _as_matrix(ground_state(n) if rho0 is None else rho0, dim)
    psi = (w_state(n) if target is None else target)
    psi = psi.amplitudes if isinstance(psi, QuantumState) else np.asarray(psi, dtype=complex)

    def fun(_t, y):
        # Project onto the Hermitian part first: the fast path would otherwise
        # turn round-off anti-Hermitian components into trace drift.
        m = y.reshape(dim, dim)
        return generator.apply_hermitian(0.5 * (m + m.conj().T)).ravel()

    def eps_of(m):
        return infidelity(m, psi, settings.squared_infidelity)

    times, eps = [0.0], [eps_of(rho)]
    renorm = []
    window_samples = max(1, int(round(settings.steady_state_window / settings.sample_interval)))
    converged = False

    def make_solver(t0, y0):
        return RK45(fun, t0, y0.ravel(), settings.t_max, rtol=settings.rel_tol, atol=settings.abs_tol)

    solver = make_solver(0.0, rho)
    next_sample = 1
    done = False
    while not done:
        if solver.status != "running":
            break
        msg = solver.step()
        if solver.status == "failed":
            raise StepSizeUnderflow(f"integrator failed at t={solver.t:.6g}: {msg}")
        interp = None
        restart = None
        while next_sample * settings.sample_interval <= solver.t + 1e-12:
            ts = next_sample * settings.sample_interval
            if ts > settings.t_max + 1e-12:
                done = True
                break
            if abs(ts - solver.t) <= 1e-12:
                m = solver.y.reshape(dim, dim)
            else:
                interp = interp or solver.dense_output()
                m = interp(ts).reshape(dim, dim)
            tr = np.trace(m).real
            if abs(tr - 1) > TRACE_DRIFT_TOL:
                log.info("trace drift %.3e at t=%.6g; renormalizing", tr - 1, ts)
                renorm.append((ts, tr - 1))
                m = m / tr
                restart = (ts, m)
            rho = m
            times.append(ts)
            eps.append(eps_of(m))
            next_sample += 1
            if settings.epsilon_stop is not None and eps[-1] < settings.epsilon_stop:
                converged = done = True
                break
            if settings.stop_on_steady_state and len(eps) > window_samples:
                recent = eps[-window_samples - 1:]
                spread = max(recent) - min(recent)
                scale = max(abs(eps[-1]), settings.steady_state_floor)
                if spread < settings.steady_state_threshold * scale:
                    converged = done = True
                    break
            if restart is not None:
                break
        if restart is not None and not done:
            solver = make_solver(restart[0], restart[1])
        if solver.status == "finished" and not done:
            done = True
    return SimulationTrace(
        np.array(times),
        np.array(eps),
        epsilon_inf=float(eps[-1]),
        converged=converged,
        final_state=rho.copy(),
        renormalizations=renorm,
    )


def steady_state(generator: LindbladGenerator, rho0=None, settings: EvolutionSettings = EvolutionSettings()):
    """``(rho_inf, eps_inf, converged)`` by integrating until the infidelity settles."""
    trace = evolve(generator, rho0, settings)
    return trace.final_state, trace.epsilon_inf, trace.converged


def dense_liouvillian(generator: LindbladGenerator) -> np.ndarray:
    """Superoperator on row-major ``vec(rho)`` assembled from Kronecker-product operators.

    Built independently of the fast path (``vec(A rho B) = (A kron B^T) vec(rho)``)
    so the two can cross-check each other.
    """
    p = generator.protocol
    n = p.n_qubits
    if n > DENSE_ORACLE_MAX_QUBITS:
        raise ValueError(f"dense Liouvillian limited to n_qubits <= {DENSE_ORACLE_MAX_QUBITS}")
    d = 2**n
    eye = np.eye(d)
    lower = {q: site_operator(n, q, "lower").densify() for q in range(1, n + 1)}
    h = p.lam * hamiltonian_dense(p.hamiltonian)
    sup = -1j * (np.kron(h, eye) - np.kron(eye, h.T))

    def dissipator(c):
        cdc = c.conj().T @ c
        return np.kron(c, c.conj()) - 0.5 * np.kron(cdc, eye) - 0.5 * np.kron(eye, cdc.T)

    for jump in p.dissipators:
        c = sum(r * lower[q] for q, r in zip(jump.edge, jump.r))
        sup = sup + jump.gamma * dissipator(c)
    if p.decoherence is not None:
        for q in range(1, n + 1):
            gm, gz = p.decoherence.gamma_minus[q - 1], p.decoherence.gamma_z[q - 1]
            if gm:
                sup = sup + gm * dissipator(lower[q])
            if gz:
                sup = sup + gz * dissipator(site_operator(n, q, "pauli_z").densify())
    return sup


def dense_liouvillian_spectrum(generator: LindbladGenerator) -> np.ndarray:
    return np.linalg.eigvals(dense_liouvillian(generator))


def spectral_gap(eigenvalues, tol: float = ZERO_EIG_TOL) -> float:
    """``-max Re(lambda)`` over eigenvalues not within ``tol`` of zero."""
    ev = np.asarray(eigenvalues)
    nonzero = ev[np.abs(ev) > tol]
    if nonzero.size == 0:
        return 0.0
    return float(-np.max(nonzero.real))


def steady_state_dimension(eigenvalues, tol: float = ZERO_EIG_TOL) -> int:
    return int(np.sum(np.abs(np.asarray(eigenvalues)) <= tol))
