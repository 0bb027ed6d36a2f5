"""Drive/hopping Hamiltonians that leave ``|W^N>`` dark, and their constraint checks.

The Hamiltonian is ``H = sum_j a_j sp_j + sum_{j, {k,l} not containing j}
f_{j,kl} sm_j sp_k sp_l + h.c.`` with ``sp`` raising and ``sm`` lowering.
``H|W> = 0`` holds exactly when every pair residual
``a_k + a_l + sum_{j != k,l} f_{j,kl}`` and the drive sum ``sum_j conj(a_j)``
vanish.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np
import scipy.sparse as sp

from wstab.qalg import DENSIFY_MAX_QUBITS, monomial, site_operator

FAMILIES = ("minimal", "nearly_minimal", "maximal")
VALIDATION_TOL = 1e-10
SIMULATION_GATE_TOL = 1e-8
EXACT_RANK_MAX_QUBITS = 8


class HamiltonianConstraintError(ValueError):
    reason = "hamiltonian_constraint_violation"


def _pair(k: int, l: int) -> tuple[int, int]:
    return (k, l) if k < l else (l, k)


@dataclass(frozen=True)
class HamiltonianSpec:
    """Sparse coefficient set; zero coefficients are dropped on construction.

    ``a`` maps qubit -> drive amplitude, ``f`` maps ``(j, k, l)`` with
    ``k < l`` and ``j`` not in ``{k, l}`` -> hopping amplitude.  ``c2``, ``d``
    and ``c3`` hold two-qubit excitation, plain hopping and three-qubit
    excitation coefficients for analysis only; no dynamics uses them.
    """

    n_qubits: int
    a: dict = field(default_factory=dict)
    f: dict = field(default_factory=dict)
    c2: dict = field(default_factory=dict)
    d: dict = field(default_factory=dict)
    c3: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.n_qubits
        a = {}
        for j, v in self.a.items():
            if not 1 <= int(j) <= n:
                raise ValueError(f"drive index {j} out of range")
            if complex(v) != 0:
                a[int(j)] = complex(v)
        f = {}
        for key, v in self.f.items():
            j, k, l = (int(x) for x in key)
            if len({j, k, l}) != 3 or not all(1 <= x <= n for x in (j, k, l)):
                raise ValueError(f"invalid hopping key {key}")
            kk, ll = _pair(k, l)
            if (j, kk, ll) in f:
                raise ValueError(f"duplicate hopping key {key}")
            if complex(v) != 0:
                f[(j, kk, ll)] = complex(v)
        object.__setattr__(self, "a", dict(sorted(a.items())))
        object.__setattr__(self, "f", dict(sorted(f.items())))

    @property
    def n_linear(self) -> int:
        return len(self.a)

    @property
    def n_trilinear(self) -> int:
        return len(self.f)

    def scaled(self, factor: complex) -> "HamiltonianSpec":
        return HamiltonianSpec(
            self.n_qubits,
            {j: factor * v for j, v in self.a.items()},
            {k: factor * v for k, v in self.f.items()},
        )

    def relabel(self, mapping) -> "HamiltonianSpec":
        a = {mapping[j]: v for j, v in self.a.items()}
        f = {(mapping[j], mapping[k], mapping[l]): v for (j, k, l), v in self.f.items()}
        return HamiltonianSpec(self.n_qubits, a, f)


@dataclass(frozen=True)
class ConstraintReport:
    pair_residuals: dict
    sum_residual: complex
    max_abs_residual: float

    @property
    def passed(self) -> bool:
        return self.max_abs_residual < VALIDATION_TOL

    def to_dict(self) -> dict:
        return {
            "pair_residuals": [
                {"k": k, "l": l, "re": v.real, "im": v.imag} for (k, l), v in self.pair_residuals.items()
            ],
            "sum_residual": {"re": self.sum_residual.real, "im": self.sum_residual.imag},
            "max_abs_residual": self.max_abs_residual,
            "passed": self.passed,
        }


def build_hamiltonian(n_qubits: int, family: str) -> HamiltonianSpec:
    if family not in FAMILIES:
        raise ValueError(f"unknown Hamiltonian family {family!r}; expected one of {FAMILIES}")
    if n_qubits < 3:
        raise ValueError("Hamiltonian families need n_qubits >= 3")
    n = n_qubits
    if family == "maximal":
        coef = {j: np.exp(2j * np.pi * j / n) for j in range(1, n + 1)}
        f = {
            (j, k, l): coef[j]
            for j in range(1, n + 1)
            for k, l in combinations(range(1, n + 1), 2)
            if j not in (k, l)
        }
        return HamiltonianSpec(n, dict(coef), f)
    if family == "minimal":
        # Each pair (1,j) and (2,j) is balanced by one hopping term.
        f = {}
        for j in range(3, n + 1):
            f[(2, 1, j)] = -1.0
            f[(1, 2, j)] = 1.0
        return HamiltonianSpec(n, {1: 1.0, 2: -1.0}, f)
    omega = np.exp(2j * np.pi / 3)
    phase = {1: 1.0 + 0j, 2: omega, 3: omega**2}
    f = {(1, 2, 3): phase[1], (2, 1, 3): phase[2], (3, 1, 2): phase[3]}
    for j in range(4, n + 1):
        for s in (1, 2, 3):
            for o in (1, 2, 3):
                if o != s:
                    f[(s, o, j)] = phase[s]
    return HamiltonianSpec(n, dict(phase), f)


def validate_hamiltonian(spec: HamiltonianSpec) -> ConstraintReport:
    n = spec.n_qubits
    residuals = {}
    for k, l in combinations(range(1, n + 1), 2):
        r = spec.a.get(k, 0j) + spec.a.get(l, 0j)
        r += sum(spec.f.get((j, k, l), 0j) for j in range(1, n + 1) if j not in (k, l))
        residuals[(k, l)] = complex(r)
    total = complex(sum(np.conj(v) for v in spec.a.values()))
    mags = [abs(v) for v in residuals.values()] + [abs(total)]
    return ConstraintReport(residuals, total, float(max(mags)))


def require_valid(spec: HamiltonianSpec, tol: float = SIMULATION_GATE_TOL) -> ConstraintReport:
    report = validate_hamiltonian(spec)
    if report.max_abs_residual >= tol:
        raise HamiltonianConstraintError(
            f"hamiltonian_constraint_violation: max residual {report.max_abs_residual:.3g}"
        )
    return report


def hamiltonian_matrix(spec: HamiltonianSpec) -> sp.csr_matrix:
    """Sparse ``H`` built from bit-flip monomials."""
    n = spec.n_qubits
    dim = 2**n
    up = sp.csr_matrix((dim, dim), dtype=complex)
    for j, v in spec.a.items():
        up = up + v * monomial(n, raises=(j,)).to_sparse()
    for (j, k, l), v in spec.f.items():
        up = up + v * monomial(n, lowers=(j,), raises=(k, l)).to_sparse()
    return (up + up.conj().T).tocsr()


def hamiltonian_dense(spec: HamiltonianSpec) -> np.ndarray:
    """Dense ``H`` from Kronecker-product site operators (test oracle)."""
    n = spec.n_qubits
    if n > DENSIFY_MAX_QUBITS:
        raise ValueError(f"dense Hamiltonian limited to n_qubits <= {DENSIFY_MAX_QUBITS}")
    lo = {q: site_operator(n, q, "lower").densify() for q in range(1, n + 1)}
    hi = {q: m.conj().T for q, m in lo.items()}
    up = np.zeros((2**n, 2**n), dtype=complex)
    for j, v in spec.a.items():
        up += v * hi[j]
    for (j, k, l), v in spec.f.items():
        up += v * lo[j] @ hi[k] @ hi[l]
    return up + up.conj().T


def constraint_matrix(n_qubits: int) -> tuple[np.ndarray, int]:
    """0/1 matrix with one row per triple and one column per pair, plus its rank.

    Row ``{j,k,l}`` has ones in the columns ``{j,k}``, ``{j,l}``, ``{k,l}``;
    triples and pairs are in lexicographic order.
    """
    if not 3 <= n_qubits <= 12:
        raise ValueError("constraint_matrix needs 3 <= n_qubits <= 12")
    pairs = {p: i for i, p in enumerate(combinations(range(1, n_qubits + 1), 2))}
    triples = list(combinations(range(1, n_qubits + 1), 3))
    m = np.zeros((len(triples), len(pairs)), dtype=np.int64)
    for r, t in enumerate(triples):
        for p in combinations(t, 2):
            m[r, pairs[p]] = 1
    if n_qubits <= EXACT_RANK_MAX_QUBITS:
        import sympy

        rank = int(sympy.Matrix(m.tolist()).rank())
    else:
        s = np.linalg.svd(m.astype(float), compute_uv=False)
        rank = int(np.sum(s > 1e-9))
    return m, rank


def bilinear_solution_exists(n_qubits: int) -> bool:
    """Whether nonzero two-qubit excitation amplitudes can cancel on every triple."""
    if n_qubits < 3:
        raise ValueError("n_qubits must be >= 3")
    _, rank = constraint_matrix(n_qubits)
    return rank < comb(n_qubits, 2)
