"""Qubit operator algebra and state construction.

Basis convention: qubit 1 is the most significant bit of a basis index and
``|0>`` is the ground state, so ``|100>`` on three qubits is index 4.  Single
site operators are stored as sparse actions (source index, destination index,
coefficient); nothing here builds a dense ``2**N x 2**N`` matrix unless
:meth:`SiteOperator.densify` is called explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

KINDS = ("lower", "raise", "pauli_z")
DENSIFY_MAX_QUBITS = 6

_LOCAL = {
    "lower": np.array([[0, 1], [0, 0]], dtype=complex),
    "raise": np.array([[0, 0], [1, 0]], dtype=complex),
    "pauli_z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr)
    arr.setflags(write=False)
    return arr


def _check_site(n_qubits: int, site: int) -> None:
    if not 1 <= site <= n_qubits:
        raise ValueError(f"site {site} out of range 1..{n_qubits}")


def bit_mask(n_qubits: int, site: int) -> int:
    """Integer mask selecting ``site`` (1-based, qubit 1 = MSB)."""
    _check_site(n_qubits, site)
    return 1 << (n_qubits - site)


def excitation_numbers(n_qubits: int) -> np.ndarray:
    """Hamming weight of every basis index, in index order."""
    idx = np.arange(2**n_qubits, dtype=np.int64)
    weights = np.zeros_like(idx)
    for b in range(n_qubits):
        weights += (idx >> b) & 1
    return weights


def hamming_weight_index(n_qubits: int, weight: int) -> list[int]:
    """All basis indices with ``weight`` excitations, ascending."""
    return [int(i) for i in np.flatnonzero(excitation_numbers(n_qubits) == weight)]


@dataclass(frozen=True)
class SparseAction:
    """Operator whose matrix has at most one nonzero per column.

    ``op |src[i]> = coef[i] |dst[i]>`` and every other basis state maps to
    zero.  Products of single-site ladder and Z operators on distinct sites
    stay in this form.
    """

    n_qubits: int
    src: np.ndarray
    dst: np.ndarray
    coef: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "src", _frozen(np.asarray(self.src, dtype=np.int64)))
        object.__setattr__(self, "dst", _frozen(np.asarray(self.dst, dtype=np.int64)))
        object.__setattr__(self, "coef", _frozen(np.asarray(self.coef, dtype=complex)))

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Apply to a vector, or column-wise to a ``(dim, k)`` array."""
        vec = np.asarray(vec)
        if vec.shape[0] != self.dim:
            raise ValueError(f"expected leading dimension {self.dim}, got {vec.shape[0]}")
        out = np.zeros(vec.shape, dtype=complex)
        coef = self.coef.reshape((-1,) + (1,) * (vec.ndim - 1))
        np.add.at(out, self.dst, coef * vec[self.src])
        return out

    def dagger(self) -> "SparseAction":
        return SparseAction(self.n_qubits, self.dst, self.src, self.coef.conj())

    def to_sparse(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.coef, (self.dst, self.src)), shape=(self.dim, self.dim), dtype=complex
        )


def monomial(n_qubits: int, lowers=(), raises=()) -> SparseAction:
    """Product of lowering operators on ``lowers`` and raising operators on ``raises``.

    All sites must be distinct, so the factors commute and the product maps a
    basis state with the ``lowers`` bits set and the ``raises`` bits clear to
    the state with all of those bits flipped.
    """
    sites = list(lowers) + list(raises)
    if len(set(sites)) != len(sites):
        raise ValueError("monomial sites must be distinct")
    need_set = sum(bit_mask(n_qubits, s) for s in lowers)
    need_clear = sum(bit_mask(n_qubits, s) for s in raises)
    idx = np.arange(2**n_qubits, dtype=np.int64)
    src = idx[((idx & need_set) == need_set) & ((idx & need_clear) == 0)]
    return SparseAction(n_qubits, src, src ^ (need_set | need_clear), np.ones(len(src)))


@dataclass(frozen=True)
class SiteOperator:
    n_qubits: int
    site: int
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}; expected one of {KINDS}")
        _check_site(self.n_qubits, self.site)

    @cached_property
    def action(self) -> SparseAction:
        if self.kind == "lower":
            return monomial(self.n_qubits, lowers=(self.site,))
        if self.kind == "raise":
            return monomial(self.n_qubits, raises=(self.site,))
        idx = np.arange(2**self.n_qubits, dtype=np.int64)
        excited = (idx & bit_mask(self.n_qubits, self.site)) != 0
        return SparseAction(self.n_qubits, idx, idx, np.where(excited, -1.0, 1.0))

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.action.apply(vec)

    def to_sparse(self) -> sp.csr_matrix:
        return self.action.to_sparse()

    def dagger(self) -> "SiteOperator":
        flip = {"lower": "raise", "raise": "lower", "pauli_z": "pauli_z"}
        return SiteOperator(self.n_qubits, self.site, flip[self.kind])

    def densify(self) -> np.ndarray:
        """Dense matrix from Kronecker products of 2x2 factors (test oracle only)."""
        if self.n_qubits > DENSIFY_MAX_QUBITS:
            raise ValueError(f"densify limited to n_qubits <= {DENSIFY_MAX_QUBITS}")
        out = np.ones((1, 1), dtype=complex)
        for s in range(1, self.n_qubits + 1):
            out = np.kron(out, _LOCAL[self.kind] if s == self.site else np.eye(2))
        return out


def site_operator(n_qubits: int, site: int, kind: str) -> SiteOperator:
    return SiteOperator(n_qubits, site, kind)


@dataclass(frozen=True)
class QuantumState:
    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (2**self.n_qubits,):
            raise ValueError(f"expected {2**self.n_qubits} amplitudes, got shape {amps.shape}")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def projector(self) -> "DensityMatrix":
        return DensityMatrix(self.n_qubits, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    n_qubits: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        d = 2**self.n_qubits
        if mat.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix, got shape {mat.shape}")
        object.__setattr__(self, "matrix", _frozen(mat))

    def check(self, herm_tol: float = 1e-10, trace_tol: float = 1e-10, eig_tol: float = 1e-9) -> None:
        """Raise ``ValueError`` unless Hermitian, unit trace and positive within tolerances."""
        m = self.matrix
        if np.max(np.abs(m - m.conj().T)) > herm_tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > trace_tol:
            raise ValueError(f"density matrix trace {np.trace(m).real:.3e} != 1")
        if np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min() < -eig_tol:
            raise ValueError("density matrix has negative eigenvalues")


def basis_state(n_qubits: int, index: int) -> QuantumState:
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[index] = 1.0
    return QuantumState(n_qubits, amps)


def ground_state(n_qubits: int) -> QuantumState:
    return basis_state(n_qubits, 0)


def w_state(n_qubits: int) -> QuantumState:
    """Equal superposition of all single-excitation basis states."""
    if n_qubits < 2:
        raise ValueError("W state needs at least 2 qubits")
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[[1 << b for b in range(n_qubits)]] = 1 / np.sqrt(n_qubits)
    return QuantumState(n_qubits, amps)


def ghz_state(n_qubits: int) -> QuantumState:
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[[0, -1]] = 1 / np.sqrt(2)
    return QuantumState(n_qubits, amps)


def random_pure_state(n_qubits: int, rng: np.random.Generator) -> QuantumState:
    """Haar-random pure state."""
    v = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
    return QuantumState(n_qubits, v / np.linalg.norm(v))


def asymmetric_w_split(n_qubits: int, k: int) -> tuple[float, float]:
    """Weights of ``|W^k>|0..0>`` and ``|0..0>|W^(N-k)>`` in ``|W^N>``."""
    if not 1 <= k < n_qubits:
        raise ValueError(f"k must satisfy 1 <= k < {n_qubits}, got {k}")
    return float(np.sqrt(k / n_qubits)), float(np.sqrt((n_qubits - k) / n_qubits))


def fidelity_to_pure(rho, psi) -> float:
    """``<psi|rho|psi>`` for a density matrix and a pure state."""
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    vec = psi.amplitudes if isinstance(psi, QuantumState) else np.asarray(psi)
    if mat.shape != (vec.shape[0], vec.shape[0]):
        raise ValueError(f"dimension mismatch: rho {mat.shape} vs psi {vec.shape}")
    return float(np.real(vec.conj() @ mat @ vec))
