"""Engineered jump operators built from single-qubit lowering operators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from wstab.qalg import site_operator

SUM_TOL = 1e-10

_OMEGA = np.exp(2j * np.pi / 3)
# Columns: uniform (excluded by the null-sum constraint), then the two
# phase-twisted three-qubit W combinations.
_MODULAR_BASIS = np.array(
    [
        [1, 1, 1],
        [1, _OMEGA.conjugate(), _OMEGA],
        [1, _OMEGA.conjugate() ** 2, _OMEGA**2],
    ]
) / np.sqrt(3)

# Width-4 coefficients used with the chain4 family (three printed digits).
WIDTH4_COEFFICIENTS = (0.584, -0.146 + 0.545j, -0.438 - 0.253j, -0.292j)


class JumpOperatorError(ValueError):
    pass


@dataclass(frozen=True)
class JumpOperator:
    """``gamma * D[sum_j r_j sigma_j]`` on the qubits of ``edge``.

    ``r[i]`` multiplies the lowering operator of ``edge[i]``; raising
    coefficients are identically zero and not stored.
    """

    edge: tuple[int, ...]
    r: tuple[complex, ...]
    gamma: float = 1.0

    @property
    def s(self) -> tuple[complex, ...]:
        return (0j,) * len(self.edge)

    @property
    def width(self) -> int:
        return len(self.edge)

    @property
    def norm_sq(self) -> float:
        return float(sum(abs(c) ** 2 for c in self.r))

    def matrix(self, n_qubits: int) -> sp.csr_matrix:
        """Embedded ``sum_j r_j sigma_j`` (without the rate) as a sparse matrix."""
        if max(self.edge) > n_qubits:
            raise ValueError(f"edge {self.edge} does not fit in {n_qubits} qubits")
        out = sp.csr_matrix((2**n_qubits, 2**n_qubits), dtype=complex)
        for q, c in zip(self.edge, self.r):
            out = out + c * site_operator(n_qubits, q, "lower").to_sparse()
        return out.tocsr()

    def apply(self, vec: np.ndarray, n_qubits: int) -> np.ndarray:
        out = np.zeros(np.shape(vec), dtype=complex)
        for q, c in zip(self.edge, self.r):
            out += c * site_operator(n_qubits, q, "lower").apply(vec)
        return out

    def relabel(self, mapping) -> "JumpOperator":
        return JumpOperator(tuple(mapping[q] for q in self.edge), self.r, self.gamma)


def build_jump_operator(edge, coefficients, gamma: float = 1.0) -> JumpOperator:
    """Validate and package a linear jump operator.

    Raises :class:`JumpOperatorError` if the width is below three, the edge
    repeats a qubit, or the coefficients do not sum to zero (in which case
    ``|W^N>`` would not be annihilated).
    """
    edge = tuple(int(q) for q in edge)
    coefficients = tuple(complex(c) for c in coefficients)
    if len(edge) != len(coefficients):
        raise JumpOperatorError("edge and coefficient lengths differ")
    if len(edge) < 3:
        raise JumpOperatorError(f"width {len(edge)} < 3")
    if len(set(edge)) != len(edge) or min(edge) < 1:
        raise JumpOperatorError(f"invalid edge {edge}")
    if abs(sum(coefficients)) > SUM_TOL:
        raise JumpOperatorError(f"coefficients sum to {sum(coefficients):.3g}, expected 0")
    if gamma < 0:
        raise JumpOperatorError("gamma must be nonnegative")
    return JumpOperator(edge, coefficients, float(gamma))


def normalize(coefficients) -> tuple[complex, ...]:
    c = np.asarray(coefficients, dtype=complex)
    return tuple(complex(x) for x in c / np.linalg.norm(c))


def global_jump_coefficients(n_qubits: int) -> JumpOperator:
    """Width-N jump operator from the N-th plus (N-1)-th roots of unity, normalized."""
    if n_qubits < 3:
        raise ValueError("global dissipator needs at least 3 qubits")
    j = np.arange(1, n_qubits + 1)
    r = np.exp(2j * np.pi * (j - 1) / n_qubits)
    r[:-1] += np.exp(2j * np.pi * (j[:-1] - 1) / (n_qubits - 1))
    return build_jump_operator(range(1, n_qubits + 1), normalize(r))


def modular_jump_coefficients(theta: float, phi: float, gamma: float = 1.0) -> tuple[complex, complex, complex]:
    """Width-3 coefficients from two angles and the square root of a rate.

    The result always sums to zero and has squared norm ``gamma**2``.
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    v = np.array([0.0, gamma * np.cos(theta), np.exp(1j * phi) * gamma * np.sin(theta)])
    return tuple(complex(x) for x in _MODULAR_BASIS @ v)


def default_modular_coefficients() -> tuple[complex, complex, complex]:
    """Real representative ``(1, 1, -2)/sqrt(6)``."""
    return tuple(complex(x) for x in np.array([1.0, 1.0, -2.0]) / np.sqrt(6))
