"""Dissipator configurations as hypergraphs on the qubits."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations
from math import ceil

import numpy as np

MAX_ENUMERATION_QUBITS = 8
MAX_CLASSES = 200_000


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class HypergraphConfig:
    """Set of hyperedges over qubits ``1..n_qubits``.

    Member order inside an edge is significant only for coefficient
    assignment (the i-th coefficient of a jump operator goes to the i-th
    listed qubit); equality of configurations as hypergraphs is by
    :meth:`edge_sets`.
    """

    n_qubits: int
    edges: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        edges = tuple(tuple(int(q) for q in e) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        seen = set()
        for e in edges:
            if len(e) < 3:
                raise ValueError(f"edge {e} has width < 3")
            if len(set(e)) != len(e):
                raise ValueError(f"edge {e} repeats a qubit")
            if min(e) < 1 or max(e) > self.n_qubits:
                raise ValueError(f"edge {e} outside qubits 1..{self.n_qubits}")
            key = frozenset(e)
            if key in seen:
                raise ValueError(f"duplicate edge {e}")
            seen.add(key)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def widths(self) -> tuple[int, ...]:
        return tuple(len(e) for e in self.edges)

    def edge_sets(self) -> frozenset[frozenset[int]]:
        return frozenset(frozenset(e) for e in self.edges)

    def sorted_edges(self) -> tuple[tuple[int, ...], ...]:
        return tuple(sorted(tuple(sorted(e)) for e in self.edges))

    def relabel(self, mapping) -> "HypergraphConfig":
        """Apply a qubit relabeling given as a dict or 1-based sequence-like lookup."""
        return HypergraphConfig(self.n_qubits, tuple(tuple(mapping[q] for q in e) for e in self.edges))

    def __str__(self) -> str:
        return "{" + ", ".join("".join(str(q) for q in e) for e in self.sorted_edges()) + "}"


def min_dissipator_count(n_qubits: int, width: int) -> int:
    """Lower bound on the number of width-k dissipators selecting ``|W^N>``."""
    if width < 3 or n_qubits < width:
        raise ValueError("need width >= 3 and n_qubits >= width")
    return n_qubits // (width - 1)


def standard_config(n_qubits: int, family: str) -> HypergraphConfig:
    if family == "chain3":
        if n_qubits < 3 or n_qubits % 2 == 0:
            raise ValueError("chain3 needs odd n_qubits >= 3")
        edges = [(i, i + 1, i + 2) for i in range(1, n_qubits - 1, 2)]
    elif family == "ring3":
        if n_qubits < 4 or n_qubits % 2:
            raise ValueError("ring3 needs even n_qubits >= 4")
        edges = [(i, i + 1, i + 2) for i in range(1, n_qubits - 2, 2)]
        edges.append((n_qubits - 1, n_qubits, 1))
    elif family == "chain4":
        if n_qubits < 4:
            raise ValueError("chain4 needs n_qubits >= 4")
        m = ceil((n_qubits - 1) / 3)
        starts = [1 + 3 * i for i in range(m - 1)] + [n_qubits - 3]
        edges = [tuple(range(s, s + 4)) for s in starts]
    elif family == "global":
        if n_qubits < 3:
            raise ValueError("global dissipator needs n_qubits >= 3")
        edges = [tuple(range(1, n_qubits + 1))]
    else:
        raise ValueError(f"unknown configuration family {family!r}")
    return HypergraphConfig(n_qubits, tuple(edges))


def modular_family(n_qubits: int) -> str:
    """chain3 for odd N, ring3 for even N."""
    return "chain3" if n_qubits % 2 else "ring3"


def is_connected(config: HypergraphConfig) -> tuple[bool, bool]:
    """Return ``(connected, covered)``.

    ``covered`` means every qubit lies in some edge; ``connected`` additionally
    requires the edges to form a single overlap component.
    """
    covered = set().union(*map(set, config.edges)) == set(range(1, config.n_qubits + 1)) if config.edges else False
    parent = list(range(config.m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a, b in combinations(range(config.m), 2):
        if set(config.edges[a]) & set(config.edges[b]):
            parent[find(a)] = find(b)
    one_component = len({find(i) for i in range(config.m)}) == 1
    return covered and one_component, covered


@lru_cache(maxsize=None)
def _edge_tables(n_qubits: int, width: int):
    """Lex-ordered edge list and, per vertex permutation, the image of every edge index."""
    edges = list(combinations(range(n_qubits), width))
    lookup = np.full(2**n_qubits, -1, dtype=np.int64)
    masks = np.array([sum(1 << v for v in e) for e in edges], dtype=np.int64)
    lookup[masks] = np.arange(len(edges))
    perms = np.array(list(permutations(range(n_qubits))), dtype=np.int64)
    images = perms[:, np.array(edges)]  # (P, E, w)
    image_masks = np.sum(np.left_shift(1, images), axis=2)
    table = lookup[image_masks]
    table.setflags(write=False)
    return edges, table


def _canonical_indices(edge_idx, table) -> tuple[int, ...]:
    imgs = np.sort(table[:, list(edge_idx)], axis=1)
    best = np.lexsort(imgs.T[::-1])[0]
    return tuple(int(x) for x in imgs[best])


def canonical_form(config: HypergraphConfig) -> HypergraphConfig:
    """Lexicographically smallest sorted edge list over all qubit relabelings.

    Only uniform-width configurations are supported.
    """
    widths = set(config.widths)
    if len(widths) != 1:
        raise ValueError("canonical_form needs a nonempty uniform-width configuration")
    if config.n_qubits > MAX_ENUMERATION_QUBITS:
        raise BudgetExceeded(f"canonicalization limited to n_qubits <= {MAX_ENUMERATION_QUBITS}")
    width = widths.pop()
    edges, table = _edge_tables(config.n_qubits, width)
    index = {e: i for i, e in enumerate(edges)}
    idx = [index[tuple(sorted(q - 1 for q in e))] for e in config.edges]
    canon = _canonical_indices(idx, table)
    return HypergraphConfig(config.n_qubits, tuple(tuple(q + 1 for q in edges[i]) for i in canon))


def enumerate_configs(n_qubits: int, width: int, max_classes: int = MAX_CLASSES) -> list[HypergraphConfig]:
    """One canonical representative per relabeling class of nonempty width-uniform hypergraphs.

    Classes are grown one edge at a time from the previous level's
    representatives; every hypergraph with m edges arises by adding an edge
    to one with m-1 edges, so the search is exhaustive.
    """
    if n_qubits > MAX_ENUMERATION_QUBITS:
        raise BudgetExceeded(f"enumeration limited to n_qubits <= {MAX_ENUMERATION_QUBITS}")
    if width < 3 or width > n_qubits:
        raise ValueError("need 3 <= width <= n_qubits")
    edges, table = _edge_tables(n_qubits, width)
    level = {_canonical_indices([0], table)}
    found = []
    total = 0
    while level:
        found.extend(sorted(level))
        total += len(level)
        if total > max_classes:
            raise BudgetExceeded(f"more than {max_classes} classes")
        nxt = set()
        for rep in level:
            present = set(rep)
            for e in range(len(edges)):
                if e not in present:
                    nxt.add(_canonical_indices(rep + (e,), table))
        level = nxt
    return [HypergraphConfig(n_qubits, tuple(tuple(q + 1 for q in edges[i]) for i in rep)) for rep in found]


def minimal_connected(configs: list[HypergraphConfig]) -> list[HypergraphConfig]:
    """Connected configurations with the fewest edges among the connected ones."""
    conn = [c for c in configs if is_connected(c)[0]]
    if not conn:
        return []
    m = min(c.m for c in conn)
    return [c for c in conn if c.m == m]
