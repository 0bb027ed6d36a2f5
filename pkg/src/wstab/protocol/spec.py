"""Complete protocol description, family builders and JSON interchange."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from wstab.protocol.hamiltonian import HamiltonianSpec, build_hamiltonian
from wstab.protocol.hypergraph import HypergraphConfig, modular_family, standard_config
from wstab.protocol.jumps import (
    WIDTH4_COEFFICIENTS,
    JumpOperator,
    build_jump_operator,
    default_modular_coefficients,
    global_jump_coefficients,
    normalize,
)

DEFAULT_LAMBDA = 0.25

DISSIPATION_FAMILIES = ("global", "modular", "modular_w4")
PROTOCOL_FAMILIES = (
    "global+maximal",
    "global+minimal",
    "modular+maximal",
    "modular+minimal",
    "modular+nearly_minimal",
    "modular_w4+maximal",
)


@dataclass(frozen=True)
class DecoherenceRates:
    """Per-qubit relaxation and dephasing rates."""

    gamma_minus: tuple[float, ...]
    gamma_z: tuple[float, ...]

    def __post_init__(self):
        gm = tuple(float(x) for x in self.gamma_minus)
        gz = tuple(float(x) for x in self.gamma_z)
        if len(gm) != len(gz):
            raise ValueError("gamma_minus and gamma_z lengths differ")
        if min(gm + gz, default=0.0) < 0:
            raise ValueError("decoherence rates must be nonnegative")
        object.__setattr__(self, "gamma_minus", gm)
        object.__setattr__(self, "gamma_z", gz)

    @property
    def n_qubits(self) -> int:
        return len(self.gamma_minus)

    @classmethod
    def uniform(cls, n_qubits: int, gamma_minus: float, gamma_z: float) -> "DecoherenceRates":
        return cls((gamma_minus,) * n_qubits, (gamma_z,) * n_qubits)

    def is_zero(self) -> bool:
        return not any(self.gamma_minus) and not any(self.gamma_z)


@dataclass(frozen=True)
class ProtocolSpec:
    hamiltonian: HamiltonianSpec
    dissipators: tuple[JumpOperator, ...]
    lam: float = DEFAULT_LAMBDA
    decoherence: DecoherenceRates | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "dissipators", tuple(self.dissipators))
        n = self.hamiltonian.n_qubits
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        for c in self.dissipators:
            if max(c.edge) > n:
                raise ValueError(f"dissipator edge {c.edge} exceeds {n} qubits")
        if self.decoherence is not None and self.decoherence.n_qubits != n:
            raise ValueError("decoherence rate lists must have one entry per qubit")

    @property
    def n_qubits(self) -> int:
        return self.hamiltonian.n_qubits

    def config(self) -> HypergraphConfig:
        return HypergraphConfig(self.n_qubits, tuple(c.edge for c in self.dissipators))

    def with_decoherence(self, rates: DecoherenceRates | None) -> "ProtocolSpec":
        return ProtocolSpec(self.hamiltonian, self.dissipators, self.lam, rates, self.meta)

    def with_hamiltonian(self, hamiltonian: HamiltonianSpec) -> "ProtocolSpec":
        return ProtocolSpec(hamiltonian, self.dissipators, self.lam, self.decoherence, self.meta)

    def to_dict(self) -> dict:
        h = self.hamiltonian
        out = {
            "n_qubits": self.n_qubits,
            "lambda": self.lam,
            "hamiltonian": {
                "a": [{"j": j, "re": v.real, "im": v.imag} for j, v in h.a.items()],
                "f": [{"j": j, "k": k, "l": l, "re": v.real, "im": v.imag} for (j, k, l), v in h.f.items()],
            },
            "dissipators": [
                {"edge": list(c.edge), "r": [{"re": z.real, "im": z.imag} for z in c.r], "gamma": c.gamma}
                for c in self.dissipators
            ],
            "decoherence": None,
        }
        if self.decoherence is not None:
            out["decoherence"] = {
                "gamma_minus": list(self.decoherence.gamma_minus),
                "gamma_z": list(self.decoherence.gamma_z),
            }
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "ProtocolSpec":
        n = int(doc["n_qubits"])
        h = doc["hamiltonian"]
        a = {int(t["j"]): complex(t["re"], t.get("im", 0.0)) for t in h.get("a", [])}
        f = {
            (int(t["j"]), int(t["k"]), int(t["l"])): complex(t["re"], t.get("im", 0.0))
            for t in h.get("f", [])
        }
        dissipators = [
            build_jump_operator(
                d["edge"], [complex(z["re"], z.get("im", 0.0)) for z in d["r"]], d.get("gamma", 1.0)
            )
            for d in doc.get("dissipators", [])
        ]
        dec = doc.get("decoherence")
        rates = DecoherenceRates(dec["gamma_minus"], dec["gamma_z"]) if dec else None
        return cls(HamiltonianSpec(n, a, f), tuple(dissipators), float(doc.get("lambda", DEFAULT_LAMBDA)), rates)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ProtocolSpec":
        return cls.from_dict(json.loads(text))

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form."""
        return hashlib.sha256(self.to_json().encode()).hexdigest()


def resource_report(protocol: ProtocolSpec) -> dict:
    h = protocol.hamiltonian
    depth = 3 if h.f else (1 if h.a else 0)
    return {
        "n_linear": h.n_linear,
        "n_trilinear": h.n_trilinear,
        "n_dissipators": len(protocol.dissipators),
        "max_width": max((c.width for c in protocol.dissipators), default=0),
        "max_interaction_depth": depth,
    }


def dissipators_for_config(config: HypergraphConfig, coefficients) -> tuple[JumpOperator, ...]:
    """Attach coefficients to every edge; ``coefficients`` is one tuple or one tuple per edge."""
    coefficients = list(coefficients)
    if coefficients and np.ndim(coefficients[0]) == 0:
        coefficients = [coefficients] * config.m
    if len(coefficients) != config.m:
        raise ValueError("need one coefficient tuple per edge")
    return tuple(build_jump_operator(e, c) for e, c in zip(config.edges, coefficients))


def family_dissipators(n_qubits: int, dissipation: str) -> tuple[JumpOperator, ...]:
    if dissipation == "global":
        return (global_jump_coefficients(n_qubits),)
    if dissipation == "modular":
        cfg = standard_config(n_qubits, modular_family(n_qubits))
        return dissipators_for_config(cfg, default_modular_coefficients())
    if dissipation == "modular_w4":
        return dissipators_for_config(standard_config(n_qubits, "chain4"), normalize(WIDTH4_COEFFICIENTS))
    raise ValueError(f"unknown dissipation family {dissipation!r}; expected one of {DISSIPATION_FAMILIES}")


def parse_family(family: str) -> tuple[str, str]:
    try:
        dissipation, ham = family.split("+")
    except ValueError:
        raise ValueError(f"family {family!r} must look like 'modular+maximal'") from None
    ham = ham.replace("-", "_")
    if dissipation not in DISSIPATION_FAMILIES:
        raise ValueError(f"unknown dissipation family {dissipation!r}")
    return dissipation, ham


def build_protocol(n_qubits: int, family: str, lam: float = DEFAULT_LAMBDA, decoherence=None) -> ProtocolSpec:
    """Protocol from a ``dissipation+hamiltonian`` shorthand such as ``modular+maximal``."""
    dissipation, ham = parse_family(family)
    return ProtocolSpec(
        build_hamiltonian(n_qubits, ham),
        family_dissipators(n_qubits, dissipation),
        lam,
        decoherence,
        {"family": f"{dissipation}+{ham}"},
    )


def two_dissipator_example(hamiltonian: str = "maximal", lam: float = DEFAULT_LAMBDA) -> ProtocolSpec:
    """Five qubits, edges {1,2,3} and {3,4,5}, with the shared qubit weighted -2 in both."""
    c = np.array([1.0, 1.0, -2.0]) / np.sqrt(6)
    dissipators = (build_jump_operator((1, 2, 3), c), build_jump_operator((3, 4, 5), c[::-1]))
    return ProtocolSpec(build_hamiltonian(5, hamiltonian), dissipators, lam, None, {"family": "pair5+" + hamiltonian})
