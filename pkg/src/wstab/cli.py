"""Command-line entry point: simulate, check, enumerate, sweep, scaling."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from wstab import analysis, dynamics, io, sweep
from wstab.protocol import (
    DecoherenceRates,
    HamiltonianConstraintError,
    HypergraphConfig,
    JumpOperatorError,
    ProtocolSpec,
    bilinear_solution_exists,
    build_hamiltonian,
    build_protocol,
    constraint_matrix,
    dissipators_for_config,
    enumerate_configs,
    global_jump_coefficients,
    is_connected,
    minimal_connected,
    modular_jump_coefficients,
    resource_report,
    standard_config,
    two_dissipator_example,
    validate_hamiltonian,
)
from wstab.qalg import random_pure_state, w_state

EXIT_OK, EXIT_VALIDATION, EXIT_NONCONVERGED = 0, 1, 2

log = logging.getLogger("wstab")


def _settings_from(doc: dict, **overrides) -> dynamics.EvolutionSettings:
    known = {f.name for f in fields(dynamics.EvolutionSettings)}
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"unknown evolution settings: {sorted(unknown)}")
    merged = {**overrides, **doc}
    return dynamics.EvolutionSettings(**merged)


def _parse_edges(text: str, n: int) -> HypergraphConfig:
    """``"123,145"`` or ``"1-2-3,1-4-5"`` (dash form for labels above 9)."""
    edges = []
    for tok in text.replace(" ", "").split(","):
        edges.append(tuple(int(x) for x in (tok.split("-") if "-" in tok else tok)))
    return HypergraphConfig(n, tuple(edges))


def _protocol_from(cfg: dict, args) -> ProtocolSpec:
    pdoc = cfg.get("protocol", {})
    if "file" in pdoc:
        protocol = ProtocolSpec.from_json(Path(pdoc["file"]).read_text())
    elif "spec" in pdoc:
        protocol = ProtocolSpec.from_dict(pdoc["spec"])
    else:
        family = args.family or pdoc.get("family", "modular+maximal")
        n = args.n or pdoc.get("n")
        if n is None:
            raise ValueError("protocol size missing: pass --n or set protocol.n")
        protocol = build_protocol(int(n), family, float(pdoc.get("lambda", 0.25)))
    dec = cfg.get("decoherence")
    if dec:
        n = protocol.n_qubits
        if "gamma_w" in dec:
            rng = np.random.default_rng(args.seed)
            rates = sweep.draw_decoherence(n, float(dec["gamma_w"]), rng)
        else:
            gm, gz = dec.get("gamma_minus", 0.0), dec.get("gamma_z", 0.0)
            gm = [gm] * n if np.ndim(gm) == 0 else gm
            gz = [gz] * n if np.ndim(gz) == 0 else gz
            rates = DecoherenceRates(gm, gz)
        protocol = protocol.with_decoherence(rates)
    return protocol


def _load_config(args) -> dict:
    return io.load_toml(args.config) if args.config else {}


def _materialized(cfg: dict, args, **extra) -> dict:
    doc = json.loads(json.dumps(cfg, default=str))
    doc["cli"] = {k: v for k, v in vars(args).items() if k != "func"}
    doc.update(extra)
    return doc


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    try:
        protocol = _protocol_from(cfg, args)
    except (JumpOperatorError, ValueError, KeyError) as exc:
        print(json.dumps({"status": "invalid", "reason": "invalid_protocol", "detail": str(exc)}))
        return EXIT_VALIDATION
    try:
        generator = dynamics.LindbladGenerator(protocol, force=args.force)
    except HamiltonianConstraintError as exc:
        report = validate_hamiltonian(protocol.hamiltonian)
        print(json.dumps({
            "status": "invalid",
            "reason": HamiltonianConstraintError.reason,
            "max_abs_residual": report.max_abs_residual,
            "detail": str(exc),
        }))
        return EXIT_VALIDATION
    has_decoherence = protocol.decoherence is not None and not protocol.decoherence.is_zero()
    defaults = {"epsilon_stop": None} if has_decoherence else {}
    settings = _settings_from(cfg.get("evolution", {}), **defaults)
    policy = analysis.FitPolicy(**cfg.get("fit", {}))
    initial = args.initial or cfg.get("initial_state", "ground")
    n = protocol.n_qubits
    if initial == "ground":
        rho0 = None
    elif initial == "w":
        rho0 = w_state(n)
    elif initial == "random":
        rho0 = random_pure_state(n, np.random.default_rng(args.seed))
    else:
        raise SystemExit(f"unknown initial state {initial!r}")
    trace = dynamics.evolve(generator, rho0, settings)
    try:
        trace.fitted = analysis.fit_time_constant(trace, policy)
    except analysis.NoAdmissibleWindow as exc:
        log.info("no exponential fit: %s", exc)
    run = _materialized(
        cfg,
        args,
        evolution=settings.to_dict(),
        fit=asdict(policy),
        initial_state=initial,
        protocol=protocol.to_dict(),
    )
    out = Path(args.out)
    csv_path, json_path = io.write_trace(out, trace, run, protocol.digest())
    value, certifies = analysis.witness_expectation(min(max(trace.epsilon_inf, 0.0), 1.0), n)
    print(json.dumps({
        "status": "converged" if trace.converged else "not_converged",
        "tau": trace.fitted.tau if trace.fitted else None,
        "epsilon_inf": trace.epsilon_inf,
        "witness": value,
        "certifies_entanglement": certifies,
        "trace": str(csv_path),
        "sidecar": str(json_path),
    }))
    return EXIT_OK if trace.converged else EXIT_NONCONVERGED


def _check_report(args, cfg) -> dict:
    topic, target = args.topic, args.target
    if topic == "constraint-matrix":
        n = args.n or 5
        m, rank = constraint_matrix(n)
        return {
            "n_qubits": n,
            "shape": list(m.shape),
            "rank": rank,
            "full_column_rank": rank == m.shape[1],
            "bilinear_solution_exists": bilinear_solution_exists(n),
            "matrix": m.tolist() if n <= 5 else None,
        }
    if topic == "kernel":
        if target in (None, "pair5"):
            ops = two_dissipator_example().dissipators
            n = 5
        elif target == "global":
            n = args.n or 4
            ops = (global_jump_coefficients(n),)
        else:
            n = args.n
            ops = build_protocol(n, target).dissipators
        dim, basis = analysis.jump_kernel(ops, n)
        w = w_state(n).amplitudes
        ground = np.zeros(2**n)
        ground[0] = 1.0
        contains = lambda v: float(np.linalg.norm(v - basis @ (basis.conj().T @ v))) < 1e-8
        return {
            "n_qubits": n,
            "dimension": dim,
            "contains_w": contains(w),
            "contains_ground": contains(ground),
            "basis": [[{"re": z.real, "im": z.imag} for z in col] for col in basis.T] if n <= 5 else None,
        }
    if topic == "connectivity":
        family = target or args.family or "chain3"
        cfg_h = standard_config(args.n, family)
        connected, covered = is_connected(cfg_h)
        return {"hypergraph": str(cfg_h), "connected": connected, "covered": covered}
    if topic in ("hamiltonian", "protocol"):
        protocol = _protocol_from(cfg, args)
        report = validate_hamiltonian(protocol.hamiltonian)
        connected, covered = is_connected(protocol.config())
        dim, _ = analysis.jump_kernel(protocol.dissipators, protocol.n_qubits) if protocol.n_qubits <= 8 else (None, None)
        return {
            "protocol_digest": protocol.digest(),
            "constraints": report.to_dict(),
            "resources": resource_report(protocol),
            "connected": connected,
            "covered": covered,
            "kernel_dimension": dim,
        }
    raise SystemExit(f"unknown check topic {topic!r}")


def cmd_check(args) -> int:
    cfg = _load_config(args)
    report = _check_report(args, cfg)
    report["config"] = _materialized(cfg, args)
    text = json.dumps(io._clean(report), indent=2)
    print(text)
    if args.out:
        io.write_json(Path(args.out) / f"check_{args.topic}.json", report)
    if "constraints" in report and not report["constraints"]["passed"]:
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_enumerate(args) -> int:
    configs = enumerate_configs(args.n, args.width)
    minimal = set(c.sorted_edges() for c in minimal_connected(configs))
    rows = []
    for c in configs:
        connected, covered = is_connected(c)
        flags = []
        if not connected:
            flags.append("disconnected")
        if c.sorted_edges() in minimal:
            flags.append("minimal-connected")
        print(f"m={c.m:<3d} {c!s:<60s} {' '.join(flags)}".rstrip())
        rows.append({"m": c.m, "config": str(c), "connected": int(connected), "covered": int(covered),
                     "minimal_connected": int(c.sorted_edges() in minimal)})
    if args.out:
        io.write_csv(Path(args.out) / f"configs_n{args.n}_w{args.width}.csv", rows)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    scfg = cfg.get("sweep", {})
    kind = args.kind or scfg.get("kind", "protocol")
    n_samples = args.samples or scfg.get("samples", 256)
    seed = args.seed if args.seed is not None else scfg.get("seed", 0)
    workers = args.workers or scfg.get("workers", 1)
    out = Path(args.out)
    if kind == "protocol":
        n = args.n or scfg.get("n", 5)
        edges = args.edges or scfg.get("edges")
        if edges is None:
            raise SystemExit("protocol sweep needs --edges or sweep.edges")
        config = _parse_edges(edges, n)
        ham = args.hamiltonian or scfg.get("hamiltonian", "maximal")
        settings = _settings_from(cfg.get("evolution", {}))
        result = sweep.protocol_sweep(config, ham, n_samples, seed, settings, workers=workers)
        template = ProtocolSpec(
            build_hamiltonian(n, ham),
            dissipators_for_config(config, modular_jump_coefficients(3 * np.pi / 4, np.pi / 3)),
        )
    elif kind == "decoherence":
        template = _protocol_from({k: v for k, v in cfg.items() if k != "decoherence"}, args)
        gamma_w = args.gamma_w or scfg.get("gamma_w", template.lam * 1e-2)
        settings = _settings_from(cfg.get("evolution", {}), epsilon_stop=None)
        result = sweep.decoherence_sweep(template, gamma_w, n_samples, seed, settings, workers=workers)
    else:
        raise SystemExit(f"unknown sweep kind {kind!r}")
    rows = sweep.sample_rows(result)
    io.write_csv(out / "sweep.csv", rows)
    summary = sweep.result_summary(result)
    summary["protocol_digest"] = template.digest()
    summary["config"] = _materialized(cfg, args, evolution=settings.to_dict(), template=template.to_dict())
    io.write_json(out / "sweep.json", summary)
    print(json.dumps(io._clean({"n_samples": len(rows), "n_failed": result.n_failed, "rate": result.rates().summary})))
    return EXIT_OK


def _parse_range(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",")]


def cmd_scaling(args) -> int:
    cfg = _load_config(args)
    scfg = cfg.get("scaling", {})
    family = args.family or scfg.get("family", "modular+maximal")
    ns = _parse_range(args.n_range or scfg.get("n_range", "3..8"))
    settings = _settings_from(cfg.get("evolution", {}), t_max=40000.0)
    points = sweep.scaling_study(family, ns, settings, workers=args.workers or 1)
    fits = sweep.fit_scaling_model([(p.n_qubits, p.tau) for p in points]) if len(points) >= 4 else []
    best = fits[0] if fits else None
    rows = [
        {"N": p.n_qubits, "tau": p.tau, "fit_model": best.model if best else "",
         "fit_params": " ".join(repr(v) for v in best.params) if best else ""}
        for p in points
    ]
    out = Path(args.out)
    io.write_csv(out / "scaling.csv", rows, ["N", "tau", "fit_model", "fit_params"])
    io.write_json(out / "scaling.json", {
        "family": family,
        "points": [asdict(p) for p in points],
        "fits": [asdict(f) for f in fits],
        "protocol_digests": {str(n): build_protocol(n, family).digest() for n in ns},
        "config": _materialized(cfg, args, evolution=settings.to_dict()),
    })
    print(json.dumps({"family": family, "best_model": best.model if best else None,
                      "tau": {p.n_qubits: p.tau for p in points}}))
    return EXIT_OK


def _common(out_default: str | None = "out", n_default: int | None = None) -> argparse.ArgumentParser:
    # A fresh parent per subcommand: parents share Action objects, so
    # per-command defaults would otherwise leak between subcommands.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=out_default, help="output directory")
    common.add_argument("--family", help="protocol family, e.g. modular+maximal")
    common.add_argument("--n", type=int, default=n_default, help="number of qubits")
    common.add_argument("-v", "--verbose", action="store_true")
    return common


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wstab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[_common()], help="evolve one protocol and fit its time constant")
    s.add_argument("--initial", choices=["ground", "w", "random"])
    s.add_argument("--force", action="store_true", help="skip the Hamiltonian constraint gate")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("check", parents=[_common(None)], help="constraint, kernel and connectivity reports")
    c.add_argument("topic", choices=["constraint-matrix", "kernel", "connectivity", "hamiltonian", "protocol"])
    c.add_argument("target", nargs="?")
    c.set_defaults(func=cmd_check)

    e = sub.add_parser("enumerate", parents=[_common(None, 5)], help="list distinct dissipator configurations")
    e.add_argument("--width", type=int, default=3)
    e.set_defaults(func=cmd_enumerate)

    w = sub.add_parser("sweep", parents=[_common()], help="randomized ensemble over angles or decoherence")
    w.add_argument("--kind", choices=["protocol", "decoherence"])
    w.add_argument("--edges", help='e.g. "123,145"')
    w.add_argument("--hamiltonian", choices=["minimal", "nearly_minimal", "maximal"])
    w.add_argument("--samples", type=int)
    w.add_argument("--gamma-w", type=float)
    w.add_argument("--workers", type=int)
    w.set_defaults(func=cmd_sweep)

    k = sub.add_parser("scaling", parents=[_common()], help="tau(N) for a family plus model selection")
    k.add_argument("--n-range", help='e.g. "3..8"')
    k.add_argument("--workers", type=int)
    k.set_defaults(func=cmd_scaling)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
