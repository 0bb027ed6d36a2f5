"""Output files (CSV tables with JSON sidecars) and run-config loading."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np


def load_toml(path) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None, complex to {re, im}."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def write_json(path, doc) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n")
    return path


def write_csv(path, rows: list[dict], header: list[str] | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if header is None:
        header = list(rows[0]) if rows else []
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=header, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _fmt(row.get(k)) for k in header})
    return path


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def write_trace(out_dir, trace, run_config: dict, protocol_digest: str, stem: str = "trace") -> tuple[Path, Path]:
    """``<stem>.csv`` with ``t,epsilon`` and ``<stem>.json`` with the fit and run metadata."""
    out_dir = Path(out_dir)
    rows = [{"t": t, "epsilon": e} for t, e in zip(trace.times, trace.epsilon)]
    csv_path = write_csv(out_dir / f"{stem}.csv", rows, ["t", "epsilon"])
    summary = trace.summary()
    sidecar = {
        "tau": summary["tau"],
        "epsilon0": summary["epsilon0"],
        "r_squared": summary["r_squared"],
        "fit_window": summary["fit_window"],
        "epsilon_inf": summary["epsilon_inf"],
        "converged": summary["converged"],
        "renormalizations": [list(r) for r in trace.renormalizations],
        "settings": run_config.get("evolution"),
        "protocol_digest": protocol_digest,
        "config": run_config,
    }
    return csv_path, write_json(out_dir / f"{stem}.json", sidecar)
