"""CSV and JSON writers for the command-line tables.

Every CSV starts with one comment line ``# srkinetics-csv/1 kind=<table> k=v ...``
followed by a header row. Floats are written with ``repr`` so equal inputs give
byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, Sequence

import numpy as np

from .kinetics import PowerSeries, Trajectory
from .stochastic import EnsembleStats
from .yields import YieldReport

CSV_SCHEMA = "srkinetics-csv/1"
JSON_SCHEMA = "srkinetics.result/1"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return repr(float(v))


def csv_text(kind: str, columns: Sequence[str], rows: Iterable[Sequence], meta: dict | None = None) -> str:
    buf = io.StringIO()
    head = " ".join(f"{k}={_fmt(v)}" for k, v in (meta or {}).items())
    buf.write(f"# {CSV_SCHEMA} kind={kind}" + (f" {head}" if head else "") + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _num(v: str) -> float:
    if v in ("true", "false"):
        return float(v == "true")
    try:
        return float(v)
    except ValueError:
        return math.nan


def read_csv(text: str) -> tuple[dict, list[str], np.ndarray]:
    """Parse a file written by :func:`csv_text` into ``(meta, columns, data)``.

    Booleans become 1/0 and text cells (such as method names) NaN.
    """
    lines = text.splitlines()
    meta = dict(item.split("=", 1) for item in lines[0].lstrip("# ").split()[1:])
    reader = csv.reader(lines[1:])
    columns = next(reader)
    data = np.array([[_num(v) for v in row] for row in reader], dtype=float)
    return meta, columns, data.reshape(-1, len(columns))


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)) or hasattr(obj, "numerator"):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def json_text(command: str, config: dict, result) -> str:
    doc = {"schema": JSON_SCHEMA, "command": command, "config": jsonable(config),
           "result": jsonable(result)}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def trajectory_table(traj: Trajectory, power: PowerSeries | None = None):
    """Columns ``t, t_gr, <class labels>, ground, power, baseline, addition``."""
    graph = traj.graph
    gr = float(graph.rates.gamma_r)
    g = graph.index(graph.ground_id)
    labels = [c.label for i, c in enumerate(graph.classes) if i != g]
    cols = ["t", "t_gr", *labels, "ground"]
    data = [traj.time, traj.time * gr]
    data += [traj.populations[i] for i in range(len(graph.classes)) if i != g]
    data.append(traj.populations[g])
    if power is not None:
        cols += ["power", "baseline", "addition"]
        data += [power.power, power.baseline_power, power.addition]
    return cols, list(zip(*data))


def scan_table(reports: Sequence[YieldReport]):
    return ["ratio", "Q", "Q0", "R"], [(r.ratio, r.q_photon, r.q_baseline, r.rqe) for r in reports]


def histogram_table(ens: EnsembleStats):
    k = np.arange(ens.n_emitters + 1)
    return (["photons", "count", "fraction"],
            [(int(i), int(c), c / ens.n_trajectories)
             for i, c in zip(k, ens.photon_count_histogram)])


def rate_table(ens: EnsembleStats, exact=None):
    cols = ["t_lo", "t_hi", "rate", "rate_sem"]
    data = [ens.bin_edges[:-1], ens.bin_edges[1:], ens.binned_rate, ens.binned_rate_sem]
    if exact is not None:
        cols.append("exact")
        data.append(exact)
    return cols, list(zip(*data))
