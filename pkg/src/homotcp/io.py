"""Problem-file and trace serialization.

Problems are stored as JSON documents listing only the nonzero tensor
entries with 1-based index tuples, mirroring how small instances are
written down in the literature:

    {
      "order": 4,
      "dim": 2,
      "entries": [{"idx": [1, 1, 1, 2], "val": -2.0}, ...],
      "q": [1.0, -1.0],
      "label": "column sufficient",
      "expected": {"x": [...], "w": [...], "outcome": "Solved"}
    }

`label` and `expected` are optional.  Serialization is canonical (entries
sorted by index, shortest-roundtrip floats), so parse followed by
serialize is the identity on canonical files.

Path traces export to CSV with one row per examined candidate and
full-precision (17 significant digit) values, enough to reconstruct the
curve exactly.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .problems import ExpectedOutcome, TcpProblem
from .tensor import make_tensor
from .tracer import PathTrace, SolveReport, recomputed_slack

__all__ = [
    "ProblemFormatError",
    "load_problem",
    "loads_problem",
    "problem_to_dict",
    "save_problem",
    "dumps_problem",
    "write_trace_csv",
    "trace_csv_header",
    "report_to_dict",
]


class ProblemFormatError(ValueError):
    """A problem document is malformed; the message names the field."""


def _require(doc: dict, field: str, kind, where: str):
    if field not in doc:
        raise ProblemFormatError(f"{where}: missing field '{field}'")
    value = doc[field]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ProblemFormatError(f"{where}: field '{field}' must be a number")
        return float(value)
    if not isinstance(value, kind):
        raise ProblemFormatError(
            f"{where}: field '{field}' must be {kind.__name__}, got {type(value).__name__}"
        )
    return value


def _float_list(value, field: str, where: str) -> list[float]:
    if not isinstance(value, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise ProblemFormatError(f"{where}: field '{field}' must be a list of numbers")
    return [float(v) for v in value]


def loads_problem(text: str, name: str | None = None, where: str = "<string>") -> TcpProblem:
    """Parse a problem document from JSON text."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProblemFormatError(f"{where}: line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(doc, dict):
        raise ProblemFormatError(f"{where}: top level must be an object")
    order = _require(doc, "order", int, where)
    dim = _require(doc, "dim", int, where)
    raw_entries = _require(doc, "entries", list, where)
    entries = []
    for k, e in enumerate(raw_entries):
        spot = f"{where}: entries[{k}]"
        if not isinstance(e, dict):
            raise ProblemFormatError(f"{spot}: must be an object with 'idx' and 'val'")
        idx = e.get("idx")
        if not isinstance(idx, list) or not all(isinstance(i, int) for i in idx):
            raise ProblemFormatError(f"{spot}: 'idx' must be a list of integers")
        val = _require(e, "val", float, spot)
        entries.append((tuple(idx), val))
    q = _float_list(_require(doc, "q", list, where), "q", where)
    if len(q) != dim:
        raise ProblemFormatError(f"{where}: field 'q' must have length dim = {dim}")
    label = doc.get("label")
    if label is not None and not isinstance(label, str):
        raise ProblemFormatError(f"{where}: field 'label' must be a string")
    expected = None
    if "expected" in doc and doc["expected"] is not None:
        exp = doc["expected"]
        spot = f"{where}: expected"
        if not isinstance(exp, dict):
            raise ProblemFormatError(f"{spot}: must be an object")
        outcome = _require(exp, "outcome", str, spot)
        ex_x = _float_list(_require(exp, "x", list, spot), "x", spot)
        ex_w = _float_list(_require(exp, "w", list, spot), "w", spot)
        expected = ExpectedOutcome(np.array(ex_x), np.array(ex_w), outcome)
    try:
        tensor = make_tensor(order, dim, entries)
    except ValueError as e:
        raise ProblemFormatError(f"{where}: {e}") from None
    try:
        return TcpProblem(tensor, np.array(q), label=label, expected=expected, name=name)
    except ValueError as e:
        raise ProblemFormatError(f"{where}: {e}") from None


def load_problem(path) -> TcpProblem:
    """Load a problem from a JSON file; the file stem becomes its name."""
    import pathlib

    p = pathlib.Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise ProblemFormatError(f"{p}: {e.strerror or e}") from None
    return loads_problem(text, name=p.stem, where=str(p))


def problem_to_dict(problem: TcpProblem) -> dict[str, Any]:
    """Canonical document for a problem: sorted nonzero entries only."""
    data = problem.tensor.data
    entries = []
    for idx in sorted(np.argwhere(data != 0.0).tolist()):
        entries.append(
            {"idx": [i + 1 for i in idx], "val": float(data[tuple(idx)])}
        )
    doc: dict[str, Any] = {
        "order": problem.order,
        "dim": problem.n,
        "entries": entries,
        "q": [float(v) for v in problem.q],
    }
    if problem.label is not None:
        doc["label"] = problem.label
    if problem.expected is not None:
        doc["expected"] = {
            "x": [float(v) for v in problem.expected.x],
            "w": [float(v) for v in problem.expected.w],
            "outcome": problem.expected.kind,
        }
    return doc


def dumps_problem(problem: TcpProblem) -> str:
    """Canonical text form: one tensor entry per line, stable field order."""
    doc = problem_to_dict(problem)
    lines = ["{"]
    lines.append(f'  "order": {doc["order"]},')
    lines.append(f'  "dim": {doc["dim"]},')
    if doc["entries"]:
        lines.append('  "entries": [')
        for k, e in enumerate(doc["entries"]):
            sep = "," if k + 1 < len(doc["entries"]) else ""
            lines.append(f"    {json.dumps(e)}{sep}")
        lines.append("  ],")
    else:
        lines.append('  "entries": [],')
    tail_fields = [("q", doc["q"])]
    if "label" in doc:
        tail_fields.append(("label", doc["label"]))
    if "expected" in doc:
        tail_fields.append(("expected", doc["expected"]))
    for k, (key, value) in enumerate(tail_fields):
        sep = "," if k + 1 < len(tail_fields) else ""
        lines.append(f'  "{key}": {json.dumps(value)}{sep}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_problem(problem: TcpProblem, path):
    import pathlib

    pathlib.Path(path).write_text(dumps_problem(problem))


def trace_csv_header(n: int) -> list[str]:
    cols = ["iter", "mu"]
    cols += [f"x{i+1}" for i in range(n)]
    cols += [f"w{i+1}" for i in range(n)]
    cols += [f"z1_{i+1}" for i in range(n)]
    cols += [f"z2_{i+1}" for i in range(n)]
    cols += ["a", "r", "det_sign", "accepted"]
    return cols


def write_trace_csv(trace: PathTrace, n: int, path):
    """One row per examined candidate, full precision, header included."""
    lines = [",".join(trace_csv_header(n))]
    for rec in trace:
        vals = [f"{rec.index:d}", f"{rec.mu:.17g}"]
        vals += [f"{v:.17g}" for v in rec.state]
        vals += [f"{rec.step:.17g}", f"{rec.residual:.17g}", f"{rec.det_sign:d}",
                 "1" if rec.accepted else "0"]
        lines.append(",".join(vals))
    import pathlib

    pathlib.Path(path).write_text("\n".join(lines) + "\n")


def report_to_dict(report: SolveReport) -> dict[str, Any]:
    """Machine-readable summary of a solve report.

    The slack is recomputed from the tensor at the final x, matching what
    `solution_extract` would return for solved reports.
    """
    x = report.point.x
    w = recomputed_slack(report.map, x)
    return {
        "status": report.status.value,
        "x": [float(v) for v in x],
        "w": [float(v) for v in w],
        "mu": float(report.point.mu),
        "iterations": report.iterations,
        "residual": {
            "x_negativity": report.residual_triple[0],
            "w_negativity": report.residual_triple[1],
            "gap": report.residual_triple[2],
        },
    }
