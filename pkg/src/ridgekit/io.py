"""File formats: delimited tables for samples/subspaces/exports and a
versioned JSON tree for fitted models.

All floating-point values are rendered with 17 significant digits so files
round-trip bit-faithfully, and the same renderer backs the HTTP service, so
numbers agree byte-for-byte across every output path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import polybasis
from .doe import DesignOfExperiments
from .metrics import StationState, StreamState
from .quadsurf import EigenReport, QuadraticModel
from .subspace import ResponseSurface, Subspace
from .varpro import RidgeModel

FORMAT_VERSION = 1


def fmt17(v: float) -> str:
    """Render a double with 17 significant digits (exact round trip)."""
    if not np.isfinite(v):
        raise ValueError(f"refusing to serialize non-finite value {v!r}")
    return format(float(v), ".17g")


def render_json(obj) -> str:
    """Deterministic JSON with floats through :func:`fmt17`.

    Dict keys keep insertion order; containers may hold numpy arrays.
    """

    def render(node) -> str:
        if isinstance(node, dict):
            inner = ",".join(
                f"{json.dumps(str(k))}:{render(v)}" for k, v in node.items()
            )
            return "{" + inner + "}"
        if isinstance(node, (list, tuple)):
            return "[" + ",".join(render(v) for v in node) + "]"
        if isinstance(node, np.ndarray):
            return render(node.tolist())
        if isinstance(node, bool) or isinstance(node, np.bool_):
            return "true" if node else "false"
        if isinstance(node, (int, np.integer)):
            return str(int(node))
        if isinstance(node, (float, np.floating)):
            return fmt17(float(node))
        if node is None or isinstance(node, str):
            return json.dumps(node)
        raise TypeError(f"cannot serialize {type(node).__name__}")

    return render(obj)


def _write_text(path, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _load_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        tree = json.load(fh)
    if not isinstance(tree, dict) or "version" not in tree:
        raise ValueError(f"{path}: not a versioned model file")
    if tree["version"] != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version {tree['version']}")
    return tree


def _expect_type(tree: dict, expected: str, path):
    if tree.get("type") != expected:
        raise ValueError(
            f"{path}: expected a {expected} file, found {tree.get('type')!r}"
        )


# ---------------------------------------------------------------------------
# Delimited tables


def _table(header: list[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt17(v) for v in row))
    return "\n".join(lines) + "\n"


def write_doe(path, doe: DesignOfExperiments):
    d = doe.dimension
    header = [f"x{j + 1}" for j in range(d)] + [doe.objective_name or "f"]
    rows = (list(x) + [f] for x, f in zip(doe.inputs, doe.outputs))
    _write_text(path, _table(header, rows))


def load_doe(
    path,
    output_column: str | None = None,
    normalized: bool = False,
) -> DesignOfExperiments:
    """Parse a comma-delimited sample table with a header row.

    The output column is ``output_column`` when given, the column named
    ``f`` if present, else the last column; every other column is an input.
    ``#``-prefixed lines are comments. Errors carry the offending line
    number.
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw = fh.readlines()

    header = None
    rows = []
    for lineno, line in enumerate(raw, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if header is None:
            header = [h.strip() for h in text.split(",")]
            continue
        parts = text.split(",")
        if len(parts) != len(header):
            raise ValueError(
                f"{path}:{lineno}: expected {len(header)} fields, got {len(parts)}"
            )
        try:
            values = [float(p) for p in parts]
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
        if not all(np.isfinite(v) for v in values):
            raise ValueError(f"{path}:{lineno}: non-finite entry")
        rows.append(values)

    if header is None:
        raise ValueError(f"{path}: no header row found")
    if not rows:
        raise ValueError(f"{path}: no sample rows found")

    if output_column is not None:
        if output_column not in header:
            raise ValueError(
                f"{path}: output column {output_column!r} not in header {header}"
            )
        fcol = header.index(output_column)
    elif "f" in header:
        fcol = header.index("f")
    else:
        fcol = len(header) - 1

    data = np.asarray(rows, dtype=float)
    mask = np.ones(len(header), dtype=bool)
    mask[fcol] = False
    X = data[:, mask]
    f = data[:, fcol]

    if normalized and X.size and np.abs(X).max() > 1.0 + 1e-9:
        col = int(np.abs(X).max(axis=0).argmax())
        name = [h for i, h in enumerate(header) if mask[i]][col]
        raise ValueError(
            f"{path}: column {name!r} leaves the normalized range [-1, 1] "
            f"(max magnitude {np.abs(X[:, col]).max():.6g})"
        )
    return DesignOfExperiments(
        inputs=X,
        outputs=f,
        objective_name=header[fcol],
        normalized=normalized,
    )


def write_subspace(path, U: Subspace):
    header = [f"u{j + 1}" for j in range(U.dim)]
    _write_text(path, _table(header, U.columns))


def load_subspace(path) -> Subspace:
    with open(path, "r", encoding="utf-8") as fh:
        raw = fh.readlines()
    rows = []
    header_seen = False
    for lineno, line in enumerate(raw, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if not header_seen:
            header_seen = True
            continue
        try:
            rows.append([float(p) for p in text.split(",")])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}: no subspace rows found")
    return Subspace(np.asarray(rows, dtype=float))


def write_summary(path, Y: np.ndarray, f: np.ndarray):
    """Summary-plot export: projected coordinates next to the output."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    header = [f"y{j + 1}" for j in range(Y.shape[1])] + ["f"]
    rows = (list(y) + [v] for y, v in zip(Y, f))
    _write_text(path, _table(header, rows))


def write_contour(path, Y1: np.ndarray, Y2: np.ndarray, V: np.ndarray):
    """Contour export: row-major (y1, y2, value) triples."""
    rows = zip(Y1.ravel(), Y2.ravel(), V.ravel())
    _write_text(path, _table(["y1", "y2", "value"], rows))


def write_designs(path, batch) -> None:
    """Parallel-coordinates export: one row per design with the |u1|
    axis weights alongside."""
    U = batch.subspace.columns
    d = U.shape[0]
    weights = np.abs(U[:, 0])
    header = (
        ["design_id"]
        + [f"x{j + 1}" for j in range(d)]
        + [f"weight{j + 1}" for j in range(d)]
    )
    lines = [",".join(header)]
    for i, x in enumerate(batch.designs):
        body = ",".join(fmt17(v) for v in list(x) + list(weights))
        lines.append(f"{i},{body}")
    _write_text(path, "\n".join(lines) + "\n")


def load_designs(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a parallel-coordinates export back as (designs, weights)."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = fh.readlines()
    header = None
    ids, rows = [], []
    for lineno, line in enumerate(raw, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if header is None:
            header = text.split(",")
            continue
        parts = text.split(",")
        if len(parts) != len(header):
            raise ValueError(
                f"{path}:{lineno}: expected {len(header)} fields, got {len(parts)}"
            )
        ids.append(int(parts[0]))
        rows.append([float(p) for p in parts[1:]])
    if header is None or not rows:
        raise ValueError(f"{path}: no design rows found")
    d = (len(header) - 1) // 2
    data = np.asarray(rows, dtype=float)
    return data[:, :d], data[0, d:]


# ---------------------------------------------------------------------------
# Versioned model trees


def _basis_tree(idx: polybasis.MultiIndexSet) -> dict:
    return {"kind": idx.kind, "dimension": idx.dimension, "degree": idx.degree}


def _basis_from_tree(tree: dict) -> polybasis.MultiIndexSet:
    return polybasis.make_index_set(
        tree["kind"], int(tree["dimension"]), int(tree["degree"])
    )


def save_quadratic_model(path, model: QuadraticModel):
    tree = {
        "version": FORMAT_VERSION,
        "type": "quadratic_model",
        "dimension": model.dimension,
        "A": model.A,
        "c": model.c,
        "e": model.e,
        "degenerate": model.degenerate,
    }
    _write_text(path, render_json(tree) + "\n")


def load_quadratic_model(path) -> QuadraticModel:
    tree = _load_json(path)
    _expect_type(tree, "quadratic_model", path)
    return QuadraticModel(
        A=np.asarray(tree["A"], dtype=float),
        c=np.asarray(tree["c"], dtype=float),
        e=float(tree["e"]),
        degenerate=bool(tree["degenerate"]),
    )


def save_eigen_report(path, report: EigenReport):
    tree = {
        "version": FORMAT_VERSION,
        "type": "eigen_report",
        "eigenvalues": report.eigenvalues,
        "eigenvectors": report.eigenvectors,
        "bootstrap_lo": report.bootstrap_lo,
        "bootstrap_hi": report.bootstrap_hi,
        "replicates": report.replicates,
        "subsample_size": report.subsample_size,
    }
    _write_text(path, render_json(tree) + "\n")


def load_eigen_report(path) -> EigenReport:
    tree = _load_json(path)
    _expect_type(tree, "eigen_report", path)
    lo = tree.get("bootstrap_lo")
    hi = tree.get("bootstrap_hi")
    return EigenReport(
        eigenvalues=np.asarray(tree["eigenvalues"], dtype=float),
        eigenvectors=np.asarray(tree["eigenvectors"], dtype=float),
        bootstrap_lo=None if lo is None else np.asarray(lo, dtype=float),
        bootstrap_hi=None if hi is None else np.asarray(hi, dtype=float),
        replicates=int(tree["replicates"]),
        subsample_size=int(tree["subsample_size"]),
    )


def save_ridge_model(path, model: RidgeModel):
    tree = {
        "version": FORMAT_VERSION,
        "type": "ridge_model",
        "subspace": model.U.columns,
        "basis": _basis_tree(model.idx),
        "alpha": model.alpha,
        "residual_norm": model.residual_norm,
        "r_squared": model.r_squared,
        "iterations": model.iterations,
        "converged": model.converged,
    }
    _write_text(path, render_json(tree) + "\n")


def load_ridge_model(path) -> RidgeModel:
    tree = _load_json(path)
    _expect_type(tree, "ridge_model", path)
    return RidgeModel(
        U=Subspace(np.asarray(tree["subspace"], dtype=float)),
        idx=_basis_from_tree(tree["basis"]),
        alpha=np.asarray(tree["alpha"], dtype=float),
        residual_norm=float(tree["residual_norm"]),
        r_squared=float(tree["r_squared"]),
        iterations=int(tree["iterations"]),
        converged=bool(tree["converged"]),
    )


@dataclass(frozen=True)
class OperatingPoint:
    """A named operating point: its subspace, response surface, and the
    training projections that bound the maps."""

    name: str
    subspace: Subspace
    surface: ResponseSurface
    training_y: np.ndarray
    training_f: np.ndarray


def save_operating_point(path, point: OperatingPoint):
    tree = {
        "version": FORMAT_VERSION,
        "type": "operating_point",
        "name": point.name,
        "subspace": point.subspace.columns,
        "surface": {
            "basis": _basis_tree(point.surface.idx),
            "alpha": point.surface.alpha,
            "r_squared": point.surface.r_squared,
            "y_bounds": point.surface.y_bounds,
            "degenerate": point.surface.degenerate,
        },
        "training": {"y": point.training_y, "f": point.training_f},
    }
    _write_text(path, render_json(tree) + "\n")


def load_operating_point(path) -> OperatingPoint:
    tree = _load_json(path)
    _expect_type(tree, "operating_point", path)
    surf = tree["surface"]
    surface = ResponseSurface(
        idx=_basis_from_tree(surf["basis"]),
        alpha=np.asarray(surf["alpha"], dtype=float),
        r_squared=float(surf["r_squared"]),
        y_bounds=np.asarray(surf["y_bounds"], dtype=float),
        degenerate=bool(surf["degenerate"]),
    )
    return OperatingPoint(
        name=str(tree["name"]),
        subspace=Subspace(np.asarray(tree["subspace"], dtype=float)),
        surface=surface,
        training_y=np.asarray(tree["training"]["y"], dtype=float),
        training_f=np.asarray(tree["training"]["f"], dtype=float),
    )


def save_normalize_map(path, columns: list[str], lo: np.ndarray, hi: np.ndarray):
    tree = {
        "version": FORMAT_VERSION,
        "type": "normalize_map",
        "columns": list(columns),
        "lo": lo,
        "hi": hi,
    }
    _write_text(path, render_json(tree) + "\n")


def load_station(path) -> StationState:
    """Station state from a JSON file with inlet/bypass/core stream blocks."""
    with open(path, "r", encoding="utf-8") as fh:
        tree = json.load(fh)
    streams = {}
    for name in ("inlet", "bypass", "core"):
        if name not in tree:
            raise ValueError(f"{path}: missing stream block {name!r}")
        block = tree[name]
        streams[name] = StreamState(
            mass_flow=float(block["mass_flow"]),
            stagnation_pressure=float(block["stagnation_pressure"]),
            stagnation_temperature=float(block["stagnation_temperature"]),
        )
    return StationState(gamma=float(tree.get("gamma", 1.4)), **streams)
