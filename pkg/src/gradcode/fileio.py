"""On-disk formats: matrix files, graph files, and error-report CSV rows.

Matrix files are plain text: `#`-prefixed metadata lines (family and the
resolved parameters, seed included) followed by K rows of N space-separated
values.  Binary families (frc, bibd, bgc, rbgc) store integers; everything
else stores decimals with 17 significant digits, so round-trips are
bit-exact.  Graph files follow the same header convention with one
`u v w` edge per line and 0-based vertex ids.
"""

from __future__ import annotations

import csv
import io
from typing import Iterable, Mapping, Optional

import numpy as np

from .codes import CodeSpec, EncodingMatrix, Family
from .evaluator import ErrorReport
from .sparsifier import Edge, WeightedGraph

_BINARY_FAMILIES = {Family.FRC, Family.BIBD, Family.BGC, Family.RBGC}

# Spec fields in serialization order; `lam` travels under the key "lambda".
_SPEC_FIELDS = (
    ("N", int),
    ("K", int),
    ("L", int),
    ("R", int),
    ("lambda", float),
    ("gamma", float),
    ("d", float),
    ("c", float),
    ("epsilon", float),
    ("seed", int),
)


def _fmt(value: float) -> str:
    if float(value).is_integer() and abs(value) < 1e15:
        return str(int(value))
    return format(float(value), ".17g")


def _spec_metadata(spec: CodeSpec) -> list[tuple[str, str]]:
    items: list[tuple[str, str]] = [("family", spec.family.value)]
    for key, _ in _SPEC_FIELDS:
        attr = "lam" if key == "lambda" else key
        value = getattr(spec, attr)
        if value is not None:
            items.append((key, _fmt(value)))
    return items


def save_matrix(
    em: EncodingMatrix, path: str, extra_metadata: Optional[Mapping[str, str]] = None
) -> None:
    binary = em.spec.family in _BINARY_FAMILIES
    lines = [f"# {k} {v}" for k, v in _spec_metadata(em.spec)]
    for k, v in (extra_metadata or {}).items():
        lines.append(f"# {k} {v}")
    for row in em.matrix:
        if binary:
            lines.append(" ".join(str(int(x)) for x in row))
        else:
            lines.append(" ".join(format(float(x), ".17g") for x in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_header(lines: list[str]) -> tuple[dict[str, str], list[str]]:
    meta: dict[str, str] = {}
    body: list[str] = []
    for line in lines:
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            parts = stripped[1:].strip().split(None, 1)
            if len(parts) == 2:
                meta[parts[0]] = parts[1]
        else:
            body.append(stripped)
    return meta, body


def load_matrix(path: str) -> EncodingMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        meta, body = _parse_header(fh.readlines())
    if "family" not in meta:
        raise ValueError(f"{path}: missing 'family' metadata line")
    family = Family(meta["family"])
    kwargs: dict[str, object] = {}
    for key, conv in _SPEC_FIELDS:
        if key in meta:
            attr = "lam" if key == "lambda" else key
            kwargs[attr] = conv(float(meta[key]))
    matrix = np.array([[float(x) for x in line.split()] for line in body])
    spec = CodeSpec(family=family, **kwargs)  # type: ignore[arg-type]
    return EncodingMatrix(matrix, spec)


def load_incidence(path: str) -> np.ndarray:
    """Raw 0/1 matrix from a matrix-format file, header optional."""
    with open(path, "r", encoding="utf-8") as fh:
        _, body = _parse_header(fh.readlines())
    return np.array([[float(x) for x in line.split()] for line in body])


def save_graph(
    G: WeightedGraph, path: str, extra_metadata: Optional[Mapping[str, str]] = None
) -> None:
    lines = [f"# n {G.n}"]
    if G.sides is not None:
        lines.append(f"# left {G.sides[0]}")
        lines.append(f"# right {G.sides[1]}")
    for k, v in (extra_metadata or {}).items():
        lines.append(f"# {k} {v}")
    for e in G.edges:
        lines.append(f"{e.u} {e.v} {format(float(e.w), '.17g')}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_graph(path: str) -> WeightedGraph:
    with open(path, "r", encoding="utf-8") as fh:
        meta, body = _parse_header(fh.readlines())
    if "n" not in meta:
        raise ValueError(f"{path}: missing 'n' metadata line")
    n = int(meta["n"])
    sides = None
    if "left" in meta and "right" in meta:
        sides = (int(meta["left"]), int(meta["right"]))
    edges = []
    for line in body:
        u, v, w = line.split()
        edges.append(Edge(int(u), int(v), float(w)))
    return WeightedGraph(n, edges, sides=sides)


CSV_HEADER = (
    "family",
    "N",
    "K",
    "density",
    "S",
    "decoder",
    "mode",
    "error",
    "reference",
    "argmax_pattern",
)


def error_report_row(
    family: str, N: int, K: int, density: float, report: ErrorReport
) -> list[str]:
    ref = ""
    if report.reference is not None:
        ref = f"{report.reference.source}={format(report.reference.value, '.12g')}"
    return [
        family,
        str(N),
        str(K),
        format(density, ".6g"),
        str(report.S),
        report.decoder.value,
        report.mode.value,
        format(report.error, ".12g"),
        ref,
        ";".join(str(i) for i in report.argmax_pattern.non_stragglers),
    ]


def write_csv(
    path: str,
    header: Iterable[str],
    rows: Iterable[Iterable[str]],
    metadata: Optional[Mapping[str, str]] = None,
) -> None:
    """UTF-8 CSV with a header row, preceded by `#` metadata comment lines."""
    buf = io.StringIO()
    for k, v in (metadata or {}).items():
        buf.write(f"# {k} {v}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow(list(row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(buf.getvalue())


def read_csv(path: str) -> tuple[dict[str, str], list[dict[str, str]]]:
    """Read back a CSV written by :func:`write_csv`."""
    meta: dict[str, str] = {}
    lines: list[str] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                parts = line[1:].strip().split(None, 1)
                if len(parts) == 2:
                    meta[parts[0]] = parts[1]
            else:
                lines.append(line)
    reader = csv.DictReader(lines)
    return meta, [dict(r) for r in reader]
