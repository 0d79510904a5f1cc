"""Reading and writing graphs in the ``t / v / e`` text format.

Format::

    t <vertex_count> <edge_count>
    v <id> <label> <degree>      (vertex_count lines)
    e <src> <dst>                (edge_count lines, undirected)

Lines starting with ``#`` and blank lines are ignored.
"""

from __future__ import annotations

import io
import os
import warnings
from typing import Iterable, List, Optional, TextIO, Tuple, Union

from .graph import Graph, GraphInvariantError, validate

TextSource = Union[str, TextIO, Iterable[str]]


class GraphFormatError(ValueError):
    """Malformed graph text; ``line`` is the 1-based offending line number."""

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class GraphFormatWarning(UserWarning):
    """Non-fatal inconsistency in graph text (ignored outside strict mode)."""


def _int_fields(parts: List[str], expected: int, lineno: int, kind: str) -> List[int]:
    if len(parts) != expected + 1:
        raise GraphFormatError(
            f"malformed {kind} line: expected {expected} fields, got {len(parts) - 1}",
            lineno,
        )
    try:
        values = [int(p) for p in parts[1:]]
    except ValueError as e:
        raise GraphFormatError(f"malformed {kind} line: {e}", lineno) from e
    if any(x < 0 for x in values):
        raise GraphFormatError(f"negative value in {kind} line", lineno)
    return values


def _lines(source: TextSource) -> Iterable[str]:
    if isinstance(source, str):
        return io.StringIO(source)
    return source


def parse_graph(source: TextSource, *, strict_degrees: bool = False) -> Graph:
    """Parse graph text into a :class:`Graph`.

    Args:
        source: the text itself, an open text stream, or an iterable of lines.
        strict_degrees: turn declared-degree and edge-count mismatches into
            errors instead of warnings.

    Returns:
        The parsed graph with edges deduplicated and symmetrized.
    """
    header: Optional[Tuple[int, int]] = None
    labels: List[Optional[int]] = []
    declared_degree: List[int] = []
    edges: List[Tuple[int, int]] = []
    edge_lines: List[int] = []

    for lineno, raw in enumerate(_lines(source), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        tag = parts[0]
        if header is None:
            if tag != "t":
                raise GraphFormatError("expected header 't <vertices> <edges>'", lineno)
            n, m = _int_fields(parts, 2, lineno, "header")
            header = (n, m)
            labels = [None] * n
            declared_degree = [0] * n
            continue
        if tag == "v":
            vid, label, degree = _int_fields(parts, 3, lineno, "vertex")
            if vid >= header[0]:
                raise GraphFormatError(f"vertex id {vid} out of range", lineno)
            if labels[vid] is not None:
                raise GraphFormatError(f"vertex {vid} declared twice", lineno)
            labels[vid] = label
            declared_degree[vid] = degree
        elif tag == "e":
            a, b = _int_fields(parts, 2, lineno, "edge")
            if a >= header[0] or b >= header[0]:
                raise GraphFormatError(
                    f"edge ({a}, {b}) references unknown vertex", lineno
                )
            if a == b:
                raise GraphFormatError(f"self-loop on vertex {a}", lineno)
            edges.append((a, b))
            edge_lines.append(lineno)
        elif tag == "t":
            raise GraphFormatError("duplicate header", lineno)
        else:
            raise GraphFormatError(f"unknown line tag {tag!r}", lineno)

    if header is None:
        raise GraphFormatError("missing header")
    missing = [v for v, label in enumerate(labels) if label is None]
    if missing:
        raise GraphFormatError(f"vertex {missing[0]} never declared")

    try:
        g = Graph.from_edges([int(x) for x in labels], edges)
        validate(g)
    except GraphInvariantError as e:
        raise GraphFormatError(str(e)) from e

    problems = []
    if len(edges) != header[1]:
        problems.append(f"header declares {header[1]} edges, found {len(edges)}")
    bad = [v for v in range(g.vertex_count) if g.degree(v) != declared_degree[v]]
    if bad:
        problems.append(
            f"{len(bad)} vertices with declared degree mismatch "
            f"(first: vertex {bad[0]})"
        )
    if problems:
        msg = "; ".join(problems)
        if strict_degrees:
            raise GraphFormatError(msg)
        warnings.warn(msg, GraphFormatWarning, stacklevel=2)
    return g


def serialize_graph(g: Graph) -> str:
    out = [f"t {g.vertex_count} {g.edge_count}"]
    out.extend(f"v {v} {g.label(v)} {g.degree(v)}" for v in range(g.vertex_count))
    out.extend(f"e {a} {b}" for a, b in g.edges())
    return "\n".join(out) + "\n"


def load_graph(path: Union[str, os.PathLike], *, strict_degrees: bool = False) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_graph(fh, strict_degrees=strict_degrees)


def write_graph(g: Graph, path: Union[str, os.PathLike]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_graph(g))
