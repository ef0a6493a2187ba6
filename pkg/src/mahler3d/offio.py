"""Reading and writing polytopes in the OFF format."""

from __future__ import annotations

from pathlib import Path
from typing import Union

import numpy as np

from .errors import InvalidPolytope, OffParseError
from .polytope import Polytope, newell_normal


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def parse_off(text: str, validate: bool = True) -> Polytope:
    """Polytope from OFF text; vertex and facet labels are their positions in the file."""
    it = _lines(text)
    try:
        lineno, tok = next(it)
    except StopIteration:
        raise OffParseError("empty OFF file") from None
    if tok[0].upper() != "OFF":
        raise OffParseError(f"line {lineno}: expected 'OFF' header, got {tok[0]!r}")
    counts = tok[1:]
    if not counts:
        try:
            lineno, counts = next(it)
        except StopIteration:
            raise OffParseError("missing counts line") from None
    if len(counts) != 3:
        raise OffParseError(f"line {lineno}: counts line must hold 'V F E', got {' '.join(counts)!r}")
    try:
        nv, nf, _ = (int(c) for c in counts)
    except ValueError:
        raise OffParseError(f"line {lineno}: counts must be integers, got {' '.join(counts)!r}") from None
    if nv < 4 or nf < 4:
        raise OffParseError(f"line {lineno}: need at least 4 vertices and 4 facets, got V={nv} F={nf}")

    pts = np.empty((nv, 3))
    for r in range(nv):
        try:
            lineno, tok = next(it)
        except StopIteration:
            raise OffParseError(f"file ends after {r} of {nv} vertices") from None
        if len(tok) < 3:
            raise OffParseError(f"line {lineno}: vertex needs 3 coordinates")
        try:
            pts[r] = [float(x) for x in tok[:3]]
        except ValueError:
            raise OffParseError(f"line {lineno}: bad coordinate in {' '.join(tok)!r}") from None

    cycles = {}
    for k in range(nf):
        try:
            lineno, tok = next(it)
        except StopIteration:
            raise OffParseError(f"file ends after {k} of {nf} facets") from None
        try:
            ids = [int(x) for x in tok]
        except ValueError:
            raise OffParseError(f"line {lineno}: facet indices must be integers") from None
        m = ids[0]
        if m < 3 or len(ids) < m + 1:
            raise OffParseError(f"line {lineno}: facet declares {m} vertices but lists {len(ids) - 1}")
        cyc = ids[1:m + 1]
        if any(i < 0 or i >= nv for i in cyc):
            raise OffParseError(f"line {lineno}: facet index out of range 0..{nv - 1}")
        cycles[k] = tuple(cyc)

    center = pts.mean(axis=0)
    for k, cyc in cycles.items():
        sub = pts[list(cyc)]
        if newell_normal(sub) @ (sub.mean(axis=0) - center) < 0:
            cycles[k] = cyc[:1] + tuple(reversed(cyc[1:]))
    P = Polytope.from_cycles(range(nv), pts, cycles)
    if validate and P.issues:
        raise InvalidPolytope(i.message for i in P.issues)
    return P


def read_off(path: Union[str, Path], validate: bool = True) -> Polytope:
    return parse_off(Path(path).read_text(), validate=validate)


def format_off(P: Polytope) -> str:
    rows = P.vertex_row
    out = ["OFF", f"{P.V} {P.F} {P.E}"]
    out += [" ".join(repr(float(x)) for x in p) for p in P.points]
    for k in P.lattice.facet_labels:
        c = P.cycles[k]
        out.append(" ".join([str(len(c))] + [str(rows[i]) for i in c]))
    return "\n".join(out) + "\n"


def write_off(P: Polytope, path: Union[str, Path]) -> None:
    Path(path).write_text(format_off(P))
