"""Persistent homology (dimensions 0 and 1) of a filtered complex over Z/2.

The implementation is the standard left-to-right boundary-matrix reduction
with the clearing ("twist") optimization: triangle columns are reduced first,
and every edge that shows up as a pivot of a reduced triangle column is a
death -- its column is cleared and never reduced.  The remaining edge columns
either kill a vertex class (an H0 death; the surviving component is the one
whose root entered first, ties broken by lowest vertex index via the canonical
column order) or create a cycle that no triangle fills (an essential H1 bar).

Columns are Python integers used as GF(2) bit vectors: XOR adds columns and
``bit_length() - 1`` finds the pivot, which keeps the reduction short, exact,
and allocation-free.

Bars where birth == death are kept in the diagram for auditability (they show
where simplices entered simultaneously) but carry no persistence; the summary
stage filters them out.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np

from ._io import fmt_float, parse_float, read_text_rows, write_lines
from .errors import MalformedFileError
from .filtration import FilteredComplex
from .metric import DistanceMatrix

Bar = tuple[float, float]


@dataclass
class PersistenceDiagram:
    """Bars (birth, death) of one homology dimension; death may be ``inf``."""

    dimension: int
    bars: list[Bar]
    eps_max: float

    def __post_init__(self) -> None:
        self.bars = sorted((float(b), float(d)) for b, d in self.bars)
        for birth, death in self.bars:
            if math.isnan(birth) or math.isnan(death) or math.isinf(birth):
                raise ValueError(f"invalid bar ({birth}, {death})")
            if death < birth:
                raise ValueError(f"bar dies before it is born: ({birth}, {death})")

    def finite_bars(self) -> list[Bar]:
        return [bar for bar in self.bars if math.isfinite(bar[1])]

    def infinite_bars(self) -> list[Bar]:
        return [bar for bar in self.bars if math.isinf(bar[1])]

    def __len__(self) -> int:
        return len(self.bars)


@dataclass
class BettiCurve:
    """Number of alive bars (birth <= scale < death) sampled along a grid."""

    dimension: int
    scales: np.ndarray
    counts: np.ndarray


def _reduce_column(col: int, low_inv: dict[int, int], columns: dict[int, int]) -> int:
    """Reduce one column against the already-reduced ones; returns the result."""
    while col:
        low = col.bit_length() - 1
        owner = low_inv.get(low)
        if owner is None:
            break
        col ^= columns[owner]
    return col


def persistent_homology(fc: FilteredComplex) -> tuple[PersistenceDiagram, PersistenceDiagram]:
    """Compute the H0 and H1 persistence diagrams of a filtered complex."""
    simplices = fc.simplices
    index_of: dict[tuple[int, ...], int] = {
        verts: i for i, (verts, _) in enumerate(simplices)
    }
    values = [value for _, value in simplices]

    tri_ids = [i for i, (v, _) in enumerate(simplices) if len(v) == 3]
    edge_ids = [i for i, (v, _) in enumerate(simplices) if len(v) == 2]

    # --- pass 1: triangles; pivots are edges, pairs are finite H1 bars.
    reduced_tri: dict[int, int] = {}
    low_inv_tri: dict[int, int] = {}
    h1_bars: list[Bar] = []
    cleared_edges: set[int] = set()
    for t in tri_ids:
        (a, b, c), _ = simplices[t]
        col = (
            (1 << index_of[(a, b)])
            | (1 << index_of[(a, c)])
            | (1 << index_of[(b, c)])
        )
        col = _reduce_column(col, low_inv_tri, reduced_tri)
        if col:
            low = col.bit_length() - 1
            reduced_tri[t] = col
            low_inv_tri[low] = t
            cleared_edges.add(low)
            h1_bars.append((values[low], values[t]))
        # a zero triangle column would only matter for H2, which is not built

    # --- pass 2: edges not cleared; pivots are vertices, pairs are H0 deaths.
    reduced_edge: dict[int, int] = {}
    low_inv_edge: dict[int, int] = {}
    killed_vertices: set[int] = set()
    for e in edge_ids:
        if e in cleared_edges:
            continue
        (a, b), _ = simplices[e]
        col = (1 << index_of[(a,)]) | (1 << index_of[(b,)])
        col = _reduce_column(col, low_inv_edge, reduced_edge)
        if col:
            low = col.bit_length() - 1
            reduced_edge[e] = col
            low_inv_edge[low] = e
            killed_vertices.add(low)
        else:
            # cycle that never gets filled by a triangle: essential H1 class
            h1_bars.append((values[e], math.inf))

    h0_bars: list[Bar] = []
    for i, (verts, _) in enumerate(simplices):
        if len(verts) != 1:
            continue
        if i in killed_vertices:
            h0_bars.append((0.0, values[low_inv_edge[i]]))
        else:
            h0_bars.append((0.0, math.inf))

    dgm0 = PersistenceDiagram(0, h0_bars, fc.eps_max)
    dgm1 = PersistenceDiagram(1, h1_bars, fc.eps_max)
    return dgm0, dgm1


def betti_curve(diagram: PersistenceDiagram, scales: np.ndarray) -> BettiCurve:
    """Sample ``#(bars alive at scale)`` along ``scales`` (birth <= s < death)."""
    scales = np.asarray(scales, dtype=np.float64)
    if scales.size and np.any(np.diff(scales) < 0):
        raise ValueError("scales must be non-decreasing")
    counts = np.zeros(scales.size, dtype=np.int64)
    for birth, death in diagram.bars:
        counts += (scales >= birth) & (scales < death)
    return BettiCurve(dimension=diagram.dimension, scales=scales, counts=counts)


# ---------------------------------------------------------------------------
# independent brute-force oracle
# ---------------------------------------------------------------------------

BRUTE_FORCE_MAX_VERTICES = 12


def _gf2_rank(columns: list[int]) -> int:
    rank = 0
    pivots: dict[int, int] = {}
    for col in columns:
        while col:
            low = col.bit_length() - 1
            if low in pivots:
                col ^= pivots[low]
            else:
                pivots[low] = col
                rank += 1
                break
    return rank


def brute_force_betti(dist: DistanceMatrix, eps: float) -> tuple[int, int]:
    """Betti numbers (b0, b1) of the static Rips complex at scale ``eps``.

    Deliberately shares nothing with the persistence pipeline: simplices are
    enumerated with itertools and the Betti numbers come from boundary ranks,

        b_d = dim C_d - rank d_d - rank d_{d+1},

    so the two routes can check each other.  Exponential enumeration is fine
    only for tiny inputs, hence the hard cap of 12 vertices.
    """
    n = dist.n_points
    if n > BRUTE_FORCE_MAX_VERTICES:
        raise ValueError(
            f"brute-force oracle is capped at {BRUTE_FORCE_MAX_VERTICES} vertices, got {n}"
        )
    d = dist.entries
    edges = [(i, j) for i, j in itertools.combinations(range(n), 2) if d[i, j] <= eps]
    eidx = {e: k for k, e in enumerate(edges)}
    triangles = [
        (i, j, k)
        for i, j, k in itertools.combinations(range(n), 3)
        if (i, j) in eidx and (i, k) in eidx and (j, k) in eidx
    ]
    d1 = [(1 << i) | (1 << j) for i, j in edges]
    d2 = [
        (1 << eidx[(i, j)]) | (1 << eidx[(i, k)]) | (1 << eidx[(j, k)])
        for i, j, k in triangles
    ]
    r1 = _gf2_rank(d1)
    r2 = _gf2_rank(d2)
    return n - r1, len(edges) - r1 - r2


# ---------------------------------------------------------------------------
# diagram CSV round-trip
# ---------------------------------------------------------------------------


def write_diagram_csv(
    path: str | Path,
    diagrams: list[PersistenceDiagram],
    manifest: Optional[dict[str, Any]] = None,
) -> None:
    """Write ``dim,birth,death`` rows sorted by (dim, birth, death)."""
    lines = ["dim,birth,death"]
    for dgm in sorted(diagrams, key=lambda g: g.dimension):
        for birth, death in dgm.bars:
            lines.append(f"{dgm.dimension},{fmt_float(birth)},{fmt_float(death)}")
    write_lines(path, lines, manifest)


def read_diagram_csv(
    path: str | Path, eps_max: Optional[float] = None
) -> tuple[list[PersistenceDiagram], Optional[dict[str, Any]]]:
    """Read a diagram CSV back into per-dimension diagrams.

    ``eps_max`` is taken from the embedded manifest when present; the argument
    is the fallback for files written without one.
    """
    manifest, lines = read_text_rows(path)
    if not lines or lines[0].strip() != "dim,birth,death":
        raise MalformedFileError(f"{path}: expected 'dim,birth,death' header")
    per_dim: dict[int, list[Bar]] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != 3:
            raise MalformedFileError(f"{path}: line {lineno}: expected 3 cells")
        try:
            dim = int(cells[0])
            birth = parse_float(cells[1])
            death = parse_float(cells[2])
        except ValueError as exc:
            raise MalformedFileError(f"{path}: line {lineno}: {exc}") from exc
        per_dim.setdefault(dim, []).append((birth, death))
    if manifest is not None and "eps_max" in manifest:
        eps_max = float(manifest["eps_max"])
    if eps_max is None:
        eps_max = math.inf
    diagrams = [
        PersistenceDiagram(dim, bars, eps_max) for dim, bars in sorted(per_dim.items())
    ]
    return diagrams, manifest
