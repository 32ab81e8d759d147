"""Vietoris-Rips filtration of a distance matrix, up to triangles.

A simplex enters the filtration at the largest pairwise distance among its
vertices (the diameter rule): vertices at 0, an edge at its length, a triangle
at its longest side.  Only simplices whose value is <= ``eps_max`` are built
(boundary inclusive), and dimension is capped at 2 -- that is all the homology
stage (H0, H1) can use, and it keeps the construction near-quadratic instead
of exploding combinatorially.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from ._io import fmt_float, write_lines
from .metric import DistanceMatrix

Simplex = tuple[tuple[int, ...], float]


@dataclass
class FilteredComplex:
    """Simplices in canonical filtration order.

    The order is by (value, dimension, vertex tuple): ties in value are broken
    so that lower-dimensional simplices come first (a face can never follow a
    coface) and remaining ties lexicographically, which makes every downstream
    computation reproducible and gives the elder rule a fixed tie-break.
    """

    n_vertices: int
    eps_max: float
    simplices: list[Simplex]

    def dim_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for verts, _ in self.simplices:
            d = len(verts) - 1
            counts[d] = counts.get(d, 0) + 1
        return counts

    def of_dim(self, dim: int) -> Iterator[Simplex]:
        for verts, value in self.simplices:
            if len(verts) - 1 == dim:
                yield verts, value

    def write_debug_csv(self, path: str | Path, manifest: Optional[dict] = None) -> None:
        """Dump ``dim,vertices,filtration_value`` rows in canonical order."""
        lines = ["dim,vertices,filtration_value"]
        for verts, value in self.simplices:
            lines.append(
                f"{len(verts) - 1},{' '.join(str(v) for v in verts)},{fmt_float(value)}"
            )
        write_lines(path, lines, manifest)


def _canonical_key(simplex: Simplex) -> tuple[float, int, tuple[int, ...]]:
    verts, value = simplex
    return (value, len(verts), verts)


def vietoris_rips(dist: DistanceMatrix, eps_max: float = 1.0, max_dim: int = 2) -> FilteredComplex:
    """Build the Rips filtration of ``dist`` up to scale ``eps_max``.

    ``max_dim`` may be 1 (graph only) or 2 (graph plus triangles).
    """
    if not (isinstance(eps_max, (int, float)) and math.isfinite(eps_max)) or eps_max <= 0:
        raise ValueError(f"eps_max must be a positive finite number, got {eps_max!r}")
    if max_dim not in (1, 2):
        raise ValueError(f"max_dim must be 1 or 2, got {max_dim!r}")
    d = dist.entries
    n = d.shape[0]
    simplices: list[Simplex] = [((i,), 0.0) for i in range(n)]

    iu, ju = np.triu_indices(n, k=1)
    keep = d[iu, ju] <= eps_max
    ei, ej, ev = iu[keep], ju[keep], d[iu, ju][keep]
    simplices.extend(((int(i), int(j)), float(v)) for i, j, v in zip(ei, ej, ev))

    if max_dim == 2:
        adj = (d <= eps_max)
        np.fill_diagonal(adj, False)
        for i, j, vij in zip(ei, ej, ev):
            # common neighbours k > j close the triangle (i, j, k); taking
            # only k > j emits each triangle exactly once.
            ks = np.flatnonzero(adj[i] & adj[j])
            ks = ks[ks > j]
            if ks.size == 0:
                continue
            values = np.maximum(vij, np.maximum(d[i, ks], d[j, ks]))
            simplices.extend(
                ((int(i), int(j), int(k)), float(v)) for k, v in zip(ks, values)
            )

    simplices.sort(key=_canonical_key)
    return FilteredComplex(n_vertices=n, eps_max=float(eps_max), simplices=simplices)


def filtration_grid(fc: FilteredComplex, n_steps: int = 100) -> np.ndarray:
    """Scales at which to sample Betti curves.

    Uses the exact distinct filtration values of the complex when there are at
    most ``n_steps`` of them, otherwise ``n_steps`` uniformly spaced scales
    over [0, eps_max].
    """
    if n_steps < 1:
        raise ValueError(f"n_steps must be at least 1, got {n_steps}")
    exact = np.unique(np.array([value for _, value in fc.simplices], dtype=np.float64))
    if exact.size <= n_steps:
        return exact
    return np.linspace(0.0, fc.eps_max, n_steps)
