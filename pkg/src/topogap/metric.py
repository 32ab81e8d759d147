"""Functional correlation metric between network nodes.

A *node* is anything that emits one scalar per input sample (a unit, or the
spatial mean of a conv filter's output).  Stacking those scalars over a probe
set gives the activation matrix (samples x nodes).  The similarity between two
nodes p, q is the Pearson correlation of their activation columns

    nu_pq = sum_i (a_pi - mean_p)(a_qi - mean_q) / (n * sd_p * sd_q)

with population (1/n) normalization, and the dissimilarity fed to the
filtration is ``d = 1 - |nu|``: strongly correlated *or* anti-correlated nodes
are close, uncorrelated nodes are far.  Distances therefore live in [0, 1].
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ._io import RunManifest, load_sidecar_manifest
from .errors import (
    DegenerateDataError,
    MalformedFileError,
    NodeCapError,
    NonFiniteValueError,
    TooFewSamplesError,
)

logger = logging.getLogger(__name__)

MAX_NODES = 10_000
#: Entries farther outside [-1, 1] than this indicate a bug, not roundoff.
CLAMP_SLACK = 1e-12


@dataclass
class ActivationMatrix:
    """Samples-by-nodes activation matrix with optional node labels."""

    values: np.ndarray
    node_labels: Optional[tuple[str, ...]] = None

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise MalformedFileError("activation matrix must be 2-dimensional")
        n_samples, n_nodes = self.values.shape
        if n_samples < 2:
            raise TooFewSamplesError(
                f"need at least 2 activation samples, got {n_samples}"
            )
        if n_nodes < 1:
            raise MalformedFileError("activation matrix has no node columns")
        if n_nodes > MAX_NODES:
            raise NodeCapError(f"{n_nodes} nodes exceeds the cap of {MAX_NODES}")
        if not np.all(np.isfinite(self.values)):
            bad = np.argwhere(~np.isfinite(self.values))[0]
            raise NonFiniteValueError(
                f"non-finite activation at sample {bad[0]}, node {bad[1]}"
            )
        if self.node_labels is not None:
            self.node_labels = tuple(str(s) for s in self.node_labels)
            if len(self.node_labels) != n_nodes:
                raise MalformedFileError(
                    f"{len(self.node_labels)} node labels for {n_nodes} node columns"
                )

    @property
    def n_samples(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_nodes(self) -> int:
        return int(self.values.shape[1])


@dataclass
class CorrelationMatrix:
    """Symmetric node-correlation matrix with a unit diagonal."""

    entries: np.ndarray
    node_labels: Optional[tuple[str, ...]] = None

    def __post_init__(self) -> None:
        self.entries = np.asarray(self.entries, dtype=np.float64)
        m = self.entries
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("correlation matrix must be square")
        if not np.all(np.isfinite(m)):
            raise NonFiniteValueError("correlation matrix has non-finite entries")
        if not np.array_equal(m, m.T):
            raise ValueError("correlation matrix must be exactly symmetric")
        if np.abs(m).max(initial=0.0) > 1.0:
            raise ValueError("correlation entries must lie in [-1, 1]")
        if not np.all(np.diag(m) == 1.0):
            raise ValueError("correlation diagonal must be exactly 1")

    @property
    def n_nodes(self) -> int:
        return int(self.entries.shape[0])


@dataclass
class DistanceMatrix:
    """Symmetric dissimilarity matrix with a zero diagonal.

    Matrices produced by :func:`to_distance` additionally have all entries in
    [0, 1]; the type itself only demands a finite, nonnegative, symmetric
    matrix so that geometric point clouds (benchmarks, tests) can use the same
    filtration machinery.
    """

    entries: np.ndarray

    def __post_init__(self) -> None:
        self.entries = np.asarray(self.entries, dtype=np.float64)
        m = self.entries
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("distance matrix must be square")
        if not np.all(np.isfinite(m)):
            raise NonFiniteValueError("distance matrix has non-finite entries")
        if not np.array_equal(m, m.T):
            raise ValueError("distance matrix must be exactly symmetric")
        if m.min(initial=0.0) < 0.0:
            raise ValueError("distances must be nonnegative")
        if not np.all(np.diag(m) == 0.0):
            raise ValueError("distance diagonal must be exactly 0")

    @property
    def n_points(self) -> int:
        return int(self.entries.shape[0])


def load_activations(path: str | Path) -> tuple[ActivationMatrix, Optional[RunManifest]]:
    """Load an activation CSV and its optional ``<stem>.manifest.json`` sidecar.

    The first non-comment row is a header of node labels iff not all of its
    cells parse as floats; every following row is one sample.  Comment lines
    (``#``) and blank lines are skipped.
    """
    path = Path(path)
    if not path.exists():
        raise MalformedFileError(f"{path}: no such file")
    rows: list[list[str]] = []
    with path.open(newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or (row[0].lstrip().startswith("#")):
                continue
            if all(not cell.strip() for cell in row):
                continue
            rows.append([cell.strip() for cell in row])
    if not rows:
        raise MalformedFileError(f"{path}: no data rows")

    def _parses(row: list[str]) -> bool:
        try:
            for cell in row:
                float(cell)
        except ValueError:
            return False
        return True

    labels: Optional[tuple[str, ...]] = None
    start = 0
    if not _parses(rows[0]):
        labels = tuple(rows[0])
        start = 1
    data = rows[start:]
    if not data:
        raise MalformedFileError(f"{path}: header but no sample rows")
    width = len(data[0])
    values = np.empty((len(data), width), dtype=np.float64)
    for i, row in enumerate(data):
        if len(row) != width:
            raise MalformedFileError(
                f"{path}: row {start + i + 1} has {len(row)} cells, expected {width}"
            )
        for j, cell in enumerate(row):
            try:
                values[i, j] = float(cell)
            except ValueError as exc:
                raise MalformedFileError(
                    f"{path}: row {start + i + 1}, column {j + 1}: {cell!r} is not a number"
                ) from exc
    act = ActivationMatrix(values, node_labels=labels)
    return act, load_sidecar_manifest(path)


def _tie_exact_unit_correlations(values: np.ndarray, corr: np.ndarray) -> None:
    """Force correlations of bitwise-identical (up to sign) columns to +/-1.

    Normalization introduces last-ulp noise, but a duplicated node must sit at
    distance exactly 0 from its twin.  Columns are grouped by their byte
    pattern modulo sign, which costs O(n_samples * n_nodes) and never touches
    non-duplicate pairs.
    """
    groups: dict[bytes, list[tuple[int, int]]] = {}
    for j in range(values.shape[1]):
        pos = values[:, j].tobytes()
        neg = (-values[:, j]).tobytes()
        if pos <= neg:
            groups.setdefault(pos, []).append((j, 1))
        else:
            groups.setdefault(neg, []).append((j, -1))
    for members in groups.values():
        if len(members) < 2:
            continue
        for a, (j1, s1) in enumerate(members):
            for j2, s2 in members[a + 1:]:
                corr[j1, j2] = corr[j2, j1] = 1.0 if s1 == s2 else -1.0


def correlation_matrix(
    act: ActivationMatrix, degenerate_policy: str = "drop-node"
) -> tuple[CorrelationMatrix, np.ndarray]:
    """Pearson correlation between all node pairs.

    Constant (zero-variance) nodes have no defined correlation; the
    ``degenerate_policy`` decides what happens to them:

    * ``"drop-node"`` -- remove them and report which (default),
    * ``"error"`` -- raise :class:`DegenerateDataError`.

    Returns the correlation matrix over the kept nodes together with the
    original indices of those nodes.
    """
    if degenerate_policy not in ("drop-node", "error"):
        raise ValueError(f"unknown degenerate policy {degenerate_policy!r}")
    values = act.values
    # max-min == 0 catches constant columns exactly, with no roundoff trap:
    # the mean of a constant column is itself subject to rounding, so a
    # variance test could miss true constants.
    degenerate = np.ptp(values, axis=0) == 0.0
    if degenerate.any():
        idx = np.flatnonzero(degenerate)
        names = (
            [act.node_labels[i] for i in idx] if act.node_labels else idx.tolist()
        )
        if degenerate_policy == "error":
            raise DegenerateDataError(
                f"{idx.size} constant node(s) with undefined correlation: {names[:10]}"
            )
        logger.warning("dropping %d constant node(s): %s", idx.size, names[:10])
    kept = np.flatnonzero(~degenerate)
    if kept.size < 2:
        raise DegenerateDataError(
            f"need at least 2 non-constant nodes, have {kept.size}"
        )
    sub = values[:, kept]
    n = sub.shape[0]
    centered = sub - sub.mean(axis=0)
    sd = np.sqrt(np.mean(centered * centered, axis=0))
    normalized = centered / sd
    corr = normalized.T @ normalized / n
    corr = (corr + corr.T) / 2.0
    worst = np.abs(corr).max()
    if worst > 1.0 + CLAMP_SLACK:
        raise AssertionError(
            f"correlation magnitude {worst} exceeds 1 by more than roundoff"
        )
    np.clip(corr, -1.0, 1.0, out=corr)
    np.fill_diagonal(corr, 1.0)
    _tie_exact_unit_correlations(sub, corr)
    labels = (
        tuple(act.node_labels[i] for i in kept) if act.node_labels is not None else None
    )
    return CorrelationMatrix(corr, node_labels=labels), kept


def to_distance(corr: CorrelationMatrix) -> DistanceMatrix:
    """Map correlations to dissimilarities via ``d = 1 - |nu|``.

    Entries land in [0, 1]; a pair at distance 0 is exactly (anti)correlated,
    distance 1 means no linear relationship at all.
    """
    d = 1.0 - np.abs(corr.entries)
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(d)
