"""Topology-driven early stopping.

During training, the scale at which the dimension-1 Betti curve peaks drifts
toward 0 while the network is still generalizing better, and starts moving
back up when it begins to overfit.  The rule is therefore: track the peak
index per epoch and stop on the first strict increase.

``patience`` softens the rule: training stops on a strict increase only after
``patience + 1`` increase events have accumulated over the whole trace, so
with patience 0 the decision depends on nothing but the last two entries.

The peak index is an *index into a scale grid*, so comparisons across epochs
are only meaningful when every epoch uses the same grid.  The CLI pins a
uniform grid over [0, eps_max] for exactly that reason.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, NamedTuple, Optional

import numpy as np

from ._io import fmt_float, parse_float, read_text_rows, manifest_comment
from .errors import MalformedFileError, ProtocolError
from .homology import BettiCurve

TRACE_HEADER = "epoch,peak_index,peak_scale,decision"

CONTINUE = "continue"
STOP = "stop"


class PeakScale(NamedTuple):
    """Argmax of a Betti curve; flags the all-zero (no cavities) case."""

    index: int
    no_cavities: bool


def peak_scale(curve: BettiCurve) -> PeakScale:
    """Index of the curve's maximum; ties resolve to the smallest index.

    An all-zero curve (no cavities anywhere) is not an error during training
    -- early epochs often have none -- so it reports index 0 with a flag.
    """
    counts = np.asarray(curve.counts)
    if counts.size == 0:
        raise ValueError("empty Betti curve")
    if not counts.any():
        return PeakScale(index=0, no_cavities=True)
    return PeakScale(index=int(np.argmax(counts)), no_cavities=False)


@dataclass
class PeakTrace:
    """Per-epoch history of peak indices for one training run."""

    epochs: list[int] = field(default_factory=list)
    peak_indices: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.peak_indices)


def update_and_check(
    trace: PeakTrace,
    peak_index: int,
    epoch: Optional[int] = None,
    patience: int = 0,
) -> str:
    """Append this epoch's peak index and decide ``continue`` or ``stop``.

    Stops iff the new index strictly exceeds the previous one and the trace
    has now seen at least ``patience + 1`` strict increases in total.
    """
    if patience < 0:
        raise ValueError(f"patience must be >= 0, got {patience}")
    if peak_index < 0:
        raise ValueError(f"peak index must be >= 0, got {peak_index}")
    if epoch is None:
        epoch = trace.epochs[-1] + 1 if trace.epochs else 0
    if trace.epochs and epoch <= trace.epochs[-1]:
        raise ProtocolError(
            f"epoch {epoch} does not advance the trace (last was {trace.epochs[-1]})"
        )
    increased_now = bool(trace.peak_indices) and peak_index > trace.peak_indices[-1]
    trace.epochs.append(epoch)
    trace.peak_indices.append(peak_index)
    n_increases = sum(
        1
        for prev, cur in zip(trace.peak_indices, trace.peak_indices[1:])
        if cur > prev
    )
    if increased_now and n_increases >= patience + 1:
        return STOP
    return CONTINUE


# ---------------------------------------------------------------------------
# trace CSV
# ---------------------------------------------------------------------------


def append_trace_row(
    path: str | Path,
    epoch: int,
    peak_index: int,
    scale: float,
    decision: str,
    manifest: Optional[dict[str, Any]] = None,
) -> None:
    """Append one ``epoch,peak_index,peak_scale,decision`` row.

    Creates the file (manifest comment plus header) on first use.
    """
    path = Path(path)
    row = f"{epoch},{peak_index},{fmt_float(scale)},{decision}"
    if not path.exists():
        lines = []
        if manifest is not None:
            lines.append(manifest_comment(manifest))
        lines.append(TRACE_HEADER)
        lines.append(row)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return
    with path.open("a", encoding="utf-8") as fh:
        fh.write(row + "\n")


def read_trace(path: str | Path) -> tuple[PeakTrace, list[str], Optional[dict[str, Any]]]:
    """Read a trace CSV back; returns (trace, decisions, manifest)."""
    manifest, lines = read_text_rows(path)
    if not lines or lines[0].strip() != TRACE_HEADER:
        raise MalformedFileError(f"{path}: expected header {TRACE_HEADER!r}")
    trace = PeakTrace()
    decisions: list[str] = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != 4:
            raise MalformedFileError(f"{path}: line {lineno}: expected 4 cells")
        try:
            trace.epochs.append(int(cells[0]))
            trace.peak_indices.append(int(cells[1]))
            parse_float(cells[2])  # scale column must at least parse
        except ValueError as exc:
            raise MalformedFileError(f"{path}: line {lineno}: {exc}") from exc
        decision = cells[3].strip()
        if decision not in (CONTINUE, STOP):
            raise MalformedFileError(
                f"{path}: line {lineno}: decision must be '{CONTINUE}' or '{STOP}'"
            )
        decisions.append(decision)
    return trace, decisions, manifest
