"""Scalar summaries of a persistence diagram: average life and midlife.

Over the bars (b_i, d_i) that survive filtering,

    life    = mean(d_i - b_i)         -- how persistent the cavities are
    midlife = mean((d_i + b_i) / 2)   -- where on the scale axis they sit

Two filters run before averaging, in this order:

1. the infinite-bar policy: ``exclude`` drops bars that never die within the
   filtration, ``clamp`` pretends they die at eps_max;
2. zero-persistence bars (birth == death) are always dropped -- they are
   bookkeeping artifacts of simultaneous insertions, not cavities.

If nothing survives, the diagram genuinely shows no cavities and
:class:`NoCavitiesError` is raised rather than inventing a 0: a value of 0
would mean "cavities with no persistence", which is a different claim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from ._io import dump_json, load_json
from .errors import MalformedFileError, NoCavitiesError
from .homology import Bar, PersistenceDiagram

INFINITE_POLICIES = ("exclude", "clamp")


@dataclass(frozen=True)
class TopologicalSummary:
    """Life/midlife of a diagram plus the bookkeeping needed to compare runs."""

    life: float
    midlife: float
    n_cavities: int
    infinite_policy: str
    eps_max: float


def effective_bars(diagram: PersistenceDiagram, infinite_policy: str = "exclude") -> list[Bar]:
    """Bars that enter the averages, after policy and zero-persistence filtering."""
    if infinite_policy not in INFINITE_POLICIES:
        raise ValueError(f"unknown infinite-bar policy {infinite_policy!r}")
    bars: list[Bar] = []
    for birth, death in diagram.bars:
        if math.isinf(death):
            if infinite_policy == "exclude":
                continue
            death = diagram.eps_max
        if death > birth:
            bars.append((birth, death))
    return bars


def life(diagram: PersistenceDiagram, infinite_policy: str = "exclude") -> tuple[float, int]:
    """Mean bar length; returns ``(value, n_bars_averaged)``."""
    bars = effective_bars(diagram, infinite_policy)
    if not bars:
        raise NoCavitiesError(
            f"no dimension-{diagram.dimension} cavities to average "
            f"(policy={infinite_policy!r})"
        )
    return math.fsum(d - b for b, d in bars) / len(bars), len(bars)


def midlife(diagram: PersistenceDiagram, infinite_policy: str = "exclude") -> tuple[float, int]:
    """Mean bar midpoint; returns ``(value, n_bars_averaged)``."""
    bars = effective_bars(diagram, infinite_policy)
    if not bars:
        raise NoCavitiesError(
            f"no dimension-{diagram.dimension} cavities to average "
            f"(policy={infinite_policy!r})"
        )
    return math.fsum((d + b) / 2.0 for b, d in bars) / len(bars), len(bars)


def summarize_diagram(
    diagram: PersistenceDiagram, infinite_policy: str = "exclude"
) -> TopologicalSummary:
    """Life and midlife over the same filtered bar set."""
    life_value, n = life(diagram, infinite_policy)
    midlife_value, n2 = midlife(diagram, infinite_policy)
    assert n == n2  # same filter, same bars
    return TopologicalSummary(
        life=life_value,
        midlife=midlife_value,
        n_cavities=n,
        infinite_policy=infinite_policy,
        eps_max=diagram.eps_max,
    )


def write_summary_json(
    path: str | Path,
    summary: TopologicalSummary,
    manifest: Optional[dict[str, Any]] = None,
) -> None:
    payload: dict[str, Any] = {
        "lambda": summary.life,
        "mu": summary.midlife,
        "n_cavities": summary.n_cavities,
        "policy": summary.infinite_policy,
        "eps_max": summary.eps_max,
    }
    if manifest is not None:
        payload["manifest"] = manifest
    dump_json(path, payload)


def read_summary_json(path: str | Path) -> tuple[TopologicalSummary, Optional[dict[str, Any]]]:
    payload = load_json(path, "topological summary")
    try:
        summary = TopologicalSummary(
            life=float(payload["lambda"]),
            midlife=float(payload["mu"]),
            n_cavities=int(payload["n_cavities"]),
            infinite_policy=str(payload["policy"]),
            eps_max=float(payload["eps_max"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedFileError(f"{path}: not a summary JSON: {exc}") from exc
    return summary, payload.get("manifest")
