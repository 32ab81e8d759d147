"""Estimating the train/test performance gap from topological summaries.

Each record pairs one trained network's summaries (life, midlife) with its
performance: the training score rho_train, and -- when known -- the test score
rho_test, both on a 0..100 scale.  The gap rho_train - rho_test is regressed
linearly on the chosen features,

    gap_hat = c1 * life + c2 * midlife + c3,

and a test score is then estimated as rho_train - gap_hat.  Coefficients are
fit by ordinary least squares and are unconstrained in sign.

Evaluation offers the two protocols used to validate the approach:
leave-one-sample-out (drop one record, fit on the rest, score the held-out
one) and leave-one-group-out (hold out an entire group, e.g. all records of
one dataset).  Folds whose reduced design matrix is singular are skipped and
counted rather than failing the whole evaluation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from ._io import dump_json, fmt_float, load_json, parse_float, read_text_rows, write_lines
from .errors import (
    InputError,
    MalformedFileError,
    NonFiniteValueError,
    ProtocolError,
    SingularFitError,
)

logger = logging.getLogger(__name__)

FEATURE_SETS: dict[str, tuple[str, ...]] = {
    "lambda": ("life",),
    "mu": ("midlife",),
    "both": ("life", "midlife"),
}

RECORDS_HEADER = "lambda,mu,rho_train,rho_test,group,model"


@dataclass(frozen=True)
class GapRecord:
    """One network's summaries and performance; rho_test may be unknown."""

    life: float
    midlife: float
    rho_train: float
    rho_test: Optional[float] = None
    group: Optional[str] = None
    model: Optional[str] = None

    def __post_init__(self) -> None:
        for name in ("life", "midlife", "rho_train"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise NonFiniteValueError(f"record field {name} must be finite, got {v!r}")
        for name in ("rho_train", "rho_test"):
            v = getattr(self, name)
            if v is None:
                continue
            if not math.isfinite(v):
                raise NonFiniteValueError(f"record field {name} must be finite, got {v!r}")
            if not 0.0 <= v <= 100.0:
                raise InputError(f"record field {name}={v!r} outside the 0..100 scale")

    @property
    def gap(self) -> Optional[float]:
        return None if self.rho_test is None else self.rho_train - self.rho_test


@dataclass(frozen=True)
class GapModel:
    """Fitted linear gap model; coefficients of unused features are 0."""

    c1: float
    c2: float
    c3: float
    feature_set: str
    fit_residual_rms: float


def _design(records: Sequence[GapRecord], feature_set: str) -> tuple[np.ndarray, np.ndarray]:
    features = FEATURE_SETS[feature_set]
    cols = []
    if "life" in features:
        cols.append([r.life for r in records])
    if "midlife" in features:
        cols.append([r.midlife for r in records])
    cols.append([1.0] * len(records))
    X = np.array(cols, dtype=np.float64).T
    y = np.array([r.gap for r in records], dtype=np.float64)
    return X, y


def _require_known_gaps(records: Sequence[GapRecord], purpose: str) -> None:
    missing = [i for i, r in enumerate(records) if r.rho_test is None]
    if missing:
        raise InputError(
            f"{purpose} needs rho_test on every record; missing on record(s) {missing[:10]}"
        )


def fit_gap_model(records: Sequence[GapRecord], feature_set: str = "both") -> GapModel:
    """Least-squares fit of the gap on the chosen features plus an intercept."""
    if feature_set not in FEATURE_SETS:
        raise ValueError(f"unknown feature set {feature_set!r}")
    n_params = len(FEATURE_SETS[feature_set]) + 1
    if len(records) < n_params:
        raise ProtocolError(
            f"need at least {n_params} records to fit {feature_set!r}, got {len(records)}"
        )
    _require_known_gaps(records, "fitting")
    X, y = _design(records, feature_set)
    coef, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < X.shape[1]:
        raise SingularFitError(
            f"design matrix rank {rank} < {X.shape[1]}; features are collinear"
        )
    residuals = y - X @ coef
    rms = float(np.sqrt(np.mean(residuals**2)))
    features = FEATURE_SETS[feature_set]
    c1 = float(coef[features.index("life")]) if "life" in features else 0.0
    c2 = float(coef[features.index("midlife")]) if "midlife" in features else 0.0
    c3 = float(coef[-1])
    return GapModel(c1=c1, c2=c2, c3=c3, feature_set=feature_set, fit_residual_rms=rms)


def predict_gap(model: GapModel, life: float, midlife: float) -> float:
    """Evaluate the fitted linear form at one network's summaries."""
    return model.c1 * life + model.c2 * midlife + model.c3


def estimate_test_performance(rho_train: float, gap: float) -> float:
    """Test-score estimate: training score minus the (estimated) gap."""
    return rho_train - gap


def estimation_error(rho_test: float, rho_test_estimate: float) -> float:
    """Absolute deviation between the true and the estimated test score."""
    return abs(rho_test - rho_test_estimate)


# ---------------------------------------------------------------------------
# evaluation protocols
# ---------------------------------------------------------------------------


@dataclass
class LooResult:
    """Leave-one-sample-out evaluation; errors[i] is None for skipped folds."""

    errors: list[Optional[float]]
    mean_error: float
    std_error: float
    n_used: int
    n_skipped: int


@dataclass
class GroupResult:
    group: str
    errors: list[float]
    mean_error: float
    std_error: float


@dataclass
class LodoResult:
    """Leave-one-group-out evaluation, one fold per group label."""

    groups: dict[str, GroupResult]
    skipped_groups: list[str]
    mean_error: float
    std_error: float
    n_used: int
    n_skipped: int


def _mean_std(errors: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(errors, dtype=np.float64)
    return float(arr.mean()), float(arr.std())


def leave_one_sample_out(records: Sequence[GapRecord], feature_set: str = "both") -> LooResult:
    """Drop each record in turn, fit on the rest, score the held-out record."""
    if feature_set not in FEATURE_SETS:
        raise ValueError(f"unknown feature set {feature_set!r}")
    n_params = len(FEATURE_SETS[feature_set]) + 1
    if len(records) < n_params + 1:
        raise ProtocolError(
            f"leave-one-sample-out with {feature_set!r} needs at least "
            f"{n_params + 1} records, got {len(records)}"
        )
    _require_known_gaps(records, "leave-one-sample-out")
    errors: list[Optional[float]] = []
    for i, held_out in enumerate(records):
        rest = [r for j, r in enumerate(records) if j != i]
        try:
            model = fit_gap_model(rest, feature_set)
        except SingularFitError:
            logger.warning("fold %d skipped: singular fit without record %d", i, i)
            errors.append(None)
            continue
        gap_hat = predict_gap(model, held_out.life, held_out.midlife)
        estimate = estimate_test_performance(held_out.rho_train, gap_hat)
        errors.append(estimation_error(held_out.rho_test, estimate))
    used = [e for e in errors if e is not None]
    if not used:
        raise SingularFitError("every leave-one-sample-out fold was singular")
    mean, std = _mean_std(used)
    return LooResult(
        errors=errors,
        mean_error=mean,
        std_error=std,
        n_used=len(used),
        n_skipped=len(errors) - len(used),
    )


def leave_one_group_out(records: Sequence[GapRecord], feature_set: str = "both") -> LodoResult:
    """Hold out all records of one group per fold (e.g. one dataset)."""
    if feature_set not in FEATURE_SETS:
        raise ValueError(f"unknown feature set {feature_set!r}")
    _require_known_gaps(records, "leave-one-group-out")
    unlabeled = [i for i, r in enumerate(records) if not r.group]
    if unlabeled:
        raise ProtocolError(
            f"leave-one-group-out needs a group on every record; "
            f"missing on record(s) {unlabeled[:10]}"
        )
    labels = sorted({r.group for r in records})
    if len(labels) < 2:
        raise ProtocolError(
            f"leave-one-group-out needs at least 2 distinct groups, got {len(labels)}"
        )
    groups: dict[str, GroupResult] = {}
    skipped: list[str] = []
    all_errors: list[float] = []
    for label in labels:
        train = [r for r in records if r.group != label]
        test = [r for r in records if r.group == label]
        try:
            model = fit_gap_model(train, feature_set)
        except (SingularFitError, ProtocolError):
            logger.warning("group %r skipped: cannot fit on the remaining records", label)
            skipped.append(label)
            continue
        fold_errors = [
            estimation_error(
                r.rho_test,
                estimate_test_performance(r.rho_train, predict_gap(model, r.life, r.midlife)),
            )
            for r in test
        ]
        mean, std = _mean_std(fold_errors)
        groups[label] = GroupResult(
            group=label, errors=fold_errors, mean_error=mean, std_error=std
        )
        all_errors.extend(fold_errors)
    if not groups:
        raise SingularFitError("every leave-one-group-out fold was singular")
    mean, std = _mean_std(all_errors)
    return LodoResult(
        groups=groups,
        skipped_groups=skipped,
        mean_error=mean,
        std_error=std,
        n_used=len(all_errors),
        n_skipped=len(skipped),
    )


# ---------------------------------------------------------------------------
# records CSV and model JSON
# ---------------------------------------------------------------------------


def write_records_csv(
    path: str | Path,
    records: Sequence[GapRecord],
    manifest: Optional[dict[str, Any]] = None,
) -> None:
    lines = [RECORDS_HEADER]
    for r in records:
        cells = [
            fmt_float(r.life),
            fmt_float(r.midlife),
            fmt_float(r.rho_train),
            fmt_float(r.rho_test) if r.rho_test is not None else "",
            r.group or "",
            r.model or "",
        ]
        lines.append(",".join(cells))
    write_lines(path, lines, manifest)


def read_records_csv(path: str | Path) -> tuple[list[GapRecord], Optional[dict[str, Any]]]:
    manifest, lines = read_text_rows(path)
    if not lines or lines[0].strip() != RECORDS_HEADER:
        raise MalformedFileError(f"{path}: expected header {RECORDS_HEADER!r}")
    records: list[GapRecord] = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != 6:
            raise MalformedFileError(
                f"{path}: line {lineno}: expected 6 cells, got {len(cells)}"
            )
        try:
            records.append(
                GapRecord(
                    life=parse_float(cells[0]),
                    midlife=parse_float(cells[1]),
                    rho_train=parse_float(cells[2]),
                    rho_test=parse_float(cells[3]) if cells[3].strip() else None,
                    group=cells[4].strip() or None,
                    model=cells[5].strip() or None,
                )
            )
        except ValueError as exc:
            raise MalformedFileError(f"{path}: line {lineno}: {exc}") from exc
    if not records:
        raise MalformedFileError(f"{path}: no records")
    return records, manifest


def write_model_json(
    path: str | Path, model: GapModel, manifest: Optional[dict[str, Any]] = None
) -> None:
    payload: dict[str, Any] = {
        "c1": model.c1,
        "c2": model.c2,
        "c3": model.c3,
        "feature_set": model.feature_set,
        "fit_residual_rms": model.fit_residual_rms,
    }
    if manifest is not None:
        payload["manifest"] = manifest
    dump_json(path, payload)


def read_model_json(path: str | Path) -> tuple[GapModel, Optional[dict[str, Any]]]:
    payload = load_json(path, "gap model")
    try:
        model = GapModel(
            c1=float(payload["c1"]),
            c2=float(payload["c2"]),
            c3=float(payload["c3"]),
            feature_set=str(payload["feature_set"]),
            fit_residual_rms=float(payload["fit_residual_rms"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedFileError(f"{path}: not a gap model JSON: {exc}") from exc
    if model.feature_set not in FEATURE_SETS:
        raise MalformedFileError(f"{path}: unknown feature set {model.feature_set!r}")
    return model, payload.get("manifest")
