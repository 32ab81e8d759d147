"""Shared builders and independent oracles used across the test modules.

The oracles here deliberately re-derive results through a different route
than the package (normal equations instead of lstsq, hat-matrix PRESS
residuals instead of refitting, explicit Gram-factor geometry instead of the
metric pipeline) so that agreement between the two is evidence, not tautology.
"""

from __future__ import annotations

import math

import numpy as np

from topogap import DistanceMatrix, GapRecord
from topogap.gap import FEATURE_SETS

# ---------------------------------------------------------------------------
# geometry builders
# ---------------------------------------------------------------------------


def square_distance_matrix() -> DistanceMatrix:
    """Unit-square corners: four sides at 1, two diagonals at sqrt(2)."""
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    diff = pts[:, None, :] - pts[None, :, :]
    d = np.sqrt((diff**2).sum(-1))
    d = (d + d.T) / 2.0
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(d)


def circle_distance_matrix(n: int = 20) -> DistanceMatrix:
    """Evenly spaced points on a circle, chord distances scaled into [0, 1].

    The chord between points k apart is 2*sin(pi*k/n); dividing by the
    diameter (the max chord, 2) gives sin(pi*k/n) exactly, which keeps the
    many distance ties exact instead of ulp-perturbed by cos/sin coordinates.
    """
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            hop = min(abs(i - j), n - abs(i - j))
            d[i, j] = math.sin(math.pi * hop / n)
    return DistanceMatrix(d)


def random_distance_matrix(rng: np.random.Generator, n: int, ties: bool = False) -> DistanceMatrix:
    """Random symmetric dissimilarities in [0, 1] (no triangle inequality needed)."""
    d = rng.uniform(0.0, 1.0, size=(n, n))
    if ties:
        # coarse quantization manufactures simultaneous insertions
        d = np.round(d, 1)
    d = np.triu(d, k=1)
    d = d + d.T
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(d)


def gram_activation_matrix(target_corr: np.ndarray, n_samples: int) -> np.ndarray:
    """Activation matrix whose Pearson correlation matrix is ``target_corr``.

    Columns are placed in the orthogonal complement of the all-ones vector
    (so they are zero-mean) with Gram matrix equal to the target, making the
    computed correlations match to machine precision.
    """
    m = target_corr.shape[0]
    if n_samples < m + 1:
        raise ValueError("need at least one more sample than nodes")
    basis = np.linalg.qr(
        np.column_stack([np.ones(n_samples), np.eye(n_samples)[:, :m]])
    )[0][:, 1 : m + 1]
    factor = np.linalg.cholesky(target_corr).T  # factor.T @ factor == target
    return basis @ factor


def square_like_correlations(side: float = 0.5) -> np.ndarray:
    """Target correlations inducing distances (s, s, s, s, s*sqrt2, s*sqrt2).

    Four nodes arranged so d = 1 - |nu| reproduces a square with side ``s``
    scaled into the unit distance range.
    """
    adjacent = 1.0 - side
    diagonal = 1.0 - side * math.sqrt(2.0)
    g = np.full((4, 4), diagonal)
    for i in range(4):
        g[i, i] = 1.0
        g[i, (i + 1) % 4] = adjacent
        g[(i + 1) % 4, i] = adjacent
    return g


# ---------------------------------------------------------------------------
# regression builders and oracles
# ---------------------------------------------------------------------------


def make_records(
    rng: np.random.Generator,
    n: int,
    coeffs: tuple[float, float, float] = (2.0, 3.0, 1.0),
    noise: float = 0.0,
    groups: int = 0,
) -> list[GapRecord]:
    """Records whose gap follows c1*life + c2*midlife + c3 plus optional noise."""
    c1, c2, c3 = coeffs
    records = []
    for i in range(n):
        life = float(rng.uniform(0.05, 0.8))
        midlife = float(rng.uniform(0.1, 0.9))
        gap = c1 * life + c2 * midlife + c3 + (float(rng.normal(0.0, noise)) if noise else 0.0)
        rho_train = float(rng.uniform(88.0, 97.0))
        records.append(
            GapRecord(
                life=life,
                midlife=midlife,
                rho_train=rho_train,
                rho_test=rho_train - gap,
                group=f"g{i % groups}" if groups else None,
                model=f"m{i % 2}",
            )
        )
    return records


def design_matrix(records, feature_set: str) -> tuple[np.ndarray, np.ndarray]:
    """Independent duplicate of the design construction, kept test-side."""
    features = FEATURE_SETS[feature_set]
    cols = []
    if "life" in features:
        cols.append([r.life for r in records])
    if "midlife" in features:
        cols.append([r.midlife for r in records])
    cols.append([1.0] * len(records))
    return np.array(cols).T, np.array([r.rho_train - r.rho_test for r in records])


def normal_equations_fit(records, feature_set: str) -> np.ndarray:
    """OLS via explicit normal equations: solve(X'X, X'y)."""
    X, y = design_matrix(records, feature_set)
    return np.linalg.solve(X.T @ X, X.T @ y)


def press_loo_errors(records, feature_set: str) -> np.ndarray:
    """Leave-one-out absolute errors via the hat-matrix PRESS identity.

    With H = X (X'X)^-1 X' and e the full-fit residuals, the residual of
    record i under the model fit without it is e_i / (1 - H_ii); its absolute
    value equals |rho_test_i - estimated rho_test_i| of the protocol.
    """
    X, y = design_matrix(records, feature_set)
    xtx_inv = np.linalg.inv(X.T @ X)
    hat_diag = np.einsum("ij,jk,ik->i", X, xtx_inv, X)
    residuals = y - X @ (xtx_inv @ (X.T @ y))
    return np.abs(residuals / (1.0 - hat_diag))


def direct_loo_errors(records, feature_set: str) -> list[float]:
    """Leave-one-out by literal refitting with the normal-equations solver."""
    out = []
    for i, rec in enumerate(records):
        rest = [r for j, r in enumerate(records) if j != i]
        coef = normal_equations_fit(rest, feature_set)
        x_row, _ = design_matrix([rec], feature_set)
        gap_hat = float(x_row[0] @ coef)
        out.append(abs(rec.rho_test - (rec.rho_train - gap_hat)))
    return out


def direct_lodo_means(records, feature_set: str) -> dict[str, float]:
    """Leave-one-group-out group means by literal refitting."""
    labels = sorted({r.group for r in records})
    means = {}
    for label in labels:
        train = [r for r in records if r.group != label]
        test = [r for r in records if r.group == label]
        coef = normal_equations_fit(train, feature_set)
        errs = []
        for rec in test:
            x_row, _ = design_matrix([rec], feature_set)
            gap_hat = float(x_row[0] @ coef)
            errs.append(abs(rec.rho_test - (rec.rho_train - gap_hat)))
        means[label] = float(np.mean(errs))
    return means
