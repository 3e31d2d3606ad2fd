"""Named design matrices and a Householder-QR least-squares solver.

The solver factors X = QR with Householder reflections and back-substitutes,
which keeps the conditioning of X itself rather than squaring it through the
normal equations. Rank deficiency is an error that names a dependent column,
never a silent pseudo-inverse.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig, RankDeficient

# a trailing column norm below this fraction of the original column norm
# means the column lies in the span of the earlier ones
_RANK_RTOL = 1e-8


@dataclass(frozen=True)
class DesignMatrix:
    """Row-major feature matrix with named columns and a target vector."""

    columns: tuple[str, ...]
    values: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.values, dtype=float)
        y = np.asarray(self.target, dtype=float)
        if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
            raise InvalidConfig("design", "values must be (rows, cols) with one "
                                          "target per row")
        if x.shape[1] != len(self.columns):
            raise InvalidConfig("design", "one name per column required")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise InvalidConfig("design", "all entries must be finite")
        object.__setattr__(self, "values", x)
        object.__setattr__(self, "target", y)

    @property
    def rows(self) -> int:
        return self.values.shape[0]


def solve_least_squares(design: DesignMatrix) -> np.ndarray:
    """Unique minimizer of ||X b - y||^2 via Householder QR.

    Requires rows >= columns and full column rank; raises RankDeficient
    naming the first column whose trailing norm collapses.
    """
    x, y = design.values, design.target
    n, p = x.shape
    if n < p:
        raise InvalidConfig("design", f"need at least as many rows ({n}) as "
                                      f"columns ({p})")
    r = x.copy()
    qty = y.copy()
    col_norms = np.sqrt((x * x).sum(axis=0))
    scale = max(col_norms.max(), 1.0)
    for k in range(p):
        v = r[k:, k].copy()
        norm = np.sqrt(v @ v)
        if norm <= _RANK_RTOL * max(col_norms[k], scale * np.finfo(float).eps):
            raise RankDeficient(design.columns[k])
        v[0] += np.copysign(norm, v[0]) if v[0] != 0 else norm
        v /= np.sqrt(v @ v)
        r[k:, k:] -= 2.0 * np.outer(v, v @ r[k:, k:])
        qty[k:] -= 2.0 * v * (v @ qty[k:])
    beta = np.zeros(p)
    for k in range(p - 1, -1, -1):
        beta[k] = (qty[k] - r[k, k + 1:] @ beta[k + 1:]) / r[k, k]
    return beta
