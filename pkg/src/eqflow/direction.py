"""Single-pair quasi-Newton search direction.

The inverse-curvature model H is a rank-two update of the identity built
from the most recent accepted step ``s`` and projected-gradient difference
``y``.  H is never stored: the search direction -H @ pg is assembled from
three inner products with the cached pair scalars.  Every eigenvalue of H
exceeds 1/2, so -H @ pg is always a descent direction for pg.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .projection import DimensionMismatchError


@dataclass(frozen=True)
class CurvaturePair:
    """An accepted step ``s`` and projected-gradient change ``y``.

    The inner products consumed by the direction formula are computed once
    here and cached; per-iteration work then stays at three new inner
    products. ``None`` stands in for the empty pair of the first iteration.
    """

    s: np.ndarray
    y: np.ndarray
    s_dot_y: float
    s_sq: float
    y_sq: float

    @classmethod
    def from_step(cls, s, y) -> "CurvaturePair":
        s = np.asarray(s, dtype=float)
        y = np.asarray(y, dtype=float)
        if s.shape != y.shape:
            raise DimensionMismatchError(
                f"step and gradient-change shapes differ: {s.shape} vs {y.shape}"
            )
        return cls(s=s, y=y, s_dot_y=float(s @ y), s_sq=float(s @ s),
                   y_sq=float(y @ y))


def curvature_gate(pair: Optional[CurvaturePair], theta: float) -> bool:
    """True iff |s.y| > theta * ||s||^2; an absent or zero pair fails."""
    if pair is None or pair.s_sq == 0.0:
        return False
    return abs(pair.s_dot_y) > theta * pair.s_sq


def direction(pg, pair: Optional[CurvaturePair], theta: float) -> np.ndarray:
    """Return d = -H @ pg for the gated rank-two H (identity if gate fails)."""
    pg = np.asarray(pg, dtype=float)
    if not curvature_gate(pair, theta):
        return -pg
    if pair.s.shape != pg.shape:
        raise DimensionMismatchError(
            f"pair has shape {pair.s.shape}, gradient has shape {pg.shape}"
        )
    c = pair.s_dot_y
    s_pg = float(pair.s @ pg)
    y_pg = float(pair.y @ pg)
    return (-pg
            + (pair.y * s_pg + pair.s * y_pg) / c
            - (2.0 * pair.y_sq * s_pg / c**2) * pair.s)


def dense_h(pair: Optional[CurvaturePair], theta: float, n: int) -> np.ndarray:
    """Materialize H as an n-by-n matrix. Test-scale reconstruction only."""
    if not curvature_gate(pair, theta):
        return np.eye(n)
    s, y, c = pair.s, pair.y, pair.s_dot_y
    return (np.eye(n)
            - (np.outer(y, s) + np.outer(s, y)) / c
            + (2.0 * pair.y_sq / c**2) * np.outer(s, s))
