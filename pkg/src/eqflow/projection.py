"""QR-based projection machinery for the constraint set {x : Ax = b}.

Everything downstream of the constraints lives here: the Householder QR
factorization of A^T, projected gradients, least-distance feasibility
restoration, Lagrange multiplier recovery, and the KKT/feasibility
residuals used for termination reporting.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_triangular


class DimensionMismatchError(ValueError):
    """A vector or matrix argument has an incompatible shape."""


class RankDeficientError(ValueError):
    """The constraint matrix does not have full row rank."""


def _dense(a):
    return a.toarray() if sp.issparse(a) else np.asarray(a, dtype=float)


@dataclass(frozen=True)
class ConstraintSystem:
    """Linear equality constraints Ax = b with A of shape (m, n), m < n.

    ``A`` may be dense or scipy.sparse; sparse matrices are densified at
    factorization time. Full row rank is checked by :func:`factor`, not here.
    """

    A: object
    b: np.ndarray

    def __post_init__(self):
        m, n = self.A.shape
        b = np.asarray(self.b, dtype=float).ravel()
        if m < 1 or n < 2 or m >= n:
            raise DimensionMismatchError(
                f"constraint matrix must satisfy 1 <= m < n, n >= 2, got m={m} n={n}"
            )
        if b.shape[0] != m:
            raise DimensionMismatchError(
                f"right-hand side has length {b.shape[0]}, expected {m}"
            )
        object.__setattr__(self, "b", b)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True)
class Projector:
    """Immutable QR factors of A^T plus the projected right-hand side.

    ``q1`` (n, m) spans the row space of A, ``r1`` (m, m) is upper
    triangular with A^T = q1 @ r1, and ``b_r`` solves r1^T b_r = b.  The
    null-space basis ``q2`` (n, n-m) is materialized only when the
    projected-gradient formula needs it (m > n/2) or when explicitly
    requested for testing.  Safe for concurrent read-only use.
    """

    n: int
    m: int
    q1: np.ndarray
    r1: np.ndarray
    b_r: np.ndarray
    q2: Optional[np.ndarray] = None

    def _check_vec(self, v, name="vector") -> np.ndarray:
        v = np.asarray(v, dtype=float).ravel()
        if v.shape[0] != self.n:
            raise DimensionMismatchError(
                f"{name} has length {v.shape[0]}, expected {self.n}"
            )
        return v


def factor(cs: ConstraintSystem, rank_tol: Optional[float] = None,
           build_q2: Optional[bool] = None) -> Projector:
    """Factor A^T = Q R by Householder reflections and build a Projector.

    Parameters
    ----------
    cs : ConstraintSystem
        Constraints to factor. A sparse ``cs.A`` is densified here.
    rank_tol : float, optional
        Relative rank gate: factorization fails if any diagonal entry of
        R1 satisfies ``|r_ii| <= rank_tol * max_j |r_jj|``. Defaults to
        ``1e-12 * n``.
    build_q2 : bool, optional
        Force (or suppress) materializing the null-space basis. By default
        it is materialized exactly when m > n/2, where the projected
        gradient switches to the q2 formula.

    Raises
    ------
    RankDeficientError
        If the rank gate trips, i.e. A lacks (numerical) full row rank.
    """
    at = _dense(cs.A).T.copy()
    n, m = at.shape
    if build_q2 is None:
        build_q2 = m > n // 2
    if build_q2:
        q, r = np.linalg.qr(at, mode="complete")
        q1, q2, r1 = q[:, :m], q[:, m:], r[:m, :]
    else:
        q1, r1 = np.linalg.qr(at, mode="reduced")
        q2 = None

    diag = np.abs(np.diag(r1))
    if rank_tol is None:
        rank_tol = 1e-12 * n
    if np.any(diag <= rank_tol * diag.max(initial=0.0)):
        raise RankDeficientError(
            f"constraint matrix is rank deficient: min |R1 diag| = {diag.min():.3e}"
        )
    b_r = solve_triangular(r1, cs.b, trans="T", lower=False)
    return Projector(n=n, m=m, q1=q1, r1=r1, b_r=b_r, q2=q2)


def project_gradient(p: Projector, g) -> np.ndarray:
    """Project g onto the null space of A (the component with A @ Pg = 0)."""
    g = p._check_vec(g, "gradient")
    if p.q2 is not None and p.m > p.n // 2:
        return p.q2 @ (p.q2.T @ g)
    return g - p.q1 @ (p.q1.T @ g)


def make_feasible(p: Projector, x0) -> np.ndarray:
    """Return the feasible point closest to x0 in the Euclidean norm."""
    x0 = p._check_vec(x0, "initial point")
    return x0 - p.q1 @ (p.q1.T @ x0 - p.b_r)


def multipliers(p: Projector, g) -> np.ndarray:
    """Lagrange multipliers lam = -(A A^T)^{-1} A g via a triangular solve.

    Satisfies g + A^T lam = Pg, which makes the stationarity residual
    ``||g + A^T lam||`` identical to ``||Pg||``.
    """
    g = p._check_vec(g, "gradient")
    return solve_triangular(p.r1, -(p.q1.T @ g), lower=False)


def residuals(p: Projector, cs: ConstraintSystem, x, g) -> Tuple[float, float]:
    """Return (kkt_inf, feas_inf): ||g + A^T lam||_inf and ||Ax - b||_inf."""
    x = p._check_vec(x, "point")
    g = p._check_vec(g, "gradient")
    lam = multipliers(p, g)
    kkt = g + cs.A.T @ lam
    feas = cs.A @ x - cs.b
    return float(np.max(np.abs(kkt))), float(np.max(np.abs(feas)))
