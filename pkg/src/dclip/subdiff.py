"""Exact epsilon-subdifferentials of max-affine functions.

For ``f = max_i <a_i, .> + b_i`` and ``eps >= 0``,

    s in d_eps f(x)  iff  s = sum_i lam_i a_i  with lam in the unit simplex
                          and  sum_i lam_i (f(x) - <a_i, x> - b_i) <= eps.

(The conjugate of ``f`` is the convex-hull interpolation of ``-b_i`` at
the ``a_i``; plug it into ``f(x) + f*(s) - <s, x> <= eps``.)  The set is
kept in this implicit form.  Queries are LPs over the multiplier ``lam``,
and vertex enumeration walks the vertices of the cut simplex.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._model import Image, Model
from .errors import CapacityError, InputError, NumericalError
from .funcrep import ACTIVE_TOL, MaxAffine, as_point

__all__ = [
    "SubdiffPolytope",
    "eps_subdiff",
    "exact_subdiff",
    "support",
    "vertices",
    "contains",
    "MAX_VERTEX_PIECES",
    "DEDUP_TOL",
]

MAX_VERTEX_PIECES = 64
DEDUP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SubdiffPolytope:
    """The set ``d_eps f(x)`` as the image of the cut multiplier simplex.

    ``gaps[i] = f(x) - <a_i, x> - b_i >= 0``; gaps within the active-set
    tolerance of zero are stored as exactly zero so that ``eps = 0`` yields
    the convex hull of the active gradients.
    """

    source: MaxAffine
    point: np.ndarray
    epsilon: float
    gaps: np.ndarray

    @property
    def dim(self) -> int:
        return self.source.dim

    @property
    def gradients(self) -> np.ndarray:
        return self.source.gradients

    def lp_image(self, model: Model) -> Image:
        """Add multiplier variables to ``model``; return the image ``A^T lam``."""
        m = self.source.n_pieces
        lam = model.variables(m)
        model.eq([(lam, np.ones((1, m)))], 1.0)
        model.ub([(lam, self.gaps.reshape(1, m))], self.epsilon)
        return lam, self.gradients.T, np.zeros(self.dim)

    @cached_property
    def generators(self) -> np.ndarray:
        """Images of the multiplier-polytope vertices (deduplicated, not pruned).

        Those vertices are the simplex corners ``e_i`` with ``gap_i <= eps``
        and the points where the cut ``gap . lam = eps`` crosses an edge
        ``[e_i, e_j]`` with ``gap_i < eps < gap_j``.
        """
        a, gaps, eps = self.gradients, self.gaps, self.epsilon
        inside = np.flatnonzero(gaps <= eps)
        outside = np.flatnonzero(gaps > eps)
        pts = [a[inside]]
        if outside.size:
            gi = gaps[inside][:, None]
            gj = gaps[outside][None, :]
            cross = gi < eps
            t = (eps - gi) / (gj - gi)
            ii, jj = np.nonzero(np.broadcast_to(cross, t.shape))
            tt = t[ii, jj][:, None]
            pts.append((1.0 - tt) * a[inside[ii]] + tt * a[outside[jj]])
        return _dedup(np.vstack(pts))


def _dedup(pts: np.ndarray, tol: float = DEDUP_TOL) -> np.ndarray:
    """Drop every point within ``tol`` (max-abs) of an earlier point."""
    if pts.shape[0] > 1:
        close = np.abs(pts[:, None, :] - pts[None, :, :]).max(axis=2) <= tol
        pts = pts[~np.tril(close, -1).any(axis=1)]
    out = np.array(pts)
    out.setflags(write=False)
    return out


def eps_subdiff(f: MaxAffine, x, eps: float) -> SubdiffPolytope:
    """The epsilon-subdifferential of ``f`` at ``x``.

    Parameters
    ----------
    f : MaxAffine
    x : array_like
        Base point, length ``f.dim``.
    eps : float
        Slack, ``>= 0``.  ``eps = 0`` gives the Fenchel subdifferential.
    """
    eps = float(eps)
    if not eps >= 0 or not np.isfinite(eps):
        raise InputError(f"epsilon must be a finite nonnegative number, got {eps!r}")
    x = as_point(x, f.dim)
    vals = f.values(x)
    top = float(np.max(vals))
    gaps = top - vals
    gaps[gaps <= ACTIVE_TOL * max(1.0, abs(top))] = 0.0
    x.setflags(write=False)
    gaps.setflags(write=False)
    return SubdiffPolytope(f, x, eps, gaps)


def exact_subdiff(f: MaxAffine, x) -> SubdiffPolytope:
    """Fenchel subdifferential: convex hull of the active gradients."""
    return eps_subdiff(f, x, 0.0)


def support(S: SubdiffPolytope, d) -> float:
    """Support function ``max{<s, d> : s in S}``."""
    d = as_point(d, S.dim)
    if not np.any(d):
        return 0.0
    model = Model()
    lam, mat, _ = S.lp_image(model)
    sol = model.minimize([(lam, -(mat.T @ d))])
    if not sol.optimal:
        raise NumericalError(f"support LP ended with status {sol.status.value}")
    return -sol.objective_value


def _in_hull(p: np.ndarray, others: np.ndarray, tol: float) -> bool:
    model = Model()
    mu = model.variables(others.shape[0])
    model.eq([(mu, np.ones((1, others.shape[0])))], 1.0)
    model.image_eq([(1.0, (mu, others.T, np.zeros(p.shape[0])))], p, tol=tol)
    return model.minimize().optimal


def extreme_points(pts: np.ndarray, tol: float = DEDUP_TOL) -> np.ndarray:
    """Drop every point that is a convex combination of the remaining ones."""
    pts = np.asarray(pts, dtype=float)
    if pts.shape[0] <= 2:
        return pts
    if pts.shape[1] == 1:
        lo, hi = int(np.argmin(pts[:, 0])), int(np.argmax(pts[:, 0]))
        return pts[sorted({lo, hi})]
    keep = list(range(pts.shape[0]))
    for k in range(pts.shape[0]):
        rest = [j for j in keep if j != k]
        if len(rest) >= 1 and _in_hull(pts[k], pts[rest], tol):
            keep = rest
    return pts[keep]


def vertices(S: SubdiffPolytope) -> np.ndarray:
    """Vertices of ``S`` as a ``(k, dim)`` array, no point a hull member of the others."""
    if S.source.n_pieces > MAX_VERTEX_PIECES:
        raise CapacityError(
            f"vertex enumeration supports at most {MAX_VERTEX_PIECES} pieces, "
            f"got {S.source.n_pieces}"
        )
    return extreme_points(S.generators)


def contains(S: SubdiffPolytope, s, tol: float = 1e-9) -> bool:
    """Whether ``s`` lies in ``S`` (coordinates matched within ``tol``)."""
    s = as_point(s, S.dim)
    model = Model()
    img = S.lp_image(model)
    model.image_eq([(1.0, img)], s, tol=tol)
    return model.minimize().optimal
