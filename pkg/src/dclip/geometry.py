"""Set-level queries on subdifferential polytopes and dual-norm balls.

Norm arguments always name the PRIMAL norm on R^n.  Distances between
slope sets are measured in the dual norm: primal ``l1`` pairs with the dual
``linf`` norm (ball = box), primal ``linf`` with the dual ``l1`` norm
(ball = cross-polytope).  Minkowski sums are never formed explicitly; they
only appear as coupled variable blocks inside a feasibility LP.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from ._model import Image, Model, image_value
from .errors import InputError, NumericalError
from .funcrep import MaxAffine, as_point, validate_modulus
from .subdiff import MAX_VERTEX_PIECES, SubdiffPolytope, eps_subdiff, support, vertices

__all__ = [
    "NORMS",
    "DEFAULT_NORM",
    "DualBall",
    "PolyhedralModulus",
    "ModulusSet",
    "Intersection",
    "Inclusion",
    "primal_norm",
    "dual_norm",
    "distance",
    "point_distance",
    "intersects",
    "included_in_sum",
    "hausdorff",
    "modulus_set_support",
    "modulus_at",
]

NORMS = ("l1", "linf")
DEFAULT_NORM = "l1"


def _check_norm(norm: str) -> str:
    if norm not in NORMS:
        raise InputError(f"norm must be one of {NORMS}, got {norm!r}")
    return norm


def primal_norm(v, norm: str = DEFAULT_NORM) -> float:
    v = np.abs(np.asarray(v, dtype=float))
    return float(v.sum() if _check_norm(norm) == "l1" else v.max(initial=0.0))


def dual_norm(v, norm: str = DEFAULT_NORM) -> float:
    """Dual of the primal ``norm``: l1 -> max-abs, linf -> sum-abs."""
    v = np.abs(np.asarray(v, dtype=float))
    return float(v.max(initial=0.0) if _check_norm(norm) == "l1" else v.sum())


@dataclass(frozen=True)
class DualBall:
    """Closed dual-norm ball of radius ``K`` about the origin.

    This is the epsilon-subdifferential of ``K * ||.||`` at the origin, for
    every ``eps >= 0``.
    """

    K: float
    norm: str = DEFAULT_NORM

    def __post_init__(self):
        K = float(self.K)
        if not (K >= 0 and np.isfinite(K)):
            raise InputError(f"ball radius must be finite and >= 0, got {self.K!r}")
        object.__setattr__(self, "K", K)
        _check_norm(self.norm)

    def lp_image(self, model: Model, dim: int) -> Image:
        if self.norm == "l1":
            u = model.variables(dim, -self.K, self.K)
            return u, np.eye(dim), np.zeros(dim)
        pq = model.variables(2 * dim)
        model.ub([(pq, np.ones((1, 2 * dim)))], self.K)
        eye = np.eye(dim)
        return pq, np.hstack([eye, -eye]), np.zeros(dim)

    def support(self, d) -> float:
        return self.K * primal_norm(d, self.norm)


@dataclass(frozen=True, eq=False)
class PolyhedralModulus:
    """The set ``d_eps h(0)`` for a max-affine modulus ``h`` with ``h(0) = 0``."""

    h: MaxAffine
    epsilon: float

    def __post_init__(self):
        validate_modulus(self.h)

    @property
    def polytope(self) -> SubdiffPolytope:
        return eps_subdiff(self.h, np.zeros(self.h.dim), self.epsilon)

    def lp_image(self, model: Model, dim: int) -> Image:
        if dim != self.h.dim:
            raise InputError(f"modulus has dim {self.h.dim}, expected {dim}")
        return self.polytope.lp_image(model)

    def support(self, d) -> float:
        return support(self.polytope, d)


ModulusSet = Union[DualBall, PolyhedralModulus]


def modulus_at(spec: Union[DualBall, MaxAffine], eps: float) -> ModulusSet:
    """Instantiate the modulus set at slack ``eps``: a ball is eps-independent."""
    if isinstance(spec, DualBall):
        return spec
    if isinstance(spec, MaxAffine):
        return PolyhedralModulus(spec, eps)
    if isinstance(spec, PolyhedralModulus):
        return PolyhedralModulus(spec.h, eps)
    raise InputError(f"unsupported modulus {spec!r}")


def modulus_set_support(M: ModulusSet, d) -> float:
    return M.support(d)


@dataclass(frozen=True, eq=False)
class Intersection:
    """Outcome of ``A ∩ (B + M) != {}``; ``point = b_part + m_part`` when found."""

    found: bool
    point: Optional[np.ndarray] = None
    b_part: Optional[np.ndarray] = None
    m_part: Optional[np.ndarray] = None

    def __bool__(self):
        return self.found


@dataclass(frozen=True, eq=False)
class Inclusion:
    included: bool
    counterexample: Optional[np.ndarray] = None

    def __bool__(self):
        return self.included


def _same_dim(A: SubdiffPolytope, B: SubdiffPolytope) -> int:
    if A.dim != B.dim:
        raise InputError(f"dimension mismatch: {A.dim} vs {B.dim}")
    return A.dim


class _Fixed:
    """A single point used where a polytope is expected."""

    def __init__(self, v):
        self.v = np.asarray(v, dtype=float)

    def lp_image(self, model: Model) -> Image:
        return np.zeros(0, dtype=int), np.zeros((self.v.shape[0], 0)), self.v


def _min_dual_gap(img_a_of, img_b_of, dim: int, norm: str) -> tuple[float, Model, np.ndarray]:
    """Minimise ``||a - b||_*`` over the two images; return (value, images, z)."""
    model = Model()
    ia = img_a_of(model)
    ib = img_b_of(model)
    if norm == "l1":
        # dual linf: |a - b|_k <= t for each coordinate
        t = model.variables(1)
        ones = np.ones((dim, 1))
        blocks = []
        const = ib[2] - ia[2]
        for sign, (idx, mat, _) in ((1.0, ia), (-1.0, ib)):
            if idx.size:
                blocks.append((idx, sign * mat))
        model.ub(blocks + [(t, -ones)], const)
        model.ub([(i, -m) for i, m in blocks] + [(t, -ones)], -const)
        sol = model.minimize([(t, np.ones(1))])
    else:
        pq = model.variables(2 * dim)
        eye = np.eye(dim)
        gap = (pq, -np.hstack([eye, -eye]), np.zeros(dim))
        model.image_eq([(1.0, ia), (-1.0, ib), (1.0, gap)], np.zeros(dim))
        sol = model.minimize([(pq, np.ones(2 * dim))])
    if not sol.optimal:
        raise NumericalError(f"distance LP ended with status {sol.status.value}")
    return max(sol.objective_value, 0.0), (ia, ib), sol.z


def _order(A: SubdiffPolytope, B: SubdiffPolytope):
    # canonical argument order makes distance() symmetric bit for bit
    key_a = (A.gradients.tobytes(), A.gaps.tobytes(), A.epsilon)
    key_b = (B.gradients.tobytes(), B.gaps.tobytes(), B.epsilon)
    return (A, B) if key_a <= key_b else (B, A)


def distance(A: SubdiffPolytope, B: SubdiffPolytope, norm: str = DEFAULT_NORM) -> float:
    """``inf ||a - b||_*`` over ``a in A, b in B``, solved as one LP."""
    dim = _same_dim(A, B)
    _check_norm(norm)
    A, B = _order(A, B)
    value, _, _ = _min_dual_gap(A.lp_image, B.lp_image, dim, norm)
    return value


def point_distance(v, B: SubdiffPolytope, norm: str = DEFAULT_NORM) -> float:
    """Dual-norm distance from the slope ``v`` to ``B``."""
    v = as_point(v, B.dim)
    value, _, _ = _min_dual_gap(_Fixed(v).lp_image, B.lp_image, B.dim, _check_norm(norm))
    return value


def _pairwise_dual(P: np.ndarray, Q: np.ndarray, norm: str) -> np.ndarray:
    diff = np.abs(P[:, None, :] - Q[None, :, :])
    return diff.max(axis=2) if norm == "l1" else diff.sum(axis=2)


def _membership(v: np.ndarray, B: SubdiffPolytope, M: ModulusSet) -> bool:
    if isinstance(M, DualBall):
        # a generator of B within K of v is an explicit decomposition
        if _pairwise_dual(v[None, :], B.generators, M.norm).min() <= M.K:
            return True
    model = Model()
    ib = B.lp_image(model)
    im = M.lp_image(model, B.dim)
    model.image_eq([(1.0, ib), (1.0, im)], v)
    return model.minimize().optimal


def intersects(A: SubdiffPolytope, B: SubdiffPolytope, M: ModulusSet) -> Intersection:
    """Decide ``A ∩ (B + M) != {}``; on success return a common point."""
    dim = _same_dim(A, B)
    if isinstance(M, DualBall):
        gaps = _pairwise_dual(A.generators, B.generators, M.norm)
        k = int(np.argmin(gaps))
        if gaps.flat[k] <= M.K:
            i, j = divmod(k, gaps.shape[1])
            a, b = A.generators[i].copy(), B.generators[j].copy()
            return Intersection(True, a, b, a - b)
    model = Model()
    ia = A.lp_image(model)
    ib = B.lp_image(model)
    im = M.lp_image(model, dim)
    model.image_eq([(1.0, ia), (-1.0, ib), (-1.0, im)], np.zeros(dim))
    sol = model.minimize()
    if not sol.optimal:
        return Intersection(False)
    b = image_value(ib, sol.z)
    w = image_value(im, sol.z)
    return Intersection(True, b + w, b, w)


def included_in_sum(A: SubdiffPolytope, B: SubdiffPolytope, M: ModulusSet) -> Inclusion:
    """Decide ``A ⊂ B + M``; on failure return a vertex of ``A`` outside the sum.

    The generators of ``A`` (vertex images of its multiplier polytope) are
    tested first; they include every vertex and lie in ``A``, so vertices
    are only isolated once some generator falls outside.
    """
    _same_dim(A, B)
    if A.source.n_pieces > MAX_VERTEX_PIECES:
        vertices(A)  # raises the capacity error
    outside = [v for v in A.generators if not _membership(v, B, M)]
    if not outside:
        return Inclusion(True)
    for v in vertices(A):
        if not _membership(v, B, M):
            return Inclusion(False, v.copy())
    return Inclusion(False, outside[0].copy())


def _one_sided(A: SubdiffPolytope, B: SubdiffPolytope, norm: str) -> float:
    """``max_{v in A} dist(v, B)`` over the generators of ``A``.

    A generator whose distance to B's generators (an upper bound) cannot
    beat the running maximum is skipped.
    """
    upper = _pairwise_dual(A.generators, B.generators, norm).min(axis=1)
    best = 0.0
    for k in np.argsort(-upper, kind="stable"):
        if upper[k] <= best:
            break
        best = max(best, point_distance(A.generators[k], B, norm))
    return best


def hausdorff(A: SubdiffPolytope, B: SubdiffPolytope, norm: str = DEFAULT_NORM) -> float:
    """Hausdorff distance in the dual norm.

    ``v -> dist(v, B)`` is convex, so its maximum over ``A`` sits at a vertex
    of ``A``, and every vertex is a generator.
    """
    _same_dim(A, B)
    _check_norm(norm)
    A, B = _order(A, B)
    return max(_one_sided(A, B, norm), _one_sided(B, A, norm))
