"""Ground truth for validating the certifier, independent of the subdifferential machinery.

* :func:`lipschitz_exact` - the Lipschitz constant of a piecewise-affine
  ``f - g`` is the largest dual-norm gradient gap ``||a_i - c_j||_*`` over
  coincidence cells ``{piece i maximal in f} ∩ {piece j maximal in g}``
  that have nonempty interior.  Each cell is probed with one
  Chebyshev-centre LP.
* :func:`lipschitz_sampled` - brute-force difference quotients.
* :func:`definitional_membership` - the subgradient inequality checked on
  sample points (a falsifier only).

Random numbers come from :class:`Lcg64`, a fixed 64-bit LCG, so seeded
instances are reproducible across implementations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._model import Model
from .errors import InputError, NumericalError
from .funcrep import MaxAffine, PointSet, as_point
from .geometry import DEFAULT_NORM, _check_norm, dual_norm

__all__ = [
    "Lcg64",
    "CellWitness",
    "CELL_MARGIN",
    "cell_witnesses",
    "lipschitz_exact",
    "lipschitz_sampled",
    "definitional_membership",
    "random_instance",
]

CELL_MARGIN = 1e-7
_MARGIN_CAP = 1.0


class Lcg64:
    """Knuth's MMIX linear congruential generator.

    ``state <- 6364136223846793005 * state + 1442695040888963407 (mod 2**64)``;
    each draw advances once and returns ``(state >> 11) / 2**53`` in ``[0, 1)``.
    The initial state is ``seed mod 2**64``.
    """

    A = 6364136223846793005
    C = 1442695040888963407
    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = int(seed) & self.MASK

    def random(self) -> float:
        self.state = (self.A * self.state + self.C) & self.MASK
        return (self.state >> 11) * (1.0 / (1 << 53))

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def uniform_array(self, lo, hi, count: int) -> np.ndarray:
        """``count`` rows of componentwise-uniform draws in the box ``[lo, hi]``."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        u = np.fromiter((self.random() for _ in range(count * lo.size)), float, count * lo.size)
        return lo + (hi - lo) * u.reshape(count, lo.size)


@dataclass(frozen=True, eq=False)
class CellWitness:
    """A full-dimensional coincidence cell of ``f - g``.

    ``piece_pair`` is zero-based ``(i, j)``; ``margin`` is the radius of a
    Euclidean ball around ``interior_point`` on which piece ``i`` of ``f``
    and piece ``j`` of ``g`` are strictly maximal.
    """

    piece_pair: tuple[int, int]
    gradient_gap: float
    interior_point: np.ndarray
    margin: float


def _distinct(f: MaxAffine) -> list[int]:
    keep: list[int] = []
    for i in range(f.n_pieces):
        if not any(
            np.array_equal(f.gradients[i], f.gradients[k]) and f.intercepts[i] == f.intercepts[k]
            for k in keep
        ):
            keep.append(i)
    return keep


def _dominance_rows(f: MaxAffine, i: int, pieces: list[int]):
    """Rows ``<a_k - a_i, x> + t * ||a_i - a_k||_2 <= b_i - b_k`` for ``k != i``."""
    rows, rhs = [], []
    for k in pieces:
        if k == i:
            continue
        diff = f.gradients[k] - f.gradients[i]
        rows.append(np.concatenate([diff, [np.linalg.norm(diff)]]))
        rhs.append(f.intercepts[i] - f.intercepts[k])
    return rows, rhs


def _cell_centre(f: MaxAffine, g: MaxAffine, i: int, j: int, pf, pg):
    n = f.dim
    rows_f, rhs_f = _dominance_rows(f, i, pf)
    rows_g, rhs_g = _dominance_rows(g, j, pg)
    rows, rhs = rows_f + rows_g, rhs_f + rhs_g
    model = Model()
    xt = model.variables(n + 1, None, None)
    model.ub([(xt[n:], np.ones((1, 1)))], _MARGIN_CAP)
    if rows:
        model.ub([(xt, np.array(rows))], np.array(rhs))
    cost = np.zeros(n + 1)
    cost[n] = -1.0
    sol = model.minimize([(xt, cost)])
    if sol.status.value == "Infeasible":
        return None, -np.inf
    if not sol.optimal:
        raise NumericalError(f"cell LP ended with status {sol.status.value}")
    return sol.z[xt[:n]], float(sol.z[xt[n]])


def cell_witnesses(f: MaxAffine, g: MaxAffine, norm: str = DEFAULT_NORM) -> list[CellWitness]:
    """Every full-dimensional coincidence cell, in ``(i, j)`` order."""
    if f.dim != g.dim:
        raise InputError(f"dimension mismatch: {f.dim} vs {g.dim}")
    _check_norm(norm)
    pf, pg = _distinct(f), _distinct(g)
    out = []
    for i in pf:
        for j in pg:
            x, margin = _cell_centre(f, g, i, j, pf, pg)
            if margin > CELL_MARGIN:
                gap = dual_norm(f.gradients[i] - g.gradients[j], norm)
                x.setflags(write=False)
                out.append(CellWitness((i, j), gap, x, margin))
    return out


def lipschitz_exact(f: MaxAffine, g: MaxAffine, norm: str = DEFAULT_NORM) -> tuple[float, CellWitness]:
    """Exact Lipschitz constant of ``f - g`` on R^n and the cell attaining it.

    Ties go to the lowest ``(i, j)``.
    """
    cells = cell_witnesses(f, g, norm)
    if not cells:
        raise NumericalError("no full-dimensional cell found")
    best = cells[0]
    for cell in cells[1:]:
        if cell.gradient_gap > best.gradient_gap:
            best = cell
    return best.gradient_gap, best


def _exact_quotient(f: MaxAffine, g: MaxAffine, x, y, norm: str) -> Fraction:
    def value(h, p):
        return max(
            sum((Fraction(float(a)) * Fraction(float(v)) for a, v in zip(row, p)), Fraction(0))
            + Fraction(float(b))
            for row, b in zip(h.gradients, h.intercepts)
        )

    diff = [Fraction(float(u)) - Fraction(float(v)) for u, v in zip(x, y)]
    den = sum(abs(d) for d in diff) if norm == "l1" else max(abs(d) for d in diff)
    num = (value(f, x) - value(g, x)) - (value(f, y) - value(g, y))
    return abs(num) / den


def lipschitz_sampled(
    f: MaxAffine,
    g: MaxAffine,
    box: tuple,
    n_pairs: int,
    seed: int,
    norm: str = DEFAULT_NORM,
) -> float:
    """Largest difference quotient of ``f - g`` over seeded random pairs in ``box``.

    Draws ``x`` then ``y`` (each coordinate in order) from :class:`Lcg64`.
    The few near-maximal quotients are re-evaluated in exact rational
    arithmetic so the result never overshoots the true constant.
    """
    if f.dim != g.dim:
        raise InputError(f"dimension mismatch: {f.dim} vs {g.dim}")
    _check_norm(norm)
    n = f.dim
    lo = np.broadcast_to(np.asarray(box[0], dtype=float), (n,))
    hi = np.broadcast_to(np.asarray(box[1], dtype=float), (n,))
    if not np.all(lo < hi):
        raise InputError("box needs lo < hi in every coordinate")
    if n_pairs < 1:
        raise InputError("n_pairs must be >= 1")
    rng = Lcg64(seed)
    draws = rng.uniform_array(np.tile(lo, 2), np.tile(hi, 2), n_pairs)
    xs, ys = draws[:, :n], draws[:, n:]
    d = xs - ys
    den = np.abs(d).sum(axis=1) if norm == "l1" else np.abs(d).max(axis=1)
    ok = den > 0
    if not ok.any():
        return 0.0
    xs, ys, den = xs[ok], ys[ok], den[ok]

    def dc(p):
        return (p @ f.gradients.T + f.intercepts).max(axis=1) - (p @ g.gradients.T + g.intercepts).max(axis=1)

    q = np.abs(dc(xs) - dc(ys)) / den
    top = float(q.max())
    cand = np.flatnonzero(q >= top - 1e-6 * max(1.0, top))
    cand = cand[np.argsort(-q[cand], kind="stable")][:256]
    best = max(_exact_quotient(f, g, xs[k], ys[k], norm) for k in cand)
    return float(best)


def definitional_membership(f: MaxAffine, x, s, eps: float, y_samples, tol: float = 1e-9) -> bool:
    """Check ``f(y) - f(x) >= <y - x, s> - eps`` at every sample ``y``.

    False certifies ``s`` is not an eps-subgradient; True is only evidence.
    """
    if eps < 0:
        raise InputError("epsilon must be nonnegative")
    x = as_point(x, f.dim)
    s = as_point(s, f.dim)
    ys = y_samples.points if isinstance(y_samples, PointSet) else np.asarray(y_samples, dtype=float)
    ys = ys.reshape(-1, f.dim)
    fy = (ys @ f.gradients.T + f.intercepts).max(axis=1)
    lhs = fy - f(x)
    rhs = (ys - x) @ s - eps
    return bool(np.all(lhs >= rhs - tol))


def random_instance(
    dim: int, n_pieces_f: int, n_pieces_g: int, coeff_range: float, seed: int
) -> tuple[MaxAffine, MaxAffine]:
    """Seeded random pair ``(f, g)``.

    Coefficients are drawn from :class:`Lcg64` uniformly in
    ``[-coeff_range, coeff_range]``, piece by piece (gradient entries then
    intercept), all of ``f`` before ``g``.
    """
    if not (isinstance(dim, (int, np.integer)) and 1 <= dim <= 3):
        raise InputError(f"dim must be in [1, 3], got {dim!r}")
    for name, k in (("n_pieces_f", n_pieces_f), ("n_pieces_g", n_pieces_g)):
        if not (isinstance(k, (int, np.integer)) and 1 <= k <= 16):
            raise InputError(f"{name} must be in [1, 16], got {k!r}")
    if not (coeff_range > 0 and np.isfinite(coeff_range)):
        raise InputError("coeff_range must be positive and finite")
    rng = Lcg64(seed)

    def draw(m):
        coeffs = np.array([[rng.uniform(-coeff_range, coeff_range) for _ in range(dim + 1)] for _ in range(m)])
        return MaxAffine(coeffs[:, :dim], coeffs[:, dim])

    f = draw(n_pieces_f)
    return f, draw(n_pieces_g)
