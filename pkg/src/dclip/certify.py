"""Lipschitz certification of DC functions ``f - g`` through epsilon-subdifferentials.

For max-affine ``f, g`` and ``K >= 0`` the following are equivalent, and
each fails at a single ``(x, eps)`` as soon as ``f - g`` is not
``K``-Lipschitz:

* II  ``d_eps f(x) ⊂ d_eps g(x) + B*(0, K)``
* IV  ``d_eps f(x) ∩ (d_eps g(x) + B*(0, K)) != {}``
* VI  ``dist(d_eps f(x), d_eps g(x)) <= K``

so a single false verdict refutes the constant everywhere, while a clean
sweep certifies it only on the tested grid (``scope == "grid"``).  With
``exact=True`` the sweep is backed by :func:`dclip.oracle.lipschitz_exact`
and the verdict becomes global.  II and IV also accept a general modulus
``h`` (``h(0) = 0``) in place of the ball, read as ``d_eps h(0)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import InputError, UnsupportedConditionError
from .funcrep import MaxAffine, PointSet, as_point
from .geometry import (
    DEFAULT_NORM,
    DualBall,
    ModulusSet,
    distance,
    included_in_sum,
    intersects,
    modulus_at,
)
from .subdiff import SubdiffPolytope, eps_subdiff, exact_subdiff

__all__ = [
    "Condition",
    "Outcome",
    "CheckResult",
    "CertReport",
    "ChainCertificate",
    "ConstancyResult",
    "SubdiffComparison",
    "VERDICT_TOL",
    "check_condition",
    "certify_lipschitz",
    "min_lipschitz",
    "chain_certificate",
    "check_constancy",
    "check_exact_subdiff",
    "check_global_min",
]

VERDICT_TOL = 1e-8
CHAIN_TOL = 1e-7

ModulusSpec = Union[float, DualBall, MaxAffine]


class Condition(str, enum.Enum):
    II = "II"
    IV = "IV"
    VI = "VI"


class Outcome(str, enum.Enum):
    CERTIFIED = "Certified"
    REFUTED = "Refuted"
    INCONCLUSIVE = "Inconclusive"


def _floats(v) -> Optional[list]:
    return None if v is None else [float(t) for t in v]


@dataclass(frozen=True, eq=False)
class CheckResult:
    condition: Condition
    point: np.ndarray
    epsilon: float
    verdict: bool
    witness: Optional[np.ndarray] = None
    value: Optional[float] = None

    def to_doc(self) -> dict:
        return {
            "condition": self.condition.value,
            "x": _floats(self.point),
            "epsilon": float(self.epsilon),
            "verdict": bool(self.verdict),
            "witness": _floats(self.witness),
            "value": None if self.value is None else float(self.value),
        }


@dataclass(frozen=True, eq=False)
class CertReport:
    f: MaxAffine
    g: MaxAffine
    modulus: Union[DualBall, MaxAffine]
    grid: PointSet
    eps_grid: tuple
    results: list
    overall: Outcome
    refutation: Optional[dict] = None
    scope: str = "grid"
    exact_constant: Optional[float] = None

    @property
    def certified(self) -> bool:
        return self.overall is Outcome.CERTIFIED

    def to_doc(self) -> dict:
        doc = {
            "overall": self.overall.value,
            "results": [r.to_doc() for r in self.results],
            "refutation": self.refutation,
            "scope": self.scope,
        }
        if self.exact_constant is not None:
            doc["exact_constant"] = float(self.exact_constant)
        return doc


def _as_modulus(spec: ModulusSpec, norm: str) -> Union[DualBall, MaxAffine]:
    if isinstance(spec, (DualBall, MaxAffine)):
        return spec
    return DualBall(float(spec), norm)


def _conditions(which) -> list[Condition]:
    if isinstance(which, (str, Condition)):
        which = [which]
    try:
        out = sorted({Condition(c) for c in which}, key=lambda c: list(Condition).index(c))
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if not out:
        raise InputError("no conditions requested")
    return out


def _evaluate(
    A: SubdiffPolytope, B: SubdiffPolytope, M: ModulusSet, which: Condition
) -> CheckResult:
    if which is Condition.II:
        inc = included_in_sum(A, B, M)
        return CheckResult(which, A.point, A.epsilon, inc.included, inc.counterexample)
    if which is Condition.IV:
        hit = intersects(A, B, M)
        return CheckResult(which, A.point, A.epsilon, hit.found, hit.point)
    if not isinstance(M, DualBall):
        raise UnsupportedConditionError("condition VI needs a dual-ball modulus")
    d = distance(A, B, M.norm)
    return CheckResult(which, A.point, A.epsilon, d <= M.K + VERDICT_TOL, None, d)


def check_condition(
    f: MaxAffine,
    g: MaxAffine,
    modulus: ModulusSpec,
    x,
    eps: float,
    which: Union[str, Condition],
    norm: str = DEFAULT_NORM,
) -> CheckResult:
    """Evaluate condition II, IV or VI at one ``(x, eps)``.

    ``modulus`` is a radius ``K`` (dual ball in ``norm``), a
    :class:`DualBall`, or a max-affine ``h`` with ``h(0) = 0``; the same
    ``eps`` is used for ``f``, ``g`` and ``h``.
    """
    _same_dim(f, g)
    which = Condition(which)
    spec = _as_modulus(modulus, norm)
    if which is Condition.VI and not isinstance(spec, DualBall):
        raise UnsupportedConditionError("condition VI needs a dual-ball modulus")
    x = as_point(x, f.dim)
    A = eps_subdiff(f, x, eps)
    B = eps_subdiff(g, x, eps)
    return _evaluate(A, B, modulus_at(spec, eps), which)


def _same_dim(f: MaxAffine, g: MaxAffine) -> None:
    if f.dim != g.dim:
        raise InputError(f"dimension mismatch: f has dim {f.dim}, g has dim {g.dim}")


def _refutation(r: CheckResult, source: str = "condition") -> dict:
    return {
        "x": _floats(r.point),
        "epsilon": float(r.epsilon),
        "condition": r.condition.value,
        "detail": {"witness": _floats(r.witness), "value": r.value},
        "source": source,
    }


def _sweep(f, g, spec, points, eps_grid, conds, stop_on_refute) -> tuple[list, Optional[CheckResult]]:
    results: list[CheckResult] = []
    first_false = None
    for x in points:
        for eps in eps_grid:
            A = eps_subdiff(f, x, eps)
            B = eps_subdiff(g, x, eps)
            M = modulus_at(spec, eps)
            for c in conds:
                r = _evaluate(A, B, M, c)
                results.append(r)
                if not r.verdict and first_false is None:
                    first_false = r
                    if stop_on_refute:
                        return results, first_false
    return results, first_false


def certify_lipschitz(
    f: MaxAffine,
    g: MaxAffine,
    modulus: ModulusSpec,
    grid: PointSet,
    eps_grid: Iterable[float],
    conditions: Sequence = ("II", "IV", "VI"),
    norm: str = DEFAULT_NORM,
    exact: bool = False,
    stop_on_refute: bool = False,
) -> CertReport:
    """Run the requested conditions at every grid point and slack.

    Results are ordered by grid index, then ascending ``eps``, then
    condition.  The report is Refuted iff some verdict is false; Certified
    otherwise (relative to the grid unless ``exact``), and Inconclusive
    when the grid is empty.
    """
    _same_dim(f, g)
    if grid.dim != f.dim:
        raise InputError(f"grid has dim {grid.dim}, functions have dim {f.dim}")
    eps_grid = tuple(sorted(float(e) for e in eps_grid))
    if not eps_grid:
        raise InputError("eps_grid must be nonempty")
    if eps_grid[0] < 0:
        raise InputError("epsilon values must be nonnegative")
    spec = _as_modulus(modulus, norm)
    conds = _conditions(conditions)
    if Condition.VI in conds and not isinstance(spec, DualBall):
        raise UnsupportedConditionError("condition VI needs a dual-ball modulus")
    if exact and not isinstance(spec, DualBall):
        raise UnsupportedConditionError("exact certification needs a dual-ball modulus")

    results, first_false = _sweep(f, g, spec, grid.points, eps_grid, conds, stop_on_refute)
    common = dict(f=f, g=g, modulus=spec, grid=grid, eps_grid=eps_grid)
    if not exact:
        if first_false is not None:
            return CertReport(results=results, overall=Outcome.REFUTED,
                              refutation=_refutation(first_false), **common)
        if not results:
            return CertReport(results=results, overall=Outcome.INCONCLUSIVE, **common)
        return CertReport(results=results, overall=Outcome.CERTIFIED, **common)

    from .oracle import lipschitz_exact

    k_star, cell = lipschitz_exact(f, g, spec.norm)
    if first_false is None and spec.K + VERDICT_TOL >= k_star:
        return CertReport(results=results, overall=Outcome.CERTIFIED, scope="global",
                          exact_constant=k_star, **common)
    if first_false is None:
        # the oracle's cell centre exposes the violation at the smallest slack
        extra, first_false = _sweep(
            f, g, spec, [cell.interior_point], eps_grid[:1], conds, stop_on_refute=False
        )
        results = results + extra
    if first_false is not None:
        refutation = _refutation(first_false)
    else:
        refutation = {
            "x": _floats(cell.interior_point),
            "epsilon": None,
            "condition": None,
            "detail": {"piece_pair": list(cell.piece_pair), "gradient_gap": k_star},
            "source": "oracle",
        }
    return CertReport(results=results, overall=Outcome.REFUTED, refutation=refutation,
                      scope="global", exact_constant=k_star, **common)


def min_lipschitz(
    f: MaxAffine, g: MaxAffine, grid: PointSet, eps_floor: float = 0.0, norm: str = DEFAULT_NORM
) -> float:
    """Least ``K`` passing condition VI at every grid point.

    ``dist(d_eps f(x), d_eps g(x))`` only shrinks as ``eps`` grows, so the
    worst case is ``eps -> 0``; ``eps_floor = 0`` evaluates it exactly.
    """
    _same_dim(f, g)
    if eps_floor < 0:
        raise InputError("eps_floor must be nonnegative")
    best = 0.0
    for x in grid.points:
        best = max(best, distance(eps_subdiff(f, x, eps_floor), eps_subdiff(g, x, eps_floor), norm))
    return best


@dataclass(frozen=True, eq=False)
class ChainCertificate:
    """Segment-partition lower bound for ``f(y) - f(x) + g(x) - g(y)``.

    ``triples[k]`` holds ``(u, v, w)`` with ``u = v + w`` at
    ``chain_points[k + 1]``, where ``u`` and ``v`` are ``eps'``-subgradients
    of ``f`` and ``g`` and ``w`` lies in the modulus set, ``eps' = gamma_m * eps / m``.
    """

    x: np.ndarray
    y: np.ndarray
    m: int
    epsilon: float
    gamma_m: float
    chain_points: np.ndarray
    u_star: np.ndarray
    v_star: np.ndarray
    triples: list
    bound_value: Optional[float]
    actual_value: float
    feasible: bool
    failure_index: Optional[int] = None

    @property
    def holds(self) -> bool:
        """Feasible and the telescoped inequality is satisfied."""
        return self.feasible and self.actual_value >= self.bound_value - CHAIN_TOL

    @property
    def gap(self) -> Optional[float]:
        return None if self.bound_value is None else self.actual_value - self.bound_value

    def to_doc(self) -> dict:
        return {
            "x": _floats(self.x),
            "y": _floats(self.y),
            "m": self.m,
            "epsilon": self.epsilon,
            "gamma_m": self.gamma_m,
            "feasible": self.feasible,
            "failure_index": self.failure_index,
            "bound_value": self.bound_value,
            "actual_value": self.actual_value,
            "holds": self.holds,
            "u_star": _floats(self.u_star),
            "v_star": _floats(self.v_star),
            "chain_points": [_floats(p) for p in self.chain_points],
            "triples": [{"u": _floats(u), "v": _floats(v), "w": _floats(w)} for u, v, w in self.triples],
        }


def _lowest_active_gradient(f: MaxAffine, x) -> np.ndarray:
    S = exact_subdiff(f, x)
    return f.gradients[int(np.flatnonzero(S.gaps == 0.0)[0])].copy()


def chain_certificate(
    f: MaxAffine,
    g: MaxAffine,
    modulus: ModulusSpec,
    x,
    y,
    m: int,
    eps: float,
    norm: str = DEFAULT_NORM,
) -> ChainCertificate:
    """Build the chain ``x_i = x + (i/m)(y - x)`` and its certificate.

    At each interior node ``x_i`` (``i = 1..m-1``) the sets
    ``d_e f(x_i)`` and ``d_e g(x_i) + d_e h(0)`` with ``e = gamma_m * eps / m``
    must meet; the meeting points ``u_i = v_i + w_i`` give

        f(y) - f(x) + g(x) - g(y) >= (1/m) <y - x, u* - v*> + (1/m) sum_i <y - x, w_i>
                                     - 2 (m - 1) gamma_m eps / m - 2 eps

    with ``u*`` in ``d f(x)`` and ``v*`` in ``d g(y)``.  ``gamma_m = 1/(2m)``.
    An empty meeting at some node is reported through ``failure_index``; it
    refutes the modulus as a bound on the variation of ``f - g``.
    """
    _same_dim(f, g)
    if not (isinstance(m, (int, np.integer)) and m >= 1):
        raise InputError(f"m must be a positive integer, got {m!r}")
    eps = float(eps)
    if not eps > 0:
        raise InputError(f"epsilon must be positive, got {eps!r}")
    spec = _as_modulus(modulus, norm)
    x = as_point(x, f.dim)
    y = as_point(y, f.dim)
    m = int(m)
    gamma = 1.0 / (2 * m)
    inner_eps = gamma * eps / m
    step = y - x
    nodes = np.array([x + (i / m) * step for i in range(m + 1)])
    nodes[m] = y
    u_star = _lowest_active_gradient(f, x)
    v_star = _lowest_active_gradient(g, y)
    actual = f(y) - f(x) + g(x) - g(y)
    M = modulus_at(spec, inner_eps)
    triples = []
    if np.array_equal(x, y):
        # every <y - x, .> term vanishes; only the slack penalties remain
        bound = -2.0 * (m - 1) / m * gamma * eps - 2.0 * eps
        return ChainCertificate(x, y, m, eps, gamma, nodes, u_star, v_star, triples, bound, actual, True)
    for i in range(1, m):
        A = eps_subdiff(f, nodes[i], inner_eps)
        B = eps_subdiff(g, nodes[i], inner_eps)
        hit = intersects(A, B, M)
        if not hit.found:
            return ChainCertificate(x, y, m, eps, gamma, nodes, u_star, v_star, triples,
                                    None, actual, False, i)
        triples.append((hit.point, hit.b_part, hit.m_part))
    w_sum = sum((w for _, _, w in triples), np.zeros(f.dim))
    bound = (
        float(step @ (u_star - v_star)) / m
        + float(step @ w_sum) / m
        - 2.0 * (m - 1) / m * gamma * eps
        - 2.0 * eps
    )
    return ChainCertificate(x, y, m, eps, gamma, nodes, u_star, v_star, triples, bound, actual, True)


@dataclass(frozen=True)
class ConstancyResult:
    """``constant`` comes from the subdifferential test alone; ``values_agree``
    is the direct check of ``|(f - g)(x) - c| <= tol`` on the grid."""

    constant: bool
    c: Optional[float]
    max_distance: float
    values_agree: Optional[bool]
    max_deviation: Optional[float]

    def to_doc(self) -> dict:
        return {
            "constant": self.constant,
            "c": self.c,
            "max_distance": self.max_distance,
            "values_agree": self.values_agree,
            "max_deviation": self.max_deviation,
        }


def check_constancy(
    f: MaxAffine,
    g: MaxAffine,
    grid: PointSet,
    eps_grid: Iterable[float],
    tol: float = 1e-9,
    norm: str = DEFAULT_NORM,
) -> ConstancyResult:
    """Decide whether ``f - g`` is constant from ``dist(d_eps f, d_eps g) <= tol``."""
    _same_dim(f, g)
    if tol < 0:
        raise InputError("tol must be nonnegative")
    eps_grid = sorted(float(e) for e in eps_grid)
    if not eps_grid or eps_grid[0] < 0:
        raise InputError("eps_grid must be nonempty and nonnegative")
    if len(grid) == 0:
        raise InputError("grid must be nonempty")
    worst = 0.0
    for x in grid.points:
        for eps in eps_grid:
            worst = max(worst, distance(eps_subdiff(f, x, eps), eps_subdiff(g, x, eps), norm))
    if worst > tol:
        return ConstancyResult(False, None, worst, None, None)
    diffs = np.array([f(x) - g(x) for x in grid.points])
    c = float(diffs[0])
    dev = float(np.max(np.abs(diffs - c)))
    return ConstancyResult(True, c, worst, dev <= tol, dev)


@dataclass(frozen=True)
class SubdiffComparison:
    point: tuple
    inclusion: bool
    intersection: bool
    equality: bool


def check_exact_subdiff(f: MaxAffine, g: MaxAffine, grid: PointSet) -> list[SubdiffComparison]:
    """Per-point comparison of the Fenchel subdifferentials ``d f(x)`` and ``d g(x)``.

    The three predicates are equivalent as statements about every ``x`` in
    R^n; at a single point they may differ.
    """
    _same_dim(f, g)
    zero = DualBall(0.0)
    out = []
    for x in grid.points:
        A, B = exact_subdiff(f, x), exact_subdiff(g, x)
        inc = included_in_sum(A, B, zero).included
        meet = intersects(A, B, zero).found
        equal = inc and included_in_sum(B, A, zero).included
        out.append(SubdiffComparison(tuple(float(t) for t in x), inc, meet, equal))
    return out


def check_global_min(f: MaxAffine, g: MaxAffine, x, eps_grid: Iterable[float]) -> bool:
    """Whether ``d_eps f(x) ⊂ d_eps g(x)`` for every ``eps`` in ``eps_grid``.

    Over all ``eps > 0`` this inclusion holds exactly when ``x`` is a global
    minimiser of ``g - f``.  A finite grid can only refute that.
    """
    _same_dim(f, g)
    eps_grid = list(eps_grid)
    if not eps_grid:
        raise InputError("eps_grid must be nonempty")
    zero = DualBall(0.0)
    x = as_point(x, f.dim)
    return all(
        included_in_sum(eps_subdiff(f, x, e), eps_subdiff(g, x, e), zero).included
        for e in eps_grid
    )
