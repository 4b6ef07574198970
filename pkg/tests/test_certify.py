import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from dclip.certify import (
    Condition,
    Outcome,
    certify_lipschitz,
    chain_certificate,
    check_condition,
    check_constancy,
    check_exact_subdiff,
    check_global_min,
    min_lipschitz,
)
from dclip.errors import InputError, UnsupportedConditionError
from dclip.funcrep import MaxAffine, PointSet
from dclip.geometry import DualBall
from dclip.oracle import lipschitz_exact, random_instance
from dclip.subdiff import exact_subdiff

EPS3 = [1e-6, 1e-2, 0.5]


def test_check_condition_examples(abs1, zero1):
    assert check_condition(abs1, zero1, 1.0, [1.0], 0.5, "II").verdict
    r = check_condition(abs1, zero1, 1.0, [0.0], 1e-3, "VI")
    assert r.verdict and r.value == 0.0
    assert not check_condition(abs1, zero1, 0.9, [1.0], 1e-6, "IV").verdict
    with pytest.raises(UnsupportedConditionError):
        check_condition(abs1, zero1, abs1, [1.0], 0.5, "VI")
    with pytest.raises(ValueError):
        check_condition(abs1, zero1, 1.0, [1.0], 0.5, "III")


def test_false_inclusion_carries_witness(abs1, zero1):
    r = check_condition(abs1, zero1, 0.5, [1.0], 1e-6, Condition.II)
    assert not r.verdict
    assert r.witness is not None and r.witness[0] == pytest.approx(1.0)


def test_certify_examples(abs1, zero1, grid5):
    ok = certify_lipschitz(abs1, zero1, 1.0, grid5, EPS3)
    assert ok.overall is Outcome.CERTIFIED and ok.scope == "grid"
    assert len(ok.results) == 5 * 3 * 3 and all(r.verdict for r in ok.results)
    bad = certify_lipschitz(abs1, zero1, 0.5, grid5, EPS3)
    assert bad.overall is Outcome.REFUTED
    # results are ordered by grid point, so x = -2 is reported first
    assert bad.refutation["x"] == [-2.0] and bad.refutation["epsilon"] == 1e-6
    failing = {(r.point[0], r.epsilon) for r in bad.results if not r.verdict}
    assert (1.0, 1e-6) in failing
    # at the kink only II fails: [-1, 1] is not inside [-0.5, 0.5], yet 0 is shared
    kink = {r.condition.value: r.verdict for r in bad.results if r.point[0] == 0.0 and r.epsilon == 1e-6}
    assert kink == {"II": False, "IV": True, "VI": True}
    assert certify_lipschitz(abs1, abs1, 0.0, grid5, EPS3).overall is Outcome.CERTIFIED


def test_certify_report_doc_order(abs1, zero1, grid5):
    doc = certify_lipschitz(abs1, zero1, 0.5, grid5, [1e-6], ["VI"]).to_doc()
    assert list(doc) == ["overall", "results", "refutation", "scope"]
    assert list(doc["results"][0]) == ["condition", "x", "epsilon", "verdict", "witness", "value"]


def test_certify_edge_cases(abs1, zero1):
    empty = PointSet(1, np.zeros((0, 1)))
    assert certify_lipschitz(abs1, zero1, 1.0, empty, [0.1]).overall is Outcome.INCONCLUSIVE
    with pytest.raises(InputError):
        certify_lipschitz(abs1, zero1, 1.0, PointSet(1, [[0.0]]), [])
    with pytest.raises(UnsupportedConditionError):
        certify_lipschitz(abs1, zero1, abs1, PointSet(1, [[0.0]]), [0.1])


def test_polyhedral_modulus_matches_ball_in_1d(abs1, zero1, grid5):
    # d_eps |.|(0) = [-1, 1] is the unit ball for every eps
    a = certify_lipschitz(abs1, zero1, abs1, grid5, EPS3, ["II", "IV"])
    b = certify_lipschitz(abs1, zero1, 1.0, grid5, EPS3, ["II", "IV"])
    assert [r.verdict for r in a.results] == [r.verdict for r in b.results]
    half = abs1.scaled(0.5)
    assert certify_lipschitz(abs1, zero1, half, grid5, EPS3, ["IV"]).overall is Outcome.REFUTED


def test_exact_mode(abs1, zero1):
    far = PointSet(1, [[0.0]])  # the kink alone never refutes
    local = certify_lipschitz(abs1, zero1, 0.5, far, [1e-6], ["VI"])
    assert local.overall is Outcome.CERTIFIED
    glob = certify_lipschitz(abs1, zero1, 0.5, far, [1e-6], ["VI"], exact=True)
    assert glob.overall is Outcome.REFUTED and glob.scope == "global"
    assert glob.exact_constant == 1.0
    assert glob.refutation["x"][0] > 0
    ok = certify_lipschitz(abs1, zero1, 1.0, far, [1e-6], exact=True)
    assert ok.overall is Outcome.CERTIFIED and ok.scope == "global"


def test_min_lipschitz_examples(abs1, zero1):
    assert min_lipschitz(abs1, zero1, PointSet(1, [[-2.0], [-1.0], [1.0], [2.0]])) == 1.0
    assert min_lipschitz(abs1, abs1, PointSet(1, [[0.5]])) == 0.0
    f = MaxAffine.from_pieces([([2.0], 0.0), ([-1.0], 0.0)])
    assert min_lipschitz(f, zero1, PointSet(1, [[-1.0], [1.0]])) == 2.0


def test_chain_examples(abs1, zero1):
    c = chain_certificate(abs1, abs1, MaxAffine.zero(1), [-1.0], [1.0], 10, 0.1)
    assert c.feasible and c.actual_value == 0.0 and c.holds
    c = chain_certificate(abs1, zero1, 1.0, [0.0], [2.0], 100, 0.01)
    assert c.feasible and c.actual_value == 2.0 and c.holds
    assert c.bound_value >= -2 * 0.01 - 1e-12 - 2.0
    c = chain_certificate(abs1, zero1, 0.0, [0.0], [2.0], 10, 1e-6)
    assert not c.feasible and c.failure_index is not None
    assert c.chain_points[c.failure_index][0] > 0


def test_chain_degenerate_and_errors(abs1, zero1):
    c = chain_certificate(abs1, zero1, 0.0, [1.0], [1.0], 4, 0.1)
    assert c.feasible and c.actual_value == 0.0
    assert c.bound_value == pytest.approx(-2 * 0.1 - 2 * 3 / 4 * (1 / 8) * 0.1)
    c1 = chain_certificate(abs1, zero1, 1.0, [-1.0], [2.0], 1, 0.1)
    assert c1.feasible and c1.triples == [] and c1.holds
    with pytest.raises(InputError):
        chain_certificate(abs1, zero1, 1.0, [0.0], [1.0], 0, 0.1)
    with pytest.raises(InputError):
        chain_certificate(abs1, zero1, 1.0, [0.0], [1.0], 3, 0.0)


def test_chain_triples_are_valid(abs1, zero1):
    c = chain_certificate(abs1, zero1, 1.0, [-1.5], [2.0], 10, 0.1)
    for u, v, w in c.triples:
        np.testing.assert_allclose(u, v + w)
        assert abs(w[0]) <= 1.0 + 1e-12


def test_constancy_examples(abs1, zero1, grid5):
    f = MaxAffine.from_pieces([([1.0], 0.5), ([-2.0], 1.0), ([0.0], 0.0)])
    r = check_constancy(f, f.shifted(3.0), grid5, [0.01, 0.5])
    assert r.constant and r.c == pytest.approx(-3.0, abs=1e-12) and r.values_agree
    assert not check_constancy(abs1, zero1, grid5, [1e-6]).constant
    same = check_constancy(abs1, abs1, grid5, [0.1])
    assert same.constant and same.c == 0.0


def test_exact_subdiff_examples(abs1, zero1, grid5):
    assert all(r.inclusion and r.intersection and r.equality
               for r in check_exact_subdiff(abs1, abs1, grid5))
    (one,) = check_exact_subdiff(abs1, zero1, PointSet(1, [[1.0]]))
    assert (one.inclusion, one.intersection, one.equality) == (False, False, False)
    (mid,) = check_exact_subdiff(abs1, abs1.scaled(0.5), PointSet(1, [[0.0]]))
    assert (mid.inclusion, mid.intersection) == (False, True)


def test_global_min_examples(abs1, zero1):
    assert not check_global_min(abs1, zero1, [0.0], [0.1, 1.0])
    assert check_global_min(abs1, abs1, [0.7], [0.1, 1.0])
    assert check_global_min(zero1, abs1, [0.0], [0.1, 1.0])


# -- properties -------------------------------------------------------------


@st.composite
def instances(draw, max_pieces=6):
    dim = draw(st.integers(1, 3))
    f, g = random_instance(dim, draw(st.integers(1, max_pieces)), draw(st.integers(1, max_pieces)),
                           2.0, draw(st.integers(0, 2**32)))
    x = np.array(draw(st.lists(st.floats(-2, 2), min_size=dim, max_size=dim)))
    return f, g, x


norms = st.sampled_from(["l1", "linf"])
eps_values = st.sampled_from([0.0, 1e-6, 1e-3, 0.1, 1.0])


@settings(max_examples=150, deadline=None)
@given(instances(), eps_values, st.floats(0, 5), norms)
def test_implication_chain(inst, eps, K, norm):
    f, g, x = inst
    ii, iv, vi = (check_condition(f, g, K, x, eps, c, norm) for c in ("II", "IV", "VI"))
    assert not ii.verdict or iv.verdict
    assert not iv.verdict or vi.value <= K + 1e-8


@settings(max_examples=100, deadline=None)
@given(instances(), eps_values, st.floats(0, 5), norms)
def test_iv_vi_symmetric(inst, eps, K, norm):
    f, g, x = inst
    assert check_condition(f, g, K, x, eps, "IV", norm).verdict == \
        check_condition(g, f, K, x, eps, "IV", norm).verdict
    assert check_condition(f, g, K, x, eps, "VI", norm).value == \
        check_condition(g, f, K, x, eps, "VI", norm).value


@settings(max_examples=40, deadline=None)
@given(instances(), st.integers(0, 2**32), st.sampled_from([1, 10, 100]), st.sampled_from([0.1, 1e-3]))
def test_chain_soundness(inst, seed, m, eps):
    f, g, x = inst
    y = np.random.default_rng(seed).uniform(-2, 2, f.dim)
    k, _ = lipschitz_exact(f, g)
    c = chain_certificate(f, g, k, x, y, m, eps)
    assert c.feasible
    assert c.actual_value >= c.bound_value - 1e-7


@settings(max_examples=40, deadline=None)
@given(instances(), st.floats(-10, 10))
def test_constancy_recovers_shift(inst, c):
    f, _, _ = inst
    grid = PointSet.lattice(f.dim, -2, 2, 3)
    r = check_constancy(f, f.shifted(c), grid, [1e-3, 0.1])
    assert r.constant and abs(r.c + c) <= 1e-9


@settings(max_examples=60, deadline=None)
@given(instances(), st.integers(0, 2**32))
def test_global_min_refuted_by_a_better_point(inst, seed):
    # if (g - f)(y) < (g - f)(x), a subgradient s of f at y lies in
    # d_e f(x) for e = f(x) - f(y) - <x - y, s> but not in d_e g(x)
    f, g, x = inst
    y = np.random.default_rng(seed).uniform(-3, 3, f.dim)
    assume((g(y) - f(y)) < (g(x) - f(x)) - 1e-6)
    S = exact_subdiff(f, y)
    s = f.gradients[int(np.flatnonzero(S.gaps == 0)[0])]
    e = max(0.0, f(x) - f(y) - float((x - y) @ s))
    assert not check_global_min(f, g, x, [e])


@settings(max_examples=40, deadline=None)
@given(instances(max_pieces=3), st.integers(0, 2**32), st.lists(st.floats(0, 2), min_size=1, max_size=4))
def test_global_min_holds_at_minimiser(inst, seed, eps_grid):
    # g = f + h with h >= 0 and h(x) = 0 makes x a global minimiser of g - f
    f, _, x = inst
    rng = np.random.default_rng(seed)
    c = rng.uniform(-2, 2, size=(2, f.dim))
    h = MaxAffine(np.vstack([np.zeros(f.dim), c]), np.r_[0.0, -(c @ x)])
    grads = (f.gradients[:, None, :] + h.gradients[None, :, :]).reshape(-1, f.dim)
    icpts = (f.intercepts[:, None] + h.intercepts[None, :]).reshape(-1)
    g = MaxAffine(grads, icpts)
    assert check_global_min(f, g, x, eps_grid)
