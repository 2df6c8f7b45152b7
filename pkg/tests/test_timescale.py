from fractions import Fraction

import numpy as np
import pytest

from strategies import random_scale, sample_scale_points
from tsstieltjes import (
    BoxKind,
    GeometricCluster,
    IsolatedPoints,
    RealInterval,
    TimeScale,
    make_qscale,
    make_uniform,
    parse_scale,
)
from tsstieltjes.errors import (
    ExprSyntaxError,
    InvalidRatio,
    InvalidScale,
    NotCommensurate,
    NotInScale,
    OutOfRange,
    TooManyPoints,
)

Z03 = make_uniform(0, 3, 1)
Q2 = make_qscale(2)
GAPPED = parse_scale("union(points(0); interval(1,2))")


# -- construction ------------------------------------------------------------


def test_qscale_contains_powers_of_half():
    for p in [0, 1 / 8, 1 / 4, 1 / 2, 1]:
        assert Q2.contains(p)
    assert Q2.max == 1.0 and Q2.min == 0.0


def test_qscale_excludes_non_powers():
    assert not Q2.contains(0.3)


def test_qscale_tenth_point_below_one():
    T = make_qscale(Fraction(3, 2))
    pts = np.sort(T.enumerate_between(0.01, 1.0))[::-1]
    assert pts[0] == 1.0
    assert pts[10] == pytest.approx(float(Fraction(2, 3) ** 10), rel=1e-14)


@pytest.mark.parametrize("q", [1.0, 0.5, -2.0])
def test_qscale_rejects_ratio(q):
    with pytest.raises(InvalidRatio):
        make_qscale(q)


def test_uniform_grid():
    assert Z03.enumerate_between(0, 3).tolist() == [0, 1, 2, 3]
    assert make_uniform(0, 1, 0.25).enumerate_between(0, 1).tolist() == [0, 0.25, 0.5, 0.75, 1]


def test_uniform_span_shorter_than_step():
    with pytest.raises(NotCommensurate):
        make_uniform(5, 5 + 1e-9, 1)


def test_uniform_not_commensurate():
    with pytest.raises(NotCommensurate):
        make_uniform(0, 1, 0.3)


def test_components_must_be_ordered():
    with pytest.raises(InvalidScale):
        TimeScale([RealInterval(1, 2), IsolatedPoints((0.0,))])


def test_union_merges_and_absorbs():
    T = TimeScale.union(RealInterval(0, 1), RealInterval(0.5, 2), IsolatedPoints((1.5, 3.0)))
    assert [type(c).__name__ for c in T.components] == ["RealInterval", "IsolatedPoints"]
    assert T.components[0] == RealInterval(0, 2)
    assert T.components[1].points == (3.0,)


def test_union_cluster_touching_interval_drops_shared_point():
    T = parse_scale("union(qscale(2); interval(1,2))")
    assert T.contains(0.5) and T.contains(1.5)
    assert T.rho(1.0) == 0.5
    assert T.sigma(0.5) == 1.0


def test_union_point_inside_cluster_must_be_a_cluster_point():
    with pytest.raises(InvalidScale):
        parse_scale("union(qscale(2); points(0.3))")
    T = parse_scale("union(qscale(2); points(0.25, 2))")
    assert len(T.components) == 2


# -- jumps and graininess ----------------------------------------------------


def test_sigma_examples():
    assert Z03.sigma(1) == 2
    assert Q2.sigma(0.25) == 0.5
    assert Z03.sigma(3) == 3


def test_sigma_at_cluster_limit_is_right_dense():
    # every 2^-k, k <= 60, lies above 0, so no least point above 0 exists
    pts = [2.0**-k for k in range(61)]
    assert all(Q2.contains(p) and p > 0 for p in pts)
    assert Q2.sigma(0.0) == 0.0
    assert Q2.sigma(2.0**-30) == 2.0**-29
    # points closer to the limit than the snap tolerance are the limit
    assert Q2.snap(2.0**-60) == 0.0


def test_rho_examples():
    assert Z03.rho(2) == 1
    assert Q2.rho(0.5) == 0.25
    assert GAPPED.rho(1) == 0
    assert Z03.rho(0) == 0


def test_mu_nu_examples():
    assert (Z03.mu(1), Z03.nu(1)) == (1, 1)
    assert (Q2.mu(0.5), Q2.nu(0.5)) == (0.5, 0.25)
    unit = parse_scale("interval(0,1)")
    assert (unit.mu(0.5), unit.nu(0.5)) == (0, 0)


def test_jump_of_non_member_raises():
    with pytest.raises(NotInScale):
        Z03.sigma(1.5)
    with pytest.raises(NotInScale):
        Q2.rho(0.3)


def test_snap_tolerance():
    assert Z03.snap(1 + 1e-13) == 1.0
    assert not Z03.contains(1 + 1e-9)


# -- restriction and boxes ---------------------------------------------------


def test_restrict_cluster_tail_becomes_points():
    R = Q2.restrict(0.25, 1)
    assert R.components == (IsolatedPoints((0.25, 0.5, 1.0)),)


def test_restrict_identity_and_dense():
    assert Z03.restrict(0, 3) == Z03
    assert GAPPED.restrict(1, 1.5) == TimeScale([RealInterval(1, 1.5)])


def test_restrict_cluster_keeps_limit():
    R = Q2.restrict(0, 0.5)
    assert isinstance(R.components[0], GeometricCluster)
    assert R.max == 0.5 and R.sigma(0.25) == 0.5 and R.contains(2.0**-30)


def test_box_subinterval_examples():
    assert Z03.box_subinterval(1, 2, BoxKind.DELTA) == (1, 1)
    assert Z03.box_subinterval(1, 2, "nabla") == (2, 2)
    assert Q2.box_subinterval(0, 0.5, "nabla") == (0, 0.5)


def test_floor_ceil_examples():
    assert (Q2.floor_point(0.3), Q2.ceil_point(0.3)) == (0.25, 0.5)
    assert (Z03.floor_point(2), Z03.ceil_point(2)) == (2, 2)
    assert (GAPPED.floor_point(0.5), GAPPED.ceil_point(0.5)) == (0, 1)


def test_floor_ceil_out_of_range():
    with pytest.raises(OutOfRange):
        Z03.floor_point(-1)
    with pytest.raises(OutOfRange):
        Z03.ceil_point(4)


def test_enumerate_examples():
    assert Z03.enumerate_between(0, 3, cap=10).tolist() == [0, 1, 2, 3]
    assert Q2.enumerate_between(0.125, 1, cap=10).tolist() == [0.125, 0.25, 0.5, 1]
    with pytest.raises(TooManyPoints):
        Q2.enumerate_between(0, 1, cap=1000)
    with pytest.raises(TooManyPoints):
        Z03.enumerate_between(0, 3, cap=3)


# -- grammar -----------------------------------------------------------------


def test_grammar_forms():
    assert parse_scale("points(3, 1, 2)").enumerate_between(0, 3).tolist() == [1, 2, 3]
    assert parse_scale(" uniform( 0 , 1 , 1/4 ) ") == make_uniform(0, 1, 0.25)
    assert parse_scale("qscale(3/2)") == make_qscale(1.5)
    assert parse_scale("cluster(1, 2, 0.5)").components == (GeometricCluster(1, 2, 0.5),)
    assert parse_scale("interval(-1.5e0, 2)").min == -1.5


@pytest.mark.parametrize("text", ["", "points(", "points(1,)", "qscale(2,3)", "circle(1)", "interval(1,2) x"])
def test_grammar_errors(text):
    with pytest.raises(ExprSyntaxError):
        parse_scale(text)


def test_describe_round_trip():
    for text in ["qscale(2)", "union(points(0); interval(1,2))", "union(qscale(2); interval(1.5,2.5))"]:
        T = parse_scale(text)
        assert parse_scale(T.describe()) == T


# -- properties --------------------------------------------------------------


def _scales(seed, n):
    rng = np.random.default_rng(seed)
    return [(random_scale(rng, dense_share=0.5), rng) for _ in range(n)]


@pytest.mark.parametrize("seed", range(4))
def test_jump_inequalities(seed):
    for T, rng in _scales(seed, 25):
        for t in sample_scale_points(T, rng):
            s, r = T.sigma(t), T.rho(t)
            assert T.rho(s) <= T.snap(t) <= T.sigma(r)
            if s > t:
                assert T.rho(s) == T.snap(t)


@pytest.mark.parametrize("seed", range(4))
def test_floor_ceil_bracket(seed):
    for T, rng in _scales(seed, 25):
        for x in rng.uniform(T.min, T.max, 10):
            lo, hi = T.floor_point(x), T.ceil_point(x)
            assert T.contains(lo) and T.contains(hi)
            assert lo <= x + 1e-12 and x - 1e-12 <= hi
            if T.is_finite:
                pts = T.enumerate_between(T.min, T.max)
                assert not np.any((pts > lo) & (pts < hi))


@pytest.mark.parametrize("seed", range(4))
def test_restrict_preserves_membership(seed):
    for T, rng in _scales(seed, 25):
        pts = sample_scale_points(T, rng)
        a, b = sorted(rng.choice(pts, 2, replace=False).tolist())
        R = T.restrict(a, b)
        probes = np.concatenate([pts, rng.uniform(T.min, T.max, 20)])
        for t in probes:
            assert R.contains(t) == (T.contains(t) and a - 1e-12 <= t <= b + 1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_jumps_match_brute_force_on_scattered(seed):
    rng = np.random.default_rng(seed)
    for _ in range(25):
        T = random_scale(rng, dense_share=0.0)
        pts = T.enumerate_between(T.min, T.max)
        for i, t in enumerate(pts):
            assert T.sigma(t) == (pts[i + 1] if i + 1 < len(pts) else t)
            assert T.rho(t) == (pts[i - 1] if i > 0 else t)
        np.testing.assert_array_equal(T.sigma_many(pts), np.append(pts[1:], pts[-1]))
        np.testing.assert_array_equal(T.rho_many(pts), np.insert(pts[:-1], 0, pts[0]))


def test_vector_jumps_match_scalar_on_mixed():
    for T, rng in _scales(11, 30):
        pts = sample_scale_points(T, rng)
        assert T.sigma_many(pts).tolist() == [T.sigma(t) for t in pts]
        assert T.rho_many(pts).tolist() == [T.rho(t) for t in pts]
