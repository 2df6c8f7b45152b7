import math

import numpy as np
import pytest

from strategies import INTEGRATORS, pick_endpoints, random_scale
from tsstieltjes import (
    GNotIncreasing,
    NonTermination,
    Partition,
    TooManyPoints,
    certify,
    common_refinement,
    delta_fine,
    grid_partition,
    halve_and_refine,
    make_qscale,
    make_uniform,
    parse,
    parse_scale,
    verify_certificate,
)

Q2 = make_qscale(2)
Z3 = make_uniform(0, 3, 1)
UNIT = parse_scale("interval(0,1)")


def _qpoints(q, depth=80):
    """Brute-force listing of qscale(q) in [0, 1], truncated near 0."""
    return [0.0] + sorted(q ** -k for k in range(depth))


def _oracle_delta_fine(points, g, delta):
    """Hand simulation of the sup-window construction on a finite point list."""
    out = [points[0]]
    while out[-1] < points[-1]:
        cur = out[-1]
        y = g(cur) + delta
        win = [p for p in points if p >= cur and g(p) <= y]
        nxt = max(win)
        if nxt <= cur:
            nxt = min(p for p in points if p > cur)
        out.append(nxt)
    return out


# -- Partition ----------------------------------------------------------------


def test_partition_snaps_sorts_dedupes():
    p = Partition(Z3, [3, 1, 0, 1 + 1e-14, 2])
    assert list(p) == [0, 1, 2, 3]
    assert p.a == 0 and p.b == 3 and len(p) == 4


def test_partition_rejects_degenerate():
    with pytest.raises(ValueError):
        Partition(Z3, [1, 1])


def test_partition_points_are_read_only():
    p = grid_partition(Z3, 0, 3)
    with pytest.raises(ValueError):
        p.points[0] = 5.0


# -- grid_partition -----------------------------------------------------------


def test_grid_partition_z():
    assert list(grid_partition(Z3, 0, 3)) == [0, 1, 2, 3]


def test_grid_partition_qscale_tail():
    assert list(grid_partition(Q2, 0.25, 1)) == [0.25, 0.5, 1.0]


def test_grid_partition_qscale_infinite():
    with pytest.raises(TooManyPoints):
        grid_partition(Q2, 0, 1)


def test_grid_partition_cap():
    with pytest.raises(TooManyPoints):
        grid_partition(make_uniform(0, 100, 1), 0, 100, cap=10)


# -- common_refinement ---------------------------------------------------------


def test_common_refinement_union():
    p = common_refinement(Partition(Z3, [0, 2, 3]), Partition(Z3, [0, 1, 3]))
    assert list(p) == [0, 1, 2, 3]


def test_common_refinement_idempotent():
    p = Partition(Z3, [0, 2, 3])
    assert common_refinement(p, p) == p


def test_common_refinement_qscale():
    p = common_refinement(Partition(Q2, [0, 0.5, 1]), Partition(Q2, [0, 0.25, 1]))
    assert list(p) == [0, 0.25, 0.5, 1]
    assert p.refines(Partition(Q2, [0, 0.5, 1]))


def test_common_refinement_mismatch():
    with pytest.raises(ValueError):
        common_refinement(Partition(Z3, [0, 3]), Partition(Z3, [0, 2]))


# -- delta_fine -----------------------------------------------------------------


def test_delta_fine_qscale_example():
    part, cert = delta_fine(Q2, "t^2", 0, 1, 0.3)
    expected = _oracle_delta_fine(_qpoints(2), lambda t: t * t, 0.3)
    assert list(part) == expected == [0, 0.5, 1]
    assert cert.gap_small.tolist() == [True, False]
    assert cert.jump_step.tolist() == [False, True]
    assert cert.ok and len(cert.failures) == 0


def test_delta_fine_large_delta_single_step():
    part, cert = delta_fine(Z3, "t", 0, 3, 10)
    assert list(part) == [0, 3]
    assert cert.gap_small.tolist() == [True]


def test_delta_fine_identity_on_interval():
    part, cert = delta_fine(UNIT, "t", 0, 1, 0.4)
    assert list(part) == [0, 0.4, 0.8, 1]
    assert cert.gap_small.all()


@pytest.mark.parametrize("q", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("delta", [0.5, 0.1, 0.013, 1e-4])
@pytest.mark.parametrize("g", ["t", "t^2", "exp(t)"])
def test_delta_fine_matches_hand_simulation_on_qscale(q, delta, g):
    ge = parse(g)
    part, _ = delta_fine(make_qscale(q), ge, 0, 1, delta)
    expected = _oracle_delta_fine(_qpoints(q), ge.evaluate, delta)
    # the oracle spells q-points as q**-k, which can differ from the scale's by an ulp
    assert len(part) == len(expected)
    np.testing.assert_allclose(part.points, expected, rtol=1e-12, atol=0)


def test_delta_fine_scattered_hand_simulation():
    rng = np.random.default_rng(3)
    for _ in range(50):
        pts = np.unique(np.round(rng.uniform(0, 3, 20), 3)).tolist()
        T = parse_scale("points(" + ",".join(map(repr, pts)) + ")")
        g = parse(str(rng.choice(INTEGRATORS)))
        delta = float(rng.uniform(0.01, 2))
        part, cert = delta_fine(T, g, pts[0], pts[-1], delta)
        assert list(part) == _oracle_delta_fine(pts, g.evaluate, delta)
        assert verify_certificate(part, g, cert)


def test_delta_fine_sigma_fallback_on_cluster_tail():
    # the window below the next q-point is empty, so each step is a jump
    part, cert = delta_fine(Q2, "t", 0.125, 1, 0.01)
    assert list(part) == [0.125, 0.25, 0.5, 1]
    assert cert.jump_step.all()


def test_delta_fine_non_termination_budget():
    with pytest.raises(NonTermination):
        delta_fine(UNIT, "t", 0, 1, 1e-6, max_steps=1000)


def test_delta_fine_non_increasing_g():
    with pytest.raises(GNotIncreasing):
        delta_fine(UNIT, "(t-0.5)^2", 0, 1, 0.01)
    with pytest.raises(GNotIncreasing):
        delta_fine(Z3, "-t", 0, 3, 0.5)


def test_delta_fine_rejects_bad_delta():
    for d in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(ValueError):
            delta_fine(Z3, "t", 0, 3, d)


def test_delta_fine_points_belong_to_scale():
    T = parse_scale("union(qscale(2); interval(1.5,2); points(2.5,3))")
    part, cert = delta_fine(T, "t^3+t", 0, 3, 0.05)
    assert all(T.contains(p) for p in part)
    assert part.a == 0 and part.b == 3
    assert verify_certificate(part, "t^3+t", cert)
    # nothing from the gap (1, 1.5) or (2, 2.5)
    assert not any(1 < p < 1.5 or 2 < p < 2.5 for p in part)


def test_certificate_detects_bad_partition():
    p = Partition(UNIT, [0, 0.5, 1])
    cert = certify(p, "t", 0.1)
    assert not cert.ok
    assert cert.failures.tolist() == [1, 2]
    assert not verify_certificate(p, "t", cert)


def test_verify_rejects_forged_flags():
    p, cert = delta_fine(Z3, "t", 0, 3, 0.5)
    forged = type(cert)(cert.delta, cert.gap_small | True, cert.jump_step)
    assert not verify_certificate(p, "t", forged)


# -- halve_and_refine -------------------------------------------------------------


def test_halve_and_refine_large_delta_keeps_p():
    p = Partition(Z3, [0, 1, 3])
    q, cert = halve_and_refine(p, "t", 100)
    assert q == p and cert.ok


def test_halve_and_refine_interval():
    q, cert = halve_and_refine(Partition(UNIT, [0, 1]), "t", 0.5)
    assert list(q) == [0, 0.5, 1] and cert.ok


def test_halve_and_refine_refines_input():
    p = Partition(Q2, [0, 0.25, 1])
    q, cert = halve_and_refine(p, "t^2", 0.01)
    assert q.refines(p) and cert.ok
    assert verify_certificate(q, "t^2", cert)


def test_halve_and_refine_growth_on_qscale_is_logarithmic():
    p = Partition(Q2, [0, 1])
    sizes = []
    for k in range(1, 13):
        p, cert = halve_and_refine(p, "t^2", 10.0**-k)
        assert cert.ok
        sizes.append(len(p))
    # the window from 0 reaches sqrt(delta); each decade adds about log2(sqrt(10)) points
    assert all(0 <= b - a <= 3 for a, b in zip(sizes, sizes[1:]))


# -- certificate property -----------------------------------------------------------


def test_certificate_reverification_property():
    rng = np.random.default_rng(20)
    for _ in range(200):
        T = random_scale(rng)
        a, b = pick_endpoints(T, rng)
        g = parse(str(rng.choice(INTEGRATORS)))
        span = g.evaluate(b) - g.evaluate(a)
        delta = span * float(10 ** rng.uniform(-3.5, 0.3))
        part, cert = delta_fine(T, g, a, b, delta)
        assert part.a == T.snap(a) and part.b == T.snap(b)
        assert np.all(np.diff(part.points) > 0)
        assert verify_certificate(part, g, cert)
