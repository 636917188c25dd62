from fractions import Fraction as F

import pytest

from mpec_cq.exactmath import vec, zeros
from mpec_cq.lowerlevel import InfeasiblePoint, graph_tangent_member
from mpec_cq.model import parse_poly, parse_problem
from mpec_cq.oracle import (
    BaseNotOnGraph,
    dist_graph,
    dist_mpcc,
    error_bound_probe_mpec,
    error_bound_probe_system,
    tangent_ratio_probe,
)

BASE = [0, 0, 0, 0, 0, 1]


def test_dist_graph_member(ex41):
    assert dist_graph(ex41, [0, 0, 0, 0, 0, 1], budget=20) < 1e-8


def test_dist_graph_far_point(ex41):
    # pinned by the exhaustive active-set run: the best distance found for
    # ((0,0,0),(1,0,1)) stays clearly away from zero
    d = dist_graph(ex41, [0, 0, 0, 1, 0, 1], budget=60)
    assert d >= 0.4


def test_dist_graph_interior_zero_normal(ex41):
    assert dist_graph(ex41, [0, 0, -1, 0, 0, 0], budget=40) < 1e-7


def test_tangent_probe_member(ex41):
    rep = tangent_ratio_probe(ex41, BASE, [1, 0, 0, 1, 0, 0], budget=8)
    assert rep.verdict == "RATIO_VANISHES"
    assert rep.ratios[-1] < 1e-3


def test_tangent_probe_nonmember(ex41):
    rep = tangent_ratio_probe(ex41, BASE, [1, 0, 0, 0, 0, 0], budget=8)
    assert rep.verdict == "RATIO_BOUNDED_AWAY"
    assert all(r >= 1e-2 for r in rep.ratios)


def test_tangent_probe_zero_direction(ex41):
    rep = tangent_ratio_probe(ex41, BASE, zeros(6), budget=8)
    assert all(d < 1e-8 for d in rep.distances)
    assert rep.verdict == "RATIO_VANISHES"


def test_tangent_probe_validates_base(ex41):
    with pytest.raises(BaseNotOnGraph):
        tangent_ratio_probe(ex41, [0, 0, 0, 1, 0, 0], [1, 0, 0, 0, 0, 0])
    with pytest.raises(InfeasiblePoint):
        tangent_ratio_probe(ex41, [0, 0, 1, 0, 0, 1], [1, 0, 0, 0, 0, 0])


def test_probe_determinism(ex41):
    a = tangent_ratio_probe(ex41, BASE, [1, 1, 0, 1, 1, 0], budget=8, seed=3)
    b = tangent_ratio_probe(ex41, BASE, [1, 1, 0, 1, 1, 0], budget=8, seed=3)
    assert a == b


def test_oracle_agrees_with_exact_membership(ex41):
    yb, ys = zeros(3), vec([0, 0, 1])
    cases = [
        (vec([1, 0, 0]), vec([1, 0, 0])),
        (vec([0, 1, 0]), vec([0, 1, 0])),
        (vec([1, 1, 0]), vec(["1/2", "1/2", 0])),
        (vec([1, 0, 0]), vec([0, 0, 0])),
        (vec([0, 1, 0]), vec([1, 0, 0])),
    ]
    for v, vs in cases:
        exact = graph_tangent_member(ex41, yb, ys, v, vs).member
        rep = tangent_ratio_probe(ex41, tuple(yb) + tuple(ys),
                                  tuple(v) + tuple(vs), budget=8)
        if exact:
            assert rep.verdict == "RATIO_VANISHES"
        else:
            assert rep.verdict != "RATIO_VANISHES"


def test_dist_mpcc_on_solution_path(ex41):
    z = (F(3, 10), F(3, 10), F(1, 5), F(1, 5), F(-1, 50), F(1, 2), F(1, 2))
    res = dist_mpcc(ex41, z, budget=50)
    assert res.value == 0.0 and not res.fallback


def test_dist_mpcc_reference_fiber(ex41):
    # the reference triple is feasible even though no solution-map formula
    # produces it (the multiplier segment lives over xbar only)
    z = (F(0), F(0), F(0), F(0), F(0), F(1, 2), F(1, 2))
    res = dist_mpcc(ex41, z, budget=20)
    assert res.value == 0.0


def test_dist_mpcc_off_path_point(ex41):
    # z = (xbar, ybar, lam) + 0.1 * ((3,0),(2,0,0),(0,0)); grid + refinement
    # keeps the distance clearly positive
    z = [0.3, 0.0, 0.2, 0.0, 0.0, 0.5, 0.5]
    res = dist_mpcc(ex41, z, budget=200)
    assert res.value >= 0.005
    assert not res.fallback


def test_dist_mpcc_penalty_fallback(ex41_reversed):
    # no solution map bundled: exact feasible point still reports 0
    z = (F(0), F(0), F(0), F(0), F(0), F(1, 2), F(1, 2))
    res = dist_mpcc(ex41_reversed, z, budget=20)
    assert res.value == 0.0
    z2 = [0.0, 0.0, 0.0, 0.0, 0.5, 0.5, 0.5]
    res2 = dist_mpcc(ex41_reversed, z2, budget=30)
    assert res2.fallback
    assert res2.value > 0.05


def test_error_bound_blowup_square():
    polys = (parse_poly("z1^2", ("z1",)),)
    rep = error_bound_probe_system(polys, vec([0]), samples=30, seed=1)
    assert rep.blow_up
    assert rep.tag == "MSCQ_FAILURE_SIGNAL"


def test_error_bound_affine_bounded():
    polys = (parse_poly("z1 + z2", ("z1", "z2")),
             parse_poly("-z1", ("z1", "z2")))
    rep = error_bound_probe_system(polys, vec([0, 0]), samples=30, seed=1)
    assert not rep.blow_up
    assert rep.tag == "CONSISTENT_WITH_MSCQ"


@pytest.mark.slow
def test_error_bound_mpec_example(ex41):
    rep = error_bound_probe_mpec(ex41, radii=(1e-1, 1e-2, 1e-3), samples=8,
                                 seed=0, budget=8)
    assert not rep.blow_up
    # pinned from the probe run: the modulus estimate stays modest
    assert max(rep.kappa) < 10.0
    # both residual representations stay bounded together
    from mpec_cq.oracle import _classify
    blow1, _ = _classify(list(rep.profiles["direct"]))
    blow2, _ = _classify(list(rep.profiles["graph"]))
    assert blow1 == blow2 == False


@pytest.mark.slow
def test_error_bound_cross_representation_random():
    # scalar lower-level instances with exact solution maps: both residual
    # representations must stay bounded together (no one-sided blow-up)
    import random
    rng = random.Random(12)
    for _ in range(10):
        a = rng.randint(1, 3)
        bco = rng.randint(1, 3)
        c = rng.randint(1, 3)
        text = f"""
[dims]
n = 1
m = 1
p = 0
q = 1

[functions]
phi = ["{bco}*y1 - {c}*x1"]
g = ["{a}*y1"]
G = []

[point]
x = ["0"]
y = ["0"]

[[solution_map]]
region = ["x1 <= 0"]
y = ["{c}*x1/{bco}"]
lambda = ["0"]

[[solution_map]]
region = ["-x1 <= 0"]
y = ["0"]
lambda = ["{c}*x1/{a}"]
"""
        pr = parse_problem(text)
        rep = error_bound_probe_mpec(pr, radii=(1e-1, 1e-3), samples=6,
                                     seed=7, budget=4)
        from mpec_cq.oracle import _classify
        blow1, _ = _classify(list(rep.profiles["direct"]))
        blow2, _ = _classify(list(rep.profiles["graph"]))
        assert not (blow1 ^ blow2)
