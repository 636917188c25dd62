import random
from fractions import Fraction as F

import pytest

from mpec_cq.certify import Status
from mpec_cq.exactmath import dot, is_zero_vec, mat, vec, zeros
from mpec_cq.lowerlevel import InfeasiblePoint
from mpec_cq.model import MpecProblem, Poly, parse_problem
from mpec_cq.mpccdiag import (
    DirectionNotInLinCone,
    MissingObjective,
    gcq_evidence,
    mpcc_index_sets,
    mpcc_licq_check,
    mpcc_mfcq_check,
    mpec_linearized_cone,
    multiplier_uniqueness,
    stationarity_check,
)
from mpec_cq.polyhedra import Polyhedron, set_equal

HALF = vec(["1/2", "1/2"])


def test_index_sets_balanced_multiplier(ex41):
    pt = mpcc_index_sets(ex41, HALF)
    assert pt.I_g == (0, 1)
    assert pt.I_lam == () and pt.I_0 == ()
    assert pt.I_G == (0, 1)


def test_index_sets_vertex_multiplier(ex41):
    pt = mpcc_index_sets(ex41, vec([1, 0]))
    assert pt.I_g == (0,)
    assert pt.I_0 == (1,)
    assert pt.I_lam == ()


def test_index_sets_interior_point():
    text = """
[dims]
n = 0
m = 1
p = 0
q = 1

[functions]
phi = ["y1"]
g = ["y1 - 1"]
G = []

[point]
x = []
y = ["0"]
"""
    pr = parse_problem(text)
    pt = mpcc_index_sets(pr, vec([0]))
    assert pt.I_lam == (0,)
    assert pt.I_g == () and pt.I_0 == ()


def test_index_sets_rejects_infeasible(ex41):
    with pytest.raises(InfeasiblePoint):
        mpcc_index_sets(ex41, vec([1, 1]))   # h3 = -1 + 2 != 0
    with pytest.raises(InfeasiblePoint):
        mpcc_index_sets(ex41, vec([-1, 2]))  # negative component


def test_multiplier_uniqueness(ex41, identity_field):
    rep = multiplier_uniqueness(ex41)
    assert not rep.unique
    assert rep.second == vec([0, 1])
    rep2 = multiplier_uniqueness(identity_field)
    assert rep2.unique and rep2.second is None


UNIQUE_SLATER = """
[dims]
n = 1
m = 1
p = 0
q = 1

[functions]
phi = ["y1 - x1"]
g = ["y1"]
G = []

[point]
x = ["0"]
y = ["0"]
"""


def test_mfcq_single_branch_fails_on_segment(ex41):
    rep = mpcc_mfcq_check(ex41, HALF)
    assert rep.via_second_multiplier
    assert len(rep.branches) == 1
    br, verdict = rep.branches[0]
    assert br.beta1 == () and br.beta2 == ()
    assert verdict.status is Status.FAILS
    diff = verdict.witness["multiplier_difference"]
    # exact re-verification of the witness: nonzero, annihilates grad g
    assert not is_zero_vec(diff)
    J = ex41.grad_g(ex41.ybar)
    img = tuple(sum((diff[i] * J[i][j] for i in range(ex41.q)), F(0))
                for j in range(ex41.m))
    assert is_zero_vec(img)
    # Def 3.1 gradient family is dependent here as well
    assert not rep.family_independent


def test_mfcq_both_branches_fail_at_vertex(ex41):
    rep = mpcc_mfcq_check(ex41, vec([1, 0]))
    assert len(rep.branches) == 2
    assert all(v.status is Status.FAILS for _, v in rep.branches)


def test_mfcq_holds_unique_multiplier():
    pr = parse_problem(UNIQUE_SLATER)
    rep = mpcc_mfcq_check(pr, vec([0]))
    assert not rep.via_second_multiplier
    assert len(rep.branches) == 2
    assert all(v.status is Status.HOLDS for _, v in rep.branches)
    assert rep.family_independent


def test_licq(ex41, identity_field):
    for lam in (HALF, vec([1, 0]), vec([0, 1])):
        v = mpcc_licq_check(ex41, lam)
        assert v.status is Status.FAILS
    pr = parse_problem(UNIQUE_SLATER)
    assert mpcc_licq_check(pr, vec([0])).status is Status.HOLDS
    assert mpcc_licq_check(identity_field, ()).status is Status.HOLDS


def _reference_linearized_piece():
    # {1.5 v1 = u1, 1.5 v2 = u2, mu1 + mu2 = 0, v3 = 0,
    #  -2u1 - u2 <= 0, -u1 - 2u2 <= 0} in (u1,u2,v1,v2,v3,mu1,mu2)
    C = mat([
        ["-1", 0, "3/2", 0, 0, 0, 0],
        [0, "-1", 0, "3/2", 0, 0, 0],
        [0, 0, 0, 0, 0, 1, 1],
        [0, 0, 0, 0, 1, 0, 0],
    ])
    A = mat([
        ["-2", "-1", 0, 0, 0, 0, 0],
        ["-1", "-2", 0, 0, 0, 0, 0],
    ])
    return Polyhedron(A=A, b=zeros(2), C=C, d=zeros(4), dim=7)


def test_linearized_cone_matches_reference_system(ex41):
    cone = mpec_linearized_cone(ex41, HALF)
    assert len(cone.pieces) == 1
    assert set_equal(cone.pieces[0], _reference_linearized_piece())


def test_linearized_cone_piece_count(ex41, identity_field):
    assert len(mpec_linearized_cone(ex41, vec([1, 0])).pieces) == 2
    assert len(mpec_linearized_cone(identity_field, ()).pieces) == 1


def test_linearized_cone_membership(ex41):
    cone = mpec_linearized_cone(ex41, HALF)
    d1 = vec([3, 0, 2, 0, 0, 0, 0])
    d2 = vec([3, 3, 2, 2, 0, 0, 0])
    assert cone.contains(d1)
    assert cone.contains(d2)
    assert not cone.contains(vec([3, 0, 0, 0, 0, 0, 0]))


def test_stationarity_weak_infeasible_off_center(ex41):
    for lam in (vec([1, 0]), vec([0, 1]), vec(["7/10", "3/10"])):
        res = stationarity_check(ex41, lam, "W")
        assert not res.feasible


def test_stationarity_weak_feasible_at_center(ex41):
    res = stationarity_check(ex41, HALF, "W")
    assert res.feasible
    mult = res.multipliers
    # re-verify the stationarity rows exactly
    dF_x = vec([1, 1])
    nu, gamma, rho = mult["nu"], mult["gamma"], mult["rho"]
    assert nu == vec([1, 1, 0])
    assert gamma[0] + gamma[1] == 1
    # x-rows: 1 - nu_k + G-part = 0 with rho >= 0
    assert all(r >= 0 for r in rho)
    assert 1 - nu[0] - rho[0] - 2 * rho[1] == 0
    assert 1 - nu[1] - 2 * rho[0] - rho[1] == 0


def test_stationarity_m_mode(ex41):
    assert not stationarity_check(ex41, vec([1, 0]), "M").feasible
    assert stationarity_check(ex41, HALF, "M").feasible


def test_stationarity_requires_objective(ex41_reversed):
    with pytest.raises(MissingObjective):
        stationarity_check(ex41_reversed, vec([0, 1]), "W")


def test_prop_second_multiplier_random_branches():
    # dependent active gradients guarantee a nonunique multiplier, which
    # must defeat MFCQ on every branch
    rng = random.Random(99)
    for _ in range(20):
        m = rng.randint(1, 3)
        coeffs = [F(rng.randint(-2, 2)) for _ in range(m)]
        if all(c == 0 for c in coeffs):
            coeffs[0] = F(1)
        row = " + ".join(f"{c}*y{j+1}" for j, c in enumerate(coeffs))
        lam_bar = (F(rng.randint(1, 3)), F(rng.randint(1, 3)))
        ystar = tuple(-(lam_bar[0] + lam_bar[1]) * c for c in coeffs)
        phi_exprs = [str(v) for v in ystar]
        text = f"""
[dims]
n = 0
m = {m}
p = 0
q = 2

[functions]
phi = [{", ".join(repr(s) for s in phi_exprs)}]
g = ["{row}", "{row}"]
G = []

[point]
x = []
y = [{", ".join(['"0"'] * m)}]
"""
        pr = parse_problem(text)
        rep = mpcc_mfcq_check(pr, vec(lam_bar))
        assert all(v.status is Status.FAILS for _, v in rep.branches)
        licq = mpcc_licq_check(pr, vec(lam_bar))
        assert licq.status is Status.FAILS


@pytest.mark.slow
def test_gcq_evidence_directions(ex41):
    known_tangent = Polyhedron(
        A=mat([["-1", 0, 0, 0, 0, 0, 0]]), b=zeros(1),
        C=mat([
            [1, "-1", 0, 0, 0, 0, 0],      # u1 = u2
            ["-2/3", 0, 1, 0, 0, 0, 0],    # v1 = 2/3 u1
            ["-2/3", 0, 0, 1, 0, 0, 0],    # v2 = 2/3 u1
            [0, 0, 0, 0, 1, 0, 0],         # v3 = 0
            [0, 0, 0, 0, 0, 1, 1],         # mu1 + mu2 = 0
        ]), d=zeros(5), dim=7)
    d1 = vec([3, 0, 2, 0, 0, 0, 0])
    ev1 = gcq_evidence(ex41, HALF, d1, budget=120, seed=0,
                       expected_tangent=known_tangent)
    assert ev1.in_linearized_cone
    assert ev1.expected_member is False
    assert all(r >= 0.05 for r in ev1.ratios)
    assert ev1.tag == "GACQ_VIOLATION_EVIDENCE"

    d2 = vec([3, 3, 2, 2, 0, 0, 0])
    ev2 = gcq_evidence(ex41, HALF, d2, budget=120, seed=0,
                       expected_tangent=known_tangent)
    assert ev2.expected_member is True
    assert ev2.ratios[-1] < 1e-3
    assert ev2.tag == "TANGENT_CONSISTENT"

    ev0 = gcq_evidence(ex41, HALF, zeros(7), budget=40, seed=0)
    assert ev0.tag == "TANGENT_CONSISTENT"
    assert all(r == 0 for r in ev0.ratios)

    with pytest.raises(DirectionNotInLinCone):
        gcq_evidence(ex41, HALF, vec([3, 0, 0, 0, 0, 0, 0]))
