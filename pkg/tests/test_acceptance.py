"""Acceptance criteria, one test per criterion at its stated tolerance.

Each test prints one [criterion N] PASS/FAIL line (run pytest with -s to see
them inline); every assertion is exact unless the criterion itself states a
numerical tolerance.
"""
import json
from contextlib import contextmanager
from fractions import Fraction as F
from pathlib import Path

import pytest

from mpec_cq.certify import Status, mscq_cascade, soscms_check
from mpec_cq.cli import main
from mpec_cq.exactmath import vec, zeros
from mpec_cq.lowerlevel import graph_tangent_member, graph_tangent_slice
from mpec_cq.model import parse_poly
from mpec_cq.mpccdiag import mpec_linearized_cone, stationarity_check
from mpec_cq.oracle import tangent_ratio_probe
from mpec_cq.polyhedra import Polyhedron, set_equal
from mpec_cq.exactmath import mat

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"
EX41 = str(PROBLEMS / "ex41.toml")


@contextmanager
def criterion(num: int, title: str):
    try:
        yield
    except BaseException:
        print(f"[criterion {num}] FAIL  {title}")
        raise
    print(f"[criterion {num}] PASS  {title}")


def run_json(capsys, argv):
    code = main(argv + ["--json"])
    return code, json.loads(capsys.readouterr().out)


def test_criterion_1_multiplier_analysis(capsys):
    with criterion(1, "multiplier polyhedron and extreme points, exact"):
        code, doc = run_json(capsys, ["analyze", EX41])
        assert code == 0
        res = doc["result"]
        ms = res["multiplier_set"]
        # H-rep: exactly the equality row (1,1) with rhs 1 plus lam >= 0
        assert ms["eq"] == [["1", "1"]]
        assert ms["eq_rhs"] == ["1"]
        assert sorted(ms["ineq"]) == [["-1", "0"], ["0", "-1"]]
        assert ms["rhs"] == ["0", "0"]
        assert sorted(res["extreme_points"]) == [["0", "1"], ["1", "0"]]
        assert res["unique"] is False


def test_criterion_2_mpcc_mfcq_licq_failure(capsys):
    with criterion(2, "MPCC-MFCQ fails on every branch; MPCC-LICQ fails"):
        code, doc = run_json(capsys, ["diagnose-mpcc", EX41,
                                      "--lambda", "1/2,1/2"])
        assert code == 1
        branches = doc["result"]["mfcq"]["branches"]
        assert len(branches) == 1
        assert all(b["verdict"]["status"] == "FAILS" for b in branches)
        assert doc["result"]["licq"]["status"] == "FAILS"

        code2, doc2 = run_json(capsys, ["diagnose-mpcc", EX41,
                                        "--lambda", "1,0"])
        assert code2 == 1
        branches2 = doc2["result"]["mfcq"]["branches"]
        assert len(branches2) == 2
        assert all(b["verdict"]["status"] == "FAILS" for b in branches2)
        assert doc2["result"]["licq"]["status"] == "FAILS"


def test_criterion_3_weak_stationarity(ex41):
    with criterion(3, "W-stationarity infeasible off the balanced multiplier"):
        for lam in (vec([1, 0]), vec([0, 1]), vec(["7/10", "3/10"])):
            res = stationarity_check(ex41, lam, "W")
            assert not res.feasible


def test_criterion_4_linearized_cone_fidelity(ex41):
    with criterion(4, "MPEC linearized cone matches the reference system"):
        cone = mpec_linearized_cone(ex41, vec(["1/2", "1/2"]))
        assert len(cone.pieces) == 1
        reference = Polyhedron(
            A=mat([["-2", "-1", 0, 0, 0, 0, 0],
                   ["-1", "-2", 0, 0, 0, 0, 0]]),
            b=zeros(2),
            C=mat([["-1", 0, "3/2", 0, 0, 0, 0],
                   [0, "-1", 0, "3/2", 0, 0, 0],
                   [0, 0, 0, 0, 0, 1, 1],
                   [0, 0, 0, 0, 1, 0, 0]]),
            d=zeros(4), dim=7)
        assert set_equal(cone.pieces[0], reference)


@pytest.mark.slow
def test_criterion_5_gcq_gap_evidence(ex41):
    from mpec_cq.mpccdiag import gcq_evidence
    with criterion(5, "linearized-cone member with nonvanishing ratios"):
        lam = vec(["1/2", "1/2"])
        cone = mpec_linearized_cone(ex41, lam)
        d1 = vec([3, 0, 2, 0, 0, 0, 0])
        assert cone.contains(d1)
        ev1 = gcq_evidence(ex41, lam, d1, budget=200, seed=0)
        assert all(r >= 0.05 for r in ev1.ratios)
        d2 = vec([3, 3, 2, 2, 0, 0, 0])
        ev2 = gcq_evidence(ex41, lam, d2, budget=200, seed=0)
        assert ev2.ratios[-1] < 1e-3


def test_criterion_6_headline_certification(capsys):
    with criterion(6, "MSCQ certified with full prerequisite chain, "
                      "thread-count independent"):
        results = []
        for threads in range(1, 9):
            code, doc = run_json(capsys, ["certify-mscq", EX41,
                                          "--threads", str(threads)])
            assert code == 0
            results.append(doc["result"])
        first = results[0]
        assert all(r == first for r in results[1:])
        assert first["status"] == "HOLDS"
        prereqs = {p["method"]: p["status"] for p in first["prerequisites"]}
        assert prereqs == {"lower-level:nnamcq": "HOLDS",
                           "upper-level:linear": "HOLDS",
                           "nondeg_g": "HOLDS"}
        assert [e["result"] for e in first["certificate"]["phase1"]] \
            == ["POSITIVE", "POSITIVE"]


@pytest.mark.slow
def test_criterion_7_tangent_cross_validation(ex41):
    with criterion(7, "oracle classification agrees with the exact tangent "
                      "slices on 20 directions"):
        yb, ys = zeros(3), vec([0, 0, 1])
        crit_dirs = [vec([1, 0, 0]), vec([0, 1, 0]), vec([1, 1, 0]),
                     vec([2, 1, 0]), zeros(3)]
        members, nonmembers = [], []
        for v in crit_dirs:
            t = graph_tangent_slice(ex41, yb, ys, v)
            vr = t.vrep()
            base = vr.vertices[0]
            line = vr.lineality[0]
            members.append((v, base))
            members.append((v, tuple(b + 3 * l for b, l in zip(base, line))))
            shift = tuple(b + 1 for b in base)
            if not t.contains(shift):
                nonmembers.append((v, shift))
            shift2 = tuple(b - 2 if i == 0 else b
                           for i, b in enumerate(base))
            if not t.contains(shift2):
                nonmembers.append((v, shift2))
        members = members[:10]
        nonmembers = nonmembers[:10]
        assert len(members) == 10 and len(nonmembers) == 10
        for v, vs in members:
            assert graph_tangent_member(ex41, yb, ys, v, vs).member
            rep = tangent_ratio_probe(ex41, tuple(yb) + tuple(ys),
                                      tuple(v) + tuple(vs), budget=8, seed=0)
            assert rep.verdict == "RATIO_VANISHES"
            assert rep.ratios[-1] < 1e-3
        for v, vs in nonmembers:
            assert not graph_tangent_member(ex41, yb, ys, v, vs).member
            rep = tangent_ratio_probe(ex41, tuple(yb) + tuple(ys),
                                      tuple(v) + tuple(vs), budget=8, seed=0)
            assert rep.verdict != "RATIO_VANISHES"


def test_criterion_8_soscms_sanity():
    with criterion(8, "SOSCMS pinned trio"):
        Z2 = ("z1", "z2")
        neg = (parse_poly("-z1^2 - z2^2", Z2),)
        assert soscms_check(neg, zeros(2)).status is Status.HOLDS
        sq = (parse_poly("z1^2", ("z1",)),)
        v = soscms_check(sq, zeros(1))
        assert v.status is Status.FAILS
        lam, w = v.witness["lambda"], v.witness["w"]
        assert any(x > 0 for x in lam) and any(x != 0 for x in w)
        assert lam[0] * 2 * w[0] * w[0] >= 0
        pair = (parse_poly("z1", Z2), parse_poly("-z1", Z2))
        assert soscms_check(pair, zeros(2)).status is Status.FAILS
        casc = mscq_cascade(pair, zeros(2))
        assert casc.status is Status.HOLDS and casc.method == "linear"


def test_criterion_9_property_suites(ex41):
    with criterion(9, "property suites: polar involution, LP certificates, "
                      "normal-cone lemma, extreme points, homogeneity"):
        import test_exactmath
        import test_lowerlevel
        import test_polyhedra

        test_polyhedra.test_polar_involution_random()
        test_exactmath.test_lp_random_certificates()
        test_lowerlevel.test_normal_cone_lambda_independence_random()
        test_lowerlevel.test_extreme_point_gradient_independence_random(ex41)
        test_lowerlevel.test_face_extreme_points_are_extreme_multipliers_random()
        test_lowerlevel.test_min_norm_homogeneity(ex41)
