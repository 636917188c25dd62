import random
from fractions import Fraction as F

import pytest

from mpec_cq.exactmath import (
    BasisInfo,
    DimensionMismatch,
    LpProblem,
    LpStatus,
    Sense,
    dot,
    linear_basis,
    lp_solve,
    mat,
    matvec,
    primitive,
    rat,
    vec,
)


def test_rat_parsing():
    assert rat("1/2") == F(1, 2)
    assert rat("-3") == F(-3)
    assert rat("0.25") == F(1, 4)
    with pytest.raises(TypeError):
        rat(0.5)


def test_primitive():
    assert primitive(vec(["1/2", "1/3"])) == vec([3, 2])
    assert primitive(vec([-2, 4])) == vec([-1, 2])
    assert primitive(vec([0, 0])) == vec([0, 0])


def test_linear_basis_identity():
    info = linear_basis(mat([[1, 0, 0], [0, 1, 0], [0, 0, 1]]))
    assert info.rank == 3
    assert info.nullspace_basis == ()
    assert info.row_independent


def test_linear_basis_duplicate_gradients():
    # both lower-level gradients at the reference point equal (0,0,1)
    info = linear_basis(mat([[0, 0, 1], [0, 0, 1]]))
    assert info.rank == 1
    assert not info.row_independent
    assert len(info.nullspace_basis) == 2


def test_linear_basis_nullspace():
    M = mat([[1, 0, 0], [0, 1, 0]])
    info = linear_basis(M)
    assert info.nullspace_basis == (vec([0, 0, 1]),)
    for v in info.nullspace_basis:
        assert all(x == 0 for x in matvec(M, v))


def test_lp_single_constraint():
    out = lp_solve(LpProblem(objective=vec([1]), A=mat([[1]]), b=vec([1])))
    assert out.status is LpStatus.OPTIMAL
    assert out.x == vec([1])
    assert out.value == 1
    assert out.dual_ineq == vec([1])


def test_lp_multiplier_segment():
    # max l1  s.t.  l >= 0, l1 + l2 = 1
    p = LpProblem(objective=vec([1, 0]),
                  A=mat([[-1, 0], [0, -1]]), b=vec([0, 0]),
                  C=mat([[1, 1]]), d=vec([1]))
    out = lp_solve(p)
    assert out.status is LpStatus.OPTIMAL
    assert out.x == vec([1, 0])
    assert out.value == 1


def test_lp_infeasible_farkas():
    # x <= -1 and -x <= -1 cannot both hold
    p = LpProblem(objective=vec([0]), A=mat([[1], [-1]]), b=vec([-1, -1]))
    out = lp_solve(p)
    assert out.status is LpStatus.INFEASIBLE
    assert out.farkas == vec([1, 1])


def test_lp_unbounded_ray():
    out = lp_solve(LpProblem(objective=vec([1]), A=mat([[-1]]), b=vec([0])))
    assert out.status is LpStatus.UNBOUNDED
    r = out.ray
    assert dot(vec([1]), r) > 0 and dot(vec([-1]), r) <= 0


def test_lp_min_sense():
    p = LpProblem(objective=vec([1, 1]), A=mat([[-1, 0], [0, -1]]),
                  b=vec([0, 0]), sense=Sense.MIN)
    out = lp_solve(p)
    assert out.status is LpStatus.OPTIMAL
    assert out.value == 0


def test_lp_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        LpProblem(objective=vec([1, 2]), A=mat([[1]]), b=vec([0]))


def test_lp_is_pure_function():
    p = LpProblem(objective=vec([2, -1]), A=mat([[1, 1], [-1, 2]]),
                  b=vec([3, 4]), C=mat([[1, -1]]), d=vec([0]))
    a, b = lp_solve(p), lp_solve(p)
    assert a == b


def _combined_rows(p: LpProblem):
    rows = list(p.A) + list(p.C) + [tuple(-x for x in r) for r in p.C]
    rhs = list(p.b) + list(p.d) + [-x for x in p.d]
    return rows, rhs


def _check_outcome(p: LpProblem, out):
    n = len(p.objective)
    if out.status is LpStatus.OPTIMAL:
        for row, bi in zip(p.A, p.b):
            assert dot(row, out.x) <= bi
        for row, di in zip(p.C, p.d):
            assert dot(row, out.x) == di
        assert all(y >= 0 for y in out.dual_ineq)
        # dual feasibility and exactly zero gap (MAX convention; MIN negates c)
        c = list(p.objective) if p.sense is Sense.MAX else [-x for x in p.objective]
        for j in range(n):
            lhs = sum((p.A[i][j] * out.dual_ineq[i] for i in range(len(p.A))), F(0))
            lhs += sum((p.C[i][j] * out.dual_eq[i] for i in range(len(p.C))), F(0))
            assert lhs == c[j]
        dual_val = dot(vec(p.b), out.dual_ineq) + dot(vec(p.d), out.dual_eq)
        primal_val = sum((cj * xj for cj, xj in zip(c, out.x)), F(0))
        assert dual_val == primal_val
    elif out.status is LpStatus.INFEASIBLE:
        rows, rhs = _combined_rows(p)
        y = out.farkas
        assert len(y) == len(rows)
        assert all(v >= 0 for v in y)
        for j in range(n):
            assert sum((rows[i][j] * y[i] for i in range(len(rows))), F(0)) == 0
        assert sum((rhs[i] * y[i] for i in range(len(rows))), F(0)) < 0
    else:
        r = out.ray
        for row in p.A:
            assert dot(row, r) <= 0
        for row in p.C:
            assert dot(row, r) == 0
        improve = dot(vec(p.objective), r)
        assert improve > 0 if p.sense is Sense.MAX else improve < 0


def test_lp_random_certificates():
    rng = random.Random(20240817)
    statuses = set()
    for _ in range(200):
        n = rng.randint(1, 6)
        n_ineq = rng.randint(0, 6)
        n_eq = rng.randint(0, 2)
        if n_ineq + n_eq == 0:
            n_ineq = 1
        rnd = lambda: F(rng.randint(-4, 4))
        p = LpProblem(
            objective=tuple(rnd() for _ in range(n)),
            A=tuple(tuple(rnd() for _ in range(n)) for _ in range(n_ineq)),
            b=tuple(rnd() for _ in range(n_ineq)),
            C=tuple(tuple(rnd() for _ in range(n)) for _ in range(n_eq)),
            d=tuple(rnd() for _ in range(n_eq)),
            sense=rng.choice([Sense.MIN, Sense.MAX]),
        )
        out = lp_solve(p)
        statuses.add(out.status)
        _check_outcome(p, out)
    assert statuses == {LpStatus.OPTIMAL, LpStatus.INFEASIBLE, LpStatus.UNBOUNDED}


def test_linear_basis_rank_nullity_random():
    rng = random.Random(7)
    for _ in range(100):
        nr, nc = rng.randint(1, 5), rng.randint(1, 5)
        M = tuple(tuple(F(rng.randint(-3, 3)) for _ in range(nc)) for _ in range(nr))
        info = linear_basis(M)
        assert info.rank + len(info.nullspace_basis) == nc
        for v in info.nullspace_basis:
            assert all(x == 0 for x in matvec(M, v))
