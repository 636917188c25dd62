import random
from fractions import Fraction as F

import pytest

from mpec_cq.exactmath import dot, mat, vec, zeros
from mpec_cq.polyhedra import (
    DisjunctiveSet,
    EmptySetError,
    PointNotInSet,
    PolyCone,
    Polyhedron,
    affine_image,
    dd_convert,
    directional_normal_cone_poly,
    disjunctive_polar,
    extreme_points,
    minkowski_sum,
    normal_cone_poly,
    polar,
    remove_redundant_rows,
    set_equal,
    tangent_cone_poly,
)


def test_dd_positive_orthant():
    k = PolyCone(A=mat([[-1, 0], [0, -1]]))
    rays, lin = k.generators()
    assert rays == (vec([0, 1]), vec([1, 0]))
    assert lin == ()


def test_dd_halfspace_cone():
    # {v in R^3 : v3 <= 0}: plane of lineality plus one ray
    k = PolyCone(A=mat([[0, 0, 1]]))
    rays, lin = k.generators()
    assert rays == (vec([0, 0, -1]),)
    assert set(lin) == {vec([1, 0, 0]), vec([0, 1, 0])}


def test_dd_trivial_cone():
    k = PolyCone(C=mat([[1, 0], [0, 1]]))
    rays, lin = k.generators()
    assert rays == () and lin == ()
    assert k.is_trivial()


def test_polar_full_space():
    k = PolyCone(A=(), dim=2)
    assert polar(k).is_trivial()


def test_polar_subspace_is_orthocomplement():
    k = PolyCone(C=mat([[0, 0, 1]]))
    p = polar(k)
    rays, lin = p.generators()
    assert rays == ()
    assert lin == (vec([0, 0, 1]),)


def test_polar_single_ray_brute_force():
    k = PolyCone.from_generators(rays=[vec([1, 1])])
    p = polar(k)
    # brute-force sign check over an integer grid
    for x1 in range(-4, 5):
        for x2 in range(-4, 5):
            want = x1 + x2 <= 0
            assert p.contains(vec([x1, x2])) == want


def test_extreme_points_segment():
    lam = Polyhedron(A=mat([[-1, 0], [0, -1]]), b=vec([0, 0]),
                     C=mat([[1, 1]]), d=vec([1]))
    ep = extreme_points(lam)
    assert not ep.not_pointed
    assert set(ep.points) == {vec([1, 0]), vec([0, 1])}


def test_extreme_points_unit_square():
    sq = Polyhedron(A=mat([[1, 0], [-1, 0], [0, 1], [0, -1]]),
                    b=vec([1, 0, 1, 0]))
    ep = extreme_points(sq)
    assert len(ep.points) == 4


def test_extreme_points_ray_set():
    p = Polyhedron(A=mat([[-1, 0], [0, -1]]), b=vec([0, 0]),
                   C=mat([[1, -1]]), d=vec([0]))
    ep = extreme_points(p)
    assert ep.points == (vec([0, 0]),)
    assert not ep.not_pointed
    assert p.vrep().rays == (vec([1, 1]),)


def test_extreme_points_empty():
    p = Polyhedron(A=mat([[1], [-1]]), b=vec([-1, -1]))
    with pytest.raises(EmptySetError):
        extreme_points(p)


def test_extreme_points_not_pointed():
    p = Polyhedron(A=mat([[1, 0]]), b=vec([0]))
    ep = extreme_points(p)
    assert ep.not_pointed and ep.points == ()


def test_tangent_normal_negative_orthant():
    p = Polyhedron(A=mat([[1, 0], [0, 1]]), b=vec([0, 0]))
    t = tangent_cone_poly(p, vec([0, -1]))
    assert t.contains(vec([-1, 5])) and t.contains(vec([-1, -5]))
    assert not t.contains(vec([1, 0]))
    n = normal_cone_poly(p, vec([0, 0]))
    rays, lin = n.generators()
    assert rays == (vec([0, 1]), vec([1, 0])) and lin == ()
    with pytest.raises(PointNotInSet):
        tangent_cone_poly(p, vec([1, 1]))


def test_tangent_cone_product_rule():
    # tangent of a product polyhedron equals the product of tangents
    p1 = Polyhedron(A=mat([[1]]), b=vec([0]))
    p2 = Polyhedron(A=mat([[1]]), b=vec([0]))
    prod = Polyhedron(A=mat([[1, 0], [0, 1]]), b=vec([0, 0]))
    z = vec([0, 0])
    t = tangent_cone_poly(prod, z)
    t1 = tangent_cone_poly(p1, vec([0]))
    t2 = tangent_cone_poly(p2, vec([0]))
    for a in range(-2, 3):
        for b in range(-2, 3):
            assert t.contains(vec([a, b])) == (
                t1.contains(vec([a])) and t2.contains(vec([b])))


def test_directional_normal_cone():
    p = Polyhedron(A=mat([[1, 0], [0, 1]]), b=vec([0, 0]))
    z = vec([0, 0])
    n = directional_normal_cone_poly(p, z, vec([-1, 0]))
    rays, lin = n.generators()
    assert rays == (vec([0, 1]),) and lin == ()
    full = directional_normal_cone_poly(p, z, vec([0, 0]))
    assert set_equal(full, normal_cone_poly(p, z))
    empty = directional_normal_cone_poly(p, z, vec([1, 0]))
    assert empty.is_empty()


def test_directional_normal_cone_matches_limit_definition():
    # brute force the limit definition: for convex polyhedra the regular
    # normal cone along z + t u' stabilizes for small t and perturbations u'
    # of u inside the tangent cone; membership must agree with the exact
    # directional normal cone at every t in the schedule
    p = Polyhedron(A=mat([[1, 1], [1, -1], [-1, 0]]), b=vec([0, 0, 1]))
    z = vec([0, 0])
    directions = [vec([-1, 0]), vec([-1, 1]), vec([-2, 1]), vec([0, 0])]
    candidates = [vec([1, 1]), vec([1, -1]), vec([0, 1]), vec([2, 0]),
                  vec([-1, 0]), vec([0, 0])]
    tangent = tangent_cone_poly(p, z)
    for u in directions:
        ncone = directional_normal_cone_poly(p, z, u)
        for zs in candidates:
            exact = ncone.contains(zs)
            hits = []
            for k in (1, 2, 3, 4):
                t = F(1, 10 ** k)
                zt = vec([z[0] + t * u[0], z[1] + t * u[1]])
                hits.append(normal_cone_poly(p, zt).contains(zs))
            # stabilized by t = 1e-2 at the latest; all later samples agree
            assert all(h == exact for h in hits[1:])
            if any(x != 0 for x in u):
                # a hit along a perturbed direction u' -> u certifies
                # membership (the limit definition is existential over
                # perturbation sequences); the converse need not hold
                eps = F(1, 1000)
                up = vec([u[0] * (1 + eps), u[1] * (1 - eps)])
                if tangent.contains(up):
                    zt = vec([z[0] + F(1, 10 ** 4) * up[0],
                              z[1] + F(1, 10 ** 4) * up[1]])
                    if normal_cone_poly(p, zt).contains(zs):
                        assert exact


def test_affine_image_multiplier_set():
    # grad g(ybar)^T maps the multiplier segment to the single point (0,0,1)
    lam = Polyhedron(A=mat([[-1, 0], [0, -1]]), b=vec([0, 0]),
                     C=mat([[1, 1]]), d=vec([1]))
    img = affine_image(lam, mat([[0, 0], [0, 0], [1, 1]]))
    assert img.contains(vec([0, 0, 1]))
    v = img.vrep()
    assert v.vertices == (vec([0, 0, 1]),) and v.rays == () and v.lineality == ()


def test_affine_image_identity_and_projection():
    sq = Polyhedron(A=mat([[1, 0], [-1, 0], [0, 1], [0, -1]]),
                    b=vec([1, 0, 1, 0]))
    same = affine_image(sq, mat([[1, 0], [0, 1]]))
    assert set_equal(sq, same)
    seg = affine_image(sq, mat([[1, 0]]))
    ep = extreme_points(seg)
    assert set(ep.points) == {vec([0]), vec([1])}


def test_disjunctive_polar():
    plus = PolyCone(A=mat([[-1, 0], [0, -1]]))
    minus = PolyCone(A=mat([[1, 0], [0, 1]]))
    d = DisjunctiveSet((plus, minus))
    assert disjunctive_polar(d).is_trivial()
    single = disjunctive_polar(DisjunctiveSet((plus,)))
    assert set_equal(single, polar(plus))
    with_full = DisjunctiveSet((plus, PolyCone(A=(), dim=2)))
    assert disjunctive_polar(with_full).is_trivial()


def test_remove_redundant_rows():
    p = Polyhedron(A=mat([[1, 0], [1, 0], [2, 0], [0, 1]]), b=vec([1, 2, 4, 1]))
    q = remove_redundant_rows(p)
    assert len(q.A) == 2
    assert set_equal(p, q)


def test_minkowski_sum():
    seg = Polyhedron.from_vrep(vertices=[vec([0, 0]), vec([1, 0])])
    k = PolyCone.from_generators(rays=[vec([0, 1])])
    s = minkowski_sum(seg, k)
    assert s.contains(vec(["1/2", 7]))
    assert not s.contains(vec([0, -1]))


def _random_cone(rng) -> PolyCone:
    dim = rng.randint(1, 5)
    ngen = rng.randint(1, 8)
    rays = []
    for _ in range(ngen):
        r = tuple(F(rng.randint(-3, 3)) for _ in range(dim))
        if any(x != 0 for x in r):
            rays.append(r)
    if not rays:
        rays = [tuple(F(1) for _ in range(dim))]
    return PolyCone.from_generators(rays=rays)


def test_polar_involution_random():
    rng = random.Random(414213)
    for _ in range(100):
        k = _random_cone(rng)
        kk = polar(polar(k))
        assert set_equal(k, kk)


def test_dd_round_trip_random():
    rng = random.Random(271828)
    for _ in range(60):
        dim = rng.randint(1, 4)
        nrows = rng.randint(1, 6)
        A = tuple(tuple(F(rng.randint(-2, 2)) for _ in range(dim))
                  for _ in range(nrows))
        k = PolyCone(A=A, dim=dim)
        rays, lin = k.generators()
        # every original inequality is valid on all generators
        for row in A:
            assert all(dot(row, r) <= 0 for r in rays)
            assert all(dot(row, l) == 0 for l in lin)
        # regenerated H-rep describes the same set
        k2 = PolyCone.from_generators(rays, lin, dim=dim)
        assert set_equal(k, k2)


def test_empty_marker_is_explicit():
    e = Polyhedron.empty_set(3)
    assert e.is_empty()
    assert not e.contains(zeros(3))
    assert e.vrep() == e.vrep()
    assert not e.to_json_dict()["vertices"]


def test_vrep_feasibility_consistency_random():
    rng = random.Random(99)
    for _ in range(40):
        dim = rng.randint(1, 3)
        nrows = rng.randint(1, 5)
        A = tuple(tuple(F(rng.randint(-2, 2)) for _ in range(dim))
                  for _ in range(nrows))
        b = tuple(F(rng.randint(-2, 2)) for _ in range(nrows))
        p = Polyhedron(A=A, b=b)
        v = p.vrep()
        if p.is_empty():
            assert v.vertices == () and v.rays == () and v.lineality == ()
        else:
            assert v.vertices or v.rays or v.lineality
