"""Exact polyhedral sets and cones over rationals.

H-representations are ``A x <= b, C x = d``; V-representations are
(vertices, rays, lineality).  Conversion both ways runs a double
description pass with combinatorial adjacency tests, primitive integer
normalization and lexicographically sorted output, so results are
canonical and deterministic.  The empty set carries an explicit flag and
is never encoded by contradictory rows left implicit.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exactmath import (
    Mat,
    ONE,
    Vec,
    ZERO,
    LpProblem,
    LpStatus,
    Sense,
    dot,
    is_zero_vec,
    linear_basis,
    lp_solve,
    mat,
    matvec,
    primitive,
    vec,
    zeros,
)


class EmptySetError(ValueError):
    pass


class PointNotInSet(ValueError):
    pass


def _rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    rows = [list(r) for r in rows]
    nrows, ncols = len(rows), (len(rows[0]) if rows else 0)
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pv = rows[r][c]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return rows[:r], pivots


def _nullspace(rows: Mat, dim: int) -> tuple[Vec, ...]:
    if not rows:
        return tuple(tuple(ONE if j == i else ZERO for j in range(dim))
                     for i in range(dim))
    return linear_basis(rows).nullspace_basis


def _canonical_subspace_basis(gens: list[Vec], dim: int) -> tuple[Vec, ...]:
    """Canonical (rref, primitive, sorted) basis of span(gens)."""
    nz = [list(g) for g in gens if not is_zero_vec(g)]
    if not nz:
        return ()
    red, _ = _rref(nz)
    basis = sorted(primitive(tuple(r)) for r in red)
    return tuple(basis)


def _dd_pointed(W: list[Vec], dim: int) -> tuple[Vec, ...]:
    """Extreme rays of the pointed cone {u : W u <= 0} with rank(W) == dim.

    Classic double description: seed with a nonsingular row subsystem, then
    insert the remaining rows one at a time, combining adjacent rays across
    the new hyperplane.  Adjacency is the combinatorial test on active sets.
    """
    if dim == 0:
        return ()
    # greedy independent row selection in input order
    chosen: list[int] = []
    rows_so_far: list[Vec] = []
    for idx, row in enumerate(W):
        cand = rows_so_far + [row]
        if linear_basis(tuple(cand)).rank == len(cand):
            chosen.append(idx)
            rows_so_far.append(row)
            if len(chosen) == dim:
                break
    assert len(chosen) == dim, "cone not pointed: rank deficiency"
    # invert the basis matrix B: rays are the columns of -B^{-1}
    B = [list(W[i]) for i in chosen]
    aug = [B[i] + [ONE if j == i else ZERO for j in range(dim)] for i in range(dim)]
    red, piv = _rref(aug)
    assert piv == list(range(dim))
    Binv_cols = [tuple(red[i][dim + j] for i in range(dim)) for j in range(dim)]
    rays = [primitive(tuple(-x for x in col)) for col in Binv_cols]
    # active sets over global row indices
    active = []
    for j in range(dim):
        act = {chosen[i] for i in range(dim) if i != j}
        active.append(act)
    processed = set(chosen)

    for idx, row in enumerate(W):
        if idx in processed:
            continue
        processed.add(idx)
        vals = [dot(row, r) for r in rays]
        neg = [k for k, v in enumerate(vals) if v < 0]
        zero = [k for k, v in enumerate(vals) if v == 0]
        pos = [k for k, v in enumerate(vals) if v > 0]
        if not pos:
            for k in zero:
                active[k].add(idx)
            continue
        new_rays: list[Vec] = []
        new_active: list[set] = []
        for kp in pos:
            for kn in neg:
                common = active[kp] & active[kn]
                adjacent = not any(
                    k not in (kp, kn) and common <= active[k]
                    for k in range(len(rays)))
                if not adjacent:
                    continue
                comb = tuple(vals[kp] * rays[kn][t] - vals[kn] * rays[kp][t]
                             for t in range(dim))
                comb = primitive(comb)
                new_rays.append(comb)
                new_active.append(common | {idx})
        keep_rays = [rays[k] for k in neg + zero]
        keep_active = [active[k] | ({idx} if k in zero else set())
                       for k in neg + zero]
        rays = keep_rays + new_rays
        active = keep_active + new_active
        # dedupe (identical rays can arise from distinct adjacent pairs)
        seen: dict[Vec, int] = {}
        ded_rays, ded_active = [], []
        for r, a in zip(rays, active):
            if r in seen:
                ded_active[seen[r]] |= a
            else:
                seen[r] = len(ded_rays)
                ded_rays.append(r)
                ded_active.append(set(a))
        rays, active = ded_rays, ded_active
    return tuple(sorted(rays))


def dd_cone(ineq: Mat, eq: Mat, dim: int) -> tuple[tuple[Vec, ...], tuple[Vec, ...]]:
    """V-rep (extreme rays, lineality basis) of {x : ineq.x <= 0, eq.x = 0}."""
    stacked = tuple(ineq) + tuple(eq)
    lineality = _canonical_subspace_basis(list(_nullspace(stacked, dim)), dim)
    # parametrize the equality subspace, then factor out the lineality
    Q = _nullspace(eq, dim)  # x = Q^T s
    if not Q:
        return (), lineality
    R = tuple(tuple(dot(row, q) for q in Q) for row in ineq)  # rows in s-coords
    Ls = _nullspace(R, len(Q))
    if len(Ls) == len(Q):
        return (), lineality
    _, piv = _rref([list(r) for r in R])
    P = [tuple(ONE if j == p else ZERO for j in range(len(Q))) for p in piv]
    W = [tuple(dot(row, pcol) for pcol in P) for row in R]
    rays_u = _dd_pointed(W, len(P))
    rays = []
    for ru in rays_u:
        s = [ZERO] * len(Q)
        for coef, pcol in zip(ru, P):
            s = [si + coef * pi for si, pi in zip(s, pcol)]
        x = [ZERO] * dim
        for coef, qrow in zip(s, Q):
            x = [xi + coef * qi for xi, qi in zip(x, qrow)]
        if not is_zero_vec(tuple(x)):
            rays.append(primitive(tuple(x)))
    return tuple(sorted(set(rays))), lineality


@dataclass(frozen=True)
class VRep:
    vertices: tuple[Vec, ...]
    rays: tuple[Vec, ...]
    lineality: tuple[Vec, ...]


class Polyhedron:
    """{x : A x <= b, C x = d} with lazily cached exact V-representation."""

    def __init__(self, A: Mat = (), b: Vec = (), C: Mat = (), d: Vec = (),
                 dim: int | None = None, empty: bool = False):
        self.A = mat(A)
        self.b = vec(b)
        self.C = mat(C)
        self.d = vec(d)
        if dim is None:
            if self.A:
                dim = len(self.A[0])
            elif self.C:
                dim = len(self.C[0])
            else:
                raise ValueError("dimension required for unconstrained set")
        self.dim = dim
        self._empty = empty
        self._empty_known = empty
        self._vrep: VRep | None = None

    @classmethod
    def empty_set(cls, dim: int) -> "Polyhedron":
        return cls(dim=dim, empty=True)

    @classmethod
    def from_vrep(cls, vertices=(), rays=(), lineality=(), dim: int | None = None
                  ) -> "Polyhedron":
        vertices = tuple(vec(v) for v in vertices)
        rays = tuple(vec(r) for r in rays)
        lineality = tuple(vec(l) for l in lineality)
        if dim is None:
            probe = (vertices + rays + lineality)
            if not probe:
                raise ValueError("dimension required for empty generator list")
            dim = len(probe[0])
        if not vertices and not rays and not lineality:
            return cls.empty_set(dim)
        if not vertices:
            vertices = (zeros(dim),)  # a cone's V-rep is anchored at 0
        # homogenize, take the polar cone, read its generators off as H-rows
        gens = [v + (ONE,) for v in vertices] + [r + (ZERO,) for r in rays]
        lins = [l + (ZERO,) for l in lineality]
        prays, plin = dd_cone(tuple(gens), tuple(lins), dim + 1)
        A, b, C, d = [], [], [], []
        for a in prays:
            if is_zero_vec(a[:dim]):
                continue  # the homogenization row t >= 0
            A.append(a[:dim])
            b.append(-a[dim])
        for a in plin:
            if is_zero_vec(a[:dim]):
                continue
            C.append(a[:dim])
            d.append(-a[dim])
        p = cls(tuple(A), tuple(b), tuple(C), tuple(d), dim=dim)
        p._empty = False
        p._empty_known = True
        return p

    # -- basic predicates ---------------------------------------------------

    def is_empty(self) -> bool:
        if not self._empty_known:
            out = lp_solve(LpProblem(objective=zeros(self.dim), A=self.A,
                                     b=self.b, C=self.C, d=self.d))
            self._empty = out.status is LpStatus.INFEASIBLE
            self._empty_known = True
        return self._empty

    def contains(self, x: Vec) -> bool:
        if self._empty:
            return False
        x = vec(x)
        if len(x) != self.dim:
            return False
        return (all(dot(r, x) <= bi for r, bi in zip(self.A, self.b))
                and all(dot(r, x) == di for r, di in zip(self.C, self.d)))

    # -- V-representation ---------------------------------------------------

    def vrep(self) -> VRep:
        if self._vrep is not None:
            return self._vrep
        if self.is_empty():
            self._vrep = VRep((), (), ())
            return self._vrep
        n = self.dim
        ineq = tuple(r + (-bi,) for r, bi in zip(self.A, self.b))
        ineq += ((zeros(n) + (-ONE,)),)  # homogenization: t >= 0
        eq = tuple(r + (-di,) for r, di in zip(self.C, self.d))
        hrays, hlin = dd_cone(ineq, eq, n + 1)
        vertices, rays = [], []
        for r in hrays:
            t = r[n]
            if t > 0:
                vertices.append(tuple(x / t for x in r[:n]))
            else:
                rays.append(primitive(r[:n]))
        lineality = _canonical_subspace_basis([l[:n] for l in hlin], n)
        self._vrep = VRep(tuple(sorted(vertices)), tuple(sorted(set(rays))),
                          lineality)
        return self._vrep

    def to_json_dict(self) -> dict:
        def rows(M):
            return [[str(x) for x in r] for r in M]

        if self.is_empty():
            return {"dim": self.dim, "empty": True, "ineq": [], "rhs": [],
                    "eq": [], "eq_rhs": [], "vertices": [], "rays": [],
                    "lineality": []}
        v = self.vrep()
        return {
            "dim": self.dim,
            "empty": False,
            "ineq": rows(self.A),
            "rhs": [str(x) for x in self.b],
            "eq": rows(self.C),
            "eq_rhs": [str(x) for x in self.d],
            "vertices": rows(v.vertices),
            "rays": rows(v.rays),
            "lineality": rows(v.lineality),
        }

    def __repr__(self):
        if self._empty:
            return f"Polyhedron(empty, dim={self.dim})"
        return (f"Polyhedron(dim={self.dim}, {len(self.A)} ineq, "
                f"{len(self.C)} eq)")


class PolyCone(Polyhedron):
    """A polyhedron with zero right-hand sides: b = 0, d = 0."""

    def __init__(self, A: Mat = (), C: Mat = (), dim: int | None = None,
                 empty: bool = False):
        A = mat(A)
        C = mat(C)
        super().__init__(A, zeros(len(A)), C, zeros(len(C)), dim=dim,
                         empty=empty)

    @classmethod
    def empty_set(cls, dim: int) -> "PolyCone":
        return cls(dim=dim, empty=True)

    @classmethod
    def from_generators(cls, rays=(), lineality=(), dim: int | None = None
                        ) -> "PolyCone":
        rays = tuple(vec(r) for r in rays)
        lineality = tuple(vec(l) for l in lineality)
        if dim is None:
            probe = rays + lineality
            if not probe:
                raise ValueError("dimension required")
            dim = len(probe[0])
        prays, plin = dd_cone(rays, lineality, dim)
        k = cls(A=prays, C=plin, dim=dim)
        k._empty = False
        k._empty_known = True
        return k

    def generators(self) -> tuple[tuple[Vec, ...], tuple[Vec, ...]]:
        v = self.vrep()
        return v.rays, v.lineality

    def is_trivial(self) -> bool:
        """Whether the cone is exactly {0}."""
        rays, lin = self.generators()
        return not rays and not lin


def dd_convert(cone: PolyCone) -> PolyCone:
    """Force both representations; returns the same cone with V-rep cached."""
    cone.vrep()
    return cone


def polar(cone: PolyCone) -> PolyCone:
    """Polar cone {y : y.x <= 0 for all x in cone}.

    The polar's H-rows are the cone's generators and vice versa, so this is
    a representation swap (with a dd pass to canonicalize).
    """
    if cone.is_empty():
        # polar of the empty set is by convention the whole space
        return PolyCone.from_generators(
            rays=(), lineality=tuple(
                tuple(ONE if j == i else ZERO for j in range(cone.dim))
                for i in range(cone.dim)), dim=cone.dim)
    rays, lin = cone.generators()
    out = PolyCone(A=rays, C=lin, dim=cone.dim)
    return out


@dataclass(frozen=True)
class ExtremePoints:
    points: tuple[Vec, ...]
    not_pointed: bool


def extreme_points(p: Polyhedron) -> ExtremePoints:
    """All vertices of p.  Raises EmptySetError if p is infeasible; when p
    has a nontrivial lineality space there are no vertices and the
    NOT_POINTED flag is set instead."""
    if p.is_empty():
        raise EmptySetError("polyhedron is empty")
    v = p.vrep()
    if v.lineality:
        return ExtremePoints((), True)
    return ExtremePoints(v.vertices, False)


def tangent_cone_poly(p: Polyhedron, z: Vec) -> PolyCone:
    """Tangent cone {w : A_active w <= 0, C w = 0} at a member z."""
    z = vec(z)
    if not p.contains(z):
        raise PointNotInSet(f"{z} is not in the polyhedron")
    act = tuple(r for r, bi in zip(p.A, p.b) if dot(r, z) == bi)
    return PolyCone(A=act, C=p.C, dim=p.dim)


def normal_cone_poly(p: Polyhedron, z: Vec) -> PolyCone:
    return polar(tangent_cone_poly(p, z))


def directional_normal_cone_poly(p: Polyhedron, z: Vec, u: Vec) -> PolyCone:
    """N_p(z; u) = N_p(z) n {u}^perp for u in T_p(z), else the empty cone."""
    u = vec(u)
    t = tangent_cone_poly(p, z)
    if not t.contains(u):
        return PolyCone.empty_set(p.dim)
    n = polar(t)
    return PolyCone(A=n.A, C=tuple(n.C) + (u,), dim=p.dim)


def affine_image(p: Polyhedron, M: Mat, offset: Vec | None = None) -> Polyhedron:
    """Image {M x + offset : x in p}, via mapping the V-rep generators."""
    M = mat(M)
    out_dim = len(M)
    offset = vec(offset) if offset is not None else zeros(out_dim)
    if p.is_empty():
        return Polyhedron.empty_set(out_dim)
    v = p.vrep()
    verts = [tuple(a + o for a, o in zip(matvec(M, x), offset))
             for x in v.vertices]
    rays = [matvec(M, r) for r in v.rays]
    lin = [matvec(M, l) for l in v.lineality]
    if not verts:
        verts = [offset]
    return Polyhedron.from_vrep(verts, [r for r in rays if not is_zero_vec(r)],
                                [l for l in lin if not is_zero_vec(l)],
                                dim=out_dim)


def cone_affine_image(k: PolyCone, M: Mat) -> PolyCone:
    """Linear image of a cone (offset-free affine_image)."""
    M = mat(M)
    out_dim = len(M)
    if k.is_empty():
        return PolyCone.empty_set(out_dim)
    rays, lin = k.generators()
    return PolyCone.from_generators(
        [r for r in (matvec(M, r) for r in rays) if not is_zero_vec(r)],
        [l for l in (matvec(M, l) for l in lin) if not is_zero_vec(l)],
        dim=out_dim)


@dataclass(frozen=True)
class DisjunctiveSet:
    """Finite union of polyhedra; membership = membership in some piece."""
    pieces: tuple[Polyhedron, ...]

    def contains(self, x: Vec) -> bool:
        return any(piece.contains(x) for piece in self.pieces)

    @property
    def dim(self) -> int:
        return self.pieces[0].dim


def disjunctive_polar(d: DisjunctiveSet) -> PolyCone:
    """Polar of a union of cones = intersection of the piece polars."""
    A: list[Vec] = []
    C: list[Vec] = []
    for piece in d.pieces:
        if piece.is_empty():
            continue
        v = piece.vrep()
        A.extend(v.rays)
        A.extend(v.vertices)  # harmless for cones (vertex 0 gives a 0-row)
        C.extend(v.lineality)
    A = [r for r in A if not is_zero_vec(r)]
    return PolyCone(A=tuple(A), C=tuple(C), dim=d.dim)


def set_equal(p: Polyhedron, q: Polyhedron) -> bool:
    """Exact set equality via mutual membership of generators."""
    if p.is_empty() or q.is_empty():
        return p.is_empty() and q.is_empty()
    if p.dim != q.dim:
        return False
    return _subset(p, q) and _subset(q, p)


def _subset(p: Polyhedron, q: Polyhedron) -> bool:
    v = p.vrep()
    for x in v.vertices:
        if not q.contains(x):
            return False
    for r in v.rays:
        if not (all(dot(row, r) <= 0 for row in q.A)
                and all(dot(row, r) == 0 for row in q.C)):
            return False
    for l in v.lineality:
        if not (all(dot(row, l) == 0 for row in q.A)
                and all(dot(row, l) == 0 for row in q.C)):
            return False
    if not v.vertices:
        # pure cone V-rep: the anchor point 0 must be a member too
        if not q.contains(zeros(p.dim)):
            return False
    return True


def remove_redundant_rows(p: Polyhedron) -> Polyhedron:
    """Drop inequality rows implied by the remaining system (one LP each)."""
    if p.is_empty():
        return p
    rows = list(zip(p.A, p.b))
    keep: list[tuple[Vec, Fraction]] = []
    for i in range(len(rows)):
        others = keep + rows[i + 1:]
        a, bi = rows[i]
        out = lp_solve(LpProblem(objective=a,
                                 A=tuple(r for r, _ in others),
                                 b=tuple(x for _, x in others),
                                 C=p.C, d=p.d, sense=Sense.MAX))
        if out.status is LpStatus.OPTIMAL and out.value <= bi:
            continue
        keep.append((a, bi))
    return Polyhedron(tuple(r for r, _ in keep), tuple(x for _, x in keep),
                      p.C, p.d, dim=p.dim)


def minkowski_sum(p: Polyhedron, k: PolyCone) -> Polyhedron:
    """p + k for a polyhedron p and cone k (generator-level sum)."""
    if p.is_empty() or k.is_empty():
        return Polyhedron.empty_set(p.dim)
    vp = p.vrep()
    rk, lk = k.generators()
    verts = vp.vertices if vp.vertices else (zeros(p.dim),)
    return Polyhedron.from_vrep(verts, tuple(vp.rays) + rk,
                                tuple(vp.lineality) + lk, dim=p.dim)
