"""Exact KKT analysis of the lower-level inequality system g(y) <= 0.

Centred on the multiplier polyhedron L(y, y*) = {lam >= 0 supported on the
active set : grad g(y)^T lam = y*}, its extreme points, the critical cone
K(y, y*), directional multiplier sets, the normal cone to K, and the
tangent cone to the graph of the regular normal-cone map of Gamma.
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
    lp_solve,
    vec,
    zeros,
)
from .model import MpecProblem
from .polyhedra import (
    PolyCone,
    Polyhedron,
    cone_affine_image,
    extreme_points,
    polar,
    set_equal,
)


class InfeasiblePoint(ValueError):
    pass


class NoMultiplier(ValueError):
    pass


class DirectionNotCritical(ValueError):
    pass


class LpUnbounded(RuntimeError):
    pass


def active_set(problem: MpecProblem, y: Vec) -> tuple[int, ...]:
    """Indices i with g_i(y) = 0; requires g(y) <= 0 exactly."""
    vals = problem.g_at(y)
    if any(v > 0 for v in vals):
        raise InfeasiblePoint(f"g(y) = {vals} has a positive component")
    return tuple(i for i, v in enumerate(vals) if v == 0)


def support(lam: Vec) -> tuple[int, ...]:
    """Strict-complementarity index set {i : lam_i > 0}."""
    return tuple(i for i, v in enumerate(lam) if v > 0)


@dataclass(frozen=True)
class MultiplierSet:
    y: Vec
    ystar: Vec
    active: tuple[int, ...]
    polyhedron: Polyhedron          # in R^q
    extreme: tuple[Vec, ...]        # E(y, y*)

    @property
    def is_feasible(self) -> bool:
        return not self.polyhedron.is_empty()

    def contains(self, lam: Vec) -> bool:
        return self.polyhedron.contains(lam)


def _grad_g_transpose(J: Mat, m: int, q: int) -> Mat:
    return tuple(tuple(J[i][j] for i in range(q)) for j in range(m))


def _multiplier_polyhedron(problem: MpecProblem, y: Vec, ystar: Vec,
                           act: tuple[int, ...]) -> Polyhedron:
    q, m = problem.q, problem.m
    J = problem.grad_g(y)
    A = tuple(tuple(-ONE if j == i else ZERO for j in range(q)) for i in range(q))
    C, d = [], []
    for k in range(m):
        row = tuple(J[i][k] for i in range(q))
        if any(c != 0 for c in row) or ystar[k] != 0:
            C.append(row)
            d.append(ystar[k])
    for i in range(q):
        if i not in act:
            C.append(tuple(ONE if j == i else ZERO for j in range(q)))
            d.append(ZERO)
    return Polyhedron(A=A, b=zeros(q), C=tuple(C), d=tuple(d), dim=q)


def multiplier_set(problem: MpecProblem, y: Vec, ystar: Vec) -> MultiplierSet:
    """The polyhedron L(y, y*) with its extreme points enumerated."""
    y, ystar = vec(y), vec(ystar)
    act = active_set(problem, y)
    poly = _multiplier_polyhedron(problem, y, ystar, act)
    if poly.is_empty():
        return MultiplierSet(y, ystar, act, poly, ())
    ep = extreme_points(poly)
    return MultiplierSet(y, ystar, act, poly, ep.points)


@dataclass(frozen=True)
class CriticalConeData:
    """K(y, y*) in both H-forms: (a) active gradients <= 0 plus y*-orthogonality,
    (b) per-multiplier equality/inequality split; the two agree as sets for
    every extreme multiplier."""
    cone: PolyCone
    rep_a: PolyCone
    rep_b: dict

    def contains(self, v: Vec) -> bool:
        return self.cone.contains(v)


def critical_cone(problem: MpecProblem, y: Vec, ystar: Vec,
                  lam: Vec | None = None) -> CriticalConeData:
    y, ystar = vec(y), vec(ystar)
    ms = multiplier_set(problem, y, ystar)
    if not ms.is_feasible:
        raise NoMultiplier("multiplier set is empty; y* is not a regular normal")
    J = problem.grad_g(y)
    rows_a = tuple(dict.fromkeys(J[i] for i in ms.active))
    rep_a = PolyCone(A=rows_a, C=(ystar,) if any(c != 0 for c in ystar) else (),
                     dim=problem.m)
    lams = (vec(lam),) if lam is not None else ms.extreme
    rep_b: dict = {}
    for lm in lams:
        if not ms.contains(lm):
            raise NoMultiplier(f"{lm} is not in the multiplier set")
        eq = tuple(J[i] for i in support(lm))
        ineq = tuple(J[i] for i in ms.active if lm[i] == 0)
        kb = PolyCone(A=ineq, C=eq, dim=problem.m)
        assert set_equal(rep_a, kb), "critical-cone representations disagree"
        rep_b[lm] = kb
    return CriticalConeData(cone=rep_a, rep_a=rep_a, rep_b=rep_b)


@dataclass(frozen=True)
class DirectionalMultiplierData:
    v: Vec
    theta: Fraction
    face: Polyhedron                # argmax face of L(y, y*) in direction v
    face_extreme: tuple[Vec, ...]


def _hessian_objective(problem: MpecProblem, y: Vec, v: Vec) -> Vec:
    """Coefficient vector (v^T grad^2 g_i(y) v)_i of the directional LP."""
    coeffs = []
    for i in range(problem.q):
        H = problem.hess_g(i, y)
        coeffs.append(dot(v, tuple(dot(row, v) for row in H)))
    return tuple(coeffs)


def directional_multipliers(problem: MpecProblem, y: Vec, ystar: Vec,
                            v: Vec) -> DirectionalMultiplierData:
    """argmax and optimal value of lam -> v^T grad^2(lam^T g)(y) v over L."""
    y, ystar, v = vec(y), vec(ystar), vec(v)
    kdata = critical_cone(problem, y, ystar)
    if not kdata.contains(v):
        raise DirectionNotCritical(f"{v} is not in the critical cone")
    ms = multiplier_set(problem, y, ystar)
    qv = _hessian_objective(problem, y, v)
    lp = LpProblem(objective=qv, A=ms.polyhedron.A, b=ms.polyhedron.b,
                   C=ms.polyhedron.C, d=ms.polyhedron.d, sense=Sense.MAX)
    out = lp_solve(lp)
    if out.status is LpStatus.UNBOUNDED:
        raise LpUnbounded("directional multiplier LP is unbounded; "
                          "no multiplier attains the maximum")
    assert out.status is LpStatus.OPTIMAL
    theta = out.value
    face = Polyhedron(A=ms.polyhedron.A, b=ms.polyhedron.b,
                      C=tuple(ms.polyhedron.C) + (qv,),
                      d=tuple(ms.polyhedron.d) + (theta,), dim=problem.q)
    fext = extreme_points(face).points
    return DirectionalMultiplierData(v=v, theta=theta, face=face,
                                     face_extreme=fext)


def _mu_cone(problem: MpecProblem, y: Vec, v: Vec, lam: Vec,
             act: tuple[int, ...]) -> Polyhedron:
    """{mu : mu_i = 0 off the active set, mu_i >= 0 where lam_i = 0 on it,
    mu^T grad g(y) v = 0} -- the tangent cone to N_{R^q_-}(g(y)) at lam
    intersected with the orthogonality row."""
    q = problem.q
    J = problem.grad_g(y)
    gv = tuple(dot(J[i], v) for i in range(q))
    C = [gv]
    d = [ZERO]
    for i in range(q):
        if i not in act:
            C.append(tuple(ONE if j == i else ZERO for j in range(q)))
            d.append(ZERO)
    A = tuple(tuple(-ONE if j == i else ZERO for j in range(q))
              for i in act if lam[i] == 0)
    return Polyhedron(A=A, b=zeros(len(A)), C=tuple(C), d=tuple(d), dim=q)


def critical_normal_cone(problem: MpecProblem, y: Vec, ystar: Vec, v: Vec,
                         lam: Vec) -> PolyCone:
    """N_{K(y,y*)}(v) as the image {grad g(y)^T mu : mu in the lam-pattern
    cone}; cross-checked against the direct polar computation K° n {v}^perp."""
    y, ystar, v, lam = vec(y), vec(ystar), vec(v), vec(lam)
    ms = multiplier_set(problem, y, ystar)
    if not ms.contains(lam):
        raise NoMultiplier(f"{lam} is not in the multiplier set")
    kdata = critical_cone(problem, y, ystar)
    if not kdata.contains(v):
        raise DirectionNotCritical(f"{v} is not in the critical cone")
    mu_cone = _mu_cone(problem, y, v, lam, ms.active)
    Gt = _grad_g_transpose(problem.grad_g(y), problem.m, problem.q)
    kcone = PolyCone(A=mu_cone.A, C=mu_cone.C, dim=problem.q)
    image = cone_affine_image(kcone, Gt)
    direct = PolyCone(A=polar(kdata.cone).A,
                      C=tuple(polar(kdata.cone).C) + (v,), dim=problem.m)
    assert set_equal(image, direct), \
        "normal-cone image disagrees with polar(K) n v-perp"
    return image


def _hessian_column_map(problem: MpecProblem, y: Vec, v: Vec) -> Mat:
    """m x q matrix whose column i is grad^2 g_i(y) v."""
    cols = []
    for i in range(problem.q):
        H = problem.hess_g(i, y)
        cols.append(tuple(dot(row, v) for row in H))
    return tuple(tuple(cols[i][j] for i in range(problem.q))
                 for j in range(problem.m))


def _lifted_polyhedron(problem: MpecProblem, ms: MultiplierSet,
                       face: Polyhedron, pattern: Vec, v: Vec) -> Polyhedron:
    """Joint polyhedron in (lam, mu) in R^{2q}: lam in the argmax face and mu
    in the sign-pattern cone of ``pattern``.  By the normal-cone lemma the
    mu-part is the same set for every admissible pattern."""
    q = problem.q
    mu = _mu_cone(problem, ms.y, v, pattern, ms.active)
    A = [row + zeros(q) for row in face.A] + [zeros(q) + row for row in mu.A]
    b = tuple(face.b) + tuple(mu.b)
    C = [row + zeros(q) for row in face.C] + [zeros(q) + row for row in mu.C]
    d = tuple(face.d) + tuple(mu.d)
    return Polyhedron(A=tuple(A), b=b, C=tuple(C), d=d, dim=2 * q)


def _slice_map(problem: MpecProblem, y: Vec, v: Vec) -> Mat:
    """(lam, mu) -> grad^2(lam^T g)(y) v + grad g(y)^T mu, as an m x 2q matrix."""
    Hv = _hessian_column_map(problem, y, v)
    Gt = _grad_g_transpose(problem.grad_g(y), problem.m, problem.q)
    return tuple(Hv[j] + Gt[j] for j in range(problem.m))


def graph_tangent_slice(problem: MpecProblem, y: Vec, ystar: Vec,
                        v: Vec) -> Polyhedron:
    """The slice T(v) = {v* : (v, v*) in T_{gph N-hat_Gamma}(y, y*)}.

    Computed exactly as the affine image of the lifted (lam, mu) polyhedron;
    returns the explicit empty set when v is not a critical direction.
    """
    y, ystar, v = vec(y), vec(ystar), vec(v)
    ms = multiplier_set(problem, y, ystar)
    if not ms.is_feasible:
        raise NoMultiplier("multiplier set is empty")
    kdata = critical_cone(problem, y, ystar)
    if not kdata.contains(v):
        return Polyhedron.empty_set(problem.m)
    dm = directional_multipliers(problem, y, ystar, v)
    pattern = dm.face_extreme[-1]
    lifted = _lifted_polyhedron(problem, ms, dm.face, pattern, v)
    from .polyhedra import affine_image
    return affine_image(lifted, _slice_map(problem, y, v))


@dataclass(frozen=True)
class GraphMembership:
    member: bool
    lam: Vec | None = None
    mu: Vec | None = None
    reason: str = ""


def graph_tangent_member(problem: MpecProblem, y: Vec, ystar: Vec, v: Vec,
                         vstar: Vec) -> GraphMembership:
    """Exact membership of (v, v*) in the graph tangent cone, with an
    l1-minimal multiplier witness when the answer is yes."""
    y, ystar, v, vstar = vec(y), vec(ystar), vec(v), vec(vstar)
    ms = multiplier_set(problem, y, ystar)
    if not ms.is_feasible:
        raise NoMultiplier("multiplier set is empty")
    kdata = critical_cone(problem, y, ystar)
    if not kdata.contains(v):
        return GraphMembership(False, reason="v is not a critical direction")
    dm = directional_multipliers(problem, y, ystar, v)
    pattern = dm.face_extreme[-1]
    lifted = _lifted_polyhedron(problem, ms, dm.face, pattern, v)
    M = _slice_map(problem, y, v)
    q = problem.q
    C = tuple(lifted.C) + tuple(M)
    d = tuple(lifted.d) + tuple(vstar)
    obj = tuple(ONE for _ in range(q)) + zeros(q)
    out = lp_solve(LpProblem(objective=obj, A=lifted.A, b=lifted.b,
                             C=C, d=d, sense=Sense.MIN))
    if out.status is LpStatus.INFEASIBLE:
        return GraphMembership(False, reason="no multiplier certifies the inclusion")
    assert out.status is LpStatus.OPTIMAL
    lam = out.x[:q]
    mu = out.x[q:]
    return GraphMembership(True, lam=lam, mu=mu)


def min_norm_multiplier(problem: MpecProblem, y: Vec, ystar: Vec) -> Vec:
    """l1-minimal multiplier, taken at a vertex of the optimal face; ties
    broken toward weight on lower-indexed constraints (lexicographically
    greatest vertex), which makes the choice positively homogeneous in y*."""
    y, ystar = vec(y), vec(ystar)
    ms = multiplier_set(problem, y, ystar)
    if not ms.is_feasible:
        raise NoMultiplier("multiplier set is empty")
    q = problem.q
    obj = tuple(ONE for _ in range(q))
    out = lp_solve(LpProblem(objective=obj, A=ms.polyhedron.A, b=ms.polyhedron.b,
                             C=ms.polyhedron.C, d=ms.polyhedron.d,
                             sense=Sense.MIN))
    assert out.status is LpStatus.OPTIMAL
    face = Polyhedron(A=ms.polyhedron.A, b=ms.polyhedron.b,
                      C=tuple(ms.polyhedron.C) + (obj,),
                      d=tuple(ms.polyhedron.d) + (out.value,), dim=q)
    verts = extreme_points(face).points
    return verts[-1]
