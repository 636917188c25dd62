"""Constraint-qualification certifiers with three-valued verdicts.

Every HOLDS carries a certificate and every FAILS carries an exact witness
that re-verifies by direct substitution.  Conditions that are sufficient
only (FOSCMS, SOSCMS, the MPEC certifier) never report a FAILS for MSCQ
itself: a violated sufficient condition is scoped as such, and the honest
answer otherwise is UNKNOWN.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
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
    primitive,
    vec,
    zeros,
)
from .lowerlevel import (
    InfeasiblePoint,
    NoMultiplier,
    directional_multipliers,
    graph_tangent_member,
    multiplier_set,
    support,
)
from .model import MpecProblem, Poly, evaluate, gradient, hessian, validate_point
from .polyhedra import PolyCone

CELL_CAP = 2 ** 20


class PrerequisiteFailed(ValueError):
    pass


class Status(Enum):
    HOLDS = "HOLDS"
    FAILS = "FAILS"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class CqVerdict:
    status: Status
    method: str
    witness: dict | None = None
    certificate: dict | None = None
    reason: str = ""
    scope: str = ""                      # "sufficient condition" for scoped FAILS
    sub_verdicts: tuple = ()

    def to_json_dict(self) -> dict:
        def conv(obj):
            if isinstance(obj, Fraction):
                return str(obj)
            if isinstance(obj, dict):
                return {k: conv(v) for k, v in obj.items()}
            if isinstance(obj, (list, tuple)):
                return [conv(v) for v in obj]
            return obj

        out = {"status": self.status.value, "method": self.method}
        if self.witness is not None:
            out["witness"] = conv(self.witness)
        if self.certificate is not None:
            out["certificate"] = conv(self.certificate)
        if self.reason:
            out["reason"] = self.reason
        if self.scope:
            out["scope"] = self.scope
        if self.sub_verdicts:
            out["prerequisites"] = [v.to_json_dict() for v in self.sub_verdicts]
        return out


# ---------------------------------------------------------------------------
# inequality systems P(z) <= 0 given as polynomials over their own variables


def _system_values(polys: tuple[Poly, ...], z: Vec) -> Vec:
    return tuple(evaluate(p, z) for p in polys)


def _system_jacobian(polys: tuple[Poly, ...], z: Vec) -> Mat:
    return tuple(gradient(p, z) for p in polys)


def _check_feasible(polys, z) -> Vec:
    vals = _system_values(polys, z)
    if any(v > 0 for v in vals):
        raise InfeasiblePoint(f"P(z) = {vals} has a positive component")
    return vals


def _abnormal_lp(J: Mat, allowed: tuple[int, ...], s: int, d: int):
    """max sum(lam) over {lam >= 0 on allowed, 0 elsewhere, J^T lam = 0,
    sum(lam) <= 1}; value > 0 iff a nonzero abnormal multiplier exists."""
    A = [tuple(-ONE if j == i else ZERO for j in range(s)) for i in range(s)]
    A.append(tuple(ONE for _ in range(s)))
    b = zeros(s) + (ONE,)
    C = [tuple(J[i][k] for i in range(s)) for k in range(d)]
    dd = list(zeros(d))
    for i in range(s):
        if i not in allowed:
            C.append(tuple(ONE if j == i else ZERO for j in range(s)))
            dd.append(ZERO)
    return lp_solve(LpProblem(objective=tuple(ONE for _ in range(s)),
                              A=tuple(A), b=b, C=tuple(C), d=tuple(dd),
                              sense=Sense.MAX))


def nnamcq_check(polys: tuple[Poly, ...], z: Vec) -> CqVerdict:
    """No nonzero abnormal multiplier: grad P(z)^T lam = 0 with lam in the
    normal cone of the orthant at P(z) forces lam = 0."""
    z = vec(z)
    vals = _check_feasible(polys, z)
    s, d = len(polys), len(z)
    act = tuple(i for i, v in enumerate(vals) if v == 0)
    if not act:
        return CqVerdict(Status.HOLDS, "nnamcq",
                         certificate={"active": [], "note": "no active rows"})
    J = _system_jacobian(polys, z)
    out = _abnormal_lp(J, act, s, d)
    assert out.status is LpStatus.OPTIMAL
    if out.value == 0:
        return CqVerdict(Status.HOLDS, "nnamcq",
                         certificate={"active": list(act),
                                      "abnormal_cone": "trivial"})
    lam = out.x
    return CqVerdict(Status.FAILS, "nnamcq", witness={"lambda": lam})


def _linearized_cone(J: Mat, act: tuple[int, ...], d: int) -> PolyCone:
    return PolyCone(A=tuple(J[i] for i in act), dim=d)


def foscms_check(polys: tuple[Poly, ...], z: Vec,
                 cell_cap: int = CELL_CAP) -> CqVerdict:
    """First-order sufficient condition for metric subregularity.

    Enumerates the sign patterns (faces of the linearized cone) of the
    active gradients; on each realized pattern the directional normal cone
    is the corresponding coordinate cone and the kernel condition must force
    lam = 0.
    """
    z = vec(z)
    vals = _check_feasible(polys, z)
    s, d = len(polys), len(z)
    act = tuple(i for i, v in enumerate(vals) if v == 0)
    if not act:
        return CqVerdict(Status.HOLDS, "foscms",
                         certificate={"active": [], "note": "no active rows"})
    J = _system_jacobian(polys, z)
    tlin = _linearized_cone(J, act, d)
    if tlin.is_trivial():
        return CqVerdict(Status.HOLDS, "foscms",
                         certificate={"strong_subregularity": True,
                                      "linearized_cone": "trivial"})
    if 2 ** len(act) > cell_cap:
        return CqVerdict(Status.UNKNOWN, "foscms",
                         reason=f"face enumeration exceeds {cell_cap} cells")
    for bits in range(2 ** len(act)):
        pattern = tuple(act[i] for i in range(len(act)) if bits >> i & 1)
        out = _abnormal_lp(J, pattern, s, d)
        assert out.status is LpStatus.OPTIMAL
        if out.value == 0:
            continue
        lam = out.x
        w = _realize_pattern(J, act, pattern, d)
        if w is None:
            continue
        return CqVerdict(Status.FAILS, "foscms",
                         witness={"w": w, "lambda": lam},
                         scope="sufficient condition")
    return CqVerdict(Status.HOLDS, "foscms",
                     certificate={"active": list(act),
                                  "note": "abnormal cone trivial on every face"})


def _realize_pattern(J: Mat, act: tuple[int, ...], pattern: tuple[int, ...],
                     d: int) -> Vec | None:
    """A direction w != 0 with grad P_i w = 0 exactly on ``pattern`` and < 0
    on the remaining active rows, or None if the face has no such point."""
    strict = tuple(i for i in act if i not in pattern)
    if not strict:
        info = linear_basis(tuple(J[i] for i in pattern))
        if info.nullspace_basis:
            return primitive(info.nullspace_basis[0])
        return None
    # max t s.t. grad P_i w <= -t (strict rows), grad P_i w = 0 (pattern),
    # t <= 1; the cap keeps the LP bounded, and homogeneity means any
    # positive margin certifies the face
    A = [tuple(J[i]) + (ONE,) for i in strict]
    A.append(zeros(d) + (ONE,))
    b = zeros(len(strict)) + (ONE,)
    C = [tuple(J[i]) + (ZERO,) for i in pattern]
    out = lp_solve(LpProblem(objective=zeros(d) + (ONE,), A=tuple(A), b=b,
                             C=tuple(C), d=zeros(len(C)), sense=Sense.MAX))
    if out.status is LpStatus.OPTIMAL and out.value > 0:
        return primitive(out.x[:d])
    return None


# ---------------------------------------------------------------------------
# strict positivity of quadratic forms on cones


@dataclass(frozen=True)
class QuadFormQuery:
    Q: Mat
    cone: PolyCone
    qualifier: Mat | None = None     # basis rows of S; None means full space
    depth: int = 12


@dataclass(frozen=True)
class QuadFormResult:
    kind: str                        # POSITIVE | WITNESS | UNKNOWN
    witness: Vec | None = None


def _sym(Q: Mat) -> Mat:
    n = len(Q)
    half = Fraction(1, 2)
    return tuple(tuple((Q[i][j] + Q[j][i]) * half for j in range(n))
                 for i in range(n))


def quadratic_form_sign_on_cone(query: QuadFormQuery) -> QuadFormResult:
    """Decide x^T Q x > 0 for all x in the cone with nonzero S-projection.

    Recursive simplicial subdivision over generator coefficients: a cell is
    accepted once its pairwise form-value matrix is entrywise positive (or
    it cannot contain a qualifying point); a generator with nonpositive form
    value and nonzero S-projection is an exact witness; depth exhaustion
    yields UNKNOWN.
    """
    Q = _sym(query.Q)
    rays, lin = query.cone.generators()
    S = query.qualifier

    def proj_nonzero(x: Vec) -> bool:
        if S is None:
            return not is_zero_vec(x)
        return any(dot(srow, x) != 0 for srow in S)

    def qform(x: Vec, y: Vec) -> Fraction:
        return dot(x, tuple(dot(row, y) for row in Q))

    def check_cell(gens: tuple[Vec, ...], depth: int) -> QuadFormResult:
        gens = tuple(g for g in gens if not is_zero_vec(g))
        if not gens:
            return QuadFormResult("POSITIVE")
        if not any(proj_nonzero(g) for g in gens):
            return QuadFormResult("POSITIVE")
        for g in sorted(gens, reverse=True):
            if proj_nonzero(g) and qform(g, g) <= 0:
                return QuadFormResult("WITNESS", witness=g)
        B = [[qform(gi, gj) for gj in gens] for gi in gens]
        if all(v > 0 for row in B for v in row):
            return QuadFormResult("POSITIVE")
        if depth <= 0:
            return QuadFormResult("UNKNOWN")
        # bisect the longest edge of the cell (L1-normalized metric)
        def norm1(g):
            tot = sum(abs(x) for x in g)
            return tuple(x / tot for x in g)
        best = None
        for i in range(len(gens)):
            for j in range(i + 1, len(gens)):
                gi, gj = norm1(gens[i]), norm1(gens[j])
                d2 = sum((a - b) ** 2 for a, b in zip(gi, gj))
                if best is None or d2 > best[0]:
                    best = (d2, i, j)
        if best is None or best[0] == 0:
            return QuadFormResult("UNKNOWN")
        _, i, j = best
        mid = primitive(tuple(a + b for a, b in zip(norm1(gens[i]),
                                                    norm1(gens[j]))))
        for replaced in (i, j):
            sub = tuple(mid if k == replaced else gens[k]
                        for k in range(len(gens)))
            res = check_cell(sub, depth - 1)
            if res.kind != "POSITIVE":
                return res
        return QuadFormResult("POSITIVE")

    unknown = False
    for signs in itertools.product((ONE, -ONE), repeat=len(lin)):
        gens = tuple(rays) + tuple(tuple(s * x for x in l)
                                   for s, l in zip(signs, lin))
        res = check_cell(gens, query.depth)
        if res.kind == "WITNESS":
            return res
        if res.kind == "UNKNOWN":
            unknown = True
    return QuadFormResult("UNKNOWN" if unknown else "POSITIVE")


def soscms_check(polys: tuple[Poly, ...], z: Vec, depth: int = 12) -> CqVerdict:
    """Second-order sufficient condition for metric subregularity: on every
    extreme ray of the abnormal cone the Hessian form must be negative on
    all nonzero linearized-cone directions."""
    z = vec(z)
    vals = _check_feasible(polys, z)
    s, d = len(polys), len(z)
    act = tuple(i for i, v in enumerate(vals) if v == 0)
    if not act:
        return CqVerdict(Status.HOLDS, "soscms",
                         certificate={"active": [], "note": "no active rows"})
    J = _system_jacobian(polys, z)
    tlin = _linearized_cone(J, act, d)
    if tlin.is_trivial():
        return CqVerdict(Status.HOLDS, "soscms",
                         certificate={"strong_subregularity": True})
    via_nnamcq = nnamcq_check(polys, z)
    if via_nnamcq.status is Status.HOLDS:
        return CqVerdict(Status.HOLDS, "soscms",
                         certificate={"abnormal_cone": "trivial"},
                         sub_verdicts=(via_nnamcq,))
    abn = PolyCone(
        A=tuple(tuple(-ONE if j == i else ZERO for j in range(s)) for i in act),
        C=tuple(tuple(ONE if j == i else ZERO for j in range(s))
                for i in range(s) if i not in act)
        + tuple(tuple(J[i][k] for i in range(s)) for k in range(d)),
        dim=s)
    rays, lin = abn.generators()
    assert not lin, "abnormal cone must be pointed"
    results = []
    for lam in rays:
        H = [[ZERO] * d for _ in range(d)]
        for i in range(s):
            if lam[i] == 0:
                continue
            Hi = hessian(polys[i], z)
            for a in range(d):
                for b in range(d):
                    H[a][b] += lam[i] * Hi[a][b]
        Qneg = tuple(tuple(-H[a][b] for b in range(d)) for a in range(d))
        res = quadratic_form_sign_on_cone(
            QuadFormQuery(Q=Qneg, cone=tlin, qualifier=None, depth=depth))
        if res.kind == "WITNESS":
            return CqVerdict(Status.FAILS, "soscms",
                             witness={"lambda": lam, "w": res.witness},
                             scope="sufficient condition")
        results.append((lam, res.kind))
        if res.kind == "UNKNOWN":
            return CqVerdict(Status.UNKNOWN, "soscms",
                             reason="subdivision depth exhausted on an "
                                    "abnormal ray")
    return CqVerdict(Status.HOLDS, "soscms",
                     certificate={"rays_checked": len(results)})


def mscq_cascade(polys: tuple[Poly, ...], z: Vec, depth: int = 12) -> CqVerdict:
    """LINEAR -> NNAMCQ -> FOSCMS -> SOSCMS; the first HOLDS wins.  A failed
    sufficient condition never implies MSCQ failure, so the fall-through
    verdict is UNKNOWN with all sub-verdicts attached."""
    z = vec(z)
    _check_feasible(polys, z)
    if all(p.is_affine() for p in polys):
        return CqVerdict(Status.HOLDS, "linear",
                         certificate={"note": "affine system; polyhedral "
                                              "multifunction is calm"})
    subs = []
    for check in (nnamcq_check, foscms_check,
                  lambda ps, pt: soscms_check(ps, pt, depth)):
        v = check(polys, z)
        subs.append(v)
        if v.status is Status.HOLDS:
            return CqVerdict(Status.HOLDS, v.method, certificate=v.certificate,
                             sub_verdicts=tuple(subs))
    return CqVerdict(Status.UNKNOWN, "cascade",
                     reason="no sufficient condition certified MSCQ",
                     sub_verdicts=tuple(subs))


# ---------------------------------------------------------------------------
# the MPEC-level certifier


def nondeg_g_check(problem: MpecProblem) -> CqVerdict:
    """grad_x G^T eta = 0 with eta >= 0 on the active upper rows must force
    grad_y G^T eta = 0 (checked on the generators of the eta-cone)."""
    Gv = problem.G_at(problem.xbar, problem.ybar)
    if any(v > 0 for v in Gv):
        raise InfeasiblePoint(f"G = {Gv} has a positive component")
    p, n, m = problem.p, problem.n, problem.m
    if p == 0:
        return CqVerdict(Status.HOLDS, "nondeg_g",
                         certificate={"note": "no upper-level rows"})
    act = tuple(i for i, v in enumerate(Gv) if v == 0)
    Gx, Gy = problem.jac_G(problem.xbar, problem.ybar)
    cone = PolyCone(
        A=tuple(tuple(-ONE if j == i else ZERO for j in range(p)) for i in act),
        C=tuple(tuple(ONE if j == i else ZERO for j in range(p))
                for i in range(p) if i not in act)
        + tuple(tuple(Gx[i][k] for i in range(p)) for k in range(n)),
        dim=p)
    rays, lin = cone.generators()
    assert not lin
    for eta in rays:
        img = tuple(sum((eta[i] * Gy[i][k] for i in range(p)), ZERO)
                    for k in range(m))
        if not is_zero_vec(img):
            return CqVerdict(Status.FAILS, "nondeg_g",
                             witness={"eta": eta, "grad_y_image": img})
    return CqVerdict(Status.HOLDS, "nondeg_g",
                     certificate={"generators_checked": len(rays)})


def _psi_matrix(problem: MpecProblem, lam: Vec) -> Mat:
    """Quadratic form of psi(w, eta) = w^T (grad_y phi + grad^2(lam^T g)) w
    - eta^T grad_y G w over (w, eta) in R^{m+p}."""
    m, p = problem.m, problem.p
    _, Py = problem.jac_phi(problem.xbar, problem.ybar)
    H = problem.hess_lambda_g(lam, problem.ybar)
    _, Gy = problem.jac_G(problem.xbar, problem.ybar)
    half = Fraction(1, 2)
    dim = m + p
    Q = [[ZERO] * dim for _ in range(dim)]
    for a in range(m):
        for b in range(m):
            v = Py[a][b] + H[a][b]
            Q[a][b] += v * half
            Q[b][a] += v * half
    for i in range(p):
        for b in range(m):
            Q[m + i][b] -= Gy[i][b] * half
            Q[b][m + i] -= Gy[i][b] * half
    return tuple(tuple(row) for row in Q)


def psi_value(problem: MpecProblem, lam: Vec, w: Vec, eta: Vec) -> Fraction:
    Q = _psi_matrix(problem, lam)
    x = tuple(w) + tuple(eta)
    return dot(x, tuple(dot(row, x) for row in Q))


def _joint_cone(problem: MpecProblem, lam: Vec) -> PolyCone:
    """C(lam) = {(w, eta) : w in W(lam), eta >= 0 on active upper rows,
    grad_x phi^T w = grad_x G^T eta}."""
    m, p, n, q = problem.m, problem.p, problem.n, problem.q
    J = problem.grad_g(problem.ybar)
    Px, _ = problem.jac_phi(problem.xbar, problem.ybar)
    Gx, _ = problem.jac_G(problem.xbar, problem.ybar)
    Gv = problem.G_at(problem.xbar, problem.ybar)
    act_G = tuple(i for i, v in enumerate(Gv) if v == 0)
    dim = m + p
    C = [tuple(J[i]) + zeros(p) for i in support(lam)]
    C += [zeros(m) + tuple(ONE if j == i else ZERO for j in range(p))
          for i in range(p) if i not in act_G]
    for k in range(n):
        C.append(tuple(Px[j][k] for j in range(m))
                 + tuple(-Gx[i][k] for i in range(p)))
    A = [zeros(m) + tuple(-ONE if j == i else ZERO for j in range(p))
         for i in act_G]
    return PolyCone(A=tuple(A), C=tuple(C), dim=dim)


def _w_qualifier(problem: MpecProblem) -> Mat:
    m, p = problem.m, problem.p
    return tuple(tuple(ONE if j == a else ZERO for j in range(m)) + zeros(p)
                 for a in range(m))


def certify_mscq_mpec(problem: MpecProblem, depth: int = 12,
                      cell_cap: int = CELL_CAP) -> CqVerdict:
    """Certify MSCQ for the MPEC system at the reference point.

    Phase I checks, for every extreme multiplier, strict positivity of the
    joint quadratic form on the coupling cone (with positivity required only
    where the w-part is nonzero); success rules out any witness tuple of the
    sufficient condition, so MSCQ is certified.  Phase II searches for an
    exact witness violating the sufficient condition; finding one is scoped
    -- it does NOT assert that MSCQ fails.
    """
    rep = validate_point(problem)
    if not (rep.lower_feasible and rep.upper_feasible):
        raise PrerequisiteFailed(f"reference point infeasible: g = "
                                 f"{rep.g_values}, G = {rep.G_values}")
    if not rep.multiplier_feasible:
        raise NoMultiplier("no multiplier at the reference point")
    prereqs = []
    lower = mscq_cascade(problem.g, problem.ybar, depth)
    prereqs.append(CqVerdict(lower.status, f"lower-level:{lower.method}",
                             certificate=lower.certificate,
                             reason=lower.reason))
    upper = mscq_cascade(problem.G, problem.point, depth) if problem.p else \
        CqVerdict(Status.HOLDS, "linear",
                  certificate={"note": "no upper-level rows"})
    prereqs.append(CqVerdict(upper.status, f"upper-level:{upper.method}",
                             certificate=upper.certificate,
                             reason=upper.reason))
    nd = nondeg_g_check(problem)
    prereqs.append(nd)
    for pv in prereqs:
        if pv.status is not Status.HOLDS:
            return CqVerdict(Status.UNKNOWN, "mscq_mpec",
                             reason=f"prerequisite not certified: {pv.method}",
                             sub_verdicts=tuple(prereqs))

    ystar = problem.ystar()
    ms = multiplier_set(problem, problem.ybar, ystar)
    if not ms.is_feasible:
        raise NoMultiplier("multiplier set is empty")
    qualifier = _w_qualifier(problem)
    phase1 = []
    all_positive = True
    for lam in ms.extreme:
        cone = _joint_cone(problem, lam)
        res = quadratic_form_sign_on_cone(
            QuadFormQuery(Q=_psi_matrix(problem, lam), cone=cone,
                          qualifier=qualifier, depth=depth))
        phase1.append({"lambda": lam, "result": res.kind,
                       "witness": res.witness})
        if res.kind != "POSITIVE":
            all_positive = False
    if all_positive:
        return CqVerdict(
            Status.HOLDS, "mscq_mpec",
            certificate={"phase1": [{"lambda": e["lambda"],
                                     "result": e["result"]}
                                    for e in phase1]},
            sub_verdicts=tuple(prereqs))

    witness = _phase2_search(problem, ms, cell_cap)
    if witness is not None:
        report = verify_witness(problem, witness)
        assert report.ok
        u, v, lam, eta, w = witness
        return CqVerdict(Status.FAILS, "mscq_mpec",
                         witness={"u": u, "v": v, "lambda": lam, "eta": eta,
                                  "w": w},
                         scope="sufficient condition",
                         reason="exact witness violates the sufficient "
                                "condition; this does not certify that MSCQ "
                                "fails",
                         sub_verdicts=tuple(prereqs))
    return CqVerdict(Status.UNKNOWN, "mscq_mpec",
                     reason="phase I not positive and phase II found no "
                            "verifiable witness",
                     certificate={"phase1": [{"lambda": e["lambda"],
                                              "result": e["result"]}
                                             for e in phase1]},
                     sub_verdicts=tuple(prereqs))


def _phase2_search(problem: MpecProblem, ms, cell_cap: int):
    """Exact cell-wise LP search for a witness tuple (u, v, lam, eta, w) of
    the sufficient condition: enumerate active patterns of the critical
    cone, of the upper rows, and of the eta-complementarity; quadratic side
    conditions are checked a posteriori on each LP solution."""
    n, m, p, q = problem.n, problem.m, problem.p, problem.q
    J = problem.grad_g(problem.ybar)
    Px, Py = problem.jac_phi(problem.xbar, problem.ybar)
    Gx, Gy = problem.jac_G(problem.xbar, problem.ybar)
    Gv = problem.G_at(problem.xbar, problem.ybar)
    act_G = tuple(i for i, v in enumerate(Gv) if v == 0)
    nv = n + 2 * m + p + q     # variables (u, v, w, eta, mu)
    off_u, off_v, off_w, off_eta, off_mu = 0, n, n + m, n + 2 * m, n + 2 * m + p

    def erow(offset, i, coeff=ONE):
        r = [ZERO] * nv
        r[offset + i] = coeff
        return tuple(r)

    cells = 0
    for lam in ms.extreme:
        sup = support(lam)
        Hlam = problem.hess_lambda_g(lam, problem.ybar)
        slack_rows = tuple(i for i in ms.active if lam[i] == 0)
        for jk_bits in range(2 ** len(slack_rows)):
            JK = tuple(slack_rows[i] for i in range(len(slack_rows))
                       if jk_bits >> i & 1)
            for z_bits in range(2 ** len(act_G)):
                Zset = tuple(act_G[i] for i in range(len(act_G))
                             if z_bits >> i & 1)
                base_C, base_d, base_A, base_b = [], [], [], []
                # critical-direction cell: grad g_i v = 0 on sup u JK, <= 0 rest
                for i in ms.active:
                    row = [ZERO] * nv
                    for k in range(m):
                        row[off_v + k] = J[i][k]
                    if i in sup or i in JK:
                        base_C.append(tuple(row)); base_d.append(ZERO)
                    else:
                        base_A.append(tuple(row)); base_b.append(ZERO)
                # upper-level rows on (u, v) with complementarity pattern
                for i in range(p):
                    row = [ZERO] * nv
                    for k in range(n):
                        row[off_u + k] = Gx[i][k]
                    for k in range(m):
                        row[off_v + k] = Gy[i][k]
                    if i in Zset:
                        base_C.append(tuple(row)); base_d.append(ZERO)
                    elif i in act_G:
                        base_A.append(tuple(row)); base_b.append(ZERO)
                # eta sign pattern
                for i in range(p):
                    if i in Zset:
                        base_A.append(erow(off_eta, i, -ONE)); base_b.append(ZERO)
                    else:
                        base_C.append(erow(off_eta, i)); base_d.append(ZERO)
                # -grad_x phi^T w + grad_x G^T eta = 0
                for k in range(n):
                    row = [ZERO] * nv
                    for j in range(m):
                        row[off_w + j] = -Px[j][k]
                    for i in range(p):
                        row[off_eta + i] = Gx[i][k]
                    base_C.append(tuple(row)); base_d.append(ZERO)
                # grad g_i w = 0 on the support of lam
                for i in sup:
                    row = [ZERO] * nv
                    for k in range(m):
                        row[off_w + k] = J[i][k]
                    base_C.append(tuple(row)); base_d.append(ZERO)
                # tangency skeleton: -grad_x phi u - grad_y phi v
                #                    = grad^2(lam^T g) v + grad g^T mu
                for j in range(m):
                    row = [ZERO] * nv
                    for k in range(n):
                        row[off_u + k] = -Px[j][k]
                    for k in range(m):
                        row[off_v + k] = -Py[j][k] - Hlam[j][k]
                    for i in range(q):
                        row[off_mu + i] = -J[i][j]
                    base_C.append(tuple(row)); base_d.append(ZERO)
                # mu supported on sup u JK, nonnegative on JK
                for i in range(q):
                    if i in JK:
                        base_A.append(erow(off_mu, i, -ONE)); base_b.append(ZERO)
                    elif i not in sup:
                        base_C.append(erow(off_mu, i)); base_d.append(ZERO)

                for a in range(n + m):
                    for s_sign in (ONE, -ONE):
                        for bw in range(m):
                            for t_sign in (ONE, -ONE):
                                cells += 1
                                if cells > cell_cap:
                                    return None
                                C = base_C + [erow(0, a, s_sign),
                                              erow(off_w, bw, t_sign)]
                                d = base_d + [ONE, ONE]
                                out = lp_solve(LpProblem(
                                    objective=zeros(nv), A=tuple(base_A),
                                    b=tuple(base_b), C=tuple(C), d=tuple(d)))
                                if out.status is not LpStatus.OPTIMAL:
                                    continue
                                u = out.x[off_u:off_u + n]
                                v = out.x[off_v:off_v + m]
                                w = out.x[off_w:off_w + m]
                                eta = out.x[off_eta:off_eta + p]
                                cand = (u, v, lam, eta, w)
                                if verify_witness(problem, cand).ok:
                                    return cand
    return None


@dataclass(frozen=True)
class WitnessReport:
    conditions: dict
    ok: bool


def verify_witness(problem: MpecProblem, witness: tuple) -> WitnessReport:
    """Re-verify a candidate witness (u, v, lam, eta, w) of the sufficient
    condition, each displayed condition checked exactly and independently."""
    u, v, lam, eta, w = (vec(t) for t in witness)
    n, m, p, q = problem.n, problem.m, problem.p, problem.q
    ystar = problem.ystar()
    ms = multiplier_set(problem, problem.ybar, ystar)
    J = problem.grad_g(problem.ybar)
    Px, Py = problem.jac_phi(problem.xbar, problem.ybar)
    Gx, Gy = problem.jac_G(problem.xbar, problem.ybar)
    Gv = problem.G_at(problem.xbar, problem.ybar)

    conds: dict = {}
    conds["lambda_extreme"] = lam in ms.extreme

    grad_G_uv = tuple(
        sum((Gx[i][k] * u[k] for k in range(n)), ZERO)
        + sum((Gy[i][k] * v[k] for k in range(m)), ZERO) for i in range(p))
    conds["upper_linearized"] = all(
        grad_G_uv[i] <= 0 for i in range(p) if Gv[i] == 0)

    in_dir_mult = False
    if conds["lambda_extreme"]:
        try:
            dm = directional_multipliers(problem, problem.ybar, ystar, v)
            in_dir_mult = _lam_form_value(problem, lam, v) == dm.theta
        except Exception:
            in_dir_mult = False
    conds["lambda_directionally_maximal"] = in_dir_mult

    vstar = tuple(
        -sum((Px[j][k] * u[k] for k in range(n)), ZERO)
        - sum((Py[j][k] * v[k] for k in range(m)), ZERO) for j in range(m))
    try:
        gm = graph_tangent_member(problem, problem.ybar, ystar, v, vstar)
        conds["graph_tangency"] = gm.member
    except Exception:
        conds["graph_tangency"] = False

    lhs = tuple(
        -sum((Px[j][k] * w[j] for j in range(m)), ZERO)
        + sum((Gx[i][k] * eta[i] for i in range(p)), ZERO) for k in range(n))
    conds["adjoint_balance"] = is_zero_vec(lhs)
    conds["eta_normal"] = (all(x >= 0 for x in eta)
                           and all(eta[i] == 0 for i in range(p) if Gv[i] < 0))
    conds["eta_complementarity"] = sum(
        (eta[i] * grad_G_uv[i] for i in range(p)), ZERO) == 0

    conds["w_in_W"] = all(dot(J[i], w) == 0 for i in support(lam))
    conds["psi_nonpositive"] = psi_value(problem, lam, w, eta) <= 0
    conds["uv_nonzero"] = not is_zero_vec(tuple(u) + tuple(v))
    conds["w_nonzero"] = not is_zero_vec(w)
    return WitnessReport(conditions=conds, ok=all(conds.values()))


def _lam_form_value(problem: MpecProblem, lam: Vec, v: Vec) -> Fraction:
    H = problem.hess_lambda_g(lam, problem.ybar)
    return dot(v, tuple(dot(row, v) for row in H))
