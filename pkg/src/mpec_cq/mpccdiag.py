"""Diagnostics for the complementarity reformulation at a chosen multiplier.

The diagnosis point (xbar, ybar, lambda-bar) is user-chosen; everything
here is exact except the distance probe backing the GCQ-gap evidence,
which is clearly labeled numerical evidence.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .certify import CqVerdict, Status
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
    vec,
    zeros,
)
from .lowerlevel import InfeasiblePoint, NoMultiplier, min_norm_multiplier, multiplier_set
from .model import MpecProblem
from .polyhedra import DisjunctiveSet, Polyhedron


class MissingObjective(ValueError):
    pass


class DirectionNotInLinCone(ValueError):
    pass


@dataclass(frozen=True)
class MpccPoint:
    x: Vec
    y: Vec
    lam: Vec
    I_g: tuple[int, ...]     # g_i = 0, lam_i > 0
    I_lam: tuple[int, ...]   # g_i < 0, lam_i = 0
    I_0: tuple[int, ...]     # biactive
    I_G: tuple[int, ...]     # active upper rows


def mpcc_index_sets(problem: MpecProblem, lam: Vec) -> MpccPoint:
    """Active index sets at (xbar, ybar, lam); the triple must be exactly
    feasible for the complementarity system."""
    lam = vec(lam)
    if len(lam) != problem.q:
        raise InfeasiblePoint(f"lambda has {len(lam)} components, expected "
                              f"{problem.q}")
    x, y = problem.xbar, problem.ybar
    gv = problem.g_at(y)
    Gv = problem.G_at(x, y)
    if any(v > 0 for v in gv) or any(v > 0 for v in Gv):
        raise InfeasiblePoint("reference point violates g <= 0 or G <= 0")
    if any(v < 0 for v in lam):
        raise InfeasiblePoint("negative multiplier component")
    if any(lam[i] * gv[i] != 0 for i in range(problem.q)):
        raise InfeasiblePoint("complementarity lam_i g_i = 0 violated")
    J = problem.grad_g(y)
    h = tuple(pv + sum((lam[i] * J[i][j] for i in range(problem.q)), ZERO)
              for j, pv in enumerate(problem.phi_at(x, y)))
    if not is_zero_vec(h):
        raise InfeasiblePoint(f"h(x,y,lam) = {h} is nonzero")
    I_g = tuple(i for i in range(problem.q) if gv[i] == 0 and lam[i] > 0)
    I_lam = tuple(i for i in range(problem.q) if gv[i] < 0 and lam[i] == 0)
    I_0 = tuple(i for i in range(problem.q) if gv[i] == 0 and lam[i] == 0)
    I_G = tuple(i for i in range(problem.p) if Gv[i] == 0)
    return MpccPoint(x, y, lam, I_g, I_lam, I_0, I_G)


@dataclass(frozen=True)
class UniquenessReport:
    unique: bool
    second: Vec | None


def multiplier_uniqueness(problem: MpecProblem) -> UniquenessReport:
    """Whether the multiplier polyhedron at the reference point is a
    singleton; if not, a vertex different from the l1-minimal one."""
    ystar = problem.ystar()
    ms = multiplier_set(problem, problem.ybar, ystar)
    if not ms.is_feasible:
        raise NoMultiplier("multiplier set is empty")
    poly = ms.polyhedron
    for i in range(problem.q):
        obj = tuple(ONE if j == i else ZERO for j in range(problem.q))
        lo = lp_solve(LpProblem(objective=obj, A=poly.A, b=poly.b, C=poly.C,
                                d=poly.d, sense=Sense.MIN))
        hi = lp_solve(LpProblem(objective=obj, A=poly.A, b=poly.b, C=poly.C,
                                d=poly.d, sense=Sense.MAX))
        if hi.status is LpStatus.UNBOUNDED or lo.value != hi.value:
            base = min_norm_multiplier(problem, problem.ybar, ystar)
            second = next((e for e in ms.extreme if e != base), None)
            if second is None:
                ray = poly.vrep().rays[0]
                second = tuple(a + b for a, b in zip(base, ray))
            return UniquenessReport(False, second)
    return UniquenessReport(True, None)


# ---------------------------------------------------------------------------
# branch systems and MPCC-tailored CQs


@dataclass(frozen=True)
class Branch:
    beta1: tuple[int, ...]   # g_i = 0, lam_i >= 0
    beta2: tuple[int, ...]   # lam_i = 0, g_i <= 0


def _branches(I_0: tuple[int, ...]) -> tuple[Branch, ...]:
    out = []
    for bits in range(2 ** len(I_0)):
        beta1 = tuple(I_0[i] for i in range(len(I_0)) if bits >> i & 1)
        beta2 = tuple(i for i in I_0 if i not in beta1)
        out.append(Branch(beta1, beta2))
    return tuple(out)


def _h_jacobian(problem: MpecProblem, lam: Vec) -> Mat:
    """Gradients of h_j over (x, y, lambda) at the reference point."""
    n, m, q = problem.n, problem.m, problem.q
    x, y = problem.xbar, problem.ybar
    Px, Py = problem.jac_phi(x, y)
    H = problem.hess_lambda_g(lam, y)
    J = problem.grad_g(y)
    rows = []
    for j in range(m):
        row = list(Px[j]) + [Py[j][k] + H[j][k] for k in range(m)] \
            + [J[i][j] for i in range(q)]
        rows.append(tuple(row))
    return tuple(rows)


def _embed(part: Vec, offset: int, total: int) -> Vec:
    row = [ZERO] * total
    for i, v in enumerate(part):
        row[offset + i] = v
    return tuple(row)


def _branch_gradients(problem: MpecProblem, pt: MpccPoint, br: Branch):
    """(equality rows, active inequality rows) of the branch system at the
    reference triple, over (x, y, lambda)."""
    n, m, q = problem.n, problem.m, problem.q
    total = n + m + q
    J = problem.grad_g(pt.y)
    Gx, Gy = problem.jac_G(pt.x, pt.y)
    eq = list(_h_jacobian(problem, pt.lam))
    for i in tuple(pt.I_g) + br.beta1:
        eq.append(_embed(J[i], n, total))
    for i in tuple(pt.I_lam) + br.beta2:
        eq.append(_embed((ONE,), n + m + i, total))
    act = []
    for i in br.beta1:      # lam_i >= 0 is active exactly on beta1
        act.append(_embed((-ONE,), n + m + i, total))
    for i in br.beta2:      # g_i <= 0 is active exactly on beta2
        act.append(_embed(J[i], n, total))
    for i in pt.I_G:
        act.append(tuple(Gx[i]) + tuple(Gy[i]) + zeros(q))
    return tuple(eq), tuple(act)


def _classical_mfcq(eq: Mat, act: Mat, total: int) -> CqVerdict:
    """MFCQ = independent equality gradients + a strictly feasible direction
    (Motzkin alternative used for the witness)."""
    if eq and not linear_basis(eq).row_independent:
        dep = linear_basis(tuple(zip(*eq))).nullspace_basis[0]
        return CqVerdict(Status.FAILS, "mfcq",
                         witness={"dependent_equalities": dep})
    if not act:
        return CqVerdict(Status.HOLDS, "mfcq",
                         certificate={"note": "no active inequalities"})
    # max t s.t. eq d = 0, act d <= -t, t <= 1
    A = [tuple(r) + (ONE,) for r in act]
    A.append(zeros(total) + (ONE,))
    b = zeros(len(act)) + (ONE,)
    C = [tuple(r) + (ZERO,) for r in eq]
    out = lp_solve(LpProblem(objective=zeros(total) + (ONE,), A=tuple(A), b=b,
                             C=tuple(C), d=zeros(len(C)), sense=Sense.MAX))
    if out.status is LpStatus.OPTIMAL and out.value > 0:
        return CqVerdict(Status.HOLDS, "mfcq",
                         certificate={"direction": out.x[:total],
                                      "margin": out.value})
    # Motzkin: some nonneg multiplier on active rows + free on equalities
    s = len(act)
    Aw = [tuple(-ONE if j == i else ZERO for j in range(s)) + zeros(len(eq))
          for i in range(s)]
    Aw.append(tuple(ONE for _ in range(s)) + zeros(len(eq)))
    bw = zeros(s) + (ONE,)
    Cw = []
    for k in range(total):
        Cw.append(tuple(act[i][k] for i in range(s))
                  + tuple(eq[i][k] for i in range(len(eq))))
    outw = lp_solve(LpProblem(objective=tuple(ONE for _ in range(s)) + zeros(len(eq)),
                              A=tuple(Aw), b=bw, C=tuple(Cw),
                              d=zeros(total), sense=Sense.MAX))
    witness = None
    if outw.status is LpStatus.OPTIMAL and outw.value > 0:
        witness = {"abnormal_ineq": outw.x[:s], "abnormal_eq": outw.x[s:]}
    return CqVerdict(Status.FAILS, "mfcq", witness=witness)


@dataclass(frozen=True)
class MfcqReport:
    branches: tuple[tuple[Branch, CqVerdict], ...]
    family_independent: bool
    via_second_multiplier: bool


def _def31_family(problem: MpecProblem, pt: MpccPoint) -> Mat:
    n, m, q = problem.n, problem.m, problem.q
    total = n + m + q
    J = problem.grad_g(pt.y)
    fam = list(_h_jacobian(problem, pt.lam))
    for i in tuple(pt.I_g) + tuple(pt.I_0):
        fam.append(_embed(J[i], n, total))
    for i in tuple(pt.I_lam) + tuple(pt.I_0):
        fam.append(_embed((ONE,), n + m + i, total))
    return tuple(fam)


def mpcc_mfcq_check(problem: MpecProblem, lam: Vec) -> MfcqReport:
    """Branch-wise MPCC-MFCQ.  A second multiplier defeats every branch at
    once (the difference is an exact abnormal multiplier on the g-rows);
    otherwise each branch gets the classical MFCQ test."""
    pt = mpcc_index_sets(problem, lam)
    fam = _def31_family(problem, pt)
    fam_indep = linear_basis(fam).row_independent if fam else True
    uniq = multiplier_uniqueness(problem)
    branches = _branches(pt.I_0)
    if not uniq.unique:
        diff = tuple(a - b for a, b in zip(uniq.second, pt.lam))
        verdicts = tuple(
            (br, CqVerdict(Status.FAILS, "prop-second-multiplier",
                           witness={"multiplier_difference": diff,
                                    "second_multiplier": uniq.second}))
            for br in branches)
        return MfcqReport(verdicts, fam_indep, True)
    n, m, q = problem.n, problem.m, problem.q
    out = []
    for br in branches:
        eq, act = _branch_gradients(problem, pt, br)
        out.append((br, _classical_mfcq(eq, act, n + m + q)))
    return MfcqReport(tuple(out), fam_indep, False)


def mpcc_licq_check(problem: MpecProblem, lam: Vec) -> CqVerdict:
    """Rank test on the full gradient family including the active upper
    rows; a second multiplier short-circuits to FAILS."""
    pt = mpcc_index_sets(problem, lam)
    uniq = multiplier_uniqueness(problem)
    if not uniq.unique:
        diff = tuple(a - b for a, b in zip(uniq.second, pt.lam))
        return CqVerdict(Status.FAILS, "licq",
                         witness={"multiplier_difference": diff})
    n, m, q = problem.n, problem.m, problem.q
    Gx, Gy = problem.jac_G(pt.x, pt.y)
    fam = list(_def31_family(problem, pt))
    for i in pt.I_G:
        fam.append(tuple(Gx[i]) + tuple(Gy[i]) + zeros(q))
    if not fam:
        return CqVerdict(Status.HOLDS, "licq",
                         certificate={"note": "empty gradient family"})
    info = linear_basis(tuple(fam))
    if info.row_independent:
        return CqVerdict(Status.HOLDS, "licq",
                         certificate={"rank": info.rank})
    dep = linear_basis(tuple(zip(*fam))).nullspace_basis[0]
    return CqVerdict(Status.FAILS, "licq", witness={"dependency": dep})


# ---------------------------------------------------------------------------
# the MPEC linearized cone


def mpec_linearized_cone(problem: MpecProblem, lam: Vec) -> DisjunctiveSet:
    """The linearized cone at (xbar, ybar, lam) as a union over partitions
    of the biactive set, in variables (u, v, mu)."""
    pt = mpcc_index_sets(problem, lam)
    n, m, q = problem.n, problem.m, problem.q
    total = n + m + q
    J = problem.grad_g(pt.y)
    Gx, Gy = problem.jac_G(pt.x, pt.y)
    hJ = _h_jacobian(problem, lam)   # rows already in (u, v, mu) coordinates
    base_C = list(hJ)
    for i in pt.I_g:
        base_C.append(_embed(J[i], n, total))
    for i in pt.I_lam:
        base_C.append(_embed((ONE,), n + m + i, total))
    base_A = [tuple(Gx[i]) + tuple(Gy[i]) + zeros(q) for i in pt.I_G]
    pieces = []
    for br in _branches(pt.I_0):
        C = list(base_C)
        A = list(base_A)
        for i in br.beta1:
            C.append(_embed(J[i], n, total))
            A.append(_embed((-ONE,), n + m + i, total))
        for i in br.beta2:
            C.append(_embed((ONE,), n + m + i, total))
            A.append(_embed(J[i], n, total))
        pieces.append(Polyhedron(A=tuple(A), b=zeros(len(A)), C=tuple(C),
                                 d=zeros(len(C)), dim=total))
    return DisjunctiveSet(tuple(pieces))


# ---------------------------------------------------------------------------
# stationarity systems


@dataclass(frozen=True)
class StationarityResult:
    mode: str
    feasible: bool
    multipliers: dict | None


def stationarity_check(problem: MpecProblem, lam: Vec,
                       mode: str = "W") -> StationarityResult:
    """Exact LP feasibility of the weak (W) or Mordukhovich (M)
    stationarity system at (xbar, ybar, lam).

    Multipliers: nu (free, equilibrium rows), gamma (g-rows), delta
    (lambda-rows, eliminated by delta_i = grad g_i . nu), rho >= 0 on the
    active upper rows.  M-mode enumerates the limiting-normal-cone cases of
    the complementarity pair per biactive index.
    """
    if problem.F is None:
        raise MissingObjective("problem has no objective F")
    if mode not in ("W", "M"):
        raise ValueError(f"unknown stationarity mode {mode!r}")
    pt = mpcc_index_sets(problem, lam)
    n, m, p, q = problem.n, problem.m, problem.p, problem.q
    from .model import gradient
    dF = gradient(problem.F, problem.point)
    J = problem.grad_g(pt.y)
    Gx, Gy = problem.jac_G(pt.x, pt.y)
    hJ = _h_jacobian(problem, lam)

    # variables: nu (m) | gamma (q) | rho (p) | t (1, strictness margin)
    nv = m + q + p + 1
    off_nu, off_ga, off_rho, off_t = 0, m, m + q, m + q + p

    def stationarity_rows():
        C, d = [], []
        for k in range(n + m):
            row = [ZERO] * nv
            for j in range(m):
                row[off_nu + j] = hJ[j][k]
            if k >= n:
                for i in range(q):
                    row[off_ga + i] = J[i][k - n]
            for i in range(p):
                row[off_rho + i] = (Gx[i][k] if k < n else Gy[i][k - n])
            C.append(tuple(row))
            d.append(-dF[k])
        return C, d

    def delta_of_nu(i):
        # delta_i = grad g_i(ybar) . nu, induced by the lambda-components
        row = [ZERO] * nv
        for j in range(m):
            row[off_nu + j] = J[i][j]
        return row

    base_C, base_d = stationarity_rows()
    base_A, base_b = [], []
    for i in range(q):
        if i in pt.I_lam:            # g_i < 0: gamma_i = 0
            r = [ZERO] * nv
            r[off_ga + i] = ONE
            base_C.append(tuple(r)); base_d.append(ZERO)
        if i in pt.I_g:              # lam_i > 0: delta_i = 0
            base_C.append(tuple(delta_of_nu(i))); base_d.append(ZERO)
    for i in range(p):
        r = [ZERO] * nv
        r[off_rho + i] = ONE
        if i in pt.I_G:
            base_A.append(tuple(-x for x in r)); base_b.append(ZERO)
        else:
            base_C.append(tuple(r)); base_d.append(ZERO)

    def solve(case_C, case_d, case_A, case_b, strict: bool):
        obj = [ZERO] * nv
        obj[off_t] = ONE
        A = case_A + [tuple(ONE if k == off_t else ZERO for k in range(nv))]
        b = case_b + [ONE]
        out = lp_solve(LpProblem(objective=tuple(obj), A=tuple(A), b=tuple(b),
                                 C=tuple(case_C), d=tuple(case_d),
                                 sense=Sense.MAX))
        if out.status is not LpStatus.OPTIMAL:
            return None
        if strict and out.value <= 0:
            return None
        return out.x

    def extract(xsol):
        nu = xsol[off_nu:off_nu + m]
        gamma = xsol[off_ga:off_ga + q]
        rho = xsol[off_rho:off_rho + p]
        delta = tuple(dot(J[i], nu) for i in range(q))
        return {"nu": nu, "gamma": gamma, "delta": delta, "rho": rho}

    if mode == "W":
        xsol = solve(base_C, base_d, base_A, base_b, strict=False)
        return StationarityResult("W", xsol is not None,
                                  extract(xsol) if xsol is not None else None)

    # M-mode: for each biactive index, one of three normal-cone cases
    for cases in itertools.product(("gamma0", "delta0", "both_pos"),
                                   repeat=len(pt.I_0)):
        C, d = list(base_C), list(base_d)
        A, b = list(base_A), list(base_b)
        strict = False
        for i, case in zip(pt.I_0, cases):
            if case == "gamma0":
                r = [ZERO] * nv
                r[off_ga + i] = ONE
                C.append(tuple(r)); d.append(ZERO)
            elif case == "delta0":
                C.append(tuple(delta_of_nu(i))); d.append(ZERO)
            else:
                strict = True
                r = [ZERO] * nv
                r[off_ga + i] = -ONE
                r[off_t] = ONE
                A.append(tuple(r)); b.append(ZERO)       # gamma_i >= t
                r2 = [-x for x in delta_of_nu(i)]
                r2[off_t] = ONE
                A.append(tuple(r2)); b.append(ZERO)      # delta_i >= t
        xsol = solve(C, d, A, b, strict=strict)
        if xsol is not None:
            return StationarityResult("M", True, extract(xsol))
    return StationarityResult("M", False, None)


# ---------------------------------------------------------------------------
# GCQ-gap evidence


@dataclass(frozen=True)
class GcqEvidence:
    direction: Vec
    in_linearized_cone: bool
    ratios: tuple
    distances: tuple
    t_schedule: tuple
    tag: str          # GACQ_VIOLATION_EVIDENCE | TANGENT_CONSISTENT | INCONCLUSIVE
    expected_member: bool | None = None

    def to_json_dict(self) -> dict:
        return {"direction": [str(v) for v in self.direction],
                "in_linearized_cone": self.in_linearized_cone,
                "t": list(self.t_schedule),
                "distance": list(self.distances),
                "ratio": list(self.ratios), "tag": self.tag,
                "expected_member": self.expected_member,
                "note": "numerical evidence only"}


def gcq_evidence(problem: MpecProblem, lam: Vec, direction: Vec,
                 t_schedule=(1e-1, 1e-2, 1e-3, 1e-4), budget: int = 200,
                 seed: int = 0, away_tol: float = 1e-2,
                 vanish_tol: float = 1e-3,
                 expected_tangent: Polyhedron | None = None) -> GcqEvidence:
    """Distance-ratio probe along an exact member of the linearized cone.

    Ratios bounded away from zero are labeled evidence of a tangent-cone /
    linearized-cone gap (GACQ violation) -- never an exact verdict.
    """
    from .oracle import dist_mpcc
    direction = vec(direction)
    pt = mpcc_index_sets(problem, lam)
    cone = mpec_linearized_cone(problem, lam)
    if not cone.contains(direction):
        raise DirectionNotInLinCone(f"{direction} is not in the linearized cone")
    base = tuple(pt.x) + tuple(pt.y) + tuple(pt.lam)
    dists, ratios = [], []
    for t in t_schedule:
        # exact binary t keeps z rational, so exactly feasible probe points
        # (e.g. the zero direction) short-circuit to distance 0
        tr = Fraction(t)
        z = [bv + tr * dv for bv, dv in zip(base, direction)]
        res = dist_mpcc(problem, z, budget=budget, seed=seed)
        dists.append(res.value)
        ratios.append(res.value / t)
    if is_zero_vec(direction) or (ratios and ratios[-1] < vanish_tol):
        tag = "TANGENT_CONSISTENT"
    elif ratios and all(r >= away_tol for r in ratios):
        tag = "GACQ_VIOLATION_EVIDENCE"
    else:
        tag = "INCONCLUSIVE"
    expected = expected_tangent.contains(direction) if expected_tangent else None
    return GcqEvidence(direction, True, tuple(ratios), tuple(dists),
                       tuple(t_schedule), tag, expected)
