"""Floating-point brute-force cross-validation of the exact layer.

Distance solvers for the graph of the regular normal-cone map and for the
complementarity reformulation's feasible set, tangent-ratio probes
(geometric derivability checks) and error-bound probes estimating
subregularity moduli.  Everything here is numerical evidence only: verdict
tags corroborate or flag, and nothing feeds back into the exact certifiers.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .exactmath import Vec, vec
from .lowerlevel import multiplier_set
from .model import MpecProblem, Poly, RatFunc, evaluate

VANISH_TOL = 1e-3
AWAY_TOL = 1e-2
T_SCHEDULE = (1e-1, 1e-2, 1e-3, 1e-4)


class BaseNotOnGraph(ValueError):
    pass


def _poly_fn(f: Poly):
    terms = [(np.array(e), float(c)) for e, c in f.terms]

    def fn(z: np.ndarray) -> float:
        total = 0.0
        for e, c in terms:
            total += c * np.prod(z ** e)
        return total

    return fn


def _grad_fn(f: Poly):
    from .model import differentiate
    parts = [_poly_fn(differentiate(f, j)) for j in range(f.nvars)]

    def fn(z: np.ndarray) -> np.ndarray:
        return np.array([p(z) for p in parts])

    return fn


def _ratfunc_val(f: RatFunc, x: np.ndarray) -> float:
    num = _poly_fn(f.num)(x)
    den = _poly_fn(f.den)(x)
    if abs(den) < 1e-300:
        raise ZeroDivisionError
    return num / den


@dataclass(frozen=True)
class ProbeReport:
    t_schedule: tuple
    distances: tuple
    ratios: tuple
    budget: int
    seed: int
    verdict: str                   # RATIO_VANISHES | RATIO_BOUNDED_AWAY | INCONCLUSIVE
    vanish_tol: float = VANISH_TOL
    away_tol: float = AWAY_TOL

    def to_json_dict(self) -> dict:
        return {"t": list(self.t_schedule), "distance": list(self.distances),
                "ratio": list(self.ratios), "budget": self.budget,
                "seed": self.seed, "verdict": self.verdict,
                "vanish_tol": self.vanish_tol, "away_tol": self.away_tol}


def dist_graph(problem: MpecProblem, point, budget: int = 200,
               seed: int = 0) -> float:
    """Upper bound on the distance from ``point`` = (a, b) in R^{2m} to the
    graph of the regular normal-cone map of Gamma.

    Brute force over active sets S: for each S solve
    min |y - a|^2 + |grad g(y)^T lam - b|^2 with g_S(y) = 0, g rest <= 0,
    lam >= 0 supported on S, from a seeded multistart.
    """
    m, q = problem.m, problem.q
    a = np.array([float(x) for x in point[:m]])
    b = np.array([float(x) for x in point[m:]])
    g_fns = [_poly_fn(gi) for gi in problem.g]
    grad_fns = [_grad_fn(gi) for gi in problem.g]
    rng = np.random.default_rng(seed)
    best = np.inf
    subsets = list(itertools.chain.from_iterable(
        itertools.combinations(range(q), k) for k in range(q + 1)))
    starts = max(1, budget // max(1, len(subsets)))
    for S in subsets:
        k = len(S)

        def objective(z):
            y = z[:m]
            lam = z[m:]
            grad = np.zeros(m)
            for idx, i in enumerate(S):
                grad += lam[idx] * grad_fns[i](y)
            return float(np.sum((y - a) ** 2) + np.sum((grad - b) ** 2))

        cons = []
        for i in S:
            cons.append({"type": "eq", "fun": (lambda z, i=i: g_fns[i](z[:m]))})
        for i in range(q):
            if i not in S:
                cons.append({"type": "ineq",
                             "fun": (lambda z, i=i: -g_fns[i](z[:m]))})
        bounds = [(None, None)] * m + [(0.0, None)] * k
        for trial in range(starts):
            if trial == 0:
                y0 = a.copy()
                lam0 = np.ones(k)
            else:
                y0 = a + rng.normal(scale=0.5, size=m)
                lam0 = np.abs(rng.normal(scale=1.0, size=k))
            z0 = np.concatenate([y0, lam0])
            try:
                res = optimize.minimize(objective, z0, method="SLSQP",
                                        bounds=bounds, constraints=cons,
                                        options={"maxiter": 200,
                                                 "ftol": 1e-14})
            except Exception:
                continue
            if res.fun is not None and np.isfinite(res.fun):
                viol = 0.0
                y = res.x[:m]
                for i in range(q):
                    gv = g_fns[i](y)
                    viol = max(viol, gv if i not in S else abs(gv))
                if viol < 1e-7:
                    best = min(best, max(res.fun, 0.0))
    return float(np.sqrt(best)) if np.isfinite(best) else np.inf


def tangent_ratio_probe(problem: MpecProblem, base, direction,
                        t_schedule=T_SCHEDULE, budget: int = 200,
                        seed: int = 0, vanish_tol: float = VANISH_TOL,
                        away_tol: float = AWAY_TOL) -> ProbeReport:
    """Ratios dist((y,y*) + t (v,v*), gph N-hat_Gamma) / t along a direction;
    the base point must lie on the graph (validated exactly)."""
    m = problem.m
    base = vec(base)
    y, ystar = base[:m], base[m:]
    ms = multiplier_set(problem, y, ystar)   # raises InfeasiblePoint if y not in Gamma
    if not ms.is_feasible:
        raise BaseNotOnGraph("y* is not a regular normal at y")
    base_f = [float(x) for x in base]
    dir_f = [float(x) for x in vec(direction)]
    dists, ratios = [], []
    for t in t_schedule:
        pt = [bv + t * dv for bv, dv in zip(base_f, dir_f)]
        d = dist_graph(problem, pt, budget=budget, seed=seed)
        dists.append(d)
        ratios.append(d / t)
    if ratios and ratios[-1] < vanish_tol:
        verdict = "RATIO_VANISHES"
    elif ratios and all(r >= away_tol for r in ratios):
        verdict = "RATIO_BOUNDED_AWAY"
    else:
        verdict = "INCONCLUSIVE"
    return ProbeReport(tuple(t_schedule), tuple(dists), tuple(ratios),
                       budget, seed, verdict, vanish_tol, away_tol)


@dataclass(frozen=True)
class DistResult:
    value: float
    fallback: bool


def _exact_on_piece(problem: MpecProblem, z: Vec) -> bool:
    """Exact feasibility of a rational point against the solution map."""
    n, m, q = problem.n, problem.m, problem.q
    x, y, lam = z[:n], z[n:n + m], z[n + m:]
    for piece in problem.solution_map:
        if any(evaluate(r, x) > 0 for r in piece.region):
            continue
        try:
            ok = all(piece.y_formulas[j].evaluate(x) == y[j] for j in range(m)) \
                and all(piece.lambda_formulas[i].evaluate(x) == lam[i]
                        for i in range(q))
        except ZeroDivisionError:
            continue
        if ok:
            return True
    return False


def _exact_mpcc_feasible(problem: MpecProblem, z: Vec) -> bool:
    """Exact membership of a rational triple in the complementarity system
    (independent of any solution map)."""
    n, m, q = problem.n, problem.m, problem.q
    x, y, lam = z[:n], z[n:n + m], z[n + m:]
    gv = problem.g_at(y)
    if any(v > 0 for v in gv) or any(v < 0 for v in lam):
        return False
    if any(lam[i] * gv[i] != 0 for i in range(q)):
        return False
    if any(v > 0 for v in problem.G_at(x, y)):
        return False
    J = problem.grad_g(y)
    phi = problem.phi_at(x, y)
    h = tuple(phi[j] + sum((lam[i] * J[i][j] for i in range(q)),
                           phi[j] * 0) for j in range(m))
    return all(v == 0 for v in h)


def dist_mpcc(problem: MpecProblem, z, budget: int = 200,
              seed: int = 0) -> DistResult:
    """Upper bound on the distance from z = (x, y, lam) to the feasible set
    of the complementarity reformulation.

    With a solution map: exact feasibility short-circuit, then a dense grid
    over x per region piece with local refinement.  Without one: penalty
    multistart (flagged as fallback).
    """
    n, m, q = problem.n, problem.m, problem.q
    try:
        zr = vec(z)
        if _exact_mpcc_feasible(problem, zr) or \
                (problem.solution_map and _exact_on_piece(problem, zr)):
            return DistResult(0.0, False)
    except (TypeError, ValueError):
        pass
    if problem.solution_map:
        zf = np.array([float(x) for x in z])
        xc = zf[:n]
        rng = np.random.default_rng(seed)
        best = np.inf
        radius = 1.0 + float(np.linalg.norm(xc))
        steps = max(8, int(round(budget ** (1.0 / max(n, 1)))))
        axes = [np.linspace(c - radius, c + radius, steps) for c in xc]
        for piece in problem.solution_map:
            region_fns = [_poly_fn(r) for r in piece.region]

            def piece_dist(xp: np.ndarray) -> float:
                if any(r(xp) > 1e-12 for r in region_fns):
                    return np.inf
                try:
                    yp = [_ratfunc_val(f, xp) for f in piece.y_formulas]
                    lp = [_ratfunc_val(f, xp) for f in piece.lambda_formulas]
                except ZeroDivisionError:
                    return np.inf
                w = np.concatenate([xp, yp, lp])
                return float(np.linalg.norm(w - zf))

            for xp in itertools.product(*axes):
                d = piece_dist(np.array(xp))
                if d < best:
                    best = d
                    best_x = np.array(xp)
            # local refinement around the best grid point of this piece

            def penalized(xp):
                viol = sum(max(r(xp), 0.0) ** 2 for r in region_fns)
                try:
                    yp = [_ratfunc_val(f, xp) for f in piece.y_formulas]
                    lp = [_ratfunc_val(f, xp) for f in piece.lambda_formulas]
                except ZeroDivisionError:
                    return 1e18
                w = np.concatenate([xp, yp, lp])
                return float(np.sum((w - zf) ** 2) + 1e8 * viol)

            seeds = [xc] + [xc + rng.normal(scale=0.3, size=n)
                            for _ in range(3)]
            if np.isfinite(best):
                seeds.append(best_x)
            for s in seeds:
                try:
                    res = optimize.minimize(penalized, s, method="Powell",
                                            options={"maxiter": 400,
                                                     "xtol": 1e-12,
                                                     "ftol": 1e-14})
                except Exception:
                    continue
                xp = res.x
                d = piece_dist(np.array(xp))
                best = min(best, d)
        return DistResult(float(best), False)

    # penalty fallback: no solution map available
    zf = np.array([float(x) for x in z])
    h_fns = g_fns = None
    from .model import build_mpcc
    sys_ = build_mpcc(problem)
    h_fns = [_poly_fn(h) for h in sys_.h]
    g_fns = [_poly_fn(g) for g in problem.g]
    G_fns = [_poly_fn(Gp) for Gp in problem.G]
    rng = np.random.default_rng(seed)

    def infeasibility(w):
        x, y, lam = w[:n], w[n:n + m], w[n + m:]
        xy = np.concatenate([x, y])
        tot = sum(h(w) ** 2 for h in h_fns)
        gv = [g(y) for g in g_fns]
        tot += sum(max(v, 0.0) ** 2 for v in gv)
        tot += sum(max(-l, 0.0) ** 2 for l in lam)
        tot += sum((lam[i] * gv[i]) ** 2 for i in range(q))
        tot += sum(max(G(xy), 0.0) ** 2 for G in G_fns)
        return tot

    best = np.inf
    for trial in range(max(1, budget // 10)):
        w0 = zf if trial == 0 else zf + rng.normal(scale=0.5, size=len(zf))
        w = w0
        for weight in (1e2, 1e4, 1e6, 1e8):
            res = optimize.minimize(
                lambda ww: float(np.sum((ww - zf) ** 2)
                                 + weight * infeasibility(ww)),
                w, method="Powell",
                options={"maxiter": 400, "xtol": 1e-12, "ftol": 1e-14})
            w = res.x
        if infeasibility(w) < 1e-12:
            best = min(best, float(np.linalg.norm(w - zf)))
    return DistResult(float(best), True)


@dataclass(frozen=True)
class ErrorBoundReport:
    radii: tuple
    kappa: tuple                    # max dist/residual per radius
    blow_up: bool
    tag: str                        # MSCQ_FAILURE_SIGNAL | CONSISTENT_WITH_MSCQ | INCONCLUSIVE
    samples: int
    seed: int
    profiles: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {"radii": list(self.radii), "kappa": list(self.kappa),
                "blow_up": self.blow_up, "tag": self.tag,
                "samples": self.samples, "seed": self.seed,
                "profiles": {k: list(v) for k, v in self.profiles.items()}}


def _classify(kappas: list) -> tuple[bool, str]:
    finite = [k for k in kappas if np.isfinite(k) and k > 0]
    if len(finite) < 2:
        return False, "INCONCLUSIVE"
    blow = finite[-1] > 50 * finite[0]
    if blow:
        return True, "MSCQ_FAILURE_SIGNAL"
    if max(finite) <= 10 * max(finite[0], 1.0):
        return False, "CONSISTENT_WITH_MSCQ"
    return False, "INCONCLUSIVE"


def error_bound_probe_system(polys: tuple[Poly, ...], zbar,
                             radii=(1e-1, 1e-2, 1e-3, 1e-4),
                             samples: int = 50, seed: int = 0) -> ErrorBoundReport:
    """kappa-estimates for an inequality system P(z) <= 0 at a feasible zbar:
    samples z in shrinking balls, ratio dist(z, Omega) / |max(P(z), 0)|."""
    zb = np.array([float(x) for x in vec(zbar)])
    d = len(zb)
    fns = [_poly_fn(p) for p in polys]
    rng = np.random.default_rng(seed)

    def residual(z):
        return float(np.sqrt(sum(max(f(z), 0.0) ** 2 for f in fns)))

    def dist_feasible(z):
        cons = [{"type": "ineq", "fun": (lambda w, f=f: -f(w))} for f in fns]
        best = np.inf
        for trial in range(4):
            w0 = z if trial == 0 else z + rng.normal(scale=0.1, size=d)
            try:
                res = optimize.minimize(
                    lambda w: float(np.sum((w - z) ** 2)), w0,
                    method="SLSQP", constraints=cons,
                    options={"maxiter": 200, "ftol": 1e-16})
            except Exception:
                continue
            if res.success or res.fun is not None:
                w = res.x
                if max((f(w) for f in fns), default=0.0) < 1e-9:
                    best = min(best, float(np.sqrt(max(res.fun, 0.0))))
        return best

    kappas = []
    for r in radii:
        worst = 0.0
        for _ in range(samples):
            z = zb + rng.uniform(-r, r, size=d)
            res = residual(z)
            if res < 1e-14:
                continue
            dist = dist_feasible(z)
            if np.isfinite(dist):
                worst = max(worst, dist / res)
        kappas.append(worst)
    blow, tag = _classify(kappas)
    return ErrorBoundReport(tuple(radii), tuple(kappas), blow, tag, samples,
                            seed, profiles={"system": tuple(kappas)})


def error_bound_probe_mpec(problem: MpecProblem, radii=(1e-1, 1e-2, 1e-3),
                           samples: int = 20, seed: int = 0,
                           budget: int = 60) -> ErrorBoundReport:
    """kappa-estimates for the full MPEC system at (xbar, ybar), computed for
    both residual representations (direct generalized-equation residual vs
    graph-distance residual); their qualitative profiles must agree."""
    n, m, q = problem.n, problem.m, problem.q
    zb = np.array([float(x) for x in problem.point])
    rng = np.random.default_rng(seed)
    g_fns = [_poly_fn(gi) for gi in problem.g]
    grad_fns = [_grad_fn(gi) for gi in problem.g]
    phi_fns = [_poly_fn(p) for p in problem.phi]
    G_fns = [_poly_fn(Gp) for Gp in problem.G]

    def residual_m1(x, y):
        gv = [f(y) for f in g_fns]
        if max(gv, default=0.0) > 1e-9:
            return np.inf
        phi = np.array([f(np.concatenate([x, y])) for f in phi_fns])
        act = [i for i in range(q) if gv[i] > -1e-7]
        if act:
            B = np.column_stack([grad_fns[i](y) for i in act])
            lam, rnorm = optimize.nnls(B, -phi)
            gap = rnorm
        else:
            gap = float(np.linalg.norm(phi))
        up = np.sqrt(sum(max(f(np.concatenate([x, y])), 0.0) ** 2
                         for f in G_fns))
        return float(gap + up)

    def residual_m2(x, y):
        phi = np.array([f(np.concatenate([x, y])) for f in phi_fns])
        d = dist_graph(problem, np.concatenate([y, -phi]), budget=budget,
                       seed=seed)
        up = np.sqrt(sum(max(f(np.concatenate([x, y])), 0.0) ** 2
                         for f in G_fns))
        return float(d + up)

    def dist_omega(x, y):
        z = np.concatenate([x, y])
        if problem.solution_map:
            best = np.inf
            steps = 12
            radius = 0.5 + float(np.linalg.norm(x - zb[:n]))
            axes = [np.linspace(c - radius, c + radius, steps) for c in zb[:n]]
            for piece in problem.solution_map:
                region_fns = [_poly_fn(r) for r in piece.region]

                def pd(xp):
                    if any(r(xp) > 1e-12 for r in region_fns):
                        return np.inf
                    try:
                        yp = [_ratfunc_val(f, xp) for f in piece.y_formulas]
                    except ZeroDivisionError:
                        return np.inf
                    return float(np.linalg.norm(np.concatenate([xp, yp]) - z))

                cand = [np.array(p) for p in itertools.product(*axes)]
                vals = [pd(c) for c in cand]
                i = int(np.argmin(vals))
                best = min(best, vals[i])

                def pen(xp):
                    viol = sum(max(r(xp), 0.0) ** 2 for r in region_fns)
                    try:
                        yp = [_ratfunc_val(f, xp) for f in piece.y_formulas]
                    except ZeroDivisionError:
                        return 1e18
                    return float(np.sum((np.concatenate([xp, yp]) - z) ** 2)
                                 + 1e8 * viol)

                res = optimize.minimize(pen, cand[i], method="Powell",
                                        options={"maxiter": 300})
                best = min(best, pd(res.x))
            return best
        return np.inf

    prof1, prof2 = [], []
    for r in radii:
        worst1 = worst2 = 0.0
        for _ in range(samples):
            x = zb[:n] + rng.uniform(-r, r, size=n)
            y = zb[n:] + rng.uniform(-r, r, size=m)
            r1 = residual_m1(x, y)
            r2 = residual_m2(x, y)
            if r2 < 1e-12 and (r1 < 1e-12 or not np.isfinite(r1)):
                continue
            dz = dist_omega(x, y)
            if not np.isfinite(dz):
                continue
            if np.isfinite(r1) and r1 > 1e-12:
                worst1 = max(worst1, dz / r1)
            if r2 > 1e-12:
                worst2 = max(worst2, dz / r2)
        prof1.append(worst1)
        prof2.append(worst2)
    blow1, tag1 = _classify(prof1)
    blow2, tag2 = _classify(prof2)
    blow = blow1 and blow2
    tag = tag1 if tag1 == tag2 else "INCONCLUSIVE"
    kappas = tuple(max(a, b) for a, b in zip(prof1, prof2))
    return ErrorBoundReport(tuple(radii), kappas, blow, tag, samples, seed,
                            profiles={"direct": tuple(prof1),
                                      "graph": tuple(prof2)})
