"""Exact rational vectors, matrices, rank/nullspace, and a certified LP solver.

Everything in this module is pure ``fractions.Fraction`` arithmetic: no
floats, no rounding, no tolerances.  The simplex solver uses Bland's rule,
so it terminates and is bit-for-bit deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import gcd

Rational = Fraction
Vec = tuple[Fraction, ...]
Mat = tuple[Vec, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


class DimensionMismatch(ValueError):
    pass


def rat(x) -> Fraction:
    """Coerce ints, 'p/q' strings and decimal strings to an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        raise TypeError("floats are not accepted in exact arithmetic; pass a string")
    raise TypeError(f"cannot interpret {x!r} as a rational")


def vec(xs) -> Vec:
    return tuple(rat(x) for x in xs)


def mat(rows) -> Mat:
    m = tuple(vec(r) for r in rows)
    if m and any(len(r) != len(m[0]) for r in m):
        raise DimensionMismatch("ragged matrix")
    return m


def zeros(n: int) -> Vec:
    return (ZERO,) * n


def unit(n: int, i: int) -> Vec:
    return tuple(ONE if j == i else ZERO for j in range(n))


def dot(a: Vec, b: Vec) -> Fraction:
    if len(a) != len(b):
        raise DimensionMismatch(f"dot: {len(a)} vs {len(b)}")
    return sum((x * y for x, y in zip(a, b)), ZERO)


def vadd(a: Vec, b: Vec) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: Vec, b: Vec) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def vscale(c: Fraction, a: Vec) -> Vec:
    return tuple(c * x for x in a)


def is_zero_vec(a: Vec) -> bool:
    return all(x == 0 for x in a)


def matvec(M: Mat, x: Vec) -> Vec:
    return tuple(dot(row, x) for row in M)


def transpose(M: Mat) -> Mat:
    if not M:
        return ()
    return tuple(tuple(row[j] for row in M) for j in range(len(M[0])))


def matmul(A: Mat, B: Mat) -> Mat:
    Bt = transpose(B)
    return tuple(tuple(dot(row, col) for col in Bt) for row in A)


def identity(n: int) -> Mat:
    return tuple(unit(n, i) for i in range(n))


def primitive(v: Vec) -> Vec:
    """Scale a nonzero rational vector to a primitive integer vector (same ray)."""
    if is_zero_vec(v):
        return v
    denom_lcm = 1
    for x in v:
        denom_lcm = denom_lcm * x.denominator // gcd(denom_lcm, x.denominator)
    ints = [x.numerator * (denom_lcm // x.denominator) for x in v]
    g = 0
    for k in ints:
        g = gcd(g, abs(k))
    return tuple(Fraction(k, g) for k in ints)


# ---------------------------------------------------------------------------
# rank / nullspace


@dataclass(frozen=True)
class BasisInfo:
    rank: int
    nullspace_basis: tuple[Vec, ...]
    row_independent: bool


def linear_basis(M: Mat) -> BasisInfo:
    """Exact rank and nullspace of a rational matrix.

    rank + len(nullspace_basis) always equals the column count, and every
    basis vector v satisfies M v = 0 exactly.
    """
    rows = [list(r) for r in M]
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
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
    rank = len(pivots)
    free_cols = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free_cols:
        v = [ZERO] * ncols
        v[fc] = ONE
        for pr, pc in enumerate(pivots):
            v[pc] = -rows[pr][fc]
        basis.append(tuple(v))
    return BasisInfo(rank=rank, nullspace_basis=tuple(basis),
                     row_independent=(rank == nrows))


def row_space_contains(M: Mat, v: Vec) -> bool:
    """Whether v lies in the row space of M (exact)."""
    if not M:
        return is_zero_vec(v)
    base = linear_basis(M)
    aug = linear_basis(M + (v,))
    return aug.rank == base.rank


# ---------------------------------------------------------------------------
# linear programming


class Sense(Enum):
    MIN = "min"
    MAX = "max"


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpProblem:
    """max/min c.x  subject to  A x <= b,  C x = d  (x free)."""
    objective: Vec
    A: Mat = ()
    b: Vec = ()
    C: Mat = ()
    d: Vec = ()
    sense: Sense = Sense.MAX

    def __post_init__(self):
        n = len(self.objective)
        if len(self.A) != len(self.b) or len(self.C) != len(self.d):
            raise DimensionMismatch("row/rhs count mismatch")
        for row in tuple(self.A) + tuple(self.C):
            if len(row) != n:
                raise DimensionMismatch("row length differs from objective length")


@dataclass(frozen=True)
class LpOutcome:
    """Certified LP outcome.

    - OPTIMAL: ``x`` is exactly feasible, ``value`` = objective at x, and the
      dual (``dual_ineq`` >= 0, ``dual_eq`` free) closes the duality gap
      exactly: A^T y + C^T z equals c (for MAX) or -c (for MIN), and
      b.y + d.z equals value (MAX) resp. -value (MIN).
    - INFEASIBLE: ``farkas`` is a certificate over the combined rows
      [A; C; -C] with rhs [b; d; -d]: farkas >= 0, farkas^T rows = 0 and
      farkas^T rhs < 0.
    - UNBOUNDED: ``ray`` is a feasible recession direction with A ray <= 0,
      C ray = 0 improving the objective.
    """
    status: LpStatus
    x: Vec | None = None
    value: Fraction | None = None
    dual_ineq: Vec | None = None
    dual_eq: Vec | None = None
    farkas: Vec | None = None
    ray: Vec | None = None


class _Tableau:
    """Dense simplex tableau over Fractions with Bland pivoting."""

    def __init__(self, rows: list[list[Fraction]], rhs: list[Fraction],
                 basis: list[int]):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.ncols = len(rows[0]) if rows else 0

    def pivot(self, r: int, c: int) -> None:
        piv = self.rows[r][c]
        inv = ONE / piv
        self.rows[r] = [x * inv for x in self.rows[r]]
        self.rhs[r] *= inv
        for i in range(len(self.rows)):
            if i != r and self.rows[i][c] != 0:
                f = self.rows[i][c]
                self.rows[i] = [x - f * y for x, y in zip(self.rows[i], self.rows[r])]
                self.rhs[i] -= f * self.rhs[r]
        self.basis[r] = c

    def reduced_costs(self, cost: list[Fraction]) -> list[Fraction]:
        # r_j = c_j - sum_i c_{basis_i} * T[i][j]
        cb = [cost[b] for b in self.basis]
        red = list(cost)
        for i, cbi in enumerate(cb):
            if cbi != 0:
                row = self.rows[i]
                for j in range(self.ncols):
                    if row[j] != 0:
                        red[j] -= cbi * row[j]
        return red

    def objective_value(self, cost: list[Fraction]) -> Fraction:
        return sum((cost[b] * self.rhs[i] for i, b in enumerate(self.basis)), ZERO)

    def maximize(self, cost: list[Fraction], allowed) -> tuple[str, int]:
        """Bland's rule; returns ('optimal', -1) or ('unbounded', entering)."""
        while True:
            red = self.reduced_costs(cost)
            enter = next((j for j in range(self.ncols)
                          if allowed[j] and red[j] > 0), None)
            if enter is None:
                return "optimal", -1
            leave = None
            best = None
            for i in range(len(self.rows)):
                a = self.rows[i][enter]
                if a > 0:
                    ratio = self.rhs[i] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best:
                        best = key
                        leave = i
            if leave is None:
                return "unbounded", enter
            self.pivot(leave, enter)


def lp_solve(p: LpProblem) -> LpOutcome:
    """Two-phase exact simplex with duality / Farkas / ray certificates."""
    n = len(p.objective)
    c = list(p.objective)
    if p.sense is Sense.MIN:
        c = [-x for x in c]

    ineq = [list(r) for r in p.A]
    eq = [list(r) for r in p.C]
    n_ineq, n_eq = len(ineq), len(eq)
    m = n_ineq + n_eq
    # columns: u (n) | v (n) | slack (n_ineq) | artificial (m)
    n_real = 2 * n + n_ineq
    ncols = n_real + m

    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    sigma: list[Fraction] = []
    for i in range(m):
        a = ineq[i] if i < n_ineq else eq[i - n_ineq]
        bi = p.b[i] if i < n_ineq else p.d[i - n_ineq]
        s = ONE if bi >= 0 else -ONE
        sigma.append(s)
        row = [s * x for x in a] + [-s * x for x in a] + [ZERO] * n_ineq + [ZERO] * m
        if i < n_ineq:
            row[2 * n + i] = s
        row[n_real + i] = ONE
        rows.append(row)
        rhs.append(s * bi)

    if m == 0:
        # no constraints: optimum exists only for zero objective; the ray is
        # built from the internal MAX costs, so it improves either sense
        if all(x == 0 for x in c):
            return LpOutcome(LpStatus.OPTIMAL, x=zeros(n), value=ZERO,
                             dual_ineq=(), dual_eq=())
        ray = tuple(ONE if x > 0 else (-ONE if x < 0 else ZERO) for x in c)
        return LpOutcome(LpStatus.UNBOUNDED, ray=ray)

    tab = _Tableau(rows, rhs, basis=[n_real + i for i in range(m)])

    # phase 1: maximize -sum(artificials)
    cost1 = [ZERO] * n_real + [-ONE] * m
    allowed1 = [True] * ncols
    tab.maximize(cost1, allowed1)
    if tab.objective_value(cost1) < 0:
        # infeasible; the phase-1 simplex multipliers w (mapped back through
        # the row scaling) satisfy w.[A;C] = 0, w_ineq >= 0 and w.[b;d] < 0
        red = tab.reduced_costs(cost1)
        pi = [-ONE - red[n_real + i] for i in range(m)]
        w = [sigma[i] * pi[i] for i in range(m)]
        y = [w[i] for i in range(n_ineq)]
        y += [max(w[n_ineq + i], ZERO) for i in range(n_eq)]
        y += [max(-w[n_ineq + i], ZERO) for i in range(n_eq)]
        return LpOutcome(LpStatus.INFEASIBLE, farkas=tuple(y))

    # drive any artificial still basic out of the basis (or leave it on an
    # all-zero redundant row, where it stays at level 0)
    for i in range(m):
        if tab.basis[i] >= n_real:
            enter = next((j for j in range(n_real) if tab.rows[i][j] != 0), None)
            if enter is not None:
                tab.pivot(i, enter)

    # phase 2
    cost2 = [ZERO] * ncols
    cost2[:n] = c
    cost2[n:2 * n] = [-x for x in c]
    allowed2 = [True] * n_real + [False] * m
    state, enter = tab.maximize(cost2, allowed2)
    if state == "unbounded":
        direction = [ZERO] * n_real
        direction[enter] = ONE
        for i, b in enumerate(tab.basis):
            if b < n_real:
                direction[b] = -tab.rows[i][enter]
        ray = tuple(direction[j] - direction[n + j] for j in range(n))
        return LpOutcome(LpStatus.UNBOUNDED, ray=ray)

    xs = [ZERO] * n_real
    for i, b in enumerate(tab.basis):
        if b < n_real:
            xs[b] = tab.rhs[i]
    x = tuple(xs[j] - xs[n + j] for j in range(n))
    red = tab.reduced_costs(cost2)
    pi = [-red[n_real + i] for i in range(m)]
    dual_ineq = tuple(sigma[i] * pi[i] for i in range(n_ineq))
    dual_eq = tuple(sigma[n_ineq + i] * pi[n_ineq + i] for i in range(n_eq))
    value = dot(tuple(p.objective), x)
    return LpOutcome(LpStatus.OPTIMAL, x=x, value=value,
                     dual_ineq=dual_ineq, dual_eq=dual_eq)
