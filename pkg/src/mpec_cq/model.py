"""Problem ingestion: exact polynomials, expression parsing, problem files.

Problem data (phi, g, G, F) are multivariate polynomials with rational
coefficients; decimal literals in input are converted to exact rationals
at the source (0.5 -> 1/2), so no float ever enters the exact layer.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass
from fractions import Fraction

from .exactmath import Mat, ONE, Vec, ZERO, LpStatus, LpProblem, lp_solve, rat, vec, zeros

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 1, col: int = 0):
        super().__init__(f"{message} (line {line}, col {col})")
        self.line = line
        self.col = col


class UnknownVariable(ParseError):
    pass


class DimensionMismatch(ValueError):
    pass


# ---------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class Poly:
    """Multivariate polynomial: map from exponent tuples to rational
    coefficients; zero coefficients are never stored."""
    nvars: int
    terms: tuple[tuple[tuple[int, ...], Fraction], ...]

    @staticmethod
    def _normalize(nvars: int, d: dict) -> "Poly":
        items = tuple(sorted((e, c) for e, c in d.items() if c != 0))
        return Poly(nvars, items)

    @classmethod
    def constant(cls, c, nvars: int) -> "Poly":
        c = rat(c)
        if c == 0:
            return cls(nvars, ())
        return cls(nvars, (((0,) * nvars, c),))

    @classmethod
    def variable(cls, i: int, nvars: int) -> "Poly":
        e = tuple(1 if j == i else 0 for j in range(nvars))
        return cls(nvars, ((e, ONE),))

    def _dict(self) -> dict:
        return dict(self.terms)

    def __add__(self, other: "Poly") -> "Poly":
        d = self._dict()
        for e, c in other.terms:
            d[e] = d.get(e, ZERO) + c
        return Poly._normalize(self.nvars, d)

    def __neg__(self) -> "Poly":
        return Poly(self.nvars, tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        d: dict = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                d[e] = d.get(e, ZERO) + c1 * c2
        return Poly._normalize(self.nvars, d)

    def scale(self, c) -> "Poly":
        c = rat(c)
        if c == 0:
            return Poly(self.nvars, ())
        return Poly(self.nvars, tuple((e, c * coef) for e, coef in self.terms))

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            raise ValueError("negative exponent")
        out = Poly.constant(1, self.nvars)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=0)

    def is_affine(self) -> bool:
        return self.degree() <= 1

    def constant_value(self) -> Fraction | None:
        if self.degree() == 0:
            return self.terms[0][1] if self.terms else ZERO
        return None

    def depends_on(self, i: int) -> bool:
        return any(e[i] for e, _ in self.terms)

    def embed(self, index_map: tuple[int, ...], new_nvars: int) -> "Poly":
        """Re-express over a larger variable universe; index_map[i] is the
        new position of old variable i."""
        d: dict = {}
        for e, c in self.terms:
            ne = [0] * new_nvars
            for old, k in enumerate(e):
                ne[index_map[old]] += k
            d[tuple(ne)] = d.get(tuple(ne), ZERO) + c
        return Poly._normalize(new_nvars, d)


def differentiate(f: Poly, var: int) -> Poly:
    """Exact partial derivative with respect to variable index ``var``."""
    d: dict = {}
    for e, c in f.terms:
        k = e[var]
        if k == 0:
            continue
        ne = tuple(x - 1 if j == var else x for j, x in enumerate(e))
        d[ne] = d.get(ne, ZERO) + c * k
    return Poly._normalize(f.nvars, d)


def evaluate(f: Poly, point: Vec) -> Fraction:
    """Exact value of f at a rational point."""
    if len(point) != f.nvars:
        raise DimensionMismatch(f"point has {len(point)} coords, poly {f.nvars}")
    total = ZERO
    for e, c in f.terms:
        term = c
        for x, k in zip(point, e):
            if k:
                term *= x ** k
        total += term
    return total


def gradient(f: Poly, point: Vec) -> Vec:
    return tuple(evaluate(differentiate(f, j), point) for j in range(f.nvars))


def hessian(f: Poly, point: Vec) -> Mat:
    grads = [differentiate(f, j) for j in range(f.nvars)]
    return tuple(tuple(evaluate(differentiate(grads[i], j), point)
                       for j in range(f.nvars)) for i in range(f.nvars))


def poly_to_str(f: Poly, names: tuple[str, ...]) -> str:
    if not f.terms:
        return "0"
    parts = []
    for e, c in f.terms:
        factors = []
        if c != 1 or not any(e):
            factors.append(str(c))
        for name, k in zip(names, e):
            if k == 1:
                factors.append(name)
            elif k > 1:
                factors.append(f"{name}^{k}")
        parts.append("*".join(factors))
    return " + ".join(parts)


# ---------------------------------------------------------------------------
# expression parser (precedence climbing)

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens: list[tuple[str, str, int]] = []  # (kind, value, col)
        self._scan()
        self.idx = 0

    def _scan(self):
        s = self.text
        i = 0
        while i < len(s):
            ch = s[i]
            if ch.isspace():
                i += 1
                continue
            if ch.isdigit() or (ch == "." and i + 1 < len(s) and s[i + 1].isdigit()):
                j = i
                seen_dot = False
                while j < len(s) and (s[j].isdigit() or (s[j] == "." and not seen_dot)):
                    if s[j] == ".":
                        seen_dot = True
                    j += 1
                self.tokens.append(("num", s[i:j], i))
                i = j
                continue
            if ch.isalpha() or ch == "_":
                j = i
                while j < len(s) and (s[j].isalnum() or s[j] == "_"):
                    j += 1
                self.tokens.append(("name", s[i:j], i))
                i = j
                continue
            if ch in "+-*/^()":
                self.tokens.append(("op", ch, i))
                i += 1
                continue
            raise ParseError(f"unexpected character {ch!r}", col=i)
        self.tokens.append(("end", "", len(s)))

    def peek(self):
        return self.tokens[self.idx]

    def next(self):
        t = self.tokens[self.idx]
        self.idx += 1
        return t


def parse_poly(text: str, names: tuple[str, ...]) -> Poly:
    """Parse an expression over the given variable names into an exact Poly.

    Grammar: + - * / ^ with usual precedence, unary minus, parentheses;
    ^ takes a nonnegative integer exponent; / takes a nonzero constant
    divisor.  Decimal literals become exact rationals.
    """
    nvars = len(names)
    index = {nm: i for i, nm in enumerate(names)}
    tk = _Tokenizer(text)

    def parse_atom() -> Poly:
        kind, val, col = tk.next()
        if kind == "num":
            return Poly.constant(Fraction(val), nvars)
        if kind == "name":
            if val not in index:
                raise UnknownVariable(f"unknown variable {val!r}", col=col)
            return Poly.variable(index[val], nvars)
        if kind == "op" and val == "(":
            inner = parse_expr(1)
            kind2, val2, col2 = tk.next()
            if not (kind2 == "op" and val2 == ")"):
                raise ParseError("expected ')'", col=col2)
            return inner
        if kind == "op" and val == "-":
            return -parse_atom_with_power()
        if kind == "op" and val == "+":
            return parse_atom_with_power()
        raise ParseError(f"unexpected token {val!r}", col=col)

    def parse_atom_with_power() -> Poly:
        base = parse_atom()
        kind, val, col = tk.peek()
        if kind == "op" and val == "^":
            tk.next()
            expo = parse_atom_with_power()
            k = expo.constant_value()
            if k is None or k.denominator != 1 or k < 0:
                raise ParseError("exponent must be a nonnegative integer", col=col)
            return base ** int(k)
        return base

    def parse_expr(min_prec: int) -> Poly:
        left = parse_atom_with_power()
        while True:
            kind, val, col = tk.peek()
            if kind != "op" or val not in ("+", "-", "*", "/"):
                return left
            prec = _PREC[val]
            if prec < min_prec:
                return left
            tk.next()
            right = parse_expr(prec + 1)
            if val == "+":
                left = left + right
            elif val == "-":
                left = left - right
            elif val == "*":
                left = left * right
            else:
                c = right.constant_value()
                if c is None or c == 0:
                    raise ParseError("division requires a nonzero constant divisor",
                                     col=col)
                left = left.scale(ONE / c)

    out = parse_expr(1)
    kind, val, col = tk.peek()
    if kind != "end":
        raise ParseError(f"trailing input {val!r}", col=col)
    return out


# ---------------------------------------------------------------------------
# rational functions (solution-map formulas only; never differentiated)


@dataclass(frozen=True)
class RatFunc:
    num: Poly
    den: Poly

    def evaluate(self, point: Vec) -> Fraction:
        d = evaluate(self.den, point)
        if d == 0:
            raise ZeroDivisionError("rational formula singular at this point")
        return evaluate(self.num, point) / d

    def is_poly(self) -> bool:
        return self.den.constant_value() == 1


def parse_ratfunc(text: str, names: tuple[str, ...]) -> RatFunc:
    """Like parse_poly but '/' may take any nonzero sub-expression, producing
    an exact ratio of polynomials."""
    nvars = len(names)
    index = {nm: i for i, nm in enumerate(names)}
    tk = _Tokenizer(text)
    one = Poly.constant(1, nvars)

    def norm(num: Poly, den: Poly) -> RatFunc:
        c = den.constant_value()
        if c is not None:
            if c == 0:
                raise ParseError("division by zero")
            return RatFunc(num.scale(ONE / c), one)
        return RatFunc(num, den)

    def parse_atom() -> RatFunc:
        kind, val, col = tk.next()
        if kind == "num":
            return RatFunc(Poly.constant(Fraction(val), nvars), one)
        if kind == "name":
            if val not in index:
                raise UnknownVariable(f"unknown variable {val!r}", col=col)
            return RatFunc(Poly.variable(index[val], nvars), one)
        if kind == "op" and val == "(":
            inner = parse_expr(1)
            kind2, val2, col2 = tk.next()
            if not (kind2 == "op" and val2 == ")"):
                raise ParseError("expected ')'", col=col2)
            return inner
        if kind == "op" and val == "-":
            f = parse_atom_with_power()
            return RatFunc(-f.num, f.den)
        if kind == "op" and val == "+":
            return parse_atom_with_power()
        raise ParseError(f"unexpected token {val!r}", col=col)

    def parse_atom_with_power() -> RatFunc:
        base = parse_atom()
        kind, val, col = tk.peek()
        if kind == "op" and val == "^":
            tk.next()
            expo = parse_atom_with_power()
            k = expo.num.constant_value()
            kd = expo.den.constant_value()
            if k is None or kd != 1 or k.denominator != 1 or k < 0:
                raise ParseError("exponent must be a nonnegative integer", col=col)
            return norm(base.num ** int(k), base.den ** int(k))
        return base

    def parse_expr(min_prec: int) -> RatFunc:
        left = parse_atom_with_power()
        while True:
            kind, val, col = tk.peek()
            if kind != "op" or val not in ("+", "-", "*", "/"):
                return left
            prec = _PREC[val]
            if prec < min_prec:
                return left
            tk.next()
            right = parse_expr(prec + 1)
            if val == "+":
                left = norm(left.num * right.den + right.num * left.den,
                            left.den * right.den)
            elif val == "-":
                left = norm(left.num * right.den - right.num * left.den,
                            left.den * right.den)
            elif val == "*":
                left = norm(left.num * right.num, left.den * right.den)
            else:
                if not right.num.terms:
                    raise ParseError("division by zero", col=col)
                left = norm(left.num * right.den, left.den * right.num)

    out = parse_expr(1)
    kind, val, col = tk.peek()
    if kind != "end":
        raise ParseError(f"trailing input {val!r}", col=col)
    return out


def ratfunc_to_str(f: RatFunc, names: tuple[str, ...]) -> str:
    if f.is_poly():
        return poly_to_str(f.num, names)
    return f"({poly_to_str(f.num, names)}) / ({poly_to_str(f.den, names)})"


# ---------------------------------------------------------------------------
# problem container


@dataclass(frozen=True)
class SolutionPiece:
    """One region of a piecewise solution map: formulas in x valid where
    every region polynomial is <= 0."""
    region: tuple[Poly, ...]
    y_formulas: tuple[RatFunc, ...]
    lambda_formulas: tuple[RatFunc, ...]


@dataclass(frozen=True)
class FeasibilityReport:
    g_values: Vec
    G_values: Vec
    lower_feasible: bool
    upper_feasible: bool
    ystar: Vec
    multiplier_feasible: bool

    @property
    def ok(self) -> bool:
        return self.lower_feasible and self.upper_feasible and self.multiplier_feasible


@dataclass(frozen=True)
class MpecProblem:
    """Polynomial MPEC data: 0 in phi(x,y) + N_Gamma(y), G(x,y) <= 0, with
    Gamma = {y : g(y) <= 0} and reference point (xbar, ybar)."""
    n: int
    m: int
    p: int
    q: int
    phi: tuple[Poly, ...]          # over (x1..xn, y1..ym)
    g: tuple[Poly, ...]            # over (y1..ym)
    G: tuple[Poly, ...]            # over (x1..xn, y1..ym)
    F: Poly | None                 # over (x1..xn, y1..ym)
    xbar: Vec
    ybar: Vec
    solution_map: tuple[SolutionPiece, ...] = ()

    @property
    def xy_names(self) -> tuple[str, ...]:
        return tuple(f"x{i+1}" for i in range(self.n)) + \
            tuple(f"y{j+1}" for j in range(self.m))

    @property
    def y_names(self) -> tuple[str, ...]:
        return tuple(f"y{j+1}" for j in range(self.m))

    @property
    def point(self) -> Vec:
        return tuple(self.xbar) + tuple(self.ybar)

    # -- exact data at points ------------------------------------------------

    def g_at(self, y: Vec) -> Vec:
        return tuple(evaluate(gi, y) for gi in self.g)

    def G_at(self, x: Vec, y: Vec) -> Vec:
        return tuple(evaluate(Gi, tuple(x) + tuple(y)) for Gi in self.G)

    def phi_at(self, x: Vec, y: Vec) -> Vec:
        return tuple(evaluate(pj, tuple(x) + tuple(y)) for pj in self.phi)

    def grad_g(self, y: Vec) -> Mat:
        """q x m Jacobian of g."""
        return tuple(gradient(gi, y) for gi in self.g)

    def hess_g(self, i: int, y: Vec) -> Mat:
        return hessian(self.g[i], y)

    def hess_lambda_g(self, lam: Vec, y: Vec) -> Mat:
        """Hessian of lambda^T g at y (m x m)."""
        H = [[ZERO] * self.m for _ in range(self.m)]
        for i, li in enumerate(lam):
            if li == 0:
                continue
            Hi = self.hess_g(i, y)
            for a in range(self.m):
                for b in range(self.m):
                    H[a][b] += li * Hi[a][b]
        return tuple(tuple(row) for row in H)

    def jac_phi(self, x: Vec, y: Vec) -> tuple[Mat, Mat]:
        """(grad_x phi, grad_y phi): m x n and m x m Jacobian blocks."""
        pt = tuple(x) + tuple(y)
        full = tuple(gradient(pj, pt) for pj in self.phi)
        gx = tuple(row[:self.n] for row in full)
        gy = tuple(row[self.n:] for row in full)
        return gx, gy

    def jac_G(self, x: Vec, y: Vec) -> tuple[Mat, Mat]:
        pt = tuple(x) + tuple(y)
        full = tuple(gradient(Gi, pt) for Gi in self.G)
        gx = tuple(row[:self.n] for row in full)
        gy = tuple(row[self.n:] for row in full)
        return gx, gy

    def ystar(self) -> Vec:
        """The dual reference point ybar* = -phi(xbar, ybar)."""
        return tuple(-v for v in self.phi_at(self.xbar, self.ybar))


@dataclass(frozen=True)
class MpccSystem:
    """The complementarity reformulation over variables (x, y, lambda):
    h(x,y,lam) = phi(x,y) + grad g(y)^T lam = 0, 0 >= g(y) perp -lam <= 0,
    G(x,y) <= 0."""
    problem: MpecProblem
    h: tuple[Poly, ...]            # over (x, y, lambda)
    g_lifted: tuple[Poly, ...]     # g over (x, y, lambda)
    G_lifted: tuple[Poly, ...]

    @property
    def nvars(self) -> int:
        return self.problem.n + self.problem.m + self.problem.q

    def var_names(self) -> tuple[str, ...]:
        pr = self.problem
        return pr.xy_names + tuple(f"lambda{i+1}" for i in range(pr.q))

    def h_at(self, z: Vec) -> Vec:
        return tuple(evaluate(hj, z) for hj in self.h)


def build_mpcc(problem: MpecProblem) -> MpccSystem:
    """Assemble h_j = phi_j + sum_i lambda_i * dg_i/dy_j symbolically."""
    n, m, q = problem.n, problem.m, problem.q
    nv = n + m + q
    xy_map = tuple(range(n + m))
    y_map = tuple(range(n, n + m))
    h = []
    for j in range(m):
        hj = problem.phi[j].embed(xy_map, nv)
        for i in range(q):
            dg = differentiate(problem.g[i], j).embed(y_map, nv)
            lam_i = Poly.variable(n + m + i, nv)
            hj = hj + lam_i * dg
        h.append(hj)
    g_lift = tuple(gi.embed(y_map, nv) for gi in problem.g)
    G_lift = tuple(Gi.embed(xy_map, nv) for Gi in problem.G)
    return MpccSystem(problem, tuple(h), g_lift, G_lift)


def validate_point(problem: MpecProblem) -> FeasibilityReport:
    """g(ybar) <= 0, G(xbar,ybar) <= 0, and feasibility of the multiplier
    system grad g(ybar)^T lam = ybar*, lam >= 0 supported on active rows."""
    gv = problem.g_at(problem.ybar)
    Gv = problem.G_at(problem.xbar, problem.ybar)
    lower = all(v <= 0 for v in gv)
    upper = all(v <= 0 for v in Gv)
    ystar = problem.ystar()
    mult_ok = False
    if lower:
        J = problem.grad_g(problem.ybar)
        q, myn = problem.q, problem.m
        # lam >= 0, lam_i = 0 off the active set, J^T lam = ystar
        A = tuple(tuple(-ONE if j == i else ZERO for j in range(q)) for i in range(q))
        C = [tuple(J[i][k] for i in range(q)) for k in range(myn)]
        d = list(ystar)
        for i in range(q):
            if gv[i] != 0:
                C.append(tuple(ONE if j == i else ZERO for j in range(q)))
                d.append(ZERO)
        out = lp_solve(LpProblem(objective=zeros(q), A=A, b=zeros(q),
                                 C=tuple(C), d=tuple(d)))
        mult_ok = out.status is LpStatus.OPTIMAL
    return FeasibilityReport(gv, Gv, lower, upper, ystar, mult_ok)


# ---------------------------------------------------------------------------
# problem files


def _require(cond: bool, msg: str):
    if not cond:
        raise DimensionMismatch(msg)


def parse_problem(text: str) -> MpecProblem:
    """Parse a problem file (TOML; see the README for the exact grammar)."""
    try:
        data = _toml.loads(text)
    except _toml.TOMLDecodeError as exc:
        raise ParseError(f"bad problem file: {exc}") from exc
    try:
        dims = data["dims"]
        n, m, p, q = (int(dims[k]) for k in ("n", "m", "p", "q"))
        funcs = data["functions"]
    except KeyError as exc:
        raise ParseError(f"missing section or key: {exc}") from exc
    xy_names = tuple(f"x{i+1}" for i in range(n)) + tuple(f"y{j+1}" for j in range(m))
    y_names = tuple(f"y{j+1}" for j in range(m))
    x_names = tuple(f"x{i+1}" for i in range(n))

    phi = tuple(parse_poly(s, xy_names) for s in funcs.get("phi", []))
    g = tuple(parse_poly(s, y_names) for s in funcs.get("g", []))
    G = tuple(parse_poly(s, xy_names) for s in funcs.get("G", []))
    F = parse_poly(funcs["F"], xy_names) if "F" in funcs else None
    _require(len(phi) == m, f"phi has {len(phi)} components, expected m={m}")
    _require(len(g) == q, f"g has {len(g)} components, expected q={q}")
    _require(len(G) == p, f"G has {len(G)} components, expected p={p}")

    point = data.get("point", {})
    xbar = vec([str(v) for v in point.get("x", [])])
    ybar = vec([str(v) for v in point.get("y", [])])
    _require(len(xbar) == n, f"point x has {len(xbar)} coords, expected n={n}")
    _require(len(ybar) == m, f"point y has {len(ybar)} coords, expected m={m}")

    pieces = []
    for entry in data.get("solution_map", []):
        region = []
        for expr in entry.get("region", []):
            expr = expr.strip()
            if expr.endswith("<= 0"):
                expr = expr[:-4]
            region.append(parse_poly(expr, x_names))
        yf = tuple(parse_ratfunc(s, x_names) for s in entry.get("y", []))
        lf = tuple(parse_ratfunc(s, x_names) for s in entry.get("lambda", []))
        _require(len(yf) == m, "solution_map y formula count != m")
        _require(len(lf) == q, "solution_map lambda formula count != q")
        pieces.append(SolutionPiece(tuple(region), yf, lf))

    return MpecProblem(n=n, m=m, p=p, q=q, phi=phi, g=g, G=G, F=F,
                       xbar=xbar, ybar=ybar, solution_map=tuple(pieces))


def load_problem(path: str) -> MpecProblem:
    with open(path, "rb") as fh:
        return parse_problem(fh.read().decode("utf-8"))


def serialize_problem(problem: MpecProblem) -> str:
    """Emit a problem file that parses back to a structurally identical
    MpecProblem (round-trip identity)."""
    pr = problem
    xy, yn = pr.xy_names, pr.y_names
    xn = tuple(f"x{i+1}" for i in range(pr.n))

    def arr(polys, names):
        return "[" + ", ".join(f'"{poly_to_str(f, names)}"' for f in polys) + "]"

    lines = ["[dims]", f"n = {pr.n}", f"m = {pr.m}", f"p = {pr.p}", f"q = {pr.q}",
             "", "[functions]", f"phi = {arr(pr.phi, xy)}", f"g = {arr(pr.g, yn)}",
             f"G = {arr(pr.G, xy)}"]
    if pr.F is not None:
        lines.append(f'F = "{poly_to_str(pr.F, xy)}"')
    lines += ["", "[point]",
              "x = [" + ", ".join(f'"{v}"' for v in pr.xbar) + "]",
              "y = [" + ", ".join(f'"{v}"' for v in pr.ybar) + "]"]
    def rarr(funcs, names):
        return "[" + ", ".join(f'"{ratfunc_to_str(f, names)}"' for f in funcs) + "]"

    for piece in pr.solution_map:
        lines += ["", "[[solution_map]]",
                  "region = [" + ", ".join(
                      f'"{poly_to_str(f, xn)} <= 0"' for f in piece.region) + "]",
                  f"y = {rarr(piece.y_formulas, xn)}",
                  f"lambda = {rarr(piece.lambda_formulas, xn)}"]
    return "\n".join(lines) + "\n"
