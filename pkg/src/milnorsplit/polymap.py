"""Half-complex polynomial maps F(z, zb, w, wb): parsing, evaluation, Wirtinger calculus.

A :class:`MapExpr` is an immutable expression tree. For evaluation and
differentiation it is expanded once into a sparse polynomial in the four
formally independent symbols ``z, zb, w, wb`` (conjugation swaps ``z <-> zb``
and ``w <-> wb`` and conjugates coefficients), whose derivatives are taken
exactly and compiled to vectorized Python functions.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := factor ("*" factor)*
    factor := atom ("^" uint)?
    atom   := "z" | "zb" | "w" | "wb" | "i" | number | "(" expr ")"
            | "conj(" expr ")" | "abs2(" expr ")"

A leading ``-`` or ``+`` on a term is accepted as a convenience.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import CriticalPoint, ParseError
from .quaternion import TwoFrame, UnitPureQuaternion, l_of_frame, r_of_frame

VARS = ("z", "zb", "w", "wb")
_CONJ_PERM = (1, 0, 3, 2)


# -- expression tree ---------------------------------------------------------


class Node:
    __slots__ = ()


@dataclass(frozen=True)
class Const(Node):
    value: complex


@dataclass(frozen=True)
class Var(Node):
    name: str


@dataclass(frozen=True)
class Add(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Sub(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Mul(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Neg(Node):
    arg: Node


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exp: int


@dataclass(frozen=True)
class Conj(Node):
    arg: Node


def node_to_source(n: Node) -> str:
    if isinstance(n, Const):
        return _format_complex(n.value)
    if isinstance(n, Var):
        return n.name
    if isinstance(n, Add):
        return f"({node_to_source(n.left)} + {node_to_source(n.right)})"
    if isinstance(n, Sub):
        return f"({node_to_source(n.left)} - {node_to_source(n.right)})"
    if isinstance(n, Mul):
        return f"{node_to_source(n.left)}*{node_to_source(n.right)}"
    if isinstance(n, Neg):
        return f"(-{node_to_source(n.arg)})"
    if isinstance(n, Pow):
        return f"{node_to_source(n.base)}^{n.exp}"
    if isinstance(n, Conj):
        return f"conj({node_to_source(n.arg)})"
    raise TypeError(n)


def _format_complex(c: complex) -> str:
    c = complex(c)
    re_, im = c.real, c.imag
    if im == 0:
        return repr(re_) if re_ >= 0 else f"({re_!r})"
    if re_ == 0:
        return f"({im!r}*i)"
    return f"({re_!r} + {im!r}*i)"


def evaluate_node(n: Node, z, w):
    """Direct tree-walking evaluation (reference path, used by tests)."""
    if isinstance(n, Const):
        return n.value
    if isinstance(n, Var):
        return {"z": z, "zb": np.conj(z), "w": w, "wb": np.conj(w)}[n.name]
    if isinstance(n, Add):
        return evaluate_node(n.left, z, w) + evaluate_node(n.right, z, w)
    if isinstance(n, Sub):
        return evaluate_node(n.left, z, w) - evaluate_node(n.right, z, w)
    if isinstance(n, Mul):
        return evaluate_node(n.left, z, w) * evaluate_node(n.right, z, w)
    if isinstance(n, Neg):
        return -evaluate_node(n.arg, z, w)
    if isinstance(n, Pow):
        base = evaluate_node(n.base, z, w)
        out = 1
        for _ in range(n.exp):
            out = out * base
        return out
    if isinstance(n, Conj):
        return np.conj(evaluate_node(n.arg, z, w))
    raise TypeError(n)


# -- parser ------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*^()]))"
)


def _tokenize(src: str):
    tokens = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(src, pos)
        if m is None or m.end() == pos:
            stripped = len(src) - len(src[pos:].lstrip())
            raise ParseError(f"unexpected character {src[stripped]!r}", stripped)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    ATOM_START = ("z", "zb", "w", "wb", "i", "number", "(", "conj(", "abs2(")

    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def advance(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect_op(self, op, expected):
        kind, text, pos = self.peek()
        if kind != "op" or text != op:
            raise ParseError(f"unexpected {text or 'end of input'!r}", pos, expected)
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {text!r}", pos, ("+", "-", "*", "^", "end of input"))
        return node

    def expr(self) -> Node:
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                rhs = self.term()
                node = Add(node, rhs) if text == "+" else Sub(node, rhs)
            else:
                return node

    def term(self) -> Node:
        kind, text, _ = self.peek()
        if kind == "op" and text in "+-":
            self.advance()
            inner = self.term()
            return Neg(inner) if text == "-" else inner
        node = self.factor()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text == "*":
                self.advance()
                node = Mul(node, self.factor())
            else:
                return node

    def factor(self) -> Node:
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            kind, text, pos = self.advance()
            if kind != "num" or not text.isdigit():
                raise ParseError("exponent must be a non-negative integer", pos, ("uint",))
            return Pow(base, int(text))
        return base

    def atom(self) -> Node:
        kind, text, pos = self.advance()
        if kind == "num":
            return Const(complex(float(text)))
        if kind == "name":
            if text in VARS:
                return Var(text)
            if text == "i":
                return Const(1j)
            if text in ("conj", "abs2"):
                self.expect_op("(", ("(",))
                inner = self.expr()
                self.expect_op(")", (")", "+", "-", "*", "^"))
                return Conj(inner) if text == "conj" else Mul(inner, Conj(inner))
            raise ParseError(f"unknown name {text!r}", pos, self.ATOM_START)
        if kind == "op" and text == "(":
            inner = self.expr()
            self.expect_op(")", (")", "+", "-", "*", "^"))
            return inner
        raise ParseError(f"unexpected {text or 'end of input'!r}", pos, self.ATOM_START)


# -- sparse polynomials in (z, zb, w, wb) -------------------------------------


class Poly:
    """Sparse polynomial: ``{(a, b, c, d): coeff}`` for ``z^a zb^b w^c wb^d``."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {k: complex(v) for k, v in (terms or {}).items() if v != 0}

    @classmethod
    def const(cls, c):
        return cls({(0, 0, 0, 0): c})

    @classmethod
    def var(cls, name):
        e = [0, 0, 0, 0]
        e[VARS.index(name)] = 1
        return cls({tuple(e): 1})

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return Poly(out)

    def __neg__(self):
        return Poly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        out = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out.get(k, 0) + v1 * v2
        return Poly(out)

    def __pow__(self, n: int):
        out = Poly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def conj(self):
        return Poly(
            {tuple(k[p] for p in _CONJ_PERM): v.conjugate() for k, v in self.terms.items()}
        )

    def diff(self, var: str):
        idx = VARS.index(var)
        out = {}
        for k, v in self.terms.items():
            if k[idx]:
                k2 = list(k)
                k2[idx] -= 1
                out[tuple(k2)] = out.get(tuple(k2), 0) + v * k[idx]
        return Poly(out)

    def degree_in(self, var: str) -> int:
        idx = VARS.index(var)
        return max((k[idx] for k in self.terms), default=0)

    def is_analytic(self) -> bool:
        return all(k[1] == 0 and k[3] == 0 for k in self.terms)

    def compile(self):
        """Return ``f(z, w)`` evaluating this polynomial on scalars or arrays."""
        if not self.terms:
            return lambda z, w: 0 * z * w
        names = {}
        parts = []
        for idx, (k, v) in enumerate(sorted(self.terms.items())):
            names[f"c{idx}"] = v
            factors = [f"c{idx}"]
            for sym, e in zip(VARS, k):
                if e == 1:
                    factors.append(sym)
                elif e > 1:
                    factors.append(f"{sym}**{e}")
            parts.append("*".join(factors))
        body = " + ".join(parts)
        src = (
            "def _f(z, w):\n"
            "    zb = z.conjugate()\n"
            "    wb = w.conjugate()\n"
            f"    return {body} + 0*z\n"
        )
        ns = dict(names)
        exec(compile(src, "<poly>", "exec"), ns)
        return ns["_f"]


def to_poly(n: Node) -> Poly:
    if isinstance(n, Const):
        return Poly.const(n.value)
    if isinstance(n, Var):
        return Poly.var(n.name)
    if isinstance(n, Add):
        return to_poly(n.left) + to_poly(n.right)
    if isinstance(n, Sub):
        return to_poly(n.left) - to_poly(n.right)
    if isinstance(n, Mul):
        return to_poly(n.left) * to_poly(n.right)
    if isinstance(n, Neg):
        return -to_poly(n.arg)
    if isinstance(n, Pow):
        return to_poly(n.base) ** n.exp
    if isinstance(n, Conj):
        return to_poly(n.arg).conj()
    raise TypeError(n)


def poly_to_node(p: Poly) -> Node:
    node = None
    for k, v in sorted(p.terms.items()):
        term = Const(v)
        for sym, e in zip(VARS, k):
            if e:
                term = Mul(term, Var(sym) if e == 1 else Pow(Var(sym), e))
        node = term if node is None else Add(node, term)
    return node if node is not None else Const(0j)


# -- MapExpr -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MapExpr:
    """A map C^2 -> C (equivalently R^4 -> R^2) given by an expression tree."""

    root: Node
    source: str = field(default="")

    def __post_init__(self):
        if not self.source:
            object.__setattr__(self, "source", node_to_source(self.root))

    def __repr__(self):
        return f"MapExpr({self.source!r})"

    def __str__(self):
        return self.source

    @classmethod
    def from_poly(cls, p: Poly) -> MapExpr:
        return cls(poly_to_node(p))

    @cached_property
    def poly(self) -> Poly:
        return to_poly(self.root)

    @cached_property
    def is_analytic(self) -> bool:
        return self.poly.is_analytic()

    @cached_property
    def _func(self):
        return self.poly.compile()

    @cached_property
    def _partials(self):
        return tuple(self.poly.diff(v).compile() for v in VARS)

    def derivative(self, var: str) -> MapExpr:
        return MapExpr.from_poly(self.poly.diff(var))

    def conj(self) -> MapExpr:
        return MapExpr(Conj(self.root))

    def __call__(self, z, w):
        return self._func(_as_complex(z), _as_complex(w))

    def partials(self, z, w):
        """``(Fz, Fzb, Fw, Fwb)`` evaluated at (arrays of) points."""
        z, w = _as_complex(z), _as_complex(w)
        return tuple(f(z, w) for f in self._partials)


def _as_complex(x):
    if isinstance(x, np.ndarray):
        return x.astype(complex, copy=False)
    return complex(x)


def parse_map(src: str) -> MapExpr:
    return MapExpr(_Parser(src).parse(), src.strip())


def eval_map(m: MapExpr, z, w) -> complex:
    return m(z, w)


# -- differentials -----------------------------------------------------------


@dataclass(frozen=True)
class ComplexDifferential:
    Fz: complex
    Fzb: complex
    Fw: complex
    Fwb: complex

    def as_tuple(self):
        return (self.Fz, self.Fzb, self.Fw, self.Fwb)

    def real_matrix(self) -> np.ndarray:
        return real_rows(self.Fz, self.Fzb, self.Fw, self.Fwb)


def wirtinger_differential(m: MapExpr, z, w) -> ComplexDifferential:
    return ComplexDifferential(*(complex(v) for v in m.partials(z, w)))


def real_rows(Fz, Fzb, Fw, Fwb) -> np.ndarray:
    """The real 2x4 differential (rows = gradients of Re F and Im F).

    Vectorized: inputs of shape ``S`` give output of shape ``S + (2, 4)``.
    """
    cols = [Fz + Fzb, 1j * Fz - 1j * Fzb, Fw + Fwb, 1j * Fw - 1j * Fwb]
    cols = np.stack(np.broadcast_arrays(*cols), axis=-1)
    return np.stack([cols.real, cols.imag], axis=-2)


def real_differential(m: MapExpr, z, w) -> np.ndarray:
    return real_rows(*m.partials(z, w))


def l_star(Fz, Fzb, Fw, Fwb) -> np.ndarray:
    """The l-side vector whose direction is l(<DF>); shape ``S + (3,)``."""
    X = Fz * np.conj(Fwb) - np.conj(Fzb) * Fw
    ic = abs(Fz) ** 2 - abs(Fzb) ** 2 + abs(Fw) ** 2 - abs(Fwb) ** 2
    return np.stack(np.broadcast_arrays(ic, -2 * X.imag, -2 * X.real), axis=-1)


def r_star(Fz, Fzb, Fw, Fwb) -> np.ndarray:
    """The r-side vector whose direction is r(<DF>) = UP(conj(A) B).

    The k-coefficient is ``+2 Re(Fz conj(Fw) - conj(Fzb) Fwb)``; writing it
    with a minus sign gives the mirror image in the i-j plane, which has the
    same Hopf invariant but no longer agrees with the frame formula.
    """
    Y = Fz * np.conj(Fw) - np.conj(Fzb) * Fwb
    ic = abs(Fz) ** 2 - abs(Fzb) ** 2 + abs(Fwb) ** 2 - abs(Fw) ** 2
    return np.stack(np.broadcast_arrays(ic, -2 * Y.imag, 2 * Y.real), axis=-1)


def _unit_field(vec: np.ndarray, D) -> UnitPureQuaternion:
    scale = sum(abs(complex(x)) ** 2 for x in D)
    n = float(np.linalg.norm(vec))
    if n == 0.0 or n <= 1e-12 * scale:
        raise CriticalPoint(f"field vector vanishes (norm {n:.3g})")
    return UnitPureQuaternion.from_vector(vec)


def l_field(m: MapExpr, z, w) -> UnitPureQuaternion:
    D = m.partials(z, w)
    return _unit_field(l_star(*D), D)


def r_field(m: MapExpr, z, w) -> UnitPureQuaternion:
    D = m.partials(z, w)
    return _unit_field(r_star(*D), D)


def l_frame_route(m: MapExpr, z, w) -> UnitPureQuaternion:
    rows = real_differential(m, z, w)
    return l_of_frame(TwoFrame(rows[0], rows[1]))


def r_frame_route(m: MapExpr, z, w) -> UnitPureQuaternion:
    rows = real_differential(m, z, w)
    return r_of_frame(TwoFrame(rows[0], rows[1]))


def critical_residual(m: MapExpr, z, w):
    """Euclidean norm of the l-side vector; zero exactly on crit(F)."""
    return np.linalg.norm(l_star(*m.partials(z, w)), axis=-1)[()]


def normalized_residual(m: MapExpr, z, w):
    """Scale-free criticality measure in [0, 1].

    ``|l_star| / (|Fz|^2 + |Fzb|^2 + |Fw|^2 + |Fwb|^2)`` equals the area of
    the parallelogram of the two gradient rows divided by half the sum of
    their squared lengths: 1 for a conformal (complex-linear) differential,
    0 at a critical point.
    """
    D = m.partials(z, w)
    scale = sum(np.abs(x) ** 2 for x in D)
    res = np.linalg.norm(l_star(*D), axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(scale > 0, res / np.where(scale > 0, scale, 1.0), 0.0)
    return out[()]


def point_to_complex(x) -> tuple[complex, complex]:
    x = np.asarray(x, float)
    return complex(x[0], x[1]), complex(x[2], x[3])


# -- isolatedness probe --------------------------------------------------------

# refined critical curves land at ~1e-13; isolated points keep a floor that
# shrinks like a power of eps, so this only needs to clear rounding noise
PROBE_THRESHOLD = 1e-10


@dataclass(frozen=True)
class ProbeReport:
    min_residual: float
    passed: bool
    argmin: tuple
    threshold: float
    n_points: int


def _shell_points(x, eps, n, seed):
    from scipy.stats import norm, qmc

    pts = qmc.Halton(d=5, scramble=True, seed=seed).random(n)
    pts = np.clip(pts, 1e-12, 1 - 1e-12)
    dirs = norm.ppf(pts[:, :4])
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = eps * (0.5 + 0.5 * pts[:, 4])
    return np.asarray(x, float) + radii[:, None] * dirs


def isolatedness_probe(m: MapExpr, x, eps: float, *, n_points: int = 20**4, seed: int = 0,
                       threshold: float = PROBE_THRESHOLD, refine_best: int = 16) -> ProbeReport:
    """Numerically look for critical points in the shell ``eps/2 <= |y - x| <= eps``.

    Samples the scale-free :func:`normalized_residual` on a quasi-uniform set
    of shell points, then polishes the lowest few with a local least-squares
    solve (a critical curve crossing the shell is driven to residual ~0,
    while an isolated critical point at ``x`` leaves a positive floor).
    A heuristic probe, not a proof.
    """
    from scipy.optimize import least_squares

    if eps <= 0:
        raise ValueError("eps must be positive")
    x = np.asarray(x, float)
    Y = _shell_points(x, eps, n_points, seed)
    res = np.empty(len(Y))
    for s in range(0, len(Y), 65536):
        chunk = Y[s:s + 65536]
        res[s:s + 65536] = normalized_residual(m, chunk[:, 0] + 1j * chunk[:, 1], chunk[:, 2] + 1j * chunk[:, 3])
    best = np.argsort(res, kind="stable")[:refine_best]

    def clamp(v):
        d = v - x
        r = np.linalg.norm(d)
        return x + d * (np.clip(r, eps / 2, eps) / r)

    def fun(v):
        y = clamp(v)
        D = m.partials(complex(y[0], y[1]), complex(y[2], y[3]))
        scale = sum(abs(complex(t)) ** 2 for t in D)
        return l_star(*D) / scale if scale > 0 else np.zeros(3)

    min_res, argmin = float(res[best[0]]), Y[best[0]]
    for k in best:
        if min_res == 0.0:
            break
        sol = least_squares(fun, Y[k], method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400)
        y = clamp(sol.x)
        r = float(normalized_residual(m, complex(y[0], y[1]), complex(y[2], y[3])))
        if r < min_res:
            min_res, argmin = r, y
    return ProbeReport(min_res, bool(min_res > threshold), tuple(float(t) for t in argmin),
                       threshold, len(Y))
