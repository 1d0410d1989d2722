"""Exact symbolic expression trees with a canonical rational normal form.

Expressions are immutable trees over exact rational constants, named
variables and parameters, the elementary kernels exp/log/sin/cos/sinh/cosh/
sqrt/atan2, and uninterpreted function symbols carrying derivative
multi-indices.  The canonical form is an expanded multivariate fraction over
the transcendental kernels present, with a small fixed rewrite set:

  * sqrt(u)^2 -> u
  * sin(u)^2 -> 1 - cos(u)^2,  sinh(u)^2 -> cosh(u)^2 - 1
  * exp(u)*exp(v) -> exp(u+v), exp moved out of denominators
  * exp(q*log(u) + rest) -> u^q * exp(rest) for integer / half-integer q
  * log(exp(u)) -> u, log(sqrt(u)) -> log(u)/2

Floating point appears only in numeric evaluation and probing; all algebra
is done with Fractions so that residuals of operator identities cancel
exactly.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence


class ExprError(Exception):
    pass


class EvalDomainError(ExprError):
    """Raised when numeric evaluation hits a singular point (log<=0, x/0...)."""

    def __init__(self, message: str, subexpr: "Expr | None" = None):
        super().__init__(message)
        self.subexpr = subexpr


FUNCTIONS = {
    "exp": 1,
    "log": 1,
    "sin": 1,
    "cos": 1,
    "tan": 1,
    "sinh": 1,
    "cosh": 1,
    "tanh": 1,
    "sqrt": 1,
    "atan2": 2,
    # canonical generators of the trig/hyperbolic rational normal form:
    # tanhalf(u) = tan(u/2), tanhhalf(u) = tanh(u/2)
    "tanhalf": 1,
    "tanhhalf": 1,
}


# ---------------------------------------------------------------------------
# AST nodes
# ---------------------------------------------------------------------------

class Expr:
    __slots__ = ("_hash", "_key")

    def _fields(self) -> tuple:
        raise NotImplementedError

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other):
            return False
        return self._fields() == other._fields()

    def __hash__(self):
        h = getattr(self, "_hash", None)
        if h is None:
            h = hash((type(self).__name__, self._fields()))
            object.__setattr__(self, "_hash", h)
        return h

    # arithmetic sugar: raw tree construction, canonicalization happens later
    def __add__(self, other):
        return Add((self, as_expr(other)))

    def __radd__(self, other):
        return Add((as_expr(other), self))

    def __sub__(self, other):
        return Add((self, Mul((MINUS_ONE, as_expr(other)))))

    def __rsub__(self, other):
        return Add((as_expr(other), Mul((MINUS_ONE, self))))

    def __mul__(self, other):
        return Mul((self, as_expr(other)))

    def __rmul__(self, other):
        return Mul((as_expr(other), self))

    def __truediv__(self, other):
        return Mul((self, Pow(as_expr(other), Fraction(-1))))

    def __rtruediv__(self, other):
        return Mul((as_expr(other), Pow(self, Fraction(-1))))

    def __neg__(self):
        return Mul((MINUS_ONE, self))

    def __pow__(self, q):
        return Pow(self, Fraction(q))

    def __str__(self):
        from .parsing import to_text

        return to_text(self)

    def __repr__(self):
        return f"<{type(self).__name__} {self}>"


class Rat(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        object.__setattr__(self, "value", Fraction(value))

    def __setattr__(self, *a):  # immutability
        raise AttributeError("Expr nodes are immutable")

    def _fields(self):
        return (self.value,)


class Var(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)

    def __setattr__(self, *a):
        raise AttributeError("Expr nodes are immutable")

    def _fields(self):
        return (self.name,)


class Param(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)

    def __setattr__(self, *a):
        raise AttributeError("Expr nodes are immutable")

    def _fields(self):
        return (self.name,)


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[Expr]):
        flat = []
        for t in terms:
            if isinstance(t, Add):
                flat.extend(t.terms)
            else:
                flat.append(t)
        object.__setattr__(self, "terms", tuple(flat))

    def __setattr__(self, *a):
        raise AttributeError("Expr nodes are immutable")

    def _fields(self):
        return self.terms


class Mul(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors: Iterable[Expr]):
        flat = []
        for f in factors:
            if isinstance(f, Mul):
                flat.extend(f.factors)
            else:
                flat.append(f)
        object.__setattr__(self, "factors", tuple(flat))

    def __setattr__(self, *a):
        raise AttributeError("Expr nodes are immutable")

    def _fields(self):
        return self.factors


class Pow(Expr):
    """Power with an exact rational exponent."""

    __slots__ = ("base", "exponent")

    def __init__(self, base: Expr, exponent):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exponent", Fraction(exponent))

    def __setattr__(self, *a):
        raise AttributeError("Expr nodes are immutable")

    def _fields(self):
        return (self.base, self.exponent)


class Fun(Expr):
    __slots__ = ("name", "args")

    def __init__(self, name: str, args: Iterable[Expr]):
        args = tuple(args)
        if name not in FUNCTIONS:
            raise ExprError(f"unknown function {name!r}")
        if len(args) != FUNCTIONS[name]:
            raise ExprError(f"{name} expects {FUNCTIONS[name]} argument(s), got {len(args)}")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "args", args)

    def __setattr__(self, *a):
        raise AttributeError("Expr nodes are immutable")

    def _fields(self):
        return (self.name, self.args)


class UFunc(Expr):
    """Uninterpreted function application tagged with a derivative multi-index.

    orders[j] is the number of derivatives taken with respect to the j-th
    formal argument slot.
    """

    __slots__ = ("name", "orders", "args")

    def __init__(self, name: str, orders: Iterable[int], args: Iterable[Expr]):
        args = tuple(args)
        orders = tuple(int(k) for k in orders)
        if len(orders) != len(args):
            raise ExprError("derivative multi-index length must match argument count")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "args", args)

    def __setattr__(self, *a):
        raise AttributeError("Expr nodes are immutable")

    def _fields(self):
        return (self.name, self.orders, self.args)


ZERO = Rat(0)
ONE = Rat(1)
MINUS_ONE = Rat(-1)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return Rat(x)
    raise ExprError(f"cannot coerce {x!r} to Expr")


def num(q) -> Rat:
    return Rat(q)


def var(name: str) -> Var:
    return Var(name)


def param(name: str) -> Param:
    return Param(name)


def fun(name: str, *args) -> Fun:
    return Fun(name, tuple(as_expr(a) for a in args))


def ufunc(name: str, *args, orders: Sequence[int] | None = None) -> UFunc:
    args = tuple(as_expr(a) for a in args)
    if orders is None:
        orders = (0,) * len(args)
    return UFunc(name, orders, args)


def pow_expr(base: Expr, exponent) -> Expr:
    """General power; non-rational exponents lower to exp(exponent*log(base))."""
    base = as_expr(base)
    if isinstance(exponent, (int, Fraction)):
        return Pow(base, Fraction(exponent))
    exponent = as_expr(exponent)
    if isinstance(exponent, Rat):
        return Pow(base, exponent.value)
    return Fun("exp", (Mul((exponent, Fun("log", (base,)))),))


# Convenience kernel builders
def exp_(e) -> Expr:
    return fun("exp", e)


def log_(e) -> Expr:
    return fun("log", e)


def sin_(e) -> Expr:
    return fun("sin", e)


def cos_(e) -> Expr:
    return fun("cos", e)


def sinh_(e) -> Expr:
    return fun("sinh", e)


def cosh_(e) -> Expr:
    return fun("cosh", e)


def sqrt_(e) -> Expr:
    return fun("sqrt", e)


def atan2_(y, x) -> Expr:
    return fun("atan2", y, x)


# ---------------------------------------------------------------------------
# structural total order (used for monomial/term ordering; must be stable
# across processes, so it is derived from structure only)
# ---------------------------------------------------------------------------

def expr_key(e: Expr) -> tuple:
    k = getattr(e, "_key", None)
    if k is not None:
        return k
    if isinstance(e, Rat):
        k = (0, e.value.numerator, e.value.denominator)
    elif isinstance(e, Var):
        k = (1, e.name)
    elif isinstance(e, Param):
        k = (2, e.name)
    elif isinstance(e, Fun):
        k = (3, e.name, tuple(expr_key(a) for a in e.args))
    elif isinstance(e, UFunc):
        k = (4, e.name, e.orders, tuple(expr_key(a) for a in e.args))
    elif isinstance(e, Pow):
        k = (5, expr_key(e.base), e.exponent.numerator, e.exponent.denominator)
    elif isinstance(e, Mul):
        k = (6, tuple(expr_key(a) for a in e.factors))
    elif isinstance(e, Add):
        k = (7, tuple(expr_key(a) for a in e.terms))
    else:  # pragma: no cover
        raise ExprError(f"unknown node {type(e)}")
    object.__setattr__(e, "_key", k)
    return k


# ---------------------------------------------------------------------------
# polynomial fraction layer
#
# Mono: tuple of (generator Expr, positive int exponent), sorted by expr_key.
# Poly: dict Mono -> Fraction (no zero coefficients).
# Frac: (num Poly, den Poly) with den monic by its leading monomial.
# ---------------------------------------------------------------------------

Mono = tuple
Poly = dict

P_ZERO: Poly = {}


def p_one() -> Poly:
    return {(): Fraction(1)}


def p_const(c: Fraction) -> Poly:
    return {(): c} if c else {}


def p_gen(g: Expr) -> Poly:
    return {((g, 1),): Fraction(1)}


F_ZERO = (P_ZERO, p_one())
F_ONE = (p_one(), p_one())


def f_const(c) -> tuple:
    return (p_const(Fraction(c)), p_one())


def padd(a: Poly, b: Poly) -> Poly:
    if not a:
        return dict(b)
    out = dict(a)
    for m, c in b.items():
        s = out.get(m)
        if s is None:
            out[m] = c
        else:
            s = s + c
            if s:
                out[m] = s
            else:
                del out[m]
    return out


def pscale(a: Poly, c: Fraction) -> Poly:
    if not c:
        return {}
    return {m: v * c for m, v in a.items()}


_REDUCIBLE = ("sqrt", "exp")


def _mono_needs_reduction(m: Mono) -> bool:
    exp_seen = 0
    for g, k in m:
        if isinstance(g, Fun) and g.name in _REDUCIBLE:
            if g.name == "exp":
                exp_seen += 1
                if exp_seen > 1 or k != 1:
                    return True
            elif k >= 2:
                return True
    return False


def mono_mul_plain(m1: Mono, m2: Mono) -> Mono:
    d = {}
    for g, k in m1:
        d[g] = k
    for g, k in m2:
        d[g] = d.get(g, 0) + k
    return tuple(sorted(d.items(), key=lambda it: expr_key(it[0])))


def pmul(a: Poly, b: Poly) -> tuple:
    """Product of two polys as a Frac (reductions may introduce fractions)."""
    if not a or not b:
        return F_ZERO
    plain: Poly = {}
    extra = None
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = mono_mul_plain(m1, m2)
            c = c1 * c2
            if _mono_needs_reduction(m):
                red = _reduce_monomial(m)
                red = f_scale(red, c)
                extra = red if extra is None else f_add(extra, red)
            else:
                s = plain.get(m)
                if s is None:
                    plain[m] = c
                else:
                    s = s + c
                    if s:
                        plain[m] = s
                    else:
                        del plain[m]
    base = (plain, p_one())
    if extra is None:
        return f_normalize(*base)
    return f_add(base, extra)


def ppow(a: Poly, k: int) -> tuple:
    result = F_ONE
    acc = (a, p_one())
    while k:
        if k & 1:
            result = f_mul(result, acc)
        k >>= 1
        if k:
            acc = f_mul(acc, acc)
    return result


def _reduce_monomial(m: Mono) -> tuple:
    """Apply the fixed kernel rewrite set to one monomial; returns a Frac."""
    out = F_ONE
    plain = {}
    exp_parts = []  # (arg Frac, multiplicity)
    for g, k in m:
        if isinstance(g, Fun) and g.name == "exp":
            exp_parts.append((canon(g.args[0]), k))
        elif isinstance(g, Fun) and g.name == "sqrt" and k >= 2:
            arg = canon(g.args[0])
            out = f_mul(out, f_pow(arg, Fraction(k // 2)))
            if k % 2:
                plain[g] = plain.get(g, 0) + 1
        else:
            plain[g] = plain.get(g, 0) + k
    if exp_parts:
        total = F_ZERO
        for arg, k in exp_parts:
            total = f_add(total, f_scale(arg, Fraction(k)))
        out = f_mul(out, make_exp(total))
    if plain:
        mono = tuple(sorted(plain.items(), key=lambda it: expr_key(it[0])))
        out = f_mul(out, ({mono: Fraction(1)}, p_one()))
    return out


def _leading_mono(p: Poly) -> Mono:
    return max(p.keys(), key=_mono_key)


def _mono_key(m: Mono) -> tuple:
    return tuple((expr_key(g), k) for g, k in m)


def f_normalize(n: Poly, d: Poly) -> tuple:
    if not d:
        raise ZeroDivisionError("zero denominator in symbolic fraction")
    if not n:
        return (P_ZERO, p_one())
    # common monomial content of numerator and denominator
    gens: dict = {}
    first = True
    for p in (n, d):
        for m in p.keys():
            mg = dict(m)
            if first:
                gens = mg
                first = False
            else:
                gens = {g: min(k, mg[g]) for g, k in gens.items() if g in mg}
            if not gens:
                break
        if not gens:
            break
    if gens:
        def strip(p: Poly) -> Poly:
            out = {}
            for m, c in p.items():
                md = dict(m)
                for g, k in gens.items():
                    md[g] -= k
                    if md[g] == 0:
                        del md[g]
                out[tuple(sorted(md.items(), key=lambda it: expr_key(it[0])))] = c
            return out

        n = strip(n)
        d = strip(d)
    # exponentials are units: clear any exp content shared by all den monomials
    exp_mins: dict = None
    for m in d.keys():
        cur = {g: k for g, k in m if isinstance(g, Fun) and g.name == "exp"}
        if exp_mins is None:
            exp_mins = cur
        else:
            exp_mins = {g: min(k, cur[g]) for g, k in exp_mins.items() if g in cur}
        if not exp_mins:
            break
    if exp_mins:
        total = F_ZERO
        for g, k in exp_mins.items():
            total = f_add(total, f_scale(canon(g.args[0]), Fraction(-k)))
        clear = make_exp(total)
        nn = f_mul((n, p_one()), clear)
        dd = f_mul((d, p_one()), clear)
        # clear introduces no denominators (pure exp factor)
        n = nn[0]
        d = dd[0]
    # exact cancellation when the quotient is a single term
    if len(n) == len(d) and len(d) > 1 and len(d) <= 40:
        q = _single_term_quotient(n, d)
        if q is not None:
            n = {q[0]: q[1]}
            d = p_one()
    # polynomial gcd cancellation (free-ring, verified by exact division)
    if len(n) > 1 and len(d) > 1:
        g = poly_gcd(n, d)
        if g and not (len(g) == 1 and () in g):
            try:
                n2 = _divexact_free(n, g)
                d2 = _divexact_free(d, g)
            except _InexactDivision:  # pragma: no cover - gcd contract violation
                n2 = d2 = None
            if n2 is not None:
                fn = _p_rereduce(n2)
                fd = _p_rereduce(d2)
                if fn[1] == p_one() and fd[1] == p_one():
                    n, d = fn[0], fd[0]
                else:
                    h = f_div(fn, fd)
                    n, d = h
    # monic denominator
    lead = d[_leading_mono(d)]
    if lead != 1:
        inv = Fraction(1) / lead
        n = pscale(n, inv)
        d = pscale(d, inv)
    return (n, d)


def _mono_div(m1: Mono, m2: Mono) -> Mono | None:
    """m1 / m2 when exact, else None."""
    d2 = dict(m2)
    out = []
    for g, k in m1:
        k2 = d2.pop(g, 0)
        if k < k2:
            return None
        if k > k2:
            out.append((g, k - k2))
    if d2:
        return None
    return tuple(out)


def _single_term_quotient(n: Poly, d: Poly):
    """(mono, coeff) with n == coeff*mono*d, when such a single term exists."""
    n_min = min(n.keys(), key=_mono_key)
    for dm, dc in d.items():
        qm = _mono_div(n_min, dm)
        if qm is None:
            continue
        qc = n[n_min] / dc
        ok = True
        for m, c in d.items():
            prod = mono_mul_plain(m, qm)
            if _mono_needs_reduction(prod) or n.get(prod) != c * qc:
                ok = False
                break
        if ok:
            return (qm, qc)
    return None


# ---------------------------------------------------------------------------
# multivariate polynomial gcd (free ring over the generators; used only for
# fraction cancellation, so missing a relation-dependent factor is harmless)
# ---------------------------------------------------------------------------

class _InexactDivision(ExprError):
    pass


def _deglex_key(m: Mono) -> tuple:
    return (sum(k for _, k in m), _mono_key(m))


def _pmul_free(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = mono_mul_plain(m1, m2)
            c = c1 * c2
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s = s + c
                if s:
                    out[m] = s
                else:
                    del out[m]
    return out


def _psub_free(a: Poly, b: Poly) -> Poly:
    out = dict(a)
    for m, c in b.items():
        s = out.get(m)
        if s is None:
            out[m] = -c
        else:
            s = s - c
            if s:
                out[m] = s
            else:
                del out[m]
    return out


def _divexact_free(a: Poly, b: Poly) -> Poly:
    """Quotient a/b in the free ring; raises when not exact."""
    if not a:
        return {}
    bl = max(b.keys(), key=_deglex_key)
    blc = b[bl]
    rem = dict(a)
    out: Poly = {}
    while rem:
        rl = max(rem.keys(), key=_deglex_key)
        qm = _mono_div(rl, bl)
        if qm is None:
            raise _InexactDivision("inexact polynomial division")
        qc = rem[rl] / blc
        out[qm] = qc
        for m, c in b.items():
            prod = mono_mul_plain(m, qm)
            s = rem.get(prod)
            val = c * qc
            if s is None:
                rem[prod] = -val
            else:
                s = s - val
                if s:
                    rem[prod] = s
                else:
                    del rem[prod]
    return out


def _p_rereduce(p: Poly) -> tuple:
    """Re-apply kernel reductions to a free-ring polynomial; returns a Frac."""
    if not any(_mono_needs_reduction(m) for m in p):
        return (p, p_one())
    return pmul(p, p_one())


def _poly_gens(p: Poly) -> set:
    out = set()
    for m in p:
        for g, _ in m:
            out.add(g)
    return out


def _decompose(p: Poly, g: Expr) -> dict:
    """View p as a univariate polynomial in g with Poly coefficients."""
    out: dict = {}
    for m, c in p.items():
        deg = 0
        rest = []
        for gen, k in m:
            if gen == g:
                deg = k
            else:
                rest.append((gen, k))
        coeff = out.setdefault(deg, {})
        coeff[tuple(rest)] = coeff.get(tuple(rest), Fraction(0)) + c
    return {d: {m: c for m, c in coeff.items() if c} for d, coeff in out.items() if coeff}


def _recompose(u: dict, g: Expr) -> Poly:
    out: Poly = {}
    for deg, coeff in u.items():
        for m, c in coeff.items():
            if deg:
                mm = tuple(sorted(list(m) + [(g, deg)], key=lambda it: expr_key(it[0])))
            else:
                mm = m
            out[mm] = out.get(mm, Fraction(0)) + c
    return {m: c for m, c in out.items() if c}


def _poly_normalize_sign(p: Poly) -> Poly:
    if not p:
        return p
    lead = p[max(p.keys(), key=_deglex_key)]
    if lead < 0:
        return pscale(p, Fraction(-1))
    return p


def _content_and_primitive(u: dict) -> tuple:
    coeffs = list(u.values())
    content = coeffs[0]
    for c in coeffs[1:]:
        content = poly_gcd(content, c)
        if len(content) == 1 and () in content:
            break
    prim = {d: _divexact_free(c, content) for d, c in u.items()}
    return content, prim


def _prem(A: dict, B: dict) -> dict:
    """Sparse pseudo-remainder of univariate polys with Poly coefficients."""
    dB = max(B)
    lcB = B[dB]
    R = dict(A)
    while R:
        dR = max(R)
        if dR < dB:
            break
        lcR = R[dR]
        newR: dict = {}
        for e, c in R.items():
            if e != dR:
                newR[e] = _pmul_free(c, lcB)
        for e, c in B.items():
            if e == dB:
                continue
            t = _pmul_free(c, lcR)
            ne = e + dR - dB
            cur = newR.get(ne, {})
            cur = _psub_free(cur, t)
            if cur:
                newR[ne] = cur
            elif ne in newR:
                del newR[ne]
        R = {e: c for e, c in newR.items() if c}
    return R


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Primitive gcd of two polynomials over Q in the free ring on generators."""
    if not a:
        return _poly_normalize_sign(_primitive_rational(b))
    if not b:
        return _poly_normalize_sign(_primitive_rational(a))
    gens = _poly_gens(a) | _poly_gens(b)
    if not gens:
        return p_one()
    g = max(gens, key=expr_key)
    A = _decompose(a, g)
    B = _decompose(b, g)
    if max(A) == 0 and max(B) == 0:
        # g not actually present (defensive)
        return p_one()
    if max(A) == 0:
        cont_b, _ = _content_and_primitive(B)
        return poly_gcd(a, cont_b)
    if max(B) == 0:
        cont_a, _ = _content_and_primitive(A)
        return poly_gcd(cont_a, b)
    cont_a, prim_a = _content_and_primitive(A)
    cont_b, prim_b = _content_and_primitive(B)
    cont = poly_gcd(cont_a, cont_b)
    U, V = (prim_a, prim_b) if max(prim_a) >= max(prim_b) else (prim_b, prim_a)
    while True:
        R = _prem(U, V)
        if not R:
            result = _recompose(V, g)
            break
        if max(R) == 0:
            result = p_one()
            break
        _, R = _content_and_primitive(R)
        U, V = V, R
    out = _pmul_free(cont, result)
    return _poly_normalize_sign(_primitive_rational(out))


def _primitive_rational(p: Poly) -> Poly:
    if not p:
        return p
    content = _poly_content(p)
    if content != 1:
        return pscale(p, Fraction(1) / content)
    return p


def f_add(f1: tuple, f2: tuple) -> tuple:
    n1, d1 = f1
    n2, d2 = f2
    if not n1:
        return f_normalize(dict(n2), dict(d2)) if n2 else (P_ZERO, p_one())
    if not n2:
        return f_normalize(dict(n1), dict(d1))
    if d1 == d2:
        return f_normalize(padd(n1, n2), dict(d1))
    a = pmul(n1, d2)
    b = pmul(n2, d1)
    dd = pmul(d1, d2)
    s = f_add(a, b)
    return f_div(s, dd)


def f_scale(f: tuple, c: Fraction) -> tuple:
    if not c:
        return F_ZERO
    n, d = f
    return (pscale(n, c), d) if n else F_ZERO


def f_mul(f1: tuple, f2: tuple) -> tuple:
    n1, d1 = f1
    n2, d2 = f2
    if not n1 or not n2:
        return F_ZERO
    nn = pmul(n1, n2)
    dd = pmul(d1, d2)
    return f_div(nn, dd)


def f_div(f1: tuple, f2: tuple) -> tuple:
    n2, d2 = f2
    if not n2:
        raise ZeroDivisionError("symbolic division by zero")
    n1, d1 = f1
    if not n1:
        return F_ZERO
    # (n1/d1) / (n2/d2) = (n1*d2) / (d1*n2)
    tn, td = pmul(n1, d2)
    bn, bd = pmul(d1, n2)
    if not bn:
        raise ZeroDivisionError("symbolic division by zero")
    fn, fd = pmul(tn, bd)
    gn, gd = pmul(td, bn)
    if fd == p_one() and gd == p_one():
        return f_normalize(fn, gn)
    return f_div((fn, fd), (gn, gd))  # reductions nested further; settle recursively


def f_pow(f: tuple, q: Fraction) -> tuple:
    return f_pow_rational(f, q)


def f_pow_frac(f: tuple, k: int) -> tuple:
    """Integer power of a Frac."""
    if k == 0:
        return F_ONE
    if k < 0:
        n, d = f
        if not n:
            raise ZeroDivisionError("zero to a negative power")
        f = (d, n)
        k = -k
    n, d = f
    rn = ppow(n, k)
    rd = ppow(d, k)
    return f_div(rn, rd)


def f_pow_rational(f: tuple, q: Fraction) -> tuple:
    if q == 0:
        return F_ONE
    if q.denominator == 1:
        return f_pow_frac(f, q.numerator)
    if q.denominator == 2:
        m = (q.numerator - 1) // 2  # q = m + 1/2 with m integer
        base = f_pow_frac(f, m)
        return f_mul(base, make_sqrt(f))
    # general rational exponent via exp/log (domain: positive base)
    return make_exp(f_scale(make_log(f), q))


# ---------------------------------------------------------------------------
# kernel constructors operating on canonical fractions
# ---------------------------------------------------------------------------

def _kernel(name: str, *arg_fracs: tuple) -> Expr:
    return Fun(name, tuple(frac_to_expr(a) for a in arg_fracs))


def _frac_is_zero(f: tuple) -> bool:
    return not f[0]


def _frac_rat(f: tuple) -> Fraction | None:
    n, d = f
    if d != p_one():
        return None
    if not n:
        return Fraction(0)
    if len(n) == 1 and () in n:
        return n[()]
    return None


def make_exp(arg: tuple) -> tuple:
    if _frac_is_zero(arg):
        return F_ONE
    n, d = arg
    extracted = F_ONE
    if d == p_one():
        rest: Poly = {}
        for m, c in n.items():
            if len(m) == 1 and m[0][1] == 1 and isinstance(m[0][0], Fun) and m[0][0].name == "log":
                g = m[0][0]
                if c.denominator in (1, 2):
                    u = canon(g.args[0])
                    extracted = f_mul(extracted, f_pow_rational(u, c))
                    continue
            rest[m] = c
        if extracted != F_ONE:
            if not rest:
                return extracted
            return f_mul(extracted, (p_gen(_kernel("exp", f_normalize(rest, p_one()))), p_one()))
    return (p_gen(_kernel("exp", arg)), p_one())


def make_log(arg: tuple) -> tuple:
    n, d = arg
    if not n:
        raise ExprError("log of zero")
    c = _frac_rat(arg)
    if c is not None and c == 1:
        return F_ZERO
    # single-monomial arguments: peel exp and sqrt factors, and positive
    # rational coefficients (sound wherever the log itself is defined)
    if len(n) == 1 and len(d) == 1:
        (mn, cn), = n.items()
        (md, cd), = d.items()
        coeff = cn / cd
        if coeff > 0:
            acc = F_ZERO
            rest_n: dict = {}
            rest_d: dict = {}
            peeled = False
            for target, sign, rest in ((mn, 1, rest_n), (md, -1, rest_d)):
                for g, k in target:
                    if isinstance(g, Fun) and g.name == "exp":
                        acc = f_add(acc, f_scale(canon(g.args[0]), Fraction(sign * k)))
                        peeled = True
                    elif isinstance(g, Fun) and g.name == "sqrt":
                        acc = f_add(acc, f_scale(make_log(canon(g.args[0])), Fraction(sign * k, 2)))
                        peeled = True
                    else:
                        rest[g] = k
            if coeff != 1 or peeled:
                num_c, den_c = coeff.numerator, coeff.denominator
                if coeff != 1:
                    if num_c != 1:
                        acc = f_add(acc, (p_gen(Fun("log", (Rat(num_c),))), p_one()))
                    if den_c != 1:
                        acc = f_add(acc, f_scale((p_gen(Fun("log", (Rat(den_c),))), p_one()), Fraction(-1)))
                mono_n = tuple(sorted(rest_n.items(), key=lambda it: expr_key(it[0])))
                mono_d = tuple(sorted(rest_d.items(), key=lambda it: expr_key(it[0])))
                rest_frac = f_normalize({mono_n: Fraction(1)}, {mono_d: Fraction(1)})
                if _frac_rat(rest_frac) == 1:
                    return acc
                return f_add(acc, (p_gen(_kernel("log", rest_frac)), p_one()))
    return (p_gen(_kernel("log", arg)), p_one())


def make_sqrt(arg: tuple) -> tuple:
    if _frac_is_zero(arg):
        return F_ZERO
    c = _frac_rat(arg)
    if c is not None:
        if c < 0:
            return (p_gen(Fun("sqrt", (Rat(c),))), p_one())
        rn = _isqrt_exact(c.numerator)
        rd = _isqrt_exact(c.denominator)
        if rn is not None and rd is not None:
            return f_const(Fraction(rn, rd))
        return (p_gen(Fun("sqrt", (Rat(c),))), p_one())
    # extract positive rational square content: sqrt(c*A) = sqrt(c)*sqrt(A)
    n, d = arg
    content = _poly_content(n) / _poly_content(d)
    if content > 0 and content != 1:
        stripped = f_normalize(pscale(n, Fraction(1) / content), dict(d))
        return f_mul(make_sqrt(f_const(content)), (p_gen(_kernel("sqrt", stripped)), p_one()))
    return (p_gen(_kernel("sqrt", arg)), p_one())


def _poly_content(p: Poly) -> Fraction:
    it = iter(p.values())
    c = abs(next(it))
    for v in it:
        c = Fraction(math.gcd(c.numerator, abs(v).numerator), math.lcm(c.denominator, abs(v).denominator))
        if c == 1:
            break
    return c


def _isqrt_exact(k: int) -> int | None:
    r = math.isqrt(k)
    return r if r * r == k else None


def _leading_coeff(f: tuple) -> Fraction:
    n, _ = f
    return n[_leading_mono(n)]


def make_half_tangent(name: str, arg: tuple) -> tuple:
    """Fixpoint constructor for the canonical generators tanhalf/tanhhalf."""
    if _frac_is_zero(arg):
        return F_ZERO
    sign = 1
    if _leading_coeff(arg) < 0:
        arg = f_scale(arg, Fraction(-1))
        sign = -1
    g = (p_gen(_kernel(name, arg)), p_one())
    return f_scale(g, Fraction(-1)) if sign < 0 else g


def make_trig(name: str, arg: tuple) -> tuple:
    """Trigonometric/hyperbolic kernels in half-angle rational normal form.

    With T = tanhalf(u) = tan(u/2): sin = 2T/(1+T^2), cos = (1-T^2)/(1+T^2),
    tan = 2T/(1-T^2); with S = tanhhalf(u) = tanh(u/2): sinh = 2S/(1-S^2),
    cosh = (1+S^2)/(1-S^2), tanh = 2S/(1+S^2).  Pythagoras identities hold
    automatically and the generators are algebraically independent, so
    fraction cancellation via polynomial gcd is exact.
    """
    if _frac_is_zero(arg):
        return F_ZERO if name in ("sin", "sinh", "tan", "tanh") else F_ONE
    hyper = name in ("sinh", "cosh", "tanh")
    half = make_half_tangent("tanhhalf" if hyper else "tanhalf", arg)
    hn, hd = half
    if len(hn) != 1:  # pragma: no cover - half-tangent is always a signed generator
        raise ExprError("unexpected half-tangent form")
    (mono, coeff), = hn.items()
    g = mono[0][0]
    sign = 1 if coeff > 0 else -1
    t2 = {((g, 2),): Fraction(1)}
    one = p_one()
    two_t = pscale(p_gen(g), Fraction(2 * sign))
    if name == "sin":
        return f_normalize(two_t, padd(one, t2))
    if name == "cos":
        return f_normalize(_psub_free(one, t2), padd(one, t2))
    if name == "tan":
        return f_normalize(two_t, _psub_free(one, t2))
    if name == "sinh":
        return f_normalize(two_t, _psub_free(one, t2))
    if name == "cosh":
        return f_normalize(padd(one, t2), _psub_free(one, t2))
    # tanh
    return f_normalize(two_t, padd(one, t2))


def make_atan2(y: tuple, x: tuple) -> tuple:
    return (p_gen(_kernel("atan2", y, x)), p_one())


# ---------------------------------------------------------------------------
# canonicalization
# ---------------------------------------------------------------------------

_canon_cache: dict = {}


def canon(e: Expr) -> tuple:
    cached = _canon_cache.get(e)
    if cached is not None:
        return cached
    if isinstance(e, Rat):
        f = f_const(e.value)
    elif isinstance(e, (Var, Param)):
        f = (p_gen(e), p_one())
    elif isinstance(e, Add):
        f = F_ZERO
        for t in e.terms:
            f = f_add(f, canon(t))
    elif isinstance(e, Mul):
        f = F_ONE
        for t in e.factors:
            f = f_mul(f, canon(t))
            if _frac_is_zero(f):
                break
    elif isinstance(e, Pow):
        f = f_pow_rational(canon(e.base), e.exponent)
    elif isinstance(e, Fun):
        if e.name == "exp":
            f = make_exp(canon(e.args[0]))
        elif e.name == "log":
            f = make_log(canon(e.args[0]))
        elif e.name == "sqrt":
            f = make_sqrt(canon(e.args[0]))
        elif e.name in ("sin", "cos", "tan", "sinh", "cosh", "tanh"):
            f = make_trig(e.name, canon(e.args[0]))
        elif e.name in ("tanhalf", "tanhhalf"):
            f = make_half_tangent(e.name, canon(e.args[0]))
        elif e.name == "atan2":
            f = make_atan2(canon(e.args[0]), canon(e.args[1]))
        else:  # pragma: no cover
            raise ExprError(f"unknown function {e.name}")
    elif isinstance(e, UFunc):
        args = tuple(frac_to_expr(canon(a)) for a in e.args)
        f = (p_gen(UFunc(e.name, e.orders, args)), p_one())
    else:  # pragma: no cover
        raise ExprError(f"unknown node {type(e)}")
    _canon_cache[e] = f
    return f


def _term_expr(m: Mono, c: Fraction) -> Expr:
    factors = []
    if c != 1 or not m:
        factors.append(Rat(c))
    for g, k in m:
        factors.append(g if k == 1 else Pow(g, Fraction(k)))
    if len(factors) == 1:
        return factors[0]
    return Mul(factors)


def poly_to_expr(p: Poly) -> Expr:
    if not p:
        return ZERO
    terms = sorted(p.items(), key=lambda it: _mono_key(it[0]), reverse=True)
    exprs = [_term_expr(m, c) for m, c in terms]
    if len(exprs) == 1:
        return exprs[0]
    return Add(exprs)


def frac_to_expr(f: tuple) -> Expr:
    n, d = f
    if d == p_one():
        return poly_to_expr(n)
    den = poly_to_expr(d)
    inv = Pow(den, Fraction(-1))
    if n == p_one():
        return inv
    return Mul((poly_to_expr(n), inv))


def simplify(e: Expr) -> Expr:
    return frac_to_expr(canon(e))


# ---------------------------------------------------------------------------
# differentiation
# ---------------------------------------------------------------------------

def diff(e: Expr, v: str | Var) -> Expr:
    name = v.name if isinstance(v, Var) else v
    return _diff(as_expr(e), name)


def _diff(e: Expr, v: str) -> Expr:
    if isinstance(e, (Rat, Param)):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == v else ZERO
    if isinstance(e, Add):
        return Add(tuple(_diff(t, v) for t in e.terms))
    if isinstance(e, Mul):
        terms = []
        fs = e.factors
        for i, f in enumerate(fs):
            df = _diff(f, v)
            if isinstance(df, Rat) and df.value == 0:
                continue
            terms.append(Mul(fs[:i] + (df,) + fs[i + 1:]))
        if not terms:
            return ZERO
        return Add(tuple(terms))
    if isinstance(e, Pow):
        db = _diff(e.base, v)
        if isinstance(db, Rat) and db.value == 0:
            return ZERO
        return Mul((Rat(e.exponent), Pow(e.base, e.exponent - 1), db))
    if isinstance(e, Fun):
        if e.name == "atan2":
            y, x = e.args
            dy = _diff(y, v)
            dx = _diff(x, v)
            denom = Add((Mul((x, x)), Mul((y, y))))
            return Mul((Add((Mul((x, dy)), Mul((MINUS_ONE, y, dx)))), Pow(denom, Fraction(-1))))
        u = e.args[0]
        du = _diff(u, v)
        if isinstance(du, Rat) and du.value == 0:
            return ZERO
        if e.name == "exp":
            outer = e
        elif e.name == "log":
            outer = Pow(u, Fraction(-1))
        elif e.name == "sin":
            outer = Fun("cos", (u,))
        elif e.name == "cos":
            outer = Mul((MINUS_ONE, Fun("sin", (u,))))
        elif e.name == "tan":
            outer = Add((ONE, Pow(e, Fraction(2))))
        elif e.name == "sinh":
            outer = Fun("cosh", (u,))
        elif e.name == "cosh":
            outer = Fun("sinh", (u,))
        elif e.name == "tanh":
            outer = Add((ONE, Mul((MINUS_ONE, Pow(e, Fraction(2))))))
        elif e.name == "tanhalf":
            outer = Mul((Rat(Fraction(1, 2)), Add((ONE, Pow(e, Fraction(2))))))
        elif e.name == "tanhhalf":
            outer = Mul((Rat(Fraction(1, 2)), Add((ONE, Mul((MINUS_ONE, Pow(e, Fraction(2))))))))
        elif e.name == "sqrt":
            outer = Mul((Rat(Fraction(1, 2)), Pow(e, Fraction(-1))))
        else:  # pragma: no cover
            raise ExprError(f"no derivative rule for {e.name}")
        return Mul((outer, du))
    if isinstance(e, UFunc):
        terms = []
        for j, a in enumerate(e.args):
            da = _diff(a, v)
            if isinstance(da, Rat) and da.value == 0:
                continue
            orders = list(e.orders)
            orders[j] += 1
            terms.append(Mul((UFunc(e.name, tuple(orders), e.args), da)))
        if not terms:
            return ZERO
        return Add(tuple(terms))
    raise ExprError(f"cannot differentiate {type(e)}")  # pragma: no cover


# ---------------------------------------------------------------------------
# substitution and traversal
# ---------------------------------------------------------------------------

def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace variables and parameters by name."""

    def walk(x: Expr) -> Expr:
        if isinstance(x, (Var, Param)):
            r = mapping.get(x.name)
            return as_expr(r) if r is not None else x
        if isinstance(x, Rat):
            return x
        if isinstance(x, Add):
            return Add(tuple(walk(t) for t in x.terms))
        if isinstance(x, Mul):
            return Mul(tuple(walk(t) for t in x.factors))
        if isinstance(x, Pow):
            return Pow(walk(x.base), x.exponent)
        if isinstance(x, Fun):
            return Fun(x.name, tuple(walk(a) for a in x.args))
        if isinstance(x, UFunc):
            return UFunc(x.name, x.orders, tuple(walk(a) for a in x.args))
        raise ExprError(f"cannot substitute in {type(x)}")  # pragma: no cover

    return walk(as_expr(e))


def substitute_function(e: Expr, name: str, formal: Sequence[str], body: Expr) -> Expr:
    """Replace an uninterpreted function by a concrete expression.

    `formal` names the function's argument slots as variables of `body`.
    Derivative multi-indices on occurrences are honored by differentiating
    the body before substituting the actual arguments.
    """
    body = as_expr(body)

    def instance(orders, args):
        d = body
        for slot, k in zip(formal, orders):
            for _ in range(k):
                d = _diff(d, slot)
        return substitute(d, dict(zip(formal, args)))

    def walk(x: Expr) -> Expr:
        if isinstance(x, UFunc) and x.name == name:
            args = tuple(walk(a) for a in x.args)
            if len(args) != len(formal):
                raise ExprError(f"arity mismatch instantiating {name}")
            return instance(x.orders, args)
        if isinstance(x, (Rat, Var, Param)):
            return x
        if isinstance(x, Add):
            return Add(tuple(walk(t) for t in x.terms))
        if isinstance(x, Mul):
            return Mul(tuple(walk(t) for t in x.factors))
        if isinstance(x, Pow):
            return Pow(walk(x.base), x.exponent)
        if isinstance(x, Fun):
            return Fun(x.name, tuple(walk(a) for a in x.args))
        if isinstance(x, UFunc):
            return UFunc(x.name, x.orders, tuple(walk(a) for a in x.args))
        raise ExprError(f"cannot substitute in {type(x)}")  # pragma: no cover

    return walk(as_expr(e))


def free_vars(e: Expr) -> set:
    out = set()

    def walk(x):
        if isinstance(x, Var):
            out.add(x.name)
        elif isinstance(x, (Add,)):
            for t in x.terms:
                walk(t)
        elif isinstance(x, Mul):
            for t in x.factors:
                walk(t)
        elif isinstance(x, Pow):
            walk(x.base)
        elif isinstance(x, (Fun, UFunc)):
            for a in x.args:
                walk(a)

    walk(e)
    return out


def free_params(e: Expr) -> set:
    out = set()

    def walk(x):
        if isinstance(x, Param):
            out.add(x.name)
        elif isinstance(x, Add):
            for t in x.terms:
                walk(t)
        elif isinstance(x, Mul):
            for t in x.factors:
                walk(t)
        elif isinstance(x, Pow):
            walk(x.base)
        elif isinstance(x, (Fun, UFunc)):
            for a in x.args:
                walk(a)

    walk(e)
    return out


def ufunc_signatures(e: Expr) -> dict:
    """name -> arity for all uninterpreted function symbols in e."""
    out: dict = {}

    def walk(x):
        if isinstance(x, UFunc):
            prev = out.get(x.name)
            if prev is not None and prev != len(x.args):
                raise ExprError(f"inconsistent arity for {x.name}")
            out[x.name] = len(x.args)
            for a in x.args:
                walk(a)
        elif isinstance(x, Add):
            for t in x.terms:
                walk(t)
        elif isinstance(x, Mul):
            for t in x.factors:
                walk(t)
        elif isinstance(x, Pow):
            walk(x.base)
        elif isinstance(x, Fun):
            for a in x.args:
                walk(a)

    walk(e)
    return out


# ---------------------------------------------------------------------------
# numeric evaluation
# ---------------------------------------------------------------------------

def eval_expr(e: Expr, env: Mapping[str, float]) -> float:
    x = as_expr(e)
    if isinstance(x, Rat):
        return float(x.value)
    if isinstance(x, (Var, Param)):
        try:
            return float(env[x.name])
        except KeyError:
            raise EvalDomainError(f"unbound symbol {x.name!r}", x) from None
    if isinstance(x, Add):
        return math.fsum(eval_expr(t, env) for t in x.terms)
    if isinstance(x, Mul):
        out = 1.0
        for t in x.factors:
            out *= eval_expr(t, env)
        return out
    if isinstance(x, Pow):
        b = eval_expr(x.base, env)
        q = x.exponent
        if q.denominator == 1:
            if b == 0.0 and q < 0:
                raise EvalDomainError("zero raised to a negative power", x)
            return b ** int(q)
        if b < 0:
            raise EvalDomainError("fractional power of a negative base", x)
        if b == 0.0 and q < 0:
            raise EvalDomainError("zero raised to a negative power", x)
        return b ** float(q)
    if isinstance(x, Fun):
        vals = [eval_expr(a, env) for a in x.args]
        try:
            if x.name == "exp":
                return math.exp(vals[0])
            if x.name == "log":
                if vals[0] <= 0:
                    raise EvalDomainError("log of a non-positive value", x)
                return math.log(vals[0])
            if x.name == "sin":
                return math.sin(vals[0])
            if x.name == "cos":
                return math.cos(vals[0])
            if x.name == "tan":
                return math.tan(vals[0])
            if x.name == "sinh":
                return math.sinh(vals[0])
            if x.name == "cosh":
                return math.cosh(vals[0])
            if x.name == "tanh":
                return math.tanh(vals[0])
            if x.name == "tanhalf":
                return math.tan(vals[0] / 2.0)
            if x.name == "tanhhalf":
                return math.tanh(vals[0] / 2.0)
            if x.name == "sqrt":
                if vals[0] < 0:
                    raise EvalDomainError("sqrt of a negative value", x)
                return math.sqrt(vals[0])
            if x.name == "atan2":
                if vals[0] == 0.0 and vals[1] == 0.0:
                    raise EvalDomainError("atan2 at the origin", x)
                return math.atan2(vals[0], vals[1])
        except OverflowError:
            raise EvalDomainError("overflow in evaluation", x) from None
        raise ExprError(f"unknown function {x.name}")  # pragma: no cover
    if isinstance(x, UFunc):
        raise EvalDomainError(f"unbound uninterpreted function {x.name!r}", x)
    raise ExprError(f"cannot evaluate {type(x)}")  # pragma: no cover


# ---------------------------------------------------------------------------
# zero testing
# ---------------------------------------------------------------------------

PROVEN_ZERO = "proven-zero"
PROVEN_NONZERO = "proven-nonzero"
UNDECIDED_ZERO = "undecided-numeric-zero"

DEFAULT_SEED = 1905
DEFAULT_POINTS = 200
DEFAULT_TOL = 1e-9

VAR_RANGES = {
    "x1": (0.15, 2.5),
    "x2": (-2.5, 2.5),
    "t": (-1.5, 1.5),
}
GENERIC_VAR_RANGE = (0.2, 2.8)
PARAM_RANGE = (0.3, 2.2)


class ZeroResult:
    """Tri-state zero-test outcome with the deciding tier recorded."""

    __slots__ = ("verdict", "tier", "max_abs", "witness", "points", "skipped")

    def __init__(self, verdict, tier, max_abs=0.0, witness=None, points=0, skipped=0):
        self.verdict = verdict
        self.tier = tier
        self.max_abs = max_abs
        self.witness = witness
        self.points = points
        self.skipped = skipped

    @property
    def is_zero_like(self) -> bool:
        return self.verdict in (PROVEN_ZERO, UNDECIDED_ZERO)

    def __repr__(self):
        return f"<ZeroResult {self.verdict} tier={self.tier} max={self.max_abs:.3g}>"


def _random_poly_instance(rng: random.Random, arity: int) -> tuple:
    """Random dense polynomial of total degree <= 3 in `arity` slot variables."""
    formal = tuple(f"_s{j}" for j in range(arity))

    def monomials(nvars, deg):
        if nvars == 0:
            yield ()
            return
        for d in range(deg + 1):
            for rest in monomials(nvars - 1, deg - d):
                yield (d,) + rest

    terms = []
    for degs in monomials(arity, 3):
        c = Fraction(rng.randint(-6, 6), rng.randint(1, 3))
        if c == 0:
            continue
        factors = [Rat(c)]
        for nm, d in zip(formal, degs):
            if d:
                factors.append(Pow(Var(nm), Fraction(d)))
        terms.append(Mul(tuple(factors)) if len(factors) > 1 else factors[0])
    body = Add(tuple(terms)) if terms else ONE
    return formal, body


def probe_env(rng: random.Random, names: Iterable[str], var_names: set) -> dict:
    env = {}
    for nm in sorted(names):
        if nm in var_names:
            lo, hi = VAR_RANGES.get(nm, GENERIC_VAR_RANGE)
        else:
            lo, hi = PARAM_RANGE
        env[nm] = rng.uniform(lo, hi)
    return env


def is_zero(e: Expr, seed: int = DEFAULT_SEED, n_points: int = DEFAULT_POINTS,
            tol: float = DEFAULT_TOL) -> ZeroResult:
    """Sound symbolic zero test with a seeded probabilistic numeric fallback."""
    e = as_expr(e)
    f = canon(e)
    if not f[0]:
        return ZeroResult(PROVEN_ZERO, "symbolic")
    reduced = frac_to_expr((f[0], p_one()))  # probing the numerator suffices
    rng = random.Random(seed)
    ufs = ufunc_signatures(reduced)
    for name in sorted(ufs):
        formal, body = _random_poly_instance(rng, ufs[name])
        reduced = substitute_function(reduced, name, formal, body)
    names = free_vars(reduced) | free_params(reduced)
    vnames = free_vars(reduced)
    if isinstance(reduced, Add):
        parts = list(reduced.terms)
    else:
        parts = [reduced]
    max_abs = 0.0
    done = 0
    skipped = 0
    budget = n_points + max(50, n_points // 2)
    attempts = 0
    while done < n_points and attempts < budget:
        attempts += 1
        env = probe_env(rng, names, vnames)
        try:
            vals = [eval_expr(p, env) for p in parts]
        except EvalDomainError:
            skipped += 1
            continue
        total = math.fsum(vals)
        scale = max(1.0, math.fsum(abs(v) for v in vals))
        if not math.isfinite(total):
            skipped += 1
            continue
        if abs(total) > tol * scale:
            return ZeroResult(PROVEN_NONZERO, "numeric", abs(total), env, done + 1, skipped)
        max_abs = max(max_abs, abs(total))
        done += 1
    if done == 0:
        raise EvalDomainError("all probe points hit singularities")
    return ZeroResult(UNDECIDED_ZERO, "numeric", max_abs, None, done, skipped)


def equal_exprs(a: Expr, b: Expr, seed: int = DEFAULT_SEED) -> ZeroResult:
    return is_zero(as_expr(a) - as_expr(b), seed=seed)


def is_constant(e: Expr, wrt: Iterable[str]) -> bool:
    """True when all listed variables provably drop out."""
    s = simplify(e)
    for v in wrt:
        if canon(_diff(s, v))[0]:
            return False
    return True


def rational_value(e: Expr) -> Fraction | None:
    """Exact rational value of a constant expression, if it is one."""
    f = canon(as_expr(e))
    return _frac_rat(f)
