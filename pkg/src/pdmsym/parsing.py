"""Text form for expressions: tokenizer, recursive-descent parser, printer.

Grammar (infix, ^ for powers, right-associative):

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('+' | '-')* power
    power   := atom ('^' unary)?
    atom    := NUMBER | NAME | NAME '(' expr (',' expr)* ')'
             | 'D' '[' INT (',' INT)* ']' NAME '(' ... ')' | '(' expr ')'

Sugar: `r` parses to sqrt(x1^2+x2^2) and `phi` to atan2(x2,x1).  Known
function names map to kernels; any other NAME followed by '(' becomes an
uninterpreted function (primes after the name, or a D[...] prefix, encode
derivative multi-indices).  Bare names are variables if declared, else
parameters.

Printing emits canonical-form-compatible text; parse(print(e)) == e holds on
canonical forms.  `to_prefix` gives a stable prefix serialization for golden
tests.
"""

from __future__ import annotations

from fractions import Fraction

from .expr import (
    Add, Expr, ExprError, Fun, Mul, Param, Pow, Rat, UFunc, Var,
    FUNCTIONS, as_expr,
)

DEFAULT_VARIABLES = ("t", "x1", "x2")


class ParseError(ExprError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


_R_SUGAR = Fun("sqrt", (Add((Pow(Var("x1"), Fraction(2)), Pow(Var("x2"), Fraction(2)))),))
_PHI_SUGAR = Fun("atan2", (Var("x2"), Var("x1")))


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg):
        raise ParseError(msg, self.pos)

    def tokens(self):
        text, n = self.text, len(self.text)
        out = []
        i = 0
        while i < n:
            ch = text[i]
            if ch.isspace():
                i += 1
                continue
            if ch in "+-*/^(),[]'":
                out.append((ch, ch, i))
                i += 1
                continue
            if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
                j = i
                seen_dot = False
                while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                    if text[j] == ".":
                        seen_dot = True
                    j += 1
                out.append(("num", text[i:j], i))
                i = j
                continue
            if ch.isalpha() or ch == "_":
                j = i
                while j < n and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                out.append(("name", text[i:j], i))
                i = j
                continue
            self.pos = i
            self.error(f"unexpected character {ch!r}")
        out.append(("end", "", n))
        return out


class Parser:
    def __init__(self, text: str, variables=DEFAULT_VARIABLES, extra_names=()):
        self.text = text
        self.toks = _Tokenizer(text).tokens()
        self.i = 0
        self.variables = set(variables)
        self.params_seen: set = set()
        self.extra_names = set(extra_names)

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind):
        t = self.next()
        if t[0] != kind:
            raise ParseError(f"expected {kind!r}, found {t[1]!r}", t[2])
        return t

    def parse(self) -> Expr:
        e = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise ParseError(f"unexpected trailing input {t[1]!r}", t[2])
        return e

    def expr(self) -> Expr:
        terms = [self.term()]
        while self.peek()[0] in "+-":
            op = self.next()[0]
            rhs = self.term()
            terms.append(rhs if op == "+" else Mul((Rat(-1), rhs)))
        return terms[0] if len(terms) == 1 else Add(tuple(terms))

    def term(self) -> Expr:
        factors = [self.unary()]
        while self.peek()[0] in "*/":
            op = self.next()[0]
            rhs = self.unary()
            factors.append(rhs if op == "*" else Pow(rhs, Fraction(-1)))
        return factors[0] if len(factors) == 1 else Mul(tuple(factors))

    def unary(self) -> Expr:
        sign = 1
        while self.peek()[0] in "+-":
            if self.next()[0] == "-":
                sign = -sign
        e = self.power()
        return e if sign == 1 else Mul((Rat(-1), e))

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] == "^":
            self.next()
            exponent = self.unary()
            q = _as_rational(exponent)
            if q is not None:
                return Pow(base, q)
            # symbolic exponent: positive-base power via exp/log
            return Fun("exp", (Mul((exponent, Fun("log", (base,)))),))
        return base

    def atom(self) -> Expr:
        kind, text, pos = self.next()
        if kind == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "num":
            if "." in text:
                return Rat(Fraction(text))
            return Rat(int(text))
        if kind == "name":
            if text == "D" and self.peek()[0] == "[":
                return self.dfunc()
            primes = 0
            while self.peek()[0] == "'":
                self.next()
                primes += 1
            if self.peek()[0] == "(":
                return self.call(text, primes, pos)
            if primes:
                raise ParseError("derivative quote on a non-function", pos)
            if text == "r":
                return _R_SUGAR
            if text == "phi":
                return _PHI_SUGAR
            if text in self.variables:
                return Var(text)
            self.params_seen.add(text)
            return Param(text)
        raise ParseError(f"unexpected token {text!r}", pos)

    def dfunc(self) -> Expr:
        self.expect("[")
        orders = [int(self.expect("num")[1])]
        while self.peek()[0] == ",":
            self.next()
            orders.append(int(self.expect("num")[1]))
        self.expect("]")
        name = self.expect("name")[1]
        args = self.arglist()
        if len(orders) != len(args):
            raise ParseError(f"derivative index length mismatch for {name}", self.peek()[2])
        return UFunc(name, tuple(orders), tuple(args))

    def call(self, name: str, primes: int, pos: int) -> Expr:
        args = self.arglist()
        if name in FUNCTIONS:
            if primes:
                raise ParseError(f"cannot prime builtin {name}", pos)
            if len(args) != FUNCTIONS[name]:
                raise ParseError(
                    f"{name} expects {FUNCTIONS[name]} argument(s), got {len(args)}", pos)
            return Fun(name, tuple(args))
        if primes and len(args) != 1:
            raise ParseError("prime notation needs a unary function", pos)
        orders = (primes,) + (0,) * (len(args) - 1)
        return UFunc(name, orders, tuple(args))

    def arglist(self):
        self.expect("(")
        args = [self.expr()]
        while self.peek()[0] == ",":
            self.next()
            args.append(self.expr())
        self.expect(")")
        return args


def _as_rational(e: Expr) -> Fraction | None:
    if isinstance(e, Rat):
        return e.value
    if isinstance(e, Mul) and len(e.factors) == 2:
        a, b = e.factors
        if isinstance(a, Rat) and isinstance(b, Rat):
            return a.value * b.value
        # -n and n/m shapes produced by unary/term parsing
        if isinstance(a, Rat) and isinstance(b, Pow) and isinstance(b.base, Rat) and b.exponent == -1:
            return a.value / b.base.value
    if isinstance(e, Pow) and isinstance(e.base, Rat) and e.exponent == -1:
        return Fraction(1) / e.base.value
    return None


def parse(text: str, variables=DEFAULT_VARIABLES) -> Expr:
    return Parser(text, variables=variables).parse()


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4


def to_text(e: Expr) -> str:
    return _fmt(as_expr(e), 0)


def _fmt_rat(q: Fraction, prec: int) -> str:
    if q.denominator == 1:
        s = str(q.numerator)
        need = _PREC_MUL if q.numerator < 0 else _PREC_ATOM
    else:
        s = f"{q.numerator}/{q.denominator}"
        need = _PREC_MUL
    return f"({s})" if need < prec else s


def _fmt(e: Expr, prec: int) -> str:
    if isinstance(e, Rat):
        return _fmt_rat(e.value, prec)
    if isinstance(e, (Var, Param)):
        return e.name
    if isinstance(e, Add):
        parts = []
        for i, t in enumerate(e.terms):
            s = _fmt(t, _PREC_ADD + 1)
            if i and not s.startswith("-"):
                s = "+" + s
            parts.append(s)
        s = "".join(parts)
        return f"({s})" if _PREC_ADD < prec else s
    if isinstance(e, Mul):
        num_parts = []
        den_parts = []
        neg = False
        for f in e.factors:
            if isinstance(f, Rat) and f.value == -1 and len(e.factors) > 1:
                neg = not neg
                continue
            if isinstance(f, Pow) and f.exponent < 0:
                flipped = f.base if f.exponent == -1 else Pow(f.base, -f.exponent)
                den_parts.append(_fmt(flipped, _PREC_MUL + 1))
            else:
                num_parts.append(_fmt(f, _PREC_MUL + 1))
        s = "*".join(num_parts) if num_parts else "1"
        for d in den_parts:
            s += f"/{d}"
        if neg:
            s = "-" + s
            return f"({s})" if _PREC_ADD + 1 <= prec else s
        return f"({s})" if _PREC_MUL < prec else s
    if isinstance(e, Pow):
        if e.exponent == 1:
            return _fmt(e.base, prec)
        if e.exponent == -1:
            s = f"1/{_fmt(e.base, _PREC_MUL + 1)}"
            return f"({s})" if _PREC_MUL < prec else s
        if e.exponent < 0:
            s = f"1/{_fmt(Pow(e.base, -e.exponent), _PREC_MUL + 1)}"
            return f"({s})" if _PREC_MUL < prec else s
        b = _fmt(e.base, _PREC_POW + 1)
        q = e.exponent
        qs = str(q.numerator) if q.denominator == 1 else f"({q.numerator}/{q.denominator})"
        s = f"{b}^{qs}"
        return f"({s})" if _PREC_POW < prec else s
    if isinstance(e, Fun):
        args = ", ".join(_fmt(a, 0) for a in e.args)
        return f"{e.name}({args})"
    if isinstance(e, UFunc):
        args = ", ".join(_fmt(a, 0) for a in e.args)
        if len(e.orders) == 1 and e.orders[0] <= 3:
            primes = "'" * e.orders[0]
            return f"{e.name}{primes}({args})"
        if any(e.orders):
            idx = ",".join(str(k) for k in e.orders)
            return f"D[{idx}]{e.name}({args})"
        return f"{e.name}({args})"
    raise ExprError(f"cannot print {type(e)}")  # pragma: no cover


def to_prefix(e: Expr) -> str:
    """Stable prefix serialization used for golden tests."""
    x = as_expr(e)
    if isinstance(x, Rat):
        q = x.value
        return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
    if isinstance(x, Var):
        return f"(var {x.name})"
    if isinstance(x, Param):
        return f"(param {x.name})"
    if isinstance(x, Add):
        return "(+ " + " ".join(to_prefix(t) for t in x.terms) + ")"
    if isinstance(x, Mul):
        return "(* " + " ".join(to_prefix(t) for t in x.factors) + ")"
    if isinstance(x, Pow):
        q = x.exponent
        qs = str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
        return f"(^ {to_prefix(x.base)} {qs})"
    if isinstance(x, Fun):
        return f"({x.name} " + " ".join(to_prefix(a) for a in x.args) + ")"
    if isinstance(x, UFunc):
        idx = ",".join(str(k) for k in x.orders)
        return f"(ufunc {x.name} [{idx}] " + " ".join(to_prefix(a) for a in x.args) + ")"
    raise ExprError(f"cannot serialize {type(x)}")  # pragma: no cover
