"""Exact phase-space polynomials and the Moyal star product.

A :class:`PhasePolynomial` is a sparse polynomial in ``q``, ``p`` and a formal
generator ``hbar`` with exact complex-rational coefficients.  All star-algebra
identities in this module hold exactly; floats only appear in
:meth:`PhasePolynomial.evaluate`.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping

from gmpy2 import mpq

__all__ = [
    "DegreeCapError",
    "ParseError",
    "PhasePolynomial",
    "StarContext",
    "EXACT",
    "DEFAULT_CONTEXT",
    "partial_derivative",
    "omega_k",
    "omega2_tilde",
    "star_product",
    "moyal_bracket",
    "star_power",
    "parse_polynomial",
]

Q = mpq
ZERO = mpq(0)
ONE = mpq(1)

# i**k for k mod 4, as (re, im)
_I_POWERS = ((ONE, ZERO), (ZERO, ONE), (-ONE, ZERO), (ZERO, -ONE))


class DegreeCapError(ArithmeticError):
    """Raised when a result would exceed the context's (q, p)-degree cap."""


class ParseError(ValueError):
    pass


def _to_q(x) -> mpq:
    if isinstance(x, str):
        return mpq(Fraction(x.strip()))
    if isinstance(x, float):
        raise TypeError("floating-point coefficients are not exact; use Fraction or str")
    return mpq(x)


def _to_coeff(c) -> tuple[mpq, mpq]:
    if isinstance(c, tuple):
        re_, im_ = c
        return _to_q(re_), _to_q(im_)
    if isinstance(c, complex):
        if c.real != int(c.real) or c.imag != int(c.imag):
            raise TypeError("complex literals must have integer parts; pass a (re, im) tuple")
        return mpq(int(c.real)), mpq(int(c.imag))
    return _to_q(c), ZERO


class PhasePolynomial:
    """Immutable sparse polynomial in q, p, hbar with complex-rational coefficients.

    Terms are keyed by ``(i, j, k)`` = (q-degree, p-degree, hbar-degree).
    Zero coefficients are never stored, so equal polynomials have equal term maps.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping | None = None):
        clean: dict[tuple[int, int, int], tuple[mpq, mpq]] = {}
        for key, c in (terms or {}).items():
            i, j, k = (int(e) for e in key)
            if i < 0 or j < 0 or k < 0:
                raise ValueError(f"negative exponent in {key}")
            re_, im_ = _to_coeff(c)
            if re_ or im_:
                clean[(i, j, k)] = (re_, im_)
        self._terms = clean
        self._hash = None

    @classmethod
    def _from_clean(cls, terms: dict) -> "PhasePolynomial":
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    # -- constructors -------------------------------------------------
    @classmethod
    def constant(cls, c) -> "PhasePolynomial":
        return cls({(0, 0, 0): c})

    @classmethod
    def monomial(cls, i: int = 0, j: int = 0, k: int = 0, c=1) -> "PhasePolynomial":
        return cls({(i, j, k): c})

    @classmethod
    def q(cls) -> "PhasePolynomial":
        return cls.monomial(1, 0, 0)

    @classmethod
    def p(cls) -> "PhasePolynomial":
        return cls.monomial(0, 1, 0)

    @classmethod
    def hbar(cls) -> "PhasePolynomial":
        return cls.monomial(0, 0, 1)

    # -- inspection ---------------------------------------------------
    @property
    def terms(self) -> Mapping[tuple[int, int, int], tuple[mpq, mpq]]:
        return dict(self._terms)

    def items(self) -> Iterator:
        return iter(self._terms.items())

    def coefficient(self, i: int, j: int, k: int = 0) -> tuple[mpq, mpq]:
        return self._terms.get((i, j, k), (ZERO, ZERO))

    def degree(self) -> int:
        """Total (q, p)-degree; -1 for the zero polynomial."""
        return max((i + j for i, j, _ in self._terms), default=-1)

    def hbar_degree(self) -> int:
        return max((k for _, _, k in self._terms), default=-1)

    def is_zero(self) -> bool:
        return not self._terms

    def is_real(self) -> bool:
        return all(not im for _, im in self._terms.values())

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PhasePolynomial):
            try:
                other = PhasePolynomial.constant(other)
            except TypeError:
                return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # -- arithmetic ---------------------------------------------------
    def _coerce(self, other) -> "PhasePolynomial":
        if isinstance(other, PhasePolynomial):
            return other
        return PhasePolynomial.constant(other)

    def __add__(self, other) -> "PhasePolynomial":
        other = self._coerce(other)
        out = dict(self._terms)
        for key, (b, d) in other._terms.items():
            if key in out:
                a, c = out[key]
                re_, im_ = a + b, c + d
                if re_ or im_:
                    out[key] = (re_, im_)
                else:
                    del out[key]
            else:
                out[key] = (b, d)
        return PhasePolynomial._from_clean(out)

    __radd__ = __add__

    def __neg__(self) -> "PhasePolynomial":
        return PhasePolynomial._from_clean({k: (-a, -b) for k, (a, b) in self._terms.items()})

    def __sub__(self, other) -> "PhasePolynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "PhasePolynomial":
        return self._coerce(other) - self

    def scale(self, c) -> "PhasePolynomial":
        """Multiply by an exact (complex) rational scalar."""
        a, b = _to_coeff(c)
        if not a and not b:
            return PhasePolynomial()
        out = {}
        for key, (x, y) in self._terms.items():
            if not b:
                out[key] = (a * x, a * y)
            else:
                re_, im_ = a * x - b * y, a * y + b * x
                if re_ or im_:
                    out[key] = (re_, im_)
        return PhasePolynomial._from_clean(out)

    def __mul__(self, other) -> "PhasePolynomial":
        if not isinstance(other, PhasePolynomial):
            return self.scale(other)
        acc: dict = {}
        for (i1, j1, k1), (a, b) in self._terms.items():
            for (i2, j2, k2), (c, d) in other._terms.items():
                key = (i1 + i2, j1 + j2, k1 + k2)
                if b:
                    re_, im_ = a * c - b * d, a * d + b * c
                elif d:
                    re_, im_ = a * c, a * d
                else:
                    re_, im_ = a * c, ZERO
                cur = acc.get(key)
                if cur is None:
                    acc[key] = [re_, im_]
                else:
                    cur[0] += re_
                    cur[1] += im_
        return PhasePolynomial._from_clean(
            {k: (v[0], v[1]) for k, v in acc.items() if v[0] or v[1]}
        )

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "PhasePolynomial":
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        out = PhasePolynomial.constant(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def conjugate(self) -> "PhasePolynomial":
        return PhasePolynomial._from_clean({k: (a, -b) for k, (a, b) in self._terms.items()})

    # -- calculus and truncation ---------------------------------------
    def diff(self, variable: str, order: int = 1) -> "PhasePolynomial":
        if order < 0:
            raise ValueError("derivative order must be nonnegative")
        if order == 0:
            return self
        axis = {"q": 0, "p": 1}[variable]
        out = {}
        for key, (a, b) in self._terms.items():
            e = key[axis]
            if e < order:
                continue
            factor = math.perm(e, order)
            new = list(key)
            new[axis] = e - order
            out[tuple(new)] = (a * factor, b * factor)
        return PhasePolynomial._from_clean(out)

    def truncate_hbar(self, max_degree: int | None) -> "PhasePolynomial":
        if max_degree is None:
            return self
        return PhasePolynomial._from_clean(
            {k: v for k, v in self._terms.items() if k[2] <= max_degree}
        )

    def hbar_part(self, k: int) -> "PhasePolynomial":
        """Coefficient of hbar**k, returned as an hbar-independent polynomial."""
        return PhasePolynomial._from_clean(
            {(i, j, 0): v for (i, j, kk), v in self._terms.items() if kk == k}
        )

    def hbar_parts(self) -> dict[int, "PhasePolynomial"]:
        parts: dict[int, dict] = {}
        for (i, j, k), v in self._terms.items():
            parts.setdefault(k, {})[(i, j, 0)] = v
        return {k: PhasePolynomial._from_clean(t) for k, t in sorted(parts.items())}

    def substitute_hbar(self, value) -> "PhasePolynomial":
        """Replace hbar by an exact rational, leaving a polynomial in q, p."""
        value = _to_q(value)
        out = PhasePolynomial()
        for k, part in self.hbar_parts().items():
            out = out + part.scale(value**k)
        return out

    def evaluate(self, q, p, hbar=1.0):
        """Numeric value at (q, p, hbar); broadcasts over numpy arrays.

        Returns a real result when every coefficient is real.
        """
        real = self.is_real()
        total = 0.0 if real else 0j
        for (i, j, k), (a, b) in self._terms.items():
            c = float(a) if real else complex(float(a), float(b))
            total = total + c * (q**i) * (p**j) * (hbar**k)
        return total

    # -- text ---------------------------------------------------------
    def to_text(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for key in sorted(self._terms, key=lambda t: (t[2], t[0], t[1])):
            neg, body = _format_term(key, self._terms[key])
            pieces.append((neg, body))
        first_neg, first = pieces[0]
        out = ("-" if first_neg else "") + first
        for neg, body in pieces[1:]:
            out += (" - " if neg else " + ") + body
        return out

    __str__ = to_text

    def __repr__(self) -> str:
        return f"PhasePolynomial({self.to_text()!r})"


def _fmt_mag(x: mpq) -> str:
    x = abs(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"({x.numerator}/{x.denominator})"


def _format_term(key, coeff) -> tuple[bool, str]:
    i, j, k = key
    a, b = coeff
    mono = []
    for sym, e in (("q", i), ("p", j), ("ħ", k)):
        if e == 1:
            mono.append(sym)
        elif e > 1:
            mono.append(f"{sym}^{e}")
    mono_s = " ".join(mono)
    if a and b:
        sign = "-" if b < 0 else "+"
        coef = f"({_fmt_signed(a)} {sign} {_fmt_mag(b).strip('()')} i)"
        return False, coef + (" " + mono_s if mono_s else "")
    if b:
        neg = b < 0
        mag = "" if abs(b) == 1 else _fmt_mag(b) + " "
        return neg, f"{mag}i" + (" " + mono_s if mono_s else "")
    neg = a < 0
    if abs(a) == 1 and mono_s:
        return neg, mono_s
    return neg, _fmt_mag(a) + (" " + mono_s if mono_s else "")


def _fmt_signed(x: mpq) -> str:
    s = _fmt_mag(x).strip("()")
    return "-" + s if x < 0 else s


@dataclass(frozen=True)
class StarContext:
    """Truncation policy for star-algebra operations.

    ``hbar_truncation`` of ``None`` means exact (no truncation); an integer K
    drops every term of hbar-degree above K, so results are correct mod hbar**(K+1).
    """

    hbar_truncation: int | None = None
    degree_cap: int = 64

    def __post_init__(self):
        if self.hbar_truncation is not None and self.hbar_truncation < 0:
            raise ValueError("hbar_truncation must be nonnegative or None")
        if self.degree_cap < 1:
            raise ValueError("degree_cap must be positive")

    def check(self, f: PhasePolynomial) -> PhasePolynomial:
        if f.degree() > self.degree_cap:
            raise DegreeCapError(
                f"(q,p)-degree {f.degree()} exceeds cap {self.degree_cap}"
            )
        return f


EXACT = StarContext()
DEFAULT_CONTEXT = EXACT


def partial_derivative(f: PhasePolynomial, variable: str, order: int = 1) -> PhasePolynomial:
    return f.diff(variable, order)


def _mixed(f: PhasePolynomial, nq: int, np_: int, cache: dict) -> PhasePolynomial:
    key = (nq, np_)
    if key not in cache:
        cache[key] = f.diff("q", nq).diff("p", np_)
    return cache[key]


def omega_k(f: PhasePolynomial, g: PhasePolynomial, k: int, ctx: StarContext = EXACT,
            _cache_f: dict | None = None, _cache_g: dict | None = None) -> PhasePolynomial:
    """k-th bidifferential: sum_j (-1)^j C(k,j) d^k f/dq^(k-j)dp^j * d^k g/dq^j dp^(k-j)."""
    if k < 1:
        raise ValueError("omega_k needs k >= 1")
    cf = {} if _cache_f is None else _cache_f
    cg = {} if _cache_g is None else _cache_g
    out = PhasePolynomial()
    for j in range(k + 1):
        df = _mixed(f, k - j, j, cf)
        if not df:
            continue
        dg = _mixed(g, j, k - j, cg)
        if not dg:
            continue
        c = math.comb(k, j) * (-1 if j % 2 else 1)
        out = out + (df * dg).scale(c)
    return ctx.check(out)


def omega2_tilde(f: PhasePolynomial, ctx: StarContext = EXACT) -> PhasePolynomial:
    fq, fp = f.diff("q"), f.diff("p")
    out = f.diff("q", 2) * fp * fp - (f.diff("q").diff("p") * fq * fp).scale(2) + f.diff("p", 2) * fq * fq
    return ctx.check(out)


def star_product(f: PhasePolynomial, g: PhasePolynomial, ctx: StarContext = EXACT) -> PhasePolynomial:
    """Moyal product f*g = sum_k (i hbar/2)^k / k! omega_k(f, g)."""
    kmax = min(f.degree(), g.degree())
    if ctx.hbar_truncation is not None:
        kmax = min(kmax, ctx.hbar_truncation)
    out = f * g
    cf: dict = {}
    cg: dict = {}
    hb = PhasePolynomial.hbar()
    hk = PhasePolynomial.constant(1)
    for k in range(1, kmax + 1):
        hk = hk * hb
        w = omega_k(f, g, k, ctx, cf, cg)
        if not w:
            continue
        re_, im_ = _I_POWERS[k % 4]
        scale = mpq(1, 2**k * math.factorial(k))
        out = out + (w * hk).scale((re_ * scale, im_ * scale))
    return ctx.check(out.truncate_hbar(ctx.hbar_truncation))


def moyal_bracket(f: PhasePolynomial, g: PhasePolynomial, ctx: StarContext = EXACT) -> PhasePolynomial:
    return star_product(f, g, ctx) - star_product(g, f, ctx)


def star_power(f: PhasePolynomial, n: int, ctx: StarContext = EXACT) -> PhasePolynomial:
    """Left-iterated star power f*(f*(...*f))."""
    if n < 0:
        raise ValueError("star_power needs n >= 0")
    if n == 0:
        return PhasePolynomial.constant(1)
    out = ctx.check(f.truncate_hbar(ctx.hbar_truncation))
    for _ in range(n - 1):
        out = star_product(f, out, ctx)
    return out


# -- parsing -------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([qp])|(\*\*|[-+*/^()]))")


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.replace("−", "-")
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos:].strip()[0]!r} at {pos}")
        tok = m.group(1) or m.group(2) or m.group(3)
        out.append("^" if tok == "**" else tok)
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens: list[str]):
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise ParseError(f"expected {expected or 'token'}, got {tok!r}")
        self.i += 1
        return tok

    def expr(self) -> PhasePolynomial:
        out = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self) -> PhasePolynomial:
        out = self.unary()
        while True:
            tok = self.peek()
            if tok is None or tok in ("+", "-", ")", "^"):
                return out
            op = self.take() if tok in ("*", "/") else "*"  # juxtaposition multiplies
            if op == "*":
                out = out * self.unary()
            else:
                den = self.unary()
                if den.is_zero() or den.degree() != 0 or den.hbar_degree() != 0 or not den.is_real():
                    raise ParseError("division only by nonzero rational constants")
                out = out.scale(1 / den.coefficient(0, 0, 0)[0])

    def unary(self) -> PhasePolynomial:
        if self.peek() == "-":
            self.take()
            return -self.unary()
        if self.peek() == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> PhasePolynomial:
        base = self.atom()
        if self.peek() == "^":
            self.take()
            tok = self.take()
            if not tok.isdigit():
                raise ParseError("exponent must be a nonnegative integer literal")
            base = base ** int(tok)
        return base

    def atom(self) -> PhasePolynomial:
        tok = self.take()
        if tok.isdigit():
            return PhasePolynomial.constant(int(tok))
        if tok == "q":
            return PhasePolynomial.q()
        if tok == "p":
            return PhasePolynomial.p()
        if tok == "(":
            out = self.expr()
            self.take(")")
            return out
        raise ParseError(f"unexpected token {tok!r}")


def parse_polynomial(text: str) -> PhasePolynomial:
    """Parse +, -, *, ^ expressions in q, p with rational literals, e.g. ``(p^2+q^2)/2``.

    Juxtaposition multiplies, so canonical text such as ``2 q p^2`` parses back.
    """
    toks = _tokenize(text)
    if not toks:
        raise ParseError("empty expression")
    parser = _Parser(toks)
    out = parser.expr()
    if parser.peek() is not None:
        raise ParseError(f"trailing input at {parser.peek()!r}")
    return out
