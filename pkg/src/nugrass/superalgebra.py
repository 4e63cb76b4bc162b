"""Exact arithmetic for the structure ring of a nu-domain.

Elements are finite sums  sum_S  c_S * e_S  where each coefficient c_S is a
rational function over QQ in declared even indeterminates and e_S is a
monomial in anticommuting odd generators.  The first odd generator carries
the odd involution nu (toggle membership of e_1, left insertion, no sign).
Auxiliary odd generators (tau's) can be adjoined for first-order nilpotent
differentiation; nu never touches them.

Finite Grassmann algebras Lambda_r over QQ (class GrassmannNumber) model the
coordinate rings of the odd probe superpoints used throughout the
verification suites.
"""

from __future__ import annotations

import random
from functools import lru_cache

from sympy import QQ
from sympy.external.gmpy import MPQ
from sympy.polys.rings import ring as _sym_ring

from .errors import (
    ContextMismatch,
    NameClash,
    NoOddGenerators,
    UnknownVariable,
    ZeroBody,
)

EVEN = 0
ODD = 1

_RING_CACHE: dict[tuple[str, ...], object] = {}


def _get_ring(names: tuple[str, ...]):
    try:
        return _RING_CACHE[names]
    except KeyError:
        R = _sym_ring(" ".join(names), QQ)[0]
        _RING_CACHE[names] = R
        return R


@lru_cache(maxsize=None)
def mono_sign(a: int, b: int) -> int:
    """Sign of e_a * e_b for disjoint bitmask monomials (ascending order)."""
    inversions = 0
    t = 0
    bb = b
    while bb:
        if bb & 1:
            inversions += (a >> (t + 1)).bit_count()
        bb >>= 1
        t += 1
    return -1 if inversions & 1 else 1


def _poly_const(p):
    """Constant coefficient of a PolyElement (works for zero-generator rings)."""
    return p.const()


def _poly_eval(p, pairs):
    """Evaluate a PolyElement fully; tolerates empty substitution lists."""
    if not pairs:
        return _poly_const(p)
    v = p.evaluate(pairs)
    if not isinstance(v, (MPQ, int)):
        # partially evaluated polynomial left over: constant in remaining gens
        return _poly_const(v)
    return MPQ(v)


class RationalFunction:
    """Quotient of multivariate polynomials over QQ in canonical form.

    Canonical means: numerator and denominator share no common factor and the
    denominator is monic under the ring's lex order, so equality of values is
    equality of representations.
    """

    __slots__ = ("names", "num", "den")

    def __init__(self, names, num, den, _canonical=False):
        self.names = names
        if not _canonical:
            if not den:
                raise ZeroDivisionError("zero denominator")
            g = num.gcd(den)
            if g != g.ring.one:
                num = num.quo(g)
                den = den.quo(g)
            lc = den.LC
            if lc != 1:
                inv = QQ(1) / lc
                num = num.mul_ground(inv)
                den = den.mul_ground(inv)
        self.num = num
        self.den = den

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_rat(cls, names: tuple[str, ...], value) -> "RationalFunction":
        R = _get_ring(names)
        zero_exp = (0,) * len(names)
        q = MPQ(value)
        num = R.from_dict({zero_exp: QQ(q.numerator, q.denominator)}) if q else R.zero
        return cls(names, num, R.one, _canonical=True)

    @classmethod
    def gen(cls, names: tuple[str, ...], name: str) -> "RationalFunction":
        R = _get_ring(names)
        i = names.index(name)
        exp = tuple(1 if j == i else 0 for j in range(len(names)))
        return cls(names, R.from_dict({exp: QQ(1)}), R.one, _canonical=True)

    # -- predicates --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.num

    def is_one(self) -> bool:
        return self.num == self.den

    def __bool__(self) -> bool:
        return bool(self.num)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.names == other.names and self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.names, self.num, self.den))

    # -- arithmetic --------------------------------------------------------

    def _check(self, other):
        if self.names != other.names:
            raise ContextMismatch(f"{self.names} vs {other.names}")

    def __add__(self, other):
        self._check(other)
        return RationalFunction(
            self.names, self.num * other.den + other.num * self.den, self.den * other.den
        )

    def __sub__(self, other):
        self._check(other)
        return RationalFunction(
            self.names, self.num * other.den - other.num * self.den, self.den * other.den
        )

    def __neg__(self):
        return RationalFunction(self.names, -self.num, self.den, _canonical=True)

    def __mul__(self, other):
        self._check(other)
        return RationalFunction(self.names, self.num * other.num, self.den * other.den)

    def __truediv__(self, other):
        self._check(other)
        if not other.num:
            raise ZeroDivisionError("division by zero rational function")
        return RationalFunction(self.names, self.num * other.den, self.den * other.num)

    def inv(self) -> "RationalFunction":
        if not self.num:
            raise ZeroDivisionError("inverse of zero rational function")
        return RationalFunction(self.names, self.den, self.num)

    def scale(self, q) -> "RationalFunction":
        q = MPQ(q)
        if not q:
            R = _get_ring(self.names)
            return RationalFunction(self.names, R.zero, R.one, _canonical=True)
        return RationalFunction(
            self.names, self.num.mul_ground(QQ(q.numerator, q.denominator)), self.den
        )

    def diff(self, name: str) -> "RationalFunction":
        if name not in self.names:
            raise UnknownVariable(name)
        x = _get_ring(self.names).gens[self.names.index(name)]
        dn = self.num.diff(x)
        dd = self.den.diff(x)
        return RationalFunction(
            self.names, dn * self.den - self.num * dd, self.den * self.den
        )

    # -- evaluation --------------------------------------------------------

    def eval_rational(self, assign: dict[str, object]):
        """Evaluate at exact rational arguments; returns an MPQ."""
        R = _get_ring(self.names)
        pairs = [(R.gens[i], QQ(MPQ(assign[n]).numerator, MPQ(assign[n]).denominator))
                 for i, n in enumerate(self.names)]
        d = _poly_eval(self.den, pairs)
        if not d:
            raise ZeroDivisionError("denominator vanishes at the point")
        return MPQ(_poly_eval(self.num, pairs)) / MPQ(d)

    def eval_grassmann(self, assign: dict[str, "GrassmannNumber"], r: int) -> "GrassmannNumber":
        """Evaluate at even Grassmann-number arguments."""
        num = _eval_poly_grassmann(self.num, self.names, assign, r)
        den = _eval_poly_grassmann(self.den, self.names, assign, r)
        return num * den.inv()

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        def poly_dict(p):
            return {",".join(map(str, exp)): str(c) for exp, c in sorted(p.terms())}

        return {"vars": list(self.names), "num": poly_dict(self.num), "den": poly_dict(self.den)}

    @classmethod
    def from_dict(cls, data: dict) -> "RationalFunction":
        names = tuple(data["vars"])
        R = _get_ring(names)

        def parse(d):
            out = {}
            for key, cstr in d.items():
                exp = tuple(int(t) for t in key.split(",")) if key else ()
                q = MPQ(cstr)
                out[exp] = QQ(q.numerator, q.denominator)
            return R.from_dict(out) if out else R.zero

        return cls(names, parse(data["num"]), parse(data["den"]))

    def __repr__(self):
        if self.den == _get_ring(self.names).one:
            return str(self.num)
        return f"({self.num})/({self.den})"


def _eval_poly_grassmann(p, names, assign, r):
    total = GrassmannNumber(r, {})
    for exp, coeff in p.terms():
        term = GrassmannNumber.scalar(r, MPQ(coeff))
        for i, k in enumerate(exp):
            for _ in range(k):
                term = term * assign[names[i]]
        total = total + term
    return total


class GeneratorContext:
    """Declares the generators of one structure ring.

    even_names are the commuting indeterminates of the coefficient field,
    odd_names the exterior generators the involution acts on, aux_names
    adjoined nilpotent odd parameters that nu ignores.
    """

    __slots__ = ("even_names", "odd_names", "aux_names")

    def __init__(self, even_names=(), odd_names=(), aux_names=()):
        even_names = tuple(even_names)
        odd_names = tuple(odd_names)
        aux_names = tuple(aux_names)
        all_names = even_names + odd_names + aux_names
        if len(set(all_names)) != len(all_names):
            raise NameClash(f"duplicate generator name in {all_names}")
        self.even_names = even_names
        self.odd_names = odd_names
        self.aux_names = aux_names

    @property
    def beta(self) -> int:
        return len(self.odd_names)

    @property
    def odd_total(self) -> int:
        return len(self.odd_names) + len(self.aux_names)

    def __eq__(self, other):
        if not isinstance(other, GeneratorContext):
            return NotImplemented
        return (
            self.even_names == other.even_names
            and self.odd_names == other.odd_names
            and self.aux_names == other.aux_names
        )

    def __hash__(self):
        return hash((self.even_names, self.odd_names, self.aux_names))

    def __repr__(self):
        return f"GeneratorContext(even={self.even_names}, odd={self.odd_names}, aux={self.aux_names})"

    # -- element builders ---------------------------------------------------

    def zero(self) -> "SuperFunction":
        return SuperFunction(self, {})

    def one(self) -> "SuperFunction":
        return self.scalar(1)

    def scalar(self, q) -> "SuperFunction":
        c = RationalFunction.from_rat(self.even_names, q)
        return SuperFunction(self, {0: c} if c else {})

    def coeff(self, rf: RationalFunction) -> "SuperFunction":
        if rf.names != self.even_names:
            raise ContextMismatch("coefficient from a different even context")
        return SuperFunction(self, {0: rf} if rf else {})

    def gen(self, name: str) -> "SuperFunction":
        if name in self.even_names:
            return self.coeff(RationalFunction.gen(self.even_names, name))
        odd_all = self.odd_names + self.aux_names
        if name in odd_all:
            bit = 1 << odd_all.index(name)
            return SuperFunction(self, {bit: RationalFunction.from_rat(self.even_names, 1)})
        raise UnknownVariable(name)

    # -- context surgery ----------------------------------------------------

    def adjoin_nilpotent(self, names) -> "GeneratorContext":
        """Extend with fresh auxiliary odd parameters."""
        names = tuple(names)
        existing = set(self.even_names + self.odd_names + self.aux_names)
        for n in names:
            if n in existing:
                raise NameClash(n)
        return GeneratorContext(self.even_names, self.odd_names, self.aux_names + names)

    def extend_even(self, names) -> "GeneratorContext":
        """Extend the coefficient field with fresh even indeterminates."""
        names = tuple(names)
        existing = set(self.even_names + self.odd_names + self.aux_names)
        for n in names:
            if n in existing:
                raise NameClash(n)
        return GeneratorContext(self.even_names + names, self.odd_names, self.aux_names)

    def embed(self, sf: "SuperFunction") -> "SuperFunction":
        """Re-context an element of a sub-context (same odd part, fewer evens;
        or same evens, fewer auxiliaries) into this context."""
        src = sf.ctx
        if src.odd_names != self.odd_names or not set(src.aux_names) <= set(self.aux_names):
            raise ContextMismatch("odd parts must agree for embedding")
        if tuple(self.even_names[: len(src.even_names)]) != src.even_names:
            raise ContextMismatch("even names must be a prefix for embedding")
        if src.aux_names != self.aux_names[: len(src.aux_names)]:
            raise ContextMismatch("aux names must be a prefix for embedding")
        R = _get_ring(self.even_names)
        pad = len(self.even_names) - len(src.even_names)
        terms = {}
        for mask, c in sf.terms.items():
            num = R.from_dict({exp + (0,) * pad: co for exp, co in c.num.terms()})
            den = R.from_dict({exp + (0,) * pad: co for exp, co in c.den.terms()})
            terms[mask] = RationalFunction(self.even_names, num, den, _canonical=True)
        return SuperFunction(self, terms)


class SuperFunction:
    """Element of the structure ring over a generator context."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: GeneratorContext, terms: dict[int, RationalFunction]):
        self.ctx = ctx
        self.terms = {m: c for m, c in terms.items() if c}

    # -- inspection ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def body(self) -> RationalFunction:
        c = self.terms.get(0)
        if c is None:
            return RationalFunction.from_rat(self.ctx.even_names, 0)
        return c

    def soul(self) -> "SuperFunction":
        return SuperFunction(self.ctx, {m: c for m, c in self.terms.items() if m})

    def parity(self):
        """0 for even, 1 for odd, None for mixed; zero counts as both."""
        if not self.terms:
            return EVEN
        parities = {m.bit_count() & 1 for m in self.terms}
        if len(parities) == 1:
            return parities.pop()
        return None

    def is_homogeneous(self) -> bool:
        return self.parity() is not None

    def __eq__(self, other):
        if not isinstance(other, SuperFunction):
            return NotImplemented
        return self.ctx == other.ctx and self.terms == other.terms

    def __hash__(self):
        return hash((self.ctx, frozenset(self.terms.items())))

    # -- ring operations -----------------------------------------------------

    def _check(self, other):
        if self.ctx != other.ctx:
            raise ContextMismatch(f"{self.ctx} vs {other.ctx}")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            out[m] = c if s is None else s + c
        return SuperFunction(self.ctx, out)

    def __sub__(self, other):
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            out[m] = -c if s is None else s - c
        return SuperFunction(self.ctx, out)

    def __neg__(self):
        return SuperFunction(self.ctx, {m: -c for m, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, RationalFunction):
            return SuperFunction(self.ctx, {m: c * other for m, c in self.terms.items()})
        self._check(other)
        out: dict[int, RationalFunction] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                if ma & mb:
                    continue
                m = ma | mb
                c = ca * cb
                if mono_sign(ma, mb) < 0:
                    c = -c
                s = out.get(m)
                out[m] = c if s is None else s + c
        return SuperFunction(self.ctx, out)

    def scale(self, q) -> "SuperFunction":
        return SuperFunction(self.ctx, {m: c.scale(q) for m, c in self.terms.items()})

    def inv(self) -> "SuperFunction":
        """Exact inverse: body**-1 * sum (-soul/body)**i, finite by nilpotency."""
        b = self.body()
        if not b:
            raise ZeroBody("cannot invert an element with zero body")
        binv = b.inv()
        minus_n = SuperFunction(
            self.ctx, {m: -(c * binv) for m, c in self.terms.items() if m}
        )
        result = self.ctx.one()
        power = self.ctx.one()
        for _ in range(self.ctx.odd_total):
            power = power * minus_n
            if power.is_zero():
                break
            result = result + power
        return result * binv

    # -- structure maps ------------------------------------------------------

    def nu(self) -> "SuperFunction":
        """Odd involution: toggle membership of the first odd generator."""
        if self.ctx.beta < 1:
            raise NoOddGenerators("nu needs at least one odd generator")
        return SuperFunction(self.ctx, {m ^ 1: c for m, c in self.terms.items()})

    def partial(self, name: str) -> "SuperFunction":
        ctx = self.ctx
        if name in ctx.even_names:
            return SuperFunction(ctx, {m: c.diff(name) for m, c in self.terms.items()})
        odd_all = ctx.odd_names + ctx.aux_names
        if name not in odd_all:
            raise UnknownVariable(name)
        bit = 1 << odd_all.index(name)
        out = {}
        for m, c in self.terms.items():
            if not (m & bit):
                continue
            pos = (m & (bit - 1)).bit_count()
            out[m ^ bit] = -c if pos & 1 else c
        return SuperFunction(ctx, out)

    def coefficient_of(self, name: str) -> "SuperFunction":
        """Coefficient b in the left-factored form  a + gen*b  (gen-free a, b)."""
        return self.partial(name)

    def ring_zero(self) -> "SuperFunction":
        return SuperFunction(self.ctx, {})

    def ring_one(self) -> "SuperFunction":
        return self.ctx.one()

    # -- evaluation ----------------------------------------------------------

    def eval_grassmann(self, assign: dict[str, "GrassmannNumber"], r: int) -> "GrassmannNumber":
        """Evaluate with Grassmann-number values for every generator."""
        ctx = self.ctx
        total = GrassmannNumber(r, {})
        odd_all = ctx.odd_names + ctx.aux_names
        for mask, c in self.terms.items():
            val = c.eval_grassmann(assign, r)
            mm = mask
            i = 0
            while mm:
                if mm & 1:
                    val = val * assign[odd_all[i]]
                mm >>= 1
                i += 1
            total = total + val
        return total

    # -- serialization / display ---------------------------------------------

    def to_dict(self) -> dict:
        out = {}
        odd_all = self.ctx.odd_names + self.ctx.aux_names
        for mask in sorted(self.terms):
            idx = [str(i + 1) for i in range(len(odd_all)) if mask >> i & 1]
            out[",".join(idx)] = self.terms[mask].to_dict()
        return out

    @classmethod
    def from_dict(cls, ctx: GeneratorContext, data: dict) -> "SuperFunction":
        terms = {}
        for key, cdata in data.items():
            mask = 0
            if key:
                for tok in key.split(","):
                    mask |= 1 << (int(tok) - 1)
            terms[mask] = RationalFunction.from_dict(cdata)
        return cls(ctx, terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        odd_all = self.ctx.odd_names + self.ctx.aux_names
        parts = []
        for mask in sorted(self.terms):
            c = repr(self.terms[mask])
            gens = "*".join(odd_all[i] for i in range(len(odd_all)) if mask >> i & 1)
            if not gens:
                parts.append(c)
            elif c == "1":
                parts.append(gens)
            else:
                parts.append(f"({c})*{gens}")
        return " + ".join(parts)


class GrassmannNumber:
    """Element of the finite Grassmann algebra Lambda_r over QQ."""

    __slots__ = ("r", "terms")

    def __init__(self, r: int, terms: dict[int, MPQ]):
        self.r = r
        self.terms = {m: c for m, c in terms.items() if c}

    @classmethod
    def scalar(cls, r: int, q) -> "GrassmannNumber":
        q = MPQ(q)
        return cls(r, {0: q} if q else {})

    @classmethod
    def theta(cls, r: int, i: int) -> "GrassmannNumber":
        """The i-th odd generator, 1-based."""
        if not 1 <= i <= r:
            raise UnknownVariable(f"theta_{i} outside Lambda_{r}")
        return cls(r, {1 << (i - 1): MPQ(1)})

    def is_zero(self) -> bool:
        return not self.terms

    def body(self) -> MPQ:
        return self.terms.get(0, MPQ(0))

    def soul(self) -> "GrassmannNumber":
        return GrassmannNumber(self.r, {m: c for m, c in self.terms.items() if m})

    def parity(self):
        if not self.terms:
            return EVEN
        parities = {m.bit_count() & 1 for m in self.terms}
        if len(parities) == 1:
            return parities.pop()
        return None

    def __eq__(self, other):
        if not isinstance(other, GrassmannNumber):
            return NotImplemented
        return self.r == other.r and self.terms == other.terms

    def __hash__(self):
        return hash((self.r, frozenset(self.terms.items())))

    def _check(self, other):
        if self.r != other.r:
            raise ContextMismatch(f"Lambda_{self.r} vs Lambda_{other.r}")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            v = c if s is None else s + c
            if v:
                out[m] = v
            elif s is not None:
                del out[m]
        g = GrassmannNumber.__new__(GrassmannNumber)
        g.r = self.r
        g.terms = out
        return g

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        g = GrassmannNumber.__new__(GrassmannNumber)
        g.r = self.r
        g.terms = {m: -c for m, c in self.terms.items()}
        return g

    def __mul__(self, other):
        if isinstance(other, (int, MPQ)):
            q = MPQ(other)
            g = GrassmannNumber.__new__(GrassmannNumber)
            g.r = self.r
            g.terms = {m: c * q for m, c in self.terms.items()} if q else {}
            return g
        self._check(other)
        out: dict[int, MPQ] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                if ma & mb:
                    continue
                m = ma | mb
                c = ca * cb if mono_sign(ma, mb) > 0 else -ca * cb
                s = out.get(m)
                if s is None:
                    out[m] = c
                else:
                    v = s + c
                    if v:
                        out[m] = v
                    else:
                        del out[m]
        g = GrassmannNumber.__new__(GrassmannNumber)
        g.r = self.r
        g.terms = out
        return g

    __rmul__ = __mul__

    def inv(self) -> "GrassmannNumber":
        b = self.body()
        if not b:
            raise ZeroBody("cannot invert a Grassmann number with zero body")
        binv = MPQ(1) / b
        minus_n = GrassmannNumber(self.r, {m: -c * binv for m, c in self.terms.items() if m})
        result = GrassmannNumber.scalar(self.r, 1)
        power = GrassmannNumber.scalar(self.r, 1)
        for _ in range(self.r):
            power = power * minus_n
            if power.is_zero():
                break
            result = result + power
        return result * binv

    def nu(self) -> "GrassmannNumber":
        """Odd involution on Lambda_r: toggle membership of theta_1."""
        if self.r < 1:
            raise NoOddGenerators("nu on Lambda_r needs r >= 1")
        g = GrassmannNumber.__new__(GrassmannNumber)
        g.r = self.r
        g.terms = {m ^ 1: c for m, c in self.terms.items()}
        return g

    def ring_zero(self) -> "GrassmannNumber":
        return GrassmannNumber(self.r, {})

    def ring_one(self) -> "GrassmannNumber":
        return GrassmannNumber.scalar(self.r, 1)

    def to_dict(self) -> dict:
        return {
            ",".join(str(i + 1) for i in range(self.r) if m >> i & 1): str(c)
            for m, c in sorted(self.terms.items())
        }

    @classmethod
    def from_dict(cls, r: int, data: dict) -> "GrassmannNumber":
        terms = {}
        for key, cstr in data.items():
            mask = 0
            if key:
                for tok in key.split(","):
                    mask |= 1 << (int(tok) - 1)
            terms[mask] = MPQ(cstr)
        return cls(r, terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for mask in sorted(self.terms):
            c = self.terms[mask]
            gens = "*".join(f"O{i+1}" for i in range(self.r) if mask >> i & 1)
            if not gens:
                parts.append(str(c))
            elif c == 1:
                parts.append(gens)
            else:
                parts.append(f"({c})*{gens}")
        return " + ".join(parts)


def lambda_sample(r: int, parity: int, seed, lo: int = -3, hi: int = 3) -> GrassmannNumber:
    """Deterministic small-integer sample from Lambda_r of the given parity.

    Even samples always carry a nonzero body so they can serve as invertible
    inputs.  Passing a random.Random instance instead of an integer seed draws
    from that stream (one worker per stream).
    """
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    masks = [mask for mask in range(1 << r) if mask.bit_count() & 1 == parity]
    terms: dict[int, MPQ] = {}
    while masks and not terms:
        for mask in masks:
            c = rng.randint(lo, hi)
            if mask == 0:
                while c == 0:
                    c = rng.randint(lo, hi)
            if c:
                terms[mask] = MPQ(c)
    return GrassmannNumber(r, terms)
