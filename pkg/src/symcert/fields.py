"""Exact arithmetic in multi-quadratic extensions of the rationals.

A :class:`FieldTower` is ``Q(sqrt(r_1), ..., sqrt(r_k))`` for nonzero
rational radicands ``r_i`` (negative radicands are allowed; ``sqrt(r)``
always denotes the principal root, so ``sqrt(r) = i*sqrt(|r|)`` for
``r < 0``).  An element is stored as an exact rational combination of the
``2**k`` square-free monomials ``prod_{i in m} sqrt(r_i)``, keyed by the
bitmask ``m`` of the participating generators.

The tower invariant is that the generators are multiplicatively
independent modulo rational squares; :meth:`FieldTower.adjoin` maintains
it, which makes the monomials linearly independent over Q and therefore
makes zero-testing (and hence equality) purely structural.  Signs of
nonzero real elements are decided by rational interval refinement.
"""

from __future__ import annotations

import re as _re
from typing import Iterator, Sequence, Union

import gmpy2
from gmpy2 import isqrt, mpq, mpz

__all__ = [
    "FieldElement",
    "FieldTower",
    "NotRealError",
    "ParseError",
    "PrecisionExhausted",
    "format_exact",
    "parse_exact",
    "sign_of",
]

Rational = Union[int, mpz, mpq]

_SIGN_BITS_START = 64
_SIGN_BITS_LIMIT = 4096


class PrecisionExhausted(ArithmeticError):
    """Interval refinement hit the precision cap without deciding a sign."""


class NotRealError(ArithmeticError):
    """A real-only operation (sign, comparison) was applied to a non-real element."""


class ParseError(ValueError):
    """An exact-value string did not match the accepted grammar."""


def _as_mpq(x: Rational) -> mpq:
    if isinstance(x, mpq):
        return x
    if isinstance(x, (int, mpz)):
        return mpq(x)
    raise TypeError(f"not a rational: {x!r}")


def _rational_sqrt(r: mpq) -> mpq | None:
    """Return sqrt(r) if ``r >= 0`` is a perfect rational square, else None."""
    if r < 0:
        return None
    p, q = r.numerator, r.denominator
    if not (gmpy2.is_square(p) and gmpy2.is_square(q)):
        return None
    return mpq(isqrt(p), isqrt(q))


class FieldTower:
    """An ordered tower ``Q(sqrt(r_1), ..., sqrt(r_k))``.

    Instances should be built through :meth:`rationals` and :meth:`adjoin`,
    which maintain multiplicative independence of the radicands.
    """

    __slots__ = ("_radicands", "_neg", "_odd_neg")

    def __init__(self, radicands: Sequence[Rational] = ()):
        rads = tuple(_as_mpq(r) for r in radicands)
        for r in rads:
            if r == 0:
                raise ValueError("radicand must be nonzero")
        self._radicands = rads
        self._neg = sum(1 << i for i, r in enumerate(rads) if r < 0)
        # masks with an odd number of negative radicands span the imaginary part
        self._odd_neg = tuple(
            bin(m & self._neg).count("1") & 1 for m in range(1 << len(rads))
        )

    @classmethod
    def rationals(cls) -> "FieldTower":
        return cls(())

    @property
    def radicands(self) -> tuple[mpq, ...]:
        return self._radicands

    @property
    def ngens(self) -> int:
        return len(self._radicands)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FieldTower) and self._radicands == other._radicands

    def __hash__(self) -> int:
        return hash(self._radicands)

    def __repr__(self) -> str:
        inner = ", ".join(f"sqrt({r})" for r in self._radicands)
        return f"Q({inner})" if inner else "Q"

    def extends(self, other: "FieldTower") -> bool:
        """True if ``other``'s radicands are a prefix of this tower's."""
        n = other.ngens
        return n <= self.ngens and self._radicands[:n] == other._radicands

    # -- element constructors -------------------------------------------

    def zero(self) -> "FieldElement":
        return FieldElement(self, {})

    def one(self) -> "FieldElement":
        return FieldElement(self, {0: mpq(1)})

    def from_rational(self, c: Rational) -> "FieldElement":
        c = _as_mpq(c)
        return FieldElement(self, {0: c} if c else {})

    def monomial(self, mask: int, coeff: Rational = 1) -> "FieldElement":
        if mask < 0 or mask >= (1 << self.ngens):
            raise ValueError("monomial mask out of range")
        c = _as_mpq(coeff)
        return FieldElement(self, {mask: c} if c else {})

    def gen(self, i: int) -> "FieldElement":
        """The generator ``sqrt(r_i)`` as an element."""
        return self.monomial(1 << i)

    # -- extension -------------------------------------------------------

    def express_sqrt(self, r: Rational) -> "FieldElement | None":
        """Return ``sqrt(r)`` as an element of this tower, or None.

        ``sqrt(r)`` lies in the tower iff ``r * prod_{i in m} r_i`` is a
        rational square for some generator mask ``m`` (Kummer theory for
        multi-quadratic extensions); the principal root is recovered by
        counting negative radicands.
        """
        r = _as_mpq(r)
        if r == 0:
            return self.zero()
        for m in range(1 << self.ngens):
            prod = r
            for i in range(self.ngens):
                if m >> i & 1:
                    prod *= self._radicands[i]
            s = _rational_sqrt(prod)
            if s is None:
                continue
            # sqrt(r) * mono(m) = (+-) s ; the product of principal roots
            # contributes i**neg with neg even, i.e. a sign (-1)**(neg//2).
            neg = bin(m & self._neg).count("1") + (1 if r < 0 else 0)
            sign = -1 if neg % 4 == 2 else 1
            denom = prod / r  # prod_{i in m} r_i
            return self.monomial(m, sign * s / denom)
        return None

    def adjoin(self, r: Rational) -> tuple["FieldTower", "FieldElement"]:
        """Adjoin ``sqrt(r)``, reusing the tower when it is already present.

        Returns ``(tower, elem)`` where ``tower`` is ``self`` (dependent
        case) or ``self`` extended by one generator, and ``elem`` is
        ``sqrt(r)`` in that tower.
        """
        r = _as_mpq(r)
        if r == 0:
            raise ValueError("cannot adjoin sqrt(0)")
        found = self.express_sqrt(r)
        if found is not None:
            return self, found
        bigger = FieldTower(self._radicands + (r,))
        return bigger, bigger.gen(self.ngens)


def _lift(x: "FieldElement", tower: FieldTower) -> "FieldElement":
    if x.tower == tower:
        return x
    if tower.extends(x.tower):
        return FieldElement(tower, dict(x._coords))
    raise ValueError(f"element of {x.tower} does not embed in {tower}")


def _common_tower(a: "FieldElement", b: "FieldElement") -> FieldTower:
    if a.tower.extends(b.tower):
        return a.tower
    if b.tower.extends(a.tower):
        return b.tower
    raise ValueError(f"incompatible towers {a.tower} and {b.tower}")


class FieldElement:
    """An exact element of a :class:`FieldTower`.

    Arithmetic is exact; ``==`` is mathematical equality (structural on
    the canonical monomial coordinates).  Order comparisons apply to real
    elements only and are decided exactly via :func:`sign_of`.
    """

    __slots__ = ("_tower", "_coords")

    def __init__(self, tower: FieldTower, coords: dict[int, mpq]):
        self._tower = tower
        self._coords = coords

    @property
    def tower(self) -> FieldTower:
        return self._tower

    @property
    def coords(self) -> dict[int, mpq]:
        """Monomial-mask -> rational coordinate map (nonzero entries only)."""
        return dict(self._coords)

    # -- predicates ------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self._coords

    @property
    def is_rational(self) -> bool:
        return all(m == 0 for m in self._coords)

    @property
    def is_real(self) -> bool:
        odd = self._tower._odd_neg
        return all(not odd[m] for m in self._coords)

    def as_rational(self) -> mpq:
        if not self._coords:
            return mpq(0)
        if self.is_rational:
            return self._coords[0]
        raise ValueError(f"{self!r} is not rational")

    # -- arithmetic ------------------------------------------------------

    def _coerce(self, other) -> "FieldElement | None":
        if isinstance(other, FieldElement):
            return other
        if isinstance(other, (int, mpz, mpq)):
            return self._tower.from_rational(other)
        return None

    def __add__(self, other) -> "FieldElement":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        tower = _common_tower(self, o)
        a, b = _lift(self, tower), _lift(o, tower)
        coords = dict(a._coords)
        for m, c in b._coords.items():
            s = coords.get(m, mpq(0)) + c
            if s:
                coords[m] = s
            else:
                coords.pop(m, None)
        return FieldElement(tower, coords)

    __radd__ = __add__

    def __neg__(self) -> "FieldElement":
        return FieldElement(self._tower, {m: -c for m, c in self._coords.items()})

    def __sub__(self, other) -> "FieldElement":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other) -> "FieldElement":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other) -> "FieldElement":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        tower = _common_tower(self, o)
        a, b = _lift(self, tower), _lift(o, tower)
        rads = tower._radicands
        coords: dict[int, mpq] = {}
        for ma, ca in a._coords.items():
            for mb, cb in b._coords.items():
                c = ca * cb
                common = ma & mb
                i = 0
                m = common
                while m:
                    if m & 1:
                        c *= rads[i]
                    m >>= 1
                    i += 1
                key = ma ^ mb
                s = coords.get(key, mpq(0)) + c
                if s:
                    coords[key] = s
                else:
                    coords.pop(key, None)
        return FieldElement(tower, coords)

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        if not self._coords:
            raise ZeroDivisionError("field element is zero")
        return self._inverse_level(self._tower.ngens)

    def _inverse_level(self, level: int) -> "FieldElement":
        """Invert, treating self as living in the first ``level`` generators."""
        if level == 0:
            return self._tower.from_rational(1 / self._coords[0])
        bit = 1 << (level - 1)
        if not any(m & bit for m in self._coords):
            return self._inverse_level(level - 1)
        # x = a + b*sqrt(r); 1/x = (a - b*sqrt(r)) / (a^2 - b^2 r)
        conj = FieldElement(
            self._tower,
            {m: (-c if m & bit else c) for m, c in self._coords.items()},
        )
        norm = self * conj
        assert not any(m & bit for m in norm._coords)
        return conj * norm._inverse_level(level - 1)

    def __truediv__(self, other) -> "FieldElement":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other) -> "FieldElement":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int) -> "FieldElement":
        if not isinstance(n, (int, mpz)):
            return NotImplemented
        n = int(n)
        if n < 0:
            return self.inverse() ** (-n)
        result = self._tower.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- conjugations ----------------------------------------------------

    def conjugate_gen(self, i: int) -> "FieldElement":
        """Galois conjugation sending ``sqrt(r_i) -> -sqrt(r_i)``."""
        bit = 1 << i
        return FieldElement(
            self._tower,
            {m: (-c if m & bit else c) for m, c in self._coords.items()},
        )

    def conjugate_complex(self) -> "FieldElement":
        """Complex conjugation (negates every purely imaginary monomial)."""
        odd = self._tower._odd_neg
        return FieldElement(
            self._tower,
            {m: (-c if odd[m] else c) for m, c in self._coords.items()},
        )

    def real_part(self) -> "FieldElement":
        return (self + self.conjugate_complex()) / 2

    def imag_part(self) -> "FieldElement":
        """The imaginary part, when expressible in this tower.

        Requires the anti-invariant part to be ``i`` times a tower element,
        which holds whenever ``-1`` itself is one of the radicands (the only
        negative radicand used by the shipped group data).
        """
        anti = (self - self.conjugate_complex()) / 2
        if anti.is_zero:
            return self._tower.zero()
        rads = self._tower.radicands
        for i, r in enumerate(rads):
            if r == -1:
                return anti * self._tower.monomial(1 << i, -1)  # anti / i
        raise NotRealError("imaginary part not expressible without sqrt(-1)")

    # -- equality and order ----------------------------------------------

    def __eq__(self, other) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        try:
            tower = _common_tower(self, o)
        except ValueError:
            return False
        return _lift(self, tower)._coords == _lift(o, tower)._coords

    def __hash__(self) -> int:
        if self.is_rational:
            return hash(self.as_rational())
        return hash((self._tower, tuple(sorted(self._coords.items()))))

    def _cmp_sign(self, other) -> int:
        o = self._coerce(other)
        if o is None:
            raise TypeError(f"cannot compare with {other!r}")
        return sign_of(self - o)

    def __lt__(self, other) -> bool:
        return self._cmp_sign(other) < 0

    def __le__(self, other) -> bool:
        return self._cmp_sign(other) <= 0

    def __gt__(self, other) -> bool:
        return self._cmp_sign(other) > 0

    def __ge__(self, other) -> bool:
        return self._cmp_sign(other) >= 0

    # -- numeric enclosure -------------------------------------------------

    def interval(self, bits: int = 128) -> tuple[mpq, mpq]:
        """A rational enclosure ``[lo, hi]`` of a real element.

        Each monomial magnitude ``sqrt(R)`` is enclosed by integer square
        roots at ``bits`` fractional bits; the enclosures are combined with
        outward rounding.
        """
        if not self.is_real:
            raise NotRealError("interval of a non-real element")
        neg = self._tower._neg
        rads = self._tower._radicands
        lo = mpq(0)
        hi = mpq(0)
        scale = mpz(1) << bits
        for m, c in self._coords.items():
            prod = mpq(1)
            i = 0
            mm = m
            while mm:
                if mm & 1:
                    prod *= abs(rads[i])
                mm >>= 1
                i += 1
            if prod == 1:
                mlo = mhi = mpq(1)
            else:
                p, q = prod.numerator, prod.denominator
                f = isqrt(p * q * scale * scale)
                mlo = mpq(f, q * scale)
                mhi = mpq(f + 1, q * scale)
            nneg = bin(m & neg).count("1")
            v = c if nneg % 4 == 0 else -c
            if v >= 0:
                lo += v * mlo
                hi += v * mhi
            else:
                lo += v * mhi
                hi += v * mlo
        return lo, hi

    def __float__(self) -> float:
        lo, hi = self.interval(128)
        return float((lo + hi) / 2)

    def __repr__(self) -> str:
        return f"FieldElement({format_exact(self)})"

    def __str__(self) -> str:
        return format_exact(self)


def sign_of(x: FieldElement) -> int:
    """Exact sign (-1, 0, +1) of a real field element.

    Zero is decided structurally (the canonical coordinates are empty iff
    the element is zero, by independence of the tower generators).  For
    nonzero elements the sign is decided by interval refinement starting
    at 64 fractional bits and doubling up to 4096; the cap is unreachable
    for genuinely nonzero input and exceeding it raises
    :class:`PrecisionExhausted`.
    """
    if not isinstance(x, FieldElement):
        raise TypeError("sign_of expects a FieldElement")
    if x.is_zero:
        return 0
    if not x.is_real:
        raise NotRealError("sign of a non-real element")
    bits = _SIGN_BITS_START
    while bits <= _SIGN_BITS_LIMIT:
        lo, hi = x.interval(bits)
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        bits *= 2
    raise PrecisionExhausted(
        f"sign undecided at {_SIGN_BITS_LIMIT} bits: {format_exact(x)}"
    )


# ---------------------------------------------------------------------------
# exact-value strings
# ---------------------------------------------------------------------------

_TOKEN = _re.compile(
    r"\s*(?:(?P<rat>-?\d+(?:/\d+)?)|(?P<sqrt>sqrt\(\s*(?P<rad>-?\d+(?:/\d+)?)\s*\))"
    r"|(?P<i>i)|(?P<op>[+*-]))"
)


def format_exact(x: FieldElement) -> str:
    """Canonical exact string for an element.

    Each monomial is printed as ``c``, ``c*i``, ``c*sqrt(n)`` or
    ``c*i*sqrt(n)`` with ``c`` rational and ``n > 1`` a square-free
    positive integer; terms are joined with `` + `` / `` - `` in
    increasing monomial-mask order.  ``parse_exact`` accepts everything
    this emits.
    """
    if x.is_zero:
        return "0"
    rads = x.tower.radicands
    neg = x.tower._neg
    parts: list[str] = []
    for m in sorted(x._coords):
        c = x._coords[m]
        prod = mpq(1)
        i = 0
        mm = m
        while mm:
            if mm & 1:
                prod *= rads[i]
            mm >>= 1
            i += 1
        nneg = bin(m & neg).count("1")
        has_i = nneg % 2 == 1
        mag = abs(prod)
        p, q = mag.numerator, mag.denominator
        # sqrt(p/q) = sqrt(p*q)/q ; split p*q = s^2 * n with n squarefree
        n = p * q
        s = mpz(1)
        d = mpz(2)
        while d * d <= n:
            while n % (d * d) == 0:
                n //= d * d
                s *= d
            d += 1
        coeff = c * mpq(s, q)
        if nneg % 4 in (2, 3):  # i**nneg = -1 or -i
            coeff = -coeff
        factors: list[str] = []
        if has_i:
            factors.append("i")
        if n > 1:
            factors.append(f"sqrt({n})")
        acoeff = abs(coeff)
        if factors and acoeff == 1:
            body = "*".join(factors)
        elif factors:
            body = f"{acoeff}*" + "*".join(factors)
        else:
            body = str(acoeff)
        if not parts:
            parts.append(body if coeff > 0 else f"-{body}")
        else:
            parts.append(f" + {body}" if coeff > 0 else f" - {body}")
    return "".join(parts)


def parse_exact(s: str, tower: FieldTower) -> tuple[FieldTower, FieldElement]:
    """Parse an exact-value string, extending ``tower`` as needed.

    Grammar: sum of terms; a term is a ``*``-separated product of factors,
    each a rational (``-3``, ``5/8``), ``i``, or ``sqrt(n)`` with ``n`` a
    nonzero rational.  Returns ``(tower, element)`` with ``tower`` possibly
    extended by new radicands.
    """
    pos = 0
    n = len(s)
    tokens: list[tuple[str, str]] = []
    while pos < n:
        m = _TOKEN.match(s, pos)
        if m is None:
            if s[pos:].strip() == "":
                break
            raise ParseError(f"bad token at {s[pos:]!r}")
        if m.lastgroup is None or m.group(0).strip() == "":
            break
        if m.group("rat") is not None:
            tokens.append(("rat", m.group("rat")))
        elif m.group("sqrt") is not None:
            tokens.append(("sqrt", m.group("rad")))
        elif m.group("i") is not None:
            tokens.append(("i", "i"))
        else:
            tokens.append(("op", m.group("op")))
        pos = m.end()

    if not tokens:
        raise ParseError(f"empty expression: {s!r}")

    total = tower.zero()
    idx = 0
    nt = len(tokens)
    first = True
    while idx < nt:
        sign = 1
        saw_op = False
        while idx < nt and tokens[idx][0] == "op":
            op = tokens[idx][1]
            if op == "*":
                raise ParseError(f"unexpected '*' in {s!r}")
            if op == "-":
                sign = -sign
            saw_op = True
            idx += 1
        if idx >= nt:
            raise ParseError(f"dangling operator in {s!r}")
        if not first and not saw_op:
            # allow "2-3" where the tokenizer folded the minus into the number
            kind, val = tokens[idx]
            if not (kind == "rat" and val.startswith("-")):
                raise ParseError(f"missing operator before {val!r} in {s!r}")
        term = tower.from_rational(sign)
        expecting_factor = True
        while idx < nt:
            kind, val = tokens[idx]
            if kind == "op":
                if val == "*":
                    idx += 1
                    expecting_factor = True
                    continue
                break  # +/- starts the next term
            if not expecting_factor:
                break  # adjacent factor without '*': next term (checked above)
            if kind == "rat":
                factor = tower.from_rational(mpq(val))
            elif kind == "i":
                tower, factor = tower.adjoin(-1)
            else:
                tower, factor = tower.adjoin(mpq(val))
            term = _lift(term, tower) * factor
            total = _lift(total, tower)
            expecting_factor = False
            idx += 1
        if expecting_factor:
            raise ParseError(f"dangling operator in {s!r}")
        total = total + term
        first = False
    return tower, total
