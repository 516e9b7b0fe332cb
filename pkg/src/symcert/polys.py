"""Polynomials over multi-quadratic fields: Sturm chains and Möbius restrictions.

Two polynomial types live here.  :class:`UniPoly` is dense univariate with
:class:`~symcert.fields.FieldElement` coefficients and carries the Sturm
machinery (`sturm_sequence`, `count_roots`, `isolate_root`) used for exact
root counting on intervals with algebraic endpoints.  :class:`MultiPoly` is
sparse multivariate and carries the Möbius-substitution machinery
(`mobius_restrict`, `mobius_coefficient`, `strict_sign_on_box`) used to
certify strict signs of polynomials on closed boxes: substituting
``x = (a*u + b)/(u + 1)`` maps ``u in [0, inf]`` onto ``[a, b]`` (with
``u = 0`` at ``x = b`` and ``u -> inf`` at ``x = a``), and after clearing
``(u+1)**deg`` a coefficient list that is strictly of one sign certifies
that sign on the whole closed interval.
"""

from __future__ import annotations

from math import comb
from typing import Iterable, Sequence, Union

import gmpy2
from gmpy2 import mpq, mpz

from .fields import FieldElement, FieldTower, format_exact, sign_of

__all__ = [
    "Box",
    "EndpointIsRoot",
    "IntervalQ",
    "MultiPoly",
    "NoUniqueRoot",
    "UniPoly",
    "count_roots",
    "isolate_root",
    "mobius_coefficient",
    "mobius_restrict",
    "restrict_box",
    "sign_variations",
    "strict_sign_on_box",
    "strip_endpoint_roots",
    "sturm_sequence",
]

Scalar = Union[int, mpz, mpq, FieldElement]


class EndpointIsRoot(ValueError):
    """Raised when an interval endpoint is a root of the queried polynomial."""


class NoUniqueRoot(ValueError):
    """Raised by isolate_root when the interval does not contain exactly one root."""


def _as_elem(tower: FieldTower, x: Scalar) -> FieldElement:
    if isinstance(x, FieldElement):
        return x
    return tower.from_rational(x)


# ---------------------------------------------------------------------------
# dense univariate polynomials
# ---------------------------------------------------------------------------


class UniPoly:
    """Dense univariate polynomial; ``coeffs[k]`` multiplies ``x**k``."""

    __slots__ = ("_tower", "_coeffs")

    def __init__(self, tower: FieldTower, coeffs: Iterable[Scalar] = ()):
        cs = [_as_elem(tower, c) for c in coeffs]
        while cs and cs[-1].is_zero:
            cs.pop()
        self._tower = tower
        self._coeffs = cs

    @classmethod
    def var(cls, tower: FieldTower) -> "UniPoly":
        return cls(tower, [0, 1])

    @property
    def tower(self) -> FieldTower:
        return self._tower

    @property
    def coeffs(self) -> list[FieldElement]:
        return list(self._coeffs)

    @property
    def degree(self) -> int:
        """Degree; the zero polynomial has degree -1."""
        return len(self._coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self._coeffs

    def leading(self) -> FieldElement:
        if self.is_zero:
            raise ValueError("zero polynomial has no leading coefficient")
        return self._coeffs[-1]

    def coeff(self, k: int) -> FieldElement:
        if 0 <= k < len(self._coeffs):
            return self._coeffs[k]
        return self._tower.zero()

    def __eq__(self, other) -> bool:
        if isinstance(other, UniPoly):
            if len(self._coeffs) != len(other._coeffs):
                return False
            return all(a == b for a, b in zip(self._coeffs, other._coeffs))
        return NotImplemented

    def __hash__(self):
        return hash(tuple(format_exact(c) for c in self._coeffs))

    def __add__(self, other) -> "UniPoly":
        if not isinstance(other, UniPoly):
            try:
                other = UniPoly(self._tower, [other])
            except TypeError:
                return NotImplemented
        n = max(len(self._coeffs), len(other._coeffs))
        return UniPoly(
            self._tower,
            [self.coeff(k) + other.coeff(k) for k in range(n)],
        )

    __radd__ = __add__

    def __neg__(self) -> "UniPoly":
        return UniPoly(self._tower, [-c for c in self._coeffs])

    def __sub__(self, other) -> "UniPoly":
        if not isinstance(other, UniPoly):
            try:
                other = UniPoly(self._tower, [other])
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "UniPoly":
        return UniPoly(self._tower, [other]) - self

    def __mul__(self, other) -> "UniPoly":
        if not isinstance(other, UniPoly):
            try:
                c = _as_elem(self._tower, other)
            except TypeError:
                return NotImplemented
            return UniPoly(self._tower, [a * c for a in self._coeffs])
        if self.is_zero or other.is_zero:
            return UniPoly(self._tower, [])
        out = [self._tower.zero()] * (len(self._coeffs) + len(other._coeffs) - 1)
        for i, a in enumerate(self._coeffs):
            if a.is_zero:
                continue
            for j, b in enumerate(other._coeffs):
                if not b.is_zero:
                    out[i + j] = out[i + j] + a * b
        return UniPoly(self._tower, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "UniPoly":
        result = UniPoly(self._tower, [1])
        base = self
        n = int(n)
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def divmod(self, other: "UniPoly") -> tuple["UniPoly", "UniPoly"]:
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        q: list[FieldElement] = []
        rem = list(self._coeffs)
        d = other.degree
        lead_inv = other.leading().inverse()
        for k in range(len(rem) - 1 - d, -1, -1):
            c = rem[k + d] * lead_inv
            q.append(c)
            if not c.is_zero:
                for j in range(d + 1):
                    rem[k + j] = rem[k + j] - c * other._coeffs[j]
        q.reverse()
        return UniPoly(self._tower, q), UniPoly(self._tower, rem[:d])

    def rem(self, other: "UniPoly") -> "UniPoly":
        return self.divmod(other)[1]

    def derivative(self) -> "UniPoly":
        return UniPoly(
            self._tower, [k * c for k, c in enumerate(self._coeffs)][1:]
        )

    def evaluate(self, x: Scalar) -> FieldElement:
        x = _as_elem(self._tower, x) if not isinstance(x, FieldElement) else x
        acc = x.tower.zero() if x.tower.extends(self._tower) else self._tower.zero()
        for c in reversed(self._coeffs):
            acc = acc * x + c
        return acc

    def scale_content(self) -> "UniPoly":
        """Divide by the positive rational content (gcd of all coordinates).

        Scaling a Sturm remainder by a positive rational does not change
        any sign-variation count, and it keeps coefficient bit-size under
        control along the chain.
        """
        if self.is_zero:
            return self
        num = mpz(0)
        den = mpz(1)
        for c in self._coeffs:
            for v in c.coords.values():
                num = gmpy2.gcd(num, v.numerator)
                den = gmpy2.lcm(den, v.denominator)
        scale = mpq(den, num)  # positive
        return UniPoly(self._tower, [c * scale for c in self._coeffs])

    def map_coeffs(self, fn) -> "UniPoly":
        return UniPoly(self._tower, [fn(c) for c in self._coeffs])

    def lift(self, tower: FieldTower) -> "UniPoly":
        return UniPoly(tower, self._coeffs)

    def __repr__(self) -> str:
        if self.is_zero:
            return "UniPoly(0)"
        parts = []
        for k in range(self.degree, -1, -1):
            c = self.coeff(k)
            if c.is_zero:
                continue
            cs = format_exact(c)
            if " " in cs:
                cs = f"({cs})"
            parts.append(cs if k == 0 else (f"({cs})*x^{k}" if k > 1 else f"({cs})*x"))
        return "UniPoly(" + " + ".join(parts) + ")"


# ---------------------------------------------------------------------------
# Sturm machinery
# ---------------------------------------------------------------------------


def sturm_sequence(p: UniPoly) -> list[UniPoly]:
    """The Sturm chain ``p, p', -rem(...)`` with content-scaled remainders.

    The chain is continued until a zero remainder, so for non-squarefree
    input it ends at (a scalar multiple of) ``gcd(p, p')`` and the
    variation count still counts *distinct* roots.
    """
    if p.is_zero:
        raise ValueError("Sturm sequence of the zero polynomial")
    seq = [p, p.derivative()]
    while not seq[-1].is_zero and seq[-1].degree > 0:
        r = -seq[-2].rem(seq[-1])
        if r.is_zero:
            break
        seq.append(r.scale_content())
    return seq


def sign_variations(seq: Sequence[UniPoly], x: Scalar) -> int:
    """Sign variations of the chain at ``x`` (zeros skipped)."""
    signs = []
    for q in seq:
        s = sign_of(q.evaluate(x))
        if s != 0:
            signs.append(s)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots(p: UniPoly, a: Scalar, b: Scalar) -> int:
    """Number of distinct real roots of ``p`` in the *open* interval (a, b).

    Endpoints may be rational or algebraic (FieldElement).  Raises
    :class:`EndpointIsRoot` if either endpoint is a root, since the Sturm
    count is only valid for non-root endpoints.
    """
    tower = p.tower
    ea = _as_elem(tower, a)
    eb = _as_elem(tower, b)
    if sign_of(eb - ea) <= 0:
        raise ValueError("count_roots needs a < b")
    if p.evaluate(ea).is_zero:
        raise EndpointIsRoot(f"left endpoint {format_exact(ea)} is a root")
    if p.evaluate(eb).is_zero:
        raise EndpointIsRoot(f"right endpoint {format_exact(eb)} is a root")
    seq = sturm_sequence(p)
    return sign_variations(seq, ea) - sign_variations(seq, eb)


def strip_endpoint_roots(
    p: UniPoly, a: Scalar, b: Scalar
) -> tuple[UniPoly, int, int]:
    """Divide out any roots sitting exactly at the interval endpoints.

    Returns ``(q, ma, mb)`` with ``p = (x - a)**ma * (x - b)**mb * q`` and
    ``q`` nonzero at both endpoints.  The quotient has the same roots as
    ``p`` strictly inside ``(a, b)``, so Sturm counting can proceed on it
    when an endpoint itself happens to be a root.
    """
    if p.is_zero:
        raise ValueError("cannot strip roots from the zero polynomial")
    ea = _as_elem(p.tower, a)
    eb = _as_elem(p.tower, b)
    tower = ea.tower if ea.tower.extends(p.tower) else p.tower
    if eb.tower.extends(tower):
        tower = eb.tower
    q = p.lift(tower)
    ma = mb = 0
    while not q.degree < 1 and q.evaluate(ea).is_zero:
        q = q.divmod(UniPoly(tower, [-ea, 1]))[0]
        ma += 1
    while not q.degree < 1 and q.evaluate(eb).is_zero:
        q = q.divmod(UniPoly(tower, [-eb, 1]))[0]
        mb += 1
    return q, ma, mb


class IntervalQ:
    """A closed rational interval ``[lo, hi]``."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        lo, hi = mpq(lo), mpq(hi)
        if lo > hi:
            raise ValueError("interval endpoints out of order")
        self.lo = lo
        self.hi = hi

    @property
    def width(self) -> mpq:
        return self.hi - self.lo

    @property
    def mid(self) -> mpq:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        x = mpq(x)
        return self.lo <= x <= self.hi

    def split(self) -> tuple["IntervalQ", "IntervalQ"]:
        m = self.mid
        return IntervalQ(self.lo, m), IntervalQ(m, self.hi)

    def __eq__(self, other):
        return (
            isinstance(other, IntervalQ)
            and self.lo == other.lo
            and self.hi == other.hi
        )

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __repr__(self):
        return f"IntervalQ({self.lo}, {self.hi})"


def isolate_root(p: UniPoly, a, b, max_width=mpq(1, 2**32)) -> IntervalQ:
    """Shrink ``[a, b]`` around the unique root of ``p`` inside it.

    Requires rational endpoints and exactly one distinct root in (a, b)
    (validated); bisects at rational midpoints, counting roots per half
    with the precomputed Sturm chain, until the width is at most
    ``max_width`` or the root is hit exactly.
    """
    a, b = mpq(a), mpq(b)
    seq = sturm_sequence(p)
    if p.evaluate(a).is_zero or p.evaluate(b).is_zero:
        raise EndpointIsRoot("isolate_root endpoints must not be roots")
    va = sign_variations(seq, a)
    vb = sign_variations(seq, b)
    if va - vb != 1:
        raise NoUniqueRoot(f"expected exactly one root in ({a}, {b}), got {va - vb}")
    while b - a > max_width:
        m = (a + b) / 2
        if p.evaluate(m).is_zero:
            return IntervalQ(m, m)
        vm = sign_variations(seq, m)
        if va - vm == 1:
            b, vb = m, vm
        else:
            a, va = m, vm
    return IntervalQ(a, b)


# ---------------------------------------------------------------------------
# sparse multivariate polynomials
# ---------------------------------------------------------------------------


def _grlex_key(exps: tuple[int, ...]):
    return (sum(exps), exps)


class MultiPoly:
    """Sparse multivariate polynomial: exponent tuple -> coefficient."""

    __slots__ = ("_tower", "_vars", "_terms")

    def __init__(
        self,
        tower: FieldTower,
        nvars_or_names,
        terms: dict | None = None,
    ):
        if isinstance(nvars_or_names, int):
            names = tuple(f"x{i}" for i in range(nvars_or_names))
        else:
            names = tuple(nvars_or_names)
        self._tower = tower
        self._vars = names
        clean: dict[tuple[int, ...], FieldElement] = {}
        for e, c in (terms or {}).items():
            e = tuple(int(k) for k in e)
            if len(e) != len(names):
                raise ValueError("exponent tuple arity mismatch")
            ce = _as_elem(tower, c)
            if not ce.is_zero:
                clean[e] = ce
        self._terms = clean

    @classmethod
    def variable(cls, tower: FieldTower, names, index: int) -> "MultiPoly":
        names = tuple(names)
        e = tuple(1 if i == index else 0 for i in range(len(names)))
        return cls(tower, names, {e: 1})

    @classmethod
    def constant(cls, tower: FieldTower, names, c) -> "MultiPoly":
        names = tuple(names)
        return cls(tower, names, {(0,) * len(names): c})

    @property
    def tower(self) -> FieldTower:
        return self._tower

    @property
    def var_names(self) -> tuple[str, ...]:
        return self._vars

    @property
    def nvars(self) -> int:
        return len(self._vars)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def terms(self) -> dict[tuple[int, ...], FieldElement]:
        return dict(self._terms)

    def sorted_terms(self) -> list[tuple[tuple[int, ...], FieldElement]]:
        """Terms in decreasing graded-lexicographic order (canonical)."""
        return sorted(self._terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)

    def degree(self, var: int) -> int:
        """Degree in one variable; -1 for the zero polynomial."""
        if not self._terms:
            return -1
        return max(e[var] for e in self._terms)

    def total_degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def coeff(self, exps: tuple[int, ...]) -> FieldElement:
        return self._terms.get(tuple(exps), self._tower.zero())

    def _compatible(self, other: "MultiPoly"):
        if self._vars != other._vars:
            raise ValueError("variable sets differ")

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiPoly):
            return NotImplemented
        if self._vars != other._vars:
            return False
        if set(self._terms) != set(other._terms):
            return False
        return all(c == other._terms[e] for e, c in self._terms.items())

    def __add__(self, other) -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(self._tower, self._vars, other)
        self._compatible(other)
        terms = dict(self._terms)
        for e, c in other._terms.items():
            s = terms.get(e)
            s = c if s is None else s + c
            if s.is_zero:
                terms.pop(e, None)
            else:
                terms[e] = s
        return MultiPoly(self._tower, self._vars, terms)

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(
            self._tower, self._vars, {e: -c for e, c in self._terms.items()}
        )

    def __sub__(self, other) -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(self._tower, self._vars, other)
        return self + (-other)

    def __rsub__(self, other) -> "MultiPoly":
        return MultiPoly.constant(self._tower, self._vars, other) - self

    def __mul__(self, other) -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            c = _as_elem(self._tower, other)
            return MultiPoly(
                self._tower, self._vars, {e: a * c for e, a in self._terms.items()}
            )
        self._compatible(other)
        out: dict[tuple[int, ...], FieldElement] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                c = c1 * c2
                s = out.get(e)
                s = c if s is None else s + c
                if s.is_zero:
                    out.pop(e, None)
                else:
                    out[e] = s
        return MultiPoly(self._tower, self._vars, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "MultiPoly":
        result = MultiPoly.constant(self._tower, self._vars, 1)
        base = self
        n = int(n)
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def derivative(self, var: int) -> "MultiPoly":
        out: dict[tuple[int, ...], FieldElement] = {}
        for e, c in self._terms.items():
            if e[var] == 0:
                continue
            e2 = list(e)
            e2[var] -= 1
            out[tuple(e2)] = c * e[var]
        return MultiPoly(self._tower, self._vars, out)

    def eval_partial(self, var: int, value: Scalar) -> "MultiPoly":
        """Substitute one variable (remaining polynomial keeps all variable slots)."""
        v = _as_elem(self._tower, value)
        powers = [self._tower.one()]
        d = self.degree(var)
        for _ in range(max(d, 0)):
            powers.append(powers[-1] * v)
        out: dict[tuple[int, ...], FieldElement] = {}
        for e, c in self._terms.items():
            e2 = list(e)
            k = e2[var]
            e2[var] = 0
            e2 = tuple(e2)
            add = c * powers[k]
            s = out.get(e2)
            s = add if s is None else s + add
            if s.is_zero:
                out.pop(e2, None)
            else:
                out[e2] = s
        return MultiPoly(self._tower, self._vars, out)

    def evaluate(self, values: Sequence[Scalar]) -> FieldElement:
        if len(values) != self.nvars:
            raise ValueError("wrong number of values")
        p = self
        for i, v in enumerate(values):
            p = p.eval_partial(i, v)
        return p._terms.get((0,) * self.nvars, self._tower.zero())

    def as_unipoly(self, var: int = 0) -> UniPoly:
        """View as univariate in ``var``; all other variables must be absent."""
        coeffs: list[FieldElement] = []
        for e, c in self._terms.items():
            if any(e[j] for j in range(self.nvars) if j != var):
                raise ValueError("polynomial is not univariate in the chosen variable")
            k = e[var]
            while len(coeffs) <= k:
                coeffs.append(self._tower.zero())
            coeffs[k] = c
        return UniPoly(self._tower, coeffs)

    def lift(self, tower: FieldTower) -> "MultiPoly":
        return MultiPoly(tower, self._vars, self._terms)

    def __repr__(self) -> str:
        if self.is_zero:
            return "MultiPoly(0)"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                f"{n}^{k}" if k > 1 else n for n, k in zip(self._vars, e) if k
            )
            cs = format_exact(c)
            if " " in cs:
                cs = f"({cs})"
            parts.append(f"({cs})*{mono}" if mono else f"({cs})")
        return "MultiPoly(" + " + ".join(parts) + ")"


# ---------------------------------------------------------------------------
# Möbius restriction
# ---------------------------------------------------------------------------


class Box:
    """A closed product of intervals with exact algebraic endpoints."""

    __slots__ = ("_bounds",)

    def __init__(self, bounds: Sequence[tuple[FieldElement, FieldElement]]):
        self._bounds = tuple((lo, hi) for lo, hi in bounds)
        for lo, hi in self._bounds:
            if sign_of(hi - lo) < 0:
                raise ValueError("box endpoints out of order")

    @property
    def bounds(self) -> tuple[tuple[FieldElement, FieldElement], ...]:
        return self._bounds

    @property
    def nvars(self) -> int:
        return len(self._bounds)

    def __repr__(self) -> str:
        ivs = ", ".join(
            f"[{format_exact(lo)}, {format_exact(hi)}]" for lo, hi in self._bounds
        )
        return f"Box({ivs})"


def mobius_restrict(p: MultiPoly, var: int, a: Scalar, b: Scalar) -> MultiPoly:
    """Substitute ``x_var = (a*u + b)/(u + 1)`` and clear ``(u+1)**deg``.

    The variable slot ``var`` of the result holds the power of ``u``; the
    coefficient list in ``u`` is the degree-``deg`` Möbius restriction of
    ``p`` to ``[a, b]`` along that variable.
    """
    tower = p.tower
    a = _as_elem(tower, a)
    b = _as_elem(tower, b)
    d = p.degree(var)
    if d <= -1:
        return p
    # precompute (a*u+b)^i and (u+1)^j as dense u-coefficient lists
    au_b: list[list[FieldElement]] = [[tower.one()]]
    for _ in range(d):
        prev = au_b[-1]
        nxt = [tower.zero()] * (len(prev) + 1)
        for k, c in enumerate(prev):
            nxt[k] = nxt[k] + c * b
            nxt[k + 1] = nxt[k + 1] + c * a
        au_b.append(nxt)
    u1: list[list[FieldElement]] = [[tower.one()]]
    for _ in range(d):
        prev = u1[-1]
        nxt = [tower.zero()] * (len(prev) + 1)
        for k, c in enumerate(prev):
            nxt[k] = nxt[k] + c
            nxt[k + 1] = nxt[k + 1] + c
        u1.append(nxt)
    out: dict[tuple[int, ...], FieldElement] = {}
    for e, c in p.terms.items():
        i = e[var]
        # (a*u+b)^i * (u+1)^(d-i), convolved
        pa, pb = au_b[i], u1[d - i]
        for k1, c1 in enumerate(pa):
            if c1.is_zero:
                continue
            for k2, c2 in enumerate(pb):
                if c2.is_zero:
                    continue
                e2 = list(e)
                e2[var] = k1 + k2
                key = tuple(e2)
                add = c * c1 * c2
                s = out.get(key)
                s = add if s is None else s + add
                if s.is_zero:
                    out.pop(key, None)
                else:
                    out[key] = s
    return MultiPoly(tower, p.var_names, out)


def mobius_coefficient(p: UniPoly, k: int, a: Scalar, b: Scalar) -> FieldElement:
    """Single coefficient of ``u**k`` in the Möbius restriction of ``p`` to [a, b].

    Uses the closed form ``sum_i c_i * W(i, k)`` with
    ``W(i, k) = sum_p C(i, p) C(d - i, k - p) a**p b**(i - p)``, streaming
    over the input coefficients without building the full restriction.
    """
    tower = p.tower
    a = _as_elem(tower, a)
    b = _as_elem(tower, b)
    d = p.degree
    if d < 0:
        return tower.zero()
    if not 0 <= k <= d:
        return tower.zero()
    apow = [tower.one()]
    bpow = [tower.one()]
    for _ in range(d):
        apow.append(apow[-1] * a)
        bpow.append(bpow[-1] * b)
    total = tower.zero()
    for i, c in enumerate(p.coeffs):
        if c.is_zero:
            continue
        w = tower.zero()
        for q in range(max(0, k - (d - i)), min(i, k) + 1):
            w = w + comb(i, q) * comb(d - i, k - q) * apow[q] * bpow[i - q]
        total = total + c * w
    return total


def restrict_box(p: MultiPoly, box: Box) -> MultiPoly:
    """Möbius-restrict every variable of ``p`` to the corresponding box interval."""
    if box.nvars != p.nvars:
        raise ValueError("box arity mismatch")
    q = p
    for var, (lo, hi) in enumerate(box.bounds):
        q = mobius_restrict(q, var, lo, hi)
    return q


def strict_sign_on_box(p: MultiPoly, box: Box) -> int | None:
    """Certified strict sign of ``p`` on the closed box, or None.

    Returns +-1 when the full Möbius restriction has all nonzero
    coefficients of that sign *and* every corner coefficient (exponent 0
    or the per-variable degree in each slot) is nonzero — which proves
    the strict sign on the closed box.  Returns None when this sufficient
    test is inconclusive.
    """
    q = restrict_box(p, box)
    if q.is_zero:
        return None
    sign = 0
    for c in q.terms.values():
        s = sign_of(c) if c.is_real else 0
        if s == 0:
            return None  # non-real coefficient: not certifiable here
        if sign == 0:
            sign = s
        elif s != sign:
            return None
    # corner exponents use the clearing degrees of the *input*: a dropped
    # leading coefficient means the value at that box corner is zero
    degs = [max(p.degree(v), 0) for v in range(p.nvars)]
    for corner in range(1 << q.nvars):
        exps = tuple(
            degs[v] if corner >> v & 1 else 0 for v in range(q.nvars)
        )
        if q.coeff(exps).is_zero:
            return None
    return sign
