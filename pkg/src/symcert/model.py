"""Exact model of nested-polyhedron central configurations.

Everything here is exact arithmetic.  The gravitational balance matrix of a
configuration of 2n points (an outer polyhedron and its copy scaled by
``t in (0, 1)``) has entries built from inverse cube distances, which for
these geometries are *rational-radical functions* of the scale: quotients of
polynomials in ``t`` by monomials in a fixed list of atoms (``t``,
``t + 1``, ``t - 1`` and the quadratic radicands ``q_p``), times at most one
square root ``sqrt(q_p(t))`` per term.  :class:`RadicalRing`,
:class:`RatFunc` and :class:`RadicalExpr` implement that arithmetic with
eager reduction ``u_p**2 -> q_p``.

On top of the arithmetic sit the model builders — :func:`nested_polyhedron`
(geometry plus validated group actions), :func:`build_S` (the balance matrix,
affine in the mass parameter ``c``), :func:`check_symmetry` (the exact
intertwining identity on generators) — and three rewriting tools used by the
certification layer:

* :func:`reparametrize` substitutes the hyperbolic-angle variable ``u`` for
  ``t`` so that a single-radical expression becomes a plain rational
  function of ``u`` (the radicand becomes a perfect square along the
  substitution), with the open unit interval mapping to an explicit
  ``u``-interval;
* :func:`lift` clears denominators and replaces each ``sqrt(q_p(t))`` by an
  independent variable, producing a polynomial in ``(t, u_1, ..., u_L)``;
* :func:`curve_box` bounds the curve ``t -> (t, sqrt(q_1(t)), ...)`` over a
  subinterval by a closed box with exact algebraic corners, so a strict sign
  of the lifted polynomial on the box transfers to the original expression.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from gmpy2 import mpq, mpz

from .fields import FieldElement, FieldTower, sign_of
from .groups import (
    GroupData,
    GroupRep,
    NotEquivariant,
    ValidationFailed,
    tensor_rep,
)
from .linalg import Matrix
from .polys import Box, MultiPoly, UniPoly, count_roots, strip_endpoint_roots

__all__ = [
    "CoincidentPositions",
    "Configuration",
    "NotSingleRadical",
    "ParamMatrix",
    "RadicalExpr",
    "RadicalRing",
    "RatFunc",
    "ReparamImage",
    "Reparametrization",
    "build_S",
    "check_symmetry",
    "curve_box",
    "lift",
    "nested_polyhedron",
    "reparametrize",
]


class CoincidentPositions(ValueError):
    """Two point positions coincide identically, so a distance vanishes."""


class NotSingleRadical(ValueError):
    """An expression or distance does not fit the single-radical format."""


class RadicalRing:
    """Arithmetic context for rational-radical functions on ``(0, 1)``.

    Elements are sums ``sum_S f_S(t) * prod_{p in S} sqrt(q_p(t))`` where
    each ``f_S`` is a polynomial over ``tower`` divided by a monomial in the
    *atoms*: ``t``, ``t + 1``, ``t - 1``, followed by the radicands ``q_p``.
    Construction validates that no atom has a root strictly inside the open
    unit interval (so each has one constant sign there, recorded in
    ``atom_signs``) and that every radicand is positive on it.
    """

    __slots__ = ("tower", "atoms", "atom_signs", "nradicals")

    def __init__(self, tower: FieldTower, radicands: Sequence[UniPoly]):
        t = UniPoly.var(tower)
        atoms = [t, t + 1, t - 1]
        for q in radicands:
            atoms.append(q.lift(tower))
        signs = []
        for atom in atoms:
            core, _, _ = strip_endpoint_roots(atom, mpq(0), mpq(1))
            if core.degree > 0 and count_roots(core, mpq(0), mpq(1)) > 0:
                raise ValueError("ring atom has a root inside (0, 1)")
            signs.append(sign_of(atom.evaluate(mpq(1, 2))))
        for p in range(len(radicands)):
            if signs[3 + p] <= 0:
                raise ValueError("radicand must be positive on (0, 1)")
        self.tower = tower
        self.atoms = atoms
        self.atom_signs = signs
        self.nradicals = len(radicands)

    def radicand(self, p: int) -> UniPoly:
        return self.atoms[3 + p]

    def _zero_den(self) -> tuple[int, ...]:
        return (0,) * len(self.atoms)

    def zero(self) -> "RadicalExpr":
        return RadicalExpr(self, {})

    def one(self) -> "RadicalExpr":
        return self.constant(1)

    def constant(self, c) -> "RadicalExpr":
        return self.poly(UniPoly(self.tower, [c]))

    def poly(self, p) -> "RadicalExpr":
        """A polynomial in ``t`` as an element (coefficient list accepted)."""
        if not isinstance(p, UniPoly):
            p = UniPoly(self.tower, p)
        return RadicalExpr(self, {0: RatFunc(self, p)})

    def atom_reciprocal(self, idx: int, power: int = 1) -> "RadicalExpr":
        """``1 / atom**power`` as an element."""
        den = list(self._zero_den())
        den[idx] = power
        return RadicalExpr(
            self, {0: RatFunc(self, UniPoly(self.tower, [1]), tuple(den))}
        )

    def sqrt_radical(self, p: int) -> "RadicalExpr":
        """``sqrt(q_p(t))`` as an element."""
        return RadicalExpr(self, {1 << p: RatFunc(self, UniPoly(self.tower, [1]))})

    def inverse_cube_sqrt(self, p: int) -> "RadicalExpr":
        """``1 / q_p(t)**(3/2)``, i.e. ``sqrt(q_p) / q_p**2``."""
        den = list(self._zero_den())
        den[3 + p] = 2
        return RadicalExpr(
            self, {1 << p: RatFunc(self, UniPoly(self.tower, [1]), tuple(den))}
        )

    def var(self) -> UniPoly:
        return UniPoly.var(self.tower)


class RatFunc:
    """A polynomial divided by a monomial in the ring atoms (kept reduced)."""

    __slots__ = ("ring", "num", "den")

    def __init__(self, ring: RadicalRing, num: UniPoly, den: tuple[int, ...] | None = None):
        if den is None:
            den = ring._zero_den()
        den = tuple(int(e) for e in den)
        if len(den) != len(ring.atoms) or any(e < 0 for e in den):
            raise ValueError("bad denominator exponent vector")
        if num.tower is not ring.tower:
            num = num.lift(ring.tower)
        if num.is_zero:
            den = ring._zero_den()
        else:
            work = list(den)
            for i, atom in enumerate(ring.atoms):
                while work[i] > 0 and num.degree >= atom.degree:
                    q, r = num.divmod(atom)
                    if not r.is_zero:
                        break
                    num = q
                    work[i] -= 1
            den = tuple(work)
        self.ring = ring
        self.num = num
        self.den = den

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def _coerce(self, other) -> "RatFunc | None":
        if isinstance(other, RatFunc):
            return other if other.ring is self.ring else None
        if isinstance(other, UniPoly):
            return RatFunc(self.ring, other)
        if isinstance(other, (int, mpz, mpq, FieldElement)):
            return RatFunc(self.ring, UniPoly(self.ring.tower, [other]))
        return None

    def _raised_num(self, target: tuple[int, ...]) -> UniPoly:
        num = self.num
        for i, (have, want) in enumerate(zip(self.den, target)):
            for _ in range(want - have):
                num = num * self.ring.atoms[i]
        return num

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        target = tuple(max(a, b) for a, b in zip(self.den, o.den))
        return RatFunc(self.ring, self._raised_num(target) + o._raised_num(target), target)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(self.ring, -self.num, self.den)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return -(self - other)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RatFunc(
            self.ring,
            self.num * o.num,
            tuple(a + b for a, b in zip(self.den, o.den)),
        )

    __rmul__ = __mul__

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).is_zero

    def __hash__(self):
        return hash((self.num, self.den))

    def derivative(self) -> "RatFunc":
        ring = self.ring
        active = [i for i, e in enumerate(self.den) if e > 0]
        lead = self.num.derivative()
        for i in active:
            lead = lead * ring.atoms[i]
        for i in active:
            term = self.num * (self.den[i] * ring.atoms[i].derivative())
            for j in active:
                if j != i:
                    term = term * ring.atoms[j]
            lead = lead - term
        den = tuple(e + 1 if e > 0 else 0 for e in self.den)
        return RatFunc(ring, lead, den)

    def evaluate(self, x) -> FieldElement:
        """Exact value at a point where no denominator atom vanishes."""
        val = self.num.evaluate(x)
        for i, e in enumerate(self.den):
            if e:
                a = self.ring.atoms[i].evaluate(x)
                val = val * (a.inverse() ** e)
        return val

    def laurent(self, point: mpq, need: int) -> tuple[int, list[FieldElement]]:
        """Laurent expansion at ``t = point``: ``(start, coeffs)``.

        The function equals ``sum_k coeffs[k] * (t - point)**(start + k)``
        plus higher-order terms; ``need`` coefficients are produced.
        """
        if self.is_zero:
            raise ValueError("Laurent expansion of the zero function")
        tower = self.ring.tower
        num_s = _taylor_shift(self.num, point)
        den_s = UniPoly(tower, [1])
        for i, e in enumerate(self.den):
            if e:
                den_s = den_s * _taylor_shift(self.ring.atoms[i], point) ** e
        nc = num_s.coeffs
        dc = den_s.coeffs
        r = next(k for k, c in enumerate(nc) if not c.is_zero)
        m = next(k for k, c in enumerate(dc) if not c.is_zero)
        n_ser = nc[r : r + need]
        d_ser = dc[m : m + need]
        n_ser += [tower.zero()] * (need - len(n_ser))
        d_ser += [tower.zero()] * (need - len(d_ser))
        inv0 = d_ser[0].inverse()
        inv = [inv0]
        for k in range(1, need):
            acc = None
            for j in range(1, k + 1):
                term = d_ser[j] * inv[k - j]
                acc = term if acc is None else acc + term
            inv.append(-inv0 * acc)
        out = []
        for k in range(need):
            acc = None
            for j in range(k + 1):
                term = n_ser[j] * inv[k - j]
                acc = term if acc is None else acc + term
            out.append(acc)
        return r - m, out

    def __repr__(self):
        den = " * ".join(
            f"({self.ring.atoms[i]!r})^{e}" for i, e in enumerate(self.den) if e
        )
        return f"RatFunc({self.num!r}" + (f" / {den})" if den else ")")


def _mul_series(tower: FieldTower, a: list, b: list, need: int) -> list:
    """Truncated Cauchy product of two power-series coefficient lists."""
    n = min(need, len(a) + len(b) - 1)
    out = [tower.zero()] * n
    for i, ai in enumerate(a):
        if ai.is_zero or i >= n:
            continue
        for j, bj in enumerate(b):
            if i + j >= n:
                break
            if not bj.is_zero:
                out[i + j] = out[i + j] + ai * bj
    return out


def _taylor_shift(p: UniPoly, a) -> UniPoly:
    """``p(x + a)``: coefficients of ``p`` in powers of ``x - a``.

    Repeated synthetic division by ``x - a``; each pass leaves the next
    Taylor coefficient in slot 0 and the quotient above it.
    """
    tower = p.tower
    a = a if isinstance(a, FieldElement) else tower.from_rational(a)
    coeffs = list(p.coeffs)
    out = []
    while coeffs:
        for k in range(len(coeffs) - 2, -1, -1):
            coeffs[k] = coeffs[k] + a * coeffs[k + 1]
        out.append(coeffs[0])
        coeffs = coeffs[1:]
    return UniPoly(tower, out)


class RadicalExpr:
    """Sum of radical monomials: ``{mask: f}`` means ``sum f * prod u_p``.

    Bit ``p`` of a mask selects the factor ``sqrt(q_p(t))``; products reduce
    eagerly through ``u_p**2 = q_p(t)``, so masks never repeat a factor.
    """

    __slots__ = ("ring", "terms")

    def __init__(self, ring: RadicalRing, terms: dict[int, RatFunc]):
        self.ring = ring
        self.terms = {m: f for m, f in terms.items() if not f.is_zero}

    def _coerce(self, other) -> "RadicalExpr | None":
        if isinstance(other, RadicalExpr):
            return other if other.ring is self.ring else None
        if isinstance(other, RatFunc):
            if other.ring is not self.ring:
                return None
            return RadicalExpr(self.ring, {0: other})
        if isinstance(other, UniPoly):
            return RadicalExpr(self.ring, {0: RatFunc(self.ring, other)})
        if isinstance(other, (int, mpz, mpq, FieldElement)):
            f = RatFunc(self.ring, UniPoly(self.ring.tower, [other]))
            return RadicalExpr(self.ring, {0: f})
        return None

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_real(self) -> bool:
        return all(
            c.is_real for f in self.terms.values() for c in f.num.coeffs
        )

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = dict(self.terms)
        for m, f in o.terms.items():
            cur = out.get(m)
            out[m] = f if cur is None else cur + f
        return RadicalExpr(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return RadicalExpr(self.ring, {m: -f for m, f in self.terms.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return -(self - other)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        ring = self.ring
        out: dict[int, RatFunc] = {}
        for m1, f1 in self.terms.items():
            for m2, f2 in o.terms.items():
                f = f1 * f2
                both = m1 & m2
                p = 0
                while both:
                    if both & 1:
                        f = f * RatFunc(ring, ring.radicand(p))
                    both >>= 1
                    p += 1
                mask = m1 ^ m2
                cur = out.get(mask)
                out[mask] = f if cur is None else cur + f
        return RadicalExpr(ring, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = self.ring.one()
        base = self
        n = int(n)
        if n < 0:
            raise ValueError("negative powers are not defined here")
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).is_zero

    __hash__ = None

    def derivative(self) -> "RadicalExpr":
        """d/dt, using ``u_p' = q_p'/(2 u_p) = q_p' u_p / (2 q_p)``."""
        ring = self.ring
        out: dict[int, RatFunc] = {}
        for m, f in self.terms.items():
            d = f.derivative()
            p = 0
            mm = m
            while mm:
                if mm & 1:
                    qp = ring.radicand(p)
                    den = list(ring._zero_den())
                    den[3 + p] = 1
                    d = d + f * RatFunc(
                        ring, qp.derivative() * mpq(1, 2), tuple(den)
                    )
                mm >>= 1
                p += 1
            cur = out.get(m)
            out[m] = d if cur is None else cur + d
        return RadicalExpr(ring, out)

    def evaluate(self, t0, tower: FieldTower | None = None):
        """Exact value at rational ``t0 in (0, 1)``: returns ``(tower, value)``.

        The tower is extended (in radical order) by the square roots of the
        radicand values at ``t0`` so the result is a single field element.
        """
        ring = self.ring
        t0 = mpq(t0)
        tower = tower or ring.tower
        if not tower.extends(ring.tower):
            raise ValueError("evaluation tower must extend the ring tower")
        roots = []
        for p in range(ring.nradicals):
            qv = ring.radicand(p).evaluate(t0)
            if not qv.is_rational:
                raise NotSingleRadical("radicand value is not rational")
            tower, root = tower.adjoin(qv.as_rational())
            roots.append(root)
        total = tower.zero()
        for m, f in self.terms.items():
            val = f.evaluate(t0)
            p = 0
            mm = m
            while mm:
                if mm & 1:
                    val = val * roots[p]
                mm >>= 1
                p += 1
            total = total + val
        return tower, total

    def laurent_at(self, point, need: int = 8):
        """Leading Laurent data at a point: ``(tower, order, leading)``.

        Each ``sqrt(q_p)`` is expanded as an exact power series around the
        point (the radicand must be positive there), every term's series is
        multiplied out, and coefficient columns are summed until the first
        nonzero total — so cancellation between terms is handled correctly
        up to ``need`` orders (ArithmeticError beyond that).
        """
        if not self.terms:
            raise ArithmeticError("Laurent expansion of the zero expression")
        ring = self.ring
        point = mpq(point)
        tower = ring.tower
        sqrt_series: list[list[FieldElement]] = []
        for p in range(ring.nradicals):
            qs = _taylor_shift(ring.radicand(p), point).coeffs
            q0 = qs[0] if qs else None
            if q0 is None or q0.is_zero:
                raise NotSingleRadical("radicand vanishes at the expansion point")
            if not q0.is_rational:
                raise NotSingleRadical("radicand value is not rational")
            tower, s0 = tower.adjoin(q0.as_rational())
            ser = [s0]
            half_inv = (s0 + s0).inverse()
            for k in range(1, need):
                acc = qs[k] if k < len(qs) else tower.zero()
                for j in range(1, k):
                    acc = acc - ser[j] * ser[k - j]
                ser.append(acc * half_inv)
            sqrt_series.append(ser)
        pieces = []
        for m, f in self.terms.items():
            start, coeffs = f.laurent(point, need)
            p = 0
            mm = m
            while mm:
                if mm & 1:
                    coeffs = _mul_series(tower, coeffs, sqrt_series[p], need)
                mm >>= 1
                p += 1
            pieces.append((start, coeffs))
        base = min(s for s, _ in pieces)
        for k in range(need):
            total = tower.zero()
            for start, coeffs in pieces:
                idx = base + k - start
                if 0 <= idx < len(coeffs):
                    total = total + coeffs[idx]
            if not total.is_zero:
                return tower, base + k, total
        raise ArithmeticError("Laurent expansion cancels beyond requested depth")

    def __repr__(self):
        if not self.terms:
            return "RadicalExpr(0)"
        bits = []
        for m in sorted(self.terms):
            rads = "*".join(f"u{p}" for p in range(8) if m >> p & 1)
            bits.append(f"{rads or '1'}: {self.terms[m]!r}")
        return "RadicalExpr{" + "; ".join(bits) + "}"


# ---------------------------------------------------------------------------
# configurations and the balance matrix
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParamMatrix:
    """A matrix affine in the mass parameter: ``const + c * linear``."""

    const: Matrix
    linear: Matrix

    @property
    def shape(self) -> tuple[int, int]:
        return self.const.shape

    def at(self, cval) -> Matrix:
        return self.const + self.linear.scale(cval)

    def entry(self, i: int, j: int) -> tuple[RadicalExpr, RadicalExpr]:
        return self.const[i, j], self.linear[i, j]


@dataclass
class Configuration:
    """A nested pair of polyhedra with its validated symmetry data."""

    name: str
    group: GroupData
    ring: RadicalRing
    theta: GroupRep
    rho: GroupRep
    tensor: GroupRep
    positions: list[tuple[UniPoly, UniPoly, UniPoly]]
    outer_count: int


def nested_polyhedron(
    name: str,
    group: GroupData,
    ring: RadicalRing,
    outer_gens: Sequence[Sequence[int]],
    rho_gens: Sequence[Matrix],
    outer_positions: Sequence[Sequence],
) -> Configuration:
    """Build and validate a nested-polyhedron configuration.

    ``outer_gens`` gives the generator permutations of the outer vertex set
    (the inner copy follows the same pattern); ``rho_gens`` the matching
    3x3 orthogonal matrices.  Validates that the rotation matrices are
    exactly orthogonal and that they permute the positions exactly as the
    permutations say, for every generator and every point.
    """
    n = len(outer_positions)
    tower = ring.tower
    doubled = [list(p) + [x + n for x in p] for p in outer_gens]
    action = group.group.extend_action(doubled)
    theta = GroupRep.permutation(group.group, action)
    rho = GroupRep.from_generators(group.group, list(rho_gens), validate="full")
    if rho.degree != 3:
        raise ValidationFailed("rotation representation must be 3-dimensional")
    ident = Matrix.identity(3, tower.zero(), tower.one())
    for gi in group.group.generator_indices:
        r = rho.matrix(gi)
        if not (r.transpose() @ r) == ident:
            raise ValidationFailed("rotation generator is not orthogonal")
    positions: list[tuple[UniPoly, UniPoly, UniPoly]] = []
    for p in outer_positions:
        positions.append(tuple(UniPoly(tower, [c]) for c in p))
    for p in outer_positions:
        positions.append(tuple(UniPoly(tower, [0, c]) for c in p))
    for gpos, gidx in enumerate(group.group.generator_indices):
        perm = doubled[gpos]
        r = rho.matrix(gidx)
        for i, pos in enumerate(positions):
            image = tuple(
                sum((r[a, b] * pos[b] for b in range(3)), UniPoly(tower, []))
                for a in range(3)
            )
            if any(
                not (image[a] - positions[perm[i]][a]).is_zero for a in range(3)
            ):
                raise ValidationFailed(
                    f"generator {gpos} does not map point {i} to point {perm[i]}"
                )
    tensor = tensor_rep(theta, rho)
    return Configuration(
        name=name,
        group=group,
        ring=ring,
        theta=theta,
        rho=rho,
        tensor=tensor,
        positions=positions,
        outer_count=n,
    )


def _inverse_cube(ring: RadicalRing, dist_sq: UniPoly) -> RadicalExpr:
    """``dist_sq(t) ** (-3/2)`` as a ring element.

    Requires the squared distance to factor as a positive rational constant
    times even powers of the linear atoms times at most one odd radicand
    power, with the constant's square root in the tower — anything else
    raises :class:`NotSingleRadical`.
    """
    work = dist_sq
    exps = [0] * len(ring.atoms)
    for i, atom in enumerate(ring.atoms):
        while work.degree >= atom.degree:
            q, r = work.divmod(atom)
            if not r.is_zero:
                break
            work = q
            exps[i] += 1
    if work.degree != 0:
        raise NotSingleRadical("squared distance has an unregistered polynomial factor")
    const = work.coeff(0)
    if not const.is_rational:
        raise NotSingleRadical("squared distance constant is not rational")
    e0 = const.as_rational()
    if e0 <= 0:
        raise NotSingleRadical("squared distance has a nonpositive constant part")
    for i in range(3):
        if exps[i] % 2:
            raise NotSingleRadical("odd power of a linear atom under the square root")
    odd = [p for p in range(ring.nradicals) if exps[3 + p] % 2]
    if len(odd) > 1:
        raise NotSingleRadical("more than one radical in a single distance")
    root = ring.tower.express_sqrt(e0)
    if root is None:
        raise NotSingleRadical(f"sqrt({e0}) is not in the coefficient tower")
    sigma = 1
    for i in range(3):
        if ring.atom_signs[i] < 0 and (exps[i] // 2) % 2:
            sigma = -sigma
    coeff = (root.inverse() ** 3) * sigma
    den = [0] * len(ring.atoms)
    for i in range(3):
        den[i] = 3 * (exps[i] // 2)
    mask = 0
    for p in range(ring.nradicals):
        m = exps[3 + p]
        if m % 2 == 0:
            den[3 + p] = 3 * (m // 2)
        else:
            den[3 + p] = 3 * (m // 2) + 2
            mask |= 1 << p
    rf = RatFunc(ring, UniPoly(ring.tower, [coeff]), tuple(den))
    return RadicalExpr(ring, {mask: rf})


def build_S(config: Configuration) -> ParamMatrix:
    """The balance matrix of the configuration, affine in the parameter.

    Column ``j``, row block ``i`` holds
    ``(|q_j - q_i|**(-3) - c) * (q_j - q_i)`` for ``i != j`` and zero blocks
    on the diagonal; masses in the kernel of the matrix at parameter value
    ``c`` balance the configuration exactly.
    """
    ring = config.ring
    n = len(config.positions)
    zero = ring.zero()
    a_rows = [[zero] * n for _ in range(3 * n)]
    b_rows = [[zero] * n for _ in range(3 * n)]
    cube_cache: dict[tuple[int, int], RadicalExpr] = {}
    for j in range(n):
        for i in range(n):
            if i == j:
                continue
            diff = [config.positions[j][a] - config.positions[i][a] for a in range(3)]
            key = (min(i, j), max(i, j))
            inv3 = cube_cache.get(key)
            if inv3 is None:
                dist_sq = None
                for d in diff:
                    sq = d * d
                    dist_sq = sq if dist_sq is None else dist_sq + sq
                if dist_sq.is_zero:
                    raise CoincidentPositions(f"points {i} and {j} coincide")
                inv3 = _inverse_cube(ring, dist_sq)
                cube_cache[key] = inv3
            for a in range(3):
                comp = ring.poly(diff[a])
                if comp.is_zero:
                    continue
                a_rows[3 * i + a][j] = inv3 * comp
                b_rows[3 * i + a][j] = -comp
    return ParamMatrix(Matrix(a_rows), Matrix(b_rows))


def check_symmetry(config: Configuration, S: ParamMatrix) -> None:
    """Verify the intertwining identity on every generator, exactly.

    For each generator ``g`` both the constant and the linear part must
    satisfy ``M theta(g) = (theta tensor rho)(g) M``; any failing entry
    raises :class:`~symcert.groups.NotEquivariant`.
    """
    for gi, gidx in enumerate(config.group.group.generator_indices):
        tg = config.theta.matrix(gidx)
        tr = config.tensor.matrix(gidx)
        for label, M in (("constant", S.const), ("linear", S.linear)):
            lhs = M @ tg
            rhs = tr @ M
            diff = lhs - rhs
            if not diff.is_zero:
                where = next(
                    (r, c)
                    for r in range(diff.nrows)
                    for c in range(diff.ncols)
                    if not diff[r, c].is_zero
                )
                raise NotEquivariant(
                    f"{label} part fails on generator {gi} at entry {where}"
                )


# ---------------------------------------------------------------------------
# reparametrization (single-radical cases)
# ---------------------------------------------------------------------------


@dataclass
class ReparamImage:
    """A reparametrized expression: ``numerator / prod factor**exp`` in ``u``.

    The factors are nonvanishing inside the open ``u``-interval (their only
    roots can sit at its endpoints), so the numerator alone carries the
    interior roots and sign changes of the original expression.
    """

    numerator: UniPoly
    factors: list[tuple[UniPoly, int]]


class Reparametrization:
    """Exact substitution making a single quadratic radicand a square.

    For ``q(t) = a t**2 + b t + c0`` with negative discriminant ``D``, the
    substitution ``t = kappa(u) = (sqrt(-D) (u**2 - 1) - 2 b u) / (4 a u)``
    turns ``q(kappa(u))`` into ``(-D) a (u**2 + 1)**2 / (4 a u)**2`` — a
    perfect square times squares — so single-radical expressions become
    rational functions of ``u``.  ``kappa`` is increasing for ``u > 0`` and
    maps the interval image of ``(0, 1)`` back onto it.
    """

    def __init__(self, ring: RadicalRing, slot: int = 0):
        if ring.nradicals < 1:
            raise NotSingleRadical("ring has no radicand to reparametrize")
        q = ring.radicand(slot)
        if q.degree != 2:
            raise NotSingleRadical("radicand must be quadratic")
        coeffs = []
        for k in (2, 1, 0):
            c = q.coeff(k)
            if not c.is_rational:
                raise NotSingleRadical("radicand coefficients must be rational")
            coeffs.append(c.as_rational())
        a, b, c0 = coeffs
        disc = b * b - 4 * a * c0
        if disc >= 0 or a <= 0:
            raise NotSingleRadical("radicand must be positive definite")
        tower = ring.tower
        sqrt_nd = tower.express_sqrt(-disc)
        sqrt_a = tower.express_sqrt(a)
        if sqrt_nd is None or sqrt_a is None:
            raise NotSingleRadical("tower lacks sqrt(-disc) or sqrt(a)")
        self.ring = ring
        self.slot = slot
        self.a, self.b, self.c0 = a, b, c0
        self.disc = disc
        self.sqrt_nd = sqrt_nd
        self.sqrt_a = sqrt_a
        self.scale = 4 * a
        # kappa numerator K(u) = sqrt(-D) (u^2 - 1) - 2 b u, over scale * u
        self.kappa_num = UniPoly(tower, [-sqrt_nd, -2 * b, sqrt_nd])
        u = UniPoly.var(tower)
        du = u * self.scale
        self._du = du
        self.atom_images: list[UniPoly] = []
        for atom in ring.atoms:
            img = UniPoly(tower, [])
            d = atom.degree
            for k in range(d + 1):
                img = img + atom.coeff(k) * self.kappa_num**k * du ** (d - k)
            self.atom_images.append(img)
        # sqrt(q) o kappa = rho0 * (u^2 + 1) / u
        self.sqrt_image_const = sqrt_nd * (sqrt_a.inverse() * mpq(1, 4))
        self.sqrt_image_poly = UniPoly(tower, [1, 0, 1])

    def kappa_at(self, u0: FieldElement) -> FieldElement:
        return self.kappa_num.evaluate(u0) * (u0 * self.scale).inverse()

    def u_of_t(self, t0, tower: FieldTower | None = None):
        """The ``u`` with ``kappa(u) = t0``; returns ``(tower, value)``."""
        t0 = mpq(t0)
        tower = tower or self.ring.tower
        if not tower.extends(self.ring.tower):
            raise ValueError("tower must extend the ring tower")
        w = (2 * self.a * t0 + self.b) ** 2 - self.disc
        tower, rootw = tower.adjoin(w)
        val = (rootw + (2 * self.a * t0 + self.b)) * self.sqrt_nd.inverse()
        return tower, val

    def interval(self, t_lo=0, t_hi=1):
        """Image of ``(t_lo, t_hi)``: ``(tower, u_lo, u_hi)``."""
        tower, u_lo = self.u_of_t(t_lo)
        tower, u_hi = self.u_of_t(t_hi, tower)
        return tower, u_lo, u_hi

    def apply(self, expr: RadicalExpr) -> ReparamImage:
        """Substitute ``t = kappa(u)`` into a single-radical expression."""
        ring = self.ring
        if expr.ring is not ring:
            raise NotSingleRadical("expression belongs to a different ring")
        own = 1 << self.slot
        for m in expr.terms:
            if m & ~own:
                raise NotSingleRadical("expression involves other radicals")
        tower = ring.tower
        degs = [atom.degree for atom in ring.atoms]
        # per-term data: numerator polynomial and u / atom-image exponents
        terms = []
        max_e = [0] * len(ring.atoms)
        max_u = 0
        for m, f in expr.terms.items():
            s = 1 if m else 0
            p_num = UniPoly(tower, [])
            dn = f.num.degree
            for k in range(dn + 1):
                p_num = p_num + f.num.coeff(k) * self.kappa_num**k * self._du ** (
                    dn - k
                )
            if s:
                p_num = p_num * self.sqrt_image_poly * self.sqrt_image_const
            scale_pow = sum(degs[i] * e for i, e in enumerate(f.den)) - dn
            u_pow = dn + s - sum(degs[i] * e for i, e in enumerate(f.den))
            if scale_pow > 0:
                p_num = p_num * (mpq(self.scale) ** scale_pow)
            elif scale_pow < 0:
                p_num = p_num * (mpq(1, self.scale) ** (-scale_pow))
            terms.append((p_num, list(f.den), u_pow))
            max_u = max(max_u, u_pow)
            for i, e in enumerate(f.den):
                max_e[i] = max(max_e[i], e)
        numerator = UniPoly(tower, [])
        u = UniPoly.var(tower)
        for p_num, den, u_pow in terms:
            piece = p_num
            for i, e in enumerate(den):
                if max_e[i] - e:
                    piece = piece * self.atom_images[i] ** (max_e[i] - e)
            piece = piece * u ** (max_u - u_pow)
            numerator = numerator + piece
        factors = [(u, max_u)] if max_u else []
        for i, e in enumerate(max_e):
            if e:
                factors.append((self.atom_images[i], e))
        return ReparamImage(numerator=numerator, factors=factors)


def reparametrize(ring: RadicalRing, expr: RadicalExpr, slot: int = 0) -> tuple[Reparametrization, ReparamImage]:
    """Convenience wrapper: build the substitution and apply it."""
    rep = Reparametrization(ring, slot)
    return rep, rep.apply(expr)


# ---------------------------------------------------------------------------
# lifting to polynomial form and curve boxes
# ---------------------------------------------------------------------------


def lift(expr: RadicalExpr) -> tuple[MultiPoly, tuple[int, ...]]:
    """Clear denominators and abstract each radical into its own variable.

    Returns ``(F, dens)`` with ``F`` a polynomial in ``(t, u_1, ..., u_L)``
    such that ``expr = F(t, sqrt(q_1), ...) / prod atom_i**dens[i]``; each
    ``u_p`` appears to degree at most one since products were reduced.
    """
    ring = expr.ring
    tower = ring.tower
    L = ring.nradicals
    names = ("t",) + tuple(f"u{p + 1}" for p in range(L))
    dens = tuple(
        max((f.den[i] for f in expr.terms.values()), default=0)
        for i in range(len(ring.atoms))
    )
    terms: dict[tuple[int, ...], FieldElement] = {}
    for m, f in expr.terms.items():
        num = f.num
        for i, e in enumerate(dens):
            for _ in range(e - f.den[i]):
                num = num * ring.atoms[i]
        radical_exps = tuple(1 if m >> p & 1 else 0 for p in range(L))
        for k, c in enumerate(num.coeffs):
            if c.is_zero:
                continue
            key = (k,) + radical_exps
            cur = terms.get(key)
            terms[key] = c if cur is None else cur + c
    return MultiPoly(tower, names, terms), dens


def curve_box(ring: RadicalRing, lo, hi, tower: FieldTower | None = None):
    """A closed box certainly containing the radical curve over ``[lo, hi]``.

    Variable 0 ranges over ``[lo, hi]``; variable ``p + 1`` over the exact
    range of ``sqrt(q_p)`` there (quadratics attain extrema at endpoints or
    the vertex).  Returns ``(tower, box)`` with the tower extended by
    whatever square roots the bounds need.
    """
    lo, hi = mpq(lo), mpq(hi)
    if not lo < hi:
        raise ValueError("curve_box needs lo < hi")
    tower = tower or ring.tower
    if not tower.extends(ring.tower):
        raise ValueError("tower must extend the ring tower")
    bounds = [(lo, hi)]
    radical_ranges = []
    for p in range(ring.nradicals):
        q = ring.radicand(p)
        if q.degree > 2:
            raise NotSingleRadical("only radicands of degree <= 2 are boxed")
        cands = [q.evaluate(lo), q.evaluate(hi)]
        if q.degree == 2:
            a2 = q.coeff(2).as_rational()
            a1 = q.coeff(1).as_rational()
            vertex = -a1 / (2 * a2)
            if lo < vertex < hi:
                cands.append(q.evaluate(vertex))
        vals = [c.as_rational() for c in cands]
        radical_ranges.append((min(vals), max(vals)))
    exact_bounds = [
        (tower.from_rational(lo), tower.from_rational(hi))
    ]
    for mn, mx in radical_ranges:
        tower, lo_root = tower.adjoin(mn)
        tower, hi_root = tower.adjoin(mx)
        exact_bounds.append((lo_root, hi_root))
    return tower, Box(exact_bounds)
