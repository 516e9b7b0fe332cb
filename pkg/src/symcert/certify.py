"""Replayable exact certificates for sign, limit and rank claims.

Every public entry point returns a :class:`Certificate`: a JSON-friendly
record carrying enough exact data (field towers, polynomials, radical
expressions, intervals) that :func:`replay` can re-derive the whole
computation from scratch and compare the result bit for bit.  Four kinds
are produced:

``sturm-count``
    A strict sign on an open interval, proved by a zero Sturm root count
    for an exact numerator (after substituting away a single radical when
    one is present) plus one exact sample evaluation.

``box-covering``
    A strict sign along a curve, proved by covering the parameter range
    with closed boxes on which a Möbius coefficient test pins the sign of
    the cleared numerator.

``endpoint-limit``
    The signed one-sided limit of a quotient at an interval endpoint,
    read off the leading exponents and coefficients of exact expansions.

``kernel-trivial``
    Injectivity of a tall two-column matrix depending on ``(t, c)``,
    proved either from one parameter-free two-row minor of constant sign
    or by eliminating ``c`` between two minors that are affine in it.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from gmpy2 import mpq

from .fields import FieldElement, FieldTower, format_exact, parse_exact, sign_of
from .linalg import Matrix
from .model import (
    NotSingleRadical,
    ParamMatrix,
    RadicalExpr,
    RadicalRing,
    RatFunc,
    Reparametrization,
    curve_box,
    lift,
)
from .polys import (
    Box,
    IntervalQ,
    MultiPoly,
    UniPoly,
    count_roots,
    strict_sign_on_box,
    strip_endpoint_roots,
)

__all__ = [
    "Certificate",
    "DenominatorZero",
    "DepthExceeded",
    "NotAffine",
    "ReplayError",
    "RootFound",
    "StrategyExhausted",
    "certify_endpoint_limit",
    "certify_root_count",
    "certify_sign",
    "certify_sign_on_curve",
    "certify_sign_on_plane_curve",
    "certify_sign_univariate",
    "det_affine",
    "isolate_sign_change",
    "kernel_trivial_rect",
    "mass_ratio_at",
    "replay",
]


class RootFound(ValueError):
    """The queried expression vanishes somewhere inside the interval."""

    def __init__(self, message: str, count: int = 1):
        super().__init__(message)
        self.count = count


class DepthExceeded(ValueError):
    """Bisection hit the depth limit before every box certified a sign."""

    def __init__(self, message: str, interval: tuple[mpq, mpq]):
        super().__init__(message)
        self.interval = interval


class NotAffine(ValueError):
    """The determinant keeps a genuine quadratic term in the parameter."""


class DenominatorZero(ZeroDivisionError):
    """A quotient was requested where its denominator vanishes."""


class StrategyExhausted(ValueError):
    """No minor combination certified a trivial kernel."""

    def __init__(self, message: str, tried: list):
        super().__init__(message)
        self.tried = tried


class ReplayError(ValueError):
    """A stored certificate does not reproduce under re-derivation."""


# ---------------------------------------------------------------------------
# exact-value serialization
# ---------------------------------------------------------------------------


def _tower_to_json(tower: FieldTower) -> list[str]:
    return [str(r) for r in tower.radicands]


def _tower_from_json(rads) -> FieldTower:
    return FieldTower(tuple(mpq(r) for r in rads))


def _elem_from_json(s: str, tower: FieldTower) -> FieldElement:
    t2, v = parse_exact(s, tower)
    if t2 is not tower:
        if t2 != tower:
            raise ReplayError(f"value {s!r} does not lie in the declared field")
        v = FieldElement(tower, dict(v.coords))
    return v


def _poly_to_json(p: UniPoly) -> list[str]:
    return [format_exact(c) for c in p.coeffs]


def _poly_from_json(lst, tower: FieldTower) -> UniPoly:
    return UniPoly(tower, [_elem_from_json(s, tower) for s in lst])


def _ring_to_json(ring: RadicalRing) -> dict:
    return {
        "tower": _tower_to_json(ring.tower),
        "radicands": [
            _poly_to_json(ring.radicand(p)) for p in range(ring.nradicals)
        ],
    }


def _ring_from_json(d: dict) -> RadicalRing:
    tower = _tower_from_json(d["tower"])
    return RadicalRing(tower, [_poly_from_json(lst, tower) for lst in d["radicands"]])


def _expr_to_json(expr: RadicalExpr) -> list[dict]:
    return [
        {
            "mask": m,
            "num": _poly_to_json(expr.terms[m].num),
            "den": list(expr.terms[m].den),
        }
        for m in sorted(expr.terms)
    ]


def _expr_from_json(lst, ring: RadicalRing) -> RadicalExpr:
    terms = {}
    for d in lst:
        num = _poly_from_json(d["num"], ring.tower)
        terms[int(d["mask"])] = RatFunc(ring, num, tuple(d["den"]))
    return RadicalExpr(ring, terms)


def _multipoly_to_json(p: MultiPoly) -> dict:
    return {
        "vars": list(p.var_names),
        "terms": [
            [list(e), format_exact(c)] for e, c in sorted(p.terms.items())
        ],
    }


def _multipoly_from_json(d: dict, tower: FieldTower) -> MultiPoly:
    terms = {tuple(e): _elem_from_json(s, tower) for e, s in d["terms"]}
    return MultiPoly(tower, tuple(d["vars"]), terms)


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


@dataclass
class Certificate:
    """A self-contained, replayable record of one certified claim."""

    kind: str
    target: str
    data: dict
    verified: bool = False

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "target": self.target,
            "data": self.data,
            "verified": self.verified,
        }

    @classmethod
    def from_json(cls, d: dict) -> "Certificate":
        return cls(
            kind=d["kind"],
            target=d["target"],
            data=d["data"],
            verified=bool(d["verified"]),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path) -> "Certificate":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


# ---------------------------------------------------------------------------
# strict sign on an interval via Sturm counts
# ---------------------------------------------------------------------------


def certify_sign_univariate(
    expr: RadicalExpr,
    claimed: int | None = None,
    lo=0,
    hi=1,
    target: str = "",
) -> Certificate:
    """Certify a strict sign of ``expr`` on the open interval ``(lo, hi)``.

    An expression free of radicals is root-counted directly; one carrying
    a single radical is substituted onto the parameter where the radicand
    becomes a perfect square, and the count runs over the image interval
    (whose endpoints may be algebraic).  Roots sitting exactly on an
    endpoint are divided out first, so they do not spoil the open-interval
    claim.  Raises :class:`RootFound` when the certified count is nonzero
    and :class:`~symcert.model.NotSingleRadical` when two distinct
    radicals appear.
    """
    ring = expr.ring
    lo, hi = mpq(lo), mpq(hi)
    if not 0 <= lo < hi <= 1:
        raise ValueError("interval must sit inside [0, 1]")
    if expr.is_zero:
        raise ValueError("cannot certify a sign for the zero expression")
    used = 0
    for m in expr.terms:
        used |= m
    if used & (used - 1):
        raise NotSingleRadical("expression involves more than one radical")
    sample = (lo + hi) / 2
    data = {
        "ring": _ring_to_json(ring),
        "expr": _expr_to_json(expr),
        "interval": [str(lo), str(hi)],
        "sample": str(sample),
    }
    if used == 0:
        f = expr.terms[0]
        num, ma, mb = strip_endpoint_roots(f.num, lo, hi)
        n = count_roots(num, lo, hi)
        if n:
            raise RootFound(f"numerator has {n} root(s) in ({lo}, {hi})", n)
        num_sign = sign_of(f.num.evaluate(sample))
        prod = 1
        for i, e in enumerate(f.den):
            prod *= ring.atom_signs[i] ** e
        sign = num_sign * prod
        data.update(
            {
                "route": "rational",
                "numerator": _poly_to_json(f.num),
                "den": list(f.den),
                "endpoint_multiplicities": [ma, mb],
                "root_count": n,
                "numerator_sign": num_sign,
                "atom_sign_product": prod,
                "sign": sign,
            }
        )
    else:
        slot = used.bit_length() - 1
        rep = Reparametrization(ring, slot)
        image = rep.apply(expr)
        tower_u, u_lo, u_hi = rep.interval(lo, hi)
        num, ma, mb = strip_endpoint_roots(image.numerator, u_lo, u_hi)
        n = count_roots(num, u_lo, u_hi)
        if n:
            raise RootFound(f"numerator has {n} root(s) in the image interval", n)
        factor_counts = []
        for fpoly, _ in image.factors:
            fq, _, _ = strip_endpoint_roots(fpoly, u_lo, u_hi)
            fn = count_roots(fq, u_lo, u_hi)
            if fn:
                raise RootFound(
                    f"denominator factor has {fn} root(s) in the image interval", fn
                )
            factor_counts.append(fn)
        _, val = expr.evaluate(sample)
        sign = sign_of(val)
        if sign == 0:
            raise RootFound("expression vanishes at the sample point", 1)
        data.update(
            {
                "route": "reparametrized",
                "slot": slot,
                "u_tower": _tower_to_json(tower_u),
                "u_interval": [format_exact(u_lo), format_exact(u_hi)],
                "numerator": _poly_to_json(image.numerator),
                "factors": [[_poly_to_json(fp), e] for fp, e in image.factors],
                "endpoint_multiplicities": [ma, mb],
                "root_count": n,
                "factor_root_counts": factor_counts,
                "sign": sign,
            }
        )
    if claimed is not None and sign != claimed:
        raise ValueError(f"certified sign {sign} does not match claimed {claimed}")
    return Certificate("sturm-count", target, data, True)


def certify_root_count(
    expr: RadicalExpr,
    expected: int,
    lo=0,
    hi=1,
    target: str = "",
) -> Certificate:
    """Certify the exact number of distinct zeros of ``expr`` in ``(lo, hi)``.

    Runs the same two routes as :func:`certify_sign_univariate`, but here
    the Sturm count itself is the claim rather than an obstruction.
    Denominator factors must stay root-free on the interval, so every
    counted zero belongs to the expression and none hides a pole; the
    call fails unless the certified count equals ``expected``.
    """
    ring = expr.ring
    lo, hi = mpq(lo), mpq(hi)
    if not 0 <= lo < hi <= 1:
        raise ValueError("interval must sit inside [0, 1]")
    if expr.is_zero:
        raise ValueError("cannot count zeros of the zero expression")
    used = 0
    for m in expr.terms:
        used |= m
    if used & (used - 1):
        raise NotSingleRadical("expression involves more than one radical")
    data = {
        "ring": _ring_to_json(ring),
        "expr": _expr_to_json(expr),
        "interval": [str(lo), str(hi)],
        "expected": expected,
    }
    if used == 0:
        f = expr.terms[0]
        num, ma, mb = strip_endpoint_roots(f.num, lo, hi)
        n = count_roots(num, lo, hi)
        data.update(
            {
                "route": "rational",
                "numerator": _poly_to_json(f.num),
                "den": list(f.den),
                "endpoint_multiplicities": [ma, mb],
                "root_count": n,
            }
        )
    else:
        slot = used.bit_length() - 1
        rep = Reparametrization(ring, slot)
        image = rep.apply(expr)
        tower_u, u_lo, u_hi = rep.interval(lo, hi)
        num, ma, mb = strip_endpoint_roots(image.numerator, u_lo, u_hi)
        n = count_roots(num, u_lo, u_hi)
        factor_counts = []
        for fpoly, _ in image.factors:
            fq, _, _ = strip_endpoint_roots(fpoly, u_lo, u_hi)
            fn = count_roots(fq, u_lo, u_hi)
            if fn:
                raise RootFound(
                    f"denominator factor has {fn} root(s) in the image interval", fn
                )
            factor_counts.append(fn)
        data.update(
            {
                "route": "reparametrized",
                "slot": slot,
                "u_tower": _tower_to_json(tower_u),
                "u_interval": [format_exact(u_lo), format_exact(u_hi)],
                "numerator": _poly_to_json(image.numerator),
                "factors": [[_poly_to_json(fp), e] for fp, e in image.factors],
                "endpoint_multiplicities": [ma, mb],
                "root_count": n,
                "factor_root_counts": factor_counts,
            }
        )
    if n != expected:
        raise ValueError(
            f"certified root count {n} does not match expected {expected}"
        )
    return Certificate("root-count", target, data, True)


# ---------------------------------------------------------------------------
# strict sign along a curve via box coverings
# ---------------------------------------------------------------------------

_WORKER: dict = {}


def _worker_init(payload: str) -> None:
    global _WORKER
    d = json.loads(payload)
    if d["mode"] == "radical":
        ring = _ring_from_json(d["ring"])
        _WORKER = {
            "mode": "radical",
            "ring": ring,
            "lifted": _multipoly_from_json(d["lifted"], ring.tower),
        }
    else:
        tower = _tower_from_json(d["tower"])
        _WORKER = {
            "mode": "polynomial",
            "tower": tower,
            "poly": _multipoly_from_json(d["poly"], tower),
            "curve": _poly_from_json(d["curve"], tower),
        }


def _worker_box_sign(args: tuple[str, str]):
    return _box_sign(_WORKER, mpq(args[0]), mpq(args[1]))


def _plane_box(tower: FieldTower, curve: UniPoly, lo: mpq, hi: mpq) -> Box:
    cands = [curve.evaluate(lo), curve.evaluate(hi)]
    if curve.degree == 2:
        a2 = curve.coeff(2).as_rational()
        a1 = curve.coeff(1).as_rational()
        vertex = -a1 / (2 * a2)
        if lo < vertex < hi:
            cands.append(curve.evaluate(vertex))
    vals = [c.as_rational() for c in cands]
    return Box(
        [
            (tower.from_rational(lo), tower.from_rational(hi)),
            (tower.from_rational(min(vals)), tower.from_rational(max(vals))),
        ]
    )


def _box_sign(state: dict, lo: mpq, hi: mpq):
    if state["mode"] == "radical":
        _, box = curve_box(state["ring"], lo, hi)
        poly = state["lifted"]
    else:
        box = _plane_box(state["tower"], state["curve"], lo, hi)
        poly = state["poly"]
    s = strict_sign_on_box(poly, box)
    bounds = [[format_exact(a), format_exact(b)] for a, b in box.bounds]
    return s, bounds


def _cover_interval(state, payload, lo, hi, max_depth, workers):
    """Adaptive bisection until every box certifies; deterministic output."""
    frontier = [(lo, hi, 0)]
    blocks = []
    pool = None
    try:
        if workers > 1:
            pool = ProcessPoolExecutor(
                max_workers=workers, initializer=_worker_init, initargs=(payload,)
            )
        while frontier:
            if pool is not None and len(frontier) > 1:
                results = list(
                    pool.map(
                        _worker_box_sign,
                        [(str(a), str(b)) for a, b, _ in frontier],
                    )
                )
            else:
                results = [_box_sign(state, a, b) for a, b, _ in frontier]
            nxt = []
            for (a, b, depth), (s, bounds) in zip(frontier, results):
                if s is None:
                    if depth >= max_depth:
                        raise DepthExceeded(
                            f"no certified sign on [{a}, {b}] at depth {depth}",
                            (a, b),
                        )
                    m = (a + b) / 2
                    nxt.append((a, m, depth + 1))
                    nxt.append((m, b, depth + 1))
                else:
                    blocks.append(
                        {
                            "lo": str(a),
                            "hi": str(b),
                            "depth": depth,
                            "box_sign": s,
                            "bounds": bounds,
                        }
                    )
            frontier = nxt
    finally:
        if pool is not None:
            pool.shutdown()
    blocks.sort(key=lambda blk: mpq(blk["lo"]))
    signs = {blk["box_sign"] for blk in blocks}
    if len(signs) != 1:
        raise RuntimeError("adjacent boxes certified opposite signs")
    return blocks, signs.pop()


def certify_sign_on_curve(
    expr: RadicalExpr,
    claimed: int | None = None,
    lo=0,
    hi=1,
    max_depth: int = 16,
    workers: int = 1,
    target: str = "",
) -> Certificate:
    """Certify a strict sign of ``expr`` on ``(lo, hi)`` by box covering.

    The cleared numerator of ``expr`` is a polynomial in ``t`` plus one
    variable per radical; closed boxes enclosing the radical curve are
    bisected at rational midpoints until a Möbius coefficient test pins a
    sign on every piece, and the cleared denominator's fixed atom signs
    convert that into the expression's sign.  Works for any number of
    radicals.  Raises :class:`DepthExceeded` when some sub-interval never
    certifies.  The result is independent of ``workers``.
    """
    ring = expr.ring
    lo, hi = mpq(lo), mpq(hi)
    if not 0 <= lo < hi <= 1:
        raise ValueError("interval must sit inside [0, 1]")
    if expr.is_zero:
        raise ValueError("cannot certify a sign for the zero expression")
    lifted, dens = lift(expr)
    data = {
        "mode": "radical",
        "ring": _ring_to_json(ring),
        "expr": _expr_to_json(expr),
        "interval": [str(lo), str(hi)],
        "max_depth": int(max_depth),
        "lifted": _multipoly_to_json(lifted),
        "dens": list(dens),
    }
    payload = json.dumps(
        {"mode": "radical", "ring": data["ring"], "lifted": data["lifted"]},
        sort_keys=True,
    )
    state = {"mode": "radical", "ring": ring, "lifted": lifted}
    blocks, box_sign = _cover_interval(
        state, payload, lo, hi, int(max_depth), int(workers)
    )
    prod = 1
    for i, e in enumerate(dens):
        prod *= ring.atom_signs[i] ** e
    sign = box_sign * prod
    data.update({"blocks": blocks, "atom_sign_product": prod, "sign": sign})
    if claimed is not None and sign != claimed:
        raise ValueError(f"certified sign {sign} does not match claimed {claimed}")
    return Certificate("box-covering", target, data, True)


def certify_sign_on_plane_curve(
    poly: MultiPoly,
    curve: UniPoly,
    claimed: int | None = None,
    lo=0,
    hi=1,
    max_depth: int = 16,
    workers: int = 1,
    target: str = "",
) -> Certificate:
    """Certify a strict sign of a bivariate polynomial along ``y = curve(x)``.

    Same covering engine as :func:`certify_sign_on_curve`, but the second
    box coordinate encloses the exact range of an explicit polynomial arc
    of degree at most two instead of a square root.
    """
    if poly.nvars != 2:
        raise ValueError("plane-curve covering needs a bivariate polynomial")
    if curve.degree > 2:
        raise ValueError("curves of degree > 2 are not boxed")
    for c in curve.coeffs:
        if not c.is_rational:
            raise ValueError("curve coefficients must be rational")
    lo, hi = mpq(lo), mpq(hi)
    if not lo < hi:
        raise ValueError("interval endpoints out of order")
    tower = poly.tower
    data = {
        "mode": "polynomial",
        "tower": _tower_to_json(tower),
        "poly": _multipoly_to_json(poly),
        "curve": _poly_to_json(curve),
        "interval": [str(lo), str(hi)],
        "max_depth": int(max_depth),
    }
    payload = json.dumps(
        {
            "mode": "polynomial",
            "tower": data["tower"],
            "poly": data["poly"],
            "curve": data["curve"],
        },
        sort_keys=True,
    )
    state = {"mode": "polynomial", "tower": tower, "poly": poly, "curve": curve}
    blocks, sign = _cover_interval(
        state, payload, lo, hi, int(max_depth), int(workers)
    )
    data.update({"blocks": blocks, "sign": sign})
    if claimed is not None and sign != claimed:
        raise ValueError(f"certified sign {sign} does not match claimed {claimed}")
    return Certificate("box-covering", target, data, True)


# ---------------------------------------------------------------------------
# one-sided limits at interval endpoints
# ---------------------------------------------------------------------------


def certify_endpoint_limit(
    numer: RadicalExpr,
    denom: RadicalExpr,
    point,
    side: str | None = None,
    target: str = "",
) -> Certificate:
    """Certify the one-sided limit of ``numer / denom`` at ``point``.

    Both expressions are expanded exactly around the endpoint; comparing
    leading exponents yields a conclusion among ``"+inf"``, ``"-inf"``,
    ``"finite"`` and ``"zero"``, together with the limit's sign (0 for a
    zero limit).  ``side`` defaults to ``"left"`` at 1 and ``"right"``
    elsewhere.
    """
    if isinstance(numer, UniPoly) and isinstance(denom, RadicalExpr):
        numer = denom.ring.poly(numer)
    if isinstance(denom, UniPoly) and isinstance(numer, RadicalExpr):
        denom = numer.ring.poly(denom)
    if numer.ring is not denom.ring:
        raise ValueError("numerator and denominator live in different rings")
    point = mpq(point)
    if side is None:
        side = "left" if point == 1 else "right"
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    tn, order_n, lead_n = numer.laurent_at(point)
    td, order_d, lead_d = denom.laurent_at(point)
    sn, sd = sign_of(lead_n), sign_of(lead_d)
    k = order_n - order_d
    flip = -1 if side == "left" and k % 2 else 1
    sign = sn * sd * flip
    if k > 0:
        conclusion, sign = "zero", 0
    elif k == 0:
        conclusion = "finite"
    else:
        conclusion = "+inf" if sign > 0 else "-inf"
    data = {
        "ring": _ring_to_json(numer.ring),
        "numerator": _expr_to_json(numer),
        "denominator": _expr_to_json(denom),
        "point": str(point),
        "side": side,
        "orders": [order_n, order_d],
        "leading_towers": [_tower_to_json(tn), _tower_to_json(td)],
        "leading": [format_exact(lead_n), format_exact(lead_d)],
        "leading_signs": [sn, sd],
        "conclusion": conclusion,
        "sign": sign,
    }
    return Certificate("endpoint-limit", target, data, True)


# ---------------------------------------------------------------------------
# determinants affine in the mass parameter
# ---------------------------------------------------------------------------


def det_affine(block: ParamMatrix) -> tuple[RadicalExpr, RadicalExpr]:
    """Split ``det(const + c * linear)`` of a 2x2 block as ``slope * c + intercept``.

    Raises :class:`NotAffine` when the ``c**2`` coefficient fails to
    cancel identically.
    """
    if block.shape != (2, 2):
        raise ValueError("determinant split needs a 2x2 block")
    a11, b11 = block.entry(0, 0)
    a12, b12 = block.entry(0, 1)
    a21, b21 = block.entry(1, 0)
    a22, b22 = block.entry(1, 1)
    quad = b11 * b22 - b12 * b21
    if not quad.is_zero:
        raise NotAffine("determinant is quadratic in the mass parameter")
    slope = a11 * b22 + b11 * a22 - a12 * b21 - b12 * a21
    intercept = a11 * a22 - a12 * a21
    return slope, intercept


def mass_ratio_at(block: ParamMatrix, t0, tower: FieldTower | None = None):
    """Exact singular-parameter data of a 2x2 block at rational ``t0``.

    Solves ``slope(t0) * c + intercept(t0) = 0`` for the unique ``c``
    making the block singular, then reads the kernel's component ratio
    off the first row.  Returns ``(tower, c_value, ratio)`` with the
    tower extended by whatever square roots the evaluation needs.
    """
    t0 = mpq(t0)
    slope, intercept = det_affine(block)
    tower = tower or block.const[0, 0].ring.tower
    tower, s_val = slope.evaluate(t0, tower)
    tower, i_val = intercept.evaluate(t0, tower)
    if s_val.is_zero:
        raise DenominatorZero("determinant slope vanishes at the sample point")
    c0 = -i_val / s_val
    m = []
    for j in (0, 1):
        const, linear = block.entry(0, j)
        tower, cv = const.evaluate(t0, tower)
        tower, lv = linear.evaluate(t0, tower)
        m.append(cv + lv * c0)
    if m[0].is_zero:
        raise DenominatorZero("leading entry vanishes at the singular parameter")
    return tower, c0, -m[1] / m[0]


def isolate_sign_change(sign_at, lo, hi, max_width=mpq(1, 10**6)) -> IntervalQ:
    """Bisect ``[lo, hi]`` down to ``max_width`` around a sign change.

    ``sign_at`` must be exact (values in {-1, 0, +1}) and the endpoints
    must have strictly opposite signs; hitting an exact zero returns the
    degenerate interval at that point.
    """
    lo, hi = mpq(lo), mpq(hi)
    s_lo, s_hi = sign_at(lo), sign_at(hi)
    if s_lo == 0:
        return IntervalQ(lo, lo)
    if s_hi == 0:
        return IntervalQ(hi, hi)
    if s_lo * s_hi != -1:
        raise ValueError("endpoints must have opposite signs")
    while hi - lo > max_width:
        mid = (lo + hi) / 2
        s = sign_at(mid)
        if s == 0:
            return IntervalQ(mid, mid)
        if s == s_lo:
            lo = mid
        else:
            hi = mid
    return IntervalQ(lo, hi)


# ---------------------------------------------------------------------------
# trivial kernels of tall parameter-dependent blocks
# ---------------------------------------------------------------------------


def certify_sign(
    expr,
    lo=0,
    hi=1,
    max_depth: int = 16,
    workers: int = 1,
    target: str = "",
) -> Certificate:
    """Sign certificate by the cheapest sound route for this expression.

    Expressions built from a single radical go through the Sturm-based
    univariate certifier; anything else falls back to the adaptive
    box-covering argument.
    """
    used = 0
    for m in expr.terms:
        used |= m
    if not used & (used - 1):
        try:
            return certify_sign_univariate(expr, lo=lo, hi=hi, target=target)
        except NotSingleRadical:
            pass
    return certify_sign_on_curve(
        expr, lo=lo, hi=hi, max_depth=max_depth, workers=workers, target=target
    )


def kernel_trivial_rect(
    block: ParamMatrix,
    lo=0,
    hi=1,
    max_depth: int = 16,
    workers: int = 1,
    target: str = "",
) -> Certificate:
    """Certify that a tall two-column block has full rank for all ``(t, c)``.

    A nonzero kernel would force every two-row minor to vanish, so it
    suffices to rule the minors out jointly.  Strategy ``"a"`` scans the
    row pairs in order for a minor free of the parameter ``c`` and
    certifies its sign on the whole interval.  Strategy ``"b"`` picks a
    first minor ``slope * c + intercept`` whose slope never vanishes —
    pinning ``c`` on any would-be kernel — and then certifies that
    eliminating ``c`` from a second minor leaves a nowhere-zero
    resolvent; first minors are scanned radical-free candidates first,
    second minors in plain row-pair order.  Failed attempts are recorded
    in the certificate, and :class:`StrategyExhausted` lists them when
    nothing works.
    """
    nrows, ncols = block.shape
    if ncols != 2 or nrows < 3:
        raise ValueError("kernel certification needs a tall two-column block")
    lo, hi = mpq(lo), mpq(hi)
    ring = block.const[0, 0].ring
    pairs = [(i, j) for i in range(nrows) for j in range(i + 1, nrows)]
    minors = {}
    for i, j in pairs:
        ai1, bi1 = block.entry(i, 0)
        ai2, bi2 = block.entry(i, 1)
        aj1, bj1 = block.entry(j, 0)
        aj2, bj2 = block.entry(j, 1)
        quad = bi1 * bj2 - bi2 * bj1
        slope = ai1 * bj2 + bi1 * aj2 - ai2 * bj1 - bi2 * aj1
        intercept = ai1 * aj2 - ai2 * aj1
        minors[(i, j)] = (quad, slope, intercept)
    data = {
        "ring": _ring_to_json(ring),
        "const": [
            [_expr_to_json(block.const[i, j]) for j in range(2)]
            for i in range(nrows)
        ],
        "linear": [
            [_expr_to_json(block.linear[i, j]) for j in range(2)]
            for i in range(nrows)
        ],
        "interval": [str(lo), str(hi)],
    }
    tried: list[dict] = []
    for pair in pairs:
        quad, slope, intercept = minors[pair]
        if not (quad.is_zero and slope.is_zero):
            continue
        if intercept.is_zero:
            tried.append({"pair": list(pair), "reason": "minor vanishes identically"})
            continue
        try:
            child = certify_sign(
                intercept, lo, hi, max_depth, workers, f"minor {pair}"
            )
        except (RootFound, DepthExceeded, NotSingleRadical) as exc:
            tried.append({"pair": list(pair), "reason": str(exc)})
            continue
        data.update(
            {
                "strategy": "a",
                "pair": list(pair),
                "tried": tried,
                "minor_certificate": child.to_json(),
            }
        )
        return Certificate("kernel-trivial", target, data, True)

    def radical_cost(pair):
        _, slope, intercept = minors[pair]
        masks = {m for m in slope.terms if m} | {m for m in intercept.terms if m}
        return len(masks)

    for first in sorted(pairs, key=lambda pr: (radical_cost(pr), pr)):
        quad1, slope1, intercept1 = minors[first]
        if not quad1.is_zero:
            tried.append(
                {
                    "pair": list(first),
                    "reason": "minor is quadratic in the parameter",
                }
            )
            continue
        if slope1.is_zero:
            continue  # parameter-free minors belong to strategy "a"
        try:
            slope_cert = certify_sign(
                slope1, lo, hi, max_depth, workers, f"minor {first} slope"
            )
        except (RootFound, DepthExceeded, NotSingleRadical) as exc:
            tried.append({"pair": list(first), "reason": f"slope: {exc}"})
            continue
        for second in pairs:
            if second == first:
                continue
            quad2, slope2, intercept2 = minors[second]
            if not quad2.is_zero:
                tried.append(
                    {
                        "pair": list(second),
                        "reason": "minor is quadratic in the parameter",
                    }
                )
                continue
            resolvent = slope1 * intercept2 - slope2 * intercept1
            if resolvent.is_zero:
                tried.append(
                    {"pair": list(second), "reason": "resolvent vanishes identically"}
                )
                continue
            try:
                res_cert = certify_sign(
                    resolvent,
                    lo,
                    hi,
                    max_depth,
                    workers,
                    f"resolvent {first}/{second}",
                )
            except (RootFound, DepthExceeded, NotSingleRadical) as exc:
                tried.append(
                    {
                        "pair": list(second),
                        "reason": f"resolvent with {list(first)}: {exc}",
                    }
                )
                continue
            data.update(
                {
                    "strategy": "b",
                    "pair": list(first),
                    "second_pair": list(second),
                    "tried": tried,
                    "slope_certificate": slope_cert.to_json(),
                    "resolvent_certificate": res_cert.to_json(),
                }
            )
            return Certificate("kernel-trivial", target, data, True)
        tried.append(
            {"pair": list(first), "reason": "no resolvent partner certified"}
        )
    raise StrategyExhausted("no minor combination certifies a trivial kernel", tried)


# ---------------------------------------------------------------------------
# replay
# ---------------------------------------------------------------------------


def _rederive(cert: Certificate) -> Certificate:
    d = cert.data
    if cert.kind == "sturm-count":
        ring = _ring_from_json(d["ring"])
        expr = _expr_from_json(d["expr"], ring)
        lo, hi = (mpq(s) for s in d["interval"])
        return certify_sign_univariate(expr, lo=lo, hi=hi, target=cert.target)
    if cert.kind == "root-count":
        ring = _ring_from_json(d["ring"])
        expr = _expr_from_json(d["expr"], ring)
        lo, hi = (mpq(s) for s in d["interval"])
        return certify_root_count(
            expr, d["expected"], lo=lo, hi=hi, target=cert.target
        )
    if cert.kind == "box-covering":
        lo, hi = (mpq(s) for s in d["interval"])
        if d["mode"] == "radical":
            ring = _ring_from_json(d["ring"])
            expr = _expr_from_json(d["expr"], ring)
            return certify_sign_on_curve(
                expr, lo=lo, hi=hi, max_depth=d["max_depth"], target=cert.target
            )
        tower = _tower_from_json(d["tower"])
        poly = _multipoly_from_json(d["poly"], tower)
        curve = _poly_from_json(d["curve"], tower)
        return certify_sign_on_plane_curve(
            poly, curve, lo=lo, hi=hi, max_depth=d["max_depth"], target=cert.target
        )
    if cert.kind == "endpoint-limit":
        ring = _ring_from_json(d["ring"])
        numer = _expr_from_json(d["numerator"], ring)
        denom = _expr_from_json(d["denominator"], ring)
        return certify_endpoint_limit(
            numer, denom, mpq(d["point"]), side=d["side"], target=cert.target
        )
    if cert.kind == "kernel-trivial":
        ring = _ring_from_json(d["ring"])
        const = Matrix(
            [[_expr_from_json(e, ring) for e in row] for row in d["const"]]
        )
        linear = Matrix(
            [[_expr_from_json(e, ring) for e in row] for row in d["linear"]]
        )
        lo, hi = (mpq(s) for s in d["interval"])
        return kernel_trivial_rect(
            ParamMatrix(const, linear), lo=lo, hi=hi, target=cert.target
        )
    raise ReplayError(f"unknown certificate kind {cert.kind!r}")


def replay(cert) -> Certificate:
    """Re-derive a stored certificate from its own data and compare exactly.

    Accepts a :class:`Certificate` or a path to one saved as JSON; raises
    :class:`ReplayError` when the fresh derivation differs in any field,
    and returns the fresh certificate otherwise.
    """
    if not isinstance(cert, Certificate):
        cert = Certificate.load(cert)
    fresh = _rederive(cert)
    if fresh.to_json() != cert.to_json():
        raise ReplayError(f"stored {cert.kind!r} certificate does not reproduce")
    return fresh
