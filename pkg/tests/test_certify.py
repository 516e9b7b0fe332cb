"""Certificate construction, verification and replay."""

import random

import pytest
from gmpy2 import mpq

from symcert.certify import (
    Certificate,
    DenominatorZero,
    DepthExceeded,
    NotAffine,
    ReplayError,
    RootFound,
    StrategyExhausted,
    certify_endpoint_limit,
    certify_sign_on_curve,
    certify_sign_on_plane_curve,
    certify_sign_univariate,
    det_affine,
    isolate_sign_change,
    kernel_trivial_rect,
    mass_ratio_at,
    replay,
)
from symcert.fields import FieldTower, format_exact, sign_of
from symcert.linalg import Matrix
from symcert.model import NotSingleRadical, ParamMatrix, RadicalRing
from symcert.polys import Box, MultiPoly, UniPoly, restrict_box


@pytest.fixture(scope="module")
def norad():
    tower = FieldTower.rationals()
    return RadicalRing(tower, [])


@pytest.fixture(scope="module")
def qring():
    tower = FieldTower((3, 2))
    return RadicalRing(tower, [UniPoly(tower, [3, 2, 3])])


def _poly(ring, coeffs):
    return ring.poly(UniPoly(ring.tower, coeffs))


# ---------------------------------------------------------------------------
# sign certificates on an interval (Sturm route)
# ---------------------------------------------------------------------------


def test_univariate_rational_sign(norad):
    expr = _poly(norad, [1, 0, 1]) * norad.atom_reciprocal(0) * norad.atom_reciprocal(1)
    cert = certify_sign_univariate(expr, claimed=1)
    assert cert.kind == "sturm-count"
    assert cert.verified
    assert cert.data["route"] == "rational"
    assert cert.data["root_count"] == 0
    assert cert.data["den"] == [1, 1, 0]
    assert cert.data["sign"] == 1


def test_univariate_rational_rootfound(norad):
    expr = _poly(norad, [-1, 2]) * norad.atom_reciprocal(2)
    with pytest.raises(RootFound) as info:
        certify_sign_univariate(expr)
    assert info.value.count == 1


def test_univariate_strips_endpoint_roots(norad):
    # t (t - 1) (t + 2) vanishes at both endpoints but not inside
    expr = _poly(norad, [0, -2, 1, 1])
    cert = certify_sign_univariate(expr)
    assert cert.data["endpoint_multiplicities"] == [1, 1]
    assert cert.data["sign"] == -1


def test_univariate_reparametrized_positive(qring):
    expr = qring.sqrt_radical(0) + 3 * qring.var()
    cert = certify_sign_univariate(expr, claimed=1)
    assert cert.data["route"] == "reparametrized"
    assert cert.data["slot"] == 0
    tower = qring.tower
    root2 = tower.express_sqrt(2)
    root3 = tower.express_sqrt(3)
    assert cert.data["u_interval"] == [format_exact(root2), format_exact(root2 + root3)]
    assert cert.data["factors"] == [[["0", "1"], 1]]
    assert cert.data["root_count"] == 0


def test_univariate_reparametrized_rootfound(qring):
    # sqrt(q) = 3t exactly where q - 9 t**2 = -6 t**2 + 2 t + 3 vanishes
    expr = qring.sqrt_radical(0) - 3 * qring.var()
    with pytest.raises(RootFound) as info:
        certify_sign_univariate(expr)
    assert info.value.count == 1


def test_univariate_strips_factor_roots(qring):
    # denominator atoms t and t - 1 hit the ends of the image interval
    expr = qring.sqrt_radical(0) * qring.atom_reciprocal(0) * qring.atom_reciprocal(2)
    cert = certify_sign_univariate(expr)
    assert cert.data["sign"] == -1
    assert cert.data["factor_root_counts"] == [0, 0]


def test_univariate_rejects_two_radicals():
    tower = FieldTower((3, 2))
    ring = RadicalRing(
        tower, [UniPoly(tower, [3, 2, 3]), UniPoly(tower, [3, -2, 3])]
    )
    with pytest.raises(NotSingleRadical):
        certify_sign_univariate(ring.sqrt_radical(0) + ring.sqrt_radical(1))


def test_univariate_claimed_mismatch(qring):
    expr = qring.sqrt_radical(0) + 3 * qring.var()
    with pytest.raises(ValueError, match="claimed"):
        certify_sign_univariate(expr, claimed=-1)


def test_sturm_replay_roundtrip(tmp_path, qring):
    expr = qring.sqrt_radical(0) * qring.atom_reciprocal(0) * qring.atom_reciprocal(2)
    cert = certify_sign_univariate(expr)
    path = tmp_path / "cert.json"
    cert.save(path)
    loaded = Certificate.load(path)
    assert loaded.dumps() == cert.dumps()
    fresh = replay(loaded)
    assert fresh.to_json() == cert.to_json()
    assert replay(str(path)).to_json() == cert.to_json()
    loaded.data["sign"] = -loaded.data["sign"]
    with pytest.raises(ReplayError):
        replay(loaded)


# ---------------------------------------------------------------------------
# sign certificates along the radical curve (covering route)
# ---------------------------------------------------------------------------


def test_covering_matches_univariate(qring):
    t = qring.var()
    sq = qring.sqrt_radical(0)
    for expr in [
        sq + 3 * t,
        2 - sq * qring.atom_reciprocal(1),
        sq * (t + 1) - t,
    ]:
        uni = certify_sign_univariate(expr)
        cov = certify_sign_on_curve(expr, max_depth=10)
        assert cov.kind == "box-covering"
        assert cov.data["sign"] == uni.data["sign"]
        blocks = cov.data["blocks"]
        assert blocks[0]["lo"] == "0" and blocks[-1]["hi"] == "1"
        for left, right in zip(blocks, blocks[1:]):
            assert left["hi"] == right["lo"]


def test_covering_denominator_signs(qring):
    expr = qring.sqrt_radical(0) * qring.atom_reciprocal(0) * qring.atom_reciprocal(2)
    cert = certify_sign_on_curve(expr, claimed=-1)
    assert cert.data["dens"] == [1, 0, 1, 0]
    assert cert.data["atom_sign_product"] == -1
    assert len(cert.data["blocks"]) == 1
    assert cert.data["blocks"][0]["box_sign"] == 1


def test_covering_depth_exceeded(qring):
    expr = qring.sqrt_radical(0) - 3 * qring.var()
    with pytest.raises(DepthExceeded) as info:
        certify_sign_on_curve(expr, max_depth=5)
    lo, hi = info.value.interval
    assert 0 <= lo < hi <= 1
    assert hi - lo == mpq(1, 32)


def test_covering_worker_determinism(qring):
    expr = 2 - qring.sqrt_radical(0) * qring.atom_reciprocal(1)
    serial = certify_sign_on_curve(expr, max_depth=10)
    pooled = certify_sign_on_curve(expr, max_depth=10, workers=2)
    assert serial.dumps() == pooled.dumps()


def test_covering_replay_roundtrip(tmp_path, qring):
    expr = qring.sqrt_radical(0) + 3 * qring.var()
    cert = certify_sign_on_curve(expr)
    path = tmp_path / "covering.json"
    cert.save(path)
    fresh = replay(str(path))
    assert fresh.dumps() == cert.dumps()


# ---------------------------------------------------------------------------
# sign certificates along an explicit parabolic arc
# ---------------------------------------------------------------------------

# The demonstration sextic pair: A = 49 y**2 - x**2 stays positive above the
# arc, B is a sum of squares, and the product A**3 B**3 (scaled by the
# constant making the printed version integral) is certified positive along
# y = (x - 7/10)**2 + 1/4 by a depth-two covering, while the single box over
# [0, 1] fails.  Restrictions to the printed boxes below must reproduce the
# printed integer polynomials exactly after one positive scaling each.

_PLANE_BOXES = [
    (
        (0, mpq(1, 2), mpq(181, 400), mpq(37, 50)),
        160000,
        {
            (2, 2): 1605289, (2, 1): 5250448, (1, 2): 3210578,
            (2, 0): 4293184, (1, 1): 10500896, (0, 2): 1565289,
            (1, 0): 8586368, (0, 1): 5170448, (0, 0): 4253184,
        },
        400,
        {
            (2, 2): 78401, (2, 1): 157032, (1, 2): 44802,
            (2, 0): 91856, (1, 1): 90064, (0, 2): 6401,
            (1, 0): 71712, (0, 1): 13032, (0, 0): 19856,
        },
    ),
    (
        (mpq(1, 4), mpq(1, 2), mpq(29, 100), mpq(181, 400)),
        160000,
        {
            (2, 2): 649344, (2, 1): 2037608, (1, 2): 1278688,
            (2, 0): 1595289, (1, 1): 4035216, (0, 2): 619344,
            (1, 0): 3170578, (0, 1): 1977608, (0, 0): 1565289,
        },
        400,
        {
            (2, 2): 36496, (2, 1): 64672, (1, 2): 36992,
            (2, 0): 32401, (1, 1): 57344, (0, 2): 10496,
            (1, 0): 28802, (0, 1): 12672, (0, 0): 6401,
        },
    ),
    (
        (mpq(1, 2), mpq(3, 4), mpq(1, 4), mpq(29, 100)),
        10000,
        {
            (2, 2): 28125, (2, 1): 66050, (1, 2): 53750,
            (2, 0): 38709, (1, 1): 127100, (0, 2): 25000,
            (1, 0): 74918, (0, 1): 59800, (0, 0): 35584,
        },
        25,
        {
            (2, 2): 800, (2, 1): 1440, (1, 2): 600,
            (2, 0): 656, (1, 1): 880, (0, 2): 425,
            (1, 0): 312, (0, 1): 690, (0, 0): 281,
        },
    ),
    (
        (mpq(3, 4), 1, mpq(101, 400), mpq(17, 50)),
        160000,
        {
            (2, 2): 409849, (2, 1): 1166128, (1, 2): 759698,
            (2, 0): 816304, (1, 1): 2212256, (0, 2): 339849,
            (1, 0): 1572608, (0, 1): 1026128, (0, 0): 746304,
        },
        400,
        {
            (2, 2): 6641, (2, 1): 7752, (1, 2): 17282,
            (2, 0): 2336, (1, 1): 23504, (0, 2): 20641,
            (1, 0): 8672, (0, 1): 35752, (0, 0): 16336,
        },
    ),
]


@pytest.fixture(scope="module")
def plane_curve():
    tower = FieldTower.rationals()
    names = ("u", "v")
    factor_a = MultiPoly(tower, names, {(0, 2): 49, (2, 0): -1})
    factor_b = MultiPoly(
        tower,
        names,
        {(2, 0): 400, (1, 0): -560, (0, 2): 400, (0, 1): -360, (0, 0): 277},
    )
    sextic = factor_a**3 * factor_b**3 * mpq(1, 7529536000000)
    arc = UniPoly(tower, [mpq(37, 50), mpq(-7, 5), 1])
    return tower, factor_a, factor_b, sextic, arc


def test_plane_curve_depth_two(plane_curve):
    tower, _, _, sextic, arc = plane_curve
    cert = certify_sign_on_plane_curve(sextic, arc, claimed=1, max_depth=2)
    blocks = cert.data["blocks"]
    assert [b["depth"] for b in blocks] == [1, 2, 2]
    assert [(b["lo"], b["hi"]) for b in blocks] == [
        ("0", "1/2"),
        ("1/2", "3/4"),
        ("3/4", "1"),
    ]
    # every box carries the exact range of the arc over its sub-interval
    assert blocks[0]["bounds"][1] == ["29/100", "37/50"]
    assert blocks[1]["bounds"][1] == ["1/4", "29/100"]
    assert blocks[2]["bounds"][1] == ["101/400", "17/50"]


def test_plane_curve_shallower_fails(plane_curve):
    _, _, _, sextic, arc = plane_curve
    for depth in (0, 1):
        with pytest.raises(DepthExceeded):
            certify_sign_on_plane_curve(sextic, arc, max_depth=depth)


def test_plane_curve_printed_restrictions(plane_curve):
    tower, factor_a, factor_b, _, _ = plane_curve
    names = ("u", "v")
    for bounds, scale_a, frozen_a, scale_b, frozen_b in _PLANE_BOXES:
        lo_u, hi_u, lo_v, hi_v = (mpq(x) for x in bounds)
        box = Box(
            [
                (tower.from_rational(lo_u), tower.from_rational(hi_u)),
                (tower.from_rational(lo_v), tower.from_rational(hi_v)),
            ]
        )
        for factor, scale, frozen in [
            (factor_a, scale_a, frozen_a),
            (factor_b, scale_b, frozen_b),
        ]:
            restricted = restrict_box(factor, box) * scale
            assert restricted == MultiPoly(tower, names, frozen)
            assert all(sign_of(c) == 1 for c in restricted.terms.values())


def test_plane_curve_replay(tmp_path, plane_curve):
    _, _, _, sextic, arc = plane_curve
    cert = certify_sign_on_plane_curve(sextic, arc, max_depth=2)
    path = tmp_path / "plane.json"
    cert.save(path)
    assert replay(str(path)).dumps() == cert.dumps()


# ---------------------------------------------------------------------------
# endpoint limits
# ---------------------------------------------------------------------------


def test_endpoint_limit_infinite(qring):
    t = qring.var()
    numer = (t + 1) * qring.atom_reciprocal(2, 2)
    cert = certify_endpoint_limit(numer, qring.one(), 1)
    assert cert.data["conclusion"] == "+inf"
    assert cert.data["orders"] == [-2, 0]
    assert cert.data["sign"] == 1
    # odd order difference flips the sign approaching from the left
    denom = qring.atom_reciprocal(2)
    cert = certify_endpoint_limit(numer, denom, 1)
    assert cert.data["conclusion"] == "-inf"
    assert cert.data["sign"] == -1


def test_endpoint_limit_zero_and_finite(qring):
    t = qring.var()
    cert = certify_endpoint_limit(t + 1, qring.atom_reciprocal(2), 1)
    assert cert.data["conclusion"] == "zero"
    assert cert.data["sign"] == 0
    cert = certify_endpoint_limit(t + 1, qring.constant(3), 1)
    assert cert.data["conclusion"] == "finite"
    assert cert.data["sign"] == 1


def test_endpoint_limit_radical_cancellation(qring):
    # sqrt(q) - sqrt(q(1)) vanishes to first order at t = 1
    root8 = qring.tower.express_sqrt(8)
    numer = qring.sqrt_radical(0) - qring.constant(root8)
    denom = qring.var() - 1
    cert = certify_endpoint_limit(numer, denom, 1)
    assert cert.data["conclusion"] == "finite"
    assert cert.data["orders"] == [1, 1]
    assert cert.data["sign"] == 1
    assert cert.data["leading"][0] == format_exact(qring.tower.express_sqrt(2))


def test_endpoint_limit_replay(tmp_path, qring):
    numer = (qring.var() + 1) * qring.atom_reciprocal(2, 2)
    cert = certify_endpoint_limit(numer, qring.one(), 1)
    path = tmp_path / "limit.json"
    cert.save(path)
    assert replay(str(path)).to_json() == cert.to_json()


# ---------------------------------------------------------------------------
# determinants affine in the parameter, and singular-parameter data
# ---------------------------------------------------------------------------


def _param_block(ring, const_rows, linear_rows):
    return ParamMatrix(Matrix(const_rows), Matrix(linear_rows))


def test_det_affine_constant_block(norad):
    one, zero = norad.one(), norad.zero()
    block = _param_block(norad, [[one, zero], [zero, one]], [[zero] * 2] * 2)
    slope, intercept = det_affine(block)
    assert slope.is_zero
    assert intercept == norad.one()


def test_det_affine_rejects_quadratic(norad):
    one, zero = norad.one(), norad.zero()
    eye = [[one, zero], [zero, one]]
    with pytest.raises(NotAffine):
        det_affine(_param_block(norad, eye, eye))


def test_det_affine_synthetic(norad):
    t = norad.poly([0, 1])
    one, zero = norad.one(), norad.zero()
    block = _param_block(
        norad,
        [[one, norad.constant(2)], [zero, t]],
        [[t, zero], [norad.constant(3), zero]],
    )
    slope, intercept = det_affine(block)
    assert slope == t * t - 6
    assert intercept == t


def test_det_affine_consistency_random(qring):
    t = qring.poly([0, 1])
    sq = qring.sqrt_radical(0)
    block = _param_block(
        qring,
        [[sq, qring.atom_reciprocal(0)], [t - 1, sq * (t + 1)]],
        [[qring.one(), t], [qring.constant(2), 2 * t]],
    )
    slope, intercept = det_affine(block)
    rng = random.Random(4181)
    for _ in range(50):
        t0 = mpq(rng.randint(1, 99), 100)
        c0 = mpq(rng.randint(-9, 9), rng.randint(1, 9))
        m = block.at(c0)
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        tower, lhs = det.evaluate(t0)
        tower, s_val = slope.evaluate(t0, tower)
        tower, i_val = intercept.evaluate(t0, tower)
        assert lhs == s_val * c0 + i_val


def test_mass_ratio_at_synthetic(norad):
    t = norad.poly([0, 1])
    one, zero = norad.one(), norad.zero()
    block = _param_block(
        norad,
        [[one, norad.constant(2)], [zero, t]],
        [[t, zero], [norad.constant(3), zero]],
    )
    tower, c0, ratio = mass_ratio_at(block, mpq(1, 2))
    assert c0.as_rational() == mpq(2, 23)
    assert ratio.as_rational() == mpq(-23, 12)


def test_mass_ratio_degenerate_slope(norad):
    t = norad.poly([0, 1])
    one, zero = norad.one(), norad.zero()
    block = _param_block(
        norad,
        [[one, zero], [one, one]],
        [[zero, zero], [zero, one - 2 * t]],
    )
    with pytest.raises(DenominatorZero, match="slope"):
        mass_ratio_at(block, mpq(1, 2))


def test_mass_ratio_degenerate_entry(norad):
    t = norad.var()
    one, zero = norad.one(), norad.zero()
    block = _param_block(
        norad,
        [[zero, one], [zero, norad.constant(3)]],
        [[one, zero], [zero, zero]],
    )
    with pytest.raises(DenominatorZero, match="entry"):
        mass_ratio_at(block, mpq(1, 2))


def test_isolate_sign_change():
    tower = FieldTower.rationals()
    p = UniPoly(tower, [-2, 0, 1])
    enclosure = isolate_sign_change(
        lambda x: sign_of(p.evaluate(x)), 1, 2, max_width=mpq(1, 10**8)
    )
    assert enclosure.lo**2 < 2 < enclosure.hi**2
    assert enclosure.width <= mpq(1, 10**8)
    exact = isolate_sign_change(lambda x: (x > mpq(1, 2)) - (x < mpq(1, 2)), 0, 1)
    assert exact.lo == exact.hi == mpq(1, 2)
    with pytest.raises(ValueError, match="opposite"):
        isolate_sign_change(lambda x: 1, 0, 1)


# ---------------------------------------------------------------------------
# trivial kernels of tall blocks
# ---------------------------------------------------------------------------


def test_kernel_trivial_strategy_a(norad):
    t = norad.poly([0, 1])
    one, zero = norad.one(), norad.zero()
    block = _param_block(
        norad,
        [[one, t], [zero, one], [zero, t + 2]],
        [[zero, zero], [one, zero], [zero, zero]],
    )
    cert = kernel_trivial_rect(block)
    assert cert.kind == "kernel-trivial"
    assert cert.data["strategy"] == "a"
    assert cert.data["pair"] == [0, 2]
    assert cert.data["tried"] == []
    assert cert.data["minor_certificate"]["data"]["sign"] == 1


def test_kernel_trivial_strategy_b(norad):
    t = norad.poly([0, 1])
    one, zero = norad.one(), norad.zero()
    block = _param_block(
        norad,
        [[zero, one], [norad.constant(2), t], [norad.constant(3), one]],
        [[zero, zero], [one, zero], [t, zero]],
    )
    cert = kernel_trivial_rect(block)
    assert cert.data["strategy"] == "b"
    assert cert.data["pair"] == [0, 1]
    assert cert.data["second_pair"] == [0, 2]
    assert cert.data["slope_certificate"]["data"]["sign"] == -1
    assert cert.data["resolvent_certificate"]["data"]["sign"] == 1


def test_kernel_trivial_exhausted(norad):
    # rank drops at t = 1/2, c = -2, so every strategy must fail
    t = norad.poly([0, 1])
    one, zero = norad.one(), norad.zero()
    block = _param_block(
        norad,
        [[zero, one], [norad.constant(2), t], [one, one]],
        [[zero, zero], [one, zero], [t, zero]],
    )
    with pytest.raises(StrategyExhausted) as info:
        kernel_trivial_rect(block)
    reasons = [entry["reason"] for entry in info.value.tried]
    assert any("resolvent" in reason for reason in reasons)
    assert any("no resolvent partner" in reason for reason in reasons)


def test_kernel_trivial_replay(tmp_path, norad):
    t = norad.poly([0, 1])
    one, zero = norad.one(), norad.zero()
    block = _param_block(
        norad,
        [[zero, one], [norad.constant(2), t], [norad.constant(3), one]],
        [[zero, zero], [one, zero], [t, zero]],
    )
    cert = kernel_trivial_rect(block)
    path = tmp_path / "kernel.json"
    cert.save(path)
    assert replay(str(path)).dumps() == cert.dumps()
