"""Tests for the exact configuration model and its rewriting tools."""

import random
from pathlib import Path

import pytest
from gmpy2 import mpq

import symcert
from symcert.fields import FieldTower, sign_of
from symcert.groups import (
    FiniteGroup,
    GroupData,
    NotEquivariant,
    ValidationFailed,
    load_group_data,
)
from symcert.linalg import Matrix
from symcert.model import (
    CoincidentPositions,
    NotSingleRadical,
    ParamMatrix,
    RadicalExpr,
    RadicalRing,
    RatFunc,
    Reparametrization,
    build_S,
    check_symmetry,
    curve_box,
    lift,
    nested_polyhedron,
)
from symcert.polys import UniPoly

DATA = Path(symcert.__file__).parent / "data"

TET_OUTER = [[0, 1, 3, 2], [0, 2, 1, 3], [1, 0, 3, 2]]
OCT_OUTER = [[2, 3, 1, 0, 4, 5], [2, 3, 4, 5, 0, 1], [1, 0, 3, 2, 5, 4]]
CUBE_OUTER = [[3, 5, 0, 6, 1, 7, 2, 4], [0, 3, 1, 2, 5, 6, 4, 7], [7, 6, 5, 4, 3, 2, 1, 0]]

TET_POSITIONS = [(1, 1, 1), (-1, -1, 1), (-1, 1, -1), (1, -1, -1)]
OCT_POSITIONS = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
CUBE_POSITIONS = [
    (1, 1, 1), (1, 1, -1), (1, -1, 1), (-1, 1, 1),
    (1, -1, -1), (-1, 1, -1), (-1, -1, 1), (-1, -1, -1),
]


def _rat_matrix(rows):
    tower = FieldTower.rationals()
    return Matrix([[tower.from_rational(mpq(v)) for v in row] for row in rows])


TET_ROT = [
    [[0, 1, 0], [1, 0, 0], [0, 0, 1]],
    [[1, 0, 0], [0, 0, 1], [0, 1, 0]],
    [[-1, 0, 0], [0, -1, 0], [0, 0, 1]],
]
OCT_ROT = [
    [[0, -1, 0], [1, 0, 0], [0, 0, 1]],
    [[0, 0, 1], [1, 0, 0], [0, 1, 0]],
    [[-1, 0, 0], [0, -1, 0], [0, 0, -1]],
]


@pytest.fixture(scope="module")
def s4():
    return load_group_data(DATA / "s4.json")


@pytest.fixture(scope="module")
def oh():
    return load_group_data(DATA / "oh.json")


@pytest.fixture(scope="module")
def tetra_ring(s4):
    tower, _ = s4.tower.adjoin(2)
    return RadicalRing(tower, [UniPoly(tower, [3, 2, 3])])


@pytest.fixture(scope="module")
def oct_ring(oh):
    tower, _ = oh.tower.adjoin(2)
    return RadicalRing(tower, [UniPoly(tower, [1, 0, 1])])


@pytest.fixture(scope="module")
def cube_ring(oh):
    tower, _ = oh.tower.adjoin(2)
    return RadicalRing(tower, [UniPoly(tower, [3, 2, 3]), UniPoly(tower, [3, -2, 3])])


@pytest.fixture(scope="module")
def tetra_config(s4, tetra_ring):
    return nested_polyhedron(
        "tetrahedron", s4, tetra_ring, TET_OUTER,
        [_rat_matrix(m) for m in TET_ROT], TET_POSITIONS,
    )


@pytest.fixture(scope="module")
def oct_config(oh, oct_ring):
    return nested_polyhedron(
        "octahedron", oh, oct_ring, OCT_OUTER,
        [_rat_matrix(m) for m in OCT_ROT], OCT_POSITIONS,
    )


@pytest.fixture(scope="module")
def cube_config(oh, cube_ring):
    return nested_polyhedron(
        "cube", oh, cube_ring, CUBE_OUTER,
        [_rat_matrix(m) for m in OCT_ROT], CUBE_POSITIONS,
    )


@pytest.fixture(scope="module")
def tetra_S(tetra_config):
    return build_S(tetra_config)


# ------------------------------------------------------- radical arithmetic


def test_ratfunc_cancels_atom_factors(tetra_ring):
    ring = tetra_ring
    tower = ring.tower
    # (t^2 - 1)/(t + 1) reduces to t - 1
    expr = ring.poly([-1, 0, 1]) * ring.atom_reciprocal(1)
    f = expr.terms[0]
    assert f.num == UniPoly(tower, [-1, 1])
    assert f.den == (0, 0, 0, 0)


def test_ratfunc_addition_aligns_denominators(tetra_ring):
    ring = tetra_ring
    lhs = ring.atom_reciprocal(0) + ring.atom_reciprocal(2)
    rhs = ring.poly([-1, 2]) * ring.atom_reciprocal(0) * ring.atom_reciprocal(2)
    assert lhs == rhs


def test_radical_square_collapses_to_radicand(tetra_ring):
    ring = tetra_ring
    q = ring.radicand(0)
    root = ring.sqrt_radical(0)
    assert root * root == ring.poly(q)
    assert root**3 == ring.poly(q) * root


def test_ring_rejects_interior_roots_and_sign_errors():
    tower = FieldTower((3, 2))
    with pytest.raises(ValueError):
        RadicalRing(tower, [UniPoly(tower, [1, -3, 1])])  # root inside (0, 1)
    with pytest.raises(ValueError):
        RadicalRing(tower, [UniPoly(tower, [-1, 0, -1])])  # negative on (0, 1)


def test_product_rule_random_expressions(cube_ring):
    ring = cube_ring
    tower = ring.tower
    rng = random.Random(24601)

    def rand_expr():
        expr = ring.zero()
        for _ in range(rng.randint(1, 2)):
            num = UniPoly(tower, [rng.randint(-9, 9) for _ in range(3)])
            den = tuple(rng.randint(0, 1) for _ in range(5))
            term = RadicalExpr(ring, {rng.randint(0, 3): RatFunc(ring, num, den)})
            expr = expr + term
        return expr

    for _ in range(20):
        a, b = rand_expr(), rand_expr()
        lhs = (a * b).derivative()
        rhs = a.derivative() * b + a * b.derivative()
        assert lhs == rhs


def test_evaluate_matches_numeric_oracle(cube_ring):
    import mpmath

    ring = cube_ring
    tower = ring.tower
    rng = random.Random(8128)
    mpmath.mp.dps = 40
    for _ in range(25):
        terms = []
        for _ in range(rng.randint(1, 3)):
            coeffs = [rng.randint(-9, 9) for _ in range(3)]
            dens = tuple(rng.randint(0, 1) for _ in range(5))
            mask = rng.randint(0, 3)
            terms.append((coeffs, dens, mask))
        expr = ring.zero()
        for coeffs, dens, mask in terms:
            expr = expr + RadicalExpr(
                ring, {mask: RatFunc(ring, UniPoly(tower, coeffs), dens)}
            )
        t0 = mpq(rng.randint(1, 999), 1000)
        _, val = expr.evaluate(t0)
        tf = mpmath.mpf(t0.numerator) / mpmath.mpf(t0.denominator)
        atom_vals = [tf, tf + 1, tf - 1, 3 * tf**2 + 2 * tf + 3, 3 * tf**2 - 2 * tf + 3]
        oracle = mpmath.mpf(0)
        for coeffs, dens, mask in terms:
            piece = sum(c * tf**k for k, c in enumerate(coeffs))
            for i, e in enumerate(dens):
                if e:
                    piece /= atom_vals[i] ** e
            for p in range(2):
                if mask >> p & 1:
                    piece *= mpmath.sqrt(atom_vals[3 + p])
            oracle += piece
        lo, hi = val.interval(160)
        assert float(lo) - 1e-12 <= float(oracle) <= float(hi) + 1e-12


def test_laurent_expansion_of_ratfunc(tetra_ring):
    ring = tetra_ring
    tower = ring.tower
    f = RatFunc(ring, ring.radicand(0), (1, 0, 1, 0))  # q / (t (t - 1))
    start, coeffs = f.laurent(mpq(0), 4)
    assert start == -1
    expected = [-3, -5, -8, -8]
    assert all(c == tower.from_rational(e) for c, e in zip(coeffs, expected))


def test_laurent_at_pure_pole(tetra_ring):
    ring = tetra_ring
    expr = ring.atom_reciprocal(2, 4)
    tower, order, leading = expr.laurent_at(1)
    assert order == -4
    assert leading == tower.one()


def test_laurent_at_cross_mask_cancellation(tetra_ring):
    # (sqrt(q) - sqrt(q(1))) / (t - 1) has the finite limit q'(1)/(2 sqrt(q(1)))
    ring = tetra_ring
    sqrt2 = ring.tower.express_sqrt(2)
    expr = ring.sqrt_radical(0) * ring.atom_reciprocal(2) - (
        ring.atom_reciprocal(2) * (2 * sqrt2)
    )
    tower, order, leading = expr.laurent_at(1)
    assert order == 0
    assert leading == tower.express_sqrt(2)


# ------------------------------------------------------------ balance matrix


def test_balance_matrix_tetra_frozen_entries(tetra_ring, tetra_S):
    ring = tetra_ring
    tower = ring.tower
    S = tetra_S
    assert S.shape == (24, 8)
    sqrt2 = tower.express_sqrt(2)
    sqrt3 = tower.express_sqrt(3)
    for i in range(8):
        for a in range(3):
            assert S.const[3 * i + a, i].is_zero
            assert S.linear[3 * i + a, i].is_zero
    # outer-outer: distance 2*sqrt(2), difference (-2, -2, 0)
    assert S.const[0, 1] == ring.constant(sqrt2 * mpq(-1, 16))
    assert S.linear[0, 1] == ring.constant(2)
    # outer to its own inner copy: distance sqrt(3)(1 - t)
    assert S.const[0, 4] == ring.atom_reciprocal(2, 2) * (sqrt3 * mpq(-1, 9))
    assert S.linear[0, 4] == ring.poly([1, -1])
    # outer to another inner: distance sqrt(3 t^2 + 2 t + 3)
    assert S.const[0, 5] == ring.inverse_cube_sqrt(0) * ring.poly([-1, -1])
    assert S.linear[0, 5] == ring.poly([1, 1])
    # inner-inner: distance 2 sqrt(2) t
    assert S.const[12, 5] == ring.atom_reciprocal(0, 2) * (sqrt2 * mpq(-1, 16))
    assert S.linear[12, 5] == ring.poly([0, 2])
    # affine evaluation combines the two parts
    c = mpq(1, 7)
    assert S.at(c)[0, 1] == ring.constant(sqrt2 * mpq(-1, 16) + 2 * c)


def test_balance_matrix_oct_frozen_entries(oct_ring, oct_config):
    ring = oct_ring
    S = build_S(oct_config)
    assert S.shape == (36, 12)
    # opposite outer vertices: distance 2, difference (-2, 0, 0)
    assert S.const[0, 1] == ring.constant(mpq(-1, 4))
    # outer e1 to inner copy of e2: distance sqrt(t^2 + 1)
    assert S.const[1, 8] == ring.inverse_cube_sqrt(0) * ring.poly([0, 1])
    assert S.linear[1, 8] == ring.poly([0, -1])


def test_balance_matrix_equivariance_tetra(tetra_config, tetra_S):
    check_symmetry(tetra_config, tetra_S)


def test_balance_matrix_equivariance_oct(oct_config):
    check_symmetry(oct_config, build_S(oct_config))


def test_balance_matrix_equivariance_cube(cube_config):
    check_symmetry(cube_config, build_S(cube_config))


def test_equivariance_detects_perturbation(tetra_ring, tetra_config, tetra_S):
    rows = [list(r) for r in tetra_S.const.rows()]
    rows[0][1] = rows[0][1] + tetra_ring.one()
    bad = ParamMatrix(Matrix(rows), tetra_S.linear)
    with pytest.raises(NotEquivariant):
        check_symmetry(tetra_config, bad)


def _trivial_group_data():
    tower = FieldTower.rationals()
    return GroupData(
        name="trivial",
        group=FiniteGroup([[0, 1]]),
        irreps=[],
        irrep_names=[],
        tower=tower,
    )


def test_build_S_rejects_coincident_points():
    data = _trivial_group_data()
    tower = FieldTower((2,))
    ring = RadicalRing(tower, [])
    config = nested_polyhedron(
        "degenerate", data, ring, [[0, 1]],
        [_rat_matrix([[1, 0, 0], [0, 1, 0], [0, 0, 1]])],
        [(1, 1, 1), (1, 1, 1)],
    )
    with pytest.raises(CoincidentPositions):
        build_S(config)


def test_build_S_requires_registered_radicands():
    data = _trivial_group_data()
    tower = FieldTower((2,))
    ring = RadicalRing(tower, [])  # no radicand covers t^2 + 1
    config = nested_polyhedron(
        "unregistered", data, ring, [[0, 1]],
        [_rat_matrix([[1, 0, 0], [0, 1, 0], [0, 0, 1]])],
        [(1, 0, 0), (0, 1, 0)],
    )
    with pytest.raises(NotSingleRadical):
        build_S(config)


def test_nested_polyhedron_rejects_wrong_rotations(s4, tetra_ring):
    mats = [_rat_matrix(m) for m in TET_ROT]
    swapped = [mats[2], mats[1], mats[0]]
    with pytest.raises(ValidationFailed):
        nested_polyhedron(
            "tetrahedron", s4, tetra_ring, TET_OUTER, swapped, TET_POSITIONS
        )


# ---------------------------------------------------------- reparametrization


def test_reparametrization_tetra_images(tetra_ring):
    ring = tetra_ring
    tower = ring.tower
    rep = Reparametrization(ring)
    sqrt2 = tower.express_sqrt(2)
    u2p1 = UniPoly(tower, [1, 0, 1])
    assert rep.sqrt_image_const == tower.express_sqrt(6) * mpq(1, 3)
    assert rep.atom_images[3] == u2p1**2 * 96
    # atom images are 4 * (sqrt(2) u^2 - u - sqrt(2)) and friends
    assert rep.atom_images[0] == UniPoly(tower, [-4 * sqrt2, -4, 4 * sqrt2])
    assert rep.atom_images[1] == UniPoly(tower, [-4 * sqrt2, 8, 4 * sqrt2])
    assert rep.atom_images[2] == UniPoly(tower, [-4 * sqrt2, -16, 4 * sqrt2])


def test_reparametrization_tetra_interval(tetra_ring):
    ring = tetra_ring
    tower = ring.tower
    rep = Reparametrization(ring)
    tower2, u_lo, u_hi = rep.interval()
    assert tower2 is tower
    sqrt2 = tower.express_sqrt(2)
    sqrt3 = tower.express_sqrt(3)
    assert u_lo == sqrt2
    assert u_hi == sqrt2 + sqrt3
    assert rep.kappa_at(u_lo).is_zero
    assert rep.kappa_at(u_hi) == tower.one()


def test_reparametrization_tetra_roundtrip(tetra_ring):
    ring = tetra_ring
    tower = ring.tower
    rep = Reparametrization(ring)
    tower2, u0 = rep.u_of_t(mpq(1, 3))
    assert tower2 is tower
    sqrt2 = tower.express_sqrt(2)
    sqrt6 = tower.express_sqrt(6)
    assert u0 == (sqrt2 + sqrt6) * mpq(1, 2)
    assert rep.kappa_at(u0) == tower.from_rational(mpq(1, 3))


def test_reparametrization_oct(oct_ring):
    ring = oct_ring
    tower = ring.tower
    rep = Reparametrization(ring)
    assert rep.sqrt_image_const == tower.from_rational(mpq(1, 2))
    assert rep.atom_images[3] == UniPoly(tower, [1, 0, 1]) ** 2 * 4
    tower2, u_lo, u_hi = rep.interval()
    assert u_lo == tower.one()
    assert u_hi == tower.one() + tower.express_sqrt(2)
    _, u0 = rep.u_of_t(mpq(3, 4))
    assert u0 == tower.from_rational(2)
    assert rep.kappa_at(u0) == tower.from_rational(mpq(3, 4))


def _image_value(image, u0):
    val = image.numerator.evaluate(u0)
    for poly, exp in image.factors:
        val = val * (poly.evaluate(u0).inverse() ** exp)
    return val


def test_apply_roundtrip_at_rational_points(tetra_ring):
    ring = tetra_ring
    tower = ring.tower
    sqrt3 = tower.express_sqrt(3)
    rep = Reparametrization(ring)
    # a mixed expression shaped like the reduced block entries
    expr = (
        ring.inverse_cube_sqrt(0) * ring.poly([3, 1])
        - ring.atom_reciprocal(2, 2) * (sqrt3 * mpq(1, 3))
        + ring.poly([0, 12])
    )
    image = rep.apply(expr)
    for t0 in (mpq(1, 3), mpq(1, 2)):
        tower_u, u0 = rep.u_of_t(t0)
        tower_e, val = expr.evaluate(t0, tower_u)
        assert val == _image_value(image, u0)


def test_apply_rejects_foreign_radicals(cube_ring):
    rep = Reparametrization(cube_ring, slot=0)
    with pytest.raises(NotSingleRadical):
        rep.apply(cube_ring.sqrt_radical(1))


def test_reparametrization_needs_definite_radicand():
    tower = FieldTower((3, 2))
    ring = RadicalRing(tower, [UniPoly(tower, [6, 5, 1])])  # (t+2)(t+3)
    with pytest.raises(NotSingleRadical):
        Reparametrization(ring)


# ------------------------------------------------------------ lift and boxes


def test_lift_clears_denominators_exactly(cube_ring):
    ring = cube_ring
    tower = ring.tower
    sqrt3 = tower.express_sqrt(3)
    expr = (
        ring.inverse_cube_sqrt(0) * ring.poly([1, 2])
        + ring.inverse_cube_sqrt(1)
        - ring.atom_reciprocal(1) * sqrt3
    )
    F, dens = lift(expr)
    assert dens == (0, 1, 0, 2, 2)
    assert F.degree(1) <= 1 and F.degree(2) <= 1
    # multiply the expression back up and compare term by term
    cleared = expr
    for i, e in enumerate(dens):
        for _ in range(e):
            cleared = cleared * ring.poly(ring.atoms[i])
    rebuilt = ring.zero()
    for exps, coeff in F.terms.items():
        piece = ring.poly([0] * exps[0] + [coeff])
        for p in range(ring.nradicals):
            if exps[1 + p]:
                piece = piece * ring.sqrt_radical(p)
        rebuilt = rebuilt + piece
    assert cleared == rebuilt


def test_curve_box_cube_bounds(cube_ring):
    ring = cube_ring
    tower, box = curve_box(ring, 0, mpq(1, 2))
    assert box.nvars == 3
    lo0, hi0 = box.bounds[0]
    assert lo0 == tower.from_rational(0) and hi0 == tower.from_rational(mpq(1, 2))
    lo1, hi1 = box.bounds[1]
    assert lo1 == tower.express_sqrt(3)
    assert hi1 * hi1 == tower.from_rational(mpq(19, 4))
    lo2, hi2 = box.bounds[2]
    assert lo2 * lo2 == tower.from_rational(mpq(8, 3))  # vertex of 3t^2 - 2t + 3
    assert hi2 == tower.express_sqrt(3)


def test_curve_box_contains_curve_samples(cube_ring):
    ring = cube_ring
    tower, box = curve_box(ring, 0, mpq(1, 2))
    rng = random.Random(55440)
    for _ in range(100):
        t0 = mpq(rng.randint(0, 2**20), 2**21)
        for p in range(ring.nradicals):
            qv = tower.from_rational(ring.radicand(p).evaluate(t0).as_rational())
            lo, hi = box.bounds[1 + p]
            assert sign_of(qv - lo * lo) >= 0
            assert sign_of(hi * hi - qv) >= 0
