"""The three nested-solid models and their verified block decompositions.

Each case pairs an outer platonic solid with a scaled-down copy of itself
sitting on the same symmetry axes, and carries everything downstream code
needs: the finite symmetry group with its irreducibles, the radical ring
holding the mutual-distance expressions, the balance matrix, and its
exact decomposition into repeated small blocks.  On top of the raw data
sit the two verification pipelines — the kernel certificates forcing one
shared mass per shell, and the isolation of the scale ratio where the
shell-to-shell mass ratio changes sign.

Cases are expensive to build (every step re-validates exactly), so the
registry caches them per process; treat the returned objects as frozen.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from gmpy2 import mpq

from .certify import (
    Certificate,
    certify_endpoint_limit,
    certify_root_count,
    certify_sign,
    det_affine,
    isolate_sign_change,
    kernel_trivial_rect,
    mass_ratio_at,
)
from .fields import FieldTower, sign_of
from .groups import (
    GroupData,
    SymAdaptedBasis,
    block_decompose,
    load_group_data,
    multiplicity,
    symmetry_adapted_basis,
)
from .linalg import Matrix
from .model import (
    Configuration,
    ParamMatrix,
    RadicalExpr,
    RadicalRing,
    build_S,
    check_symmetry,
    nested_polyhedron,
)
from .polys import IntervalQ, UniPoly

__all__ = [
    "CASE_NAMES",
    "Case",
    "DeltaResult",
    "certify_block",
    "certify_equal_masses",
    "find_delta",
    "load_case",
    "mass_data_at",
]

_DATA = Path(__file__).resolve().parent / "data"

CASE_NAMES = ("tetrahedron", "octahedron", "cube")

# Vertex coordinates of the outer shell; the inner shell is the same list
# scaled by the ratio parameter.  Generator permutations are given on the
# outer vertices only (the inner copy moves in lockstep) and must match
# the generator order of the group data file; the rotation matrices
# realize those permutations on the coordinates and are validated
# entry-by-entry at build time.
TETRA_POSITIONS = [(1, 1, 1), (-1, -1, 1), (-1, 1, -1), (1, -1, -1)]
TETRA_PERMS = [[0, 1, 3, 2], [0, 2, 1, 3], [1, 0, 3, 2]]
TETRA_ROTATIONS = [
    [[0, 1, 0], [1, 0, 0], [0, 0, 1]],
    [[1, 0, 0], [0, 0, 1], [0, 1, 0]],
    [[-1, 0, 0], [0, -1, 0], [0, 0, 1]],
]

OCT_POSITIONS = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
OCT_PERMS = [[2, 3, 1, 0, 4, 5], [2, 3, 4, 5, 0, 1], [1, 0, 3, 2, 5, 4]]
OCT_ROTATIONS = [
    [[0, -1, 0], [1, 0, 0], [0, 0, 1]],
    [[0, 0, 1], [1, 0, 0], [0, 1, 0]],
    [[-1, 0, 0], [0, -1, 0], [0, 0, -1]],
]

CUBE_POSITIONS = [
    (1, 1, 1), (1, 1, -1), (1, -1, 1), (-1, 1, 1),
    (1, -1, -1), (-1, 1, -1), (-1, -1, 1), (-1, -1, -1),
]
CUBE_PERMS = [[3, 5, 0, 6, 1, 7, 2, 4], [0, 3, 1, 2, 5, 6, 4, 7], [7, 6, 5, 4, 3, 2, 1, 0]]
# The cube shares the octahedron's rotation generators: both solids carry
# the full octahedral symmetry, only the vertex orbits differ.


@dataclass(frozen=True)
class Case:
    """One nested-solid model with its verified block decomposition.

    ``blocks`` maps each irreducible (by name) appearing in both the mass
    space and the equation space to its representative small block, an
    affine matrix in the parameter ``c``; the block repeats ``copies``
    times along the diagonal of the transformed balance matrix.  The
    trivial irreducible's block couples the two shell masses and is the
    source of the mass curve; every other block must have trivial kernel
    for a central configuration to exist.
    """

    name: str
    group: GroupData
    ring: RadicalRing
    config: Configuration
    balance: ParamMatrix
    domain_basis: SymAdaptedBasis
    codomain_basis: SymAdaptedBasis
    theta_mults: dict[str, int]
    tensor_mults: dict[str, int]
    blocks: dict[str, ParamMatrix]
    copies: dict[str, int]
    trivial_name: str

    @property
    def mass_block(self) -> ParamMatrix:
        """The 2x2 block of the trivial irreducible (shared-mass sector)."""
        return self.blocks[self.trivial_name]

    def block(self, name: str) -> ParamMatrix:
        return self.blocks[name]


@lru_cache(maxsize=None)
def _group(stem: str) -> GroupData:
    return load_group_data(_DATA / f"{stem}.json")


def _rotation_matrices(rows_list) -> list[Matrix]:
    tower = FieldTower.rationals()
    return [
        Matrix([[tower.from_rational(mpq(v)) for v in row] for row in rows])
        for rows in rows_list
    ]


def _trivial_irrep_name(group: GroupData) -> str:
    one = group.tower.one()
    for name, irr in zip(group.irrep_names, group.irreps):
        if irr.degree != 1:
            continue
        ch = irr.character()
        if all(ch.on_class(ci) == one for ci in range(len(group.group.conjugacy_classes))):
            return name
    raise ValueError(f"group {group.name!r} has no trivial irreducible?")


def _mult_table(rep, group: GroupData) -> dict[str, int]:
    ch = rep.character()
    return {
        name: multiplicity(ch, irr.character())
        for name, irr in zip(group.irrep_names, group.irreps)
    }


def _build_config(name: str) -> tuple[GroupData, RadicalRing, Configuration]:
    if name == "tetrahedron":
        group = _group("s4")
        tower, _ = group.tower.adjoin(2)
        ring = RadicalRing(tower, [UniPoly(tower, [3, 2, 3])])
        config = nested_polyhedron(
            name, group, ring, TETRA_PERMS,
            _rotation_matrices(TETRA_ROTATIONS), TETRA_POSITIONS,
        )
    elif name == "octahedron":
        group = _group("oh")
        tower, _ = group.tower.adjoin(2)
        ring = RadicalRing(tower, [UniPoly(tower, [1, 0, 1])])
        config = nested_polyhedron(
            name, group, ring, OCT_PERMS,
            _rotation_matrices(OCT_ROTATIONS), OCT_POSITIONS,
        )
    elif name == "cube":
        group = _group("oh")
        tower, _ = group.tower.adjoin(2)
        ring = RadicalRing(
            tower, [UniPoly(tower, [3, 2, 3]), UniPoly(tower, [3, -2, 3])]
        )
        config = nested_polyhedron(
            name, group, ring, CUBE_PERMS,
            _rotation_matrices(OCT_ROTATIONS), CUBE_POSITIONS,
        )
    else:
        raise ValueError(f"unknown case {name!r}; choose from {CASE_NAMES}")
    return group, ring, config


@lru_cache(maxsize=None)
def load_case(name: str) -> Case:
    """Build, validate and decompose one of the three models (cached)."""
    group, ring, config = _build_config(name)
    balance = build_S(config)
    check_symmetry(config, balance)
    domain = symmetry_adapted_basis(config.theta, group.irreps)
    codomain = symmetry_adapted_basis(config.tensor, group.irreps)
    const_struct = block_decompose(balance.const, domain, codomain)
    linear_struct = block_decompose(balance.linear, domain, codomain)
    blocks: dict[str, ParamMatrix] = {}
    copies: dict[str, int] = {}
    for j, small in const_struct.blocks.items():
        irr_name = group.irrep_names[j]
        blocks[irr_name] = ParamMatrix(small, linear_struct.blocks[j])
        copies[irr_name] = const_struct.copies[j]
    return Case(
        name=name,
        group=group,
        ring=ring,
        config=config,
        balance=balance,
        domain_basis=domain,
        codomain_basis=codomain,
        theta_mults=_mult_table(config.theta, group),
        tensor_mults=_mult_table(config.tensor, group),
        blocks=blocks,
        copies=copies,
        trivial_name=_trivial_irrep_name(group),
    )


# ---------------------------------------------------------------------------
# the mass curve through the trivial block
# ---------------------------------------------------------------------------


def mass_data_at(case: Case, t0, tower: FieldTower | None = None):
    """Exact mass data of ``case`` at the rational size ratio ``t0``.

    Returns ``(tower, c_value, ratio)``: the unique parameter value making
    the trivial block singular and the resulting outer-to-inner mass
    ratio (the kernel lists the outer-shell copy first), both exact
    elements of the (possibly extended) tower.
    """
    return mass_ratio_at(case.mass_block, t0, tower)


# ---------------------------------------------------------------------------
# one shared mass per shell
# ---------------------------------------------------------------------------


def certify_block(
    case: Case, name: str, max_depth: int = 16, workers: int = 1
) -> Certificate:
    """Certify that one non-trivial block contributes no kernel on ``0 < t < 1``.

    Tall blocks go through the minor-based kernel certificate; square 2x2
    blocks — whose determinant must come out free of the parameter ``c``
    — get a strict-sign certificate for that determinant instead.  The
    shared-mass block is rejected: its kernel is the whole point of the
    mass curve, so there is nothing to rule out there (see
    :func:`find_delta`).
    """
    if name not in case.blocks:
        raise KeyError(
            f"{case.name} has no block {name!r}; available: {sorted(case.blocks)}"
        )
    if name == case.trivial_name:
        raise ValueError(
            f"block {name!r} is the shared-mass block; its kernel carries the "
            "mass curve and is analysed by find_delta, not certified away"
        )
    blk = case.blocks[name]
    target = f"{case.name}:{name}"
    nrows, _ = blk.shape
    if nrows == 2:
        slope, intercept = det_affine(blk)
        if not slope.is_zero:
            raise ValueError(
                f"square block {target} has a parameter-dependent determinant"
            )
        return certify_sign(
            intercept, max_depth=max_depth, workers=workers, target=f"{target}:det"
        )
    return kernel_trivial_rect(
        blk, max_depth=max_depth, workers=workers, target=target
    )


def certify_equal_masses(
    case: Case, max_depth: int = 16, workers: int = 1
) -> dict[str, Certificate]:
    """Certify that every non-trivial block has trivial kernel on ``0 < t < 1``.

    Runs :func:`certify_block` over the whole inventory.  With every
    certificate passing, any admissible mass vector is forced into the
    equal-mass pattern: one shared value per shell, for every value of
    the ratio and the parameter.
    """
    return {
        irr_name: certify_block(case, irr_name, max_depth=max_depth, workers=workers)
        for irr_name in case.blocks
        if irr_name != case.trivial_name
    }


# ---------------------------------------------------------------------------
# the sign change of the mass ratio
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeltaResult:
    """An isolated size ratio where the shell mass ratio changes sign.

    ``delta`` encloses the unique zero crossing in ``(0, 1)``;
    ``reciprocal`` is the matching enclosure of its inverse (the outer-
    to-inner edge ratio usually quoted).  ``certificates`` holds the
    uniqueness argument: a single root-count certificate on the
    single-radical route, or the sign/monotonicity/limit chain on the
    two-radical route.
    """

    case: str
    route: str
    delta: IntervalQ
    reciprocal: IntervalQ
    certificates: dict[str, Certificate]


def _ratio_numerator(case: Case) -> RadicalExpr:
    """Numerator of the mass ratio along the curve, cleared of ``slope``.

    On the curve ``c(t) = -intercept/slope`` the trivial block's (1,2)
    entry equals ``(a12 * slope - b12 * intercept) / slope``; the mass
    ratio vanishes exactly at the zeros of that numerator.
    """
    slope, intercept = det_affine(case.mass_block)
    a12, b12 = case.mass_block.entry(0, 1)
    return a12 * slope - b12 * intercept


def _bracket_sign_change(sign_at) -> tuple[mpq, mpq]:
    """Scan dyadic grids for adjacent rationals with opposite signs."""
    for grid in (16, 64, 256):
        prev_t = prev_s = None
        for k in range(1, grid):
            t0 = mpq(k, grid)
            s = sign_at(t0)
            if s == 0:
                return t0, t0
            if prev_s is not None and s * prev_s < 0:
                return prev_t, t0
            prev_t, prev_s = t0, s
    raise ValueError("no sign change found on the sampling grid")


def find_delta(
    case: Case, digits: int = 4, max_depth: int = 18, workers: int = 1
) -> DeltaResult:
    """Certify uniqueness of the ratio's zero crossing and enclose it.

    For the single-radical rings the numerator is counted directly: a
    root-count certificate pins exactly one zero in ``(0, 1)``.  The
    two-radical ring is handled by a monotone-tail argument: the
    determinant slope is certified negative throughout, the numerator
    positive on the left half, its Wronskian against the slope positive
    on the right half (so numerator/slope is strictly increasing there),
    and the limit at the right endpoint certified ``+inf`` — together one
    sign change, and only one, survives.  The crossing itself is then
    isolated by exact bisection to about ``digits`` decimal places of the
    reciprocal.
    """
    numer = _ratio_numerator(case)
    certs: dict[str, Certificate] = {}
    if case.ring.nradicals == 1:
        certs["ratio-numerator"] = certify_root_count(
            numer, 1, target=f"{case.name}:ratio-numerator"
        )
        route = "single-radical"
    else:
        slope, _ = det_affine(case.mass_block)
        half = mpq(1, 2)
        certs["slope"] = certify_sign(
            slope, max_depth=max_depth, workers=workers,
            target=f"{case.name}:det-slope",
        )
        certs["numerator-left"] = certify_sign(
            numer, hi=half, max_depth=max_depth, workers=workers,
            target=f"{case.name}:ratio-numerator:left",
        )
        wronskian = numer.derivative() * slope - numer * slope.derivative()
        certs["wronskian-right"] = certify_sign(
            wronskian, lo=half, max_depth=max_depth, workers=workers,
            target=f"{case.name}:wronskian:right",
        )
        certs["limit"] = certify_endpoint_limit(
            numer, slope, 1, target=f"{case.name}:ratio-limit"
        )
        if certs["slope"].data["sign"] != -1:
            raise ValueError("determinant slope certified with unexpected sign")
        if certs["numerator-left"].data["sign"] != 1:
            raise ValueError("ratio numerator certified with unexpected sign")
        if certs["wronskian-right"].data["sign"] != 1:
            raise ValueError("wronskian certified with unexpected sign")
        if certs["limit"].data["conclusion"] != "+inf":
            raise ValueError("ratio limit at the endpoint is not +inf")
        route = "monotone-tail"

    def sign_at(t0):
        _, val = numer.evaluate(mpq(t0))
        return sign_of(val)

    lo, hi = _bracket_sign_change(sign_at)
    width = mpq(1, 10 ** (digits + 2))
    delta = isolate_sign_change(sign_at, lo, hi, max_width=width)
    reciprocal = IntervalQ(1 / delta.hi, 1 / delta.lo)
    return DeltaResult(
        case=case.name,
        route=route,
        delta=delta,
        reciprocal=reciprocal,
        certificates=certs,
    )
