"""Finite groups, linear representations, and verified block decomposition.

The pipeline here turns a finite permutation group plus a complete set of
irreducible representations into a symmetry-adapted basis, and then conjugates
an equivariant matrix into its guaranteed block shape with every structural
claim (zero blocks, repeated copies, realness) checked by exact arithmetic
rather than trusted.

The machinery is classical:

* multiplicities come from character inner products,
* projectors and transference operators are the usual group averages
  ``(n_j/|G|) * sum_g d^j_ki(g^-1) phi(g)``, stored in the normalized
  (idempotent) scaling,
* basis vectors are ``v_k = p^j_1k v_1`` for a lexicographically chosen
  independent column set of ``p^j_11``,
* Schur orthogonality then forces an equivariant map, written in that basis
  grouped by row index, to be block diagonal with ``n_j`` identical copies
  of one small block per irreducible — and we verify exactly that it is.

Groups are loaded from JSON data files (see :func:`load_group_data`) so the
engine is not tied to the two groups shipped with the package.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from gmpy2 import mpq

from .fields import FieldElement, FieldTower, parse_exact
from .linalg import Matrix

__all__ = [
    "Character",
    "DegenerateImage",
    "FiniteGroup",
    "GroupData",
    "GroupRep",
    "NonzeroForbiddenBlock",
    "NotEquivariant",
    "SymAdaptedBasis",
    "ValidationFailed",
    "BlockStructure",
    "block_decompose",
    "char_inner_product",
    "isotypic_projection",
    "load_group_data",
    "multiplicity",
    "reorder_for_equivariant",
    "symmetry_adapted_basis",
    "tensor_rep",
    "transference",
]


class ValidationFailed(ValueError):
    """Group or representation data violates a required identity."""


class DegenerateImage(ValueError):
    """A transference image has the wrong rank — irrep data is inconsistent."""


class NotEquivariant(ValueError):
    """The matrix does not intertwine the two group actions."""


class NonzeroForbiddenBlock(ValueError):
    """A block that the decomposition theory forces to vanish is nonzero."""


def _compose(p: Sequence[int], q: Sequence[int]) -> tuple[int, ...]:
    """Composition of permutations acting on points: (p∘q)(i) = p[q[i]]."""
    return tuple(p[i] for i in q)


class FiniteGroup:
    """A finite group enumerated breadth-first from generator permutations.

    Elements are stored as permutation tuples on the defining point set, in
    the order discovered by BFS over right multiplication by generators; this
    fixed enumeration makes every downstream index (multiplication table,
    conjugacy classes, basis columns) reproducible run to run.
    """

    __slots__ = (
        "_elements",
        "_index",
        "_words",
        "_gen_perms",
        "_mult",
        "_inv",
        "_classes",
        "_class_of",
        "_inv_class",
    )

    def __init__(self, generator_perms: Sequence[Sequence[int]]):
        gens = [tuple(p) for p in generator_perms]
        if not gens:
            raise ValidationFailed("a group needs at least one generator")
        npts = len(gens[0])
        for p in gens:
            if sorted(p) != list(range(npts)):
                raise ValidationFailed(f"not a permutation of {npts} points: {p}")
        ident = tuple(range(npts))
        elements = [ident]
        index = {ident: 0}
        words: list[tuple[int, int] | None] = [None]
        pos = 0
        while pos < len(elements):
            e = elements[pos]
            for gi, g in enumerate(gens):
                f = _compose(e, g)
                if f not in index:
                    index[f] = len(elements)
                    elements.append(f)
                    words.append((pos, gi))
            pos += 1
        self._elements = elements
        self._index = index
        self._words = words
        self._gen_perms = gens
        n = len(elements)
        self._mult = [
            [index[_compose(elements[i], elements[j])] for j in range(n)]
            for i in range(n)
        ]
        self._inv = [0] * n
        for i in range(n):
            self._inv[i] = self._mult[i].index(0)
        self._build_classes()

    def _build_classes(self) -> None:
        n = self.order
        class_of = [-1] * n
        classes: list[list[int]] = []
        for start in range(n):
            if class_of[start] >= 0:
                continue
            ci = len(classes)
            orbit = [start]
            class_of[start] = ci
            frontier = [start]
            while frontier:
                x = frontier.pop()
                for g in self.generator_indices:
                    y = self._mult[self._mult[g][x]][self._inv[g]]
                    if class_of[y] < 0:
                        class_of[y] = ci
                        orbit.append(y)
                        frontier.append(y)
            classes.append(sorted(orbit))
        self._classes = classes
        self._class_of = class_of
        self._inv_class = [class_of[self._inv[c[0]]] for c in classes]

    @property
    def order(self) -> int:
        return len(self._elements)

    @property
    def npoints(self) -> int:
        return len(self._elements[0])

    @property
    def ngens(self) -> int:
        return len(self._gen_perms)

    @property
    def generator_indices(self) -> list[int]:
        return [self._index[g] for g in self._gen_perms]

    @property
    def elements(self) -> list[tuple[int, ...]]:
        return list(self._elements)

    @property
    def conjugacy_classes(self) -> list[list[int]]:
        return [list(c) for c in self._classes]

    def element(self, i: int) -> tuple[int, ...]:
        return self._elements[i]

    def multiply(self, i: int, j: int) -> int:
        return self._mult[i][j]

    def inverse(self, i: int) -> int:
        return self._inv[i]

    def class_of(self, i: int) -> int:
        return self._class_of[i]

    def inverse_class(self, ci: int) -> int:
        return self._inv_class[ci]

    def extend_action(self, gen_perms: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
        """Extend generator permutations on another point set to all elements.

        The extension follows the BFS words of this group; afterwards the
        result is checked to be a genuine action (compatible with the whole
        multiplication table), so any inconsistent assignment of generators
        raises ValidationFailed instead of silently producing garbage.
        """
        gens = [tuple(p) for p in gen_perms]
        if len(gens) != self.ngens:
            raise ValidationFailed("generator count mismatch")
        npts = len(gens[0])
        for p in gens:
            if sorted(p) != list(range(npts)):
                raise ValidationFailed(f"not a permutation of {npts} points: {p}")
        acts: list[tuple[int, ...]] = [tuple(range(npts))] * self.order
        for i in range(1, self.order):
            parent, gi = self._words[i]
            acts[i] = _compose(acts[parent], gens[gi])
        for e in range(self.order):
            for gi, gidx in enumerate(self.generator_indices):
                f = self._mult[e][gidx]
                if acts[f] != _compose(acts[e], gens[gi]):
                    raise ValidationFailed(
                        f"permutations do not define an action: element {e}, generator {gi}"
                    )
        return acts


class GroupRep:
    """A linear representation: one exact matrix per group element."""

    __slots__ = ("_group", "_degree", "_mats")

    def __init__(self, group: FiniteGroup, mats: Sequence[Matrix]):
        if len(mats) != group.order:
            raise ValidationFailed("one matrix per group element required")
        self._group = group
        self._mats = list(mats)
        self._degree = mats[0].nrows

    @classmethod
    def from_generators(
        cls,
        group: FiniteGroup,
        gen_mats: Sequence[Matrix],
        *,
        validate: str = "full",
    ) -> "GroupRep":
        """Extend generator matrices to all elements along the BFS words.

        validate="full" checks M(e·g) = M(e)·M(g) for every element e and
        generator g, which by induction on word length certifies the whole
        homomorphism property; "generators" checks only generator pairs
        (enough for representations that are homomorphisms by construction,
        e.g. Kronecker products of validated ones).
        """
        if len(gen_mats) != group.ngens:
            raise ValidationFailed("generator count mismatch")
        deg = gen_mats[0].nrows
        for m in gen_mats:
            if m.shape != (deg, deg):
                raise ValidationFailed("generator matrices must be square of equal size")
        tower = _common_entry_tower(gen_mats)
        ident = Matrix.identity(deg, tower.zero(), tower.one())
        mats: list[Matrix] = [ident] * group.order
        for i in range(1, group.order):
            parent, gi = group._words[i]
            mats[i] = mats[parent] @ gen_mats[gi]
        rep = cls(group, mats)
        if validate == "full":
            pairs = ((e, gi) for e in range(group.order) for gi in range(group.ngens))
        elif validate == "generators":
            gidx = group.generator_indices
            pairs = ((e, gi) for e in gidx for gi in range(group.ngens))
        else:
            pairs = ()
        gen_idx = group.generator_indices
        for e, gi in pairs:
            f = group.multiply(e, gen_idx[gi])
            if not (mats[e] @ gen_mats[gi]) == mats[f]:
                raise ValidationFailed(
                    f"homomorphism fails at element {e} * generator {gi}"
                )
        return rep

    @classmethod
    def permutation(cls, group: FiniteGroup, action: Sequence[Sequence[int]]) -> "GroupRep":
        """The 0/1 representation with column j carrying a 1 in row action(j)."""
        tower = FieldTower.rationals()
        zero, one = tower.zero(), tower.one()
        npts = len(action[0])
        mats = []
        for perm in action:
            m = [[zero] * npts for _ in range(npts)]
            for j in range(npts):
                m[perm[j]][j] = one
            mats.append(Matrix(m))
        return cls(group, mats)

    @property
    def group(self) -> FiniteGroup:
        return self._group

    @property
    def degree(self) -> int:
        return self._degree

    def matrix(self, i: int) -> Matrix:
        return self._mats[i]

    def character(self) -> "Character":
        values = []
        for cls_elems in self._group.conjugacy_classes:
            m = self._mats[cls_elems[0]]
            tr = m[0, 0]
            for i in range(1, self._degree):
                tr = tr + m[i, i]
            values.append(tr)
        return Character(self._group, values)


def tensor_rep(a: GroupRep, b: GroupRep) -> GroupRep:
    """Kronecker-product representation of degree deg(a)*deg(b)."""
    if a.group is not b.group:
        raise ValidationFailed("tensor factors must share one group")
    group = a.group
    mats = [a.matrix(i).kron(b.matrix(i)) for i in range(group.order)]
    rep = GroupRep(group, mats)
    for i in group.generator_indices:
        for j in group.generator_indices:
            if not (rep.matrix(i) @ rep.matrix(j)) == rep.matrix(group.multiply(i, j)):
                raise ValidationFailed("tensor representation fails on a generator pair")
    return rep


class Character:
    """Class function given by one exact value per conjugacy class."""

    __slots__ = ("_group", "_values")

    def __init__(self, group: FiniteGroup, values: Sequence[FieldElement]):
        if len(values) != len(group.conjugacy_classes):
            raise ValidationFailed("one value per conjugacy class required")
        self._group = group
        self._values = list(values)

    @property
    def group(self) -> FiniteGroup:
        return self._group

    def on_class(self, ci: int) -> FieldElement:
        return self._values[ci]

    def on_element(self, i: int) -> FieldElement:
        return self._values[self._group.class_of(i)]


def char_inner_product(a: Character, b: Character) -> FieldElement:
    """(1/|G|) * sum_g a(g^-1) b(g), summed class by class."""
    if a.group is not b.group:
        raise ValidationFailed("characters live on different groups")
    g = a.group
    acc = None
    for ci, elems in enumerate(g.conjugacy_classes):
        term = a.on_class(g.inverse_class(ci)) * b.on_class(ci) * len(elems)
        acc = term if acc is None else acc + term
    return acc * mpq(1, g.order)


def multiplicity(rep_char: Character, irrep_char: Character) -> int:
    """Multiplicity of the irreducible inside the representation (a certified integer)."""
    val = char_inner_product(rep_char, irrep_char)
    if not val.is_rational:
        raise ValidationFailed("character inner product is not rational")
    q = val.as_rational()
    if q.denominator != 1 or q < 0:
        raise ValidationFailed(f"multiplicity is not a nonnegative integer: {q}")
    return int(q)


def transference(rep: GroupRep, irrep: GroupRep, k: int, i: int) -> Matrix:
    """The averaged operator (n_j/|G|) * sum_g d^j_ki(g^-1) phi(g).

    In the normalized scaling used here the operators obey the Schur
    relations exactly: p_ki kills every basis vector of row index != k and
    maps the k-th row vector of each copy to the i-th, so p_11 is an
    idempotent projector whose rank equals the multiplicity.
    """
    group = rep.group
    nj = irrep.degree
    acc = None
    for g in range(group.order):
        c = irrep.matrix(group.inverse(g))[k, i]
        if c.is_zero:
            continue
        term = rep.matrix(g).scale(c)
        acc = term if acc is None else acc + term
    if acc is None:
        tower = FieldTower.rationals()
        return Matrix.zeros(rep.degree, rep.degree, tower.zero())
    return acc.scale(mpq(nj, group.order))


def isotypic_projection(rep: GroupRep, irrep: GroupRep) -> Matrix:
    """Normalized projector onto the isotypic component of the irreducible."""
    group = rep.group
    chi = irrep.character()
    acc = None
    for g in range(group.order):
        c = chi.on_element(group.inverse(g))
        if c.is_zero:
            continue
        term = rep.matrix(g).scale(c)
        acc = term if acc is None else acc + term
    if acc is None:
        tower = FieldTower.rationals()
        return Matrix.zeros(rep.degree, rep.degree, tower.zero())
    return acc.scale(mpq(irrep.degree, group.order))


class SymAdaptedBasis:
    """Symmetry-adapted basis vectors, grouped per irreducible.

    vectors[j][k][l] is the k-th row vector of the l-th copy of irreducible
    j (a plain list of field elements).  Two orderings of the full column
    list matter: the copy-major "V" ordering block-diagonalizes the
    representation itself, while the row-major "U" ordering is the one in
    which an equivariant matrix splits into repeated small blocks.
    """

    __slots__ = ("rep", "irreps", "mults", "vectors", "ordering")

    def __init__(self, rep, irreps, mults, vectors, ordering="V"):
        self.rep = rep
        self.irreps = irreps
        self.mults = list(mults)
        self.vectors = vectors
        self.ordering = ordering

    def columns(self) -> list[list[FieldElement]]:
        cols = []
        for j, irrep in enumerate(self.irreps):
            cj = self.mults[j]
            if cj == 0:
                continue
            nj = irrep.degree
            if self.ordering == "V":
                cols.extend(self.vectors[j][k][l] for l in range(cj) for k in range(nj))
            else:
                cols.extend(self.vectors[j][k][l] for k in range(nj) for l in range(cj))
        return cols

    def matrix(self) -> Matrix:
        return Matrix.from_columns(self.columns())

    def sector_slices(self) -> list[tuple[int, int, int]]:
        """Per irreducible with nonzero multiplicity: (j, offset, width)."""
        out = []
        off = 0
        for j, irrep in enumerate(self.irreps):
            cj = self.mults[j]
            if cj == 0:
                continue
            width = cj * irrep.degree
            out.append((j, off, width))
            off += width
        return out


def symmetry_adapted_basis(rep: GroupRep, irreps: Sequence[GroupRep]) -> SymAdaptedBasis:
    """Build the symmetry-adapted basis from normalized transferences.

    For each irreducible with nonzero multiplicity: take the lexicographically
    first independent columns of p_11 as the copy seeds v_1, generate the
    other row vectors as v_k = p_1k v_1, and verify exactly that the vectors
    transform by the irrep matrices themselves (phi(g) v_k = sum_a d_ak(g) v_a).
    Any failure means the irrep data and the representation disagree.
    """
    group = rep.group
    rep_char = rep.character()
    mults = [multiplicity(rep_char, ir.character()) for ir in irreps]
    if sum(m * ir.degree for m, ir in zip(mults, irreps)) != rep.degree:
        raise DegenerateImage("multiplicities do not fill the representation space")
    vectors: list[list[list[list[FieldElement]]] | None] = []
    for j, irrep in enumerate(irreps):
        cj = mults[j]
        if cj == 0:
            vectors.append(None)
            continue
        p11 = transference(rep, irrep, 0, 0)
        cols_idx = p11.independent_columns()
        if len(cols_idx) != cj:
            raise DegenerateImage(
                f"image rank {len(cols_idx)} != multiplicity {cj} for irreducible {j}"
            )
        seeds = [p11.col(ci) for ci in cols_idx]
        rows = [seeds]
        for k in range(1, irrep.degree):
            p1k = transference(rep, irrep, 0, k)
            rows.append([_apply(p1k, v) for v in seeds])
        vectors.append(rows)
        for gidx in group.generator_indices:
            phi_g = rep.matrix(gidx)
            d_g = irrep.matrix(gidx)
            for k in range(irrep.degree):
                for l in range(cj):
                    lhs = _apply(phi_g, rows[k][l])
                    rhs = None
                    for a in range(irrep.degree):
                        c = d_g[a, k]
                        if c.is_zero:
                            continue
                        term = [c * x for x in rows[a][l]]
                        rhs = term if rhs is None else [p + q for p, q in zip(rhs, term)]
                    if rhs is None or any(not (p - q).is_zero for p, q in zip(lhs, rhs)):
                        raise DegenerateImage(
                            f"basis vectors do not transform by irreducible {j}"
                        )
    return SymAdaptedBasis(rep, list(irreps), mults, vectors, ordering="V")


def _apply(m: Matrix, v: list) -> list:
    out = []
    for i in range(m.nrows):
        acc = None
        for k, x in enumerate(v):
            if x.is_zero:
                continue
            term = m[i, k] * x
            acc = term if acc is None else acc + term
        out.append(acc if acc is not None else m[i, 0] * v[0])
    return out


def reorder_for_equivariant(b: SymAdaptedBasis) -> SymAdaptedBasis:
    """Same vectors, row-major ordering: copies of one row index grouped together."""
    return SymAdaptedBasis(b.rep, b.irreps, b.mults, b.vectors, ordering="U")


@dataclass
class BlockStructure:
    """Result of conjugating an equivariant matrix into block form.

    blocks[j] is the single representative small block for irreducible j
    (appearing `copies[j]` times), P and Q are the domain/codomain basis
    matrices in row-major ordering, and `transformed` is Q^-1 M P itself.
    """

    blocks: dict[int, Matrix]
    copies: dict[int, int]
    P: Matrix
    Q: Matrix
    transformed: Matrix


def block_decompose(
    M: Matrix, domain: SymAdaptedBasis, codomain: SymAdaptedBasis
) -> BlockStructure:
    """Conjugate the equivariant matrix M into verified block-diagonal form.

    Checks, in order: the intertwining identity M theta(g) = (theta x rho)(g) M
    on every generator; that Q^-1 M P vanishes identically outside the
    diagonal copy blocks; that the copies of each small block are exactly
    equal; and that every entry of the transformed matrix is real.
    """
    group = domain.rep.group
    for gi, gidx in enumerate(group.generator_indices):
        lhs = M @ domain.rep.matrix(gidx)
        rhs = codomain.rep.matrix(gidx) @ M
        diff = lhs - rhs
        if not diff.is_zero:
            where = next(
                (i, j)
                for i in range(diff.nrows)
                for j in range(diff.ncols)
                if not diff[i, j].is_zero
            )
            raise NotEquivariant(f"generator {gi} fails at entry {where}")
    dom = domain if domain.ordering == "U" else reorder_for_equivariant(domain)
    cod = codomain if codomain.ordering == "U" else reorder_for_equivariant(codomain)
    P = dom.matrix()
    Q = cod.matrix()
    L = Q.inverse() @ (M @ P)
    for i in range(L.nrows):
        for j in range(L.ncols):
            if not L[i, j].is_real:
                raise NonzeroForbiddenBlock(f"imaginary residue at entry ({i}, {j})")
    dom_slices = {j: (off, w) for j, off, w in dom.sector_slices()}
    cod_slices = {j: (off, w) for j, off, w in cod.sector_slices()}
    allowed = [[False] * L.ncols for _ in range(L.nrows)]
    blocks: dict[int, Matrix] = {}
    copies: dict[int, int] = {}
    for j, (doff, dwidth) in dom_slices.items():
        if j not in cod_slices:
            continue
        coff, _ = cod_slices[j]
        nj = dom.irreps[j].degree
        cdom = dom.mults[j]
        ccod = cod.mults[j]
        rep_block = None
        for k in range(nj):
            rows = range(coff + k * ccod, coff + (k + 1) * ccod)
            cols = range(doff + k * cdom, doff + (k + 1) * cdom)
            for r in rows:
                for c in cols:
                    allowed[r][c] = True
            piece = L.submatrix(list(rows), list(cols))
            if rep_block is None:
                rep_block = piece
            elif not rep_block == piece:
                raise NonzeroForbiddenBlock(
                    f"copies of block {j} differ (copy {k})"
                )
        blocks[j] = rep_block
        copies[j] = nj
    for i in range(L.nrows):
        for j2 in range(L.ncols):
            if not allowed[i][j2] and not L[i, j2].is_zero:
                raise NonzeroForbiddenBlock(f"nonzero forbidden entry at ({i}, {j2})")
    return BlockStructure(blocks=blocks, copies=copies, P=P, Q=Q, transformed=L)


def _common_entry_tower(mats: Sequence[Matrix]) -> FieldTower:
    best = FieldTower.rationals()
    for m in mats:
        for i in range(m.nrows):
            for j in range(m.ncols):
                t = m[i, j].tower
                if t.ngens > best.ngens:
                    best = t
    return best


@dataclass
class GroupData:
    """A validated group data file: the group plus its complete irrep set."""

    name: str
    group: FiniteGroup
    irreps: list[GroupRep]
    irrep_names: list[str]
    tower: FieldTower


def load_group_data(path: str | Path) -> GroupData:
    """Load and validate a group data file.

    The file is JSON with fields {name, order, points, generators, irreps};
    each irrep gives its degree and one matrix of exact-value strings per
    generator.  Validation: generators are permutations generating exactly
    `order` elements; every irrep satisfies the homomorphism property on all
    (element, generator) pairs; degrees satisfy sum n_j^2 = |G|; characters
    are exactly orthonormal.  Any failure raises ValidationFailed naming the
    violated identity.
    """
    raw = json.loads(Path(path).read_text())
    for key in ("name", "order", "points", "generators", "irreps"):
        if key not in raw:
            raise ValidationFailed(f"missing field {key!r}")
    group = FiniteGroup(raw["generators"])
    if group.order != raw["order"]:
        raise ValidationFailed(
            f"generators produce {group.order} elements, file says {raw['order']}"
        )
    if group.npoints != raw["points"]:
        raise ValidationFailed("permutation length does not match declared points")
    tower = FieldTower.rationals()
    parsed: list[tuple[str, int, list[list[list[FieldElement]]]]] = []
    for idx, ir in enumerate(raw["irreps"]):
        name = ir.get("name", f"irrep{idx}")
        deg = ir["degree"]
        gen_mats_entries = []
        if len(ir["matrices"]) != group.ngens:
            raise ValidationFailed(f"irrep {name}: one matrix per generator required")
        for mat in ir["matrices"]:
            if len(mat) != deg or any(len(row) != deg for row in mat):
                raise ValidationFailed(f"irrep {name}: matrix is not {deg}x{deg}")
            rows = []
            for row in mat:
                parsed_row = []
                for s in row:
                    tower, elem = parse_exact(s, tower)
                    parsed_row.append(elem)
                rows.append(parsed_row)
            gen_mats_entries.append(rows)
        parsed.append((name, deg, gen_mats_entries))
    if sum(deg * deg for _, deg, _ in parsed) != group.order:
        raise ValidationFailed("sum of squared degrees does not equal the group order")
    irreps = []
    names = []
    for name, deg, gen_mats_entries in parsed:
        try:
            rep = GroupRep.from_generators(
                group, [Matrix(m) for m in gen_mats_entries], validate="full"
            )
        except ValidationFailed as exc:
            raise ValidationFailed(f"irrep {name}: {exc}") from exc
        irreps.append(rep)
        names.append(name)
    chars = [ir.character() for ir in irreps]
    one = tower.one()
    for i, ci in enumerate(chars):
        for j, cj in enumerate(chars):
            val = char_inner_product(ci, cj)
            ok = (val == one) if i == j else val.is_zero
            if not ok:
                raise ValidationFailed(
                    f"characters of {names[i]} and {names[j]} are not orthonormal"
                )
    return GroupData(
        name=raw["name"], group=group, irreps=irreps, irrep_names=names, tower=tower
    )
