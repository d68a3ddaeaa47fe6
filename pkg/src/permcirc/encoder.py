"""Compile a clause set plus boundary information into one weighted digraph.

Each monomial becomes a small gadget block on the diagonal; each variable
becomes a directed weight-1 cycle threading one connection vertex per clause
that contains it. A traversed cycle means the variable is 0, an untraversed
one means 1; a gadget whose clause is fully satisfied contributes -1 to the
cycle-cover weight and +1 otherwise, so the permanent of the assembled matrix
equals the solution gap #{f=0} - #{f=1} and the amplitude is per(G)/sqrt(2)^h.

Boundary values are fixed either algebraically before encoding (substitution
mode) or structurally (graph-fix mode): a variable fixed to 1 gets no external
cycle at all, while a variable fixed to 0 has its cycle routed through an
extra forcing vertex with no self-loop, which every cover must traverse.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import BadBetaProductError, ConflictingBoundaryError
from .gf2poly import Gf2Poly, Labeling, substitute
from .statevector import DyadicAmplitude


class EncodingStructureWarning(UserWarning):
    """A cubic-clause variable has no quadratic clause protecting its cycle."""


@dataclass(frozen=True)
class IntMatrix:
    """Square matrix of exact integers."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.rows)
        for r in self.rows:
            if len(r) != n:
                raise ValueError("matrix must be square")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "IntMatrix":
        return cls(tuple(tuple(int(x) for x in r) for r in rows))

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        return self.rows[ij[0]][ij[1]]


@dataclass(frozen=True)
class GadgetTemplate:
    """A clause gadget: adjacency block plus its connection-slot vertices."""

    block: tuple[tuple[int, ...], ...]
    slots: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.block)


def gadget_quadratic() -> GadgetTemplate:
    """Two-variable clause gadget; permanent -1, transit paths cancel."""
    return GadgetTemplate(
        block=((0, -1, 1), (-1, 0, 1), (1, 1, 1)),
        slots=(0, 1),
    )


def gadget_cubic(betas: tuple[int, int, int] = (-2, 1, 1)) -> GadgetTemplate:
    """Three-variable clause gadget; the weights must multiply to -2."""
    b1, b2, b3 = betas
    if b1 * b2 * b3 != -2:
        raise BadBetaProductError(f"beta product must be -2, got {b1 * b2 * b3}")
    return GadgetTemplate(
        block=((1, b1, 0), (0, 1, b2), (b3, 0, 1)),
        slots=(0, 1, 2),
    )


def gadget_unary() -> GadgetTemplate:
    """Single-variable clause gadget: one vertex with a -1 self-loop."""
    return GadgetTemplate(block=((-1,),), slots=(0,))


@dataclass(frozen=True)
class Encoding:
    """The compiled matrix G plus construction metadata."""

    matrix: IntMatrix
    h: int
    mode: str  # "substitution" | "graph-fix"
    vertex_labels: tuple[str, ...]
    external_edges: tuple[tuple[int, int, int], ...]  # (src, dst, variable id)
    sign_note: str | None = None


class _Builder:
    def __init__(self):
        self.labels: list[str] = []
        self.entries: dict[tuple[int, int], int] = {}
        self.external: list[tuple[int, int, int]] = []

    def add_vertex(self, label: str) -> int:
        self.labels.append(label)
        return len(self.labels) - 1

    def add_weight(self, i: int, j: int, w: int) -> None:
        # Parallel edges merge by entry addition (cycle-cover semantics).
        self.entries[i, j] = self.entries.get((i, j), 0) + w

    def add_gadget(self, template: GadgetTemplate, clause_idx: int,
                   var_names: Sequence[str]) -> list[int]:
        base = len(self.labels)
        slot_of = {s: k for k, s in enumerate(template.slots)}
        for v in range(template.size):
            if v in slot_of:
                self.add_vertex(f"g{clause_idx}.s{slot_of[v]}[{var_names[slot_of[v]]}]")
            else:
                self.add_vertex(f"g{clause_idx}.i{v}")
        for i, row in enumerate(template.block):
            for j, w in enumerate(row):
                if w:
                    self.add_weight(base + i, base + j, w)
        return [base + s for s in template.slots]

    def add_cycle(self, vertices: Sequence[int], var: int) -> None:
        # A length-1 cycle is a weight-1 self-loop on the single slot.
        for k, src in enumerate(vertices):
            dst = vertices[(k + 1) % len(vertices)]
            self.add_weight(src, dst, 1)
            self.external.append((src, dst, var))

    def negate_row(self, i: int) -> None:
        for key in [k for k in self.entries if k[0] == i]:
            self.entries[key] = -self.entries[key]

    def build(self, h: int, mode: str, sign_note: str | None) -> Encoding:
        n = len(self.labels)
        rows = tuple(
            tuple(self.entries.get((i, j), 0) for j in range(n)) for i in range(n)
        )
        return Encoding(
            matrix=IntMatrix(rows),
            h=h,
            mode=mode,
            vertex_labels=tuple(self.labels),
            external_edges=tuple(self.external),
            sign_note=sign_note,
        )


_TEMPLATES = {1: gadget_unary, 2: gadget_quadratic, 3: gadget_cubic}


def _var_namer(var_labels: Sequence[str] | Mapping[int, str] | None):
    if var_labels is None:
        return lambda v: f"x{v}"
    return lambda v: var_labels[v]


def encode_poly(
    poly: Gf2Poly,
    free_vars: Sequence[int],
    h: int,
    var_labels: Sequence[str] | Mapping[int, str] | None = None,
) -> Encoding:
    """Encode an already-substituted polynomial over its free variables.

    Gadget blocks are laid out in canonical clause order; every free variable
    absent from the polynomial contributes a weight-2 diagonal vertex, and a
    constant bit of 1 is folded in by negating one row.
    """
    name = _var_namer(var_labels)
    clauses = poly.sorted_monomials()
    free_set = set(free_vars)
    occ: dict[int, list[int]] = {}
    for ci, m in enumerate(clauses):
        for v in m:
            if v not in free_set:
                raise ValueError(f"polynomial variable {name(v)} is not a free variable")
            occ.setdefault(v, []).append(ci)

    for v in sorted(occ):
        degs = {len(clauses[ci]) for ci in occ[v]}
        if 3 in degs and 2 not in degs:
            warnings.warn(
                f"variable {name(v)} sits in a cubic clause with no quadratic clause; "
                "cycle forcing relies on unary/self-loop structure only",
                EncodingStructureWarning,
                stacklevel=2,
            )

    b = _Builder()
    slot_vertex: dict[tuple[int, int], int] = {}
    for ci, m in enumerate(clauses):
        slots = b.add_gadget(_TEMPLATES[len(m)](), ci, [name(v) for v in m])
        for v, s in zip(m, slots):  # clause literals map to slots in sorted var order
            slot_vertex[ci, v] = s

    for v in free_vars:
        cis = occ.get(v)
        if cis:
            b.add_cycle([slot_vertex[ci, v] for ci in cis], v)
        else:
            mv = b.add_vertex(f"mult[{name(v)}]")
            b.add_weight(mv, mv, 2)

    sign_note = None
    if poly.constant:
        if b.labels:
            b.negate_row(0)
            sign_note = f"row 0 ({b.labels[0]}) negated for constant bit 1"
        else:
            sv = b.add_vertex("sign")
            b.add_weight(sv, sv, -1)
            sign_note = "single -1 vertex added for constant bit 1 on an empty matrix"
    return b.build(h, "substitution", sign_note)


def encode(
    labeling: Labeling,
    in_bits: Sequence[int],
    out_bits: Sequence[int],
    mode: str = "graph-fix",
) -> Encoding:
    """Encode a labeled circuit instance with its boundary, in either mode.

    Substitution mode reduces the polynomial algebraically first and raises
    ConflictingBoundaryError when the boundary pins a constant line to two
    different values. Graph-fix mode encodes the raw polynomial and fixes the
    boundary inside the graph; a conflicting constant line becomes an isolated
    vertex with no edges, which no cycle cover can cover, so per(G) = 0.
    """
    if mode in ("subst", "substitution"):
        sub = substitute(labeling, in_bits, out_bits)
        if sub.conflict:
            raise ConflictingBoundaryError(
                "boundary bits contradict a constant line; the amplitude is exactly 0"
            )
        return encode_poly(sub.poly, sub.free_vars, labeling.h, var_labels=labeling.labels)
    if mode not in ("graph-fix", "graphfix"):
        raise ValueError(f"unknown mode {mode!r}")

    name = _var_namer(labeling.labels)
    bound: dict[int, int] = {}
    conflicted: set[int] = set()
    for line in range(labeling.q):
        for var, bit in ((labeling.input_vars[line], in_bits[line]),
                         (labeling.output_vars[line], out_bits[line])):
            prev = bound.setdefault(var, bit & 1)
            if prev != bit & 1:
                conflicted.add(var)

    clauses = labeling.f_raw.sorted_monomials()
    occ: dict[int, list[int]] = {}
    for ci, m in enumerate(clauses):
        for v in m:
            occ.setdefault(v, []).append(ci)

    b = _Builder()
    slot_vertex: dict[tuple[int, int], int] = {}
    for ci, m in enumerate(clauses):
        slots = b.add_gadget(_TEMPLATES[len(m)](), ci, [name(v) for v in m])
        for v, s in zip(m, slots):
            slot_vertex[ci, v] = s

    for v in range(labeling.var_count):
        if v in conflicted:
            continue
        slots = [slot_vertex[ci, v] for ci in occ.get(v, ())]
        fixed = bound.get(v)
        if fixed == 1:
            continue  # no external edges: the variable is pinned to 1
        if fixed == 0:
            if slots:
                fv = b.add_vertex(f"force[{name(v)}]")
                b.add_cycle(slots + [fv], v)
            # an idle line's consistent constant contributes nothing
        elif slots:
            b.add_cycle(slots, v)
        else:
            mv = b.add_vertex(f"mult[{name(v)}]")
            b.add_weight(mv, mv, 2)

    for v in sorted(conflicted):
        b.add_vertex(f"conflict[{name(v)}]")  # zero row: forces per(G) = 0

    return b.build(labeling.h, "graph-fix", None)


def amplitude_from_permanent(p: int, h: int) -> DyadicAmplitude:
    """Eq. of the pipeline: amplitude = per(G) / sqrt(2)^h."""
    return DyadicAmplitude(p, h)


def export_matrix_market(m: IntMatrix | Sequence[Sequence[int]]) -> str:
    """Coordinate-format integer Matrix Market text, 1-based, row-major."""
    rows = m.rows if isinstance(m, IntMatrix) else [tuple(r) for r in m]
    n = len(rows)
    coords = [
        (i + 1, j + 1, w)
        for i, row in enumerate(rows)
        for j, w in enumerate(row)
        if w
    ]
    lines = ["%%MatrixMarket matrix coordinate integer general", f"{n} {n} {len(coords)}"]
    lines.extend(f"{i} {j} {w}" for i, j, w in coords)
    return "\n".join(lines) + "\n"


def read_matrix_market(text: str) -> IntMatrix:
    """Parse coordinate-format integer Matrix Market text into a square matrix."""
    data = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("%")]
    if not data:
        raise ValueError("empty Matrix Market input")
    nrows, ncols, nnz = (int(x) for x in data[0].split())
    if nrows != ncols:
        raise ValueError(f"expected a square matrix, got {nrows}x{ncols}")
    if len(data) - 1 != nnz:
        raise ValueError(f"expected {nnz} entries, found {len(data) - 1}")
    grid = [[0] * ncols for _ in range(nrows)]
    for ln in data[1:]:
        i, j, w = (int(x) for x in ln.split())
        grid[i - 1][j - 1] = w
    return IntMatrix.from_rows(grid)


def export_dense(m: IntMatrix | Sequence[Sequence[int]]) -> str:
    """Dense text form: one row per line, space-separated integers."""
    rows = m.rows if isinstance(m, IntMatrix) else [tuple(r) for r in m]
    return "".join(" ".join(str(w) for w in row) + "\n" for row in rows)


def export_dot(e: Encoding) -> str:
    """Graphviz form of the encoding; external edges are colored blue."""
    ext = {(i, j) for i, j, _ in e.external_edges}
    lines = ["digraph permcirc {"]
    for i, label in enumerate(e.vertex_labels):
        lines.append(f'  v{i} [label="{label}"];')
    for i, row in enumerate(e.matrix.rows):
        for j, w in enumerate(row):
            if not w:
                continue
            attrs = f'label="{w}"'
            if (i, j) in ext:
                attrs += ", color=blue"
            lines.append(f"  v{i} -> v{j} [{attrs}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
