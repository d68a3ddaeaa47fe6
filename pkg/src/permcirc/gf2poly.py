"""Boolean variable labeling and GF(2) polynomial machinery.

A normalized circuit is labeled with one fresh variable per line start and one
per Hadamard. Every Hadamard contributes the product of the expressions on its
two sides to a polynomial f; a Toffoli XORs the product of its control
expressions onto its target expression. The transition amplitude is then
(#{f=0} - #{f=1}) / sqrt(2)^h over the variables left free after fixing the
boundary, which this module counts by direct enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .circuit import Circuit, Hadamard, Toffoli
from .errors import NotNormalizedError, TooManyVariablesError, UnboundVariableError

# A monomial is a strictly increasing tuple of variable ids, length 1..3.
Monomial = tuple[int, ...]

DEFAULT_VAR_LIMIT = 26
_CHUNK_BITS = 20


@dataclass(frozen=True)
class Gf2Poly:
    """XOR of monotone monomials plus a constant bit (set semantics, mod 2)."""

    monomials: frozenset[Monomial]
    constant: int = 0

    def variables(self) -> set[int]:
        return {v for m in self.monomials for v in m}

    def sorted_monomials(self) -> list[Monomial]:
        """Canonical order: by degree, then by the variable-id tuple."""
        return sorted(self.monomials, key=lambda m: (len(m), m))

    def degree(self) -> int:
        return max((len(m) for m in self.monomials), default=0)


def xor_monomials(items: Iterable[Monomial], constant: int = 0) -> Gf2Poly:
    """Build a polynomial from monomials with XOR semantics (pairs cancel)."""
    acc: set[Monomial] = set()
    for m in items:
        acc.symmetric_difference_update((m,))
    return Gf2Poly(frozenset(acc), constant & 1)


@dataclass(frozen=True)
class Labeling:
    """Raw polynomial of a normalized circuit plus the boundary variable map."""

    f_raw: Gf2Poly
    input_vars: tuple[int, ...]
    output_vars: tuple[int, ...]
    labels: tuple[str, ...]
    h: int
    var_count: int

    @property
    def q(self) -> int:
        return len(self.input_vars)


class Substitution(NamedTuple):
    poly: Gf2Poly
    free_vars: tuple[int, ...]
    conflict: bool


def _line_letter(line: int) -> str:
    return chr(ord("a") + line) if line < 26 else f"l{line}_"


def label_circuit(c: Circuit) -> Labeling:
    """Label a normalized circuit and build its raw GF(2) polynomial.

    Raises NotNormalizedError if a segment touches two Toffolis, a product
    would exceed degree 3, or a final segment ends in a Toffoli target.
    """
    labels: list[str] = []
    next_index = [1] * c.q

    def fresh(line: int) -> int:
        vid = len(labels)
        labels.append(f"{_line_letter(line)}{next_index[line]}")
        next_index[line] += 1
        return vid

    input_vars = tuple(fresh(line) for line in range(c.q))
    # Line expressions are small monomial sets: {(v,)} or {(v,), (x, y)}.
    expr: list[set[Monomial]] = [{(v,)} for v in input_vars]
    seg_gates = [0] * c.q  # Toffolis seen in the current segment of each line
    f: set[Monomial] = set()

    for pos, g in enumerate(c.gates):
        if isinstance(g, Hadamard):
            n = fresh(g.line)
            for m in expr[g.line]:
                prod = tuple(sorted(m + (n,)))
                if len(prod) > 3 or len(set(prod)) != len(prod):
                    raise NotNormalizedError(
                        f"gate {pos}: product on line {g.line} exceeds degree 3"
                    )
                f.symmetric_difference_update((prod,))
            expr[g.line] = {(n,)}
            seg_gates[g.line] = 0
        else:
            for line in g.lines:
                seg_gates[line] += 1
                if seg_gates[line] > 1:
                    raise NotNormalizedError(
                        f"gate {pos}: segment on line {line} touches two Toffolis"
                    )
            ex, ey = expr[g.control1], expr[g.control2]
            # Normalization guarantees control expressions are single variables.
            (mx,), (my,) = tuple(ex), tuple(ey)
            if len(mx) != 1 or len(my) != 1:
                raise NotNormalizedError(f"gate {pos}: control expression is not a variable")
            expr[g.target].symmetric_difference_update((tuple(sorted(mx + my)),))

    output_vars = []
    for line in range(c.q):
        mons = tuple(expr[line])
        if len(mons) != 1 or len(mons[0]) != 1:
            raise NotNormalizedError(f"final segment of line {line} ends in a Toffoli target")
        output_vars.append(mons[0][0])

    h = c.hadamard_count
    return Labeling(
        f_raw=Gf2Poly(frozenset(f), 0),
        input_vars=input_vars,
        output_vars=tuple(output_vars),
        labels=tuple(labels),
        h=h,
        var_count=c.q + h,
    )


def substitute(
    labeling: Labeling, in_bits: Sequence[int], out_bits: Sequence[int]
) -> Substitution:
    """Bind boundary variables to bits and simplify the raw polynomial.

    ``conflict`` is set when a Hadamard-free line carries one variable that the
    input and output bits pin to different values; the amplitude is then
    exactly 0 and the returned polynomial is unusable.
    """
    q = labeling.q
    if len(in_bits) != q or len(out_bits) != q:
        raise ValueError(f"boundary bit vectors must have length {q}")
    bound: dict[int, int] = {}
    conflict = False
    for line in range(q):
        for var, bit in ((labeling.input_vars[line], in_bits[line]),
                         (labeling.output_vars[line], out_bits[line])):
            prev = bound.setdefault(var, bit & 1)
            if prev != bit & 1:
                conflict = True
    free_vars = tuple(v for v in range(labeling.var_count) if v not in bound)
    if conflict:
        return Substitution(Gf2Poly(frozenset(), 0), free_vars, True)

    acc: set[Monomial] = set()
    constant = 0
    for m in labeling.f_raw.monomials:
        keep: list[int] = []
        dead = False
        for v in m:
            b = bound.get(v)
            if b == 0:
                dead = True
                break
            if b is None:
                keep.append(v)
        if dead:
            continue
        if not keep:
            constant ^= 1
        else:
            acc.symmetric_difference_update((tuple(keep),))
    return Substitution(Gf2Poly(frozenset(acc), constant), free_vars, False)


def eval_poly(f: Gf2Poly, assignment: Mapping[int, int]) -> int:
    """Evaluate f at a point: XOR of the constant and the monomial products."""
    out = f.constant
    for m in f.monomials:
        bit = 1
        for v in m:
            if v not in assignment:
                raise UnboundVariableError(f"variable {v} is not assigned")
            bit &= assignment[v] & 1
            if not bit:
                break
        out ^= bit
    return out


def count_gap(
    f: Gf2Poly,
    free_vars: Sequence[int],
    limit: int = DEFAULT_VAR_LIMIT,
    threads: int = 1,
) -> int:
    """#{f=0} - #{f=1} over all assignments of ``free_vars``.

    Enumerates assignment integers x in [0, 2^v); bit i of x is the value of
    free_vars[i]. Disjoint chunks sum independently, so the result does not
    depend on the worker count.
    """
    v = len(free_vars)
    if v > limit:
        raise TooManyVariablesError(f"{v} free variables exceeds the limit of {limit}")
    pos = {var: i for i, var in enumerate(free_vars)}
    masks = []
    for m in f.monomials:
        mask = 0
        for var in m:
            if var not in pos:
                raise UnboundVariableError(f"variable {var} is not among the free variables")
            mask |= 1 << pos[var]
        masks.append(mask)

    total = 1 << v
    chunk = 1 << min(v, _CHUNK_BITS)

    def ones_in(start: int, stop: int) -> int:
        xs = np.arange(start, stop, dtype=np.uint64)
        acc = np.zeros(stop - start, dtype=bool)
        for mask in masks:
            acc ^= (xs & np.uint64(mask)) == np.uint64(mask)
        if f.constant:
            acc = ~acc
        return int(np.count_nonzero(acc))

    ranges = [(s, min(s + chunk, total)) for s in range(0, total, chunk)]
    if threads > 1 and len(ranges) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            ones = sum(pool.map(lambda r: ones_in(*r), ranges))
    else:
        ones = sum(ones_in(*r) for r in ranges)
    return total - 2 * ones


def poly_to_text(f: Gf2Poly, labels: Sequence[str] | None = None) -> str:
    """Deterministic text form: one monomial per line, then the constant bit."""
    def name(v: int) -> str:
        if labels is not None:
            return labels[v]
        return f"x{v}"

    lines = [" ".join(name(v) for v in m) for m in f.sorted_monomials()]
    lines.append(f"constant {f.constant}")
    return "\n".join(lines) + "\n"
