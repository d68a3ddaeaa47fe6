"""Circuit intermediate representation: text format, normalization, random generation.

Circuits are ordered lists of Hadamard and Toffoli gates on ``q`` qubit lines.
The text format is line oriented: a ``qubits <q>`` header, then one gate per
line (``h <i>`` or ``ccx <c1> <c2> <t>``), ``#`` comments, blank lines ignored.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import (
    BasisStateError,
    DuplicateToffoliIndexError,
    IndexOutOfRangeError,
    MalformedLineError,
    MissingHeaderError,
    UnknownGateNameError,
)


@dataclass(frozen=True)
class Hadamard:
    line: int


@dataclass(frozen=True)
class Toffoli:
    control1: int
    control2: int
    target: int

    @property
    def lines(self) -> tuple[int, int, int]:
        return (self.control1, self.control2, self.target)


Gate = Hadamard | Toffoli


@dataclass(frozen=True)
class Circuit:
    """An ordered gate list on ``q`` qubit lines, validated on construction."""

    q: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.q < 1:
            raise ValueError(f"qubit count must be positive, got {self.q}")
        for pos, gate in enumerate(self.gates):
            if isinstance(gate, Hadamard):
                idx = (gate.line,)
            else:
                idx = gate.lines
                if len(set(idx)) != 3:
                    raise ValueError(f"gate {pos}: Toffoli lines must be distinct, got {idx}")
            for i in idx:
                if not 0 <= i < self.q:
                    raise ValueError(f"gate {pos}: line {i} out of range for q={self.q}")

    @property
    def hadamard_count(self) -> int:
        return sum(1 for g in self.gates if isinstance(g, Hadamard))


@dataclass(frozen=True)
class NormalizationReport:
    """Where HH identity pairs were inserted.

    ``positions`` holds ``(line, gate_index)`` pairs where ``gate_index`` refers
    to the input gate list; the pair was inserted immediately after that gate.
    """

    inserted_pairs: int
    positions: tuple[tuple[int, int], ...]


def parse_circuit(text: str) -> Circuit:
    """Parse the circuit file format. Errors carry the offending line number."""
    q: int | None = None
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if q is None:
            if fields[0] != "qubits":
                raise MissingHeaderError(lineno, f"expected 'qubits <q>' header, got {fields[0]!r}")
            if len(fields) != 2:
                raise MalformedLineError(lineno, "header must be exactly 'qubits <q>'")
            try:
                q = int(fields[1])
            except ValueError:
                raise MalformedLineError(lineno, f"qubit count {fields[1]!r} is not an integer") from None
            if q < 1:
                raise MalformedLineError(lineno, f"qubit count must be positive, got {q}")
            continue
        name, args = fields[0], fields[1:]
        if name == "h":
            want = 1
        elif name == "ccx":
            want = 3
        elif name == "qubits":
            raise MalformedLineError(lineno, "duplicate 'qubits' header")
        else:
            raise UnknownGateNameError(lineno, f"unknown gate {name!r}")
        if len(args) != want:
            raise MalformedLineError(lineno, f"{name} takes {want} index argument(s), got {len(args)}")
        try:
            idx = [int(a) for a in args]
        except ValueError:
            raise MalformedLineError(lineno, f"non-integer index in {line!r}") from None
        for i in idx:
            if not 0 <= i < q:
                raise IndexOutOfRangeError(lineno, f"index {i} out of range for q={q}")
        if name == "h":
            gates.append(Hadamard(idx[0]))
        else:
            if len(set(idx)) != 3:
                raise DuplicateToffoliIndexError(lineno, f"ccx indices must be distinct, got {idx}")
            gates.append(Toffoli(*idx))
    if q is None:
        raise MissingHeaderError(0, "no 'qubits' header found")
    return Circuit(q, tuple(gates))


def serialize_circuit(c: Circuit) -> str:
    """Canonical text form; parse_circuit(serialize_circuit(c)) == c."""
    out = [f"qubits {c.q}"]
    for g in c.gates:
        if isinstance(g, Hadamard):
            out.append(f"h {g.line}")
        else:
            out.append(f"ccx {g.control1} {g.control2} {g.target}")
    return "\n".join(out) + "\n"


def normalize(c: Circuit) -> tuple[Circuit, NormalizationReport]:
    """Insert HH identity pairs so every line segment touches at most one Toffoli.

    A segment is a maximal run of a line between consecutive Hadamards on that
    line (or between a boundary and the nearest Hadamard). After this pass:
    (a) every segment participates in at most one Toffoli, and (b) no final
    segment of any line is a Toffoli target. Each HH pair goes immediately
    after the offending Toffoli on the affected line, so the unitary action is
    unchanged and the original gate order is preserved up to insertions.
    """
    # Pass 1: find violations. seg_toffoli[l] = input index of the Toffoli in
    # l's current segment, or None.
    seg_toffoli: list[int | None] = [None] * c.q
    insertions: dict[int, list[int]] = {}
    for i, g in enumerate(c.gates):
        if isinstance(g, Hadamard):
            seg_toffoli[g.line] = None
        else:
            for line in g.lines:
                prev = seg_toffoli[line]
                if prev is not None:
                    insertions.setdefault(prev, []).append(line)
                seg_toffoli[line] = i
    for line in range(c.q):
        i = seg_toffoli[line]
        if i is not None and isinstance(c.gates[i], Toffoli) and c.gates[i].target == line:
            insertions.setdefault(i, []).append(line)

    # Pass 2: emit.
    gates: list[Gate] = []
    positions: list[tuple[int, int]] = []
    for i, g in enumerate(c.gates):
        gates.append(g)
        for line in sorted(insertions.get(i, ())):
            gates.append(Hadamard(line))
            gates.append(Hadamard(line))
            positions.append((line, i))
    report = NormalizationReport(len(positions), tuple(positions))
    return Circuit(c.q, tuple(gates)), report


def random_circuit(q: int, n_gates: int, p_toffoli: float, seed: int) -> Circuit:
    """Seeded random circuit; a deterministic function of all four arguments.

    Each gate is a Toffoli on three distinct uniform lines with probability
    ``p_toffoli`` (treated as 0 when q < 3), else a Hadamard on a uniform line.
    """
    if q < 1:
        raise ValueError(f"q must be positive, got {q}")
    rng = random.Random(seed)
    p = p_toffoli if q >= 3 else 0.0
    gates: list[Gate] = []
    for _ in range(n_gates):
        if rng.random() < p:
            gates.append(Toffoli(*rng.sample(range(q), 3)))
        else:
            gates.append(Hadamard(rng.randrange(q)))
    return Circuit(q, tuple(gates))


def parse_basis_state(text: str, q: int) -> tuple[int, ...]:
    """Parse a bit string into a basis state; character i is qubit i."""
    if len(text) != q:
        raise BasisStateError(f"basis state {text!r} has length {len(text)}, expected {q}")
    if set(text) - {"0", "1"}:
        raise BasisStateError(f"basis state {text!r} must contain only 0 and 1")
    return tuple(int(ch) for ch in text)


def format_basis_state(bits: tuple[int, ...]) -> str:
    return "".join(str(b) for b in bits)


def bits_to_index(bits: tuple[int, ...]) -> int:
    """Basis-state index with qubit i at bit i."""
    idx = 0
    for i, b in enumerate(bits):
        idx |= (b & 1) << i
    return idx
