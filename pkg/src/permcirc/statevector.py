"""Exact state-vector oracle for Toffoli-Hadamard circuits.

All gate entries are 0, +-1, or +-1/sqrt(2), so a state reached from a basis
state is a vector of exact integers divided by sqrt(2)^h where h counts the
Hadamards applied. Keeping integer coefficients and the exponent separately
makes every amplitude identity testable with zero tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .circuit import Circuit, Hadamard, bits_to_index
from .errors import TooManyQubitsError

MAX_QUBITS = 20

_INV_SQRT2 = 2.0 ** -0.5


@dataclass(frozen=True)
class DyadicAmplitude:
    """Exact amplitude k / sqrt(2)^h."""

    k: int
    h: int

    def to_float(self) -> float:
        x = math.ldexp(float(self.k), -(self.h // 2))
        return x * _INV_SQRT2 if self.h % 2 else x

    def is_zero(self) -> bool:
        return self.k == 0


@dataclass
class DyadicState:
    """Integer coefficients over all 2^q basis states, scaled by sqrt(2)^exponent."""

    q: int
    coeffs: list[int]
    exponent: int

    def squared_norm(self) -> int:
        return sum(k * k for k in self.coeffs)


def simulate(c: Circuit, in_bits: tuple[int, ...]) -> DyadicState:
    """Apply the circuit to a basis state, exactly."""
    if c.q > MAX_QUBITS:
        raise TooManyQubitsError(f"q={c.q} exceeds the simulator cap of {MAX_QUBITS}")
    if len(in_bits) != c.q:
        raise ValueError(f"input state must have {c.q} bits")
    size = 1 << c.q
    coeffs = [0] * size
    coeffs[bits_to_index(in_bits)] = 1
    exponent = 0
    for g in c.gates:
        if isinstance(g, Hadamard):
            step = 1 << g.line
            for b in range(size):
                if not b & step:
                    k0, k1 = coeffs[b], coeffs[b | step]
                    coeffs[b], coeffs[b | step] = k0 + k1, k0 - k1
            exponent += 1
        else:
            cmask = (1 << g.control1) | (1 << g.control2)
            tbit = 1 << g.target
            for b in range(size):
                if b & cmask == cmask and not b & tbit:
                    coeffs[b], coeffs[b | tbit] = coeffs[b | tbit], coeffs[b]
    return DyadicState(c.q, coeffs, exponent)


def amplitude(c: Circuit, in_bits: tuple[int, ...], out_bits: tuple[int, ...]) -> DyadicAmplitude:
    """<out|U|in> as an exact dyadic pair (k, h)."""
    if len(out_bits) != c.q:
        raise ValueError(f"output state must have {c.q} bits")
    state = simulate(c, in_bits)
    return DyadicAmplitude(state.coeffs[bits_to_index(out_bits)], state.exponent)
