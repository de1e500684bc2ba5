"""Bit-exact stochastic number generation and arithmetic.

Models the two multiplier families used by the reconfigurable DCT
pipeline: the conventional stochastic multiplier (LFSR stream
generation, AND/XNOR gates, MUX adder, counter readout) and the
counter-based multiplier, which pairs a deterministically generated
bitstream with a unary weight stream and counts ones only while the
weight down-counter runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

UNIPOLAR = "unipolar"
BIPOLAR = "bipolar"

_POLARITIES = (UNIPOLAR, BIPOLAR)

# Maximal-length Fibonacci taps, one primitive polynomial per register
# width. The full period 2**width - 1 is verified exhaustively for every
# entry by the test suite.
MAXIMAL_TAPS: dict[int, tuple[int, ...]] = {
    3: (3, 2),
    4: (4, 3),
    5: (5, 3),
    6: (6, 5),
    7: (7, 6),
    8: (8, 6, 5, 4),
    9: (9, 5),
    10: (10, 7),
    11: (11, 9),
    12: (12, 11, 10, 4),
    13: (13, 12, 11, 8),
    14: (14, 13, 12, 2),
    15: (15, 14),
    16: (16, 15, 13, 4),
}

# Alternate primitive polynomials for the same widths, used when two
# decorrelated generators are needed at once (one per operand of the
# conventional multiplier). Periods verified alongside MAXIMAL_TAPS.
ALTERNATE_TAPS: dict[int, tuple[int, ...]] = {
    3: (3, 1),
    4: (4, 1),
    5: (5, 2),
    6: (6, 1),
    7: (7, 1),
    8: (8, 4, 3, 2),
    9: (9, 4),
    10: (10, 3),
    11: (11, 2),
    12: (12, 6, 4, 1),
    13: (13, 4, 3, 1),
    14: (14, 5, 3, 1),
    15: (15, 1),
    16: (16, 12, 3, 1),
}


@dataclass(frozen=True)
class UnsignedFixed:
    """n-bit fixed-point magnitude representing ``raw / 2**width``.

    ``raw == 2**width`` (value exactly 1.0) is legal only for scaled
    weights; stream generation rejects it.
    """

    width: int
    raw: int

    def __post_init__(self):
        if self.width < 1:
            raise ValueError(f"width must be >= 1, got {self.width}")
        if not 0 <= self.raw <= (1 << self.width):
            raise ValueError(
                f"raw {self.raw} out of range for {self.width}-bit magnitude"
            )

    @property
    def value(self) -> float:
        return self.raw / (1 << self.width)


@dataclass(frozen=True)
class LfsrConfig:
    """Fibonacci LFSR parameters: register width, feedback taps, seed.

    Taps are polynomial degrees (1-indexed, the width itself included);
    an empty tap tuple selects the bundled maximal-length set.
    """

    width: int
    taps: tuple[int, ...] = ()
    seed: int = 1

    def __post_init__(self):
        if self.width not in MAXIMAL_TAPS:
            raise ValueError(f"unsupported LFSR width {self.width}; supported 3..16")
        taps = tuple(self.taps) or MAXIMAL_TAPS[self.width]
        taps = tuple(sorted(set(taps), reverse=True))
        if min(taps) < 1 or max(taps) != self.width:
            raise ValueError("taps must be degrees 1..width and include the width")
        object.__setattr__(self, "taps", taps)
        if not 0 < self.seed < (1 << self.width):
            raise ValueError(
                f"seed must satisfy 0 < seed < 2**{self.width} (zero locks up)"
            )


def lfsr_step(state: int, cfg: LfsrConfig) -> int:
    """Advance the register by one cycle. The all-zero state is rejected."""
    if not 0 < state < (1 << cfg.width):
        raise ValueError(f"LFSR state {state} out of range (lock-up at zero)")
    feedback = 0
    for tap in cfg.taps:
        feedback ^= (state >> (tap - 1)) & 1
    return ((state << 1) | feedback) & ((1 << cfg.width) - 1)


def lfsr_states(cfg: LfsrConfig, count: int) -> Iterator[int]:
    """Yield ``count`` successive states, starting from the seed."""
    state = cfg.seed
    for _ in range(count):
        yield state
        state = lfsr_step(state, cfg)


@dataclass(frozen=True)
class BitStream:
    """Ordered bit sequence encoding a stochastic number.

    Bit i of the stream (0-indexed from the first emitted bit) is
    ``(word >> i) & 1``. Length is a power of two. A unipolar stream
    encodes popcount/length in [0, 1]; a bipolar stream encodes
    (2*popcount - length)/length in [-1, 1].
    """

    length: int
    word: int
    polarity: str = UNIPOLAR

    def __post_init__(self):
        if self.length < 2 or self.length & (self.length - 1):
            raise ValueError(f"stream length must be a power of two >= 2, got {self.length}")
        if not 0 <= self.word < (1 << self.length):
            raise ValueError("stream word has bits beyond the stated length")
        if self.polarity not in _POLARITIES:
            raise ValueError(f"polarity must be one of {_POLARITIES}")

    @classmethod
    def from_bits(cls, bits: Iterable[int], polarity: str = UNIPOLAR) -> "BitStream":
        bits = tuple(bits)
        word = 0
        for i, b in enumerate(bits):
            if b not in (0, 1):
                raise ValueError(f"bit {i} is {b}, expected 0 or 1")
            word |= b << i
        return cls(len(bits), word, polarity)

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.word >> i) & 1 for i in range(self.length))

    @property
    def popcount(self) -> int:
        return self.word.bit_count()

    @property
    def value(self) -> float:
        if self.polarity == UNIPOLAR:
            return self.popcount / self.length
        return (2 * self.popcount - self.length) / self.length

    def __len__(self) -> int:
        return self.length


def sng_conventional(x: UnsignedFixed, length: int, cfg: LfsrConfig) -> BitStream:
    """LFSR-plus-comparator stream generator.

    Bit i is 1 iff the i-th LFSR state (starting at the seed) is below
    x.raw. Deterministic for a given seed.
    """
    if length < 2 or length & (length - 1):
        raise ValueError(f"stream length must be a power of two, got {length}")
    if x.width != cfg.width:
        raise ValueError(f"operand width {x.width} != LFSR width {cfg.width}")
    word = 0
    for i, state in enumerate(lfsr_states(cfg, length)):
        if state < x.raw:
            word |= 1 << i
    return BitStream(length, word)


def sng_deterministic(x: UnsignedFixed) -> BitStream:
    """Deterministic placement-rule stream generator.

    For cycle c = 1..2**n the emitted bit is x_{n-1-ctz(c)} (ctz = count
    of trailing zeros of c); the final cycle, where ctz(c) = n, emits 0
    so the encoded value stays below one. Consequently input bit
    x_{n-i} occupies exactly the 1-indexed positions 2**(i-1) + k*2**i
    and the stream popcount equals x.raw.
    """
    n = x.width
    if x.raw >= (1 << n):
        raise ValueError("operand must be < 1.0 for deterministic generation")
    word = 0
    for cycle in range(1, (1 << n) + 1):
        ctz = (cycle & -cycle).bit_length() - 1
        if ctz < n and (x.raw >> (n - 1 - ctz)) & 1:
            word |= 1 << (cycle - 1)
    return BitStream(1 << n, word)


def unary_gen(w_s: int, length: int) -> BitStream:
    """Unary weight stream: w_s ones followed by zeros.

    Models the weight generator built from a down-counter and a
    comparator.
    """
    if not 0 <= w_s <= length:
        raise ValueError(f"unary weight {w_s} out of range 0..{length}")
    return BitStream(length, (1 << w_s) - 1)


def and_multiply(a: BitStream, b: BitStream) -> BitStream:
    """Elementwise AND; multiplies two unipolar streams."""
    if a.length != b.length:
        raise ValueError(f"length mismatch: {a.length} vs {b.length}")
    if a.polarity != UNIPOLAR or b.polarity != UNIPOLAR:
        raise ValueError("AND multiplication requires unipolar streams")
    return BitStream(a.length, a.word & b.word)


def xnor_multiply(a: BitStream, b: BitStream) -> BitStream:
    """Elementwise XNOR; multiplies two bipolar streams."""
    if a.length != b.length:
        raise ValueError(f"length mismatch: {a.length} vs {b.length}")
    if a.polarity != BIPOLAR or b.polarity != BIPOLAR:
        raise ValueError("XNOR multiplication requires bipolar streams")
    mask = (1 << a.length) - 1
    return BitStream(a.length, ~(a.word ^ b.word) & mask, BIPOLAR)


def mux_add(a: BitStream, b: BitStream, select: BitStream) -> BitStream:
    """Multiplexer addition: bit i comes from a when select_i is 0, else b.

    With a select stream of value 1/2 the output approximates
    (value(a) + value(b)) / 2.
    """
    if not a.length == b.length == select.length:
        raise ValueError("mux operands and select must share one length")
    if a.polarity != b.polarity:
        raise ValueError("mux data inputs must share polarity")
    mask = (1 << a.length) - 1
    word = (a.word & ~select.word & mask) | (b.word & select.word)
    return BitStream(a.length, word, a.polarity)


def stream_to_binary(s: BitStream) -> int:
    """Counter readout: popcount for unipolar, up-down count for bipolar."""
    if s.polarity == UNIPOLAR:
        return s.popcount
    return 2 * s.popcount - s.length


def prefix_ones(raw: int, width: int, count: int) -> int:
    """Ones among the first ``count`` bits of the deterministic stream.

    Closed form of the placement rule: input bit j (weight 2**j) lands
    every 2**(width-j) positions starting at 2**(width-1-j), so its
    occurrences within a prefix of length w number
    (w + 2**(width-1-j)) >> (width-j).
    """
    total = 0
    for j in range(width):
        if (raw >> j) & 1:
            total += (count + (1 << (width - 1 - j))) >> (width - j)
    return total


class CbscResult(NamedTuple):
    product: int
    cycles: int


def cbsc_multiply(x: UnsignedFixed, w_s: int) -> CbscResult:
    """Counter-based multiply: count stream ones while the weight runs.

    Product is the popcount of the first w_s bits of the deterministic
    stream of x, so product / 2**n approximates (x.raw / 2**n) *
    (w_s / 2**n). Cycles reports the data-dependent count w_s; the
    fixed worst-case schedule 2**n per multiply is charged separately
    by the platform timing model.
    """
    n = x.width
    if not 0 <= w_s <= (1 << n):
        raise ValueError(f"scaled weight {w_s} out of range 0..{1 << n}")
    if x.raw >= (1 << n):
        raise ValueError("operand must be < 1.0")
    return CbscResult(prefix_ones(x.raw, n, w_s), w_s)
