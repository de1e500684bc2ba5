"""8-point DCT/IDCT image pipeline on the reconfigurable MAC.

The fixed-point path runs entirely in sign-magnitude arithmetic on the
counter-based multiplier; a float64 path with the same separable
structure serves as the accuracy reference. Every 1D stage output is
scaled by 1/4 before buffering (and re-amplified by 4 in the inverse
stages) so that all multiplier operands stay inside [0, 1); the net
forward+inverse gain is exactly 1.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .mac import AccuracySelect, SignMagnitude, mac
from .sc_core import UnsignedFixed

N = 8
SAMPLE_WIDTH = 10          # m: buffer width of every pipeline stage
INTER_STAGE_SHIFT = 2      # divide by 4 between 1D stages
PIXEL_SHIFT = SAMPLE_WIDTH - 8  # pixel p maps to raw p << PIXEL_SHIFT (p/256)
DEFAULT_PARALLELISM = 8    # pixels fed to the transform block per cycle


@lru_cache(maxsize=None)
def dct_basis() -> np.ndarray:
    """Orthonormal 8-point DCT-II matrix C.

    Row 0 is 1/sqrt(8); row k >= 1 is sqrt(2/8) * cos((2i+1) k pi / 16).
    The inverse transform is C transposed.
    """
    c = np.zeros((N, N))
    c[0, :] = 1.0 / math.sqrt(N)
    for k in range(1, N):
        for i in range(N):
            c[k, i] = math.sqrt(2.0 / N) * math.cos((2 * i + 1) * k * math.pi / (2 * N))
    c.setflags(write=False)
    return c


def dct1d_ref(a) -> np.ndarray:
    """Reference forward 1D transform (float64)."""
    return dct_basis() @ np.asarray(a, dtype=np.float64)


def idct1d_ref(f) -> np.ndarray:
    """Reference inverse 1D transform (float64)."""
    return dct_basis().T @ np.asarray(f, dtype=np.float64)


def dct2d_ref(block) -> np.ndarray:
    c = dct_basis()
    return c @ np.asarray(block, dtype=np.float64) @ c.T


def idct2d_ref(block) -> np.ndarray:
    c = dct_basis()
    return c.T @ np.asarray(block, dtype=np.float64) @ c


@lru_cache(maxsize=None)
def _coeff_arrays(b: int) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient table at width b as (signs, scaled weights) arrays."""
    c = dct_basis()
    signs = np.where(c < 0, -1, 1).astype(np.int64)
    # round(|c| * 2**b), ties away from zero
    weights = np.floor(np.abs(c) * (1 << b) + 0.5).astype(np.int64)
    signs.setflags(write=False)
    weights.setflags(write=False)
    return signs, weights


def quantize_coefficients(b: int) -> list[list[SignMagnitude]]:
    """Transform coefficients as b-bit sign-magnitude values.

    Entry (k, i) is the rounded basis factor; every magnitude is <= 1.
    """
    if not 6 <= b <= 10:
        raise ValueError(f"coefficient width {b} out of range 6..10")
    signs, weights = _coeff_arrays(b)
    return [
        [SignMagnitude(int(signs[k, i]), UnsignedFixed(b, int(weights[k, i]))) for i in range(N)]
        for k in range(N)
    ]


@dataclass(frozen=True, eq=False)
class Block8x8:
    """8x8 grid of sign-magnitude samples, stored as parallel arrays."""

    signs: np.ndarray  # (8, 8) int64, entries +1/-1
    raws: np.ndarray   # (8, 8) int64 magnitudes, < 2**width
    width: int = SAMPLE_WIDTH

    def __post_init__(self):
        for name, a in (("signs", self.signs), ("raws", self.raws)):
            if a.shape != (N, N):
                raise ValueError(f"{name} must be 8x8, got {a.shape}")
        if not np.all(np.abs(self.signs) == 1):
            raise ValueError("signs must be +1/-1")
        if np.any(self.raws < 0) or np.any(self.raws >= (1 << self.width)):
            raise ValueError(f"magnitudes out of range for width {self.width}")

    @classmethod
    def zero(cls, width: int = SAMPLE_WIDTH) -> "Block8x8":
        return cls(np.ones((N, N), dtype=np.int64), np.zeros((N, N), dtype=np.int64), width)

    @classmethod
    def from_samples(cls, samples) -> "Block8x8":
        """Build from an 8x8 nested sequence of SignMagnitude values."""
        width = samples[0][0].width
        signs = np.array([[s.sign for s in row] for row in samples], dtype=np.int64)
        raws = np.array([[s.mag.raw for s in row] for row in samples], dtype=np.int64)
        return cls(signs, raws, width)

    def sample(self, r: int, c: int) -> SignMagnitude:
        return SignMagnitude(int(self.signs[r, c]), UnsignedFixed(self.width, int(self.raws[r, c])))

    def values(self) -> np.ndarray:
        """Represented real values as a float64 array."""
        return self.signs * self.raws / float(1 << self.width)

    def __eq__(self, other):
        if not isinstance(other, Block8x8):
            return NotImplemented
        if self.width != other.width or not np.array_equal(self.raws, other.raws):
            return False
        nonzero = self.raws != 0
        return bool(np.all(self.signs[nonzero] == other.signs[nonzero]))


@dataclass(frozen=True, eq=False)
class FrequencyMask:
    """Binary 8x8 frequency-domain mask: 1 keeps a coefficient, 0 zeroes it."""

    m: np.ndarray

    def __post_init__(self):
        if self.m.shape != (N, N):
            raise ValueError(f"mask must be 8x8, got {self.m.shape}")
        if not np.all((self.m == 0) | (self.m == 1)):
            raise ValueError("mask entries must be 0 or 1")

    @classmethod
    def allpass(cls) -> "FrequencyMask":
        return cls(np.ones((N, N), dtype=np.int64))

    @classmethod
    def lowpass(cls, k: int = 4) -> "FrequencyMask":
        """Zonal low-pass: keep coefficients with both indices below k."""
        if not 1 <= k <= N:
            raise ValueError(f"lowpass corner {k} out of range 1..8")
        m = np.zeros((N, N), dtype=np.int64)
        m[:k, :k] = 1
        return cls(m)

    @classmethod
    def from_array(cls, a) -> "FrequencyMask":
        return cls(np.asarray(a, dtype=np.int64))

    def __eq__(self, other):
        if not isinstance(other, FrequencyMask):
            return NotImplemented
        return bool(np.array_equal(self.m, other.m))


def apply_mask(block, mask: FrequencyMask):
    """Elementwise product with the mask.

    Accepts a fixed-point Block8x8 or a float array (reference path).
    """
    if isinstance(block, Block8x8):
        raws = block.raws * mask.m
        signs = np.where(mask.m == 0, 1, block.signs)
        return Block8x8(signs, raws, block.width)
    return np.asarray(block, dtype=np.float64) * mask.m


def dct1d_sc(a, sel: AccuracySelect):
    """Forward 1D transform of 8 samples on the MAC unit.

    Returns (outputs, cycles); outputs are scaled by 1/4 before storage.
    """
    table = quantize_coefficients(sel.bitwidth)
    outputs = []
    cycles = 0
    for k in range(N):
        r = mac(a, table[k], sel, result_shift=INTER_STAGE_SHIFT)
        outputs.append(r.value)
        cycles += r.cycles_fixed
    return outputs, cycles


def idct1d_sc(f, sel: AccuracySelect):
    """Inverse 1D transform: transposed coefficients, compensating gain 4."""
    table = quantize_coefficients(sel.bitwidth)
    outputs = []
    cycles = 0
    for i in range(N):
        column = [table[k][i] for k in range(N)]
        r = mac(f, column, sel, result_shift=-INTER_STAGE_SHIFT)
        outputs.append(r.value)
        cycles += r.cycles_fixed
    return outputs, cycles


def _mac_stage(signs, raws, width, csigns, weights, b, result_shift):
    """One 1D MAC stage applied to every column of an 8-wide sample array.

    Bit-identical to eight mac() calls per column; vectorized so whole
    images stay tractable. Returns (signs, raws, clamp count).
    """
    xb = raws >> (width - b)
    t = np.arange(b, dtype=np.int64)
    # occurrences of stream-bit t within a prefix of length w
    counts = (weights[None, :, :] + (1 << (b - 1 - t))[:, None, None]) >> (b - t)[:, None, None]
    bits = (xb[None, :, :] >> t[:, None, None]) & 1
    prod = np.einsum("tki,tij->kij", counts, bits)
    acc = np.einsum("ki,ij,kij->kj", csigns, signs, prod)

    out_signs = np.where(acc >= 0, 1, -1).astype(np.int64)
    mag = np.abs(acc)
    if result_shift >= 0:
        mag >>= result_shift
    else:
        mag <<= -result_shift
    clamps = int(np.count_nonzero(mag >= (1 << b)))
    mag = np.minimum(mag, (1 << b) - 1)
    return out_signs, mag << (width - b), clamps


_STAGE_CYCLES = N * N  # MACs per stage x terms per MAC; times 2**b per frame


def _dct2d_stats(block: Block8x8, sel: AccuracySelect, inverse: bool):
    b = sel.bitwidth
    csigns, weights = _coeff_arrays(b)
    shift = INTER_STAGE_SHIFT
    if inverse:
        # inverse uses the transposed table, amplifies, and mirrors the
        # pass order (rows first, then columns)
        csigns, weights, shift = csigns.T, weights.T, -shift

    if not inverse:
        # columns, then rows; the intermediate buffer holds the first pass
        s1, r1, c1 = _mac_stage(block.signs, block.raws, block.width, csigns, weights, b, shift)
        s2, r2, c2 = _mac_stage(s1.T, r1.T, block.width, csigns, weights, b, shift)
        s2, r2 = s2.T, r2.T
    else:
        s1, r1, c1 = _mac_stage(block.signs.T, block.raws.T, block.width, csigns, weights, b, shift)
        s1, r1 = s1.T, r1.T
        s2, r2, c2 = _mac_stage(s1, r1, block.width, csigns, weights, b, shift)

    cycles = 2 * _STAGE_CYCLES * N * (1 << b)
    return Block8x8(s2, r2, block.width), cycles, c1 + c2


def dct2d(block: Block8x8, sel: AccuracySelect):
    """Separable forward 2D transform: columns first, then rows."""
    out, cycles, _ = _dct2d_stats(block, sel, inverse=False)
    return out, cycles


def idct2d(block: Block8x8, sel: AccuracySelect):
    """Separable inverse 2D transform: rows first, then columns."""
    out, cycles, _ = _dct2d_stats(block, sel, inverse=True)
    return out, cycles


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit grayscale image."""

    pixels: np.ndarray  # (height, width) uint8

    def __post_init__(self):
        if self.pixels.ndim != 2 or self.pixels.size == 0:
            raise ValueError("image must be a nonempty 2D pixel array")
        if self.pixels.dtype != np.uint8:
            raise ValueError("image pixels must be uint8")

    @classmethod
    def from_array(cls, a) -> "GrayImage":
        a = np.asarray(a)
        if a.size and (a.min() < 0 or a.max() > 255):
            raise ValueError("pixel values must lie in 0..255")
        return cls(a.astype(np.uint8))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return bool(np.array_equal(self.pixels, other.pixels))


def psnr(a: GrayImage, b: GrayImage) -> float:
    """Peak signal-to-noise ratio in dB; identical images report inf."""
    if a.pixels.shape != b.pixels.shape:
        raise ValueError(f"dimension mismatch: {a.pixels.shape} vs {b.pixels.shape}")
    diff = a.pixels.astype(np.float64) - b.pixels.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0 * 255.0 / mse)


@dataclass(frozen=True)
class PipelineReport:
    """Whole-image run summary."""

    output: GrayImage
    total_cycles_fixed: int
    clamp_count: int
    psnr_vs_input: float
    psnr_vs_reference: float


def _pad_to_blocks(pixels: np.ndarray) -> np.ndarray:
    h, w = pixels.shape
    return np.pad(pixels, ((0, -h % N), (0, -w % N)), mode="edge")


def _denormalize(signs: np.ndarray, raws: np.ndarray) -> np.ndarray:
    # raw units are 1/1024 of full scale; a pixel step is 4 units.
    # Round half away from zero, then clamp to the pixel range.
    mag_px = (raws + (1 << (PIXEL_SHIFT - 1))) >> PIXEL_SHIFT
    return np.clip(signs * mag_px, 0, 255).astype(np.uint8)


def _fixed_block(pixels: np.ndarray, sel: AccuracySelect, mask: FrequencyMask):
    block = Block8x8(
        np.ones((N, N), dtype=np.int64),
        pixels.astype(np.int64) << PIXEL_SHIFT,
        SAMPLE_WIDTH,
    )
    f, cyc_f, cl_f = _dct2d_stats(block, sel, inverse=False)
    masked = apply_mask(f, mask)
    out, cyc_i, cl_i = _dct2d_stats(masked, sel, inverse=True)
    return _denormalize(out.signs, out.raws), cyc_f + cyc_i, cl_f + cl_i


def _reference_block(pixels: np.ndarray, mask: FrequencyMask) -> np.ndarray:
    b = pixels.astype(np.float64) / 256.0
    out = idct2d_ref(apply_mask(dct2d_ref(b), mask)) * 256.0
    rounded = np.sign(out) * np.floor(np.abs(out) + 0.5)
    return np.clip(rounded, 0, 255).astype(np.uint8)


def reference_pipeline(img: GrayImage, mask: FrequencyMask) -> GrayImage:
    """Float64 pipeline with the same blocking and mask; the accuracy baseline."""
    padded = _pad_to_blocks(img.pixels)
    out = np.empty_like(padded)
    for by in range(0, padded.shape[0], N):
        for bx in range(0, padded.shape[1], N):
            out[by:by + N, bx:bx + N] = _reference_block(padded[by:by + N, bx:bx + N], mask)
    return GrayImage(out[: img.height, : img.width])


def process_image(
    img: GrayImage,
    sel: AccuracySelect,
    mask: FrequencyMask,
    parallelism: int = DEFAULT_PARALLELISM,
    workers: int = 1,
) -> PipelineReport:
    """Run the fixed-point pipeline over a whole image.

    Pixels are padded to 8x8 blocks by edge replication and normalized
    to p/256 at the 10-bit stage width. Per block: forward 2D transform,
    frequency mask, inverse 2D transform, then rounding de-normalization
    back to 0..255. Total cycles are the summed fixed MAC schedules
    divided by the hardware parallelism factor. Blocks may be processed
    by several workers; the result is bit-identical to sequential order.
    """
    if parallelism < 1:
        raise ValueError("parallelism factor must be >= 1")
    padded = _pad_to_blocks(img.pixels)
    coords = [
        (by, bx)
        for by in range(0, padded.shape[0], N)
        for bx in range(0, padded.shape[1], N)
    ]

    def run(coord):
        by, bx = coord
        return _fixed_block(padded[by:by + N, bx:bx + N], sel, mask)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, coords))
    else:
        results = [run(c) for c in coords]

    out = np.empty_like(padded)
    total_cycles = 0
    clamp_count = 0
    for (by, bx), (pix, cycles, clamps) in zip(coords, results):
        out[by:by + N, bx:bx + N] = pix
        total_cycles += cycles
        clamp_count += clamps

    output = GrayImage(out[: img.height, : img.width])
    reference = reference_pipeline(img, mask)
    return PipelineReport(
        output=output,
        total_cycles_fixed=total_cycles // parallelism,
        clamp_count=clamp_count,
        psnr_vs_input=psnr(output, img),
        psnr_vs_reference=psnr(output, reference),
    )
