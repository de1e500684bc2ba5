"""Calibrated timing, power, and aging models plus the run-time policy.

The cycle and power models are least-squares fits of measured operating
points of the FPGA implementation (Spartan-6 XC6SLX45); the aging
schedule interpolates measured end-of-life frequencies. The policy picks
the largest bit-width that still meets a throughput target at the
current (aged) clock.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .mac import BITWIDTHS


class CalibrationError(ValueError):
    """A model fit violated its residual bound or had degenerate input."""


# Measured operating points of the FPGA design, one row per bit-width:
# (bitwidth, throughput-preserving frequency MHz, power W, latency s).
# Latencies are at the pre-aging base clock, the 10-bit row's frequency.
FPGA_TABLE = (
    (10, 85.7, 0.292, 0.139),
    (9, 43.8, 0.177, 0.071),
    (8, 22.9, 0.120, 0.037),
    (7, 12.4, 0.092, 0.020),
    (6, 7.1, 0.077, 0.012),
)

# Aged maximum clock, (years, MHz): FPGA emulation and the ASIC synthesis
# of the same design under a degradation-aware cell library.
FPGA_AGING_ANCHORS = ((0.0, 85.7), (10.0, 75.7))
ASIC_AGING_ANCHORS = ((0.0, 1205.0), (10.0, 1064.0))

_RESIDUAL_BOUND = 0.05


@dataclass(frozen=True)
class CycleModel:
    """Cycles per frame at bit-width b: c_sc * 2**b + c_ovh.

    c_sc scales the SC multiplier schedule (proportional to 2**b);
    c_ovh absorbs frame-constant overhead such as buffering and control.
    """

    c_sc: float
    c_ovh: float

    def __post_init__(self):
        if self.c_sc <= 0:
            raise ValueError(f"c_sc must be positive, got {self.c_sc}")
        if self.c_ovh < 0:
            raise ValueError(f"c_ovh must be >= 0, got {self.c_ovh}")

    def cycles_per_frame(self, b: int) -> float:
        return self.c_sc * (1 << b) + self.c_ovh


@dataclass(frozen=True)
class PowerModel:
    """Affine power draw: P(f) = p_static + p_dyn * f, f in MHz."""

    p_static: float
    p_dyn: float

    def __post_init__(self):
        if self.p_static < 0:
            raise ValueError(f"p_static must be >= 0, got {self.p_static}")
        if self.p_dyn <= 0:
            raise ValueError(f"p_dyn must be positive, got {self.p_dyn}")

    def power(self, freq_mhz: float) -> float:
        return self.p_static + self.p_dyn * freq_mhz


@dataclass(frozen=True)
class AgingSchedule:
    """Aged maximum frequency as piecewise-linear (years, MHz) anchors."""

    anchors: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.anchors) < 2:
            raise ValueError("need at least two aging anchors")
        years = [a[0] for a in self.anchors]
        freqs = [a[1] for a in self.anchors]
        if any(b <= a for a, b in zip(years, years[1:])):
            raise ValueError("anchor years must be strictly increasing")
        if any(b > a for a, b in zip(freqs, freqs[1:])):
            raise ValueError("anchor frequencies must be non-increasing")

    @property
    def span(self) -> tuple[float, float]:
        return self.anchors[0][0], self.anchors[-1][0]


@dataclass(frozen=True)
class OperatingPoint:
    """A chosen (bit-width, frequency) pair and its implied metrics."""

    bitwidth: int
    frequency_mhz: float
    throughput_fps: float
    power_w: float
    latency_s: float


def _fit_line(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    slope, intercept = np.polyfit(np.asarray(x, float), np.asarray(y, float), 1)
    return float(slope), float(intercept)


def calibrate_cycles(rows: Sequence[tuple[int, float, float]]) -> CycleModel:
    """Fit the cycle model to measured (bitwidth, freq MHz, latency s) rows.

    Latencies are interpreted at the base clock (the highest-bitwidth
    row's frequency), matching how the design's operating points are
    characterized: per-frame cycles = latency * base_freq * 1e6. Every
    row must be reproduced within 5% or the fit is rejected.
    """
    if len(rows) < 2:
        raise CalibrationError("need at least two calibration rows")
    bits = [int(r[0]) for r in rows]
    if len(set(bits)) != len(bits):
        raise CalibrationError("calibration rows must have distinct bit-widths")
    base_freq = max(rows, key=lambda r: r[0])[1]
    if base_freq <= 0:
        raise CalibrationError("base frequency must be positive")
    x = [float(1 << b) for b in bits]
    cycles = [r[2] * base_freq * 1e6 for r in rows]
    if any(c <= 0 for c in cycles):
        raise CalibrationError("latencies must be positive")

    c_sc, c_ovh = _fit_line(x, cycles)
    if c_sc <= 0:
        raise CalibrationError(f"fit produced non-increasing cycle model (c_sc={c_sc:.4g})")
    # two exact rows can land imperceptibly below zero
    if c_ovh < -1e-6 * max(cycles):
        raise CalibrationError(f"fit produced negative overhead (c_ovh={c_ovh:.4g})")
    model = CycleModel(c_sc, max(c_ovh, 0.0))

    bad = []
    for b, c in zip(bits, cycles):
        res = abs(model.cycles_per_frame(b) - c) / c
        if res > _RESIDUAL_BOUND:
            bad.append((b, res))
    if bad:
        detail = ", ".join(f"b={b}: {res:.1%}" for b, res in bad)
        raise CalibrationError(f"cycle fit residuals exceed 5%: {detail}")
    return model


def cycle_residuals(model: CycleModel, rows: Sequence[tuple[int, float, float]]) -> list[float]:
    """Relative residual per calibration row, in row order."""
    base_freq = max(rows, key=lambda r: r[0])[1]
    out = []
    for b, _, lat in rows:
        c = lat * base_freq * 1e6
        out.append(abs(model.cycles_per_frame(int(b)) - c) / c)
    return out


def calibrate_power(rows: Sequence[tuple[float, float]]) -> PowerModel:
    """Fit the affine power model to measured (freq MHz, watts) rows."""
    if len(rows) < 2:
        raise CalibrationError("need at least two power rows")
    freqs = [float(r[0]) for r in rows]
    watts = [float(r[1]) for r in rows]
    if len(set(freqs)) < 2:
        raise CalibrationError("power rows must cover at least two distinct frequencies")

    p_dyn, p_static = _fit_line(freqs, watts)
    if p_dyn <= 0:
        raise CalibrationError(f"fit produced non-increasing power model (p_dyn={p_dyn:.4g})")
    if p_static < -1e-9:
        raise CalibrationError(f"fit produced negative static power ({p_static:.4g})")
    model = PowerModel(max(p_static, 0.0), p_dyn)

    bad = [
        (f, abs(model.power(f) - w) / w)
        for f, w in zip(freqs, watts)
        if abs(model.power(f) - w) / w > _RESIDUAL_BOUND
    ]
    if bad:
        detail = ", ".join(f"f={f:g}MHz: {res:.1%}" for f, res in bad)
        raise CalibrationError(f"power fit residuals exceed 5%: {detail}")
    return model


def power_residuals(model: PowerModel, rows: Sequence[tuple[float, float]]) -> list[float]:
    return [abs(model.power(f) - w) / w for f, w in rows]


def frequency_at_year(s: AgingSchedule, t: float) -> float:
    """Aged clock at year t by piecewise-linear interpolation; no extrapolation."""
    lo, hi = s.span
    if not lo <= t <= hi:
        raise ValueError(f"year {t} outside schedule span [{lo}, {hi}]")
    years = [a[0] for a in s.anchors]
    freqs = [a[1] for a in s.anchors]
    return float(np.interp(t, years, freqs))


def throughput(cm: CycleModel, b: int, freq_mhz: float) -> float:
    """Frames per second at bit-width b and the given clock."""
    if b not in BITWIDTHS:
        raise ValueError(f"bitwidth {b} not in {BITWIDTHS}")
    if freq_mhz <= 0:
        raise ValueError("frequency must be positive")
    return freq_mhz * 1e6 / cm.cycles_per_frame(b)


def min_bitwidth_for_throughput(cm: CycleModel, freq_mhz: float, target: float) -> Optional[int]:
    """Largest bit-width meeting the target at this clock, or None."""
    if target <= 0:
        raise ValueError("target throughput must be positive")
    for b in BITWIDTHS:
        if throughput(cm, b, freq_mhz) >= target:
            return b
    return None


def min_frequency_for_throughput(cm: CycleModel, b: int, target: float) -> float:
    """Lowest clock (MHz) sustaining the target at bit-width b."""
    if b not in BITWIDTHS:
        raise ValueError(f"bitwidth {b} not in {BITWIDTHS}")
    if target < 0:
        raise ValueError("target throughput must be >= 0")
    return target * cm.cycles_per_frame(b) / 1e6


def select_config(
    cm: CycleModel,
    pm: PowerModel,
    s: AgingSchedule,
    t: float,
    target: float,
) -> OperatingPoint:
    """Pick the operating point at year t: aged clock, most accurate
    feasible bit-width, implied throughput/power/latency."""
    freq = frequency_at_year(s, t)
    b = min_bitwidth_for_throughput(cm, freq, target)
    if b is None:
        raise ValueError(
            f"target {target:g} fps infeasible at {freq:g} MHz even at 6-bit accuracy"
        )
    tp = throughput(cm, b, freq)
    return OperatingPoint(b, freq, tp, pm.power(freq), 1.0 / tp)


def default_cycle_model() -> CycleModel:
    return calibrate_cycles([(b, f, lat) for b, f, _, lat in FPGA_TABLE])


def default_power_model() -> PowerModel:
    return calibrate_power([(f, w) for _, f, w, _ in FPGA_TABLE])


def default_aging_schedule() -> AgingSchedule:
    return AgingSchedule(FPGA_AGING_ANCHORS)
