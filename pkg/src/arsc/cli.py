"""Command-line front end: image runs, experiment sweeps, verification.

Commands:
  compress    run one image through the fixed-point pipeline
  sweep       operating-point table (frequency/power/PSNR/latency) per bit-width
  aging       year-by-year clock, chosen bit-width, and throughput
  verify-mul  exhaustive multiplier identity and error report
  calibrate   fit cycle/power models from a measurement CSV

All commands are deterministic given their flags and --seed; report
files are byte-identical across runs.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dct import FrequencyMask, process_image
from .mac import AccuracySelect, BITWIDTHS
from .pgm import read_pgm, write_pgm
from .platform_model import (
    AgingSchedule,
    CalibrationError,
    CycleModel,
    PowerModel,
    FPGA_AGING_ANCHORS,
    FPGA_TABLE,
    calibrate_cycles,
    calibrate_power,
    cycle_residuals,
    frequency_at_year,
    min_bitwidth_for_throughput,
    min_frequency_for_throughput,
    power_residuals,
    throughput,
)
from .sc_core import (
    ALTERNATE_TAPS,
    LfsrConfig,
    UnsignedFixed,
    and_multiply,
    cbsc_multiply,
    sng_conventional,
    sng_deterministic,
    stream_to_binary,
    unary_gen,
)

REPORT_HEADER = "bitwidth,freq_mhz,power_w,psnr_db,latency_s,throughput_fps"
AGING_HEADER = "year,freq_mhz,bitwidth,throughput_fps,feasible"
VERIFY_HEADER = "n,pairs,identity_ok,cbsc_max_abs_err,cbsc_mean_abs_err,conv_mean_abs_err"
DEFAULT_TARGET_FPS = 7.19


@dataclass(frozen=True)
class PlatformConfig:
    """Loaded platform description: calibrated models plus constants."""

    cycle_model: CycleModel
    power_model: PowerModel
    schedule: AgingSchedule
    base_freq_mhz: float
    parallelism: int


def default_platform() -> PlatformConfig:
    rows = [(b, f, lat) for b, f, _, lat in FPGA_TABLE]
    return PlatformConfig(
        cycle_model=calibrate_cycles(rows),
        power_model=calibrate_power([(f, w) for _, f, w, _ in FPGA_TABLE]),
        schedule=AgingSchedule(FPGA_AGING_ANCHORS),
        base_freq_mhz=FPGA_TABLE[0][1],
        parallelism=8,
    )


def platform_to_dict(cfg: PlatformConfig) -> dict:
    return {
        "cycle_model": {
            "c_sc_cycles": cfg.cycle_model.c_sc,
            "c_ovh_cycles": cfg.cycle_model.c_ovh,
        },
        "power_model": {
            "p_static_w": cfg.power_model.p_static,
            "p_dyn_w_per_mhz": cfg.power_model.p_dyn,
        },
        "base_freq_mhz": cfg.base_freq_mhz,
        "aging_anchors_years_mhz": [list(a) for a in cfg.schedule.anchors],
        "parallelism": cfg.parallelism,
    }


def save_platform(cfg: PlatformConfig, path) -> None:
    Path(path).write_text(json.dumps(platform_to_dict(cfg), indent=2) + "\n")


def load_platform(path=None) -> PlatformConfig:
    """Load a platform config file, or the bundled FPGA defaults."""
    if path is None:
        return default_platform()
    try:
        doc = json.loads(Path(path).read_text())
        return PlatformConfig(
            cycle_model=CycleModel(
                float(doc["cycle_model"]["c_sc_cycles"]),
                float(doc["cycle_model"]["c_ovh_cycles"]),
            ),
            power_model=PowerModel(
                float(doc["power_model"]["p_static_w"]),
                float(doc["power_model"]["p_dyn_w_per_mhz"]),
            ),
            schedule=AgingSchedule(
                tuple((float(y), float(f)) for y, f in doc["aging_anchors_years_mhz"])
            ),
            base_freq_mhz=float(doc["base_freq_mhz"]),
            parallelism=int(doc.get("parallelism", 8)),
        )
    except (KeyError, TypeError, json.JSONDecodeError) as e:
        raise ValueError(f"malformed platform config {path}: {e}") from None


def parse_mask(spec: str) -> FrequencyMask:
    """Mask spec: 'allpass', 'lowpass:K', or 'file:PATH' (8x8 of 0/1)."""
    if spec == "allpass":
        return FrequencyMask.allpass()
    if spec.startswith("lowpass:"):
        return FrequencyMask.lowpass(int(spec.split(":", 1)[1]))
    if spec == "lowpass":
        return FrequencyMask.lowpass()
    if spec.startswith("file:"):
        path = spec.split(":", 1)[1]
        rows = []
        for line in Path(path).read_text().splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            cells = line.split() if " " in line else list(line)
            rows.append([int(c) for c in cells])
        return FrequencyMask.from_array(rows)
    raise ValueError(f"unknown mask spec {spec!r} (allpass, lowpass:K, file:PATH)")


def _write_report(path, header: str, rows) -> None:
    lines = [header] + [",".join(row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def _fmt(v: float, places: int = 6) -> str:
    return f"{v:.{places}f}"


def _fold_seed(seed: int, width: int) -> int:
    # any integer maps to a nonzero width-bit LFSR state
    return (seed - 1) % ((1 << width) - 1) + 1


def _metric_row(cfg: PlatformConfig, b: int, freq: float, psnr_db: float):
    cm = cfg.cycle_model
    latency = cm.cycles_per_frame(b) / (cfg.base_freq_mhz * 1e6)
    return [
        str(b),
        _fmt(freq, 4),
        _fmt(cfg.power_model.power(freq), 6),
        _fmt(psnr_db, 4),
        _fmt(latency, 6),
        _fmt(throughput(cm, b, freq), 4),
    ]


def cmd_compress(args) -> int:
    img = read_pgm(args.input)
    sel = AccuracySelect.from_bitwidth(args.bits)
    mask = parse_mask(args.mask)
    cfg = load_platform(args.platform)

    report = process_image(
        img, sel, mask, parallelism=cfg.parallelism, workers=args.workers
    )
    write_pgm(report.output, args.output)

    print(f"input: {args.input} ({img.width}x{img.height})")
    print(f"bitwidth: {args.bits}  mask: {args.mask}")
    print(f"psnr_vs_input_db: {_fmt(report.psnr_vs_input, 4)}")
    print(f"psnr_vs_reference_db: {_fmt(report.psnr_vs_reference, 4)}")
    print(f"simulated_cycles_fixed: {report.total_cycles_fixed}")
    print(f"clamp_count: {report.clamp_count}")
    print(f"wrote: {args.output}")

    if args.report:
        row = _metric_row(cfg, args.bits, cfg.base_freq_mhz, report.psnr_vs_reference)
        _write_report(args.report, REPORT_HEADER, [row])
    return 0


def cmd_sweep(args) -> int:
    img = read_pgm(args.input)
    mask = parse_mask(args.mask)
    cfg = load_platform(args.platform)

    rows = []
    print(REPORT_HEADER)
    for b in BITWIDTHS:
        freq = min_frequency_for_throughput(cfg.cycle_model, b, args.target)
        rep = process_image(
            img, AccuracySelect.from_bitwidth(b), mask, parallelism=cfg.parallelism
        )
        row = _metric_row(cfg, b, freq, rep.psnr_vs_reference)
        rows.append(row)
        print(",".join(row))

    if args.report:
        _write_report(args.report, REPORT_HEADER, rows)
    return 0


def cmd_aging(args) -> int:
    cfg = load_platform(args.platform)
    rows = []
    print(AGING_HEADER)
    for year in range(args.years + 1):
        freq = frequency_at_year(cfg.schedule, float(year))
        b = min_bitwidth_for_throughput(cfg.cycle_model, freq, args.target)
        if b is None:
            row = [str(year), _fmt(freq, 4), "", "", "no"]
        else:
            tp = throughput(cfg.cycle_model, b, freq)
            row = [str(year), _fmt(freq, 4), str(b), _fmt(tp, 4), "yes"]
        rows.append(row)
        print(",".join(row))

    if args.report:
        _write_report(args.report, AGING_HEADER, rows)
    return 0


def cmd_verify_mul(args) -> int:
    violations = 0
    rows = []
    for n in range(3, args.max_n + 1):
        size = 1 << n
        pairs = 0
        identity_ok = True
        cbsc_errs = []
        for x in range(size):
            xv = UnsignedFixed(n, x)
            stream = sng_deterministic(xv)
            for w in range(size + 1):
                gate = stream_to_binary(and_multiply(stream, unary_gen(w, size)))
                product, _ = cbsc_multiply(xv, w)
                if product != gate:
                    identity_ok = False
                    violations += 1
                cbsc_errs.append(abs(product / size - (x * w) / (size * size)))
                pairs += 1

        # conventional multiplier: two decorrelated LFSR generators
        cfg_x = LfsrConfig(n, seed=_fold_seed(args.seed, n))
        cfg_w = LfsrConfig(n, ALTERNATE_TAPS[n], seed=_fold_seed(args.seed ^ 0x5A5A5A, n))
        sx = [sng_conventional(UnsignedFixed(n, x), size, cfg_x) for x in range(size)]
        sw = [sng_conventional(UnsignedFixed(n, w), size, cfg_w) for w in range(size)]
        conv_errs = []
        for x in range(size):
            for w in range(size):
                approx = stream_to_binary(and_multiply(sx[x], sw[w])) / size
                conv_errs.append(abs(approx - (x * w) / (size * size)))

        cbsc_max = max(cbsc_errs)
        cbsc_mean = float(np.mean(cbsc_errs))
        conv_mean = float(np.mean(conv_errs))
        rows.append(
            [
                str(n),
                str(pairs),
                "yes" if identity_ok else "no",
                f"{cbsc_max:.8f}",
                f"{cbsc_mean:.8f}",
                f"{conv_mean:.8f}",
            ]
        )
        print(
            f"n={n}: pairs={pairs} identity={'ok' if identity_ok else 'VIOLATED'} "
            f"cbsc_max_err={cbsc_max:.6f} cbsc_mean_err={cbsc_mean:.6f} "
            f"conv_mean_err={conv_mean:.6f} "
            f"(cbsc<=conv: {'yes' if cbsc_mean <= conv_mean else 'no'})"
        )

    if args.report:
        _write_report(args.report, VERIFY_HEADER, rows)
    if violations:
        print(f"error: {violations} identity violations", file=sys.stderr)
        return 1
    return 0


def _read_rows_csv(path):
    """Measurement rows: CSV with bitwidth,freq_mhz,power_w,latency_s columns."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"empty rows file {path}")
    header = [h.strip() for h in lines[0].split(",")]
    needed = ("bitwidth", "freq_mhz", "power_w", "latency_s")
    missing = [c for c in needed if c not in header]
    if missing:
        raise ValueError(f"rows file missing columns: {', '.join(missing)}")
    idx = {c: header.index(c) for c in needed}
    rows = []
    for lineno, ln in enumerate(lines[1:], start=2):
        cells = [c.strip() for c in ln.split(",")]
        try:
            rows.append(
                (
                    int(cells[idx["bitwidth"]]),
                    float(cells[idx["freq_mhz"]]),
                    float(cells[idx["power_w"]]),
                    float(cells[idx["latency_s"]]),
                )
            )
        except (ValueError, IndexError):
            raise ValueError(f"bad row at line {lineno} of {path}: {ln!r}") from None
    return rows


def cmd_calibrate(args) -> int:
    rows = _read_rows_csv(args.rows)
    cycle_rows = [(b, f, lat) for b, f, _, lat in rows]
    power_rows = [(f, w) for _, f, w, _ in rows]

    cm = calibrate_cycles(cycle_rows)
    pm = calibrate_power(power_rows)

    print(f"c_sc_cycles: {cm.c_sc:.4f}")
    print(f"c_ovh_cycles: {cm.c_ovh:.4f}")
    print(f"p_static_w: {pm.p_static:.6f}")
    print(f"p_dyn_w_per_mhz: {pm.p_dyn:.8f}")
    for (b, f, _, _), cres, pres in zip(
        rows, cycle_residuals(cm, cycle_rows), power_residuals(pm, power_rows)
    ):
        print(f"b={b} f={f:g}MHz: cycle_residual={cres:.2%} power_residual={pres:.2%}")

    cfg = PlatformConfig(
        cycle_model=cm,
        power_model=pm,
        schedule=AgingSchedule(FPGA_AGING_ANCHORS),
        base_freq_mhz=max(rows, key=lambda r: r[0])[1],
        parallelism=8,
    )
    save_platform(cfg, args.out)
    print(f"wrote: {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arsc",
        description="Counter-based stochastic computing DCT/IDCT simulator "
        "with calibrated platform models",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--report", type=Path, help="write the command's CSV report here")
    common.add_argument("--seed", type=int, default=1, help="LFSR seed (default 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", parents=[common], help="run one image through the pipeline")
    p.add_argument("--in", dest="input", required=True, type=Path, help="input PGM (P5)")
    p.add_argument("--out", dest="output", required=True, type=Path, help="output PGM")
    p.add_argument("--bits", type=int, choices=BITWIDTHS, default=10, help="accuracy bit-width")
    p.add_argument("--mask", default="lowpass:4", help="allpass | lowpass:K | file:PATH")
    p.add_argument("--platform", type=Path, help="platform config (default: bundled FPGA fit)")
    p.add_argument("--workers", type=int, default=1, help="block-processing threads")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("sweep", parents=[common], help="per-bit-width operating point table")
    p.add_argument("--in", dest="input", required=True, type=Path, help="input PGM (P5)")
    p.add_argument("--platform", type=Path, help="platform config (default: bundled FPGA fit)")
    p.add_argument("--target", type=float, default=DEFAULT_TARGET_FPS, help="target throughput (fps)")
    p.add_argument("--mask", default="lowpass:4", help="allpass | lowpass:K | file:PATH")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("aging", parents=[common], help="aged clock and bit-width per year")
    p.add_argument("--platform", type=Path, help="platform config (default: bundled FPGA fit)")
    p.add_argument("--target", type=float, default=DEFAULT_TARGET_FPS, help="target throughput (fps)")
    p.add_argument("--years", type=int, default=10, help="last year to evaluate")
    p.set_defaults(func=cmd_aging)

    p = sub.add_parser("verify-mul", parents=[common], help="exhaustive multiplier verification")
    p.add_argument("--max-n", type=int, choices=range(3, 11), default=8, metavar="N",
                   help="largest operand width to sweep (3..10)")
    p.set_defaults(func=cmd_verify_mul)

    p = sub.add_parser("calibrate", parents=[common], help="fit platform models from a rows CSV")
    p.add_argument("--rows", required=True, type=Path,
                   help="CSV with bitwidth,freq_mhz,power_w,latency_s columns")
    p.add_argument("--out", required=True, type=Path, help="platform config to write")
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CalibrationError as e:
        print(f"calibration error: {e}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
