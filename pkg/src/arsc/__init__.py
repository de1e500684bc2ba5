"""Counter-based stochastic computing simulator with a run-time
accuracy-reconfigurable DCT/IDCT image pipeline and calibrated
timing/power/aging platform models."""

from .sc_core import (
    BIPOLAR,
    UNIPOLAR,
    BitStream,
    CbscResult,
    LfsrConfig,
    UnsignedFixed,
    and_multiply,
    cbsc_multiply,
    lfsr_step,
    mux_add,
    sng_conventional,
    sng_deterministic,
    stream_to_binary,
    unary_gen,
    xnor_multiply,
)
from .mac import (
    BITWIDTHS,
    AccuracySelect,
    MacResult,
    SignMagnitude,
    mac,
    restore_width,
    signed_product,
    truncate,
)
from .dct import (
    Block8x8,
    FrequencyMask,
    GrayImage,
    PipelineReport,
    apply_mask,
    dct1d_ref,
    dct1d_sc,
    dct2d,
    idct1d_ref,
    idct1d_sc,
    idct2d,
    process_image,
    psnr,
    quantize_coefficients,
)
from .platform_model import (
    AgingSchedule,
    CalibrationError,
    CycleModel,
    OperatingPoint,
    PowerModel,
    calibrate_cycles,
    calibrate_power,
    frequency_at_year,
    min_bitwidth_for_throughput,
    min_frequency_for_throughput,
    select_config,
    throughput,
)

__version__ = "0.1.0"
