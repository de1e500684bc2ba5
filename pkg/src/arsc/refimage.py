"""Bundled synthetic reference image.

A deterministic 256x256 test picture (diagonal ramp, two sinusoidal
textures, a gaussian highlight) so accuracy properties can be checked
without an external corpus.
"""

from __future__ import annotations

import numpy as np

from .dct import GrayImage

SIZE = 256


def reference_image() -> GrayImage:
    y, x = np.mgrid[0:SIZE, 0:SIZE].astype(np.float64)
    v = 40.0 + 150.0 * (x + y) / (2 * (SIZE - 1))
    v += 35.0 * np.sin(2.0 * np.pi * x / 16.3) * np.cos(2.0 * np.pi * y / 23.7)
    v += 18.0 * np.sin(2.0 * np.pi * (x + 2 * y) / 53.0)
    v += 45.0 * np.exp(-((x - 96.0) ** 2 + (y - 160.0) ** 2) / (2.0 * 48.0**2))
    return GrayImage(np.clip(np.rint(v), 0, 255).astype(np.uint8))
