"""Binary PGM (P5) image I/O, maxval 255 only."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .dct import GrayImage

_WHITESPACE = b" \t\r\n\x0b\x0c"


def read_pgm(path) -> GrayImage:
    """Read a binary PGM file; malformed input reports the byte offset."""
    data = Path(path).read_bytes()
    pos = 0

    def token() -> bytes:
        nonlocal pos
        while pos < len(data):
            c = data[pos : pos + 1]
            if c in (b"\r", b"\n", b" ", b"\t", b"\x0b", b"\x0c"):
                pos += 1
            elif c == b"#":
                while pos < len(data) and data[pos : pos + 1] not in (b"\r", b"\n"):
                    pos += 1
            else:
                break
        if pos >= len(data):
            raise ValueError(f"truncated PGM header at byte {pos}")
        start = pos
        while pos < len(data) and data[pos : pos + 1] not in (
            b"\r", b"\n", b" ", b"\t", b"\x0b", b"\x0c",
        ):
            pos += 1
        return data[start:pos]

    def int_token(what: str) -> int:
        start = pos
        tok = token()
        try:
            return int(tok)
        except ValueError:
            raise ValueError(f"bad {what} {tok!r} at byte {start}") from None

    magic = token()
    if magic != b"P5":
        raise ValueError(f"not a binary PGM (magic {magic!r} at byte 0)")
    width = int_token("width")
    height = int_token("height")
    maxval = int_token("maxval")
    if width <= 0 or height <= 0:
        raise ValueError(f"bad dimensions {width}x{height}")
    if maxval != 255:
        raise ValueError(f"unsupported maxval {maxval} (only 255)")
    if pos >= len(data) or data[pos : pos + 1] not in (
        b"\r", b"\n", b" ", b"\t", b"\x0b", b"\x0c",
    ):
        raise ValueError(f"missing whitespace after header at byte {pos}")
    pos += 1  # exactly one whitespace byte before the raster

    expected = width * height
    raster = data[pos : pos + expected]
    if len(raster) != expected:
        raise ValueError(
            f"truncated raster at byte {pos + len(raster)}: "
            f"expected {expected} bytes, found {len(raster)}"
        )
    pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    return GrayImage(pixels.copy())


def write_pgm(img: GrayImage, path) -> None:
    """Write a binary PGM file."""
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + img.pixels.tobytes())
