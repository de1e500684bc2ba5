"""Transform pipeline: reference path, quantized tables, fixed-point 2D."""

import math

import numpy as np
import pytest
import scipy.fft
from hypothesis import given, settings
from hypothesis import strategies as st

from arsc.dct import (
    Block8x8,
    FrequencyMask,
    GrayImage,
    INTER_STAGE_SHIFT,
    N,
    SAMPLE_WIDTH,
    apply_mask,
    dct1d_ref,
    dct1d_sc,
    dct2d,
    dct2d_ref,
    dct_basis,
    idct1d_ref,
    idct1d_sc,
    idct2d,
    idct2d_ref,
    process_image,
    psnr,
    quantize_coefficients,
)
from arsc.mac import AccuracySelect, SignMagnitude
from arsc.refimage import reference_image
from arsc.sc_core import UnsignedFixed


def sm(sign, raw, width=SAMPLE_WIDTH):
    return SignMagnitude(sign, UnsignedFixed(width, raw))


def const_vector(raw, sign=1):
    return [sm(sign, raw)] * N


class TestReferenceTransform:
    def test_constant_signal(self):
        f = dct1d_ref(np.ones(8))
        assert abs(f[0] - math.sqrt(8)) < 1e-12
        assert np.max(np.abs(f[1:])) < 1e-12
        back = idct1d_ref(f)
        assert np.max(np.abs(back - 1.0)) < 1e-12

    def test_zeros(self):
        assert np.all(dct1d_ref(np.zeros(8)) == 0)
        assert np.all(idct1d_ref(np.zeros(8)) == 0)

    def test_matches_scipy(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            a = rng.uniform(-1, 1, 8)
            np.testing.assert_allclose(dct1d_ref(a), scipy.fft.dct(a, 2, norm="ortho"),
                                       atol=1e-12)
            np.testing.assert_allclose(idct1d_ref(a), scipy.fft.idct(a, 2, norm="ortho"),
                                       atol=1e-12)

    def test_round_trip_and_parseval(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            a = rng.uniform(-1, 1, 8)
            f = dct1d_ref(a)
            assert np.max(np.abs(idct1d_ref(f) - a)) < 1e-9
            assert abs(np.linalg.norm(f) - np.linalg.norm(a)) < 1e-9

    def test_2d_round_trip(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            b = rng.uniform(-1, 1, (8, 8))
            assert np.max(np.abs(idct2d_ref(dct2d_ref(b)) - b)) < 1e-9

    def test_2d_constant_dc_gain(self):
        f = dct2d_ref(np.full((8, 8), 0.25))
        assert abs(f[0, 0] - 8 * 0.25) < 1e-12
        assert np.max(np.abs(f.flatten()[1:])) < 1e-12


class TestQuantizedCoefficients:
    def test_matches_independent_basis(self):
        # oracle: scipy's orthonormal DCT-II matrix, quantized the same way
        basis = scipy.fft.dct(np.eye(8), 2, norm="ortho", axis=0)
        for b in range(6, 11):
            table = quantize_coefficients(b)
            for k in range(8):
                for i in range(8):
                    expect = int(math.floor(abs(basis[k, i]) * (1 << b) + 0.5))
                    assert table[k][i].mag.raw == expect
                    if expect:
                        assert table[k][i].sign == (1 if basis[k, i] >= 0 else -1)

    def test_dc_row_value(self):
        # 1/sqrt(8) = 0.35355...: raw 91 at 8 bits, 362 at 10 bits
        assert all(quantize_coefficients(8)[0][i].mag.raw == 91 for i in range(8))
        assert all(quantize_coefficients(10)[0][i].mag.raw == 362 for i in range(8))

    def test_mid_band_values(self):
        # |row 4| is 0.5*cos(pi/4) = 0.35355... everywhere, same raw as DC
        table = quantize_coefficients(8)
        assert table[4][0].mag.raw == 91 and table[4][0].sign == 1
        assert table[4][1].mag.raw == 91 and table[4][1].sign == -1
        # row 2 head: 0.5*cos(pi/8) * 1024 rounds to 473
        assert quantize_coefficients(10)[2][0].mag.raw == 473

    def test_all_magnitudes_at_most_one(self):
        for b in range(6, 11):
            for row in quantize_coefficients(b):
                for c in row:
                    assert c.mag.raw <= (1 << b)

    def test_width_range(self):
        with pytest.raises(ValueError):
            quantize_coefficients(5)
        with pytest.raises(ValueError):
            quantize_coefficients(11)


class TestFixed1d:
    def test_zeros(self):
        sel = AccuracySelect.from_bitwidth(10)
        outs, cycles = dct1d_sc(const_vector(0), sel)
        assert all(o.mag.raw == 0 for o in outs)
        assert cycles == 8 * 8 * (1 << 10)

    def test_constant_half(self):
        sel = AccuracySelect.from_bitwidth(10)
        outs, _ = dct1d_sc(const_vector(512), sel)
        # DC lands near sqrt(8)*0.5/4; every AC output cancels exactly
        assert abs(outs[0].value - math.sqrt(8) * 0.5 / 4) < 2e-3
        assert all(o.mag.raw == 0 for o in outs[1:])

    def test_negation_negates_outputs(self):
        sel = AccuracySelect.from_bitwidth(9)
        rng = np.random.default_rng(3)
        a = [sm(int(s), int(r)) for s, r in
             zip(rng.choice([-1, 1], 8), rng.integers(0, 1024, 8))]
        pos, _ = dct1d_sc(a, sel)
        neg, _ = dct1d_sc([-x for x in a], sel)
        assert all(p == -q or p.mag.raw == 0 for p, q in zip(pos, neg))

    def test_inverse_zeros(self):
        sel = AccuracySelect.from_bitwidth(10)
        outs, _ = idct1d_sc(const_vector(0), sel)
        assert all(o.mag.raw == 0 for o in outs)

    def test_constant_round_trip_within_two_levels(self):
        # forward then inverse on a flat vector stays within 2 intensity
        # levels at full accuracy, for every 8-bit level
        sel = AccuracySelect.from_bitwidth(10)
        worst = 0
        for c in range(256):
            f, _ = dct1d_sc(const_vector(4 * c), sel)
            back, _ = idct1d_sc(f, sel)
            for s in back:
                pixel = s.sign * ((s.mag.raw + 2) >> 2)
                worst = max(worst, abs(pixel - c))
        assert worst <= 2

    def test_random_round_trip_tracks_reference(self):
        sel = AccuracySelect.from_bitwidth(10)
        rng = np.random.default_rng(8)
        for _ in range(20):
            raws = rng.integers(0, 1024, 8)
            a = [sm(1, int(r)) for r in raws]
            f, _ = dct1d_sc(a, sel)
            back, _ = idct1d_sc(f, sel)
            got = np.array([s.sign * s.mag.raw for s in back]) / 1024.0
            want = np.array([x.value for x in a])
            assert np.max(np.abs(got - want)) < 0.02


class TestFixed2d:
    def test_zero_block(self):
        sel = AccuracySelect.from_bitwidth(8)
        out, cycles = dct2d(Block8x8.zero(), sel)
        assert np.all(out.raws == 0)
        assert cycles == 1024 * (1 << 8)

    def test_matches_composed_1d(self):
        # the vectorized block transform must equal MAC-by-MAC 1D calls
        rng = np.random.default_rng(21)
        for b in (10, 8, 6):
            sel = AccuracySelect.from_bitwidth(b)
            signs = rng.choice([-1, 1], size=(8, 8)).astype(np.int64)
            raws = rng.integers(0, 1024, size=(8, 8)).astype(np.int64)
            blk = Block8x8(signs, raws)

            cols = []
            for j in range(8):
                outs, _ = dct1d_sc([blk.sample(i, j) for i in range(8)], sel)
                cols.append(outs)
            inter = [[cols[j][k] for j in range(8)] for k in range(8)]  # (k, j)
            rows = []
            for k in range(8):
                outs, _ = dct1d_sc(inter[k], sel)
                rows.append(outs)  # rows[k][l]

            got, _ = dct2d(blk, sel)
            for k in range(8):
                for l in range(8):
                    assert got.sample(k, l) == rows[k][l], (b, k, l)

    def test_inverse_matches_composed_1d(self):
        rng = np.random.default_rng(22)
        sel = AccuracySelect.from_bitwidth(9)
        signs = rng.choice([-1, 1], size=(8, 8)).astype(np.int64)
        raws = rng.integers(0, 1024, size=(8, 8)).astype(np.int64)
        blk = Block8x8(signs, raws)

        rows = []
        for k in range(8):
            outs, _ = idct1d_sc([blk.sample(k, j) for j in range(8)], sel)
            rows.append(outs)  # rows[k][i]
        cols = []
        for i in range(8):
            outs, _ = idct1d_sc([rows[k][i] for k in range(8)], sel)
            cols.append(outs)  # cols[i][j] over original row index

        got, _ = idct2d(blk, sel)
        for r in range(8):
            for c in range(8):
                assert got.sample(r, c) == cols[c][r], (r, c)

    def test_round_trip_psnr_on_random_blocks(self):
        rng = np.random.default_rng(99)
        img = GrayImage(rng.integers(0, 256, size=(64, 64)).astype(np.uint8))
        rep = process_image(img, AccuracySelect.from_bitwidth(10), FrequencyMask.allpass())
        assert rep.psnr_vs_input >= 30.0


class TestMask:
    def test_allpass_identity(self):
        rng = np.random.default_rng(1)
        blk = Block8x8(
            rng.choice([-1, 1], size=(8, 8)).astype(np.int64),
            rng.integers(0, 1024, size=(8, 8)).astype(np.int64),
        )
        assert apply_mask(blk, FrequencyMask.allpass()) == blk

    def test_allzero_mask(self):
        blk = Block8x8(
            np.ones((8, 8), dtype=np.int64),
            np.full((8, 8), 100, dtype=np.int64),
        )
        out = apply_mask(blk, FrequencyMask.from_array(np.zeros((8, 8), int)))
        assert np.all(out.raws == 0)

    def test_lowpass_shape(self):
        m = FrequencyMask.lowpass(4)
        assert int(m.m.sum()) == 16
        assert m.m[0, 0] == 1 and m.m[3, 3] == 1 and m.m[4, 0] == 0 and m.m[0, 4] == 0

    def test_reference_array_path(self):
        f = np.arange(64, dtype=float).reshape(8, 8)
        out = apply_mask(f, FrequencyMask.lowpass(2))
        assert out[0, 0] == 0 and out[0, 1] == 1 and out[2, 0] == 0

    @given(st.integers(0, 2**64 - 1), st.integers(0, 2**63))
    @settings(max_examples=50)
    def test_idempotence(self, mask_bits, raw_seed):
        m = FrequencyMask.from_array(
            np.array([(mask_bits >> i) & 1 for i in range(64)]).reshape(8, 8)
        )
        rng = np.random.default_rng(raw_seed)
        blk = Block8x8(
            rng.choice([-1, 1], size=(8, 8)).astype(np.int64),
            rng.integers(0, 1024, size=(8, 8)).astype(np.int64),
        )
        once = apply_mask(blk, m)
        assert apply_mask(once, m) == once

    def test_binary_only(self):
        with pytest.raises(ValueError):
            FrequencyMask.from_array(np.full((8, 8), 2))

    def test_dc_only_mask_on_constant_block_survives(self):
        # a flat block has only DC energy, so keeping DC changes nothing
        c = 0.4
        f = dct2d_ref(np.full((8, 8), c))
        dc_only = np.zeros((8, 8), int)
        dc_only[0, 0] = 1
        back = idct2d_ref(apply_mask(f, FrequencyMask.from_array(dc_only)))
        assert np.max(np.abs(back - c)) < 1e-12


class TestScaleBookkeeping:
    def test_net_gain_exactly_one_in_float(self):
        # the fixed-point stage shifts, replayed in exact float arithmetic,
        # cancel to unity gain through forward + inverse
        rng = np.random.default_rng(77)
        c = dct_basis()
        scale = 1.0 / (1 << INTER_STAGE_SHIFT)
        for _ in range(20):
            blk = rng.uniform(-0.9, 0.9, (8, 8))
            f = ((c @ blk) * scale @ c.T) * scale
            back = ((f @ c) / scale).T
            back = ((c.T @ back.T) / scale)
            assert np.max(np.abs(back - blk)) < 1e-12


class TestPsnr:
    def test_identical_images_infinite(self):
        img = GrayImage(np.arange(64, dtype=np.uint8).reshape(8, 8))
        assert psnr(img, img) == math.inf

    def test_full_scale_difference(self):
        a = GrayImage(np.zeros((4, 4), dtype=np.uint8))
        b = GrayImage(np.full((4, 4), 255, dtype=np.uint8))
        assert psnr(a, b) == 0.0

    def test_single_pixel_example(self):
        a = np.zeros((4, 4), dtype=np.uint8)
        b = a.copy()
        b[0, 0] = 255
        assert abs(psnr(GrayImage(a), GrayImage(b)) - 10 * math.log10(16)) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            psnr(GrayImage(np.zeros((4, 4), dtype=np.uint8)),
                 GrayImage(np.zeros((4, 8), dtype=np.uint8)))


class TestProcessImage:
    def test_all_zero_mask_blanks_output(self):
        img = GrayImage(np.full((16, 16), 200, dtype=np.uint8))
        rep = process_image(
            img, AccuracySelect.from_bitwidth(10),
            FrequencyMask.from_array(np.zeros((8, 8), int)),
        )
        assert np.all(rep.output.pixels == 0)

    def test_constant_image_near_identity(self):
        # the counter-based multiplier is approximate, so a flat image
        # returns within a few intensity levels, not bit-exact
        sel = AccuracySelect.from_bitwidth(10)
        allpass = FrequencyMask.allpass()
        worst = 0
        for c in (0, 37, 81, 128, 200, 255):
            img = GrayImage(np.full((8, 8), c, dtype=np.uint8))
            rep = process_image(img, sel, allpass)
            worst = max(worst, int(np.max(np.abs(rep.output.pixels.astype(int) - c))))
        assert worst <= 4

    def test_zero_constant_is_exact(self):
        img = GrayImage(np.zeros((16, 16), dtype=np.uint8))
        rep = process_image(img, AccuracySelect.from_bitwidth(10), FrequencyMask.allpass())
        assert rep.output == img
        assert rep.psnr_vs_input == math.inf
        assert rep.clamp_count == 0

    def test_psnr_improves_with_bitwidth(self):
        img = GrayImage(reference_image().pixels[:64, :64].copy())
        mask = FrequencyMask.lowpass(4)
        hi = process_image(img, AccuracySelect.from_bitwidth(10), mask)
        lo = process_image(img, AccuracySelect.from_bitwidth(6), mask)
        assert hi.psnr_vs_reference > lo.psnr_vs_reference

    def test_padding_preserves_dimensions(self):
        rng = np.random.default_rng(6)
        img = GrayImage(rng.integers(0, 256, size=(20, 13)).astype(np.uint8))
        rep = process_image(img, AccuracySelect.from_bitwidth(8), FrequencyMask.lowpass(4))
        assert rep.output.pixels.shape == (20, 13)

    def test_cycle_accounting(self):
        img = GrayImage(np.zeros((16, 16), dtype=np.uint8))
        rep = process_image(img, AccuracySelect.from_bitwidth(10), FrequencyMask.allpass())
        # 4 blocks x (forward + inverse) x 1024 multiplier slots x 2^10,
        # divided by the parallelism factor 8
        assert rep.total_cycles_fixed == 4 * 2048 * 1024 // 8

    def test_workers_bit_identical(self):
        img = GrayImage(reference_image().pixels[:48, :48].copy())
        mask = FrequencyMask.lowpass(4)
        sel = AccuracySelect.from_bitwidth(8)
        seq = process_image(img, sel, mask, workers=1)
        par = process_image(img, sel, mask, workers=4)
        assert seq.output == par.output
        assert seq.total_cycles_fixed == par.total_cycles_fixed
        assert seq.clamp_count == par.clamp_count

    def test_parallelism_validation(self):
        img = GrayImage(np.zeros((8, 8), dtype=np.uint8))
        with pytest.raises(ValueError):
            process_image(img, AccuracySelect(0), FrequencyMask.allpass(), parallelism=0)


class TestGrayImage:
    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            GrayImage(np.zeros((0, 4), dtype=np.uint8))

    def test_range_checked(self):
        with pytest.raises(ValueError):
            GrayImage.from_array([[0, 300]])

    def test_reference_image_shape(self):
        img = reference_image()
        assert (img.height, img.width) == (256, 256)
        # regenerating is deterministic
        assert reference_image() == img
