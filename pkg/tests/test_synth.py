import numpy as np
import pytest

from jsmreg.image import RigidTransform, warp_image
from jsmreg.synth import (INTENSITY_RANGE, OutlierSpec, SyntheticCase, generate_case, random_suite,
                          render_texture)


def test_identity_case_flt_equals_ref():
    p = generate_case(SyntheticCase(seed=1, width=64, height=64))
    np.testing.assert_array_equal(p.ref, p.flt)
    assert p.flt_valid.all()


def test_same_seed_is_byte_identical():
    spec = SyntheticCase(seed=5, width=80, height=64, truth=RigidTransform(3, -2, 7),
                         outlier=OutlierSpec((30, 30), (20, 20), 0.9), noise=0.01, gain=1.2)
    a, b = generate_case(spec), generate_case(spec)
    assert a.ref.tobytes() == b.ref.tobytes() and a.flt.tobytes() == b.flt.tobytes()
    assert generate_case(SyntheticCase(seed=6, width=80, height=64)).ref.tobytes() != a.ref.tobytes()


def test_texture_range():
    img = render_texture(50, 40, np.random.default_rng(0))
    assert img.shape == (40, 50)
    assert img.min() == pytest.approx(INTENSITY_RANGE[0]) and img.max() == pytest.approx(INTENSITY_RANGE[1])


def test_ground_truth_relation():
    truth = RigidTransform(4.25, -3.5, 6.0)
    p = generate_case(SyntheticCase(seed=2, width=96, height=96, truth=truth))
    back, valid = warp_image(p.flt, truth)
    inner = np.zeros_like(valid)
    inner[12:-12, 12:-12] = True
    diff = np.abs(back - p.ref)[valid & inner]
    # two bilinear resamplings of a smooth texture
    assert diff.mean() < 0.01


def test_outlier_area_fraction():
    o = OutlierSpec(center=(100, 100), size=(60, 60))
    assert o.area() / (200 * 200) == pytest.approx(0.09)
    assert o.mask((200, 200)).sum() == 3600


def test_outlier_is_pasted_into_target_only():
    o = OutlierSpec(center=(32, 32), size=(16, 16), value=0.95)
    p = generate_case(SyntheticCase(seed=3, width=64, height=64, outlier=o))
    assert np.all(p.flt[26:38, 26:38] > 0.9)
    assert np.abs(p.ref[26:38, 26:38] - 0.95).min() > 0  # untouched reference
    np.testing.assert_array_equal(p.flt[:, :10], p.ref[:, :10])


def test_large_outlier_rejected():
    with pytest.raises(ValueError):
        generate_case(SyntheticCase(width=64, height=64, outlier=OutlierSpec((32, 32), (50, 50))))


def test_illumination_and_noise():
    base = generate_case(SyntheticCase(seed=4, width=48, height=48))
    lit = generate_case(SyntheticCase(seed=4, width=48, height=48, gain=1.2, bias=0.01))
    np.testing.assert_allclose(lit.flt, np.clip(base.flt * 1.2 + 0.01, 0, 1))
    np.testing.assert_array_equal(lit.ref, base.ref)
    noisy = generate_case(SyntheticCase(seed=4, width=48, height=48, noise=0.05))
    assert 0.03 < np.std(noisy.ref - base.ref) < 0.07


def test_random_suite_bounds():
    cases = random_suite(12, seed=3, outliers=True, gain=1.2)
    assert len({c.case_id for c in cases}) == 12
    for c in cases:
        assert abs(c.truth.tx) <= 10 and abs(c.truth.ty) <= 10 and abs(c.truth.beta) <= 8
        frac = c.outlier.area() / (c.width * c.height)
        assert 0.085 <= frac <= 0.165
        assert INTENSITY_RANGE[0] <= c.outlier.value <= INTENSITY_RANGE[1]
        assert c.gain == 1.2
    assert random_suite(3, seed=3) == random_suite(3, seed=3)
