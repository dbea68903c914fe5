import math

import numpy as np
import pytest

from jsmreg.image import build_pyramid
from jsmreg.saliency import (build_rsv_field, disc_offsets, inertia_fields, inertia_matrix,
                             local_saliency, multiscale_saliency, principal_axes, rsv)
from oracles import eig2_closed_form


def test_local_saliency_constant_is_zero():
    np.testing.assert_array_equal(local_saliency(np.full((6, 7), 0.4)), 0)


def test_local_saliency_impulse_by_hand():
    img = np.zeros((5, 5))
    img[2, 2] = 1.0
    s = local_saliency(img)
    assert s[2, 2] == 8.0
    ring = s[1:4, 1:4].copy()
    ring[1, 1] = 0
    np.testing.assert_array_equal(ring, [[1, 1, 1], [1, 0, 1], [1, 1, 1]])
    assert s[0].sum() == 0 and s[:, 0].sum() == 0


def test_local_saliency_scales_quadratically_and_ignores_offset():
    rng = np.random.default_rng(0)
    img = rng.uniform(size=(12, 10))
    base = local_saliency(img)
    np.testing.assert_allclose(local_saliency(3 * img), 9 * base)
    np.testing.assert_allclose(local_saliency(img + 0.25), base, atol=1e-12)


def test_local_saliency_translation_equivariant():
    rng = np.random.default_rng(1)
    img = rng.uniform(size=(20, 20))
    shifted = np.roll(img, (2, 3), axis=(0, 1))
    np.testing.assert_allclose(local_saliency(shifted)[4:-1, 5:-1], local_saliency(img)[2:-3, 2:-4])


def test_multiscale_single_level_and_monotone():
    rng = np.random.default_rng(2)
    img = rng.uniform(size=(64, 64))
    np.testing.assert_array_equal(multiscale_saliency(build_pyramid(img, 1)), local_saliency(img))
    step = np.zeros((64, 64))
    step[:, 32:] = 1.0
    assert np.all(multiscale_saliency(build_pyramid(step, 2)) >= local_saliency(step))
    assert not multiscale_saliency(build_pyramid(np.full((64, 64), 0.2), 3)).any()


def test_disc_has_97_offsets():
    dx, dy = disc_offsets(5.5)
    assert dx.size == 97
    assert (dx ** 2 + dy ** 2).max() <= 30.25
    assert disc_offsets(1.0)[0].size == 5


def test_inertia_zero_and_horizontal_segment():
    s = np.zeros((15, 15))
    np.testing.assert_array_equal(inertia_matrix(s, (7, 7)), 0)
    s[7, 5:10] = 1.0
    m = inertia_matrix(s, (7, 7))
    # offsets -2..2 about the centroid, unit mass: mu20 = 4+1+0+1+4
    assert m[0, 0] == pytest.approx(10.0)
    assert m[1, 1] == 0 and m[0, 1] == 0


def test_inertia_symmetric_blob():
    yy, xx = np.mgrid[0:21, 0:21]
    s = np.exp(-((xx - 10) ** 2 + (yy - 10) ** 2) / 8.0)
    m = inertia_matrix(s, (10, 10))
    assert m[0, 0] == pytest.approx(m[1, 1])
    assert abs(m[0, 1]) < 1e-12


def test_inertia_fields_match_brute_force():
    rng = np.random.default_rng(4)
    s = rng.uniform(size=(18, 22)) ** 3
    s[:4, :5] = 0
    mu20, mu11, mu02 = inertia_fields(s)
    for y in range(18):
        for x in range(22):
            m = inertia_matrix(s, (x, y))
            np.testing.assert_allclose([mu20[y, x], mu11[y, x], mu02[y, x]],
                                       [m[0, 0], m[0, 1], m[1, 1]], atol=1e-10)


def test_rsv_examples():
    np.testing.assert_allclose(rsv(np.diag([4.0, 1.0])), (1, 0))
    np.testing.assert_allclose(rsv([[2.0, 1.0], [1.0, 2.0]]), (1 / math.sqrt(2), 1 / math.sqrt(2)))
    assert rsv(np.eye(2)) is None
    assert rsv(np.zeros((2, 2))) is None
    np.testing.assert_allclose(rsv(np.diag([1.0, 4.0])), (0, 1))


def test_rsv_against_closed_form():
    rng = np.random.default_rng(5)
    for _ in range(200):
        a, b, c = rng.normal(size=3) * 10
        lam1, lam2, v = eig2_closed_form(a, b, c)
        e = rsv([[a, b], [b, c]])
        assert abs(e @ np.array(v)) == pytest.approx(1.0, abs=1e-9)
        assert e[0] > 0 or (e[0] == 0 and e[1] > 0)


def test_principal_axes_vectorized():
    vec, ok = principal_axes([4.0, 1.0, 2.0], [0.0, 0.0, 0.0], [1.0, 1.0, 2.0])
    np.testing.assert_array_equal(ok, [True, False, False])
    np.testing.assert_allclose(vec[0], (1, 0))
    np.testing.assert_array_equal(vec[1:], 0)


def test_rsv_field_constant_image_invalid():
    f = build_rsv_field(np.full((64, 64), 0.5))
    assert not f.valid.any()
    assert not f.vectors.any()


def test_rsv_field_vertical_edge_is_parallel():
    img = np.zeros((64, 64))
    img[:, 32:] = 1.0
    f = build_rsv_field(img, 3)
    band = f.valid[10:54, 28:36]
    assert band.any()
    v = f.vectors[10:54, 28:36][band]
    np.testing.assert_allclose(np.linalg.norm(v, axis=1), 1.0, atol=1e-9)
    # all parallel to the edge (the y axis) within 5 degrees
    assert np.all(np.abs(v[:, 1]) >= math.cos(math.radians(5)))


def test_rsv_field_threshold_is_inclusive():
    img = np.zeros((40, 60))
    img[10, :] = 1.0  # full-width lines: interior saliency 6
    img[30, :] = 0.5  # 6 * 0.25 = 1.5, exactly a quarter of the maximum
    f = build_rsv_field(img, 1, threshold=0.25)
    assert f.saliency[30, 30] == 0.25 * f.saliency.max()
    assert f.valid[30, 30]
    np.testing.assert_allclose(f.vectors[30, 30], (1, 0))
    assert not build_rsv_field(img, 1, threshold=0.2500001).valid[30, 30]


def test_rsv_field_quarter_turn():
    from jsmreg.synth import SyntheticCase, generate_case

    img = generate_case(SyntheticCase(seed=4, width=96, height=96)).ref
    # threshold 0 so that the whole interior takes part
    a = build_rsv_field(img, 1, threshold=0.0)
    b = build_rsv_field(np.rot90(img), 1, threshold=0.0)  # (x, y) -> (y, w - 1 - x)
    h, w = img.shape
    ang = []
    for y in range(8, h - 8):
        for x in range(8, w - 8):
            if a.valid[y, x] and b.valid[w - 1 - x, y]:
                vx, vy = a.vectors[y, x]
                rotated = np.array([vy, -vx])
                ang.append(math.degrees(math.acos(min(1.0, abs(rotated @ b.vectors[w - 1 - x, y])))))
    assert len(ang) > 500
    assert max(ang) < 2.0
