import hashlib

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gvqp.colorspace import srgb_to_colorframe
from gvqp.ggd import fit_ggd
from gvqp.maps import build_mapset
from gvqp.mscn import (
    build_coefficients, coefficient_labels, gaussian_window, local_mean_std,
    mscn, spatial_diffs,
)
from conftest import gray_frame, rgb_from_array
from oracles import naive_local_mean_std


def test_window_unit_sum_and_symmetry():
    w = gaussian_window()
    assert w.shape == (7, 7)
    assert abs(w.sum() - 1.0) < 1e-12
    np.testing.assert_array_equal(w, w[::-1, ::-1])
    np.testing.assert_array_equal(w, w.T)


def test_mscn_constant_plane_is_zero():
    np.testing.assert_array_equal(mscn(np.full((10, 10), 42.0)), 0.0)


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=10, deadline=None)
def test_local_moments_match_direct_sums(seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    plane = rng.normal(scale=3.0, size=(12, 12))
    mu, sd = local_mean_std(plane)
    mu_ref, sd_ref = naive_local_mean_std(plane, gaussian_window())
    np.testing.assert_allclose(mu, mu_ref, atol=1e-10)
    np.testing.assert_allclose(sd, sd_ref, atol=1e-10)


def test_mscn_matches_naive_oracle(rng):
    plane = rng.normal(scale=5.0, size=(32, 32))
    mu_ref, sd_ref = naive_local_mean_std(plane, gaussian_window())
    np.testing.assert_allclose(mscn(plane), (plane - mu_ref) / (sd_ref + 1.0), atol=1e-10)


def test_mscn_statistics_on_wideband_noise():
    # Monte-Carlo derived: with the C = 1 stabilizer, sigma-10 i.i.d. noise
    # self-normalizes to variance ~0.65 and a platykurtic fit near 2.93.
    variances, alphas = [], []
    for seed in range(10):
        rng = np.random.Generator(np.random.PCG64(seed))
        m = mscn(rng.normal(scale=10.0, size=(512, 512)))
        variances.append(m.var())
        alphas.append(fit_ggd(m).alpha)
    assert 0.2 < np.median(variances) < 1.0
    assert 2.85 <= np.median(alphas) <= 3.0


def test_mscn_gaussian_shape_preserved_at_image_scale():
    # small-amplitude noise (pixel-like units): the fit stays near alpha = 2
    alphas = []
    for seed in range(10):
        rng = np.random.Generator(np.random.PCG64(seed))
        m = mscn(rng.normal(scale=0.1, size=(512, 512)))
        alphas.append(fit_ggd(m).alpha)
    assert 1.8 <= np.median(alphas) <= 2.3


def test_mscn_scale_invariance_in_large_contrast_limit():
    rng = np.random.Generator(np.random.PCG64(1))
    plane = rng.normal(size=(64, 64))
    a = mscn(1e4 * plane)
    b = mscn(1e5 * plane)
    rms = np.sqrt(np.mean((a - b) ** 2))
    assert rms < 1e-3


# ---------------------------------------------------------------------------
# Directional spatial differences

def test_spatial_diffs_constant_is_zero():
    for d in spatial_diffs(np.full((6, 6), 2.5)):
        np.testing.assert_array_equal(d, 0.0)


def test_spatial_diffs_on_ramp():
    plane = np.tile(np.arange(8, dtype=np.float64), (8, 1))
    d1, d2, d3, d4 = spatial_diffs(plane)
    np.testing.assert_array_equal(d1, 1.0)
    np.testing.assert_array_equal(d2, 0.0)
    assert d1.shape == (8, 7)
    assert d2.shape == (7, 8)
    assert d3.shape == (7, 7)
    assert d4.shape == (7, 7)


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_spatial_diffs_match_indexing_oracle(seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    p = rng.normal(size=(6, 7))
    d1, d2, d3, d4 = spatial_diffs(p)
    h, w = p.shape
    for i in range(h - 1):
        for j in range(w - 1):
            assert d1[i, j] == p[i, j + 1] - p[i, j]
            assert d2[i, j] == p[i + 1, j] - p[i, j]
            assert d3[i, j] == p[i + 1, j + 1] - p[i, j]
            # d4 anchors at column j+1 of the source: P(i+1, j) - P(i, j+1)
            assert d4[i, j] == p[i + 1, j] - p[i, j + 1]


def test_spatial_diffs_reject_tiny_plane():
    with pytest.raises(ValueError):
        spatial_diffs(np.zeros((1, 5)))


def test_diff_maps_near_zero_mean_on_noise():
    rng = np.random.Generator(np.random.PCG64(9))
    m = mscn(rng.normal(size=(256, 256)))
    for d in spatial_diffs(m):
        assert abs(d.mean()) < 0.01


# ---------------------------------------------------------------------------
# Coefficient sets

COEFF_LABEL_FINGERPRINT = "3308b2b2da17b69f5a2092ce50a4bce38a5c75606eeb365756e8771565d7b2ce"


def _frames(rng):
    cur = srgb_to_colorframe(rgb_from_array(rng.random((16, 16, 3))))
    nxt = srgb_to_colorframe(rgb_from_array(rng.random((16, 16, 3)), index=1))
    return cur, nxt


def test_coefficient_count_full_and_partial(rng):
    cur, nxt = _frames(rng)
    full = build_coefficients(build_mapset(cur, nxt))
    assert len(full) == 42
    partial = build_coefficients(build_mapset(cur, None))
    assert len(partial) == 24
    assert partial.partial


def test_coefficient_label_order_is_frozen(rng):
    cur, nxt = _frames(rng)
    coeffs = build_coefficients(build_mapset(cur, nxt))
    digest = hashlib.sha256(",".join(coeffs.labels).encode()).hexdigest()
    assert digest == COEFF_LABEL_FINGERPRINT
    from gvqp.maps import MAP_LABELS_FULL
    assert coeffs.labels == coefficient_labels(MAP_LABELS_FULL)


def test_constant_gray_frame_zeroes_all_coefficients():
    cur = srgb_to_colorframe(gray_frame(0.25, 16, 16))
    nxt = srgb_to_colorframe(gray_frame(0.25, 16, 16, index=1))
    coeffs = build_coefficients(build_mapset(cur, nxt))
    assert len(coeffs) == 42
    for label, plane in zip(coeffs.labels, coeffs.planes):
        np.testing.assert_allclose(plane, 0.0, atol=1e-9, err_msg=label)
