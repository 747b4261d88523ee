import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gvqp.colorspace import chroma_from_ab, srgb_to_colorframe, srgb_to_lab
from conftest import gray_frame, rgb_from_array

# Published CIELAB coordinates of the sRGB primaries (D65, 2 degrees).
REFERENCE_LAB = {
    (1.0, 0.0, 0.0): (53.2408, 80.0925, 67.2032),
    (0.0, 1.0, 0.0): (87.7347, -86.1827, 83.1793),
    (0.0, 0.0, 1.0): (32.2970, 79.1875, -107.8602),
}


def test_white_and_black_are_neutral():
    white = srgb_to_colorframe(gray_frame(1.0))
    black = srgb_to_colorframe(gray_frame(0.0))
    np.testing.assert_allclose(white.l_star, 100.0, atol=1e-9)
    np.testing.assert_allclose(white.c_star, 0.0, atol=1e-9)
    np.testing.assert_allclose(black.l_star, 0.0, atol=1e-9)
    np.testing.assert_allclose(black.c_star, 0.0, atol=1e-9)


@pytest.mark.parametrize("rgb,expected", sorted(REFERENCE_LAB.items()))
def test_primaries_match_published_tables(rgb, expected):
    arrs = [np.full((2, 2), c) for c in rgb]
    l_star, a_star, b_star = srgb_to_lab(*arrs)
    exp_l, exp_a, exp_b = expected
    assert abs(l_star[0, 0] - exp_l) < 0.05
    assert abs(a_star[0, 0] - exp_a) < 0.05
    assert abs(b_star[0, 0] - exp_b) < 0.05
    frame = srgb_to_colorframe(rgb_from_array(np.dstack(arrs)))
    assert abs(frame.c_star[0, 0] - np.hypot(exp_a, exp_b)) < 0.05


def test_chroma_is_hypot_of_lab_axes():
    assert chroma_from_ab(np.array(3.0), np.array(4.0)) == 5.0


@given(st.floats(min_value=0.0, max_value=1.0))
@settings(max_examples=40, deadline=None)
def test_gray_has_zero_chroma(v):
    frame = srgb_to_colorframe(gray_frame(v, 4, 4))
    assert np.max(np.abs(frame.c_star)) <= 1e-9


def test_lightness_monotone_in_gray_level():
    levels = np.linspace(0.0, 1.0, 64)
    l_vals = [srgb_to_colorframe(gray_frame(v, 2, 2)).l_star[0, 0] for v in levels]
    assert np.all(np.diff(l_vals) > 0)


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_lightness_range_and_chroma_sign(seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    arr = rng.random((6, 6, 3))
    frame = srgb_to_colorframe(rgb_from_array(arr))
    assert frame.l_star.min() >= -1e-6
    assert frame.l_star.max() <= 100.0 + 1e-6
    assert frame.c_star.min() >= 0.0
    assert frame.l_star.shape == arr.shape[:2]
