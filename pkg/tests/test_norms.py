"""Norm definitions: closed forms on single modes, orderings, weight behavior."""

import numpy as np
import pytest

from magnls import (
    GridSpec,
    bracket_weight,
    from_function,
    make_field,
    norm_h1,
    norm_h2,
    norm_l2,
    norm_lp,
    norm_w1p,
    norm_w2p_sum,
    norm_weighted_h1,
    norm_weighted_l2,
)

G = GridSpec(1, (128,), (16.0,))


def plane_wave(m):
    k = 2.0 * np.pi * m / G.box_lengths[0]
    return k, from_function(G, lambda x: np.exp(1j * k * x))


def test_lp_closed_forms():
    mask = np.abs(G.coords[0]) < 4.0
    f = make_field(G, np.where(mask, 2.0, 0.0).astype(np.complex128))
    measure = float(np.sum(mask)) * G.volume_element
    assert norm_lp(f, 1) == pytest.approx(2.0 * measure)
    assert norm_lp(f, 2) == pytest.approx(np.sqrt(4.0 * measure))
    assert norm_lp(f, np.inf) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        norm_lp(f, 0.5)


def test_sobolev_norms_on_a_single_mode():
    k, f = plane_wave(5)
    vol = np.sqrt(G.volume)
    assert norm_l2(f) == pytest.approx(vol, rel=1e-12)
    assert norm_h1(f) == pytest.approx(vol * np.sqrt(1 + k**2), rel=1e-12)
    assert norm_h2(f) == pytest.approx(vol * (1 + k**2), rel=1e-12)


def test_w1p_reduces_to_h1_at_p_two():
    rng = np.random.default_rng(11)
    f = make_field(G, rng.standard_normal(128) + 1j * rng.standard_normal(128))
    assert norm_w1p(f, 2.0) == pytest.approx(norm_h1(f), rel=1e-12)


def test_norm_ordering():
    rng = np.random.default_rng(12)
    for _ in range(5):
        f = make_field(G, rng.standard_normal(128) + 1j * rng.standard_normal(128))
        assert norm_l2(f) <= norm_h1(f) <= norm_h2(f) + 1e-12


def test_bracket_weight_shape():
    w = bracket_weight(G, 4.1)
    x = G.coords[0]
    origin = np.argmin(np.abs(x))
    assert w[origin] == pytest.approx(1.0, abs=1e-6)
    # strictly decaying away from the origin on the right half
    right = w[origin:]
    assert np.all(np.diff(right) < 0)
    assert w.max() <= 1.0


def test_weighted_norms_suppress_far_field():
    near = from_function(G, lambda x: np.exp(-(x**2)))
    far = from_function(G, lambda x: np.exp(-((np.abs(x) - 7.0) ** 2)))
    # mass at the origin survives the weight, mass at |x| = 7 does not
    assert norm_weighted_l2(near, 4.1) > 0.5 * norm_l2(near)
    assert norm_weighted_l2(far, 4.1) < 0.01 * norm_l2(far)
    assert norm_weighted_h1(far, 4.1) < 0.05 * norm_h1(far)


def test_second_order_sum_norm_components():
    k, f = plane_wave(3)
    vol = np.sqrt(G.volume)
    expected = vol * (1.0 + k + k**2)
    got = norm_w2p_sum(f, 2.0)
    assert got == pytest.approx(expected, rel=1e-12)
    # at p = 2 the pieces are the mode norms |f|, k|f|, k^2|f|
    assert norm_w2p_sum(f, 3.0) == pytest.approx(
        (G.volume) ** (1 / 3) * (1.0 + k + k**2), rel=1e-12)
