import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from advreg.functions import (SmoothnessSpec, aniso_witness_coord, anisotropic, custom_constant,
                              custom_linear, generate, holder_check, isotropic, witness_aniso,
                              witness_iso_rough, witness_iso_smooth)


@pytest.mark.parametrize("L", [0.5, 1.0, 3.0])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_smooth_witness_values(L, d):
    f = witness_iso_smooth(L, d)
    one = np.zeros(d)
    one[0] = 1.0
    assert f(one) == pytest.approx(L)
    assert f(np.zeros(d)) == pytest.approx(L * math.exp(-1))


def test_rough_witness_values():
    f = witness_iso_rough(0.5)
    assert f([0.25]) == pytest.approx(0.5)
    assert f([0.0]) == 0.0


@pytest.mark.parametrize("L, beta, x, expected", [
    ((1.0, 1.0), (1.0, 0.5), 0.3, 0.3),
    ((2.0, 2.0), (0.5, 0.5), 0.25, 1.0),
])
def test_aniso_witness_values(L, beta, x, expected):
    f = witness_aniso(anisotropic(beta, L), 0)
    assert f([x, 0.9]) == pytest.approx(expected)


def test_aniso_witness_uses_only_its_coordinate():
    f = witness_aniso(anisotropic((1.0, 1 / 3), (1.0, 1.0)), 1)
    assert f([0.1, 0.125]) == pytest.approx(0.5)
    assert f([0.9, 0.125]) == pytest.approx(0.5)


def test_spec_validation():
    with pytest.raises(ValueError):
        SmoothnessSpec("isotropic", -1.0, 1.0, 1)
    with pytest.raises(ValueError):
        anisotropic((1.0, 1.5), (1.0, 1.0))
    with pytest.raises(ValueError):
        witness_iso_rough(1.0)


@pytest.mark.parametrize("beta, k", [(0.5, 0), (1.0, 0), (1.5, 1), (2.0, 1), (2.5, 2)])
def test_spec_degree(beta, k):
    spec = isotropic(beta, 1.0, 1)
    assert spec.k == k
    assert 0 < spec.alpha <= 1
    assert spec.k + spec.alpha == pytest.approx(beta)


def test_beta_bar_harmonic_mean():
    assert anisotropic((1.0, 1 / 3), (1.0, 1.0)).beta_bar == pytest.approx(0.5)


def test_aniso_coord_choice():
    spec = anisotropic((1.0, 1 / 3), (1.0, 1.0))
    assert aniso_witness_coord(spec, [0.2, 0.0]) == 0
    assert aniso_witness_coord(spec, [0.2, 0.2]) == 1


@pytest.mark.parametrize("beta", [0.25, 0.5, 0.75])
def test_holder_rough_witness_ok(beta):
    assert holder_check(witness_iso_rough(beta), 10_000, seed=1) is None


def test_holder_smooth_witness_ok():
    assert holder_check(witness_iso_smooth(1.0, 2), 10_000, seed=2) is None


def test_holder_steep_line_violates():
    v = holder_check(custom_linear(10.0, 0.0, isotropic(1.0, 1.0, 1)), 1000, seed=0)
    assert v is not None and v.gap > 0


@pytest.mark.parametrize("spec", [isotropic(0.3, 0.1, 2), isotropic(1.0, 1.0, 1),
                                  anisotropic((1.0, 0.5), (1.0, 1.0))])
def test_holder_constant_ok(spec):
    assert holder_check(custom_constant(4.0, spec), 1000, seed=0) is None


def test_holder_aniso_witness_ok():
    spec = anisotropic((1.0, 1 / 3), (1.0, 1.0))
    assert holder_check(witness_aniso(spec, 1), 10_000, seed=3) is None


def test_generate_noiseless():
    f = witness_iso_rough(0.5)
    data = generate(f, 500, 0.0, seed=4)
    np.testing.assert_array_equal(data.ys, f(data.xs))


def test_generate_deterministic():
    f = witness_iso_smooth(1.0, 2)
    a, b = generate(f, 300, 0.2, seed=9), generate(f, 300, 0.2, seed=9)
    np.testing.assert_array_equal(a.xs, b.xs)
    np.testing.assert_array_equal(a.ys, b.ys)
    c = generate(f, 300, 0.2, seed=10)
    assert not np.array_equal(a.xs, c.xs)


def test_generate_noise_mean():
    f = custom_constant(0.0, isotropic(1.0, 1.0, 1))
    n, sigma = 100_000, 0.7
    data = generate(f, n, sigma, seed=5)
    assert abs(data.ys.mean()) <= 3 * sigma / math.sqrt(n)
    assert data.ys.std() == pytest.approx(sigma, rel=0.02)


def test_generate_uniform_design():
    data = generate(witness_iso_smooth(1.0, 1), 50_000, 0.0, seed=6)
    counts, _ = np.histogram(data.xs[:, 0], bins=10, range=(0, 1))
    # chi-square with 9 dof; 27.9 is the 0.999 quantile
    chi2 = ((counts - 5000) ** 2 / 5000).sum()
    assert chi2 < 27.9


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 200), d=st.integers(1, 3), seed=st.integers(0, 2**31))
def test_generate_shapes_and_range(n, d, seed):
    data = generate(witness_iso_smooth(1.0, d), n, 0.1, seed)
    assert data.xs.shape == (n, d) and data.ys.shape == (n,)
    assert np.all((data.xs >= 0) & (data.xs < 1))
