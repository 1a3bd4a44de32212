import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import real_spectrum
from ssmdyn.errors import StabilityError
from ssmdyn.ssm import DiagonalSSM, simulate_freq
from ssmdyn.suffstats import GWeighted, Plain, aggregate, per_bin_stats


def test_per_bin_examples():
    s = per_bin_stats([1, 0], [1, 0])
    np.testing.assert_array_equal(s.sigma_k, [1, 0])
    np.testing.assert_array_equal(s.eta_k, [1, 0])
    s = per_bin_stats([1j], [1])
    np.testing.assert_array_equal(s.sigma_k, [-1j])
    np.testing.assert_array_equal(s.eta_k, [1])


def test_eta_k_real_nonnegative(rng):
    U = rng.standard_normal(9) + 1j * rng.standard_normal(9)
    s = per_bin_stats(U, U)
    assert np.all(s.eta_k.imag == 0) and np.all(s.eta_k.real >= 0)


def test_length_mismatch():
    with pytest.raises(ValueError, match="length mismatch"):
        per_bin_stats([1, 2], [1])


def test_plain_sums():
    s = aggregate([1, 1], [2, 2], Plain())
    assert s.sigma == 4 and s.eta == 2


def test_gweighted_zero_is_plain(rng):
    U, Y = real_spectrum(rng, 8), real_spectrum(rng, 8)
    p, g = aggregate(U, Y, Plain()), aggregate(U, Y, GWeighted(0.0))
    assert g.sigma == pytest.approx(p.sigma) and g.eta == pytest.approx(p.eta)


def test_gweighted_hand_summation(rng):
    L, a = 4, 0.5
    U = real_spectrum(rng, L)
    Y = simulate_freq(DiagonalSSM([0.3, -0.4], [1.0, 0.7], [0.5, 1.2]), U)
    sigma, eta = 0j, 0.0
    for k in range(L):
        G = 1 / (1 - complex(np.cos(2 * np.pi * k / L), -np.sin(2 * np.pi * k / L)) * a)
        sigma += Y[k] * G.conjugate() * U[k].conjugate()
        eta += (U[k] * U[k].conjugate()).real * (G * G.conjugate()).real
    s = aggregate(U, Y, GWeighted(a))
    assert s.sigma == pytest.approx(sigma, rel=1e-12)
    assert s.eta == pytest.approx(eta, rel=1e-12)


def test_gweighted_unstable():
    with pytest.raises(StabilityError):
        aggregate([1, 2], [1, 2], GWeighted(1.0))


def test_weighting_required():
    with pytest.raises(TypeError):
        aggregate([1], [1], None)


def test_real_part_checked_rejects_complex():
    s = aggregate([1, 1], [1j, 0], Plain())
    assert s.eta_real == 2
    with pytest.raises(ValueError, match="imaginary"):
        s.sigma_real


@pytest.mark.parametrize("a", [-0.7, 0.0, 0.5, 0.95])
def test_real_data_gives_real_aggregates(rng, a):
    U, Y = real_spectrum(rng, 11), real_spectrum(rng, 11)
    s = aggregate(U, Y, GWeighted(a))
    assert abs(s.sigma.imag) <= 1e-10 * abs(s.sigma)
    assert s.eta.imag == 0 and s.eta.real >= 0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-0.95, 0.95), st.floats(0.1, 10.0))
def test_scaling_keeps_ratio(seed, a, alpha):
    rng = np.random.default_rng(seed)
    U, Y = real_spectrum(rng, 8), real_spectrum(rng, 8)
    s1 = aggregate(U, Y, GWeighted(a))
    s2 = aggregate(alpha * U, alpha * Y, GWeighted(a))
    assert s2.sigma.real == pytest.approx(alpha ** 2 * s1.sigma.real, rel=1e-10)
    assert s2.eta.real == pytest.approx(alpha ** 2 * s1.eta.real, rel=1e-10)
    assert s2.ratio == pytest.approx(s1.ratio, rel=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-0.9, 0.9), st.floats(-3, 3), st.floats(-3, 3))
def test_teacher_ratio_is_teacher_product(seed, a, b, c):
    rng = np.random.default_rng(seed)
    U = real_spectrum(rng, 10)
    Y = simulate_freq(DiagonalSSM([a], [b], [c]), U)
    s = aggregate(U, Y, GWeighted(a))
    assert s.sigma.real / s.eta.real == pytest.approx(b * c, rel=1e-10, abs=1e-12)
