import itertools

import numpy as np
import pytest

from conftest import random_model
from ssmdyn.errors import StabilityError
from ssmdyn.spectrum import idft
from ssmdyn.ssm import (
    DiagonalSSM, StackedSSM, composite_response, decay_padding, frequency_response, g_factor,
    impulse_response, simulate_freq, simulate_time,
)


def kernel_oracle(model, length):
    """h_m = sum_i c_i a_i^m b_i by explicit loops."""
    return np.array([sum(c * a ** m * b for a, b, c in zip(model.a, model.b, model.c)) for m in range(length)])


def convolve_oracle(h, u):
    return np.array([sum(h[t - i] * u[i] for i in range(t + 1)) for t in range(len(u))])


class TestDiagonalSSM:
    def test_rejects_unstable(self):
        with pytest.raises(StabilityError):
            DiagonalSSM([0.5, 1.0], [1, 1], [1, 1])
        with pytest.raises(StabilityError):
            DiagonalSSM([-1.2], [1], [1])

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            DiagonalSSM([0.1, 0.2], [1], [1, 2])

    def test_immutable(self):
        m = DiagonalSSM([0.1], [1], [2])
        with pytest.raises(ValueError):
            m.a[0] = 0.3

    def test_param_round_trip(self, rng):
        m = random_model(rng, 3)
        m2 = DiagonalSSM.from_params(m.params())
        np.testing.assert_array_equal(m2.params(), m.params())


class TestGFactor:
    def test_zero_bin(self):
        assert g_factor(0.5, 0, 7) == pytest.approx(2)

    def test_identity(self):
        assert g_factor(0.0, 3, 8) == 1

    def test_hand_value(self):
        # 1 / (1 - (-j) 0.5) = 1 / (1 + 0.5j) = 0.8 - 0.4j
        assert g_factor(0.5, 1, 4) == pytest.approx(0.8 - 0.4j, abs=1e-15)

    def test_unstable(self):
        with pytest.raises(StabilityError):
            g_factor(1.0, 0, 4)


class TestFrequencyResponse:
    def test_memoryless(self):
        m = DiagonalSSM([0.0], [2.0], [3.0])
        for k in range(5):
            assert frequency_response(m, k, 5) == pytest.approx(6)

    def test_zero_bin(self):
        assert frequency_response(DiagonalSSM([0.5], [1], [1]), 0, 4) == pytest.approx(2)

    def test_sum_over_dims(self):
        m = DiagonalSSM([0, 0], [1, 1], [1, 1])
        assert all(frequency_response(m, k, 6) == pytest.approx(2) for k in range(6))

    def test_matches_kernel_dtft(self, rng):
        # H_k = sum_m h_m exp(-j w_k m), truncated where a^m is negligible
        m = random_model(rng, 3, rho=0.6)
        L, M = 8, 200
        h = kernel_oracle(m, M)
        for k in range(L):
            dtft = np.sum(h * np.exp(-2j * np.pi * k * np.arange(M) / L))
            assert frequency_response(m, k, L) == pytest.approx(dtft, abs=1e-12)


class TestComposite:
    def test_single_layer(self, rng):
        m = random_model(rng, 2)
        assert composite_response(StackedSSM((m,)), 3, 8) == frequency_response(m, 3, 8)

    def test_constant_layers(self):
        layer = DiagonalSSM([0.0], [2.0], [1.0])
        assert composite_response(StackedSSM((layer, layer)), 1, 4) == pytest.approx(4)

    def test_product_oracle(self, rng):
        l1, l2 = random_model(rng, 2), random_model(rng, 3)
        for k in range(8):
            expected = frequency_response(l1, k, 8) * frequency_response(l2, k, 8)
            assert composite_response(StackedSSM((l1, l2)), k, 8) == pytest.approx(expected, rel=1e-12)

    def test_layer_permutation_invariance(self, rng):
        layers = [random_model(rng, n) for n in (1, 2, 3)]
        base = composite_response(StackedSSM(tuple(layers)), L=12)
        for perm in itertools.permutations(layers):
            np.testing.assert_allclose(composite_response(StackedSSM(perm), L=12), base, rtol=1e-12)


class TestSimulateTime:
    def test_impulse_powers(self):
        y = simulate_time(DiagonalSSM([0.5], [1], [1]), [1, 0, 0])
        np.testing.assert_allclose(y, [1, 0.5, 0.25])

    def test_memoryless(self, rng):
        u = rng.standard_normal(10)
        y = simulate_time(DiagonalSSM([0.0, 0.0], [1.0, 2.0], [3.0, 0.5]), u)
        np.testing.assert_allclose(y, 4.0 * u)

    def test_matches_kernel_convolution(self, rng):
        m = random_model(rng, 3)
        u = rng.standard_normal(32)
        np.testing.assert_allclose(simulate_time(m, u), convolve_oracle(kernel_oracle(m, 32), u), atol=1e-10)

    def test_impulse_response(self, rng):
        m = random_model(rng, 4)
        u = np.zeros(20)
        u[0] = 1
        np.testing.assert_allclose(simulate_time(m, u), kernel_oracle(m, 20), atol=1e-12)
        np.testing.assert_allclose(impulse_response(m, 20), kernel_oracle(m, 20), atol=1e-12)


class TestSimulateFreq:
    def test_zero_input(self, rng):
        np.testing.assert_array_equal(simulate_freq(random_model(rng, 2), np.zeros(6)), np.zeros(6))

    def test_identity(self, rng):
        U = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        np.testing.assert_allclose(simulate_freq(DiagonalSSM([0.0], [1.0], [1.0]), U), U)

    @pytest.mark.parametrize("seed", range(5))
    def test_padded_time_equivalence(self, seed):
        rng = np.random.default_rng(seed)
        m = random_model(rng, rng.integers(1, 5), rho=0.9)
        L = int(rng.integers(2, 33))
        u = rng.standard_normal(L)
        P = L + decay_padding(m)
        padded = np.concatenate([u, np.zeros(P - L)])
        y_time = simulate_time(m, padded)
        y_freq = idft(simulate_freq(m, np.fft.fft(padded)))
        np.testing.assert_allclose(y_freq[:L], y_time[:L], rtol=0, atol=1e-8)

    def test_unpadded_is_circular_not_linear(self, rng):
        # finite-L spectra wrap the kernel around: without padding the two differ
        m = DiagonalSSM([0.9], [1.0], [1.0])
        u = rng.standard_normal(8)
        y_freq = idft(simulate_freq(m, np.fft.fft(u)))
        assert np.max(np.abs(y_freq - simulate_time(m, u))) > 1e-3

    def test_stacked_padded_equivalence(self, rng):
        stack = StackedSSM((random_model(rng, 2, 0.8), random_model(rng, 3, 0.8)))
        L = 12
        u = rng.standard_normal(L)
        P = L + 3 * decay_padding(stack)
        padded = np.concatenate([u, np.zeros(P - L)])
        y_freq = idft(simulate_freq(stack, np.fft.fft(padded)))
        np.testing.assert_allclose(y_freq[:L], simulate_time(stack, padded)[:L], atol=1e-8)
