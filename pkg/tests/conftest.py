import numpy as np
import pytest

from ssmdyn.ssm import DiagonalSSM, simulate_freq

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def real_spectrum(rng, L):
    return np.fft.fft(rng.standard_normal(L))


def random_model(rng, N, rho=0.9):
    return DiagonalSSM(rng.uniform(-rho, rho, N), rng.standard_normal(N), rng.standard_normal(N))


@pytest.fixture
def teacher_pair():
    """Two-tone real input through an N = 1 teacher with a = 0.5, b = c = 1."""
    L = 16
    t = np.arange(L)
    u = 0.05 * np.cos(2 * np.pi * t / L) + 0.03 * np.cos(2 * np.pi * 3 * t / L + 0.4)
    U = np.fft.fft(u)
    teacher = DiagonalSSM([0.5], [1.0], [1.0])
    return U, simulate_freq(teacher, U), teacher
