import numpy as np
import pytest

from ssmdyn import odeint


def test_rk4_fourth_order():
    errs = []
    for h in (0.1, 0.05):
        t, y = odeint.solve(lambda y: -y, 1.0, h, int(round(1 / h)))
        errs.append(abs(y[-1] - np.exp(-1)))
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.05)


def test_euler_first_order():
    errs = []
    for h in (0.01, 0.005):
        t, y = odeint.solve(lambda y: -y, 1.0, h, int(round(1 / h)), "euler")
        errs.append(abs(y[-1] - np.exp(-1)))
    assert errs[0] / errs[1] == pytest.approx(2, rel=0.05)


def test_vector_state():
    # harmonic oscillator: energy is nearly conserved by RK4 over one period
    f = lambda y: np.array([y[1], -y[0]])
    t, y = odeint.solve(f, [1.0, 0.0], 2 * np.pi / 1000, 1000)
    np.testing.assert_allclose(y[-1], [1.0, 0.0], atol=1e-10)


def test_event_time():
    # y' = 1 from 0 crosses 0.3337 at t = 0.3337
    assert odeint.time_to_event(lambda y: 1.0, 0.0, lambda y: y - 0.3337, 0.01, 100) == pytest.approx(0.3337, abs=1e-12)


def test_event_not_reached():
    assert odeint.time_to_event(lambda y: 0.0, 0.0, lambda y: y - 1, 0.1, 10) is None
