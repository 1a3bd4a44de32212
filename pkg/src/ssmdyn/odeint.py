"""Fixed-step explicit integrators for autonomous ODEs y' = f(y)."""

import numpy as np


def euler_step(f, y, h):
    return y + h * f(y)


def rk4_step(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


STEPPERS = {"euler": euler_step, "rk4": rk4_step}


def solve(f, y0, h, steps, method="rk4"):
    """Integrate ``steps`` fixed steps. Returns (t, Y) with Y[i] the state at t[i]."""
    step = STEPPERS[method]
    y = np.array(y0, dtype=np.float64)
    out = np.empty((steps + 1,) + y.shape)
    out[0] = y
    for i in range(steps):
        y = step(f, y, h)
        out[i + 1] = y
    return h * np.arange(steps + 1), out


def time_to_event(f, y0, event, h, max_steps, method="rk4", refine_tol=1e-14):
    """First time at which scalar ``event(y)`` changes sign, or None.

    The crossing inside the bracketing step is located by bisection on the
    step length, re-integrating one step from the left end each time.
    """
    step = STEPPERS[method]
    y = np.array(y0, dtype=np.float64)
    g0 = event(y)
    if g0 == 0:
        return 0.0
    for i in range(max_steps):
        y_next = step(f, y, h)
        g1 = event(y_next)
        if g1 == 0:
            return (i + 1) * h
        if np.sign(g1) != np.sign(g0):
            lo, hi = 0.0, h
            while hi - lo > refine_tol * max(h, 1.0):
                mid = 0.5 * (lo + hi)
                if np.sign(event(step(f, y, mid))) == np.sign(g0):
                    lo = mid
                else:
                    hi = mid
            return i * h + 0.5 * (lo + hi)
        y, g0 = y_next, g1
    return None
