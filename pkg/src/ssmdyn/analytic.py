"""Closed-form learning trajectories and the reduced ODEs they solve.

Two families of setups:

* ``ReducedScalarSetup`` -- balanced product dynamics ``Lambda = C B`` with the
  transition fixed, driven by G-weighted statistics.
* ``FixedABSetup`` -- a single frequency bin with ``b_i = 1`` and the
  transition fixed (learning c) or c fixed (learning a), driven by plain
  statistics.

All trajectory formulas accept scalar or array ``t`` and are written in a
form that does not overflow for large ``t``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .suffstats import GWeighted, Plain


@dataclass(frozen=True)
class ReducedScalarSetup:
    sigma: float
    eta: float
    tau: float = 1.0
    lambda0: float = 0.1
    N: int = 1

    def __post_init__(self):
        if not self.eta > 0:
            raise DomainError(f"eta must be > 0, got {self.eta}")
        if not self.tau > 0:
            raise DomainError(f"tau must be > 0, got {self.tau}")
        if self.N < 1:
            raise DomainError(f"N must be >= 1, got {self.N}")

    @classmethod
    def from_stats(cls, stats, tau, lambda0, N=1):
        if not isinstance(stats.weighting, GWeighted):
            raise TypeError("product dynamics need G-weighted statistics")
        return cls(stats.sigma_real, stats.eta_real, tau, lambda0, N)

    @property
    def limit(self):
        return self.sigma / self.eta


@dataclass(frozen=True)
class FixedABSetup:
    a: float
    c0: float
    sigma: float
    eta: float
    tau: float = 1.0
    N: int = 1
    b_fixed: float = 1.0

    def __post_init__(self):
        if not abs(self.a) < 1:
            raise DomainError(f"|a| must be < 1, got {self.a}")
        if not self.eta > 0:
            raise DomainError(f"eta must be > 0, got {self.eta}")
        if not self.tau > 0:
            raise DomainError(f"tau must be > 0, got {self.tau}")
        if self.N < 1:
            raise DomainError(f"N must be >= 1, got {self.N}")
        if self.b_fixed != 1.0:
            raise DomainError("the fixed-(A, B) closed forms assume b_i = 1")

    @classmethod
    def from_stats(cls, stats, a, c0, tau, N=1):
        if not isinstance(stats.weighting, Plain):
            raise TypeError("fixed-(A, B) formulas need plain statistics")
        return cls(a, c0, stats.sigma_real, stats.eta_real, tau, N)

    @property
    def c_limit(self):
        """Stationary c of the dc/dt equation, (1 - a) sigma / (N eta)."""
        return (1 - self.a) * self.sigma / (self.N * self.eta)

    @property
    def c_rate(self):
        """Exponential rate N^2 eta / (tau (1 - a)^2) of c(t)."""
        return self.N ** 2 * self.eta / (self.tau * (1 - self.a) ** 2)

    def a_limit(self, c=None):
        """Stationary a of the da/dt equation for fixed c: 1 - N c eta / sigma."""
        c = self.c0 if c is None else c
        return 1 - self.N * c * self.eta / self.sigma


def _times(t):
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise DomainError("t must be >= 0")
    return t


def _scalar_out(x):
    return float(x) if np.ndim(x) == 0 else x


def lambda_scalar(t, s):
    """Balanced product Lambda(t) = CB for N = 1.

    Defined for sigma > 0 and Lambda0 > 0; it rises (or falls) logistically to
    sigma/eta with rate 2 sigma / tau.
    """
    _check_growth_regime(s)
    return lambda_ndim(t, ReducedScalarSetup(s.sigma, s.eta, s.tau, s.lambda0, 1))


def lambda_ndim(t, s):
    """Symmetric-init N-dimensional product as printed:

        Lambda(t) = (sigma/eta) e^x / (e^x - N + (sigma/eta)/Lambda0),  x = 2 N sigma t / tau

    Note Lambda(0) equals Lambda0 only when N = 1.
    """
    _check_growth_regime(s)
    R = s.limit / s.lambda0
    if not R - s.N > -1:
        raise DomainError(
            f"denominator vanishes for t >= 0: need (sigma/eta)/Lambda0 > N - 1, "
            f"got {R:.6g} with N={s.N} (Lambda0 too large for this N)"
        )
    t = _times(t)
    x = 2 * s.N * s.sigma * t / s.tau
    out = s.limit / (1.0 + (R - s.N) * np.exp(-x))
    return _scalar_out(out)


def _check_growth_regime(s):
    if not s.sigma > 0:
        raise DomainError(f"closed form only covers sigma > 0, got sigma={s.sigma}")
    if s.lambda0 == 0:
        raise DomainError("Lambda0 = 0 is a stationary point; the closed form is undefined there")
    if s.lambda0 < 0:
        raise DomainError("Lambda0 < 0 with sigma > 0 blows up in finite time")


def time_constant_scalar(s):
    if not s.sigma > 0:
        raise DomainError(f"time constant needs sigma > 0, got {s.sigma}")
    return s.tau / (2 * s.sigma)


def c_of_t(t, s):
    """c(t) for learning C with A and B = 1 fixed, single bin."""
    t = _times(t)
    decay = np.exp(-t * s.N ** 2 * s.eta / (s.tau * (1 - s.a) ** 2))
    offset = (s.a - 1) * s.sigma
    out = (decay * (offset + s.N * s.c0 * s.eta) - offset) / (s.N * s.eta)
    return _scalar_out(out)


def time_to_c(c_f, s):
    """Time at which c(t) reaches ``c_f``; c_f must lie in [c0, c_limit)."""
    offset = (s.a - 1) * s.sigma
    num = offset + s.N * c_f * s.eta
    den = offset + s.N * s.c0 * s.eta
    if c_f == s.c0:
        return 0.0
    if den == 0 or not 0 < num / den <= 1:
        raise DomainError(
            f"c_f={c_f!r} is unreachable: admissible targets lie between c0={s.c0!r} "
            f"(inclusive) and the stationary value {s.c_limit!r} (exclusive)"
        )
    return float(-s.tau * (1 - s.a) ** 2 / (s.N ** 2 * s.eta) * np.log(num / den))


def time_to_a(a_f, s):
    """Time for a to move from ``s.a`` to ``a_f`` with c = ``s.c0`` and b = 1 fixed.

    Evaluates the closed-form antiderivative of the da/dt equation. The path
    must not cross or reach the stationary value 1 - N c eta / sigma.
    """
    a0, c, N, sig, eta = s.a, s.c0, s.N, s.sigma, s.eta
    if not abs(a_f) < 1:
        raise DomainError(f"|a_f| must be < 1, got {a_f}")
    if a_f == a0:
        return 0.0
    if c == 0 or sig == 0:
        raise DomainError("a is stationary when c = 0 or sigma = 0")
    a_star = s.a_limit()
    if a0 == a_star:
        raise DomainError(f"a0={a0!r} is the stationary point; no other a_f is reachable")
    # sign of da/dt on the path: sign(c sigma (a_star - a))
    heading = np.sign(c * sig * (a_star - a0))
    if np.sign(a_f - a0) != heading:
        raise DomainError(f"a moves {'up' if heading > 0 else 'down'} from a0={a0!r}; a_f={a_f!r} is behind it")
    toward_fixed_point = heading == np.sign(a_star - a0)
    if toward_fixed_point and not (a_f - a0) * (a_star - a_f) > 0:
        raise DomainError(f"a_f={a_f!r} is at or past the stationary value {a_star!r}")

    def poly(a):
        return (a - 1) * (-3 * (a - 1) * N * c * eta * sig + 2 * (a - 1) ** 2 * sig ** 2 + 6 * N ** 2 * c ** 2 * eta ** 2)

    ratio = ((a0 - 1) * sig + N * c * eta) / ((a_f - 1) * sig + N * c * eta)
    if not ratio > 0:
        raise DomainError("log argument is not positive on this path")
    t = s.tau / (6 * N * c * sig ** 4) * (
        6 * N ** 3 * c ** 3 * eta ** 3 * np.log(ratio) + sig * (poly(a_f) - poly(a0))
    )
    return float(t)


ODE_KINDS = ("lambda", "eq4_b", "eq4_c", "appB_dc", "appB_da")


def reduced_ode_rhs(kind, state, s):
    """tau * d(state)/dt for one of the reduced equations.

    ``lambda``   state = Lambda            -> 2 Lambda (sigma - Lambda eta)
    ``eq4_c``    state = (b, c)            -> (sigma - c b eta) b
    ``eq4_b``    state = (b, c)            -> (sigma - c b eta) c
    ``appB_dc``  state = c                 -> N/(1-a) (sigma - N c eta/(1-a))
    ``appB_da``  state = a (c = s.c0)      -> N c/(1-a)^2 (sigma - N c eta/(1-a))
    """
    if kind == "lambda":
        lam = state
        return 2 * lam * (s.sigma - lam * s.eta)
    if kind in ("eq4_b", "eq4_c"):
        b, c = state
        err = s.sigma - c * b * s.eta
        return err * b if kind == "eq4_c" else err * c
    if kind == "appB_dc":
        c = state
        g = 1 / (1 - s.a)
        return s.N * g * (s.sigma - s.N * c * g * s.eta)
    if kind == "appB_da":
        a = state
        g = 1 / (1 - a)
        return s.N * s.c0 * g ** 2 * (s.sigma - s.N * s.c0 * g * s.eta)
    raise ValueError(f"unknown ODE kind {kind!r}; expected one of {ODE_KINDS}")


def time_to_fraction(t, values, limit, alpha=0.9):
    """First grid time at which values / limit >= alpha, or None."""
    frac = np.asarray(values) / limit
    hits = np.flatnonzero(frac >= alpha)
    return float(np.asarray(t)[hits[0]]) if hits.size else None


def logistic_rate(t, values, limit, lo=0.05, hi=0.95):
    """Least-squares slope of log(v / (limit - v)) over the window lo < v/limit < hi.

    For a logistic curve v = limit / (1 + r e^{-k t}) this recovers k.
    """
    t = np.asarray(t, dtype=np.float64)
    frac = np.asarray(values, dtype=np.float64) / limit
    keep = (frac > lo) & (frac < hi)
    if keep.sum() < 3:
        raise ValueError("too few points inside the fitting window")
    z = np.log(frac[keep] / (1 - frac[keep]))
    slope, _ = np.polyfit(t[keep], z, 1)
    return float(slope)
