"""Explicit gradients of the frequency-domain loss and gradient-flow integration.

For a stack of diagonal layers with composite response ``H_k = prod_l H^(l)_k``
and per-bin statistics ``sigma_k = Y_k conj(U_k)``, ``eta_k = |U_k|^2``, the
loss ``sum_k |Y_k - H_k U_k|^2`` has, for every real parameter theta of
layer m,

    -dL/dtheta = 2 Re sum_k (sigma_k - H_k eta_k) conj(dH^(m)_k/dtheta)
                              * prod_{l != m} conj(H^(l)_k)

``grad`` returns this negative gradient. The flow that is integrated is
``tau dtheta/dt = Re sum_k (...)``, i.e. half of it, which is the form whose
reduced versions (product dynamics, fixed-(A, B) learning of C) are solved in
closed form in :mod:`ssmdyn.analytic`.
"""

from dataclasses import dataclass, field

import numpy as np

from . import odeint
from .errors import StabilityError
from .spectrum import as_sequence, loss_freq
from .ssm import DiagonalSSM, StackedSSM, as_stack, g_matrix, phase, simulate_freq

DIVERGENCE_LOSS = 1e12


@dataclass(frozen=True)
class FreezeMask:
    learn_a: bool = True
    learn_b: bool = True
    learn_c: bool = True

    def any(self):
        return self.learn_a or self.learn_b or self.learn_c

    def vector(self, N):
        return np.repeat([self.learn_a, self.learn_b, self.learn_c], N)


LEARN_ALL = FreezeMask()
FIXED_A = FreezeMask(learn_a=False)


def _layer_masks(mask, K):
    if mask is None:
        mask = LEARN_ALL
    if isinstance(mask, FreezeMask):
        return (mask,) * K
    masks = tuple(mask)
    if len(masks) != K:
        raise ValueError(f"expected {K} layer masks, got {len(masks)}")
    return masks


def _mask_vector(stack, mask):
    masks = _layer_masks(mask, stack.K)
    return np.concatenate([m.vector(layer.N) for m, layer in zip(masks, stack.layers)])


def partial_H(model, which, i, k, L):
    """dH_k/d(which)_i for a single layer, which in {'a', 'b', 'c'}.

    The a-derivative is the chain-rule form c_i b_i exp(-j w_k) g_ki^2.
    """
    if not 0 <= i < model.N:
        raise IndexError(f"dimension {i} out of range for N={model.N}")
    if not 0 <= k < L:
        raise ValueError(f"bin index {k} out of range for L={L}")
    g = g_matrix(model.a[i:i + 1], L)[k, 0]
    if which == "a":
        return complex(model.c[i] * model.b[i] * np.exp(-2j * np.pi * k / L) * g * g)
    if which == "b":
        return complex(model.c[i] * g)
    if which == "c":
        return complex(g * model.b[i])
    raise ValueError(f"which must be 'a', 'b' or 'c', got {which!r}")


class _Problem:
    """Data-dependent constants shared by every gradient evaluation."""

    def __init__(self, U, Y):
        self.U = as_sequence(U, "U")
        self.Y = as_sequence(Y, "Y")
        if self.U.shape != self.Y.shape:
            raise ValueError(f"length mismatch: U has {self.U.size}, Y has {self.Y.size}")
        self.L = self.U.size
        self.sigma_k = self.Y * np.conj(self.U)
        self.eta_k = np.abs(self.U) ** 2
        self.phase = phase(self.L)

    def evaluate(self, sizes, theta):
        """Loss and complex descent sums (before Re, without the factor 2)."""
        chunks = np.split(theta, np.cumsum([3 * n for n in sizes])[:-1])
        Hs, partials = [], []
        for n, chunk in zip(sizes, chunks):
            a, b, c = chunk[:n], chunk[n:2 * n], chunk[2 * n:]
            if np.any(np.abs(a) >= 1):
                raise StabilityError("unstable diagonal entry encountered")
            g = 1.0 / (1.0 - self.phase[:, None] * a[None, :])
            Hs.append(g @ (c * b))
            partials.append(np.hstack([(c * b) * self.phase[:, None] * g * g, c * g, g * b]))
        H = np.prod(Hs, axis=0)
        resid = self.sigma_k - H * self.eta_k
        loss = float(np.sum(np.abs(self.Y - H * self.U) ** 2))
        # prefix/suffix products avoid dividing by a possibly-zero layer response
        K = len(Hs)
        before = [np.ones(self.L, dtype=np.complex128)]
        for l in range(K - 1):
            before.append(before[-1] * Hs[l])
        after = [np.ones(self.L, dtype=np.complex128)]
        for l in range(K - 1, 0, -1):
            after.append(after[-1] * Hs[l])
        after = after[::-1]
        terms = []
        for m in range(K):
            cofactor = np.conj(before[m] * after[m])
            terms.append((resid * cofactor) @ np.conj(partials[m]))
        return loss, np.concatenate(terms)


def complex_gradient(model, U, Y):
    """The complex sums 2 sum_k (sigma_k - H_k eta_k) conj(dH_k) conj(cofactor).

    Their real parts are the negative loss gradient. For conjugate-symmetric
    spectra the imaginary parts cancel.
    """
    stack = as_stack(model)
    _, terms = _Problem(U, Y).evaluate([l.N for l in stack.layers], stack.params())
    return 2.0 * terms


def grad(model, U, Y, mask=None):
    """Negative gradient -dL/dtheta of the frequency loss.

    Flat vector ordered (a, b, c) per layer; frozen entries are zero.
    """
    stack = as_stack(model)
    return complex_gradient(stack, U, Y).real * _mask_vector(stack, mask)


def grad_stacked(model, U, Y, mask=None):
    if not isinstance(model, StackedSSM):
        raise TypeError("grad_stacked expects a StackedSSM")
    return grad(model, U, Y, mask)


def descent_direction(model, U, Y, mask=None):
    """Right-hand side of tau dtheta/dt, i.e. grad / 2."""
    return 0.5 * grad(model, U, Y, mask)


def model_loss(model, U, Y):
    return loss_freq(Y, simulate_freq(model, U))


def finite_diff_grad(model, U, Y, mask=None, h=1e-6):
    """Central-difference gradient dL/dtheta of the frequency loss (note: not negated)."""
    if h <= 0:
        raise ValueError("h must be positive")
    stack = as_stack(model)
    theta0 = stack.params()
    learn = _mask_vector(stack, mask)
    out = np.zeros_like(theta0)
    for j in np.flatnonzero(learn):
        tp = theta0.copy()
        tm = theta0.copy()
        tp[j] += h
        tm[j] -= h
        fp = model_loss(stack.from_params(tp), U, Y)
        fm = model_loss(stack.from_params(tm), U, Y)
        out[j] = (fp - fm) / (2 * h)
    return out


@dataclass(frozen=True)
class TrainSchedule:
    tau: float = 1.0
    dt: float = 1e-3
    steps: int = 1000
    record_every: int = 1
    integrator: str = "euler"

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be > 0")
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.integrator not in odeint.STEPPERS:
            raise ValueError(f"integrator must be one of {sorted(odeint.STEPPERS)}")


@dataclass
class TrajectoryRecord:
    step: int
    t: float
    params: np.ndarray
    loss_freq: float
    lam: float
    H: np.ndarray = None


@dataclass
class Trajectory:
    layer_sizes: tuple
    records: list = field(default_factory=list)
    status: str = "completed"
    diverged_step: int = None

    @property
    def diverged(self):
        return self.status == "diverged"

    @property
    def K(self):
        return len(self.layer_sizes)

    def _column(self, name):
        return np.array([getattr(r, name) for r in self.records])

    @property
    def steps(self):
        return self._column("step")

    @property
    def t(self):
        return self._column("t")

    @property
    def loss(self):
        return self._column("loss_freq")

    @property
    def lam(self):
        return self._column("lam")

    @property
    def params(self):
        return np.array([r.params for r in self.records])

    def param_names(self):
        names = []
        for l, n in enumerate(self.layer_sizes):
            suffix = "" if self.K == 1 else f"_l{l}"
            for p in "abc":
                names.extend(f"{p}_{i}{suffix}" for i in range(n))
        return names

    def layer(self, index, l=0):
        """The DiagonalSSM of layer ``l`` at record ``index``."""
        stack = StackedSSM(tuple(DiagonalSSM.symmetric(n, 0, 0, 0) for n in self.layer_sizes))
        return stack.from_params(self.records[index].params).layers[l]

    def final_model(self):
        stack = StackedSSM(tuple(DiagonalSSM.symmetric(n, 0, 0, 0) for n in self.layer_sizes))
        return stack.from_params(self.records[-1].params)


def _lambda(sizes, theta):
    chunks = np.split(theta, np.cumsum([3 * n for n in sizes])[:-1])
    out = 1.0
    for n, ch in zip(sizes, chunks):
        out *= float(np.dot(ch[n:2 * n], ch[2 * n:]))
    return out


def integrate(model, U, Y, mask=None, schedule=None, record_response=False):
    """Integrate tau dtheta/dt = descent_direction(theta) with a fixed-step scheme.

    Divergence (loss above 1e12, non-finite values, or any |a_i| >= 1) stops
    the run and is reported through ``status``; it never raises.
    """
    schedule = schedule or TrainSchedule()
    stack = as_stack(model)
    sizes = [layer.N for layer in stack.layers]
    learn = _mask_vector(stack, mask).astype(np.float64)
    if not learn.any():
        raise ValueError("freeze mask leaves no parameter to learn")
    problem = _Problem(U, Y)
    rate = 1.0 / schedule.tau

    def flow(theta):
        _, terms = problem.evaluate(sizes, theta)
        return rate * terms.real * learn

    step_fn = odeint.STEPPERS[schedule.integrator]
    traj = Trajectory(tuple(sizes))
    theta = stack.params()

    def record(n, loss):
        H = None
        if record_response:
            H = np.prod([g_matrix(ch[:s], problem.L) @ (ch[2 * s:] * ch[s:2 * s])
                         for s, ch in zip(sizes, np.split(theta, np.cumsum([3 * s for s in sizes])[:-1]))],
                        axis=0)
        traj.records.append(TrajectoryRecord(n, n * schedule.dt, theta.copy(), loss, _lambda(sizes, theta), H))

    for n in range(schedule.steps + 1):
        try:
            loss, terms = problem.evaluate(sizes, theta)
        except StabilityError:
            traj.status, traj.diverged_step = "diverged", n
            break
        if not np.isfinite(loss) or loss > DIVERGENCE_LOSS:
            traj.status, traj.diverged_step = "diverged", n
            break
        if n % schedule.record_every == 0 or n == schedule.steps:
            record(n, loss)
        if n == schedule.steps:
            break
        try:
            if schedule.integrator == "euler":
                theta = theta + schedule.dt * rate * terms.real * learn
            else:
                theta = step_fn(flow, theta, schedule.dt)
        except StabilityError:
            traj.status, traj.diverged_step = "diverged", n + 1
            break
        if not np.all(np.isfinite(theta)):
            traj.status, traj.diverged_step = "diverged", n + 1
            break
    return traj
