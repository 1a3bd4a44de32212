"""Diagonal single-input single-output linear SSMs.

The recurrence is ``x_t = A x_{t-1} + B u_t``, ``y_t = C x_t`` with
``A = diag(a)`` and ``x_{-1} = 0``. In the frequency domain the layer acts
as a per-bin gain ``H_k = sum_i c_i b_i / (1 - exp(-j w_k) a_i)`` with
``w_k = 2 pi k / L``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import StabilityError
from .spectrum import as_sequence


def _check_stable(a):
    bad = np.flatnonzero(~(np.abs(a) < 1))
    if bad.size:
        raise StabilityError(f"unstable diagonal entries at {bad.tolist()}: |a| must be < 1")


def _frozen(values, name):
    arr = np.array(values, dtype=np.float64, ndmin=1)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DiagonalSSM:
    """One layer: diagonal of A, input vector B and output vector C."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        a = _frozen(self.a, "a")
        b = _frozen(self.b, "b")
        c = _frozen(self.c, "c")
        if not (a.size == b.size == c.size) or a.size == 0:
            raise ValueError(f"a, b, c must share a positive length, got {a.size}, {b.size}, {c.size}")
        _check_stable(a)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def N(self):
        return self.a.size

    @property
    def spectral_radius(self):
        return float(np.max(np.abs(self.a)))

    @classmethod
    def symmetric(cls, N, a, b, c):
        """All N latent dimensions initialised to the same (a, b, c)."""
        return cls(np.full(N, a), np.full(N, b), np.full(N, c))

    def replace(self, a=None, b=None, c=None):
        return DiagonalSSM(
            self.a if a is None else a,
            self.b if b is None else b,
            self.c if c is None else c,
        )

    def params(self):
        return np.concatenate([self.a, self.b, self.c])

    @classmethod
    def from_params(cls, theta):
        a, b, c = np.split(np.asarray(theta, dtype=np.float64), 3)
        return cls(a, b, c)

    def product(self):
        """sum_i c_i b_i, the scalar gain the reduced dynamics track."""
        return float(np.dot(self.c, self.b))


@dataclass(frozen=True, eq=False)
class StackedSSM:
    layers: tuple

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ValueError("a stacked model needs at least one layer")
        for layer in layers:
            if not isinstance(layer, DiagonalSSM):
                raise TypeError("layers must be DiagonalSSM instances")
        object.__setattr__(self, "layers", layers)

    @property
    def K(self):
        return len(self.layers)

    def params(self):
        return np.concatenate([layer.params() for layer in self.layers])

    def from_params(self, theta):
        """Rebuild a stack with this stack's layer sizes from a flat vector."""
        theta = np.asarray(theta, dtype=np.float64)
        sizes = [3 * layer.N for layer in self.layers]
        if theta.size != sum(sizes):
            raise ValueError(f"expected {sum(sizes)} parameters, got {theta.size}")
        chunks = np.split(theta, np.cumsum(sizes)[:-1])
        return StackedSSM(tuple(DiagonalSSM.from_params(ch) for ch in chunks))

    def product(self):
        return float(np.prod([layer.product() for layer in self.layers]))


def as_stack(model):
    if isinstance(model, StackedSSM):
        return model
    if isinstance(model, DiagonalSSM):
        return StackedSSM((model,))
    raise TypeError(f"expected DiagonalSSM or StackedSSM, got {type(model).__name__}")


def _check_bin(k, L):
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    if not 0 <= k < L:
        raise ValueError(f"bin index {k} out of range for L={L}")


def g_factor(a_i, k, L):
    """Diagonal resolvent entry (1 - exp(-2j pi k / L) a_i)^-1."""
    _check_bin(k, L)
    _check_stable(np.atleast_1d(a_i))
    return 1.0 / (1.0 - np.exp(-2j * np.pi * k / L) * a_i)


def phase(L):
    """exp(-j w_k) for every bin k = 0..L-1."""
    return np.exp(-2j * np.pi * np.arange(L) / L)


def g_matrix(a, L):
    """g[k, i] = g_factor(a[i], k, L) for all bins at once, shape (L, N)."""
    a = np.asarray(a, dtype=np.float64)
    _check_stable(a)
    return 1.0 / (1.0 - phase(L)[:, None] * a[None, :])


def frequency_response(model, k, L):
    _check_bin(k, L)
    return complex(response(model, L)[k])


def response(model, L):
    """Frequency response H_k of one layer for all k, shape (L,)."""
    if isinstance(model, StackedSSM):
        raise TypeError("use composite_response for stacked models")
    return g_matrix(model.a, L) @ (model.c * model.b)


def composite_response(model, k=None, L=None):
    """Product of per-layer responses. Returns all bins when ``k`` is None."""
    if L is None:
        raise ValueError("L is required")
    H = np.ones(L, dtype=np.complex128)
    for layer in as_stack(model).layers:
        H = H * response(layer, L)
    if k is None:
        return H
    _check_bin(k, L)
    return complex(H[k])


def impulse_response(model, length):
    """Kernel h_m = sum_i c_i a_i^m b_i for m = 0..length-1."""
    m = np.arange(length)[:, None]
    return (model.a[None, :] ** m) @ (model.c * model.b)


def simulate_time(model, u):
    """Run the recurrence from a zero state over ``u``; output has len(u) entries."""
    u = as_sequence(u, "u")
    y = np.empty_like(u)
    for layer in as_stack(model).layers:
        x = np.zeros(layer.N, dtype=np.complex128)
        for t in range(u.size):
            x = layer.a * x + layer.b * u[t]
            y[t] = np.dot(layer.c, x)
        u = y.copy()
    return y


def simulate_freq(model, U):
    """Per-bin product Y_hat_k = H_k U_k (composite H for stacks)."""
    U = as_sequence(U, "U")
    return composite_response(model, L=U.size) * U


def decay_padding(model, tol=1e-12):
    """Smallest m with rho^m <= tol, where rho is the largest |a_i| of any layer."""
    rho = max(layer.spectral_radius for layer in as_stack(model).layers)
    if rho == 0:
        return 1
    return int(np.ceil(np.log(tol) / np.log(rho)))
