"""DFT machinery and squared-error losses in the time and frequency domains.

Sequences are plain 1-D ``complex128`` numpy arrays. Indexing is zero based:
``X[k] = sum_t x[t] exp(-2j*pi*k*t/L)`` for ``t, k = 0..L-1``. The forward
transform is unnormalized and the inverse carries the ``1/L`` factor, so that

    loss_freq(dft(y), dft(y_hat)) == L * loss_time(y, y_hat)
"""

import numpy as np


def as_sequence(x, name="x"):
    """Validate and convert ``x`` to a finite, non-empty complex vector."""
    arr = np.asarray(x, dtype=np.complex128)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must have length >= 1")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def _same_length(a, b, names):
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {names[0]} has {a.size}, {names[1]} has {b.size}")


def dft(x):
    return np.fft.fft(as_sequence(x))


def idft(X):
    return np.fft.ifft(as_sequence(X, "X"))


def naive_dft(x):
    """Quadratic-time DFT by direct summation. Used as a test oracle."""
    x = as_sequence(x)
    L = x.size
    out = np.zeros(L, dtype=np.complex128)
    for k in range(L):
        acc = 0j
        for t in range(L):
            acc += x[t] * np.exp(-2j * np.pi * k * t / L)
        out[k] = acc
    return out


def loss_time(y, y_hat):
    """Sum of squared moduli of the time-domain residual."""
    y = as_sequence(y, "y")
    y_hat = as_sequence(y_hat, "y_hat")
    _same_length(y, y_hat, ("y", "y_hat"))
    return float(np.sum(np.abs(y - y_hat) ** 2))


def loss_freq(Y, Y_hat):
    """Frequency-domain squared loss, sum_k |Y_hat_k - Y_k|^2."""
    Y = as_sequence(Y, "Y")
    Y_hat = as_sequence(Y_hat, "Y_hat")
    _same_length(Y, Y_hat, ("Y", "Y_hat"))
    return float(np.sum(np.abs(Y_hat - Y) ** 2))
