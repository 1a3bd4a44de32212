"""Input/output covariance summaries in the frequency domain.

Two weightings exist and callers must pick one explicitly:

``Plain()``
    sigma = sum_k Y_k conj(U_k),  eta = sum_k |U_k|^2
``GWeighted(a)``
    sigma = sum_k Y_k conj(G_k) conj(U_k),  eta = sum_k |U_k|^2 |G_k|^2
    with G_k = 1 / (1 - exp(-j w_k) a) for a fixed scalar transition ``a``.

The reduced product dynamics (scalar and symmetric N-dim) consume the
G-weighted pair; the fixed-(A, B) analysis of learning C consumes the plain one.
"""

from dataclasses import dataclass

import numpy as np

from .spectrum import as_sequence
from .ssm import g_matrix

IMAG_RTOL = 1e-8


@dataclass(frozen=True)
class Plain:
    pass


@dataclass(frozen=True)
class GWeighted:
    a: float


@dataclass(frozen=True, eq=False)
class SufficientStats:
    sigma: complex
    eta: complex
    sigma_k: np.ndarray
    eta_k: np.ndarray
    weighting: object = None

    def real_part_checked(self, name, rtol=IMAG_RTOL):
        """Real part of the aggregate ``sigma`` or ``eta``.

        Raises ValueError when the imaginary part is not negligible, which
        happens when the spectra are not conjugate symmetric.
        """
        if name not in ("sigma", "eta"):
            raise ValueError(f"unknown statistic {name!r}")
        z = complex(getattr(self, name))
        if abs(z.imag) > rtol * max(abs(z), np.finfo(float).tiny):
            raise ValueError(f"{name} has a non-negligible imaginary part: {z!r}")
        return z.real

    @property
    def sigma_real(self):
        return self.real_part_checked("sigma")

    @property
    def eta_real(self):
        return self.real_part_checked("eta")

    @property
    def ratio(self):
        """sigma / eta, the fixed point of the reduced product dynamics."""
        return self.sigma_real / self.eta_real


def per_bin_stats(U, Y):
    """sigma_k = Y_k conj(U_k) and eta_k = |U_k|^2 (stored real-valued as complex)."""
    U = as_sequence(U, "U")
    Y = as_sequence(Y, "Y")
    if U.shape != Y.shape:
        raise ValueError(f"length mismatch: U has {U.size}, Y has {Y.size}")
    sigma_k = Y * np.conj(U)
    eta_k = (np.abs(U) ** 2).astype(np.complex128)
    return SufficientStats(complex(sigma_k.sum()), complex(eta_k.sum()), sigma_k, eta_k, None)


def aggregate(U, Y, weighting):
    """Aggregate statistics under ``weighting`` (``Plain()`` or ``GWeighted(a)``)."""
    base = per_bin_stats(U, Y)
    if isinstance(weighting, Plain):
        return SufficientStats(base.sigma, base.eta, base.sigma_k, base.eta_k, weighting)
    if isinstance(weighting, GWeighted):
        G = g_matrix([weighting.a], base.sigma_k.size)[:, 0]
        sigma = np.sum(base.sigma_k * np.conj(G))
        eta = np.sum(base.eta_k.real * np.abs(G) ** 2)
        return SufficientStats(complex(sigma), complex(eta), base.sigma_k, base.eta_k, weighting)
    raise TypeError(f"weighting must be Plain() or GWeighted(a), got {weighting!r}")
