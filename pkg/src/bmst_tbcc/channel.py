"""BPSK over AWGN: modulation, noise, densities and reference statistics.

SNR convention: ``snr_db = 10*log10(1/sigma**2)`` with unit-energy antipodal
symbols (bit 0 -> +1, bit 1 -> -1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

LN2 = math.log(2.0)


class QuadratureError(RuntimeError):
    pass


def snr_to_sigma(snr_db: float) -> float:
    return 10.0 ** (-snr_db / 20.0)


def sigma_to_snr(sigma: float) -> float:
    return -20.0 * math.log10(sigma)


@dataclass(frozen=True)
class ChannelModel:
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma}")

    @classmethod
    def from_snr_db(cls, snr_db: float) -> "ChannelModel":
        return cls(snr_to_sigma(snr_db))

    @property
    def snr_db(self) -> float:
        return sigma_to_snr(self.sigma)

    @property
    def variance(self) -> float:
        return self.sigma * self.sigma


def bpsk(c) -> np.ndarray:
    return 1.0 - 2.0 * np.asarray(c, dtype=np.float64)


def awgn(x, model: ChannelModel, rng: np.random.Generator) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return x + rng.normal(0.0, model.sigma, size=x.shape)


def symbol_density(y, x_bit, model: ChannelModel):
    """Gaussian density of ``y`` around the BPSK point of ``x_bit``."""
    mean = 1.0 - 2.0 * np.asarray(x_bit, dtype=np.float64)
    d = np.asarray(y, dtype=np.float64) - mean
    return np.exp(-d * d / (2 * model.variance)) / (model.sigma * math.sqrt(2 * math.pi))


def _expect_given_zero(g, sigma: float, tol: float) -> float:
    """E[g(Y)] for Y ~ N(+1, sigma^2) by adaptive quadrature."""

    def integrand(y):
        d = y - 1.0
        return g(y) * math.exp(-d * d / (2 * sigma * sigma)) / (sigma * math.sqrt(2 * math.pi))

    lo, hi = 1.0 - 40.0 * sigma, 1.0 + 40.0 * sigma
    val, err = integrate.quad(integrand, lo, hi, epsabs=1e-12, epsrel=1e-10, limit=400, points=[0.0, 1.0])
    if not math.isfinite(val) or err > tol:
        raise QuadratureError(f"quadrature did not converge (error estimate {err:.3g})")
    return val


def _log2_1p_exp(a: float) -> float:
    # log2(1 + e^a), overflow-safe
    return np.logaddexp(0.0, a) / LN2


def reference_stats(model: ChannelModel, tol: float = 1e-4) -> tuple[float, float]:
    """Mutual information I(X;Y) for uniform BPSK input, and the mean EDF of a
    word drawn independently of the received vector.  Both in bits/symbol."""
    s2 = model.variance
    mi = 1.0 - _expect_given_zero(lambda y: _log2_1p_exp(-2.0 * y / s2), model.sigma, tol)

    def rand_term(y):
        return 1.0 - 0.5 * _log2_1p_exp(-2.0 * y / s2) - 0.5 * _log2_1p_exp(2.0 * y / s2)

    d_rand = _expect_given_zero(rand_term, model.sigma, tol)
    return mi, d_rand
