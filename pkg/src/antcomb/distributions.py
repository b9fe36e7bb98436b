"""Closed-form distributions and rate bounds for quantized-feedback analysis.

The quantization error of a random unit codeword against an N-dimensional
channel subspace in C^M is beta(M-N, N) distributed; picking the best of 2^B
independent codewords makes the error the minimum of 2^B such variables. The
helpers here evaluate that law (CDF, inverse CDF, sampling), the closed-form
approximation of its mean, the resulting per-user rate-gap bound, the
feedback-scaling rule that keeps the gap bounded, and a couple of analytic
baselines (block-diagonalization power offset, chi-square norm law).

Chi-square convention: ``chi2_2k`` means the sum of k squared magnitudes of
unit-variance complex Gaussians, i.e. mean k (2k real degrees of freedom).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleGapError, UnsupportedConfigurationError, ValidationError
from .linalg import RandomStream, complex_gaussian

__all__ = [
    "BetaParams",
    "QuantErrorLaw",
    "ScalingInputs",
    "beta_cdf",
    "beta_inverse_cdf",
    "min_beta_cdf",
    "sample_min_beta",
    "expected_error_approx",
    "sample_chi2_2k",
    "chi2_2k_cdf",
    "rate_gap_bound",
    "rate_gap_bound_rx_error",
    "feedback_scaling",
    "bd_offset_dB",
    "bd_sum_rate_offset",
    "ks_statistic",
]

LOG2E = math.log2(math.e)


def _log_comb(n: int, k: int) -> float:
    # log-space binomials stay finite for any n this package meets (M <= 64)
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


@dataclass(frozen=True)
class BetaParams:
    """Integer beta parameters (a, b) = (M - N, N)."""

    a: int
    b: int

    def __post_init__(self):
        if self.a < 1 or self.b < 1:
            raise ValidationError(f"beta parameters must be >= 1; got ({self.a}, {self.b})")


@dataclass(frozen=True)
class QuantErrorLaw:
    """Minimum of 2^B iid beta(a, b) variables; B may be fractional or 0."""

    beta: BetaParams
    log2_codebook_size: float

    def __post_init__(self):
        if self.log2_codebook_size < 0:
            raise ValidationError("codebook size exponent B must be >= 0")


@dataclass(frozen=True)
class ScalingInputs:
    """Inputs of the feedback-scaling rule.

    ``b_gap`` is the target factor for a per-mobile rate loss of at most
    log2(b_gap) bps/Hz; ``c`` is the derived constant
    b_gap * exp(-sum_{l=M-N+1}^{M-1} 1/l) - 1, which must be positive for the
    rule to be feasible.
    """

    M: int
    N: int
    b_gap: float
    P_dB: float
    c: float = field(init=False)

    def __post_init__(self):
        if not 1 <= self.N < self.M:
            raise UnsupportedConfigurationError(
                f"need 1 <= N < M; got M={self.M}, N={self.N}"
            )
        harm = sum(1.0 / l for l in range(self.M - self.N + 1, self.M))
        c = self.b_gap * math.exp(-harm) - 1.0
        if c <= 0.0:
            raise InfeasibleGapError(
                f"target gap factor b={self.b_gap} is too small for M={self.M}, "
                f"N={self.N}: c = b*exp(-{harm:.6f}) - 1 = {c:.6f} <= 0"
            )
        object.__setattr__(self, "c", c)


def beta_cdf(x, p: BetaParams):
    """CDF of beta(a, b) with integer parameters, as a binomial tail sum:

    F(x) = sum_{j=a}^{a+b-1} C(a+b-1, j) x^j (1-x)^{a+b-1-j}

    Vectorized over x; terms are evaluated in log space away from the
    endpoints so large parameters neither overflow nor underflow.
    """
    a, b = p.a, p.b
    n = a + b - 1
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    out = np.zeros_like(xa)
    out[xa >= 1.0] = 1.0
    inside = (xa > 0.0) & (xa < 1.0)
    if np.any(inside):
        xi = xa[inside]
        lx = np.log(xi)
        l1x = np.log1p(-xi)
        acc = np.zeros_like(xi)
        for j in range(a, n + 1):
            acc += np.exp(_log_comb(n, j) + j * lx + (n - j) * l1x)
        out[inside] = np.clip(acc, 0.0, 1.0)
    return float(out[0]) if scalar else out


def beta_inverse_cdf(q, p: BetaParams, tol: float = 1e-12):
    """Inverse beta CDF by bracketed bisection on [0, 1].

    Stops when the bracket width is below ``tol`` (at most 64 halvings, which
    already reaches 2^-64 < 1e-12). Vectorized over q.
    """
    qa = np.asarray(q, dtype=float)
    scalar = qa.ndim == 0
    qa = np.atleast_1d(qa)
    lo = np.zeros_like(qa)
    hi = np.ones_like(qa)
    for _ in range(64):
        if float(np.max(hi - lo)) <= tol:
            break
        mid = 0.5 * (lo + hi)
        below = beta_cdf(mid, p) < qa
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    x = 0.5 * (lo + hi)
    x[qa <= 0.0] = 0.0
    x[qa >= 1.0] = 1.0
    return float(x[0]) if scalar else x


def min_beta_cdf(z, law: QuantErrorLaw):
    """CDF of the minimum of 2^B iid beta variables: 1 - (1 - F(z))^{2^B}."""
    F = np.asarray(beta_cdf(z, law.beta), dtype=float)
    n = 2.0 ** law.log2_codebook_size
    with np.errstate(divide="ignore"):
        out = -np.expm1(n * np.log1p(-np.minimum(F, 1.0)))
    out = np.where(F >= 1.0, 1.0, out)
    return float(out) if out.ndim == 0 else out


def sample_min_beta(law: QuantErrorLaw, rng: RandomStream, size=None):
    """Sample the min-of-2^B-betas law by inverse transform.

    Uses Z = F^{-1}(1 - (1 - U)^{2^-B}) with U uniform(0,1); the inner
    quantile is computed as -expm1(2^-B * log1p(-U)) so that very large B
    keeps full precision.
    """
    U = rng.random(size if size is not None else ())
    scale = 2.0 ** (-law.log2_codebook_size)
    with np.errstate(divide="ignore"):
        q = -np.expm1(scale * np.log1p(-U))
    z = beta_inverse_cdf(q, law.beta)
    if size is None:
        return float(z)
    return z


def expected_error_approx(M: int, N: int, B: float) -> float:
    """Closed-form approximation of the expected quantization error:

    E[sin^2] ~= 2^{-B/(M-N)} * C(M-1, N-1)^{-1/(M-N)}

    Obtained by inverting the leading term C(M-1,N-1) x^{M-N} of the beta CDF
    at probability 2^-B. It is an asymptotic-in-B approximation biased high by
    a factor approaching 1/Gamma(1 + 1/(M-N)); see the min-of-beta mean.
    """
    if not 1 <= N < M:
        raise UnsupportedConfigurationError(f"need 1 <= N < M; got M={M}, N={N}")
    return float(2.0 ** (-(B + _log_comb(M - 1, N - 1) / math.log(2.0)) / (M - N)))


def sample_chi2_2k(k: int, rng: RandomStream, size=None):
    """Sum of k squared magnitudes of iid CN(0,1) scalars (mean k)."""
    if k < 1:
        raise ValidationError(f"chi-square order k must be >= 1; got {k}")
    shape = (k,) if size is None else (np.prod(np.atleast_1d(size)), k)
    g = complex_gaussian(rng, shape)
    v = np.sum(np.real(g * np.conj(g)), axis=-1)
    if size is None:
        return float(v)
    return v.reshape(size)


def chi2_2k_cdf(x, k: int):
    """CDF of the mean-k complex chi-square: 1 - e^-x sum_{i<k} x^i / i!."""
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    xp = np.maximum(xa, 0.0)
    term = np.ones_like(xp)
    acc = np.ones_like(xp)
    for i in range(1, k):
        term = term * xp / i
        acc += term
    out = -np.expm1(-xp + np.log(acc))
    out[xa <= 0.0] = 0.0
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if scalar else out


def rate_gap_bound(M: int, N: int, B: float, P: float) -> float:
    """Upper bound on the per-user rate gap to the perfect-CSIT baseline:

    (sum_{l=M-N+1}^{M-1} 1/l) log2(e)
        + log2(1 + P ((M-N+1)/M) E_approx[sin^2])

    The first term is the norm-shrinkage cost of combining down to one
    effective antenna; the second is the quantization-interference cost.
    """
    if not 1 <= N < M:
        raise UnsupportedConfigurationError(f"need 1 <= N < M; got M={M}, N={N}")
    if P <= 0:
        raise ValidationError(f"linear SNR P must be positive; got {P}")
    norm_loss = sum(1.0 / l for l in range(M - N + 1, M)) * LOG2E
    return norm_loss + math.log2(
        1.0 + P * (M - N + 1) / M * expected_error_approx(M, N, B)
    )


def rate_gap_bound_rx_error(
    M: int, N: int, B: float, P: float, beta_pilot: float
) -> float:
    """Rate-gap bound with imperfect receiver CSI: adds 1/beta_pilot inside the
    log (residual estimation error behaves as extra interference)."""
    if beta_pilot <= 0:
        raise ValidationError(f"pilot factor beta must be positive; got {beta_pilot}")
    norm_loss = sum(1.0 / l for l in range(M - N + 1, M)) * LOG2E
    return norm_loss + math.log2(
        1.0
        + P * (M - N + 1) / M * expected_error_approx(M, N, B)
        + 1.0 / beta_pilot
    )


def feedback_scaling(s: ScalingInputs) -> float:
    """Bits required at SNR P_dB to hold the per-user rate gap at log2(b_gap):

    B_N = (M-N) log2 P - (M-N) log2 c - (M-N) log2(M/(M-N+1)) - log2 C(M-1, N-1)

    Returns the raw (possibly fractional, possibly negative at very low SNR)
    value; consumers round or clamp as appropriate.
    """
    P = 10.0 ** (s.P_dB / 10.0)
    mn = s.M - s.N
    return (
        mn * math.log2(P)
        - mn * math.log2(s.c)
        - mn * math.log2(s.M / (s.M - s.N + 1))
        - _log_comb(s.M - 1, s.N - 1) / math.log(2.0)
    )


def bd_offset_dB(M: int, N: int) -> float:
    """Power advantage (dB) of N-stream block diagonalization over the
    single-stream perfect-CSIT baseline: (3 log2 e / N) sum_{j=1}^{N-1} (N-j)/j."""
    if N < 1 or M % N != 0:
        raise ValidationError(f"need N >= 1 and N | M; got M={M}, N={N}")
    return 3.0 * LOG2E / N * sum((N - j) / j for j in range(1, N))


def bd_sum_rate_offset(M: int, N: int) -> float:
    """Same advantage expressed as a sum-rate offset in bps/Hz:
    (log2 e)(M/N) sum_{j=1}^{N-1} (N-j)/j."""
    if N < 1 or M % N != 0:
        raise ValidationError(f"need N >= 1 and N | M; got M={M}, N={N}")
    return LOG2E * M / N * sum((N - j) / j for j in range(1, N))


def ks_statistic(samples, cdf) -> float:
    """Kolmogorov-Smirnov statistic of samples against a CDF callable.

    D = sup_x |F_emp(x) - F(x)| evaluated at the sample points, taking both
    one-sided gaps (the empirical CDF jumps at each sample).
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("need at least one sample")
    F = np.asarray(cdf(x), dtype=float)
    hi = np.max(np.arange(1, n + 1) / n - F)
    lo = np.max(F - np.arange(0, n) / n)
    return float(max(hi, lo))
