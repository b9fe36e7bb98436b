"""Receive-combining strategies.

Each strategy maps a mobile's M x N channel (or an MMSE estimate of it) to an
EffectiveChannel: a unit combiner gamma, the effective vector h_eff = H gamma,
the direction fed back to the transmitter, and the angular quantization error.

Strategies:
  qbc              minimize quantization error over all unit combiners
  antenna_selection  pick the receive antenna whose direction quantizes best
  mrc              pick the codeword maximizing post-combining received power
  max_eigenvector  beamform onto the top right-singular direction, then quantize
  none             use antenna 1 only (the N=1 baseline)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import BetaParams
from .errors import (
    CodebookModeError,
    DegenerateChannelError,
    ValidationError,
)
from .linalg import (
    ChannelMatrix,
    RandomStream,
    max_eigvec,
    phase_fix,
    project_onto_span,
    pseudo_inverse_apply,
)
from .quantization import (
    EXPLICIT,
    Codebook,
    QuantizationResult,
    emulate_quantization_batch,
    quantize_subspace,
    quantize_vector,
)

QBC = "qbc"
ANTENNA_SELECTION = "antenna_selection"
MRC = "mrc"
MAX_EIGENVECTOR = "max_eigenvector"
NONE = "none"

STRATEGIES = (QBC, ANTENNA_SELECTION, MRC, MAX_EIGENVECTOR, NONE)

__all__ = [
    "QBC",
    "ANTENNA_SELECTION",
    "MRC",
    "MAX_EIGENVECTOR",
    "NONE",
    "STRATEGIES",
    "EffectiveChannel",
    "RxEstimate",
    "qbc",
    "antenna_selection",
    "mrc",
    "max_eig_combining",
    "no_combining",
    "make_rx_estimate",
    "combine_with_estimate",
    "combine",
]


@dataclass(frozen=True)
class EffectiveChannel:
    """Per-mobile combining outcome.

    gamma has unit norm so the post-combining noise stays unit variance;
    h_eff = H @ gamma; norm2 = ||h_eff||^2; quant holds the fed-back
    direction and its squared-sine error.
    """

    strategy: str
    gamma: np.ndarray
    h_eff: np.ndarray
    quant: QuantizationResult
    norm2: float


@dataclass(frozen=True)
class RxEstimate:
    """MMSE channel estimate from a beta*P-power downlink pilot.

    G_hat entries deviate from H by independent residuals of variance
    1/(1 + beta_pilot * P). true_H is carried for evaluation only: combiners
    derived from G_hat are always applied to the true channel.
    """

    G_hat: np.ndarray
    beta_pilot: float
    true_H: ChannelMatrix


def _finish(strategy, A, gamma, quant) -> EffectiveChannel:
    h_eff = A @ gamma
    return EffectiveChannel(
        strategy=strategy,
        gamma=gamma,
        h_eff=h_eff,
        quant=quant,
        norm2=float(np.real(np.vdot(h_eff, h_eff))),
    )


def _quantize_direction(v, cb: Codebook, rng) -> QuantizationResult:
    # vector (dim-1 subspace) quantization in either codebook mode
    if cb.mode == EXPLICIT:
        return quantize_vector(v, cb)
    if rng is None:
        raise ValidationError("emulated quantization needs an rng")
    vt = v / np.linalg.norm(v)
    M = vt.shape[0]
    hhat, Z, _ = emulate_quantization_batch(
        vt[None, :, None], BetaParams(M - 1, 1), cb.B, rng
    )
    return QuantizationResult(index=-1, q_vector=hhat[0], sin2_error=float(Z[0]))


def qbc(H: ChannelMatrix, cb: Codebook, rng: RandomStream = None) -> EffectiveChannel:
    """Quantization-based combining.

    Feed back the codeword closest to span(H); steer the combiner so the
    effective channel points exactly along that codeword's in-span
    projection. The resulting error is the min over the codebook of
    beta(M-N, N) angles, the best any unit combiner can do.
    """
    Q = H.Q
    if cb.mode == EXPLICIT:
        quant = quantize_subspace(Q, cb)
        proj, cos2 = project_onto_span(quant.q_vector, Q)
        nrm = np.sqrt(max(cos2, 0.0))
        if nrm < 1e-12:
            raise DegenerateChannelError(
                "feedback direction orthogonal to the channel span"
            )
        s_proj = phase_fix(proj / nrm)
    else:
        if rng is None:
            raise ValidationError("emulated quantization needs an rng")
        hhat, Z, u = emulate_quantization_batch(
            Q[None], BetaParams(H.M - H.N, H.N), cb.B, rng
        )
        quant = QuantizationResult(
            index=-1, q_vector=hhat[0], sin2_error=float(Z[0])
        )
        # the normalized in-span projection of hhat is u by construction
        s_proj = phase_fix(u[0])
    u_w = pseudo_inverse_apply(H.H, s_proj)
    gamma = u_w / np.linalg.norm(u_w)
    return _finish(QBC, H.H, gamma, quant)


def antenna_selection(H: ChannelMatrix, cb: Codebook) -> EffectiveChannel:
    """Use the single receive antenna whose direction quantizes best.

    Scans all (antenna, codeword) pairs; gamma is a standard basis vector.
    Explicit codebooks only; the engine emulates this strategy separately.
    """
    if cb.mode != EXPLICIT:
        raise CodebookModeError("antenna_selection requires an explicit codebook")
    A = H.H
    norms = np.linalg.norm(A, axis=0)
    if np.any(norms == 0.0):
        raise ValidationError("cannot quantize the zero vector")
    inner = np.conj(cb.vectors) @ (A / norms)  # (C, N)
    cos2 = np.real(inner * np.conj(inner))
    best_per_col = np.max(cos2, axis=0)
    j = int(np.argmax(best_per_col))
    c = int(np.argmax(cos2[:, j]))
    quant = QuantizationResult(
        index=c,
        q_vector=cb.vectors[c],
        sin2_error=float(np.clip(1.0 - cos2[c, j], 0.0, 1.0)),
    )
    gamma = np.zeros(H.N, dtype=complex)
    gamma[j] = 1.0
    return _finish(ANTENNA_SELECTION, A, gamma, quant)


def mrc(H: ChannelMatrix, cb: Codebook) -> EffectiveChannel:
    """Maximize received power: feed back argmax ||H^H w||^2, combine with
    gamma = H^H w / ||H^H w||. Explicit codebooks only (no closed-form error
    law to emulate)."""
    if cb.mode != EXPLICIT:
        raise CodebookModeError("mrc requires an explicit codebook")
    A = H.H
    g = cb.vectors.conj() @ A  # (C, N) rows = w_c^H H
    power = np.sum(np.real(g * np.conj(g)), axis=1)
    c = int(np.argmax(power))
    w = cb.vectors[c]
    hw = A.conj().T @ w
    gamma = hw / np.linalg.norm(hw)
    eff = _finish(MRC, A, gamma, QuantizationResult(c, w, 0.0))
    ht = eff.h_eff / np.linalg.norm(eff.h_eff)
    sin2 = float(np.clip(1.0 - abs(np.vdot(ht, w)) ** 2, 0.0, 1.0))
    return EffectiveChannel(
        strategy=MRC,
        gamma=gamma,
        h_eff=eff.h_eff,
        quant=QuantizationResult(c, w, sin2),
        norm2=eff.norm2,
    )


def max_eig_combining(
    H: ChannelMatrix, cb: Codebook, rng: RandomStream = None
) -> EffectiveChannel:
    """Beamform onto the dominant right-singular direction of H, then
    quantize the resulting effective vector like a single-antenna channel."""
    A = H.H
    _, x = max_eigvec(A.conj().T @ A)
    gamma = x
    h_eff = A @ gamma
    quant = _quantize_direction(h_eff, cb, rng)
    return EffectiveChannel(
        strategy=MAX_EIGENVECTOR,
        gamma=gamma,
        h_eff=h_eff,
        quant=quant,
        norm2=float(np.real(np.vdot(h_eff, h_eff))),
    )


def no_combining(
    H: ChannelMatrix, cb: Codebook, rng: RandomStream = None
) -> EffectiveChannel:
    """Ignore all but the first receive antenna (the N=1 baseline)."""
    A = H.H
    gamma = np.zeros(H.N, dtype=complex)
    gamma[0] = 1.0
    h = A[:, 0]
    if np.linalg.norm(h) == 0.0:
        raise ValidationError("cannot quantize the zero vector")
    quant = _quantize_direction(h, cb, rng)
    return _finish(NONE, A, gamma, quant)


_DISPATCH = {
    QBC: qbc,
    ANTENNA_SELECTION: lambda H, cb, rng=None: antenna_selection(H, cb),
    MRC: lambda H, cb, rng=None: mrc(H, cb),
    MAX_EIGENVECTOR: max_eig_combining,
    NONE: no_combining,
}


def combine(
    H: ChannelMatrix, strategy: str, cb: Codebook, rng: RandomStream = None
) -> EffectiveChannel:
    """Apply a strategy by config name."""
    if strategy not in _DISPATCH:
        raise ValidationError(
            f"unknown combining strategy {strategy!r}; expected one of {STRATEGIES}"
        )
    return _DISPATCH[strategy](H, cb, rng)


def make_rx_estimate(
    H: ChannelMatrix, beta_pilot: float, P: float, rng: RandomStream
) -> RxEstimate:
    """MMSE estimate of H from a downlink pilot of power beta_pilot * P.

    G_hat = sqrt(bP)/(1+bP) * (sqrt(bP) H + E) with E iid unit complex
    Gaussian; the residual H - G_hat then has per-entry variance 1/(1+bP)
    and is uncorrelated with G_hat.
    """
    if beta_pilot < 1:
        raise ValidationError(f"pilot factor must be >= 1; got {beta_pilot}")
    if P <= 0:
        raise ValidationError(f"pilot power requires P > 0; got {P}")
    from .linalg import complex_gaussian

    bP = beta_pilot * P
    E = complex_gaussian(rng, H.H.shape)
    G_hat = (np.sqrt(bP) / (1.0 + bP)) * (np.sqrt(bP) * H.H + E)
    return RxEstimate(G_hat=G_hat, beta_pilot=float(beta_pilot), true_H=H)


def combine_with_estimate(
    est: RxEstimate, strategy: str, cb: Codebook, rng: RandomStream = None
) -> EffectiveChannel:
    """Run a strategy on the channel estimate, evaluate on the true channel.

    The combiner and fed-back direction come from G_hat; the effective
    channel the transmitter actually sees is true_H @ gamma.
    """
    ghat = ChannelMatrix.from_h(est.G_hat)
    picked = combine(ghat, strategy, cb, rng)
    A = est.true_H.H
    h_eff = A @ picked.gamma
    return EffectiveChannel(
        strategy=picked.strategy,
        gamma=picked.gamma,
        h_eff=h_eff,
        quant=picked.quant,
        norm2=float(np.real(np.vdot(h_eff, h_eff))),
    )
