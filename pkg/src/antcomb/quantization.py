"""Channel-direction quantization.

Two interchangeable modes:

* Explicit: materialize a random codebook of 2^B iid isotropic unit vectors
  and scan it (one matrix product per mobile). Capped at B <= 22 by memory.
* Emulated: draw the quantization error Z from its exact law (minimum of 2^B
  iid beta variables) and synthesize a codeword at that angle from the
  subspace; statistically exchangeable with the explicit mode and valid for
  any B, including fractional. Not available for received-power (MRC)
  selection, whose error law has no closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import BetaParams, beta_inverse_cdf
from .errors import CodebookModeError, CodebookSizeError, ValidationError
from .linalg import (
    RandomStream,
    complement_basis_batch,
    complex_gaussian,
    phase_fix,
)

B_MAX_EXPLICIT = 22

EXPLICIT = "explicit"
EMULATED = "emulated"

__all__ = [
    "B_MAX_EXPLICIT",
    "EXPLICIT",
    "EMULATED",
    "Codebook",
    "QuantizationResult",
    "generate_rvq",
    "generate_rvq_batch",
    "quantize_vector",
    "quantize_subspace",
    "emulate_subspace_quantization",
    "emulate_quantization_batch",
    "isotropic_in_subspace",
    "scan_best_codeword",
]


@dataclass(frozen=True)
class Codebook:
    """Quantization codebook.

    mode "explicit" stores ``vectors`` with shape (2^B, M), unit rows;
    mode "emulated" stores no vectors and permits arbitrary (even fractional)
    B, carrying only the error-law parameters.
    """

    mode: str
    M: int
    B: float
    vectors: np.ndarray | None = None

    @classmethod
    def emulated(cls, M: int, B: float) -> "Codebook":
        if B < 0:
            raise ValidationError(f"codebook bits B must be >= 0; got {B}")
        return cls(mode=EMULATED, M=M, B=float(B), vectors=None)

    @property
    def size(self) -> int:
        if self.mode != EXPLICIT:
            raise CodebookModeError("emulated codebooks have no materialized size")
        return self.vectors.shape[0]


@dataclass(frozen=True)
class QuantizationResult:
    """Outcome of quantizing one vector or subspace.

    ``index`` is the codebook row for explicit mode and -1 (synthetic) for
    emulated mode, where only ``q_vector`` is meaningful. ``sin2_error`` is
    the squared sine of the angle between ``q_vector`` and the quantized
    object (vector or subspace).
    """

    index: int
    q_vector: np.ndarray
    sin2_error: float


def generate_rvq(M: int, B: int, rng: RandomStream) -> Codebook:
    """Explicit random codebook: 2^B iid isotropic unit vectors in C^M.

    Each mobile must use its own stream (independent codebooks). B above
    B_MAX_EXPLICIT (22) is rejected; use an emulated codebook instead.
    """
    if B != int(B) or B < 0:
        raise ValidationError(f"explicit codebook needs integer B >= 0; got {B}")
    B = int(B)
    if B > B_MAX_EXPLICIT:
        raise CodebookSizeError(
            f"B={B} exceeds the explicit-codebook cap of {B_MAX_EXPLICIT} "
            f"(2^{B} vectors); use the emulated mode"
        )
    vecs = generate_rvq_batch(M, B, None, rng)
    return Codebook(mode=EXPLICIT, M=M, B=float(B), vectors=vecs)


def generate_rvq_batch(M: int, B: int, batch, rng: RandomStream) -> np.ndarray:
    """Raw codebook array draw: shape (2^B, M), or (batch, 2^B, M)."""
    shape = (2**B, M) if batch is None else (batch, 2**B, M)
    g = complex_gaussian(rng, shape)
    return g / np.linalg.norm(g, axis=-1, keepdims=True)


def scan_best_codeword(vectors: np.ndarray, A: np.ndarray):
    """Best codeword against the columns of A by total squared inner product.

    vectors: (..., C, M) codebook rows; A: (..., M, N) target columns.
    Returns (idx, val) with idx = argmax_c sum_n |w_c^H a_n|^2 (first/lowest
    index on ties) and val the attained maximum. With orthonormal A this is
    the squared cosine to the subspace; with A a single unit column it is the
    squared cosine to that vector; with A a raw channel it is received power.
    """
    inner = np.conj(vectors) @ A  # (..., C, N)
    tot = np.sum(np.real(inner * np.conj(inner)), axis=-1)  # (..., C)
    idx = np.argmax(tot, axis=-1)
    val = np.take_along_axis(tot, idx[..., None], axis=-1)[..., 0]
    return idx, val


def quantize_vector(h: np.ndarray, cb: Codebook) -> QuantizationResult:
    """Pick the codeword with the smallest angle to the vector h.

    sin^2 error = 1 - |h~^H w|^2 with h~ the normalized h; ties resolve to
    the lowest index. Explicit codebooks only.
    """
    if cb.mode != EXPLICIT:
        raise CodebookModeError("quantize_vector requires an explicit codebook")
    h = np.asarray(h, dtype=complex)
    nrm = np.linalg.norm(h)
    if nrm == 0.0:
        raise ValidationError("cannot quantize the zero vector")
    idx, cos2 = scan_best_codeword(cb.vectors, (h / nrm)[:, None])
    idx = int(idx)
    return QuantizationResult(
        index=idx,
        q_vector=cb.vectors[idx],
        sin2_error=float(np.clip(1.0 - cos2, 0.0, 1.0)),
    )


def quantize_subspace(Q: np.ndarray, cb: Codebook) -> QuantizationResult:
    """Pick the codeword closest to the subspace spanned by the columns of Q
    (argmax ||Q^H w||^2); sin^2 error = 1 - ||Q^H w||^2. Explicit only."""
    if cb.mode != EXPLICIT:
        raise CodebookModeError("quantize_subspace requires an explicit codebook")
    Q = np.asarray(Q, dtype=complex)
    idx, cos2 = scan_best_codeword(cb.vectors, Q)
    idx = int(idx)
    return QuantizationResult(
        index=idx,
        q_vector=cb.vectors[idx],
        sin2_error=float(np.clip(1.0 - cos2, 0.0, 1.0)),
    )


def isotropic_in_subspace(Q: np.ndarray, rng: RandomStream) -> np.ndarray:
    """Isotropic unit vector in the span of the (orthonormal) columns of Q,
    phase-fixed. Q of shape (M, d), d >= 1."""
    Q = np.asarray(Q, dtype=complex)
    if Q.ndim != 2 or Q.shape[1] < 1:
        raise ValidationError("subspace basis must be M x d with d >= 1")
    g = complex_gaussian(rng, (Q.shape[1],))
    v = Q @ g
    return phase_fix(v / np.linalg.norm(v))


def emulate_quantization_batch(
    Q: np.ndarray,
    beta_params: BetaParams,
    log2_size: float,
    rng: RandomStream,
):
    """Batched statistical emulation of codebook quantization.

    Q: (..., M, N) orthonormal bases. Draw order is fixed (error uniforms,
    in-span Gaussians, out-of-span Gaussians) so a stream reproduces exactly.

    Returns (hhat, Z, u): hhat of shape (..., M) with
    hhat = sqrt(1-Z) u + sqrt(Z) s, u isotropic in col(Q), s isotropic in its
    orthogonal complement, Z ~ min of 2^log2_size iid beta(beta_params).
    u is returned separately because it equals the normalized projection of
    hhat onto col(Q) exactly, which downstream combining reuses.
    """
    Q = np.asarray(Q, dtype=complex)
    lead = Q.shape[:-2]
    M, N = Q.shape[-2], Q.shape[-1]
    if N >= M:
        raise ValidationError(f"emulation needs subspace dim < M; got {N} >= {M}")
    U = rng.random(lead)
    with np.errstate(divide="ignore"):
        qq = -np.expm1(2.0 ** (-log2_size) * np.log1p(-U))
    Z = beta_inverse_cdf(np.atleast_1d(qq), beta_params).reshape(lead)
    g_in = complex_gaussian(rng, lead + (N,))
    u = (Q @ g_in[..., None])[..., 0]
    u = u / np.linalg.norm(u, axis=-1, keepdims=True)
    Qc = complement_basis_batch(Q)
    g_out = complex_gaussian(rng, lead + (M - N,))
    s = (Qc @ g_out[..., None])[..., 0]
    s = s / np.linalg.norm(s, axis=-1, keepdims=True)
    hhat = np.sqrt(1.0 - Z)[..., None] * u + np.sqrt(Z)[..., None] * s
    return phase_fix(hhat), Z, u


def emulate_subspace_quantization(
    Q: np.ndarray, B: float, rng: RandomStream
) -> QuantizationResult:
    """Statistically exact stand-in for quantize_subspace at arbitrary B.

    The returned index is synthetic (-1); consumers must use q_vector. The
    error satisfies 1 - ||Q^H q_vector||^2 = sin2_error by construction.
    """
    Q = np.asarray(Q, dtype=complex)
    M, N = Q.shape
    hhat, Z, _ = emulate_quantization_batch(
        Q[None], BetaParams(M - N, N), float(B), rng
    )
    return QuantizationResult(index=-1, q_vector=hhat[0], sin2_error=float(Z[0]))
