"""Complex dense linear algebra and sampling primitives.

Conventions used throughout the package:

* A channel matrix ``H`` is M x N complex (M transmit antennas, N receive
  antennas, N < M); its columns are the per-receive-antenna channel vectors.
* Channel entries are iid circularly-symmetric complex Gaussian with unit
  per-entry variance (real and imaginary parts each carry variance 1/2), so
  E||column||^2 = M.
* Any unit vector synthesized by an operation is phase-normalized so that its
  largest-magnitude entry is real and nonnegative (makes results reproducible;
  every angle/SINR quantity downstream is phase invariant).

All operations are pure functions; random sampling takes an explicit numpy
``Generator`` so that callers control stream derivation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateChannelError,
    NonHermitianError,
    NotInSpanError,
    UnsupportedConfigurationError,
)

# numpy Generator is the random stream type everywhere in this package
RandomStream = np.random.Generator

COND_LIMIT = 1e12

__all__ = [
    "RandomStream",
    "ChannelMatrix",
    "phase_fix",
    "complex_gaussian",
    "sample_channel",
    "sample_channel_batch",
    "orthonormal_basis",
    "orthonormal_basis_batch",
    "complement_basis_batch",
    "project_onto_span",
    "pseudo_inverse_apply",
    "max_eigvec",
]


def phase_fix(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` (shape (..., M)) by a unit phase so the largest-magnitude
    entry of each vector is real and nonnegative. Zero vectors pass through."""
    v = np.asarray(v)
    mag = np.abs(v)
    idx = np.argmax(mag, axis=-1)
    pivot = np.take_along_axis(v, idx[..., None], axis=-1)
    amp = np.abs(pivot)
    # avoid 0/0 for zero vectors; phase 1 leaves them untouched
    phase = np.where(amp > 0, pivot / np.where(amp > 0, amp, 1.0), 1.0)
    return v * np.conj(phase)


def complex_gaussian(rng: RandomStream, shape) -> np.ndarray:
    """iid CN(0,1) array: unit per-entry variance split across re/im parts."""
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) / np.sqrt(2.0)


@dataclass(frozen=True)
class ChannelMatrix:
    """One mobile's M x N channel together with a cached orthonormal basis.

    Attributes
    ----------
    H : ndarray, shape (M, N)
        Channel matrix; columns are receive-antenna channel vectors.
    Q : ndarray, shape (M, N)
        Orthonormal columns spanning col(H): Q^H Q = I and
        (I - Q Q^H) H = 0 to within 1e-10.
    """

    H: np.ndarray
    Q: np.ndarray

    @property
    def M(self) -> int:
        return self.H.shape[0]

    @property
    def N(self) -> int:
        return self.H.shape[1]

    @classmethod
    def from_h(cls, H: np.ndarray) -> "ChannelMatrix":
        H = np.asarray(H, dtype=complex)
        if H.ndim != 2:
            raise UnsupportedConfigurationError("channel matrix must be 2-D (M x N)")
        M, N = H.shape
        if not 1 <= N < M:
            raise UnsupportedConfigurationError(
                f"need 1 <= N < M for combining; got M={M}, N={N}"
            )
        return cls(H=H, Q=orthonormal_basis(H))


def sample_channel(M: int, N: int, rng: RandomStream) -> ChannelMatrix:
    """Draw an iid Rayleigh-fading channel and cache its orthonormal basis.

    Parameters
    ----------
    M, N : int
        Transmit / receive antenna counts; requires 1 <= N < M.
    rng : numpy Generator
        Private stream of the caller (one per trial).
    """
    if not 1 <= N < M:
        raise UnsupportedConfigurationError(
            f"need 1 <= N < M for combining; got M={M}, N={N}"
        )
    return ChannelMatrix.from_h(complex_gaussian(rng, (M, N)))


def sample_channel_batch(rng: RandomStream, shape) -> np.ndarray:
    """Batched channel draw, shape (..., M, N); no basis attached (engine use)."""
    return complex_gaussian(rng, shape)


def _qr_positive(H: np.ndarray):
    """Reduced QR with the R diagonal rotated real-positive (column phases of Q
    absorb the rotation), so the basis is deterministic across LAPACK builds."""
    Q, R = np.linalg.qr(H)
    d = np.diagonal(R, axis1=-2, axis2=-1).copy()
    mag = np.abs(d)
    safe = np.where(mag > 0, mag, 1.0)
    ph = np.where(mag > 0, d / safe, 1.0)
    return Q * ph[..., None, :], R, mag


def orthonormal_basis(H: np.ndarray) -> np.ndarray:
    """Householder-QR orthonormal basis of col(H).

    Parameters
    ----------
    H : ndarray, shape (M, N), N <= M, full column rank.

    Returns
    -------
    Q : ndarray, shape (M, N) with Q^H Q = I and col(Q) = col(H).

    Raises
    ------
    DegenerateChannelError
        if H is rank deficient (condition number above 1e12).
    """
    H = np.asarray(H, dtype=complex)
    s = np.linalg.svd(H, compute_uv=False)
    if s[-1] == 0.0 or s[0] / s[-1] > COND_LIMIT:
        raise DegenerateChannelError(
            f"channel matrix is rank deficient (condition number > {COND_LIMIT:g})"
        )
    Q, _, _ = _qr_positive(H)
    return Q


def orthonormal_basis_batch(H: np.ndarray) -> np.ndarray:
    """Batched basis for sampled channels, shape (..., M, N).

    Skips the rank guard: continuously sampled matrices are full rank with
    probability one; the guard exists for user-supplied inputs via
    :func:`orthonormal_basis`.
    """
    Q, _, _ = _qr_positive(H)
    return Q


def complement_basis_batch(Q: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of col(Q).

    Q has shape (..., M, N) with orthonormal columns; returns (..., M, M-N).
    """
    Q = np.asarray(Q)
    M = Q.shape[-2]
    full, _ = np.linalg.qr(Q, mode="complete")
    Qc = full[..., :, Q.shape[-1]:]
    # re-orthogonalize against Q explicitly; complete-mode QR already gives an
    # orthonormal complement, this only scrubs last-bit drift
    proj = Q @ (np.swapaxes(Q, -2, -1).conj() @ Qc)
    Qc = Qc - proj
    norms = np.linalg.norm(Qc, axis=-2, keepdims=True)
    return Qc / norms if M > Q.shape[-1] else Qc


def project_onto_span(w: np.ndarray, Q: np.ndarray):
    """Project a unit vector onto the subspace spanned by the columns of Q.

    Returns
    -------
    p : ndarray
        Q Q^H w, the projection of w.
    cos2 : float
        ||Q^H w||^2, the squared cosine of the angle between w and col(Q);
        the squared sine is 1 - cos2.
    """
    w = np.asarray(w, dtype=complex)
    coeff = Q.conj().T @ w
    p = Q @ coeff
    cos2 = float(np.real(np.vdot(coeff, coeff)))
    return p, cos2


def pseudo_inverse_apply(H: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Solve H u = s for s in col(H): u = (H^H H)^{-1} H^H s.

    Raises
    ------
    DegenerateChannelError
        if H^H H has condition number above 1e12.
    NotInSpanError
        if the residual ||H u - s|| exceeds 1e-8 (s not in the column span).
    """
    H = np.asarray(H, dtype=complex)
    s = np.asarray(s, dtype=complex)
    G = H.conj().T @ H
    ev = np.linalg.eigvalsh(G)
    if ev[0] <= 0.0 or ev[-1] / ev[0] > COND_LIMIT:
        raise DegenerateChannelError(
            f"H^H H is ill conditioned (condition number > {COND_LIMIT:g})"
        )
    u = np.linalg.solve(G, H.conj().T @ s)
    resid = np.linalg.norm(H @ u - s)
    if resid > 1e-8 * max(1.0, float(np.linalg.norm(s))):
        raise NotInSpanError(
            f"vector is not in col(H): residual {resid:.3e} exceeds 1e-8"
        )
    return u


def max_eigvec(A: np.ndarray):
    """Largest eigenpair of a Hermitian PSD matrix.

    Returns ``(lam, x)`` with A x = lam x, ||x|| = 1, phase-fixed. When the top
    eigenvalue is degenerate (ties within 1e-10 relative), the returned vector
    is the normalized projection of the lowest-index standard basis vector
    onto the top eigenspace, which is deterministic across platforms.

    Raises
    ------
    NonHermitianError
        if max|A - A^H| exceeds 1e-10.
    """
    A = np.asarray(A, dtype=complex)
    asym = float(np.max(np.abs(A - A.conj().T)))
    if asym > 1e-10:
        raise NonHermitianError(f"matrix asymmetry {asym:.3e} exceeds 1e-10")
    vals, vecs = np.linalg.eigh(A)
    lam = float(vals[-1])
    tol = 1e-10 * max(1.0, abs(lam))
    top = vals >= lam - tol
    if int(np.sum(top)) == 1:
        return lam, phase_fix(vecs[:, -1])
    basis = vecs[:, top]  # orthonormal basis of the top eigenspace
    for j in range(A.shape[0]):
        proj = basis @ basis.conj().T[:, j]
        nrm = np.linalg.norm(proj)
        if nrm > 1e-8:
            return lam, phase_fix(proj / nrm)
    # unreachable: an orthonormal basis cannot be orthogonal to every e_j
    return lam, phase_fix(vecs[:, -1])
