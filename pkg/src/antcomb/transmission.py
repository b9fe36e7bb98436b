"""Transmitter side: zero-forcing beamforming, SINR and rate evaluation,
power allocation, and greedy user scheduling.

The transmitter only ever sees what mobiles report: a quantized direction
and an exact effective-channel norm. True effective channels enter only the
final SINR evaluation. Batched variants (suffix _batch) operate on stacked
trials and are the engine's hot path; the scalar ops are the reference
definitions and share the same arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .distributions import bd_sum_rate_offset
from .errors import SchedulingError, ValidationError

FEEDBACK = "feedback"
ZF_CSIT = "zf_csit"

SCHED_EQUAL = "none_equal_power"
SCHED_GREEDY = "greedy_waterfilling"
SCHEDULERS = (SCHED_EQUAL, SCHED_GREEDY)

ZF_COND_LIMIT = 1e10

__all__ = [
    "FEEDBACK",
    "ZF_CSIT",
    "SCHED_EQUAL",
    "SCHED_GREEDY",
    "SCHEDULERS",
    "ZF_COND_LIMIT",
    "BeamformerSet",
    "UserReport",
    "zf_beamformers",
    "sinr",
    "equal_power_round",
    "waterfilling",
    "waterfilling_batch",
    "greedy_user_selection",
    "greedy_select_batch",
    "zf_rates_batch",
    "bd_csit_reference",
]


@dataclass(frozen=True)
class BeamformerSet:
    """Unit beamforming vectors (rows) and transmit powers for the scheduled
    users, sum(powers) <= P. ``users`` maps rows back to report indices."""

    vectors: np.ndarray  # (K', M), unit rows
    powers: np.ndarray  # (K',)
    users: tuple


@dataclass(frozen=True)
class UserReport:
    """What one mobile feeds back: a unit direction (B bits' worth in the
    real system), the exact effective-channel norm, and the strategy tag."""

    user: int
    direction: np.ndarray  # unit M-vector
    norm: float  # ||h_eff||
    strategy: str


def zf_beamformers(dirs: Sequence[np.ndarray]) -> np.ndarray:
    """Zero-forcing beamformers for the given unit directions.

    Returns (K', M) unit rows with dirs[j]^H v_k = 0 for j != k exactly
    (pseudo-inverse construction; reduces to normalized inverse rows at
    K' = M). An ill-conditioned direction set (cond > 1e10) raises
    SchedulingError: the caller must drop a user.
    """
    D = np.stack([np.asarray(d, dtype=complex) for d in dirs], axis=1)  # (M, K')
    M, Kp = D.shape
    if not 1 <= Kp <= M:
        raise ValidationError(f"need 1 <= users <= {M}; got {Kp}")
    sv = np.linalg.svd(D, compute_uv=False)
    if sv[-1] <= 0 or sv[0] / sv[-1] > ZF_COND_LIMIT:
        raise SchedulingError(
            f"direction set condition number exceeds {ZF_COND_LIMIT:g}"
        )
    G = D.conj().T @ D
    V = D @ np.linalg.inv(G)  # columns: dirs^H V = I
    V = V / np.linalg.norm(V, axis=0, keepdims=True)
    return V.T


def sinr(h_eff: np.ndarray, k: int, bf: BeamformerSet, noise: float = 1.0) -> float:
    """SINR of scheduled user k (row index into bf):
    p_k |h^H v_k|^2 / (noise + sum_{j != k} p_j |h^H v_j|^2)."""
    cross = bf.vectors.conj() @ np.asarray(h_eff, dtype=complex)  # v_j^H h
    g = bf.powers * np.real(cross * np.conj(cross))
    sig = g[k]
    interf = float(np.sum(g)) - float(sig)
    return float(sig) / (noise + interf)


def _rates_from(dirs, h_effs, powers):
    bf = BeamformerSet(
        vectors=zf_beamformers(dirs),
        powers=np.asarray(powers, dtype=float),
        users=tuple(range(len(dirs))),
    )
    return np.array(
        [np.log2(1.0 + sinr(h, k, bf)) for k, h in enumerate(h_effs)]
    )


def equal_power_round(
    reports: Sequence[UserReport],
    h_effs: Sequence[np.ndarray],
    P: float,
    mode: str = FEEDBACK,
) -> np.ndarray:
    """One equal-power transmission slot over the first M users.

    mode "feedback": beamformers are zero-forced on the reported (quantized)
    directions; residual interference comes from quantization error alone.
    mode "zf_csit": beamformers are zero-forced on the true effective
    directions, so interference vanishes by construction.
    Rates are log2(1 + SINR) with the true effective channels either way.
    """
    if mode not in (FEEDBACK, ZF_CSIT):
        raise ValidationError(f"unknown transmission mode {mode!r}")
    M = np.asarray(h_effs[0]).shape[0]
    if len(reports) < M:
        raise ValidationError(f"equal-power slot needs at least M={M} users")
    reports = list(reports)[:M]
    h_effs = [np.asarray(h, dtype=complex) for h in h_effs][:M]
    if mode == ZF_CSIT:
        dirs = [h / np.linalg.norm(h) for h in h_effs]
    else:
        dirs = [r.direction for r in reports]
    return _rates_from(dirs, h_effs, np.full(M, P / M))


def waterfilling(gains: Sequence[float], P: float) -> np.ndarray:
    """Optimal power split for parallel channels: p_k = max(mu - 1/g_k, 0)
    with mu the exact water level (sorted-gain closed form), sum(p) = P."""
    g = np.asarray(gains, dtype=float)
    if g.size == 0:
        raise ValidationError("waterfilling needs at least one gain")
    if np.any(g <= 0) or not np.all(np.isfinite(g)):
        raise ValidationError("waterfilling gains must be positive and finite")
    return waterfilling_batch(g[None], float(P))[0]


def waterfilling_batch(g: np.ndarray, P: float) -> np.ndarray:
    """Vectorized exact waterfilling. g: (..., m) positive; returns powers of
    the same shape summing to P along the last axis."""
    inv = 1.0 / g
    order = np.argsort(inv, axis=-1, kind="stable")  # ascending 1/g
    inv_s = np.take_along_axis(inv, order, axis=-1)
    m = g.shape[-1]
    csum = np.cumsum(inv_s, axis=-1)
    counts = np.arange(1, m + 1, dtype=float)
    mu = (P + csum) / counts  # candidate water levels
    feasible = mu >= inv_s  # weakest included channel gets p >= 0
    # m=1 is always feasible; take the largest feasible candidate count
    last = m - 1 - np.argmax(feasible[..., ::-1], axis=-1)
    mu_star = np.take_along_axis(mu, last[..., None], axis=-1)
    p_sorted = np.clip(mu_star - inv_s, 0.0, None)
    p = np.empty_like(p_sorted)
    np.put_along_axis(p, order, p_sorted, axis=-1)
    return p


def greedy_user_selection(reports: Sequence[UserReport], P: float):
    """Greedy scheduling on reported directions with waterfilled powers.

    Grows the user set one at a time, each step adding the user that
    maximizes the estimated sum rate (post-ZF gains from reported norms and
    directions, quantization error unknown to the transmitter hence ignored)
    and stopping when no user improves it or M users are scheduled. Returns
    (selected report indices, BeamformerSet).
    """
    if len(reports) == 0:
        raise ValidationError("greedy selection needs at least one report")
    dirs = np.stack([r.direction for r in reports])  # (K, M)
    norms2 = np.array([r.norm**2 for r in reports])
    K, M = dirs.shape
    sel: list[int] = []
    best = 0.0
    while len(sel) < min(M, K):
        cand_best, cand_idx, cand_powers = -np.inf, -1, None
        for c in range(K):
            if c in sel:
                continue
            rows = dirs[sel + [c]]
            G = rows @ rows.conj().T
            ev = np.linalg.eigvalsh(G)
            if ev[0] <= 0 or ev[-1] / ev[0] > ZF_COND_LIMIT**2:
                continue  # near-collinear: treat as non-improving
            gains = norms2[sel + [c]] / np.real(np.diag(np.linalg.inv(G)))
            p = waterfilling_batch(gains[None], P)[0]
            est = float(np.sum(np.log2(1.0 + p * gains)))
            if est > cand_best:
                cand_best, cand_idx, cand_powers = est, c, p
        if cand_idx < 0 or cand_best <= best:
            break
        sel.append(cand_idx)
        best = cand_best
        powers = cand_powers
    if not sel:  # zero-gain corner: schedule user 0 at full power
        sel, powers = [0], np.array([P])
    vecs = zf_beamformers([reports[i].direction for i in sel])
    return tuple(sel), BeamformerSet(
        vectors=vecs, powers=powers, users=tuple(sel)
    )


def greedy_select_batch(dirs: np.ndarray, norms2: np.ndarray, P: float):
    """Vectorized greedy scheduling across stacked trials.

    dirs: (T, K, M) reported unit directions; norms2: (T, K).
    Returns (sel_idx, sel_count, powers): sel_idx (T, M) int (first
    sel_count[t] entries valid, selection order), powers (T, M) aligned with
    sel_idx. Same decision rule as greedy_user_selection, trial-parallel.
    """
    T, K, M = dirs.shape
    steps = min(M, K)
    sel_idx = np.zeros((T, steps), dtype=np.int64)
    powers = np.zeros((T, steps))
    sel_count = np.zeros(T, dtype=np.int64)
    taken = np.zeros((T, K), dtype=bool)
    best = np.zeros(T)
    active = np.ones(T, dtype=bool)
    for step in range(steps):
        if not active.any():
            break
        act = np.flatnonzero(active)
        Ta = act.size
        m = step + 1
        cand_est = np.full((Ta, K), -np.inf)
        cand_pow = np.zeros((Ta, K, m))
        base = sel_idx[act, :step]  # (Ta, step), selection so far
        for c in range(K):
            ok = ~taken[act, c]
            if not ok.any():
                continue
            rows_idx = np.concatenate(
                [base, np.full((Ta, 1), c, dtype=np.int64)], axis=1
            )  # (Ta, m)
            sub = act[ok]
            ridx = rows_idx[ok]
            rows = dirs[sub[:, None], ridx]  # (Tok, m, M)
            G = rows @ np.conj(np.swapaxes(rows, -1, -2))
            ev = np.linalg.eigvalsh(G)
            good = (ev[..., 0] > 0) & (
                ev[..., -1] <= ZF_COND_LIMIT**2 * ev[..., 0]
            )
            if not good.any():
                continue
            invG = np.linalg.inv(G[good])
            diag = np.real(np.diagonal(invG, axis1=-2, axis2=-1))
            gains = norms2[sub[good][:, None], ridx[good]] / diag
            p = waterfilling_batch(gains, P)
            est = np.sum(np.log2(1.0 + p * gains), axis=-1)
            rows_ok = np.flatnonzero(ok)[good]
            cand_est[rows_ok, c] = est
            cand_pow[rows_ok, c] = p
        pick = np.argmax(cand_est, axis=1)  # (Ta,)
        pick_est = cand_est[np.arange(Ta), pick]
        improve = pick_est > best[act]
        upd = act[improve]
        if upd.size:
            chosen = pick[improve]
            sel_idx[upd, step] = chosen
            powers[upd, :m] = cand_pow[np.flatnonzero(improve), chosen]
            taken[upd, chosen] = True
            best[upd] = pick_est[improve]
            sel_count[upd] = m
        active[act[~improve]] = False
    return sel_idx, sel_count, powers


def zf_rates_batch(
    dirs: np.ndarray, h_effs: np.ndarray, powers: np.ndarray
) -> np.ndarray:
    """Per-user rates for stacked trials under ZF beamforming.

    dirs: (T, m, M) unit direction rows the beamformers are forced on;
    h_effs: (T, m, M) true effective channels; powers: (T, m).
    Returns (T, m) rates log2(1 + SINR) with unit noise. No condition
    guard: callers on random continuous inputs hit singularity with
    probability zero and batch determinism must not depend on it.
    """
    D = np.swapaxes(dirs, -1, -2)  # (T, M, m) columns
    G = np.conj(np.swapaxes(D, -1, -2)) @ D
    V = D @ np.linalg.inv(G)
    V = V / np.linalg.norm(V, axis=-2, keepdims=True)
    cross = np.conj(h_effs) @ V  # (T, m, m): h_k^H v_j at [k, j]
    g = np.real(cross * np.conj(cross)) * powers[..., None, :]
    sig = np.diagonal(g, axis1=-2, axis2=-1)
    interf = np.sum(g, axis=-1) - sig
    return np.log2(1.0 + sig / (1.0 + interf))


def bd_csit_reference(M: int, N: int, zf_csit_rates: np.ndarray) -> np.ndarray:
    """Analytic block-diagonalization reference: the perfect-CSIT ZF sum-rate
    curve shifted up by the closed-form BD-vs-ZF sum-rate offset."""
    return np.asarray(zf_csit_rates, dtype=float) + bd_sum_rate_offset(M, N)
