"""Monte Carlo engine.

Determinism contract: (scenario, seed) fully determines every result byte,
independent of worker count. Randomness is drawn from counter-based streams
keyed by (purpose, snr index, batch index[, mobile index]) derived from the
master seed, batch boundaries are a pure function of the scenario, and the
reduction over batches happens in batch-index order. Workers only change who
computes a batch, never what it contains.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import combining, scenario as sc, transmission
from .distributions import (
    BetaParams,
    QuantErrorLaw,
    beta_cdf,
    chi2_2k_cdf,
    ks_statistic,
    min_beta_cdf,
)
from .errors import SchedulingError
from .linalg import (
    complex_gaussian,
    orthonormal_basis_batch,
    phase_fix,
    sample_channel_batch,
)
from .quantization import (
    EXPLICIT,
    emulate_quantization_batch,
    generate_rvq_batch,
    scan_best_codeword,
)
from .transmission import greedy_select_batch, waterfilling_batch, zf_rates_batch

# stream purposes (first spawn-key component)
CHANNEL = 0
CODEBOOK = 1
QUANT = 2
PILOT = 3

# memory budget for one explicit codebook batch: T * 2^B * M complex128
_EXPLICIT_BYTES = 2**28
_EMULATED_BATCH = 512

__all__ = [
    "run_scenario",
    "verify_lemmas",
    "scaling_table",
    "batch_sizes",
    "stream",
]


def stream(seed: int, purpose: int, snr_idx: int, batch_idx: int,
           mobile: int | None = None) -> np.random.Generator:
    """Counter-based generator for one (purpose, SNR point, batch[, mobile])."""
    key = (purpose, snr_idx, batch_idx) if mobile is None else (
        purpose, snr_idx, batch_idx, mobile)
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=key))
    )


def _batch_cap(s: sc.Scenario) -> int:
    if s.mode == sc.MODE_FEEDBACK and s.codebook == EXPLICIT:
        B = int(s.feedback_value)
        return max(1, min(256, _EXPLICIT_BYTES // (2**B * s.M * 16)))
    return _EMULATED_BATCH


def batch_sizes(s: sc.Scenario) -> list:
    """Deterministic batch partition of the trial count."""
    cap = _batch_cap(s)
    full, rem = divmod(s.trials, cap)
    return [cap] * full + ([rem] if rem else [])


def _norm2(v):  # squared norms along the last axis
    return np.real(np.sum(v * np.conj(v), axis=-1))


def _unit(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _solve_combiner(A, s_dir):
    """gamma solving A gamma ~ s_dir in the least-squares sense, normalized.

    A: (..., M, N); s_dir: (..., M) unit vectors in col(A).
    """
    Ah = np.conj(np.swapaxes(A, -1, -2))
    G = Ah @ A
    rhs = Ah @ s_dir[..., None]
    u = np.linalg.solve(G, rhs)[..., 0]
    return _unit(u)


def _one_hot(j, N):
    g = np.zeros(j.shape + (N,), dtype=complex)
    np.put_along_axis(g, j[..., None], 1.0, axis=-1)
    return g


def _take_column(A, j):
    # A: (T, M, N), j: (T,) -> (T, M)
    return np.take_along_axis(A, j[:, None, None], axis=2)[..., 0]


def _effective_channels(s: sc.Scenario, B: float, P: float, H: np.ndarray,
                        si: int, bi: int):
    """Per-mobile combining for one batch.

    H: (T, K, M, N) true channels. Returns (dirs, h_eff, norm2, sin2):
    reported unit directions (T, K, M), true effective channels (T, K, M),
    their squared norms, and quantization errors.
    """
    T, K, M, N = H.shape
    seed = int(s.seed)

    if s.mode == sc.MODE_ZF_CSIT:
        if s.strategy == combining.QBC:
            Q = orthonormal_basis_batch(H)
            g = complex_gaussian(stream(seed, QUANT, si, bi), (T, K, N))
            u = _unit((Q @ g[..., None])[..., 0])
            gamma = _solve_combiner(H, u)
        elif s.strategy == combining.MAX_EIGENVECTOR:
            W = np.conj(np.swapaxes(H, -1, -2)) @ H
            _, vecs = np.linalg.eigh(W)
            gamma = phase_fix(vecs[..., :, -1])
        else:  # none
            gamma = np.broadcast_to(_one_hot(np.zeros((T, K), np.int64), N),
                                    (T, K, N))
        h_eff = (H @ gamma[..., None])[..., 0]
        dirs = phase_fix(_unit(h_eff))
        return dirs, h_eff, _norm2(h_eff), np.zeros((T, K))

    # CSI source: the true channel, or its MMSE estimate from a pilot round
    if math.isinf(s.pilot_beta):
        A = H
    else:
        bP = s.pilot_beta * P
        E = complex_gaussian(stream(seed, PILOT, si, bi), H.shape)
        A = (np.sqrt(bP) / (1.0 + bP)) * (np.sqrt(bP) * H + E)

    strat = s.strategy
    explicit = s.codebook == EXPLICIT
    dirs = np.empty((T, K, M), dtype=complex)
    sin2 = np.empty((T, K))
    gamma = np.empty((T, K, N), dtype=complex)
    h_eff = np.empty((T, K, M), dtype=complex)

    if strat == combining.QBC:
        QA = orthonormal_basis_batch(A)
        for k in range(K):
            if explicit:
                cb = generate_rvq_batch(M, int(B), T,
                                        stream(seed, CODEBOOK, si, bi, k))
                idx, cos2 = scan_best_codeword(cb, QA[:, k])
                hhat = np.take_along_axis(cb, idx[:, None, None], axis=1)[:, 0]
                Qk = QA[:, k]
                p = (Qk @ (np.conj(np.swapaxes(Qk, -1, -2)) @ hhat[..., None]))[..., 0]
                s_dir = phase_fix(_unit(p))
                sin2[:, k] = np.clip(1.0 - cos2, 0.0, 1.0)
            else:
                hhat, Z, u = emulate_quantization_batch(
                    QA[:, k], BetaParams(M - N, N), B,
                    stream(seed, QUANT, si, bi, k))
                s_dir = phase_fix(u)
                sin2[:, k] = Z
            dirs[:, k] = hhat
            gamma[:, k] = _solve_combiner(A[:, k], s_dir)
            h_eff[:, k] = (H[:, k] @ gamma[:, k, :, None])[..., 0]
    elif strat == combining.ANTENNA_SELECTION:
        for k in range(K):
            Ak = A[:, k]
            if explicit:
                cb = generate_rvq_batch(M, int(B), T,
                                        stream(seed, CODEBOOK, si, bi, k))
                An = Ak / np.linalg.norm(Ak, axis=1, keepdims=True)
                inner = np.conj(cb) @ An  # (T, C, N)
                cos2 = np.real(inner * np.conj(inner))
                best = np.max(cos2, axis=1)  # (T, N) best over codewords
                j = np.argmax(best, axis=1)
                c = np.argmax(np.take_along_axis(
                    cos2, j[:, None, None], axis=2)[..., 0], axis=1)
                dirs[:, k] = np.take_along_axis(cb, c[:, None, None], axis=1)[:, 0]
                sin2[:, k] = np.clip(
                    1.0 - np.take_along_axis(best, j[:, None], axis=1)[:, 0],
                    0.0, 1.0)
            else:
                rng = stream(seed, QUANT, si, bi, k)
                j = rng.integers(0, N, size=T)
                col = _unit(_take_column(Ak, j))
                # a selected antenna behaves like one vector quantized with
                # N * 2^B codewords; the winning antenna index is uniform
                hhat, Z, _ = emulate_quantization_batch(
                    col[..., None], BetaParams(M - 1, 1),
                    B + math.log2(N), rng)
                dirs[:, k] = hhat
                sin2[:, k] = Z
            gamma[:, k] = _one_hot(j, N)
            h_eff[:, k] = _take_column(H[:, k], j)
    elif strat == combining.MRC:
        for k in range(K):
            Ak = A[:, k]
            cb = generate_rvq_batch(M, int(B), T,
                                    stream(seed, CODEBOOK, si, bi, k))
            idx, _ = scan_best_codeword(cb, Ak)
            w = np.take_along_axis(cb, idx[:, None, None], axis=1)[:, 0]
            hw = (np.conj(np.swapaxes(Ak, -1, -2)) @ w[..., None])[..., 0]
            gamma[:, k] = _unit(hw)
            h_eff[:, k] = (H[:, k] @ gamma[:, k, :, None])[..., 0]
            ht = _unit(h_eff[:, k])
            dot = np.sum(np.conj(ht) * w, axis=-1)
            sin2[:, k] = np.clip(1.0 - np.real(dot * np.conj(dot)), 0.0, 1.0)
            dirs[:, k] = w
    else:  # max_eigenvector / none: combine first, then quantize a vector
        if strat == combining.MAX_EIGENVECTOR:
            W = np.conj(np.swapaxes(A, -1, -2)) @ A
            _, vecs = np.linalg.eigh(W)
            gamma = phase_fix(vecs[..., :, -1])
        else:
            gamma = np.broadcast_to(_one_hot(np.zeros((T, K), np.int64), N),
                                    (T, K, N)).copy()
        v_eff = (A @ gamma[..., None])[..., 0]  # estimated effective vector
        vt = _unit(v_eff)
        for k in range(K):
            if explicit:
                cb = generate_rvq_batch(M, int(B), T,
                                        stream(seed, CODEBOOK, si, bi, k))
                idx, cos2 = scan_best_codeword(cb, vt[:, k][..., None])
                dirs[:, k] = np.take_along_axis(cb, idx[:, None, None], axis=1)[:, 0]
                sin2[:, k] = np.clip(1.0 - cos2, 0.0, 1.0)
            else:
                hhat, Z, _ = emulate_quantization_batch(
                    vt[:, k][..., None], BetaParams(M - 1, 1), B,
                    stream(seed, QUANT, si, bi, k))
                dirs[:, k] = hhat
                sin2[:, k] = Z
        h_eff = (H @ gamma[..., None])[..., 0]

    return dirs, h_eff, _norm2(h_eff), sin2


def _guard_equal_power(D_rows):
    """Reject singular zero-forcing sets (duplicated quantized directions at
    tiny codebook sizes); scheduling errors must surface, not poison means."""
    G = D_rows @ np.conj(np.swapaxes(D_rows, -1, -2))
    ev = np.linalg.eigvalsh(G)
    bad = (ev[..., 0] <= 0) | (ev[..., -1] > transmission.ZF_COND_LIMIT**2 * ev[..., 0])
    if bad.any():
        raise SchedulingError(
            f"zero-forcing direction set near-singular in {int(bad.sum())} "
            f"trial(s); increase B or use user selection"
        )


@dataclass
class _Acc:
    n: int = 0
    sum_rate: float = 0.0
    sum_rate_sq: float = 0.0
    per_user: float = 0.0

    def add(self, other: "_Acc"):
        self.n += other.n
        self.sum_rate += other.sum_rate
        self.sum_rate_sq += other.sum_rate_sq
        self.per_user += other.per_user


def _run_batch(s: sc.Scenario, si: int, bi: int, size: int) -> _Acc:
    snr = s.snr_db[si]
    P = 10.0 ** (snr / 10.0)
    B = 0.0 if s.mode == sc.MODE_ZF_CSIT else s.bits_at(snr)
    H = sample_channel_batch(stream(int(s.seed), CHANNEL, si, bi),
                             (size, s.K, s.M, s.N))
    dirs, h_eff, norm2, _ = _effective_channels(s, B, P, H, si, bi)

    if s.scheduler == transmission.SCHED_EQUAL:
        m = s.M
        d = dirs[:, :m]
        _guard_equal_power(d)
        rates = zf_rates_batch(d, h_eff[:, :m], np.full((size, m), P / m))
        tot = np.sum(rates, axis=1)
        per_user = tot / m
    else:
        sel_idx, sel_count, powers = greedy_select_batch(dirs, norm2, P)
        tot = np.zeros(size)
        per_user = np.zeros(size)
        for m in range(1, sel_idx.shape[1] + 1):
            t = np.flatnonzero(sel_count == m)
            if t.size == 0:
                continue
            rows = sel_idx[t, :m]
            d = dirs[t[:, None], rows]
            h = h_eff[t[:, None], rows]
            r = zf_rates_batch(d, h, powers[t, :m])
            tot[t] = np.sum(r, axis=1)
            per_user[t] = tot[t] / m
    return _Acc(
        n=size,
        sum_rate=float(np.sum(tot)),
        sum_rate_sq=float(np.sum(tot * tot)),
        per_user=float(np.sum(per_user)),
    )


def run_scenario(s: sc.Scenario, workers: int = 1) -> sc.RateCurve:
    """Monte Carlo rate curve for a scenario.

    Byte-identical output for any worker count: tasks are (SNR point, batch)
    pairs with self-contained random streams, reduced in index order.
    """
    sizes = batch_sizes(s)
    tasks = [(si, bi, sz) for si in range(len(s.snr_db))
             for bi, sz in enumerate(sizes)]

    def one(task):
        si, bi, sz = task
        return si, _run_batch(s, si, bi, sz)

    accs = [_Acc() for _ in s.snr_db]
    if workers <= 1:
        results = map(one, tasks)
    else:
        pool = ThreadPoolExecutor(max_workers=workers)
        try:
            results = list(pool.map(one, tasks))
        finally:
            pool.shutdown(wait=True)
    for si, acc in results:  # map() preserves task order: batch-index order
        accs[si].add(acc)

    sum_rate, per_user, stderr, trials = [], [], [], []
    for acc in accs:
        n = acc.n
        mean = acc.sum_rate / n
        sum_rate.append(mean)
        per_user.append(acc.per_user / n)
        if n >= 2:
            var = max(acc.sum_rate_sq - acc.sum_rate**2 / n, 0.0) / (n - 1)
            stderr.append(math.sqrt(var / n))
        else:
            stderr.append(0.0)
        trials.append(n)
    return sc.RateCurve(
        snr_db=s.snr_db,
        sum_rate=tuple(sum_rate),
        per_user_rate=tuple(per_user),
        stderr=tuple(stderr),
        trials=tuple(trials),
        scenario_hash=s.hash,
    )


def verify_lemmas(M: int, N: int, B: int, trials: int = 100_000,
                  seed: int = sc.DEFAULT_SEED, workers: int = 1,
                  threshold: float = 0.015) -> sc.LemmaReport:
    """KS check of the three closed-form effective-channel laws under
    explicit-codebook combining: the quantization error is the minimum of
    2^B iid beta(M-N, N) draws, the squared norm is chi-square with
    2(M-N+1) real degrees of freedom (mean M-N+1), and the normalized
    effective direction is isotropic (squared projection on a fixed vector
    is beta(1, M-1))."""
    s = sc.Scenario(
        M=M, N=N, K=1, snr_db=(0.0,), feedback=sc.FIXED, feedback_value=float(B),
        strategy=combining.QBC, scheduler=transmission.SCHED_GREEDY,
        codebook=EXPLICIT, trials=trials, seed=seed,
    )
    sizes = batch_sizes(s)

    def one(task):
        bi, sz = task
        H = sample_channel_batch(stream(int(s.seed), CHANNEL, 0, bi),
                                 (sz, 1, M, N))
        dirs, h_eff, norm2, sin2 = _effective_channels(s, float(B), 1.0, H, 0, bi)
        ht = _unit(h_eff[:, 0])
        proj = np.real(ht[:, 0] * np.conj(ht[:, 0]))  # |<h~, e_1>|^2
        return bi, sin2[:, 0], norm2[:, 0], proj

    tasks = list(enumerate(sizes))
    if workers <= 1:
        results = list(map(one, tasks))
    else:
        pool = ThreadPoolExecutor(max_workers=workers)
        try:
            results = list(pool.map(one, tasks))
        finally:
            pool.shutdown(wait=True)
    results.sort(key=lambda r: r[0])
    err = np.concatenate([r[1] for r in results])
    nrm = np.concatenate([r[2] for r in results])
    prj = np.concatenate([r[3] for r in results])

    law = QuantErrorLaw(beta=BetaParams(M - N, N), log2_codebook_size=float(B))
    d_err = ks_statistic(np.sort(err), lambda z: min_beta_cdf(z, law))
    d_nrm = ks_statistic(np.sort(nrm), lambda x: chi2_2k_cdf(x, M - N + 1))
    d_prj = ks_statistic(np.sort(prj),
                         lambda x: beta_cdf(x, BetaParams(1, M - 1)))
    return sc.LemmaReport(
        M=M, N=N, B=int(B), trials=trials, seed=seed,
        d_error=float(d_err), d_norm=float(d_nrm), d_direction=float(d_prj),
        threshold=threshold,
        passed=bool(d_err < threshold and d_nrm < threshold and d_prj < threshold),
    )


def scaling_table(M: int, n_list, b_gap: float, snr_db) -> sc.ScalingTable:
    """Closed-form feedback requirements; see scenario.build_scaling_table."""
    return sc.build_scaling_table(M, n_list, b_gap, snr_db)
