"""Named scenario bundles for the standard comparison studies.

Each preset is a set of labeled scenarios sharing one master seed (common
random numbers across the curves being compared) plus, where meaningful,
analytic reference curves derived from a simulated one. Trial counts are
desk-scale defaults; override with --trials for quick looks.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from . import combining, transmission
from .distributions import bd_sum_rate_offset
from .errors import ValidationError
from .quantization import EMULATED, EXPLICIT
from .scenario import (
    FIXED,
    MODE_ZF_CSIT,
    SCALED,
    RateCurve,
    Scenario,
)

_SNR_STD = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0)
_SNR_WIDE = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)

__all__ = ["Preset", "PRESETS", "get_preset", "run_preset"]


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    scenarios: tuple  # ((label, Scenario), ...)
    # ((new_label, source_label, streams_per_user), ...) analytic BD refs;
    # the source is always the perfect-CSIT single-antenna curve
    bd_from: tuple = ()


def _zfcsit(M, N, K, snr, scheduler=transmission.SCHED_EQUAL):
    return Scenario(
        M=M, N=N, K=K, snr_db=snr, strategy=combining.QBC,
        scheduler=scheduler, mode=MODE_ZF_CSIT,
    )


def _fig3() -> Preset:
    scen = []
    for n in (1, 2, 3):
        scen.append((
            f"qbc-n{n}",
            Scenario(M=6, N=n, K=6, snr_db=_SNR_STD, feedback=SCALED,
                     feedback_value=2.0, strategy=combining.QBC,
                     codebook=EMULATED),
        ))
    for n in (1, 2, 3):
        scen.append((f"zfcsit-n{n}", _zfcsit(6, n, 6, _SNR_STD)))
    return Preset(
        name="fig3",
        description="Sum rate, 6 tx antennas serving 6 mobiles, feedback "
                    "scaled with SNR for a 1 bps/Hz per-user gap; 1-3 rx "
                    "antennas, with perfect-CSIT and BD references",
        scenarios=tuple(scen),
        bd_from=(("bd-n2", "zfcsit-n1", 2), ("bd-n3", "zfcsit-n1", 3)),
    )


def _fig4() -> Preset:
    scen = []
    for strat in (combining.QBC, combining.ANTENNA_SELECTION, combining.NONE):
        for b in (4, 8, 12, 16, 20):
            scen.append((
                f"{strat}-b{b}",
                Scenario(M=4, N=2, K=4, snr_db=(10.0,), feedback=FIXED,
                         feedback_value=float(b), strategy=strat,
                         codebook=EMULATED),
            ))
    # received-power selection has no emulated form; keep its codebooks small
    for b in (4, 8, 12):
        scen.append((
            f"mrc-b{b}",
            Scenario(M=4, N=2, K=4, snr_db=(10.0,), feedback=FIXED,
                     feedback_value=float(b), strategy=combining.MRC,
                     codebook=EXPLICIT),
        ))
    return Preset(
        name="fig4",
        description="Strategy comparison across codebook sizes at 10 dB "
                    "(4 tx, 2 rx, 4 mobiles): rate view of the quantization "
                    "error decay per strategy",
        scenarios=tuple(scen),
    )


def _fig5() -> Preset:
    base = dict(M=4, N=2, K=4, snr_db=_SNR_STD, feedback=SCALED,
                feedback_value=2.0, strategy=combining.QBC, codebook=EMULATED)
    scen = [
        ("beta1", Scenario(pilot_beta=1.0, **base)),
        ("beta2", Scenario(pilot_beta=2.0, **base)),
        ("perfect", Scenario(**base)),
        ("zfcsit", _zfcsit(4, 1, 4, _SNR_STD)),
    ]
    return Preset(
        name="fig5",
        description="Imperfect receiver estimation: pilot factors 1 and 2 "
                    "vs perfect estimation and perfect CSIT (4 tx, 2 rx, "
                    "4 mobiles, feedback scaled with SNR)",
        scenarios=tuple(scen),
    )


def _fig6() -> Preset:
    scen = []
    for strat in (combining.QBC, combining.MRC, combining.ANTENNA_SELECTION,
                  combining.MAX_EIGENVECTOR, combining.NONE):
        scen.append((
            strat,
            Scenario(M=4, N=2, K=4, snr_db=_SNR_WIDE, feedback=FIXED,
                     feedback_value=10.0, strategy=strat, codebook=EXPLICIT),
        ))
    # single-antenna mobiles with the same feedback budget, for reference
    scen.append((
        "single-n1",
        Scenario(M=4, N=1, K=4, snr_db=_SNR_WIDE, feedback=FIXED,
                 feedback_value=10.0, strategy=combining.NONE,
                 codebook=EXPLICIT),
    ))
    scen.append(("zfcsit", _zfcsit(4, 2, 4, _SNR_WIDE)))
    return Preset(
        name="fig6",
        description="Strategy comparison at fixed 10-bit feedback (4 tx, "
                    "2 rx, 4 mobiles): interference-limited flattening and "
                    "the low/high SNR crossover",
        scenarios=tuple(scen),
    )


def _fig7() -> Preset:
    scen = []
    for k in (4, 10, 20):
        for strat in (combining.QBC, combining.MRC,
                      combining.ANTENNA_SELECTION):
            scen.append((
                f"{strat}-k{k}",
                Scenario(M=4, N=2, K=k, snr_db=(10.0,), feedback=FIXED,
                         feedback_value=10.0, strategy=strat,
                         scheduler=transmission.SCHED_GREEDY,
                         codebook=EXPLICIT),
            ))
        # perfect-CSIT single-antenna downlink with the same selection pool
        scen.append((
            f"zfcsit-k{k}",
            _zfcsit(4, 1, k, (10.0,), scheduler=transmission.SCHED_GREEDY),
        ))
    return Preset(
        name="fig7",
        description="Greedy user selection at 10 dB with 10-bit feedback "
                    "(4 tx, 2 rx): candidate pools of 4, 10, 20 mobiles",
        scenarios=tuple(scen),
    )


def _fig8() -> Preset:
    scen = []
    for n, strat in ((1, combining.NONE), (2, combining.QBC)):
        for b in (10, 15, 20):
            for k in (5, 10, 20):
                scen.append((
                    f"n{n}-b{b}-k{k}",
                    Scenario(M=6, N=n, K=k, snr_db=(10.0,), feedback=FIXED,
                             feedback_value=float(b), strategy=strat,
                             scheduler=transmission.SCHED_GREEDY,
                             codebook=EMULATED),
                ))
    return Preset(
        name="fig8",
        description="Greedy user selection at 10 dB, 6 tx antennas, 1 or 2 "
                    "rx antennas, 10/15/20 feedback bits, candidate pools "
                    "of 5, 10, 20 mobiles",
        scenarios=tuple(scen),
    )


PRESETS = {p.name: p for p in (_fig3(), _fig4(), _fig5(), _fig6(), _fig7(),
                               _fig8())}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValidationError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        )


def _bd_curve(M: int, N: int, src: RateCurve) -> RateCurve:
    """Analytic block-diagonalization reference: the perfect-CSIT sum rate
    plus the fixed multiplexing-preserving offset for N streams per user."""
    offset = bd_sum_rate_offset(M, N)
    sums = tuple(r + offset for r in src.sum_rate)
    users = M // N  # N streams per scheduled mobile
    tag = hashlib.sha256(f"{src.scenario_hash}:bd{N}".encode()).hexdigest()[:12]
    return RateCurve(
        snr_db=src.snr_db,
        sum_rate=sums,
        per_user_rate=tuple(s / users for s in sums),
        stderr=src.stderr,
        trials=src.trials,
        scenario_hash=tag,
        version=src.version,
    )


def run_preset(name: str, seed: int | None = None, trials: int | None = None,
               workers: int = 1) -> dict:
    """Run every scenario in a bundle; returns {label: RateCurve}.

    seed/trials overrides apply uniformly. Derived analytic curves are
    appended after their source curves.
    """
    from .engine import run_scenario

    p = get_preset(name)
    out = {}
    for label, s in p.scenarios:
        if seed is not None:
            s = s.with_overrides(seed=seed)
        if trials is not None:
            s = s.with_overrides(trials=trials)
        out[label] = run_scenario(s, workers=workers)
    for new_label, src_label, streams in p.bd_from:
        src_scen = dict(p.scenarios)[src_label]
        out[new_label] = _bd_curve(src_scen.M, streams, out[src_label])
    return out
