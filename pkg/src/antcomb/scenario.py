"""Experiment descriptions, result containers, and structured output.

A Scenario pins everything a run depends on: dimensions, SNR grid, feedback
rule, combining strategy, scheduler, codebook mode, pilot quality, trial
count, and seed. Validation is strict (unknown config keys are errors) and
every violated invariant is named. Results carry a short content hash of the
scenario so emitted files are traceable to their configuration.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field, fields, replace
from typing import Sequence

import numpy as np

from . import combining, transmission
from .distributions import ScalingInputs, feedback_scaling
from .errors import (
    CodebookModeError,
    CodebookSizeError,
    EmitError,
    UnsupportedConfigurationError,
    ValidationError,
)
from .quantization import B_MAX_EXPLICIT, EMULATED, EXPLICIT

VERSION = "0.1.0"

FIXED = "fixed"
SCALED = "scaled"

MODE_FEEDBACK = transmission.FEEDBACK
MODE_ZF_CSIT = transmission.ZF_CSIT

# strategies whose perfect-feedback limit is well defined (unit in-span
# direction with zero quantization error)
_ZF_CSIT_STRATEGIES = (combining.NONE, combining.QBC, combining.MAX_EIGENVECTOR)

DEFAULT_TRIALS = 20_000
DEFAULT_SEED = 1729

__all__ = [
    "VERSION",
    "FIXED",
    "SCALED",
    "MODE_FEEDBACK",
    "MODE_ZF_CSIT",
    "DEFAULT_TRIALS",
    "DEFAULT_SEED",
    "Scenario",
    "RateCurve",
    "LemmaReport",
    "ScalingTable",
    "parse_config",
    "render",
    "emit",
    "curve_from_json",
    "labeled_path",
    "build_scaling_table",
]


@dataclass(frozen=True)
class Scenario:
    """One complete experiment description. Immutable; validated on build."""

    M: int
    N: int
    K: int
    snr_db: tuple
    feedback: str = FIXED  # "fixed" | "scaled"
    feedback_value: float = 10.0  # bits B if fixed, gap target b if scaled
    strategy: str = combining.QBC
    scheduler: str = transmission.SCHED_EQUAL
    mode: str = MODE_FEEDBACK
    codebook: str = EXPLICIT
    pilot_beta: float = math.inf
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        object.__setattr__(self, "snr_db", tuple(sorted(float(s) for s in self.snr_db)))
        self.validate()

    def validate(self):
        if not (isinstance(self.M, int) and isinstance(self.N, int) and isinstance(self.K, int)):
            raise ValidationError("m, n, k must be integers")
        if not 1 <= self.N < self.M:
            raise UnsupportedConfigurationError(
                f"receive antennas must satisfy 1 <= N < M; got N={self.N}, M={self.M}"
            )
        if self.K < 1:
            raise ValidationError(f"need K >= 1 users; got {self.K}")
        if len(self.snr_db) == 0:
            raise ValidationError("snr_db grid must be nonempty")
        if self.trials < 1:
            raise ValidationError(f"trials must be >= 1; got {self.trials}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed must fit in 64 bits")
        if self.strategy not in combining.STRATEGIES:
            raise ValidationError(
                f"unknown strategy {self.strategy!r}; expected one of {combining.STRATEGIES}"
            )
        if self.scheduler not in transmission.SCHEDULERS:
            raise ValidationError(
                f"unknown scheduler {self.scheduler!r}; expected one of "
                f"{transmission.SCHEDULERS}"
            )
        if self.mode not in (MODE_FEEDBACK, MODE_ZF_CSIT):
            raise ValidationError(
                f"unknown mode {self.mode!r}; expected feedback or zf_csit"
            )
        if self.codebook not in (EXPLICIT, EMULATED):
            raise ValidationError(
                f"unknown codebook mode {self.codebook!r}; expected explicit or emulated"
            )
        if self.feedback not in (FIXED, SCALED):
            raise ValidationError(
                f"unknown feedback rule {self.feedback!r}; expected fixed or scaled"
            )
        if not (self.pilot_beta == math.inf or self.pilot_beta >= 1):
            raise ValidationError(
                f"pilot_beta must be >= 1 (or inf for perfect estimation); got {self.pilot_beta}"
            )
        if self.scheduler == transmission.SCHED_EQUAL and self.K < self.M:
            raise ValidationError(
                f"equal-power scheduling serves the first M users and needs "
                f"K >= M; got K={self.K}, M={self.M}"
            )
        if self.mode == MODE_ZF_CSIT:
            if self.strategy not in _ZF_CSIT_STRATEGIES:
                raise ValidationError(
                    f"zf_csit mode supports strategies {_ZF_CSIT_STRATEGIES}; "
                    f"got {self.strategy!r}"
                )
            return  # feedback rule and codebook are unused with perfect CSIT
        if self.strategy == combining.MRC and self.codebook != EXPLICIT:
            raise CodebookModeError(
                "mrc has no closed-form error law: explicit codebooks only"
            )
        if self.feedback == SCALED:
            if self.codebook == EXPLICIT:
                raise CodebookModeError(
                    "scaled feedback produces fractional SNR-dependent B; "
                    "use the emulated codebook mode"
                )
            # fails fast (infeasible-gap) if the gap target is too small
            ScalingInputs(M=self.M, N=self.N, b_gap=self.feedback_value, P_dB=0.0)
        else:
            B = self.feedback_value
            if B < 0:
                raise ValidationError(f"feedback bits must be >= 0; got {B}")
            if self.codebook == EXPLICIT:
                if B != int(B):
                    raise ValidationError(
                        f"explicit codebooks need integer B; got {B}"
                    )
                if B > B_MAX_EXPLICIT:
                    raise CodebookSizeError(
                        f"B={int(B)} exceeds the explicit cap of {B_MAX_EXPLICIT}; "
                        f"use the emulated codebook mode"
                    )

    def bits_at(self, snr_db: float) -> float:
        """Feedback bits at one SNR point (raw scaled values clamp at 0)."""
        if self.feedback == FIXED:
            return float(self.feedback_value)
        raw = feedback_scaling(
            ScalingInputs(M=self.M, N=self.N, b_gap=self.feedback_value, P_dB=snr_db)
        )
        return max(raw, 0.0)

    def canonical(self) -> dict:
        d = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = list(v)
            elif isinstance(v, float) and math.isinf(v):
                v = "inf"
            d[f.name] = v
        return d

    @property
    def hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    def with_overrides(self, **kw) -> "Scenario":
        return replace(self, **kw)


_CONFIG_KEYS = {
    "m", "n", "k", "snr_db", "feedback", "strategy", "scheduler",
    "mode", "codebook", "pilot_beta", "trials", "seed",
}


def parse_config(text: str) -> Scenario:
    """Parse the flat key=value scenario format.

    One `key = value` pair per line; '#' starts a comment; unknown keys are
    errors. `feedback` is `fixed:<bits>` or `scaled:<gap>`; `snr_db` is a
    comma-separated list.
    """
    raw = {}
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {ln}: expected key=value, got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key not in _CONFIG_KEYS:
            raise ValidationError(f"config line {ln}: unknown key {key!r}")
        if key in raw:
            raise ValidationError(f"config line {ln}: duplicate key {key!r}")
        raw[key] = val
    for req in ("m", "n", "k", "snr_db"):
        if req not in raw:
            raise ValidationError(f"config is missing required key {req!r}")

    def _int(key, val):
        try:
            return int(val)
        except ValueError:
            raise ValidationError(f"config key {key!r} must be an integer; got {val!r}")

    kw = {
        "M": _int("m", raw["m"]),
        "N": _int("n", raw["n"]),
        "K": _int("k", raw["k"]),
    }
    try:
        kw["snr_db"] = tuple(float(s) for s in raw["snr_db"].split(",") if s.strip())
    except ValueError:
        raise ValidationError(f"snr_db must be comma-separated reals; got {raw['snr_db']!r}")
    if "feedback" in raw:
        spec = raw["feedback"]
        kind, _, arg = spec.partition(":")
        kind = kind.strip().lower()
        if kind not in (FIXED, SCALED) or not arg:
            raise ValidationError(
                f"feedback must look like 'fixed:10' or 'scaled:2'; got {spec!r}"
            )
        try:
            kw["feedback"], kw["feedback_value"] = kind, float(arg)
        except ValueError:
            raise ValidationError(f"feedback value must be a real; got {arg!r}")
    for key, dest in (("strategy", "strategy"), ("scheduler", "scheduler"),
                      ("mode", "mode"), ("codebook", "codebook")):
        if key in raw:
            kw[dest] = raw[key].strip().lower()
    if "pilot_beta" in raw:
        v = raw["pilot_beta"].strip().lower()
        kw["pilot_beta"] = math.inf if v == "inf" else float(v)
    if "trials" in raw:
        kw["trials"] = _int("trials", raw["trials"])
    if "seed" in raw:
        kw["seed"] = _int("seed", raw["seed"])
    return Scenario(**kw)


@dataclass(frozen=True)
class RateCurve:
    """Per-SNR Monte Carlo throughput summary.

    sum_rate is the mean over trials of the scheduled users' total rate;
    per_user_rate the mean of (total rate / scheduled count); stderr the
    standard error of the sum rate. Points are ordered by SNR.
    """

    snr_db: tuple
    sum_rate: tuple
    per_user_rate: tuple
    stderr: tuple
    trials: tuple
    scenario_hash: str
    version: str = VERSION

    def to_json_dict(self) -> dict:
        return {
            "snr_db": list(self.snr_db),
            "sum_rate": list(self.sum_rate),
            "per_user_rate": list(self.per_user_rate),
            "stderr": list(self.stderr),
            "trials": list(self.trials),
            "scenario_hash": self.scenario_hash,
            "version": self.version,
        }

    def csv_rows(self):
        yield "snr_db,sum_rate,per_user_rate,stderr,trials,scenario_hash"
        for i in range(len(self.snr_db)):
            yield (
                f"{self.snr_db[i]!r},{self.sum_rate[i]!r},"
                f"{self.per_user_rate[i]!r},{self.stderr[i]!r},"
                f"{self.trials[i]},{self.scenario_hash}"
            )


def curve_from_json(d: dict) -> RateCurve:
    return RateCurve(
        snr_db=tuple(d["snr_db"]),
        sum_rate=tuple(d["sum_rate"]),
        per_user_rate=tuple(d["per_user_rate"]),
        stderr=tuple(d["stderr"]),
        trials=tuple(int(t) for t in d["trials"]),
        scenario_hash=d["scenario_hash"],
        version=d["version"],
    )


@dataclass(frozen=True)
class LemmaReport:
    """KS goodness-of-fit report for the three effective-channel laws:
    quantization error, squared norm, and direction isotropy."""

    M: int
    N: int
    B: int
    trials: int
    seed: int
    d_error: float
    d_norm: float
    d_direction: float
    threshold: float
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "m": self.M,
            "n": self.N,
            "b": self.B,
            "trials": self.trials,
            "seed": self.seed,
            "ks": {
                "error_min_beta": self.d_error,
                "norm_chi2": self.d_norm,
                "direction_beta": self.d_direction,
            },
            "threshold": self.threshold,
            "passed": self.passed,
        }

    def csv_rows(self):
        yield "law,ks_d,threshold,passed"
        for name, d in (
            ("error_min_beta", self.d_error),
            ("norm_chi2", self.d_norm),
            ("direction_beta", self.d_direction),
        ):
            yield f"{name},{d!r},{self.threshold!r},{str(d < self.threshold).lower()}"


@dataclass(frozen=True)
class ScalingTable:
    """Feedback bits required per (SNR, N) to hold a fixed rate gap, with
    the savings relative to no combining (N=1)."""

    M: int
    b_gap: float
    rows: tuple = field(default_factory=tuple)
    # each row: dict with snr_db, n, bits_raw, bits, delta_raw, delta

    def to_json_dict(self) -> dict:
        return {"m": self.M, "b_gap": self.b_gap, "rows": [dict(r) for r in self.rows]}

    def csv_rows(self):
        yield "snr_db,n,bits_raw,bits,delta_raw,delta"
        for r in self.rows:
            yield (
                f"{r['snr_db']!r},{r['n']},{r['bits_raw']!r},{r['bits']},"
                f"{r['delta_raw']!r},{r['delta']}"
            )


def build_scaling_table(M: int, n_list: Sequence[int], b_gap: float,
                        snr_db: Sequence[float]) -> ScalingTable:
    """Bits from the closed-form scaling rule, rounded up to whole bits with
    raw values retained; savings are measured against the N=1 row."""
    n_list = sorted(set(int(n) for n in n_list) | {1})
    rows = []
    for s in sorted(float(x) for x in snr_db):
        raw1 = feedback_scaling(ScalingInputs(M=M, N=1, b_gap=b_gap, P_dB=s))
        for n in n_list:
            raw = feedback_scaling(ScalingInputs(M=M, N=n, b_gap=b_gap, P_dB=s))
            rows.append({
                "snr_db": s,
                "n": n,
                "bits_raw": raw,
                "bits": max(0, math.ceil(raw)),
                "delta_raw": raw1 - raw,
                "delta": max(0, math.ceil(raw1)) - max(0, math.ceil(raw)),
            })
    return ScalingTable(M=M, b_gap=float(b_gap), rows=tuple(rows))


def labeled_path(path: str, label: str) -> str:
    """Per-curve output file for bundles: <stem>-<label><ext>."""
    stem, ext = os.path.splitext(path)
    return f"{stem}-{label}{ext}"


def render(obj, fmt: str) -> str:
    """Serialize a RateCurve, LemmaReport, or ScalingTable to csv or json
    text with deterministic field order and a trailing newline."""
    if fmt not in ("csv", "json"):
        raise ValidationError(f"unknown output format {fmt!r}; expected csv or json")
    if fmt == "json":
        return json.dumps(obj.to_json_dict(), indent=2, sort_keys=False) + "\n"
    return "\n".join(obj.csv_rows()) + "\n"


def emit(obj, fmt: str, path: str) -> None:
    """Write a result object to a file (UTF-8, LF). I/O failures are
    re-raised with the path attached."""
    text = render(obj, fmt)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as e:
        raise EmitError(f"cannot write {path}: {e}") from e


def curve_points(curve: RateCurve) -> np.ndarray:
    """Convenience (snr, sum_rate) array view for quick numeric checks."""
    return np.column_stack([curve.snr_db, curve.sum_rate])
