"""Command-line front end.

Verbs: simulate (run a config file), verify-lemmas (distribution checks),
scaling-table (closed-form feedback requirements), preset (named bundles).
Validation failures print a machine-readable {"category", "message"} line to
stderr and exit 2; a failing lemma report exits 1.
"""

from __future__ import annotations

import json
import sys

import click

from . import engine, presets
from . import scenario as sc
from .errors import EmitError, SimulationError


def _guard(fn):
    try:
        return fn()
    except SimulationError as e:
        click.echo(json.dumps({"category": e.category, "message": str(e)}),
                   err=True)
        sys.exit(2)


def _output(obj, fmt: str, out: str | None):
    if out is None:
        click.echo(sc.render(obj, fmt), nl=False)
    else:
        sc.emit(obj, fmt, out)
        click.echo(f"wrote {out}")


@click.group()
@click.version_option(version=sc.VERSION, prog_name="antcomb")
def main():
    """Limited-feedback multi-antenna downlink simulator."""


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(dir_okay=False),
              help="Scenario file (key=value lines; see README for schema).")
@click.option("--seed", type=int, default=None, help="Override the seed.")
@click.option("--trials", type=int, default=None,
              help="Override trials per SNR point.")
@click.option("--workers", type=int, default=1, show_default=True,
              help="Worker threads (results are identical for any count).")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Output file; stdout when omitted.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="csv", show_default=True)
def simulate(config_path, seed, trials, workers, out, fmt):
    """Run one scenario and emit its rate curve."""

    def go():
        try:
            with open(config_path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise EmitError(f"cannot read {config_path}: {e}") from e
        s = sc.parse_config(text)
        if seed is not None:
            s = s.with_overrides(seed=seed)
        if trials is not None:
            s = s.with_overrides(trials=trials)
        curve = engine.run_scenario(s, workers=workers)
        _output(curve, fmt, out)

    _guard(go)


@main.command("verify-lemmas")
@click.option("--m", "m", type=int, required=True, help="Transmit antennas.")
@click.option("--n", "n", type=int, required=True, help="Receive antennas.")
@click.option("--b", "b", type=int, required=True, help="Feedback bits.")
@click.option("--trials", type=int, default=100_000, show_default=True)
@click.option("--seed", type=int, default=sc.DEFAULT_SEED, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="json", show_default=True)
def verify_lemmas(m, n, b, trials, seed, workers, out, fmt):
    """KS-test the three effective-channel distribution laws.

    Exit 0 when all three fit within the threshold, 1 otherwise.
    """

    def go():
        rep = engine.verify_lemmas(m, n, b, trials=trials, seed=seed,
                                   workers=workers)
        _output(rep, fmt, out)
        if not rep.passed:
            sys.exit(1)

    _guard(go)


@main.command("scaling-table")
@click.option("--m", "m", type=int, required=True, help="Transmit antennas.")
@click.option("--n", "n_list", type=int, multiple=True,
              help="Receive antenna counts (repeatable; default 1 2 3).")
@click.option("--b-gap", type=float, default=2.0, show_default=True,
              help="Rate-gap target b (per-user loss of log2(b)).")
@click.option("--snr", default="0,5,10,15,20,25", show_default=True,
              help="Comma-separated SNR grid in dB.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="csv", show_default=True)
def scaling_table(m, n_list, b_gap, snr, out, fmt):
    """Feedback bits required per SNR and antenna count, with savings."""

    def go():
        try:
            grid = tuple(float(x) for x in snr.split(",") if x.strip())
        except ValueError:
            raise sc.ValidationError(f"--snr must be comma-separated reals; got {snr!r}")
        table = engine.scaling_table(m, n_list or (1, 2, 3), b_gap, grid)
        _output(table, fmt, out)

    _guard(go)


@main.command()
@click.argument("name", required=False)
@click.option("--list", "list_only", is_flag=True, help="List preset names.")
@click.option("--seed", type=int, default=None, help="Override the seed.")
@click.option("--trials", type=int, default=None,
              help="Override trials per SNR point.")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Output stem; each curve goes to <stem>-<label>.<ext>.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="csv", show_default=True)
def preset(name, list_only, seed, trials, workers, out, fmt):
    """Run a named scenario bundle (fig3..fig8)."""

    def go():
        if list_only or name is None:
            for p in sorted(presets.PRESETS):
                click.echo(f"{p}: {presets.PRESETS[p].description}")
            if name is None and not list_only:
                sys.exit(0)
            return
        curves = presets.run_preset(name, seed=seed, trials=trials,
                                    workers=workers)
        if out is None:
            payload = {label: c.to_json_dict() for label, c in curves.items()}
            click.echo(json.dumps(payload, indent=2))
            return
        for label, curve in curves.items():
            path = sc.labeled_path(out, label)
            sc.emit(curve, fmt, path)
            click.echo(f"{label} -> {path}")

    _guard(go)


if __name__ == "__main__":
    main()
