"""Command-line front end: ``logconheat run <E1..E6|all> [options]``.

Options may also come from a plain ``key = value`` config file (``#``
comments allowed) whose keys mirror the long flags, e.g.::

    alpha = 1, 1.5, 1.9
    grid-h = 0.015625
    t-max = 500
    format = csv

Flags given on the command line override the config file.  Exit status is
0 iff every non-exploratory assertion of every requested experiment holds.
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click

from .experiments import EXPERIMENTS, ExperimentSpec, emit, run, spec_hash

log = logging.getLogger("logconheat")

CONFIG_KEYS = ("alpha", "grid-h", "t-max", "kappa-steps", "seed", "out", "format")


def read_config(path) -> dict:
    """Parse a ``key = value`` file into a dict keyed by flag name."""
    conf = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.BadParameter(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("_", "-")
        if key not in CONFIG_KEYS:
            raise click.BadParameter(f"{path}:{lineno}: unknown key {key!r}")
        conf[key] = value
    return conf


def _alpha_list(text) -> tuple[float, ...] | None:
    if text is None:
        return None
    try:
        return tuple(float(v) for v in str(text).replace(";", ",").split(",") if v.strip())
    except ValueError:
        raise click.BadParameter(f"alpha must be a comma-separated list of numbers: {text!r}")


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def main(verbose):
    """Heat-flow concavity experiments."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")


@main.command("run")
@click.argument("experiment", type=click.Choice(list(EXPERIMENTS) + ["all"],
                                                case_sensitive=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="key = value file mirroring the flags below.")
@click.option("--alpha", help="Comma-separated alpha list (experiment specific meaning).")
@click.option("--grid-h", type=float, help="Base grid spacing.")
@click.option("--t-max", type=float, help="Largest evolution time.")
@click.option("--kappa-steps", type=int, help="Length of the kappa schedule (default 21).")
@click.option("--seed", type=int, help="Seed for randomised triple sets (default 0).")
@click.option("--out", type=click.Path(file_okay=False), help="Output root (default ./out).")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
              help="Output format (default json).")
def run_cmd(experiment, config_path, alpha, grid_h, t_max, kappa_steps, seed, out, fmt):
    """Run one experiment, or all of them, and write out/<id>/<spec-hash>/."""
    conf = read_config(config_path) if config_path else {}
    try:
        alpha = _alpha_list(alpha if alpha is not None else conf.get("alpha"))
        grid_h = grid_h if grid_h is not None else _num(conf, "grid-h", float)
        t_max = t_max if t_max is not None else _num(conf, "t-max", float)
        kappa_steps = kappa_steps if kappa_steps is not None else _num(conf, "kappa-steps", int)
        seed = seed if seed is not None else _num(conf, "seed", int)
    except ValueError as exc:
        raise click.BadParameter(str(exc))
    out = Path(out or conf.get("out", "out"))
    fmt = fmt or conf.get("format", "json")
    if fmt not in ("json", "csv"):
        raise click.BadParameter(f"format must be json or csv, got {fmt!r}")
    ids = EXPERIMENTS if experiment.lower() == "all" else (experiment.upper(),)
    ok = True
    for eid in ids:
        try:
            spec = ExperimentSpec(eid, alpha=alpha, grid_h=grid_h, t_max=t_max,
                                  kappa_steps=kappa_steps if kappa_steps is not None else 21,
                                  seed=seed if seed is not None else 0)
        except ValueError as exc:
            raise click.BadParameter(str(exc))
        log.info("running %s", eid)
        res = run(spec)
        path = emit(res, fmt, out / eid / spec_hash(spec))
        status = "PASS" if res.passed else "FAIL"
        click.echo(f"{eid} {status} {res.wall_clock:.1f}s -> {path}")
        for name in res.failures():
            click.echo(f"  failed: {name}")
        ok &= res.passed
    sys.exit(0 if ok else 1)


def _num(conf, key, kind):
    return kind(conf[key]) if key in conf else None


if __name__ == "__main__":  # pragma: no cover
    main()
