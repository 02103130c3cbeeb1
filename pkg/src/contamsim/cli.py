"""Command-line interface.

Subcommands:

* ``rates``      — compute the theoretical bound constants and curves.
* ``simulate``   — Monte Carlo ensemble of single trajectories.
* ``couple``     — three-phase coupling ensemble at the horizon.
* ``verify``     — empirical curves vs. theoretical bounds; the exit
  status reports whether the bounds dominate the estimates.
* ``dump-paths`` — event log of one replica for inspection.

All artifacts are plain CSV/JSON with deterministic formatting, so two
runs with the same configuration produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from pathlib import Path

import click
import numpy as np
import yaml

from . import estimators, rates, runner
from .config import RunConfig
from .coupling import CouplingPhaseParams
from .errors import ConfigError, ContamsimError
from .pdmp import simulate_path

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        return "%.12g" % x
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return x


def _write_csv(path: Path, fieldnames: list, rows: list):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_fmt(row[k]) for k in fieldnames])


def _write_json(path: Path, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load(config_path, seed, replicas, out) -> RunConfig:
    try:
        with open(config_path) as fh:
            data = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {config_path}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"config parse error in {config_path}: {exc}")
    if not isinstance(data, dict):
        raise ConfigError(f"config root must be a mapping: {config_path}")
    # command-line overrides are pushed into the raw dict so that worker
    # processes, which rebuild the config from it, see them too
    if seed is not None:
        data.setdefault("experiment", {})["seed"] = int(seed)
    if replicas is not None:
        data.setdefault("experiment", {})["n_replicas"] = int(replicas)
    if out is not None:
        data.setdefault("outputs", {})["directory"] = str(out)
    return RunConfig.from_dict(data)


def _model_spec(cfg: RunConfig) -> rates.ModelSpec:
    x0 = cfg.init.x_mean()
    x0t = cfg.init_tilde.x_mean()
    return rates.ModelSpec(
        F=cfg.intake,
        G=cfg.inter_arrival,
        H=cfg.metabolic,
        x0_mean=x0,
        x0_tilde_mean=x0t,
        x0_max_mean=max(x0, x0t),
    )


def _bounds(cfg: RunConfig) -> rates.MainBounds:
    age_params = None
    if cfg.epsilon_age is not None and cfg.b is not None and cfg.c is not None:
        age_params = (cfg.epsilon_age, cfg.b, cfg.c)
    return rates.convergence_bounds(
        _model_spec(cfg),
        alpha=cfg.alpha,
        beta=cfg.beta,
        age_params=age_params,
        holder=cfg.holder,
        p=cfg.p,
        v3=cfg.v3,
        w_eps_frac=cfg.w_eps_frac,
        renewal_step=cfg.renewal_step,
        n_mc=cfg.n_mc_tail,
    )


def _phase_params(cfg: RunConfig, bounds: rates.MainBounds, t: float) -> CouplingPhaseParams:
    eps = cfg.epsilon_tv
    if eps is None:
        eps = bounds.epsilon_tv_default(t)
    eps = min(max(eps, 1e-300), 1.0 - 1e-12)
    return CouplingPhaseParams(
        alpha=bounds.report.alpha,
        beta=bounds.report.beta,
        epsilon_tv=eps,
        epsilon_age=cfg.epsilon_age,
        b=cfg.b,
        c=cfg.c,
    )


def _rate_report_payload(cfg: RunConfig, bounds: rates.MainBounds) -> dict:
    model = {
        "intake": {"family": cfg.intake.family.value, "params": list(cfg.intake.params)},
        "inter_arrival": {
            "family": cfg.inter_arrival.family.value,
            "params": list(cfg.inter_arrival.params),
        },
        "metabolic": {
            "family": cfg.metabolic.family.value,
            "params": list(cfg.metabolic.params),
        },
    }
    return {
        "schema_version": SCHEMA_VERSION,
        "model": model,
        "constants": bounds.report.to_dict(),
        "curves": {
            "tv": {"provenance": bounds.tv.provenance},
            "w1": {"provenance": bounds.w1.provenance},
        },
        "constant_descriptions": {
            "w": "Laplace root of the discounted inter-arrival kernel",
            "v_G": "supremum of the exponential-moment domain of the inter-arrival law",
            "rho": "mean per-renewal contraction 1 - E[exp(-Theta*DeltaT)]",
            "q": "mean discount factor E[exp(-Theta*DeltaT)]",
            "p1": "per-attempt success probability of one age-coalescence block",
            "p2": "success probability of the outer age-coalescence round",
            "C1/v1": "constant and rate of the age-coalescence tail envelope",
            "C2/v2": "constant and rate of the closeness phase of the TV curve",
            "C3/v3": "exponential moment constant and rate of the no-jump phase",
            "C4/v4": "intake-overlap envelope contribution to the merge phase",
            "v_prime": "rate of the default closeness threshold exp(-v'(beta-alpha)t)",
            "alpha/beta": "phase boundaries as fractions of the horizon",
            "C1_w1/C2_w1": "constants of the two Wasserstein-1 terms",
        },
    }


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _common(f):
    f = click.option("--config", "config_path", required=True, type=click.Path())(f)
    f = click.option("--seed", type=int, default=None, help="override experiment.seed")(f)
    f = click.option("--replicas", type=int, default=None, help="override n_replicas")(f)
    f = click.option("--out", type=click.Path(), default=None, help="override output dir")(f)
    f = click.option("--quiet", is_flag=True, default=False)(f)
    return f


class _Group(click.Group):
    """Translate package errors into clean CLI failures."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except ConfigError as exc:
            raise click.UsageError(str(exc))
        except ContamsimError as exc:
            raise click.ClickException(str(exc))


@click.group(cls=_Group)
def main():
    """Monte Carlo study of a stochastic exposure process and its
    theoretical convergence bounds."""


@main.command(name="rates")
@_common
def rates_cmd(config_path, seed, replicas, out, quiet):
    """Compute bound constants and write rate_report.json."""
    cfg = _load(config_path, seed, replicas, out)
    bounds = _bounds(cfg)
    path = Path(cfg.out_dir) / "rate_report.json"
    _write_json(path, _rate_report_payload(cfg, bounds))
    if not quiet:
        r = bounds.report
        click.echo(
            f"rates: v1={_fmt(r.v1)} v2'={_fmt(r.v2_prime)} v3={_fmt(r.v3)} "
            f"alpha={_fmt(r.alpha)} beta={_fmt(r.beta)} -> {path}"
        )


@main.command()
@_common
def simulate(config_path, seed, replicas, out, quiet):
    """Simulate an ensemble of single trajectories."""
    cfg = _load(config_path, seed, replicas, out)
    rows = runner.marginal_rows(cfg)
    path = Path(cfg.out_dir) / "paths_summary.csv"
    _write_csv(path, ["replica_id", "x", "theta", "age", "n_events"], rows)
    if not quiet:
        xs = np.array([r["x"] for r in rows])
        click.echo(
            f"simulate: {len(rows)} replicas, mean final quantity "
            f"{_fmt(float(xs.mean()))} -> {path}"
        )


@main.command(name="dump-paths")
@_common
@click.option("--replica", type=int, default=0, show_default=True)
def dump_paths(config_path, seed, replicas, out, quiet, replica):
    """Write the full event log of one replica."""
    cfg = _load(config_path, seed, replicas, out)
    rng = np.random.default_rng([cfg.seed, 0, replica])
    init = cfg.init.sample(rng)
    log, final = simulate_path(
        init, cfg.intake, cfg.inter_arrival, cfg.metabolic, cfg.horizon, rng
    )
    rows = [
        {"t": t, "intake": u, "theta_after": th}
        for t, u, th in zip(log.jump_times, log.intakes, log.thetas)
    ]
    path = Path(cfg.out_dir) / f"path_{replica}.csv"
    _write_csv(path, ["t", "intake", "theta_after"], rows)
    if not quiet:
        click.echo(
            f"dump-paths: replica {replica}, {log.n_events()} events, "
            f"final quantity {_fmt(final.x)} -> {path}"
        )


@main.command()
@_common
def couple(config_path, seed, replicas, out, quiet):
    """Run the three-phase coupling ensemble at the horizon."""
    cfg = _load(config_path, seed, replicas, out)
    bounds = _bounds(cfg)
    params = _phase_params(cfg, bounds, cfg.horizon)
    rows = runner.coupled_rows(cfg, stream=len(cfg.grid), horizon=cfg.horizon, params=params)
    path = Path(cfg.out_dir) / "coupling_reports.csv"
    fields = [
        "replica_id", "tau_A", "tau", "n_events",
        "age_merge_by_alpha", "close_at_beta", "jump_by_horizon",
        "merged_at_first_attempt", "gap_at_beta", "l1_final",
    ]
    _write_csv(path, fields, rows)
    if not quiet:
        merged = sum(1 for r in rows if r["tau"] <= cfg.horizon)
        click.echo(
            f"couple: {merged}/{len(rows)} replicas coalesced by t={_fmt(cfg.horizon)} "
            f"-> {path}"
        )


@main.command()
@_common
def verify(config_path, seed, replicas, out, quiet):
    """Estimate distance curves and check them against the bounds.

    Exits 0 when the theoretical curves dominate the estimates (within
    the 95% confidence bands) at every grid time, 1 otherwise.
    """
    cfg = _load(config_path, seed, replicas, out)
    bounds = _bounds(cfg)
    out_dir = Path(cfg.out_dir)
    _write_json(out_dir / "rate_report.json", _rate_report_payload(cfg, bounds))

    tv_rows, w1_rows = [], []
    ok = True
    for gi, t in enumerate(cfg.grid):
        params = _phase_params(cfg, bounds, t)
        rows = runner.coupled_rows(cfg, stream=gi, horizon=t, params=params)
        taus = [r["tau"] for r in rows]
        curve = estimators.tv_via_coupling(taus, [t])
        tv_bound = bounds.tv(t)
        tv_ok = curve.ci_low[0] <= tv_bound
        tv_rows.append(
            {
                "t": t,
                "estimate": float(curve.values[0]),
                "ci_low": float(curve.ci_low[0]),
                "ci_high": float(curve.ci_high[0]),
                "bound_value": tv_bound,
                "bound_provenance": bounds.tv.provenance,
            }
        )
        gaps = np.array([r["l1_final"] for r in rows])
        mean, half = estimators.mean_with_ci(gaps)
        w1_bound = bounds.w1(t)
        w1_ok = mean - half <= w1_bound
        w1_rows.append(
            {
                "t": t,
                "estimate": mean,
                "ci_low": mean - half,
                "ci_high": mean + half,
                "bound_value": w1_bound,
                "bound_provenance": bounds.w1.provenance,
            }
        )
        ok = ok and tv_ok and w1_ok
        if not quiet:
            click.echo(
                f"t={_fmt(t)}: TV est {_fmt(float(curve.values[0]))} vs bound "
                f"{_fmt(tv_bound)} [{'ok' if tv_ok else 'VIOLATED'}]; "
                f"W1 est {_fmt(mean)} vs bound {_fmt(w1_bound)} "
                f"[{'ok' if w1_ok else 'VIOLATED'}]"
            )

    fields = ["t", "estimate", "ci_low", "ci_high", "bound_value", "bound_provenance"]
    _write_csv(out_dir / "curves_tv.csv", fields, tv_rows)
    _write_csv(out_dir / "curves_w1.csv", fields, w1_rows)
    if not quiet:
        click.echo("verify: bounds dominate" if ok else "verify: bound violation detected")
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
