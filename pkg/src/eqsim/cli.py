"""Command-line front door: sweeps, tomography runs, checks, and rates.

All randomness is owned by per-row generators seeded from the base seed
(``seed + 2*i`` and ``seed + 2*i + 1`` for the two observables of row i,
``seed + 1_000_000 + i`` for Monte-Carlo error bars), so identical config
plus seed produces byte-identical CSV output regardless of scheduling.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import click
import numpy as np

from . import circuits, embedding, noise, optics, tomography
from .qstate import PauliString, expectation
from .verify import run_checks

EXIT_OK = 0
EXIT_INVALID_CONFIG = 1
EXIT_INVARIANT_FAILURE = 2

SWEEP_MODES = ("exact", "circuit", "optics", "shots")
CSV_HEADER = ("gt", "epsilon", "c_exact", "c_estimate", "c_sigma", "shots", "seed")


class ConfigError(Exception):
    """Invalid configuration; the message names the offending field."""

    def __init__(self, fieldname: str, message: str):
        super().__init__(f"invalid config field '{fieldname}': {message}")
        self.fieldname = fieldname


@dataclass
class ExperimentConfig:
    mode: str = "exact"
    gt_grid: tuple[float, ...] = ()
    epsilon: float | None = None
    pump_percent: float | None = None
    shots: int = 0
    seed: int = 0
    mc_resamples: int = 100
    output_path: str | None = None
    plot: bool | None = None

    def resolve_epsilon(self, protocol: str) -> float:
        if self.epsilon is not None and self.pump_percent is not None:
            raise ConfigError("epsilon", "set either epsilon or pump, not both")
        if self.pump_percent is not None:
            try:
                return noise.epsilon_from_pump(self.pump_percent, protocol)
            except ValueError as exc:
                raise ConfigError("pump", str(exc)) from exc
        if self.epsilon is None:
            return 1.0
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError("epsilon", f"{self.epsilon} outside [0, 1]")
        return self.epsilon


_PI_TERM = re.compile(r"^\s*(?:(?P<pre>[0-9.eE+-]+)\s*\*?\s*)?pi(?:\s*/\s*(?P<den>[0-9.eE+-]+))?\s*$")


def parse_angle(token: str) -> float:
    """Parse a float, optionally written with pi (e.g. ``pi/4``, ``0.5*pi``)."""
    token = token.strip()
    m = _PI_TERM.match(token)
    if m:
        value = math.pi
        if m.group("pre"):
            value *= float(m.group("pre"))
        if m.group("den"):
            value /= float(m.group("den"))
        return value
    return float(token)


def parse_gt_grid(spec: str | None) -> tuple[float, ...]:
    """Comma list of angles, or ``start:stop:num`` for a uniform grid."""
    if spec is None or not spec.strip():
        return tuple(np.linspace(0.0, math.pi, 33))
    spec = spec.strip()
    try:
        if ":" in spec:
            start_s, stop_s, num_s = spec.split(":")
            num = int(num_s)
            if num < 1:
                raise ValueError("grid needs at least one point")
            return tuple(np.linspace(parse_angle(start_s), parse_angle(stop_s), num))
        grid = tuple(parse_angle(tok) for tok in spec.split(",") if tok.strip())
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("gt-grid", f"cannot parse {spec!r}: {exc}") from exc
    if not grid:
        raise ConfigError("gt-grid", "grid must be non-empty")
    return grid


def read_config_file(path: str) -> dict[str, str]:
    """Key-value config lines (``key = value``); '#' starts a comment."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("config", f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        values[key.strip().lower().replace("_", "-")] = value.strip()
    return values


def _merged_config(
    config_path: str | None,
    *,
    gt_grid: str | None,
    epsilon: float | None,
    pump: float | None,
    shots: int | None,
    seed: int | None,
    mode: str | None,
    out: str | None,
    plot: bool | None,
    mc: int | None = None,
) -> ExperimentConfig:
    file_values = read_config_file(config_path) if config_path else {}

    def pick(flag, key, convert):
        if flag is not None:
            return flag
        if key in file_values:
            try:
                return convert(file_values[key])
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(key, f"cannot parse {file_values[key]!r}: {exc}")
        return None

    def to_bool(text: str) -> bool:
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError("expected a boolean")

    cfg = ExperimentConfig(
        mode=pick(mode, "mode", str) or "exact",
        gt_grid=parse_gt_grid(pick(gt_grid, "gt-grid", str)),
        epsilon=pick(epsilon, "epsilon", float),
        pump_percent=pick(pump, "pump", float),
        shots=pick(shots, "shots", int) or 0,
        seed=pick(seed, "seed", int) or 0,
        mc_resamples=pick(mc, "mc", int) if pick(mc, "mc", int) is not None else 100,
        output_path=pick(out, "out", str),
        plot=pick(plot, "plot", to_bool),
    )
    if cfg.shots < 0:
        raise ConfigError("shots", "must be nonnegative")
    if cfg.mc_resamples < 0:
        raise ConfigError("mc", "must be nonnegative")
    if cfg.plot and cfg.output_path is None:
        raise ConfigError("out", "plotting needs an output path")
    return cfg


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _write_rows(rows: Sequence[dict], out_path: str | None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(
            [
                _fmt(row["gt"]),
                _fmt(row["epsilon"]),
                _fmt(row["c_exact"]),
                _fmt(row["c_estimate"]),
                _fmt(row["c_sigma"]),
                row["shots"],
                row["seed"],
            ]
        )
    text = buf.getvalue()
    if out_path:
        Path(out_path).write_text(text)
    return text


def _sweep_state(mode: str, gt: float) -> embedding.EmbeddedState:
    if mode in ("exact", "shots"):
        return embedding.protocol_embedded_state(gt)
    if mode == "circuit":
        start = embedding.embed(embedding.protocol_initial_state()).inner
        evolved = circuits.apply_circuit(circuits.full_circuit(gt), start)
        return embedding.EmbeddedState(evolved)
    if mode == "optics":
        start = embedding.embed(embedding.protocol_initial_state()).inner
        out = optics.propagate(
            optics.dual_rail_state(start), optics.build_eqs_optics(gt)
        )
        conditional, success = optics.postselect_coincidence(out)
        if conditional is None or success <= 0.0:
            raise RuntimeError("post-selection returned an empty outcome")
        return embedding.EmbeddedState(conditional)
    raise ConfigError("mode", f"{mode!r} is not one of {SWEEP_MODES}")


def run_concurrence_sweep(cfg: ExperimentConfig) -> list[dict]:
    if cfg.mode not in SWEEP_MODES:
        raise ConfigError("mode", f"{cfg.mode!r} is not one of {SWEEP_MODES}")
    if cfg.mode == "shots" and cfg.shots <= 0:
        raise ConfigError("shots", "mode 'shots' needs shots > 0")
    eps = cfg.resolve_epsilon("eqs")
    model = noise.WhiteNoiseModel(eps)
    rows = []
    for i, gt in enumerate(cfg.gt_grid):
        psi = _sweep_state(cfg.mode, gt)
        rho = noise.apply_white_noise(psi.inner.density_matrix(), model)
        c_exact = noise.expected_concurrence_embedded(model, gt)
        if cfg.shots > 0:
            records = noise.sample_observable_counts(
                rho, PauliString.from_str("ZYY"), cfg.shots, cfg.seed + 2 * i
            )
            records += noise.sample_observable_counts(
                rho,
                PauliString.from_str("XYY"),
                cfg.shots,
                cfg.seed + 2 * i + 1,
            )
            c_est, c_sigma = noise.concurrence_from_counts(
                records, seed=cfg.seed + 1_000_000 + i
            )
        else:
            z = expectation(rho, "ZYY")
            x = expectation(rho, "XYY")
            c_est, c_sigma = abs(z - 1j * x), 0.0
        rows.append(
            {
                "gt": gt,
                "epsilon": eps,
                "c_exact": c_exact,
                "c_estimate": c_est,
                "c_sigma": c_sigma,
                "shots": cfg.shots,
                "seed": cfg.seed,
            }
        )
    return rows


def fit_noise_model_amplitude(
    gts: Sequence[float], concurrences: Sequence[float]
) -> tuple[float, float]:
    """Fit the white-noise curve max(0, eps*|sin 2gt| - (1-eps)/2).

    Returns (fit_epsilon, fit_amplitude) where the amplitude is the curve
    maximum (3 eps - 1)/2.  One-dimensional least squares on a grid plus a
    quadratic refinement; the model is piecewise linear in eps so this is
    robust and dependency-free.
    """
    s = np.abs(np.sin(2.0 * np.asarray(gts)))
    c = np.asarray(concurrences)

    def sse(eps: float) -> float:
        model = np.maximum(0.0, eps * s - (1.0 - eps) / 2.0)
        return float(np.sum((model - c) ** 2))

    grid = np.linspace(0.0, 1.0, 2001)
    errors = [sse(e) for e in grid]
    best = int(np.argmin(errors))
    lo = max(best - 1, 0)
    hi = min(best + 1, len(grid) - 1)
    fine = np.linspace(grid[lo], grid[hi], 201)
    eps_hat = float(fine[int(np.argmin([sse(e) for e in fine]))])
    return eps_hat, max(0.0, (3.0 * eps_hat - 1.0) / 2.0)


def run_tomography(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    eps = cfg.resolve_epsilon("qst")
    shots = cfg.shots if cfg.shots > 0 else 20000
    model = noise.WhiteNoiseModel(eps)
    rows = []
    for i, gt in enumerate(cfg.gt_grid):
        pure = embedding.protocol_state(gt)
        rho = noise.apply_white_noise(pure.density_matrix(), model)
        records = tomography.simulate_tomography_counts(rho, shots, cfg.seed + i)
        reconstructed = tomography.reconstruct_from_counts(records)
        c_est = tomography.concurrence_mixed(reconstructed)
        c_sigma = (
            tomography.concurrence_sigma_mc(
                records, cfg.mc_resamples, cfg.seed + 1_000_000 + i
            )
            if cfg.mc_resamples > 0
            else 0.0
        )
        rows.append(
            {
                "gt": gt,
                "epsilon": eps,
                "c_exact": tomography.concurrence_mixed(rho),
                "c_estimate": c_est,
                "c_sigma": c_sigma,
                "shots": shots,
                "seed": cfg.seed,
            }
        )
    eps_hat, amplitude = fit_noise_model_amplitude(
        [r["gt"] for r in rows], [r["c_estimate"] for r in rows]
    )
    summary = {"epsilon": eps, "fit_epsilon": eps_hat, "fit_amplitude": amplitude}
    return rows, summary


def _config_options(with_mode: bool):
    def wrap(f):
        f = click.option("--config", "config_path", type=click.Path(exists=True), default=None, help="Key-value config file; flags win.")(f)
        f = click.option("--gt-grid", default=None, help="Comma list of angles (pi allowed) or start:stop:num.")(f)
        f = click.option("--epsilon", type=float, default=None, help="White-noise mixing weight in [0, 1].")(f)
        f = click.option("--pump", type=float, default=None, help="Pump power in percent; mapped to epsilon.")(f)
        f = click.option("--shots", type=int, default=None, help="Shots per projection setting.")(f)
        f = click.option("--seed", type=int, default=None, help="Base seed for all sampling.")(f)
        if with_mode:
            f = click.option("--mode", type=click.Choice(SWEEP_MODES), default=None, help="Computation path for the embedded state.")(f)
        f = click.option("--out", default=None, help="CSV output path.")(f)
        f = click.option("--plot/--no-plot", "plot", default=None, help="Render a PNG figure next to the CSV (default: on when --out is set).")(f)
        f = click.option("--json", "as_json", is_flag=True, help="Print a machine-readable report to stdout.")(f)
        return f

    return wrap


@click.group()
def main():
    """Embedding-quantum-simulator toolkit for two-qubit concurrence."""


@main.command("concurrence-sweep")
@_config_options(with_mode=True)
def cmd_concurrence_sweep(config_path, gt_grid, epsilon, pump, shots, seed, mode, out, plot, as_json):
    """Concurrence over a gt grid via the chosen computation path."""
    try:
        cfg = _merged_config(
            config_path, gt_grid=gt_grid, epsilon=epsilon, pump=pump, shots=shots,
            seed=seed, mode=mode, out=out, plot=plot,
        )
        rows = run_concurrence_sweep(cfg)
    except ConfigError as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_INVALID_CONFIG)
    text = _write_rows(rows, cfg.output_path)
    if cfg.output_path and (cfg.plot or cfg.plot is None):
        from .plotting import save_sweep_figure

        png = str(Path(cfg.output_path).with_suffix(".png"))
        save_sweep_figure(
            rows, png, epsilon=rows[0]["epsilon"],
            title=f"concurrence sweep ({cfg.mode} path)",
        )
        click.echo(f"wrote {cfg.output_path} and {png}", err=True)
    elif cfg.output_path:
        click.echo(f"wrote {cfg.output_path}", err=True)
    if as_json:
        click.echo(json.dumps({"rows": rows}, indent=2))
    elif not cfg.output_path:
        click.echo(text, nl=False)


@main.command("tomography-run")
@_config_options(with_mode=False)
@click.option("--mc", type=int, default=None, help="Monte-Carlo resamples per error bar (0 disables).")
def cmd_tomography_run(config_path, gt_grid, epsilon, pump, shots, seed, out, plot, as_json, mc):
    """Simulated two-qubit tomography of the evolving state, with curve fit."""
    try:
        cfg = _merged_config(
            config_path, gt_grid=gt_grid, epsilon=epsilon, pump=pump, shots=shots,
            seed=seed, mode=None, out=out, plot=plot, mc=mc,
        )
        rows, summary = run_tomography(cfg)
    except ConfigError as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_INVALID_CONFIG)
    _write_rows(rows, cfg.output_path)
    if cfg.output_path and (cfg.plot or cfg.plot is None):
        from .plotting import save_tomography_figure

        png = str(Path(cfg.output_path).with_suffix(".png"))
        save_tomography_figure(
            rows, png, epsilon=summary["epsilon"],
            fit_amplitude=summary["fit_amplitude"],
            title="tomography of the two-qubit evolution",
        )
        click.echo(f"wrote {cfg.output_path} and {png}", err=True)
    elif cfg.output_path:
        click.echo(f"wrote {cfg.output_path}", err=True)
    if as_json:
        click.echo(json.dumps({"summary": summary, "rows": rows}, indent=2))
    else:
        click.echo(
            f"fit_epsilon={summary['fit_epsilon']:.4f} "
            f"fit_amplitude={summary['fit_amplitude']:.4f}"
        )


@main.command("optics-check")
@click.option("--out", default=None, help="CSV output path for the table.")
@click.option("--json", "as_json", is_flag=True)
def cmd_optics_check(out, as_json):
    """Post-selected transformation table of the optical network."""
    table = optics.network_sign_table()
    cz_pair = circuits.circuit_unitary(
        circuits.Circuit(3, (circuits.cz(0, 1), circuits.cz(0, 2)))
    ).matrix
    rows = []
    ok = True
    for k in range(8):
        pols = "".join(optics.POLARIZATIONS[(k >> (2 - q)) & 1] for q in range(3))
        expected = cz_pair[k, k].real * optics.NETWORK_BASIS_AMPLITUDE
        out_state = optics.propagate(
            optics.fock_basis_input(pols), optics.cz_network_elements()
        )
        _, success = optics.postselect_coincidence(out_state)
        row_ok = (
            abs(table[pols] - expected) < 1e-12 and abs(success - 1.0 / 27.0) < 1e-12
        )
        ok = ok and row_ok
        rows.append(
            {
                "input": pols,
                "amplitude": table[pols],
                "expected": expected,
                "success_probability": success,
                "ok": row_ok,
            }
        )
    if out:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["input", "amplitude", "expected", "success_probability", "ok"])
        for r in rows:
            writer.writerow(
                [r["input"], _fmt(r["amplitude"]), _fmt(r["expected"]),
                 _fmt(r["success_probability"]), int(r["ok"])]
            )
        Path(out).write_text(buf.getvalue())
    if as_json:
        click.echo(json.dumps(rows, indent=2))
    else:
        for r in rows:
            click.echo(
                f"{r['input']}  amplitude={r['amplitude']:+.6f}  "
                f"expected={r['expected']:+.6f}  p={r['success_probability']:.6f}  "
                f"{'ok' if r['ok'] else 'MISMATCH'}"
            )
    if not ok:
        sys.exit(EXIT_INVARIANT_FAILURE)


def _parse_stage(token: str) -> noise.RateStage:
    if "=" not in token:
        raise ConfigError("stages", f"expected label=value, got {token!r}")
    label, value = token.split("=", 1)
    value = value.strip()
    unit = ""
    scale = 1.0
    for suffix, s in (("khz", 1e3), ("hz", 1.0)):
        if value.lower().endswith(suffix):
            unit = "Hz"
            scale = s
            value = value[: -len(suffix)]
            break
    if "/" in value:
        num, den = value.split("/", 1)
        parsed = float(num) / float(den)
    else:
        parsed = float(value)
    return noise.RateStage(label.strip(), parsed * scale, unit)


@main.command("rates")
@click.option("--stages", default=None, help="Custom pipeline, e.g. 'source=150kHz,transmission=0.8,gate=1/9'.")
@click.option("--json", "as_json", is_flag=True)
def cmd_rates(stages, as_json):
    """Evaluate coincidence-rate pipelines (built-in or custom)."""
    try:
        if stages:
            pipelines = {
                "custom": noise.RatePipeline(
                    tuple(_parse_stage(tok) for tok in stages.split(","))
                )
            }
        else:
            pipelines = {
                "two-photon": noise.two_photon_rate_pipeline(),
                "three-photon": noise.three_photon_rate_pipeline(),
            }
    except (ConfigError, ValueError) as exc:
        click.echo(f"invalid config field 'stages': {exc}", err=True)
        sys.exit(EXIT_INVALID_CONFIG)
    report = {}
    for name, pipeline in pipelines.items():
        rate = noise.rate_pipeline_evaluate(pipeline)
        report[name] = {
            "stages": [
                {"label": s.label, "value": s.value, "unit": s.unit}
                for s in pipeline.stages
            ],
            "rate_hz": rate,
        }
    if as_json:
        click.echo(json.dumps(report, indent=2))
    else:
        for name, info in report.items():
            chain = " * ".join(
                f"{s['value']:g}{s['unit']}" for s in info["stages"]
            )
            click.echo(f"{name}: {chain} = {info['rate_hz']:.6g} Hz")


@main.command("verify")
@click.option("--json", "as_json", is_flag=True)
def cmd_verify(as_json):
    """Run the invariant suite; exit 0 only if every check passes."""
    results = run_checks()
    if as_json:
        click.echo(
            json.dumps(
                [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results],
                indent=2,
            )
        )
    else:
        width = max(len(r.name) for r in results)
        for r in results:
            status = "PASS" if r.passed else "FAIL"
            click.echo(f"[{status}] {r.name:<{width}}  {r.detail}")
    if not all(r.passed for r in results):
        sys.exit(EXIT_INVARIANT_FAILURE)


if __name__ == "__main__":
    main()
