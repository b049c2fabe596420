"""Command-line front end.

Subcommands: classify, simulate, mu-sweep, find-rstar, basin, examples,
levelsets. Every command reads a TOML config (plus dotted --set
overrides), writes delimited output, and renders figures next to it where
a picture helps. Exit codes: 0 on success regardless of verdict, 2 for
invalid configs or inputs, 3 for numeric failures.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import classify as cls
from .config_io import (
    FIXTURE_NAMES,
    dump_config,
    load_config_with_overrides,
    load_fixture,
)
from .geometry import Segment, SegmentLeavesRegionError, growth_integral, mu_of_r
from .model import ReactorConfig
from .plots import (
    save_levelsets_figure,
    save_mu_sweep_figure,
    save_projection_figure,
    save_trajectory_figure,
)
from .simulate import IntegratorSettings, RunResult, run

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_NUMERIC = 3

# grids over this size fan out to a process pool
_POOL_THRESHOLD = 64

REPORT_KEY_ORDER = (
    "vbar", "region_of_input", "mu_r", "r_star", "sigma", "rho",
    "rho_at_sigma", "s_hat_plus", "periodic_x_post", "periodic_x_pre",
    "n_rho", "n_bar", "x_threshold", "verdict",
)


def _fmt_float(v: float) -> str:
    return repr(float(v))


def _fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        return _fmt_float(v)
    if isinstance(v, (tuple, list)):
        return ";".join(_fmt_cell(x) for x in v)
    return str(v)


def report_to_rows(report: cls.AnalysisReport) -> list[tuple[str, str]]:
    """Flat key,value rows in the fixed key order. Vectors join with
    semicolons; an undefined r_star prints as the word none."""
    values = {
        "vbar": report.vbar,
        "region_of_input": report.region_of_input.region,
        "mu_r": report.mu_r,
        "r_star": "none" if report.r_star is None else report.r_star,
        "sigma": report.sigma,
        "rho": report.rho,
        "rho_at_sigma": report.rho_at_sigma,
        "s_hat_plus": report.s_hat_plus,
        "periodic_x_post": report.periodic_x_post,
        "periodic_x_pre": report.periodic_x_pre,
        "n_rho": report.n_rho,
        "n_bar": report.n_bar,
        "x_threshold": report.x_threshold,
        "verdict": report.verdict,
    }
    return [(key, _fmt_cell(values[key])) for key in REPORT_KEY_ORDER]


def report_to_json_doc(report: cls.AnalysisReport) -> dict:
    def clean(v):
        if isinstance(v, float) and math.isnan(v):
            return None
        if isinstance(v, tuple):
            return [clean(x) for x in v]
        return v

    doc = {
        "vbar": clean(report.vbar),
        "region_of_input": report.region_of_input.region,
        "mu_r": report.mu_r,
        "r_star": "none" if report.r_star is None else report.r_star,
        "sigma": report.sigma,
        "rho": report.rho,
        "rho_at_sigma": report.rho_at_sigma,
        "s_hat_plus": clean(report.s_hat_plus),
        "periodic_x_post": report.periodic_x_post,
        "periodic_x_pre": report.periodic_x_pre,
        "n_rho": report.n_rho,
        "n_bar": report.n_bar,
        "x_threshold": report.x_threshold,
        "verdict": report.verdict,
    }
    return doc


def render_report(report: cls.AnalysisReport, fmt: str) -> str:
    if fmt == "json-doc":
        return json.dumps(report_to_json_doc(report), indent=2) + "\n"
    lines = ["key,value"]
    lines += [f"{k},{v}" for k, v in report_to_rows(report)]
    return "\n".join(lines) + "\n"


def tightest_resource_index(cfg: ReactorConfig) -> int:
    """1-based index of the resource with the least headroom above its
    region threshold; resource 1 never qualifies. Ties go to the lowest."""
    vb = cls.vbar(cfg)
    return int(np.argmax(vb[1:])) + 2


def write_trajectory_csv(cfg: ReactorConfig, result: RunResult, path: Path) -> None:
    j = tightest_resource_index(cfg)
    header = (["t"] + [f"s{i + 1}" for i in range(cfg.n)] + ["x", "phase"]
              + ["proj_s1", f"proj_s{j}"])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for t, s, x, phase in result.trajectory:
            row = [_fmt_float(t)] + [_fmt_float(v) for v in s] + [_fmt_float(x), phase]
            row += [_fmt_float(s[0]), _fmt_float(s[j - 1])]
            w.writerow(row)


def write_cycles_csv(cfg: ReactorConfig, result: RunResult, path: Path) -> None:
    header = (["k", "t_minus", "duration"]
              + [f"s{i + 1}_minus" for i in range(cfg.n)] + ["x_minus"]
              + [f"s{i + 1}_plus" for i in range(cfg.n)] + ["x_plus"])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for rec in result.cycles:
            row = [str(rec.index), _fmt_float(rec.t_minus), _fmt_float(rec.duration)]
            row += [_fmt_float(v) for v in rec.state_minus.s]
            row.append(_fmt_float(rec.state_minus.x))
            row += [_fmt_float(v) for v in rec.state_plus.s]
            row.append(_fmt_float(rec.state_plus.x))
            w.writerow(row)


def _parse_s0(text: str, n: int) -> np.ndarray:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != n:
        raise ValueError(f"--s0 needs {n} comma-separated values, got {len(parts)}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError as exc:
        raise ValueError(f"--s0 entries must be numbers: {exc}") from None


def _parse_grid_axis(text: str) -> list[float]:
    if ":" in text:
        pieces = text.split(":")
        if len(pieces) != 3:
            raise ValueError(f"grid component {text!r} must be lo:hi:count")
        lo, hi = float(pieces[0]), float(pieces[1])
        count = int(pieces[2])
        if count < 1:
            raise ValueError(f"grid count in {text!r} must be at least 1")
        if count == 1:
            return [lo]
        return list(np.linspace(lo, hi, count))
    return [float(text)]


def _load_cfg(args) -> ReactorConfig:
    if args.config is None:
        raise ValueError("--config is required for this command")
    return load_config_with_overrides(args.config, args.set or [])


def _out_dir(args) -> Path:
    out = Path(args.out) if args.out else Path(".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_classify(args) -> int:
    cfg = _load_cfg(args)
    s0 = _parse_s0(args.s0, cfg.n) if args.s0 else None
    report = cls.build_report(cfg, s0=s0, x0=args.x0)
    text = render_report(report, args.format)
    sys.stdout.write(text)
    if args.out:
        out = _out_dir(args)
        ext = "json" if args.format == "json-doc" else "csv"
        (out / f"report.{ext}").write_text(text)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load_cfg(args)
    if args.s0 is None or args.x0 is None:
        raise ValueError("simulate requires both --s0 and --x0")
    s0 = _parse_s0(args.s0, cfg.n)
    result = run(cfg, s0, args.x0, samples_per_cycle=400)
    out = _out_dir(args)
    write_trajectory_csv(cfg, result, out / "trajectory.csv")
    write_cycles_csv(cfg, result, out / "cycles.csv")
    if result.trajectory:
        save_trajectory_figure(cfg, result.trajectory, out / "trajectory.png")
        save_projection_figure(cfg, result.trajectory,
                               tightest_resource_index(cfg), out / "projection.png")
    o = result.outcome
    print(f"outcome,{o.kind}")
    print(f"cycles_completed,{o.cycles_completed}")
    print(f"final_t,{_fmt_float(o.final_state.t)}")
    print(f"final_x,{_fmt_float(o.final_state.x)}")
    if o.limit_x_post is not None:
        print(f"limit_x_post,{_fmt_float(o.limit_x_post)}")
    return EXIT_OK


def _sweep_grid(cfg: ReactorConfig) -> tuple[list[float], list[float]]:
    rs = [i / 200.0 for i in range(1, 201)]
    return rs, [mu_of_r(cfg, r) for r in rs]


def cmd_mu_sweep(args) -> int:
    cfg = _load_cfg(args)
    rs, mus = _sweep_grid(cfg)
    rstar = cls.r_star(cfg)
    out = _out_dir(args)
    with open(out / "mu_sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "mu", "note"])
        rows = [(r, mu, "") for r, mu in zip(rs, mus)]
        if rstar is not None:
            rows.append((rstar, mu_of_r(cfg, rstar), "r_star"))
            rows.sort(key=lambda row: row[0])
        for r, mu, note in rows:
            w.writerow([_fmt_float(r), _fmt_float(mu), note])
    save_mu_sweep_figure(rs, mus, rstar, out / "mu_sweep.png")
    print(f"r_star,{'none' if rstar is None else _fmt_float(rstar)}")
    return EXIT_OK


def cmd_find_rstar(args) -> int:
    cfg = _load_cfg(args)
    rstar = cls.r_star(cfg)
    mu_full = mu_of_r(cfg, 1.0)
    if args.format == "json-doc":
        doc = {"r_star": "none" if rstar is None else rstar,
               "mu_at_full_exchange": mu_full}
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    else:
        sys.stdout.write("key,value\n")
        sys.stdout.write(f"r_star,{'none' if rstar is None else _fmt_float(rstar)}\n")
        sys.stdout.write(f"mu_at_full_exchange,{_fmt_float(mu_full)}\n")
    return EXIT_OK


def _basin_point(task):
    cfg, rho_value, point = task
    verdict = cls.region_of(cfg, point)
    if verdict.region != cls.REGION_OMEGA1:
        return point, verdict.region, None
    horizon = cls.n_rho(cfg, point, rho_value)
    terms = cls.iterate_prefix_terms(cfg, point, horizon)
    prefix = np.cumsum(terms)
    return point, verdict.region, float(-prefix.min())


def _map_maybe_parallel(fn, tasks):
    if len(tasks) <= _POOL_THRESHOLD:
        return [fn(t) for t in tasks]
    try:
        with ProcessPoolExecutor(max_workers=min(8, os.cpu_count() or 1)) as pool:
            return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // 64)))
    except (OSError, PermissionError):
        # sandboxes without process spawning fall back to serial
        return [fn(t) for t in tasks]


def cmd_basin(args) -> int:
    cfg = _load_cfg(args)
    if args.s0 is None:
        raise ValueError("basin requires --s0 with lo:hi:count grid components")
    axes = [_parse_grid_axis(p.strip()) for p in args.s0.split(",")]
    if len(axes) != cfg.n:
        raise ValueError(f"--s0 needs {cfg.n} comma-separated components, got {len(axes)}")
    for v in axes[0]:
        if v < cfg.s1_bar - 1e-10:
            raise ValueError(
                f"grid value s1={v!r} sits below the decant threshold {cfg.s1_bar!r}")
    rho_value = cls.rho(cfg).value

    points = [np.array(p) for p in itertools.product(*axes)]
    tasks = [(cfg, rho_value, p) for p in points]
    results = _map_maybe_parallel(_basin_point, tasks)

    out = _out_dir(args)
    with open(out / "basin.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"s{i + 1}" for i in range(cfg.n)] + ["region", "x_threshold"])
        for point, region, threshold in results:
            row = [_fmt_float(v) for v in point]
            row += [region, "" if threshold is None else _fmt_float(threshold)]
            w.writerow(row)
    print(f"points,{len(results)}")
    return EXIT_OK


def _levelset_point(task):
    cfg, s = task
    try:
        if s[0] <= cfg.s1_bar:
            return math.nan
        return growth_integral(Segment(np.array(s), cfg))
    except (SegmentLeavesRegionError, ValueError):
        return math.nan


def cmd_levelsets(args) -> int:
    cfg = _load_cfg(args)
    if cfg.n < 2:
        raise ValueError("levelsets needs at least two resources")
    base = _parse_s0(args.s0, cfg.n) if args.s0 else cfg.s_in_array()
    s1_axis = np.linspace(cfg.s1_bar, cfg.s_in[0], 101)
    s2_axis = np.linspace(cfg.s_in[1] * 1e-3, cfg.s_in[1], 101)

    tasks = []
    for s2 in s2_axis:
        for s1 in s1_axis:
            s = base.copy()
            s[0], s[1] = s1, s2
            tasks.append((cfg, tuple(s)))
    flat = _map_maybe_parallel(_levelset_point, tasks)
    values = np.array(flat).reshape(len(s2_axis), len(s1_axis))

    out = _out_dir(args)
    with open(out / "levelsets.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s1", "s2", "gain"])
        k = 0
        for s2 in s2_axis:
            for s1 in s1_axis:
                w.writerow([_fmt_float(s1), _fmt_float(s2), _fmt_cell(float(flat[k]))])
                k += 1
    G1, G2 = np.meshgrid(s1_axis, s2_axis)
    save_levelsets_figure(G1, G2, values, cfg.s1_bar, out / "levelsets.png")
    print(f"points,{len(tasks)}")
    return EXIT_OK


# reference values for the bundled configurations, checked by the examples
# command; entries are (example, quantity, reference, tolerance, note)
_REFERENCE_ROWS = (
    ("EX2", "mu_at_operating_r", -0.2924, 1e-3, ""),
    ("EX3", "mu_at_operating_r", 0.0037, 5e-4, ""),
    ("EX3", "x_threshold_from_probe_start", 0.2981, 3e-3, ""),
    ("EX3", "first_discounted_gain_from_probe_start", -0.1766, 1e-3, ""),
    ("EX3", "vbar_2", -0.375, 1e-12, ""),
    ("EX3", "vbar_3", -0.375, 1e-12, ""),
    ("EX1", "vbar_2", -0.20, 1e-6,
     "recorded value is inconsistent with this configuration; recomputation kept"),
    ("EX1", "vbar_3", 0.52, 1e-6,
     "recorded value is inconsistent with this configuration; recomputation kept"),
)

_EX3_PROBE_START = (0.3, 0.01, 1.0)


def _example_quantities(name: str, cfg: ReactorConfig) -> dict[str, float]:
    out: dict[str, float] = {}
    vb = cls.vbar(cfg)
    out["vbar_2"] = float(vb[1])
    out["vbar_3"] = float(vb[2])
    if name in ("EX2", "EX3"):
        out["mu_at_operating_r"] = mu_of_r(cfg, cfg.r)
    if name == "EX3":
        out["x_threshold_from_probe_start"] = cls.x_threshold(cfg, _EX3_PROBE_START)
        out["first_discounted_gain_from_probe_start"] = (
            cls.iterate_prefix_terms(cfg, _EX3_PROBE_START, 1)[0])
    return out


def _write_run_outputs(cfg: ReactorConfig, result: RunResult, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(cfg, result, out / "trajectory.csv")
    write_cycles_csv(cfg, result, out / "cycles.csv")
    if result.trajectory:
        save_trajectory_figure(cfg, result.trajectory, out / "trajectory.png")
        save_projection_figure(cfg, result.trajectory,
                               tightest_resource_index(cfg), out / "projection.png")


def cmd_examples(args) -> int:
    out = _out_dir(args)
    summary_rows = []
    computed: dict[tuple[str, str], float] = {}

    for name in FIXTURE_NAMES:
        cfg = load_fixture(name)
        ex_dir = out / name
        ex_dir.mkdir(parents=True, exist_ok=True)
        (ex_dir / "config.toml").write_text(dump_config(cfg))
        report = cls.build_report(cfg)
        (ex_dir / "report.csv").write_text(render_report(report, "csv"))
        for key, value in _example_quantities(name, cfg).items():
            computed[(name, key)] = value

        if name == "EX1":
            result = run(cfg, (0.6, 0.7, 0.8), 0.5, samples_per_cycle=300)
            _write_run_outputs(cfg, result, ex_dir / "run_washout")
        elif name == "EX2":
            result = run(cfg, cfg.s_in, 0.5, samples_per_cycle=300)
            _write_run_outputs(cfg, result, ex_dir / "run_washout")
        else:
            result = run(cfg, _EX3_PROBE_START, 0.29, samples_per_cycle=300)
            _write_run_outputs(cfg, result, ex_dir / "run_washout")
            result = run(cfg, _EX3_PROBE_START, 0.31, samples_per_cycle=300)
            _write_run_outputs(cfg, result, ex_dir / "run_converges")
            rs, mus = _sweep_grid(cfg)
            rstar = cls.r_star(cfg)
            with open(ex_dir / "mu_sweep.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["r", "mu"])
                for r, mu in zip(rs, mus):
                    w.writerow([_fmt_float(r), _fmt_float(mu)])
            save_mu_sweep_figure(rs, mus, rstar, ex_dir / "mu_sweep.png")

    for name, quantity, reference, tol, note in _REFERENCE_ROWS:
        value = computed[(name, quantity)]
        diff = abs(value - reference)
        summary_rows.append((name, quantity, value, reference, diff, diff <= tol, note))

    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["example", "quantity", "computed", "reference",
                    "abs_diff", "within_tol", "note"])
        for name, quantity, value, reference, diff, ok, note in summary_rows:
            w.writerow([name, quantity, _fmt_float(value), _fmt_float(reference),
                        _fmt_float(diff), "true" if ok else "false", note])

    mismatches = sum(1 for row in summary_rows if not row[5])
    print(f"examples,{len(FIXTURE_NAMES)}")
    print(f"summary_rows,{len(summary_rows)}")
    print(f"flagged,{mismatches}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scf",
        description="Analysis and simulation of an impulsively emptied-and-refilled "
                    "culture with several essential resources.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="TOML configuration file")
        p.add_argument("--s0", help="comma-separated start concentrations "
                                    "(basin also accepts lo:hi:count components)")
        p.add_argument("--x0", type=float, help="starting biomass")
        p.add_argument("--out", help="output directory (default: current)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config entry, e.g. --set r=0.5")
        p.add_argument("--format", choices=("csv", "json-doc"), default="csv",
                       help="document format for report-style output")
        p.set_defaults(func=func)
        return p

    add("classify", cmd_classify,
        "static analysis report for a config and optional start")
    add("simulate", cmd_simulate,
        "event-driven run from --s0/--x0; writes trajectory and cycle tables plus figures")
    add("mu-sweep", cmd_mu_sweep,
        "per-cycle gain across the full range of decant fractions")
    add("find-rstar", cmd_find_rstar,
        "critical decant fraction, or none when no fraction sustains growth")
    add("basin", cmd_basin,
        "minimum viable biomass over a grid of start concentrations")
    add("examples", cmd_examples,
        "regenerate the bundled worked examples and their comparison table")
    add("levelsets", cmd_levelsets,
        "per-arc gain field over the first two resource coordinates")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except RuntimeError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
