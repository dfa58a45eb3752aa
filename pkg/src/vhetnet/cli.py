"""Scenario runner: parameter sweeps over analytical and simulated metrics, written as CSV.

Scenario files are YAML::

    name: example                 # optional
    params: {h_U: 70, h_A: 200}   # overrides of the default table (config units)
    sweep: {variable: T_dB, values: {start: -10, stop: 20, step: 2}}
    outputs: [coverage, rate, association, los_prob]
    paths: [analytical_exact, analytical_approx, montecarlo]
    T_dB: 5                       # threshold when T_dB is not swept
    n_trials: 10000
    seed: 1
    mode: {kind: bpp3d, H_C: 50}  # simulation mode (standard, bpp3d, tilt)
    series:                       # optional; each entry overrides the keys above
      - {name: urban, params: {environment: urban}}

The sweep variable is any parameter key, ``T_dB``, ``theta_deg`` (LoS
probability) or ``H_C`` (cylinder height of the bpp3d mode).
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import yaml

from .association import assoc_probs
from .channel import fitted_los_probability, itu_los_probability
from .config import CONFIG_KEYS, ITU_ENVIRONMENTS, TIERS, ConfigError, db_to_linear, params_from_config
from .metrics import coverage, rate
from .montecarlo import WORKERS_ENV, Mode, estimate_association, estimate_coverage, estimate_rate, worker_count
from .presets import PRESETS, list_presets

SCHEMA_VERSION = 1
COLUMNS = ["series", "sweep_var", "value", "path", "metric", "result", "ci_low", "ci_high",
           "n_trials", "seed", "runtime_ms", "error"]
PATHS = ("analytical_exact", "analytical_approx", "montecarlo")
OUTPUTS = ("coverage", "rate", "association", "los_prob")
SPECIAL_VARS = ("T_dB", "theta_deg", "H_C")
LOS_FIT_RX_HEIGHT = 10_000.0
_TOP_KEYS = {"name", "params", "sweep", "outputs", "paths", "T_dB", "n_trials", "seed", "mode", "series", "R_sim"}


class ScenarioError(ValueError):
    """A scenario document is malformed; the message names the offending line."""


@dataclass
class Series:
    name: str
    params: dict
    outputs: list
    paths: list
    T_dB: float
    n_trials: int
    seed: int
    mode: Mode
    R_sim: float | None


@dataclass
class Scenario:
    variable: str | None
    values: list
    series: list = field(default_factory=list)


def _key_lines(node, prefix=()) -> dict:
    """Map key paths of a composed YAML node to 1-based line numbers."""
    out = {prefix: node.start_mark.line + 1}
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            key = prefix + (k.value,)
            out[key] = k.start_mark.line + 1
            out.update({p: ln for p, ln in _key_lines(v, key).items() if p != key})
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            out.update(_key_lines(v, prefix + (i,)))
    return out


def _values(spec, where: str) -> list:
    if spec is None:
        return []
    if isinstance(spec, list):
        return spec
    if isinstance(spec, dict) and {"start", "stop", "step"} <= set(spec):
        start, stop, step = (float(spec[k]) for k in ("start", "stop", "step"))
        if step <= 0:
            raise ScenarioError(f"{where}: sweep step must be > 0")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 10) for i in range(max(n, 0))]
    raise ScenarioError(f"{where}: sweep values must be a list or {{start, stop, step}}")


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    """Parse and validate a scenario document."""
    try:
        node = yaml.compose(text)
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}" if mark else source
        raise ScenarioError(f"{where}: cannot parse scenario: {exc}") from exc
    if doc is None:
        doc, lines = {}, {}
    else:
        if not isinstance(doc, dict):
            raise ScenarioError(f"{source}:1: scenario must be a mapping")
        lines = _key_lines(node)

    def where(*path):
        for k in range(len(path), -1, -1):
            if path[:k] in lines:
                return f"{source}:{lines[path[:k]]}"
        return source

    unknown = set(doc) - _TOP_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise ScenarioError(f"{where(key)}: unknown scenario key {key!r}")
    sweep = doc.get("sweep") or {}
    variable = sweep.get("variable")
    if variable is not None and variable not in CONFIG_KEYS and variable not in SPECIAL_VARS:
        raise ScenarioError(f"{where('sweep', 'variable')}: unknown sweep variable {variable!r}")
    values = _values(sweep.get("values"), where("sweep", "values"))

    entries = doc.get("series") or [{}]
    if not isinstance(entries, list):
        raise ScenarioError(f"{where('series')}: series must be a list")
    scenario = Scenario(variable, values)
    for i, entry in enumerate(entries):
        merged = {k: v for k, v in doc.items() if k != "series"}
        params = dict(doc.get("params") or {})
        params.update(entry.get("params") or {})
        merged.update({k: v for k, v in entry.items() if k != "params"})
        bad = set(entry) - _TOP_KEYS
        if bad:
            raise ScenarioError(f"{where('series', i)}: unknown series key {sorted(bad)[0]!r}")
        for key in params:
            if key not in CONFIG_KEYS:
                loc = where("series", i, "params", key) if key in (entry.get("params") or {}) else where("params", key)
                raise ScenarioError(f"{loc}: unknown parameter {key!r}")
        try:
            params_from_config(params)
        except ConfigError as exc:
            raise ScenarioError(f"{where('series', i) if entry else where('params')}: {exc}") from exc
        outputs = list(merged.get("outputs") or ["coverage"])
        paths = list(merged.get("paths") or ["analytical_approx"])
        for o in outputs:
            if o not in OUTPUTS:
                raise ScenarioError(f"{where('outputs')}: unknown output {o!r}; expected one of {OUTPUTS}")
        for p in paths:
            if p not in PATHS:
                raise ScenarioError(f"{where('paths')}: unknown path {p!r}; expected one of {PATHS}")
        try:
            mode = Mode(**(merged.get("mode") or {}))
        except (TypeError, ValueError) as exc:
            raise ScenarioError(f"{where('mode')}: bad simulation mode: {exc}") from exc
        scenario.series.append(Series(
            name=str(merged.get("name", entry.get("name", f"series{i}"))),
            params=params,
            outputs=outputs,
            paths=paths,
            T_dB=float(merged.get("T_dB", 5.0)),
            n_trials=int(merged.get("n_trials", 10000)),
            seed=int(merged.get("seed", 1)),
            mode=mode,
            R_sim=float(merged["R_sim"]) if merged.get("R_sim") is not None else None,
        ))
    return scenario


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


def _point_rows(series: Series, variable, value, timing: bool) -> list[list]:
    """Evaluate one sweep point of one series; failures become rows with an error."""
    cfg = dict(series.params)
    T_dB, mode, theta = series.T_dB, series.mode, None
    if variable == "T_dB":
        T_dB = float(value)
    elif variable == "theta_deg":
        theta = float(value)
    elif variable == "H_C":
        mode = Mode("bpp3d", H_C=float(value)) if mode.kind != "tilt" else mode
    elif variable is not None:
        cfg[variable] = value
    rows = []

    def emit(path, metric, result=None, lo=None, hi=None, n=None, seed=None, ms=None, err=""):
        rows.append([series.name, variable or "", _fmt(value), path, metric, _fmt(result), _fmt(lo), _fmt(hi),
                     _fmt(n), _fmt(seed), _fmt(ms) if timing else "", err])

    try:
        params = params_from_config(cfg)
    except ConfigError as exc:
        for path in series.paths:
            for metric in series.outputs:
                emit(path, metric, err=f"invalid parameters: {exc}")
        return rows
    T = db_to_linear(T_dB)
    mc_kwargs = {} if series.R_sim is None else {"R_sim": series.R_sim}
    for path in series.paths:
        for metric in series.outputs:
            t0 = time.perf_counter()
            try:
                results = _evaluate(path, metric, params, T, theta, mode, series, mc_kwargs)
            except Exception as exc:  # a failing point must not abort the sweep
                names = [f"association_{t.value}" for t in TIERS] if metric == "association" else [metric]
                for name in names:
                    emit(path, name, err=f"{type(exc).__name__}: {exc}")
                continue
            ms = round((time.perf_counter() - t0) * 1000.0, 1)
            for name, res, lo, hi, n, seed in results:
                emit(path, name, res, lo, hi, n, seed, ms)
    return rows


def _evaluate(path, metric, params, T, theta, mode, series, mc_kwargs):
    mc = path == "montecarlo"
    method = "exact" if path == "analytical_exact" else "approx"
    if metric == "los_prob":
        if mc:
            raise ValueError("los_prob has no simulation path")
        if theta is None:
            raise ValueError("los_prob needs the theta_deg sweep variable")
        env = params.environment
        if path == "analytical_exact":
            itu = ITU_ENVIRONMENTS[env.name]
            z = (LOS_FIT_RX_HEIGHT - env.h_T) / math.tan(math.radians(theta))
            val = itu_los_probability(z, env.h_T, LOS_FIT_RX_HEIGHT, itu)
        else:
            val = fitted_los_probability(theta, env)
        return [("los_prob", float(val), None, None, None, None)]
    if metric == "association":
        if mc:
            est = estimate_association(params, series.n_trials, series.seed)
            return [(f"association_{t.value}", est[t].mean, est[t].ci_low, est[t].ci_high, est[t].n_trials,
                     est[t].seed) for t in TIERS]
        a = assoc_probs(params)
        return [(f"association_{t.value}", a[t], None, None, None, None) for t in TIERS]
    if mode.kind != "standard" and not mc:
        raise ValueError(f"the {mode.kind} mode is simulation-only")
    if metric == "coverage":
        if mc:
            e = estimate_coverage(params, T, series.n_trials, series.seed, mode, **mc_kwargs)
            return [("coverage", e.mean, e.ci_low, e.ci_high, e.n_trials, e.seed)]
        return [("coverage", coverage(T, params, method).total, None, None, None, None)]
    if metric == "rate":
        if mc:
            e = estimate_rate(params, series.n_trials, series.seed, mode, **mc_kwargs)
            return [("rate", e.mean, e.ci_low, e.ci_high, e.n_trials, e.seed)]
        return [("rate", rate(params, method).total, None, None, None, None)]
    raise ValueError(f"unknown metric {metric!r}")


def _init_worker():
    # sweep points run in parallel; each simulation stays single-process
    os.environ[WORKERS_ENV] = "1"


def _task(args):
    return _point_rows(*args)


def run_scenario(scenario: Scenario | str, out=None, timing: bool = False, workers: int | None = None) -> str:
    """Evaluate every (series, sweep value, path, metric) and write CSV to ``out`` (also returned)."""
    if isinstance(scenario, str):
        scenario = parse_scenario(scenario)
    tasks = []
    for series in scenario.series:
        values = scenario.values if scenario.variable is not None else [None]
        for v in values:
            tasks.append((series, scenario.variable, v, timing))
    if scenario.variable is not None and not scenario.values:
        tasks = []
    w = worker_count() if workers is None else workers
    if w > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=w, initializer=_init_worker) as pool:
            chunks = list(pool.map(_task, tasks))  # ordered like tasks
    else:
        chunks = [_task(t) for t in tasks]
    buf = io.StringIO()
    buf.write(f"# vhetnet-csv schema {SCHEMA_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for rows in chunks:
        writer.writerows(rows)
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vhetnet", description=__doc__.splitlines()[0])
    parser.add_argument("scenario", nargs="?", help="scenario YAML file")
    parser.add_argument("--preset", help="run a built-in scenario instead of a file")
    parser.add_argument("--list-presets", action="store_true", help="list built-in scenarios and exit")
    parser.add_argument("--show-preset", metavar="NAME", help="print a built-in scenario document and exit")
    parser.add_argument("--seed", type=int, help="override the simulation seed")
    parser.add_argument("--trials", type=int, help="override the number of simulation trials")
    parser.add_argument("--paths", help="comma-separated subset of " + ",".join(PATHS))
    parser.add_argument("--out", help="CSV output file (default: standard output)")
    parser.add_argument("--timing", action="store_true",
                        help="fill the runtime_ms column (output is then no longer byte-reproducible)")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_presets:
        width = max(len(n) for n, _ in list_presets())
        for name, figure in list_presets():
            print(f"{name:<{width}}  {figure}")
        return 0
    if args.show_preset:
        if args.show_preset not in PRESETS:
            parser.error(f"unknown preset {args.show_preset!r}")
        print(PRESETS[args.show_preset].text, end="")
        return 0
    if bool(args.preset) == bool(args.scenario):
        parser.error("give exactly one of a scenario file or --preset")
    if args.preset:
        if args.preset not in PRESETS:
            parser.error(f"unknown preset {args.preset!r}; see --list-presets")
        text, source = PRESETS[args.preset].text, f"preset:{args.preset}"
    else:
        try:
            with open(args.scenario, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            parser.error(str(exc))
        source = args.scenario
    try:
        scenario = parse_scenario(text, source)
        if args.paths:
            paths = [p.strip() for p in args.paths.split(",") if p.strip()]
            for p in paths:
                if p not in PATHS:
                    raise ScenarioError(f"--paths: unknown path {p!r}")
            for s in scenario.series:
                s.paths = paths
        for s in scenario.series:
            if args.seed is not None:
                s.seed = args.seed
            if args.trials is not None:
                if args.trials < 1:
                    raise ScenarioError("--trials must be >= 1")
                s.n_trials = args.trials
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            run_scenario(scenario, fh, timing=args.timing)
    else:
        run_scenario(scenario, sys.stdout, timing=args.timing)
    return 0


if __name__ == "__main__":
    sys.exit(main())
