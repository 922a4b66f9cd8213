"""Command line runner: every experiment writes one CSV.

Usage::

    python3 -m graphpurify <subcommand> [--config cfg.json] [flags] [--output out.csv]

Flags override values from the JSON config.  Validation failures print
``{"code", "message", "field"}`` as JSON on stderr and exit with status 2.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Any, Callable, Sequence

import numpy as np

from . import analysis, oracle
from .breeding import ring_yield_curve
from .diag import DiagState, NoiseParams, StateError, diag_from_json, white_noise_from_x, white_noise_state
from .graphs import Coloring, Graph, GraphError, color_graph, derive_gj, edge_graph, graph_from_json, ring
from .purification import (
    PurificationError,
    channel_state,
    merge_states,
    prepare_auxiliary,
    run_schedule,
    schedule_from_json,
    subprotocol_pj,
)

SUBCOMMANDS = ("purify", "breed-yield", "threshold", "fixed-point", "compare", "oracle-check")


class ConfigError(ValueError):
    def __init__(self, code: str, message: str, field_name: str | None = None):
        super().__init__(message)
        self.code = code
        self.field = field_name

    def to_json(self) -> dict:
        return {"code": self.code, "message": str(self), "field": self.field}


@dataclass
class ExperimentConfig:
    """Everything a run needs; unset fields fall back to the ring experiments."""

    graph: dict | None = None
    coloring: list[list[int]] | None = None
    scenario: str = "communication"
    strategy: str | None = None
    p_l: list[float] = field(default_factory=lambda: [1.0])
    q: list[float] = field(default_factory=lambda: [analysis.START_KNOB])
    p_m: float = 1.0
    schedule: Any = None
    initial: dict | None = None
    f_grid: list[float] | None = None
    ideal: bool = False
    samples: int = 20
    seed: int = 0
    workers: int = 1
    noisy_merge: bool = False
    skip_idle: bool = False
    output: str = "-"

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise ConfigError("UNKNOWN_FIELD", f"unknown config field {unknown[0]!r}", unknown[0])
        return cls(**d)

    def options(self) -> analysis.StrategyOptions:
        return analysis.StrategyOptions(noisy_merge=self.noisy_merge, skip_idle=self.skip_idle)

    def resolve_graph(self) -> Graph:
        if self.graph is None:
            return ring(5)
        try:
            return graph_from_json(self.graph)
        except (GraphError, KeyError, TypeError, ValueError) as e:
            raise ConfigError("BAD_GRAPH", str(e), "graph") from e

    def resolve_coloring(self, g: Graph) -> Coloring:
        try:
            return color_graph(g, self.coloring)
        except GraphError as e:
            raise ConfigError("BAD_COLORING", str(e), "coloring") from e

    def validate(self, command: str) -> None:
        for name in ("p_l", "q"):
            grid = getattr(self, name)
            if not isinstance(grid, list) or not grid:
                raise ConfigError("EMPTY_GRID", f"{name} grid must be a nonempty list", name)
            for v in grid:
                if not isinstance(v, (int, float)) or not 0.0 <= v <= 1.0:
                    raise ConfigError("BAD_VALUE", f"{name} value {v!r} outside [0, 1]", name)
        if any(v == 0.0 for v in self.p_l):
            raise ConfigError("BAD_VALUE", "p_l must be positive", "p_l")
        if self.scenario not in analysis.SCENARIOS:
            raise ConfigError("BAD_VALUE", f"scenario must be one of {analysis.SCENARIOS}", "scenario")
        if self.workers < 1:
            raise ConfigError("BAD_VALUE", "workers must be >= 1", "workers")
        if command in ("fixed-point", "threshold") and self.strategy is None:
            raise ConfigError("MISSING_FIELD", "strategy is required", "strategy")
        if self.strategy is not None and self.strategy.upper() not in analysis.STRATEGIES:
            raise ConfigError("BAD_VALUE", f"strategy must be one of {analysis.STRATEGIES}", "strategy")
        if command == "threshold" and self.ideal and self.strategy.upper() not in ("MEPP", "BEPP"):
            raise ConfigError("BAD_VALUE", "ideal thresholds exist for MEPP and BEPP only", "strategy")


# ---------------------------------------------------------------------------
# CSV helpers


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(rows: list[dict], columns: Sequence[str], out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])


def _pool_map(fn: Callable, items: list, workers: int) -> list:
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# subcommands


def _initial_state(cfg: ExperimentConfig, g: Graph):
    init = cfg.initial or {"kind": "white", "f": 0.9}
    kind = init.get("kind", "white")
    try:
        if kind == "white":
            if "x" in init:
                return white_noise_from_x(g, float(init["x"]))
            return white_noise_state(g, float(init.get("f", 0.9)))
        if kind == "channel":
            return channel_state(g, float(init["q"]), int(init.get("creator", 0)))
        if kind == "state":
            return diag_from_json(init["state"])
    except (KeyError, StateError, ValueError) as e:
        raise ConfigError("BAD_INITIAL", str(e), "initial") from e
    raise ConfigError("BAD_INITIAL", f"unknown initial kind {kind!r}", "initial")


def cmd_purify(cfg: ExperimentConfig):
    g = cfg.resolve_graph()
    c = cfg.resolve_coloring(g)
    try:
        sched = schedule_from_json(cfg.schedule if cfg.schedule is not None else
                                   {"steps": [{"color": j, "aux": "fresh"} for j in range(c.k)], "cycles": "converge"})
        sched.validate(c)
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError("BAD_SCHEDULE", str(e), "schedule") from e
    rho = _initial_state(cfg, g)
    rows = []
    for p_l in cfg.p_l:
        for q in cfg.q:
            noise = NoiseParams(p_l=p_l, q=q, p_m=cfg.p_m)
            res = run_schedule(rho, sched, c, noise)
            cum = 1.0
            rows.append({"p_l": p_l, "q": q, "step": 0, "label": "initial", "fidelity": rho.fidelity,
                         "p_success": 1.0, "cumulative_success": 1.0})
            for i, rep in enumerate(res.reports, 1):
                cum *= rep.p_success
                rows.append({"p_l": p_l, "q": q, "step": i, "label": rep.label, "fidelity": rep.fidelity,
                             "p_success": rep.p_success, "cumulative_success": cum})
    return rows, ["p_l", "q", "step", "label", "fidelity", "p_success", "cumulative_success"]


def cmd_breed_yield(cfg: ExperimentConfig):
    grid = cfg.f_grid if cfg.f_grid is not None else [round(0.8 + 0.005 * i, 10) for i in range(41)]
    if not grid:
        raise ConfigError("EMPTY_GRID", "f_grid must be nonempty", "f_grid")
    g = cfg.resolve_graph()
    if g != ring(g.n):
        raise ConfigError("BAD_GRAPH", "breed-yield runs on ring graphs", "graph")
    rows = ring_yield_curve(grid, g.n)
    return rows, list(rows[0].keys())


def _threshold_cell(args):
    strategy, scenario, p_l, opts = args
    f_min, knob = analysis.min_required_fidelity(strategy, scenario, p_l, opts=opts)
    return {"strategy": strategy, "scenario": scenario, "p_l": p_l, "F_min": f_min, "knob_min": knob,
            "LNE_Fmin": analysis.lne(f_min) if f_min is not None else None}


def cmd_threshold(cfg: ExperimentConfig):
    strategy = cfg.strategy.upper()
    if cfg.ideal:
        if strategy == "MEPP":
            x = analysis.ideal_threshold_mepp(opts=cfg.options())
            method = "bisection on purification success"
        else:
            x = analysis.ideal_threshold_bepp()
            method = "PPT minimum eigenvalue root"
        if x is None:
            raise ConfigError("UNREACHABLE", "no threshold found in (0, 1)", "strategy")
        row = {"strategy": strategy, "x_threshold": x, "f_threshold": x + (1 - x) / 32, "method": method}
        return [row], ["strategy", "x_threshold", "f_threshold", "method"]
    cells = [(strategy, cfg.scenario, p_l, cfg.options()) for p_l in cfg.p_l]
    rows = _pool_map(_threshold_cell, cells, cfg.workers)
    return rows, ["strategy", "scenario", "p_l", "F_min", "knob_min", "LNE_Fmin"]


def _fixed_point_cell(args):
    strategy, scenario, p_l, q, opts = args
    r = analysis.fixed_point_fmax(strategy, p_l, scenario, start=q, opts=opts)
    return {"scenario": scenario, "strategy": strategy, "p_l": p_l, "q": q, "F_max": r.fidelity,
            "LNE_Fmax": analysis.lne(r.fidelity), "iterations": r.rounds, "converged": r.converged}


def cmd_fixed_point(cfg: ExperimentConfig):
    strategy = cfg.strategy.upper()
    cells = [(strategy, cfg.scenario, p_l, q, cfg.options()) for p_l in cfg.p_l for q in cfg.q]
    rows = _pool_map(_fixed_point_cell, cells, cfg.workers)
    return rows, ["scenario", "strategy", "p_l", "q", "F_max", "LNE_Fmax", "iterations", "converged"]


COMPARE_COLUMNS = [
    "scenario", "strategy", "p_l", "q", "F_max", "F_min", "LNE_Fmax", "LNE_Fmin", "q_min", "iterations",
    "converged", "bepp_step", "notes",
]


def _compare_cell(args):
    strategy, scenario, p_l, opts = args
    return analysis.strategy_outcome(strategy, scenario, p_l, opts=opts).row()


def cmd_compare(cfg: ExperimentConfig):
    strategies = [cfg.strategy.upper()] if cfg.strategy else list(analysis.STRATEGIES)
    cells = [(s, cfg.scenario, p_l, cfg.options()) for p_l in cfg.p_l for s in strategies]
    rows = _pool_map(_compare_cell, cells, cfg.workers)
    summary = []
    for p_l in cfg.p_l:
        outs = [analysis.StrategyOutcome(**{k: v for k, v in r.items() if k != "bepp_step"})
                for r in rows if r["p_l"] == p_l]
        if len(outs) == len(analysis.STRATEGIES):
            summary.append({"p_l": p_l, "fmax_ordered": analysis.fmax_ordered(outs),
                            "fmin_inverted": analysis.fmin_inverted(outs)})
    return rows, COMPARE_COLUMNS, summary


def _random_diag(rng, g):
    return DiagState(g, rng.dirichlet(np.ones(1 << g.n)))


def cmd_oracle_check(cfg: ExperimentConfig):
    g = cfg.resolve_graph()
    if 2 * g.n > oracle.MAX_QUBITS:
        raise ConfigError("ORACLE_LIMIT", f"{2 * g.n} qubits exceed the oracle limit of {oracle.MAX_QUBITS}", "graph")
    c = cfg.resolve_coloring(g)
    rng = np.random.default_rng(cfg.seed)
    p_l = cfg.p_l[0]
    noise = NoiseParams(p_l=p_l, p_m=cfg.p_m)
    rows = []
    for i in range(cfg.samples):
        for j in range(c.k):
            gj = derive_gj(g, c, j)
            a, b, a2 = _random_diag(rng, g), _random_diag(rng, gj), _random_diag(rng, g)
            rep = subprotocol_pj(a, b, c, j, noise)
            o, p, off = oracle.subprotocol_circuit(a, b, c, j, p_l, cfg.p_m)
            rows.append({"sample": i, "op": f"P_{j}", "n": g.n, "max_abs_diff": float(np.abs(rep.out.lam - o.lam).max()),
                         "p_diff": abs(rep.p_success - p), "max_offdiag": off})
            for variant in ("plain", "purifying"):
                rep = prepare_auxiliary(a, a2, c, j, variant, noise)
                o, p, off = oracle.prepare_auxiliary_circuit(a, a2, c, j, gj, variant == "purifying", p_l, cfg.p_m)
                rows.append({"sample": i, "op": f"aux_{j}:{variant}", "n": g.n,
                             "max_abs_diff": float(np.abs(rep.out.lam - o.lam).max()),
                             "p_diff": abs(rep.p_success - p), "max_offdiag": off})
        e = _random_diag(rng, edge_graph())
        if g.n + 2 <= oracle.MAX_QUBITS:
            rep = merge_states(a, 0, e, 0, NoiseParams(p_l=p_l))
            o, off = oracle.merge_circuit(a, 0, e, 0, p_l)
            rows.append({"sample": i, "op": "merge", "n": g.n + 1, "max_abs_diff": float(np.abs(rep.out.lam - o.lam).max()),
                         "p_diff": 0.0, "max_offdiag": off})
    return rows, ["sample", "op", "n", "max_abs_diff", "p_diff", "max_offdiag"]


COMMANDS = {
    "purify": cmd_purify,
    "breed-yield": cmd_breed_yield,
    "threshold": cmd_threshold,
    "fixed-point": cmd_fixed_point,
    "compare": cmd_compare,
    "oracle-check": cmd_oracle_check,
}


# ---------------------------------------------------------------------------
# entry point


def _float_list(s: str) -> list[float]:
    try:
        return [float(v) for v in s.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"not a comma separated list of numbers: {s!r}") from e


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="graphpurify", description="Graph-state purification experiments")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file with ExperimentConfig fields")
        p.add_argument("--output", "-o", help="CSV path, '-' for stdout")
        p.add_argument("--scenario", choices=analysis.SCENARIOS)
        p.add_argument("--strategy", type=str.upper, choices=analysis.STRATEGIES)
        p.add_argument("--p_l", "--p-l", dest="p_l", type=_float_list, help="comma separated p_l grid")
        p.add_argument("--q", type=_float_list, help="comma separated q grid")
        p.add_argument("--p_m", "--p-m", dest="p_m", type=float)
        p.add_argument("--f-grid", dest="f_grid", type=_float_list)
        p.add_argument("--ideal", action="store_true", default=None)
        p.add_argument("--samples", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--noisy-merge", dest="noisy_merge", action="store_true", default=None)
        p.add_argument("--skip-idle", dest="skip_idle", action="store_true", default=None)
    return ap


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    data: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except OSError as e:
            raise ConfigError("CONFIG_IO", str(e), "config") from e
        except json.JSONDecodeError as e:
            raise ConfigError("CONFIG_PARSE", str(e), "config") from e
        if not isinstance(data, dict):
            raise ConfigError("CONFIG_PARSE", "config must be a JSON object", "config")
    for k, v in vars(args).items():
        if k in ("command", "config") or v is None:
            continue
        data[k] = v
    try:
        return ExperimentConfig.from_dict(data)
    except TypeError as e:
        raise ConfigError("CONFIG_PARSE", str(e), None) from e


def run(command: str, cfg: ExperimentConfig) -> tuple[str, list[dict]]:
    """Execute one subcommand; returns the CSV text and an optional summary."""
    cfg.validate(command)
    out = COMMANDS[command](cfg)
    rows, columns = out[0], out[1]
    summary = out[2] if len(out) > 2 else []
    buf = io.StringIO()
    write_csv(rows, columns, buf)
    return buf.getvalue(), summary


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        text, summary = run(args.command, cfg)
    except ConfigError as e:
        print(json.dumps(e.to_json()), file=sys.stderr)
        return 2
    except (PurificationError, GraphError, StateError, oracle.OracleError, analysis.AnalysisError) as e:
        print(json.dumps({"code": type(e).__name__, "message": str(e), "field": None}), file=sys.stderr)
        return 3
    if cfg.output in ("-", None):
        sys.stdout.write(text)
    else:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)
    for s in summary:
        print(json.dumps(s), file=sys.stderr)
    if any(not (s["fmax_ordered"] and s["fmin_inverted"]) for s in summary):
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
