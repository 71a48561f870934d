"""Command-line front end: generate, analyze, testbench, montecarlo, contract.

Exit codes: 0 all diagnostics pass, 2 violations found, 1 error.  Reports are
JSON with sorted keys so identical configs and seeds reproduce byte-identical
files.  The environment variable PATHSTAT_SEED supplies a seed when neither
the flag nor the generator spec carries one.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path as FsPath
from typing import Sequence

import numpy as np

from .config import AnalysisConfig
from .contraction import adversarial_contraction, validate_contraction
from .generators import format_spec, generate, parse_spec
from .pathcore import (
    IntervalPattern,
    Path,
    PathParseError,
    density_trajectory,
    occurrence_set,
    read_path_file,
    write_path,
)
from .stattests import (
    apply_moving_window,
    calibrate_test_size,
    make_builtin_test,
)
from .suite import report_dict, run_suite

__all__ = ["main", "RunConfig"]

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATIONS = 2


@dataclass
class RunConfig:
    """Flag-level knobs shared by the analysis commands."""

    grid_cells: int = 8
    k_max: int = 2
    tail_fraction: float = 0.5
    tolerance: float = 0.02
    violation_floor_count: float = 5.0
    positive_floor_count: float = 10.0
    t_slack: float = 0.01
    ergodicity_tolerance: float = 0.05
    seed: int | None = None
    out_dir: str = "."

    def analysis_config(self) -> AnalysisConfig:
        return AnalysisConfig(
            grid_cells=self.grid_cells,
            k_max=self.k_max,
            tail_fraction=self.tail_fraction,
            tolerance=self.tolerance,
            violation_floor_count=self.violation_floor_count,
            positive_floor_count=self.positive_floor_count,
            t_slack=self.t_slack,
            ergodicity_tolerance=self.ergodicity_tolerance,
        )


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file whose keys override flags")
    parser.add_argument("--grid-cells", type=int, default=8)
    parser.add_argument("--k-max", type=int, default=2)
    parser.add_argument("--tail-fraction", type=float, default=0.5)
    parser.add_argument("--tolerance", type=float, default=0.02)
    parser.add_argument("--violation-floor-count", type=float, default=5.0)
    parser.add_argument("--positive-floor-count", type=float, default=10.0)
    parser.add_argument("--t-slack", type=float, default=0.01)
    parser.add_argument("--ergodicity-tolerance", type=float, default=0.05)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out-dir", default=".")


def _run_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(
        grid_cells=args.grid_cells,
        k_max=args.k_max,
        tail_fraction=args.tail_fraction,
        tolerance=args.tolerance,
        violation_floor_count=args.violation_floor_count,
        positive_floor_count=args.positive_floor_count,
        t_slack=args.t_slack,
        ergodicity_tolerance=args.ergodicity_tolerance,
        seed=args.seed,
        out_dir=args.out_dir,
    )
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            overrides = json.load(fh)
        valid = {f.name for f in fields(RunConfig)}
        for key, value in overrides.items():
            if key not in valid:
                raise ValueError(f"unknown config key {key!r}")
            setattr(cfg, key, value)
    return cfg


def _env_seed() -> int | None:
    raw = os.environ.get("PATHSTAT_SEED")
    return int(raw) if raw else None


def _resolve_input(text: str, seed: int | None) -> tuple[Path, dict]:
    """A file path, or "generate:<spec>" for a synthetic path."""
    if text.startswith("generate:"):
        spec = parse_spec(text[len("generate:"):])
        if seed is not None:
            spec = spec.with_seed(seed)
        elif spec.seed is None:
            env = _env_seed()
            if env is not None:
                spec = spec.with_seed(env)
        return generate(spec), {"generator": format_spec(spec),
                                "seed": spec.seed}
    return read_path_file(text), {"file": text}


def _write_json(path: FsPath, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


# ---------------------------------------------------------------------------
# subcommands

def cmd_generate(args: argparse.Namespace) -> int:
    spec = parse_spec(args.spec)
    if spec.seed is None and args.seed is not None:
        spec = spec.with_seed(args.seed)
    if spec.seed is None:
        env = _env_seed()
        if env is not None:
            spec = spec.with_seed(env)
    path = generate(spec)
    if args.out and args.out != "-":
        write_path(path.values, args.out)
    else:
        write_path(path.values, sys.stdout)
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    path, provenance = _resolve_input(args.input, cfg.seed)
    config = cfg.analysis_config()
    result = run_suite(path, config)
    report = report_dict(result)
    report["input"] = provenance
    report["length"] = path.length

    out_dir = FsPath(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "report.json", report)
    _write_trajectories(out_dir / "density_trajectories.csv", path, result)

    status = "pass" if report["overall_pass"] else "violations found"
    print(f"analyze: {status}; report written to {out_dir / 'report.json'}")
    return EXIT_OK if report["overall_pass"] else EXIT_VIOLATIONS


def _write_trajectories(target: FsPath, path: Path, result) -> None:
    """Level-1 cell density trajectories, subsampled for plotting."""
    grid = result.diagnostics.fdd.grids[1]
    horizon = path.length
    step = max(1, horizon // 4000)
    rows = np.arange(1, horizon + 1)[step - 1::step]
    columns = []
    for cell in grid.cells:
        occ = occurrence_set(path, cell)
        traj = density_trajectory(occ, horizon)
        columns.append(traj.ratios[step - 1::step])
    with open(target, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n"] + [cell.label() for cell in grid.cells])
        for i, n in enumerate(rows):
            writer.writerow([int(n)] + [f"{col[i]:.8g}" for col in columns])


def _load_test_specs(path: str) -> list[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        specs = json.load(fh)
    if not isinstance(specs, list) or not specs:
        raise ValueError("test spec file must hold a non-empty JSON list")
    return specs


def _test_from_spec(spec: dict, default_seed: int | None):
    kind = spec["kind"]
    n = int(spec["n"])
    alpha = float(spec.get("alpha", 0.05))
    if "tau" in spec:
        tau = float(spec["tau"])
        calibration = None
    else:
        cal_spec = spec.get("calibration")
        if not cal_spec:
            raise ValueError(
                f"test {kind!r} needs either tau or a calibration block")
        gen = parse_spec(cal_spec["generator"])
        seed = int(cal_spec.get("seed", default_seed if default_seed is not None else 0))
        calibration = calibrate_test_size(
            kind, n, alpha, gen,
            replicates=int(cal_spec.get("replicates", 2000)), seed=seed)
        tau = calibration.tau
    return make_builtin_test(kind, n, tau, alpha,
                             name=spec.get("name")), calibration


def cmd_testbench(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    path, provenance = _resolve_input(args.input, cfg.seed)
    config = cfg.analysis_config()
    specs = _load_test_specs(args.tests)
    out_dir = FsPath(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = []
    for i, spec in enumerate(specs):
        test, calibration = _test_from_spec(spec, cfg.seed)
        record = apply_moving_window(path, test,
                                     start=int(spec.get("start", 0)),
                                     stride=int(spec.get("stride", 1)),
                                     config=config)
        csv_name = f"rejections_{i:02d}_{test.params.get('kind', 'test')}.csv"
        with open(out_dir / csv_name, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["offset", "indicator"])
            offsets = record.start + record.stride * np.arange(record.indicators.size)
            for off, ind in zip(offsets, record.indicators):
                writer.writerow([int(off), int(ind)])
        entry = {
            "name": test.name,
            "kind": spec["kind"],
            "n": test.window,
            "alpha": test.nominal_size,
            "tau": test.params["tau"],
            "upper_density": record.upper_density,
            "tail_profile": [[r, v] for r, v in record.tail_profile],
            "compliant": record.upper_density
                         <= test.nominal_size + config.test_slack,
            "indicators_csv": csv_name,
        }
        if calibration is not None:
            entry["calibration"] = {
                "tau_stderr": calibration.stderr,
                "replicates": calibration.replicates,
                "seed": calibration.seed,
            }
        summary.append(entry)
        print(f"{test.name}: upper_density={record.upper_density:.4f} "
              f"alpha={test.nominal_size} "
              f"{'compliant' if entry['compliant'] else 'EXCEEDS'}")
    _write_json(out_dir / "testbench_summary.json",
                {"input": provenance, "tests": summary})
    return EXIT_OK


DEFAULT_MC_GENERATORS = (
    "ar1(0.5),L=100000",
    "iid_normal(0,1),L=100000",
    "random_phase_sine(theta=1.4142135623730951),L=100000",
    "constant(2),L=100000",
)


def cmd_montecarlo(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    config = cfg.analysis_config()
    seed = cfg.seed if cfg.seed is not None else _env_seed()
    if seed is None:
        seed = int(np.random.SeedSequence().generate_state(1)[0])
        print(f"montecarlo: no seed given, recording generated seed {seed}")
    gen_texts = args.generators or list(DEFAULT_MC_GENERATORS)
    if args.replicates < 1:
        raise ValueError("replicates must be at least 1")
    table = []
    for gi, text in enumerate(gen_texts):
        spec = parse_spec(text)
        passes = 0
        for r in range(args.replicates):
            child = int(np.random.SeedSequence([seed, gi, r]).generate_state(1)[0])
            path = generate(spec.with_seed(child))
            passes += run_suite(path, config).passed
        fraction = passes / args.replicates
        stderr = math.sqrt(max(fraction * (1 - fraction), 0.0) / args.replicates)
        table.append({
            "generator": format_spec(spec),
            "replicates": args.replicates,
            "passes": passes,
            "fraction": fraction,
            "stderr": stderr,
        })
        print(f"{spec.kind}: {passes}/{args.replicates} pass "
              f"({fraction:.3f} +- {stderr:.3f})")
    out_dir = FsPath(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "montecarlo.json", {"seed": seed, "table": table})
    return EXIT_OK


def cmd_contract(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    path, provenance = _resolve_input(args.input, cfg.seed)
    config = cfg.analysis_config()
    pattern = IntervalPattern.of((args.cell[0], args.cell[1]))
    schedule = tuple(int(m) for m in args.m_schedule.split(","))
    trace = adversarial_contraction(path, pattern, schedule,
                                    threshold=args.threshold, config=config)
    payload: dict = {
        "input": provenance,
        "pattern": pattern.label(),
        "threshold": trace.threshold,
        "m_schedule": list(trace.m_schedule),
        "failed": trace.failed,
    }
    if trace.failed:
        payload["failure_reason"] = trace.failure_reason
        payload["last_feasible_m"] = trace.last_feasible_m
    else:
        assert trace.result is not None
        validation = validate_contraction(trace.result, path.length, config)
        payload["contraction"] = trace.result.to_json_dict()
        payload["target_density"] = trace.target_density
        payload["validation"] = {
            "ordering_ok": validation.ordering_ok,
            "growth_ok": validation.growth_ok,
            "coverage_ok": validation.coverage_ok,
            "passed": validation.passed,
        }
    out = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        FsPath(args.out).write_text(out + "\n", encoding="utf-8")
    else:
        print(out)
    if args.trace:
        trace_payload = {
            "m_schedule": list(trace.m_schedule),
            "threshold": trace.threshold,
            "n_markers": list(trace.n_markers),
            "v0": {str(m): v.tolist() for m, v in trace.v0.items()},
            "v1": {str(m): v.tolist() for m, v in trace.v1.items()},
            "v2": {str(m): v.tolist() for m, v in trace.v2.items()},
            "h_blocks": {str(m): [list(b) for b in blocks]
                         for m, blocks in trace.h_blocks.items()},
        }
        _write_json(FsPath(args.trace), trace_payload)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathstat",
        description="Path-level stationarity diagnostics and moving-window tests")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="write a synthetic path")
    p_gen.add_argument("--spec", required=True,
                       help='e.g. "ar1(0.5),L=100000,seed=7"')
    p_gen.add_argument("--out", default="-")
    p_gen.add_argument("--seed", type=int, default=None)
    p_gen.set_defaults(func=cmd_generate)

    p_an = sub.add_parser("analyze", help="full diagnostic suite on one path")
    p_an.add_argument("input", help='path file or "generate:<spec>"')
    _add_config_flags(p_an)
    p_an.set_defaults(func=cmd_analyze)

    p_tb = sub.add_parser("testbench", help="moving-window rejection densities")
    p_tb.add_argument("input")
    p_tb.add_argument("--tests", required=True,
                      help="JSON file with a list of test specs")
    _add_config_flags(p_tb)
    p_tb.set_defaults(func=cmd_testbench)

    p_mc = sub.add_parser("montecarlo", help="suite pass rates over seeds")
    p_mc.add_argument("--generators", nargs="*", default=None)
    p_mc.add_argument("--replicates", type=int, default=20)
    _add_config_flags(p_mc)
    p_mc.set_defaults(func=cmd_montecarlo)

    p_ct = sub.add_parser("contract", help="adversarial contraction search")
    p_ct.add_argument("input")
    p_ct.add_argument("--cell", nargs=2, type=float, required=True,
                      metavar=("A", "B"))
    p_ct.add_argument("--threshold", type=float, default=None)
    p_ct.add_argument("--m-schedule", default="4,8,16,32")
    p_ct.add_argument("--trace", default=None,
                      help="write the full construction trace to this file")
    p_ct.add_argument("--out", default=None)
    _add_config_flags(p_ct)
    p_ct.set_defaults(func=cmd_contract)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PathParseError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
