"""``mrc-grid``: sweep, optimize, simulate, and verify from the shell.

Every output file starts with one ``#`` comment line carrying the JSON run
manifest (subcommand, scenario, resolved parameters, output paths, tool
version, timestamp); the CSV body below it is byte-reproducible for a given
manifest.  Data goes to the requested output paths, diagnostics to stderr;
a nonzero exit code always means something went wrong (for ``verify``, that
a property failed).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import sweep
from .centralized import minimize_ptx
from .circuit import ScenarioError, SystemScenario
from .distributed import NoFeasibleTrialsError, ProtocolConfig, batch_run, run_protocol
from .scenario_io import load_scenario
from .verify import run_verification

__all__ = ["RunManifest", "main"]


@dataclass(frozen=True)
class RunManifest:
    """What produced an output file, embedded as its first comment line."""

    subcommand: str
    scenario: str
    parameters: dict
    outputs: tuple[str, ...]
    version: str = __version__
    timestamp: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )

    def header_line(self) -> str:
        payload = {
            "subcommand": self.subcommand,
            "scenario": self.scenario,
            "parameters": self.parameters,
            "outputs": list(self.outputs),
            "version": self.version,
            "timestamp": self.timestamp,
        }
        return "# " + json.dumps(payload, sort_keys=True)


def _fmt(value: float) -> str:
    """17 significant decimal digits: round-trips doubles exactly."""
    return format(float(value), ".16e")


def _write_csv(path: str, manifest: RunManifest, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(manifest.header_line() + "\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _parse_grid(spec: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "log"):
        raise ScenarioError(
            f"--grid must be lo:hi:count or lo:hi:count:log (got {spec!r})"
        )
    try:
        lo, hi = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError:
        raise ScenarioError(f"--grid has non-numeric parts (got {spec!r})") from None
    if not (lo > 0 and hi >= lo and count >= 1):
        raise ScenarioError(f"--grid needs 0 < lo <= hi and count >= 1 (got {spec!r})")
    if len(parts) == 4:
        return np.geomspace(lo, hi, count)
    return np.linspace(lo, hi, count)


def _parse_fixed(spec: str | None, n: int, swept: int) -> dict[int, float]:
    """Parse ``x2=7.5,x3=7.5`` into 0-based index -> value."""
    fixed: dict[int, float] = {}
    if not spec:
        return fixed
    for item in spec.split(","):
        key, _, value = item.partition("=")
        key = key.strip()
        if not key.startswith("x") or not value:
            raise ScenarioError(f"--fixed entries must look like x2=7.5 (got {item!r})")
        try:
            idx = int(key[1:]) - 1
        except ValueError:
            raise ScenarioError(f"--fixed entry has no receiver number: {item!r}") from None
        if not 0 <= idx < n:
            raise ScenarioError(f"--fixed receiver x{idx + 1} out of range 1..{n}")
        if idx == swept:
            raise ScenarioError(f"--fixed receiver x{idx + 1} is the swept receiver")
        try:
            fixed[idx] = float(value)
        except ValueError:
            raise ScenarioError(f"--fixed value is not a number: {item!r}") from None
    return fixed


def _cmd_sweep(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    n_idx = args.receiver - 1
    if not 0 <= n_idx < scenario.n:
        raise ScenarioError(f"--receiver must be in 1..{scenario.n} (got {args.receiver})")
    grid = _parse_grid(args.grid)
    fixed = _parse_fixed(args.fixed, scenario.n, n_idx)

    missing = [k for k in range(scenario.n) if k != n_idx and k not in fixed]
    if missing:
        names = ",".join(f"x{k + 1}" for k in missing)
        raise ScenarioError(f"--fixed must cover every non-swept receiver (missing {names})")

    loads = [0.0] * scenario.n
    loads[n_idx] = float(grid[0])
    for k, v in fixed.items():
        loads[k] = v

    rows = sweep(scenario, loads, n_idx, grid)
    manifest = RunManifest(
        subcommand="sweep",
        scenario=str(args.scenario),
        parameters={
            "receiver": args.receiver,
            "grid": args.grid,
            "fixed": {f"x{k + 1}": v for k, v in sorted(fixed.items())},
        },
        outputs=(args.out,),
    )
    header = [f"x_{args.receiver}", "p_tx"] + [f"p_{k + 1}" for k in range(scenario.n)] + ["p_sum"]
    _write_csv(
        args.out,
        manifest,
        header,
        (
            [_fmt(x)] + [_fmt(rep.p_tx)] + [_fmt(p) for p in rep.p] + [_fmt(rep.p_sum)]
            for x, rep in rows
        ),
    )
    return 0


def _cmd_optimize(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    result = minimize_ptx(scenario, dz=args.dz)
    manifest = RunManifest(
        subcommand="optimize",
        scenario=str(args.scenario),
        parameters={"dz": args.dz},
        outputs=(args.out,),
    )
    header = (
        ["status", "z_star", "p_tx"]
        + [f"x_{k + 1}" for k in range(scenario.n)]
        + [f"p_{k + 1}" for k in range(scenario.n)]
    )
    if result.is_optimal:
        row = (
            ["optimal", _fmt(result.z_star), _fmt(result.report.p_tx)]
            + [_fmt(v) for v in result.loads]
            + [_fmt(p) for p in result.report.p]
        )
    else:
        row = ["infeasible"] + [""] * (2 + 2 * scenario.n)
    _write_csv(args.out, manifest, header, [row])
    if not result.is_optimal:
        print(
            f"optimize: no feasible load setting ({result.iterations} candidates examined)",
            file=sys.stderr,
        )
    return 0


def _trace_rows(scenario: SystemScenario, trace) -> list[list[str]]:
    xs = list(trace.initial)
    rows = []
    for step in trace.records:
        xs[step.agent] = step.x_new
        rows.append(
            [str(step.iteration), str(step.agent + 1),
             "".join(str(b) for b in step.feedback), step.case.name]
            + [_fmt(v) for v in xs]
            + [_fmt(step.report.p_tx)]
            + [_fmt(p) for p in step.report.p]
        )
    return rows


def _cmd_simulate(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    config = ProtocolConfig(dx=args.dx, k_max=args.kmax, seed=args.seed)
    parameters = {
        "dx": args.dx,
        "kmax": args.kmax,
        "trials": args.trials,
        "seed": args.seed,
    }
    outputs = (args.out,) + ((args.trace,) if args.trace else ())
    manifest = RunManifest(
        subcommand="simulate",
        scenario=str(args.scenario),
        parameters=parameters,
        outputs=outputs,
    )

    if args.trace:
        trace = run_protocol(scenario, config, record=True)
        header = (
            ["iter", "n", "fb_bits", "case"]
            + [f"x_{k + 1}" for k in range(scenario.n)]
            + ["p_tx"]
            + [f"p_{k + 1}" for k in range(scenario.n)]
        )
        _write_csv(args.trace, manifest, header, _trace_rows(scenario, trace))

    try:
        summary = batch_run(scenario, config, trials=args.trials)
    except NoFeasibleTrialsError as exc:
        print(f"simulate: {exc}", file=sys.stderr)
        return 1

    _write_csv(
        args.out,
        manifest,
        ["trials", "n_feasible", "n_infeasible", "n_converged", "mean_ptx_feasible"],
        [
            [
                str(summary.trials),
                str(summary.n_feasible),
                str(summary.n_infeasible),
                str(summary.n_converged),
                _fmt(summary.mean_ptx_feasible),
            ]
        ],
    )
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    if args.trials < 1:
        raise ScenarioError(f"--trials must be >= 1 (got {args.trials})")
    report = run_verification(scenario, trials=args.trials, seed=args.seed)
    payload = report.to_dict()
    payload["scenario"] = str(args.scenario)
    payload["trials"] = args.trials
    json.dump(payload, sys.stdout, indent=2)
    print()
    return 0 if report.all_passed else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mrc-grid",
        description=(
            "Model a one-transmitter multi-receiver resonant power link, "
            "optimize its load resistances, and simulate the receiver-side "
            "adjustment protocol."
        ),
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("sweep", help="power curves along one receiver's load")
    p.add_argument("--scenario", required=True, help="scenario file or bundled name")
    p.add_argument("--receiver", required=True, type=int, help="swept receiver (1-based)")
    p.add_argument("--grid", required=True, help="lo:hi:count[:log]")
    p.add_argument("--fixed", help="other loads, e.g. x2=7.5,x3=7.5")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("optimize", help="minimum transmit power meeting all demands")
    p.add_argument("--scenario", required=True)
    p.add_argument("--dz", type=float, default=1e-3, help="sweep step (default 1e-3)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("simulate", help="batch of distributed-protocol runs")
    p.add_argument("--scenario", required=True)
    p.add_argument("--dx", type=float, default=1e-3, help="probe/update step")
    p.add_argument("--kmax", type=int, default=100_000, help="max agent steps per run")
    p.add_argument("--trials", type=int, default=1, help="number of seeded runs")
    p.add_argument("--seed", type=int, default=0, help="seed of the first trial")
    p.add_argument("--trace", help="CSV path for the first trial's full trace")
    p.add_argument("--out", required=True, help="summary CSV path")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("verify", help="run the numerical verification suite")
    p.add_argument("--scenario", required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"mrc-grid {args.subcommand}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"mrc-grid {args.subcommand}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
