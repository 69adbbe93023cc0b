"""Command-line front end.

Subcommands: run, table, mesh, boundary, compare-1d.  ``run`` accepts a JSON
config file; command-line flags override its values.  Output goes to
--out, else $HWLOD_OUTPUT_DIR, else the config's output_dir.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis
from .bs1d import Bs1dProblem, make_boundary_profiles, solve_bs1d, write_boundary_csv
from .lod2d import LodConfig, SolverError, solve, write_field_csv
from .mesh import (
    Grid2D,
    SinhOrigin,
    SinhStrike,
    Uniform,
    axis_spec_from_dict,
    build_axis,
    write_axis_csv,
)
from .model import DomainBox, MarketParams, payoff_from_dict
from .problems import manufactured, pricing_problem, tp1, tp2, tp3
from .tridiag import SingularSystemError

log = logging.getLogger("hwlod")

ENV_OUT = "HWLOD_OUTPUT_DIR"
PROBLEMS = ("tp1", "tp2", "tp3", "manufactured", "custom")
ARTIFACTS = ("final", "snapshots", "boundary", "diagnostics")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    problem: str = "tp1"
    params: dict | None = None
    box: dict | None = None
    payoff: dict | None = None
    x_axis: dict = field(default_factory=lambda: {"kind": "uniform", "N": 64})
    y_axis: dict = field(default_factory=lambda: {"kind": "uniform", "N": 64})
    K: int = 128
    weight_x: float = 0.5
    homogeneous: bool = False
    output_dir: str = "hwlod-out"
    artifacts: list = field(default_factory=lambda: ["final", "diagnostics"])
    snapshot_steps: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        extra = sorted(set(data) - known)
        if extra:
            raise ConfigError(f"config: unknown field(s) {', '.join(extra)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.problem not in PROBLEMS:
            raise ConfigError(f"config.problem: expected one of {PROBLEMS}, got {self.problem!r}")
        if not isinstance(self.K, int) or self.K < 1:
            raise ConfigError(f"config.K: must be an integer >= 1, got {self.K!r}")
        if not 0.0 <= self.weight_x <= 1.0:
            raise ConfigError(f"config.weight_x: must lie in [0, 1], got {self.weight_x}")
        bad = [a for a in self.artifacts if a not in ARTIFACTS]
        if bad:
            raise ConfigError(f"config.artifacts: unknown artifact(s) {bad}; expected {ARTIFACTS}")
        if any((not isinstance(s, int)) or s < 0 or s > self.K for s in self.snapshot_steps):
            raise ConfigError(f"config.snapshot_steps: entries must be integers in [0, K={self.K}]")
        if self.problem == "custom":
            for name in ("params", "box", "payoff"):
                if getattr(self, name) is None:
                    raise ConfigError(f"config.{name}: required for the custom problem")
        if self.problem == "tp2" and self.payoff is not None and "B" not in self.payoff:
            raise ConfigError("config.payoff.B: required for tp2")
        for name in ("x_axis", "y_axis"):
            try:
                axis_spec_from_dict(getattr(self, name))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"config.{name}: {exc}") from None
        try:
            self.build_problem()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"config: {exc}") from None

    def build_problem(self):
        if self.problem == "custom":
            params = MarketParams(**self.params)
            box = DomainBox(**self.box)
            return pricing_problem("custom", params, box, payoff_from_dict(self.payoff), self.homogeneous)
        base = {"tp1": tp1, "tp2": tp2, "tp3": tp3}.get(self.problem)
        if base is not None:
            proto = base()
            params = MarketParams(**self.params) if self.params else proto.params
            box = DomainBox(**self.box) if self.box else proto.box
            payoff = payoff_from_dict(self.payoff) if self.payoff else proto.payoff
            homog = self.homogeneous or self.problem == "tp3"
            return pricing_problem(self.problem, params, box, payoff, homog)
        params = MarketParams(**self.params) if self.params else MarketParams(0.1, 1.0, 0.1, 0.9)
        box = DomainBox(**self.box) if self.box else DomainBox(1.0, 1.0, 1.0, 0.01)
        return manufactured(params, box)

    def grid(self, problem) -> Grid2D:
        box = problem.box
        return Grid2D(build_axis(axis_spec_from_dict(self.x_axis), 0.0, box.X),
                      build_axis(axis_spec_from_dict(self.y_axis), box.zeta, box.Y))


def resolve_config(args) -> RunConfig:
    data = RunConfig().to_dict()
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config file {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file: top level must be a JSON object")
        data.update(loaded)
    if args.problem:
        data["problem"] = args.problem
    if args.n is not None:
        data["x_axis"] = dict(data["x_axis"], N=args.n)
    if args.m is not None:
        data["y_axis"] = dict(data["y_axis"], N=args.m)
    if args.x_mesh:
        data["x_axis"] = _mesh_flag(args, data)
    if args.k is not None:
        data["K"] = args.k
    if args.zeta is not None:
        if data.get("box"):
            box = dict(data["box"])
        else:
            box = dataclasses.asdict(RunConfig(**{**data, "box": None}).build_problem().box)
        box["zeta"] = args.zeta
        data["box"] = box
    if args.artifacts:
        data["artifacts"] = args.artifacts.split(",")
    if args.snapshots:
        data["snapshot_steps"] = [int(s) for s in args.snapshots.split(",")]
    env_out = os.environ.get(ENV_OUT)
    if args.out:
        data["output_dir"] = args.out
    elif env_out:
        data["output_dir"] = env_out
    try:
        return RunConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(f"config: {exc}") from None


def _mesh_flag(args, data) -> dict:
    n = data["x_axis"].get("N", 64)
    if args.x_mesh == "uniform":
        return {"kind": "uniform", "N": n}
    X = (data.get("box") or {}).get("X", 100.0 if data["problem"] != "manufactured" else 1.0)
    if args.x_mesh == "sinh-origin":
        return {"kind": "sinh-origin", "N": n, "d": X / args.d_div}
    E = args.strike if args.strike is not None else 57.0
    return {"kind": "sinh-strike", "N": n, "E": E, "c": E / args.c_div}


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    if args.print_config:
        print(json.dumps(cfg.to_dict(), indent=2, sort_keys=True))
        return 0
    problem = cfg.build_problem()
    grid = cfg.grid(problem)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    bnd = problem.boundary(grid, cfg.K)
    rec = solve(problem, grid, LodConfig(cfg.K, cfg.weight_x, tuple(cfg.snapshot_steps)), boundaries=bnd)
    written = []
    if "final" in cfg.artifacts:
        path = out / "final_field.csv"
        write_field_csv(rec.final, grid, path)
        written.append(path)
    if "snapshots" in cfg.artifacts:
        for k, snap in sorted(rec.snapshots.items()):
            path = out / f"snapshot_{k:05d}.csv"
            write_field_csv(snap, grid, path)
            written.append(path)
    if "boundary" in cfg.artifacts:
        path = out / "boundary_profiles.csv"
        write_boundary_csv(bnd, grid, path)
        written.append(path)
    report = _diagnostics(problem, rec)
    if "diagnostics" in cfg.artifacts:
        path = out / "diagnostics.json"
        path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
        written.append(path)
    print(f"min value over all steps: {report['min_value']:.6g} "
          f"({'nonnegative' if report['nonnegative'] else 'NEGATIVE'})")
    print(f"M-matrix check: {'pass' if report['m_matrix'] else 'FAIL'}")
    for p in written:
        print(f"wrote {p}")
    return 0


def _diagnostics(problem, rec) -> dict:
    bad_rows = [j for j, r in enumerate(rec.x_reports) if not r]
    return {
        "problem": problem.name,
        "K": int(rec.min_values.size - 1),
        "min_value": rec.min_over_time,
        "nonnegative": bool(rec.min_over_time >= -1e-12),
        "min_per_step": [float(v) for v in rec.min_values],
        "min_y_load": float(rec.load_min.min()) if rec.load_min.size else None,
        "m_matrix": rec.matrices_ok,
        "x_rows_failing": bad_rows,
        "y_matrix": bool(rec.y_report) if rec.y_report is not None else None,
    }


def cmd_table(args) -> int:
    out = _out_dir(args)
    blocks = analysis.run_table(args.id, args.max_n, args.ref_n,
                                on_row=lambda row: log.info("%s %s", row.label, row.errors))
    text = analysis.format_table(blocks)
    print(text, end="")
    out.mkdir(parents=True, exist_ok=True)
    analysis.write_table_csv(blocks, out / f"{args.id}.csv")
    (out / f"{args.id}.txt").write_text(text)
    print(f"wrote {out / (args.id + '.csv')}")
    return 0


def cmd_mesh(args) -> int:
    if args.spec == "uniform":
        spec = Uniform(args.n)
    elif args.spec == "sinh-origin":
        spec = SinhOrigin(args.n, (args.hi - args.lo) / args.d_div)
    else:
        spec = SinhStrike(args.n, args.strike, args.strike / args.c_div)
    axis = build_axis(spec, args.lo, args.hi)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"axis_{args.spec}_{args.n}.csv"
    write_axis_csv(axis, path)
    print(f"wrote {path}")
    return 0


def cmd_boundary(args) -> int:
    cfg = resolve_config(args)
    problem = cfg.build_problem()
    grid = cfg.grid(problem)
    bnd = problem.boundary(grid, cfg.K)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "boundary_profiles.csv"
    write_boundary_csv(bnd, grid, path)
    print(f"wrote {path}")
    return 0


def cmd_compare(args) -> int:
    cfg = resolve_config(args)
    problem = cfg.build_problem()
    if problem.payoff is None:
        raise ConfigError("compare-1d: needs a pricing problem (tp1, tp2, tp3 or custom)")
    grid = cfg.grid(problem)
    y = grid.y_axis.nodes
    j = int(np.argmin(np.abs(y - args.sigma**2)))
    rec = solve(problem, grid, LodConfig(cfg.K, cfg.weight_x, check_matrices=False))
    one = Bs1dProblem(args.sigma, problem.params.r, problem.payoff, grid.x_axis, cfg.K,
                      problem.box.T, problem.params.beta)
    u1 = solve_bs1d(one)[-1]
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"compare_1d_sigma{args.sigma:g}.csv"
    with open(path, "w") as fh:
        fh.write("i,x,y_slice,value_2d,value_1d\n")
        for i, x in enumerate(grid.x_axis.nodes):
            fh.write(f"{i},{x:.17g},{y[j]:.17g},{rec.final.values[i, j]:.17g},{u1[i]:.17g}\n")
    print(f"y slice {y[j]:.6g} (sqrt = {math.sqrt(y[j]):.4f}) for sigma={args.sigma}")
    print(f"wrote {path}")
    return 0


def _out_dir(args) -> Path:
    return Path(args.out or os.environ.get(ENV_OUT) or "hwlod-out")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--problem", choices=PROBLEMS)
    p.add_argument("--n", type=int, help="x intervals")
    p.add_argument("--m", type=int, help="y intervals")
    p.add_argument("--k", type=int, help="time steps")
    p.add_argument("--zeta", type=float, help="variance floor")
    p.add_argument("--x-mesh", choices=("uniform", "sinh-origin", "sinh-strike"))
    p.add_argument("--d-div", type=float, default=700.0, help="sinh-origin d = X / d_div")
    p.add_argument("--c-div", type=float, default=5.0, help="sinh-strike c = E / c_div")
    p.add_argument("--strike", type=float, help="sinh-strike centre")
    p.add_argument("--artifacts", help=f"comma list from {','.join(ARTIFACTS)}")
    p.add_argument("--snapshots", help="comma list of time-step indices")
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hwlod", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="solve one problem and write CSV output")
    _add_run_flags(p)
    p.add_argument("--print-config", action="store_true", help="echo the resolved config and exit")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("table", help="reproduce a convergence table")
    p.add_argument("--id", required=True, choices=[f"t{i}" for i in range(1, 7)])
    p.add_argument("--max-n", type=int, help="truncate the mesh ladder")
    p.add_argument("--ref-n", type=int, help="override the reference mesh size")
    p.add_argument("--out")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("mesh", help="dump a 1D axis")
    p.add_argument("--spec", required=True, choices=("uniform", "sinh-origin", "sinh-strike"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--lo", type=float, default=0.0)
    p.add_argument("--hi", type=float, default=100.0)
    p.add_argument("--d-div", type=float, default=700.0)
    p.add_argument("--strike", type=float, default=57.0)
    p.add_argument("--c-div", type=float, default=5.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_mesh)

    p = sub.add_parser("boundary", help="dump the Dirichlet edge profiles")
    _add_run_flags(p)
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("compare-1d", help="2D slice at y = sigma^2 against the 1D solver")
    _add_run_flags(p)
    p.add_argument("--sigma", type=float, required=True)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SolverError, SingularSystemError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
