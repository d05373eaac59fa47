"""Command-line front end: ``ansflow <subcommand> [flags]``.

Exit codes: 0 success, 2 configuration error, 3 blow-up, 4 check-suite failure.
"""
from __future__ import annotations

import argparse
import json
import sys

from ansflow import experiments as ex
from ansflow.io import write_ansf, write_csv
from ansflow.nonlinear import e_functional
from ansflow.norms import norm_report_rows
from ansflow.solver import solve_u, solve_w, write_snapshots

EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP, EXIT_CHECK = 0, 2, 3, 4

COMMANDS = ("gen", "norm", "evolve", "evolve-w", "sweep-eps", "smallness", "compare", "check")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _grid_arg(s: str) -> tuple:
    try:
        dims = tuple(int(x) for x in s.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected n1,n2,n3") from None
    if len(dims) != 3 or min(dims) < 1:
        raise argparse.ArgumentTypeError("expected three positive integers n1,n2,n3")
    return dims


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--grid", type=_grid_arg, help="n1,n2,n3")
    common.add_argument("--nu-h", type=float, dest="nu_h")
    common.add_argument("--nu-3", type=float, dest="nu_3")
    common.add_argument("--p", type=float)
    common.add_argument("--input", help="ANSF file used as initial data")
    parser = _Parser(prog="ansflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "gen": "write initial data as an ANSF file",
        "norm": "static norms and the smallness functional of the data",
        "evolve": "direct solve of the full system",
        "evolve-w": "Friedrichs solve of the remainder w = u - u_F",
        "sweep-eps": "oscillatory-data scaling sweep with slope fits",
        "smallness": "w growth over a ladder of data amplitudes",
        "compare": "continuous dependence on the data",
        "check": "property suites, JSON report",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def _overrides(args) -> dict:
    o = {"output.dir": args.out, "seed": args.seed, "solver.nu_h": args.nu_h,
         "solver.nu_3": args.nu_3, "besov.p": args.p}
    if args.grid:
        o.update({"grid.n1": args.grid[0], "grid.n2": args.grid[1], "grid.n3": args.grid[2]})
    if args.input:
        o.update({"data.kind": "file", "data.input": args.input})
    return o


def _run_record(result, cfg, path) -> int:
    result.record.to_csv(path, cfg.param_tuple())
    rec = result.record
    print(f"steps={len(rec.times) - 1} final_energy={rec.energy[-1]:.6g} "
          f"max_div_residual={rec.max_div_residual:.3g} b012={result.accumulator.b012():.6g}")
    if rec.blew_up:
        print(f"blow-up: {rec.message}", file=sys.stderr)
        return EXIT_BLOWUP
    return EXIT_OK


def dispatch(cfg: ex.ExperimentConfig) -> int:
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    cmd = cfg.command
    if cmd == "gen":
        u = ex.make_data(cfg)
        write_ansf(out / "u0.ansf", u)
        print(f"wrote {out / 'u0.ansf'} div_residual={u.divergence_residual():.3g} "
              f"l2={u.l2_norm():.6g}")
        return EXIT_OK
    if cmd == "norm":
        u = ex.make_data(cfg)
        rows = norm_report_rows(u, cfg.besov)
        ef = e_functional(u, cfg.besov)
        nan = float("nan")
        rows += [("E_besov_part", cfg.besov.p, nan, nan, ef.besov_part),
                 ("E_forcing_part", cfg.besov.p, nan, nan, ef.forcing_part),
                 ("E_total", cfg.besov.p, nan, nan, ef.total)]
        pt = {k: v for k, v in cfg.param_tuple().items() if k != "p"}
        write_csv(out / "norms.csv", ("norm_name", "p", "q", "sigma", "value") + tuple(pt),
                  [r + tuple(pt.values()) for r in rows])
        for r in rows:
            print(f"{r[0]:>16s} {r[4]:.10g}")
        return EXIT_OK
    if cmd in ("evolve", "evolve-w"):
        u = ex.make_data(cfg)
        solve = solve_u if cmd == "evolve" else solve_w
        result = solve(u, cfg.solver)
        stem = "run" if cmd == "evolve" else "run_w"
        code = _run_record(result, cfg, out / f"{stem}.csv")
        write_ansf(out / f"{stem}_final.ansf", result.final)
        write_snapshots(result, out, stem)
        return code
    if cmd == "sweep-eps":
        res = ex.run_epsilon_sweep(cfg)
        for k, v in res.slopes.items():
            print(f"{k:>22s} {v:.4f}")
        return EXIT_OK
    if cmd == "smallness":
        res = ex.run_smallness_study(cfg)
        for r in res.rows:
            print(f"amp={r[0]:.4g} E_T={r[3]:.4g} w_b012={r[4]:.4g} ratio={r[5]:.4g}"
                  f"{' BLOW-UP' if r[6] else ''}{' flagged' if r[7] else ''}")
        if res.first_flagged is not None:
            print(f"ratio stops being O(1) at amplitude {res.first_flagged:g}")
        return EXIT_BLOWUP if any(r[6] for r in res.rows) else EXIT_OK
    if cmd == "compare":
        res = ex.run_compare(cfg)
        for r in res.rows:
            print(f"delta_rel={r[0]:.3g} sup_ratio={r[2]:.6g} fitted_C={r[6]:.4g}")
        print(f"ratio change under halving: {res.ratio_change:.3%}")
        return EXIT_BLOWUP if any(r[7] for r in res.rows) else EXIT_OK
    if cmd == "check":
        rep = ex.run_checks(cfg)
        print(rep.as_json())
        return EXIT_OK if rep.passed else EXIT_CHECK
    raise ex.ConfigError(f"unknown command {cmd!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        values = ex.load_config(args.config) if args.config else {}
        cfg = ex.build_config(args.command, values, _overrides(args))
        return dispatch(cfg)
    except ex.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
