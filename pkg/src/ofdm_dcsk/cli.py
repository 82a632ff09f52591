"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 invalid parameters.

Every flag accepts the same value syntax as the config file, so
``--ebn0-db 0:14:2`` or ``--n 1,3,12`` work wherever a sweep makes sense.
Single-point commands (``ber``, ``optimal-n``, ``joint-opt``, ``simulate``)
require one value per setting.  Values from ``--config`` are applied first
and flags override them.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import analytic, cardano, dinkelbach, figures, simulator
from .config import ExperimentConfig, UsageError, parse_scalar, read_config
from .errata import errata_report
from .model import Allocation, InvalidParameterError, SystemParams, require_valid

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_INVALID = 0, 2, 3, 4

_SWEEP_FLAGS = ["m", "beta", "p", "ebn0_db", "n0", "n", "a", "b", "ct", "trials",
                "seed", "shards", "workers", "mode"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("scenario")
    g.add_argument("--m", help="sub-carriers per block (default 64)")
    g.add_argument("--beta", help="spreading factor (default 128)")
    g.add_argument("--p", help="number of users (default 1)")
    g.add_argument("--ebn0-db", dest="ebn0_db", help="Eb/N0 in dB (default 10)")
    g.add_argument("--n0", help="noise spectral density (default 1)")
    g.add_argument("--n", help="reference sub-carriers")
    g.add_argument("--a", help="data power coefficient")
    g.add_argument("--b", help="reference power coefficient")
    g.add_argument("--mode", help="SA (equal power) or PSA (power allocated)")
    g.add_argument("--ct", help="total power budget (default 1)")
    g.add_argument("--trials", help="Monte Carlo frames (0 = analytic only)")
    g.add_argument("--seed", help="base seed (default 0)")
    g.add_argument("--shards", help="independent RNG streams (default 1)")
    g.add_argument("--workers", help="worker processes for the shards (default 1)")
    common.add_argument("--config", help="key = value settings file")
    common.add_argument("--out", help="write CSV (or the report) here")
    common.add_argument("--json", action="store_true", help="structured output")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="ofdm-dcsk",
                     description="Multi-user OFDM-DCSK BER analysis and resource allocation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("ber", parents=[common], help="analytic BER at one point")
    sub.add_parser("optimal-n", parents=[common],
                   help="equal-power optimal number of references")
    jo = sub.add_parser("joint-opt", parents=[common],
                        help="joint reference count and power allocation")
    jo.add_argument("--method", default="numeric", choices=["numeric", "kkt-verbatim"])
    jo.add_argument("--eps", default="1e-9", help="residual tolerance on F(q)")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo BER at one point")
    fig = sub.add_parser("figure", parents=[common], help="reproduce a figure as CSV")
    fig.add_argument("figure_id", help="4..11")
    sub.add_parser("errata", parents=[common], help="closed-form consistency report")
    return parser


def _settings(args) -> dict[str, str]:
    values = read_config(args.config) if args.config else {}
    for key in _SWEEP_FLAGS:
        v = getattr(args, key)
        if v is not None:
            values[key] = v
    return values


def _single(values: list, name: str):
    if len(values) != 1:
        raise UsageError(f"--{name.replace('_', '-')} takes a single value here")
    return values[0]


def _point(cfg: ExperimentConfig, need_n: bool = True):
    params = SystemParams.from_ebn0_db(cfg.m, _single(cfg.beta, "beta"), _single(cfg.p, "p"),
                                       _single(cfg.ebn0_db, "ebn0_db"), cfg.n0)
    require_valid(params)
    if not need_n:
        return params, None
    if cfg.n is None:
        raise UsageError("--n is required")
    n = _single(cfg.n, "n")
    if cfg.mode == "PSA":
        alloc = Allocation(n, _single(cfg.a or [1.0], "a"), _single(cfg.b or [1.0], "b"))
    else:
        alloc = Allocation(n)
    require_valid(params, alloc)
    return params, alloc


def _base_row(label, params, alloc, ber=None) -> figures.CsvRow:
    return figures.CsvRow(label, params.n_subcarriers, params.spreading, params.n_users,
                          float(params.ebn0_db), alloc.n_ref, float(alloc.data_power),
                          float(alloc.ref_power), float(alloc.power_sum(params.n_subcarriers)),
                          ber)


def _write_rows(path: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        figures.write_csv(rows, fh)


def _emit(args, result: dict, summary: str) -> None:
    if args.json:
        print(json.dumps(result, sort_keys=True))
        return
    print(" ".join(f"{k}={_fmt(v)}" for k, v in result.items()))
    print(summary)


def _fmt(v) -> str:
    if isinstance(v, float):
        return "%.17g" % v
    return str(v).lower() if isinstance(v, bool) else str(v)


def cmd_ber(args, cfg: ExperimentConfig) -> None:
    params, alloc = _point(cfg)
    if cfg.mode == "PSA":
        ber = analytic.ber_psa(params, alloc)
    else:
        ber = analytic.ber_sa(params, alloc.n_ref)
    result = dict(mode=cfg.mode, n=alloc.n_ref, a=alloc.data_power, b=alloc.ref_power,
                  ber=float(ber))
    if args.out:
        _write_rows(args.out, [_base_row("ber", params, alloc, float(ber))])
    _emit(args, result, f"{cfg.mode} BER at N={alloc.n_ref}, "
                        f"Eb/N0={params.ebn0_db:g} dB, P={params.n_users}: {ber:.6g}")


def cmd_optimal_n(args, cfg: ExperimentConfig) -> None:
    params, _ = _point(cfg, need_n=False)
    n = cardano.optimal_n_closed_form(params)
    ber = float(analytic.ber_sa(params, n))
    result = dict(n_star=n, ber=ber)
    if args.out:
        _write_rows(args.out, [_base_row("optimal-n", params, Allocation(n), ber)])
    _emit(args, result, f"equal-power optimum: N*={n} of M={params.n_subcarriers} "
                        f"(BER {ber:.6g})")


def cmd_joint_opt(args, cfg: ExperimentConfig) -> None:
    params, _ = _point(cfg, need_n=False)
    eps = parse_scalar(args.eps, float)
    res = dinkelbach.bisection_solve(params, budget=cfg.ct, eps=eps, method=args.method)
    al = res.alloc_star
    ber = analytic.ber_psa(params, al)
    result = dict(q_star=res.q_star, n_star=al.n_ref, a_star=al.data_power,
                  b_star=al.ref_power, power_sum=al.power_sum(params.n_subcarriers),
                  u_star=analytic.ratio_u(params, al), ber=ber, residual=res.v_residual,
                  iterations=res.outer_iterations, inner_method=res.inner_method,
                  converged=res.converged)
    if args.out:
        _write_rows(args.out, [_base_row("joint-opt", params, al, ber)])
    _emit(args, result, f"joint optimum: N*={al.n_ref}, a={al.data_power:.6g}, "
                        f"b={al.ref_power:.6g}, q*={res.q_star:.9g}, BER {ber:.6g} "
                        f"({res.outer_iterations} bisections, {res.inner_method} inner)")


def cmd_simulate(args, cfg: ExperimentConfig) -> None:
    params, alloc = _point(cfg)
    if cfg.trials < 1:
        raise UsageError("--trials must be at least 1")
    res = simulator.estimate_ber(params, alloc, cfg.trials, cfg.seed, mode=cfg.mode,
                                 shards=cfg.shards, workers=cfg.workers)
    est = res.pooled
    if cfg.mode == "PSA":
        ber = float(analytic.ber_psa(params, alloc))
    else:
        ber = float(analytic.ber_sa(params, alloc.n_ref))
    result = dict(ber_mc=est.ber, ci_low=est.ci_low, ci_high=est.ci_high,
                  errors=est.bit_errors, bits=est.bits, ber_analytic=ber,
                  seed=cfg.seed, shards=res.shards)
    if args.out:
        row = _base_row("simulate", params, alloc, ber)
        row.ber_mc, row.ci_low, row.ci_high = est.ber, est.ci_low, est.ci_high
        row.bits, row.seed = est.bits, cfg.seed
        _write_rows(args.out, [row])
    _emit(args, result, f"Monte Carlo BER {est.ber:.6g} "
                        f"[{est.ci_low:.6g}, {est.ci_high:.6g}] over {est.bits} bits; "
                        f"analytic {ber:.6g}")


def cmd_figure(args, overrides: dict[str, str]) -> None:
    try:
        fig_id = int(args.figure_id)
    except ValueError:
        raise UsageError(f"unknown figure {args.figure_id!r}") from None
    cfg = figures.default_config(fig_id).with_overrides(overrides)
    rows = figures.figure_rows(fig_id, cfg)
    if args.out:
        _write_rows(args.out, rows)
    else:
        figures.write_csv(rows, sys.stdout)
    if args.json:
        print(json.dumps(dict(figure=fig_id, rows=len(rows), out=args.out)), file=sys.stderr)


def cmd_errata(args, cfg: ExperimentConfig) -> None:
    text = errata_report(trials=cfg.trials, seed=cfg.seed)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


_COMMANDS = {"ber": cmd_ber, "optimal-n": cmd_optimal_n, "joint-opt": cmd_joint_opt,
             "simulate": cmd_simulate, "errata": cmd_errata}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"ofdm-dcsk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        overrides = _settings(args)
        if args.command == "figure":
            cmd_figure(args, overrides)
        else:
            cfg = ExperimentConfig(scenario=args.command).with_overrides(overrides)
            _COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"ofdm-dcsk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidParameterError as exc:
        print(f"ofdm-dcsk: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"ofdm-dcsk: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
