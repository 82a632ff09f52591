"""Figure reproductions as CSV.

Default grids (all overridable):

====  ==============================================================
4     BER vs N (1..63) and P (1..3) at M=64, beta=128, 10 dB
5     BER vs Eb/N0 (0..14 dB) for P in {1,2,3}, N in {1,3,12}
6     BER vs Eb/N0 for fixed N in {1,2,4,8} ("6") and the closed-form
      optimum ("6-opt"), single user
7     power-allocated BER over N x a x b (log grids 1e-3..1), 10 dB, P=1
8     equal-power at optimal N ("8-sa") vs joint optimum ("8-psa"),
      P in {1,2,3}, Eb/N0 0..14 dB
9     as 8 for beta in {16,64,128}, P=2
10    power-allocated BER vs a (1e-3..0.3) for N in {1,2,3,4,6},
      b=0.01, P=2, 10 dB
11    power-allocated BER vs a for b in {0.05,0.1,0.3}, N=3, P=2, 10 dB
====  ==============================================================

Monte Carlo columns are filled when ``trials > 0``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, fields, replace
from typing import Iterable, TextIO

from . import analytic, cardano, dinkelbach, simulator
from .config import ExperimentConfig, UsageError, logspace
from .model import Allocation, InvalidParameterError, SystemParams, validate

FIGURE_IDS = tuple(range(4, 12))

_EBN0_SWEEP = [float(x) for x in range(0, 15)]

FIGURE_DEFAULTS = {
    4: dict(p=[1, 2, 3], n=list(range(1, 64))),
    5: dict(p=[1, 2, 3], n=[1, 3, 12], ebn0_db=_EBN0_SWEEP),
    6: dict(p=[1], n=[1, 2, 4, 8], ebn0_db=_EBN0_SWEEP),
    7: dict(p=[1], n=list(range(1, 64)), a=logspace(1e-3, 1.0, 16),
            b=logspace(1e-3, 1.0, 16), mode="PSA"),
    8: dict(p=[1, 2, 3], ebn0_db=_EBN0_SWEEP),
    9: dict(p=[2], beta=[16, 64, 128], ebn0_db=_EBN0_SWEEP),
    10: dict(p=[2], n=[1, 2, 3, 4, 6], a=logspace(1e-3, 0.3, 25), b=[0.01], mode="PSA"),
    11: dict(p=[2], n=[3], a=logspace(1e-3, 0.3, 25), b=[0.05, 0.1, 0.3], mode="PSA"),
}


@dataclass
class CsvRow:
    figure_id: str
    M: int
    beta: int
    P: int
    ebn0_db: float
    N: int
    a: float
    b: float
    power_sum: float
    ber_analytic: float | None = None
    ber_mc: float | None = None
    ci_low: float | None = None
    ci_high: float | None = None
    bits: int | None = None
    seed: int | None = None


COLUMNS = [f.name for f in fields(CsvRow)]


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def write_csv(rows: Iterable[CsvRow], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([format_cell(getattr(row, c)) for c in COLUMNS])


def to_csv_text(rows: Iterable[CsvRow]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def default_config(figure_id: int) -> ExperimentConfig:
    if figure_id not in FIGURE_DEFAULTS:
        raise UsageError(f"unknown figure {figure_id!r}; choose from {list(FIGURE_IDS)}")
    return replace(ExperimentConfig(scenario=str(figure_id)), **FIGURE_DEFAULTS[figure_id])


def _row(fig: str, params: SystemParams, ebn0_db: float, alloc: Allocation, ber: float,
         cfg: ExperimentConfig, mode: str, budget: float | None = None) -> CsvRow:
    problems = validate(params, alloc, budget)
    if problems:
        raise InvalidParameterError(problems)
    row = CsvRow(fig, params.n_subcarriers, params.spreading, params.n_users, ebn0_db,
                 alloc.n_ref, alloc.data_power, alloc.ref_power,
                 alloc.power_sum(params.n_subcarriers), ber)
    if cfg.trials > 0:
        res = simulator.estimate_ber(params, alloc, cfg.trials, cfg.seed, mode=mode,
                                     shards=cfg.shards, workers=cfg.workers)
        est = res.pooled
        row.ber_mc, row.ci_low, row.ci_high = est.ber, est.ci_low, est.ci_high
        row.bits, row.seed = est.bits, cfg.seed
    return row


def _params(cfg, beta, p, ebn0):
    return SystemParams.from_ebn0_db(cfg.m, beta, p, ebn0, cfg.n0)


def _equal_power_rows(fig, cfg, n_list_fn):
    for beta in cfg.beta:
        for p in cfg.p:
            for ebn0 in cfg.ebn0_db:
                params = _params(cfg, beta, p, ebn0)
                for label, n in n_list_fn(params):
                    yield _row(label or fig, params, ebn0, Allocation(n),
                               analytic.ber_sa(params, n), cfg, "SA")


def _psa_grid_rows(fig, cfg):
    for beta in cfg.beta:
        for p in cfg.p:
            for ebn0 in cfg.ebn0_db:
                params = _params(cfg, beta, p, ebn0)
                for n in cfg.n:
                    for b in cfg.b:
                        for a in cfg.a:
                            alloc = Allocation(n, a, b)
                            yield _row(fig, params, ebn0, alloc,
                                       analytic.ber_psa(params, alloc), cfg, "PSA")


def _comparison_rows(fig, cfg):
    for beta in cfg.beta:
        for p in cfg.p:
            for ebn0 in cfg.ebn0_db:
                params = _params(cfg, beta, p, ebn0)
                n = cardano.optimal_n_closed_form(params)
                yield _row(f"{fig}-sa", params, ebn0, Allocation(n),
                           analytic.ber_sa(params, n), cfg, "SA")
                res = dinkelbach.bisection_solve(params, budget=cfg.ct)
                yield _row(f"{fig}-psa", params, ebn0, res.alloc_star,
                           analytic.ber_psa(params, res.alloc_star), cfg, "PSA", cfg.ct)


def figure_rows(figure_id: int, cfg: ExperimentConfig | None = None) -> list[CsvRow]:
    cfg = cfg or default_config(figure_id)
    fig = str(figure_id)
    if figure_id in (4, 5):
        return list(_equal_power_rows(fig, cfg, lambda params: [(None, n) for n in cfg.n]))
    if figure_id == 6:
        def with_opt(params):
            fixed = [(None, n) for n in cfg.n]
            return fixed + [(f"{fig}-opt", cardano.optimal_n_closed_form(params))]
        return list(_equal_power_rows(fig, cfg, with_opt))
    if figure_id in (7, 10, 11):
        return list(_psa_grid_rows(fig, cfg))
    if figure_id in (8, 9):
        return list(_comparison_rows(fig, cfg))
    raise UsageError(f"unknown figure {figure_id!r}; choose from {list(FIGURE_IDS)}")
