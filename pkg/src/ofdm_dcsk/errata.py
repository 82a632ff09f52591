"""Consistency report across the closed forms used by the library.

The closed forms carried by the library are not mutually consistent.
Nothing is patched silently: each section evaluates the transcribed form next to an
independently derived one at a fixed reference scenario and prints the gap.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from . import analytic, cardano, dinkelbach
from .model import Allocation, SystemParams

REFERENCE = dict(n_subcarriers=64, spreading=128, ebn0_db=10.0)
REFERENCE_USERS = (1, 2)


def _params(n_users: int) -> SystemParams:
    return SystemParams.from_ebn0_db(REFERENCE["n_subcarriers"], REFERENCE["spreading"],
                                     n_users, REFERENCE["ebn0_db"])


def literal_depressed(params: SystemParams) -> tuple[float, float]:
    """Depressed-cubic coefficients exactly as transcribed in closed form.

    Kept only for comparison with :func:`ofdm_dcsk.cardano.depressed`.
    """
    M, P = params.n_subcarriers, params.n_users
    beta, n0, eb = params.spreading, params.n0, params.eb
    k = P * M * (n0 + 2) - 2 * M - 2 * P * n0
    lead = P * n0 + 2 * P - 2
    linear = -k**2 / (3 * lead**2) + 3 * M * n0 * (2 * P * eb + beta * n0) / (2 * eb * lead)
    constant = k**3 / (27 * lead**3) + k / (3 * lead) - k / (2 * eb * lead)
    return linear, constant


def literal_optimal_n(params: SystemParams) -> float:
    """Floor of the single-root Cardano expression on the transcribed coefficients.

    NaN when the discriminant is negative (the expression is then undefined
    over the reals).
    """
    M, P = params.n_subcarriers, params.n_users
    n0 = params.n0
    linear, constant = literal_depressed(params)
    disc = linear**3 / 27 + constant**2 / 4
    if disc < 0:
        return math.nan
    root = math.sqrt(disc)
    x = np.cbrt(-constant / 2 + root) + np.cbrt(-constant / 2 - root)
    shift = (P * M * (n0 + 2) - 2 * M - 2 * P * n0) / (3 * (P * n0 + 2 * P - 2))
    return float(math.floor(x + shift))


def stationary_power(params: SystemParams, which: str, other: float, n: int, q: float) -> float:
    """Power at which the partial derivative of ``V`` vanishes, by central differences.

    ``which`` is ``"data"`` (solve for a, ``other`` = b) or ``"ref"``.
    """
    def dv(x):
        h = 1e-6 * x
        def alloc(y):
            return Allocation(n, y, other) if which == "data" else Allocation(n, other, y)
        return (analytic.dinkelbach_v(params, alloc(x + h), q)
                - analytic.dinkelbach_v(params, alloc(x - h), q)) / (2 * h)

    lo, hi = 1e-12, 1.0
    while dv(hi) > 0 and hi < 1e12:
        hi *= 10
    return brentq(dv, lo, hi, xtol=1e-15, rtol=1e-13)


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def _section_reduction(lines: list[str]) -> None:
    lines.append("[1] equal-power BER vs power-allocated BER at unit powers")
    lines.append("    first-term coefficient: equal-power form uses P, "
                 "power-allocated form (b + aP)/(ab) = 1 + P at a = b = 1")
    for P in REFERENCE_USERS:
        params = _params(P)
        n = cardano.optimal_n_closed_form(params)
        unit = Allocation(n, 1.0, 1.0)
        sa = analytic.ber_sa(params, n)
        frac = analytic.ber_psa(params, unit)
        expd = analytic.ber_psa_expanded(params, unit)
        lines.append(f"    P={P} N={n}: coeff_sa={P} coeff_psa={1 + P} "
                     f"ber_sa={_fmt(sa)} ber_psa_fraction={_fmt(frac)} "
                     f"ber_psa_expanded={_fmt(expd)} rel_gap={_fmt(frac / sa - 1)}")


def _section_cubic(lines: list[str]) -> None:
    lines.append("[2] depressed cubic: transcribed vs derived coefficients")
    for P in REFERENCE_USERS:
        params = _params(P)
        dc = cardano.depressed(params)
        lit_lin, lit_const = literal_depressed(params)
        lines.append(
            f"    P={P}: linear derived={_fmt(dc.linear)} transcribed={_fmt(lit_lin)} "
            f"rel_gap={_fmt(lit_lin / dc.linear - 1)}; "
            f"constant derived={_fmt(dc.constant)} transcribed={_fmt(lit_const)} "
            f"rel_gap={_fmt(lit_const / dc.constant - 1)}")
        lines.append(
            f"    P={P}: n_star derived={cardano.optimal_n_closed_form(params)} "
            f"transcribed_floor={literal_optimal_n(params)} "
            f"bruteforce={cardano.optimal_n_bruteforce(params)}")


def _section_kkt(lines: list[str]) -> None:
    lines.append("[3] closed-form power updates vs numeric inner solver")
    for P in REFERENCE_USERS:
        params = _params(P)
        res = dinkelbach.bisection_solve(params)
        q = 0.5 * res.q_star
        ref = dinkelbach.inner_maximize(params, q)
        n, a, b = ref.n_ref, ref.data_power, ref.ref_power
        a_true = stationary_power(params, "data", b, n, q)
        b_true = stationary_power(params, "ref", a, n, q)
        a_upd = dinkelbach.update_a(params, b, n, q)
        b_upd = dinkelbach.update_b(params, a, n, q)
        lines.append(f"    P={P} q={_fmt(q)} N={n}: data update={_fmt(a_upd)} "
                     f"stationary={_fmt(a_true)} rel_gap={_fmt(a_upd / a_true - 1)}")
        lines.append(f"    P={P} q={_fmt(q)} N={n}: ref update={_fmt(b_upd)} "
                     f"stationary={_fmt(b_true)} rel_gap={_fmt(b_upd / b_true - 1)}")
        kkt = dinkelbach.bisection_solve(params, method="kkt-verbatim")
        lines.append(f"    P={P}: kkt-verbatim solve used={kkt.inner_method} "
                     f"U={_fmt(analytic.ratio_u(params, kkt.alloc_star))} "
                     f"numeric U={_fmt(analytic.ratio_u(params, res.alloc_star))}")


def _section_monte_carlo(lines: list[str], trials: int, seed: int) -> None:
    from . import simulator

    lines.append("[4] Monte Carlo vs equal-power BER (single user)")
    params = _params(1)
    for n in (4, 12, cardano.optimal_n_closed_form(params), 24):
        est = simulator.estimate_ber(params, Allocation(n), trials, seed).pooled
        lines.append(f"    N={n}: analytic={_fmt(analytic.ber_sa(params, n))} "
                     f"mc={_fmt(est.ber)} ci=[{_fmt(est.ci_low)}, {_fmt(est.ci_high)}] "
                     f"bits={est.bits}")


def errata_report(trials: int = 0, seed: int = 0) -> str:
    """Deterministic multi-section text report.

    Sections 1-3 are always present; the Monte Carlo section is added when
    ``trials > 0``.
    """
    lines = [f"reference scenario: M={REFERENCE['n_subcarriers']} "
             f"beta={REFERENCE['spreading']} Eb/N0={REFERENCE['ebn0_db']} dB N0=1 "
             f"P in {list(REFERENCE_USERS)}", ""]
    _section_reduction(lines)
    lines.append("")
    _section_cubic(lines)
    lines.append("")
    _section_kkt(lines)
    if trials > 0:
        lines.append("")
        _section_monte_carlo(lines, trials, seed)
    return "\n".join(lines) + "\n"
