"""Closed-form optimal number of reference sub-carriers (equal-power system).

Setting the derivative of :func:`~ofdm_dcsk.analytic.objective_sa` to zero
gives a cubic in ``n_ref``.  It is depressed with ``N = X + shift`` and
solved with Cardano's formula when it has one real root, or with the
trigonometric form when it has three.  Every root inside ``(0, M)`` then
contributes its floor and ceiling as integer candidates; the endpoints are
always candidates, so the result matches exhaustive search.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .analytic import objective_sa
from .model import SystemParams, require_valid


class CubicCoeffs(NamedTuple):
    """``cubic*N**3 + quadratic*N**2 + linear*N + constant = 0``."""

    cubic: float
    quadratic: float
    linear: float
    constant: float

    def __call__(self, x):
        return ((self.cubic * x + self.quadratic) * x + self.linear) * x + self.constant


class DepressedCubic(NamedTuple):
    """``X**3 + linear*X + constant = 0`` with its discriminant.

    ``discriminant > 0`` means one real root, ``<= 0`` three (counted with
    multiplicity).
    """

    linear: float
    constant: float
    discriminant: float


def cubic_coeffs(params: SystemParams) -> CubicCoeffs:
    """Stationarity cubic of the equal-power objective (scaled by ``1/M``)."""
    require_valid(params)
    M, P = params.n_subcarriers, params.n_users
    beta, n0, eb = params.spreading, params.n0, params.eb
    shared = 2 * P * eb + beta * n0
    return CubicCoeffs(
        -2 * eb * (P * n0 + 2 * P - 2),
        2 * eb * (P * M * n0 + 2 * P * M - 2 * M - 2 * P * n0),
        3 * M * n0 * shared,
        -(M**2) * n0 * shared,
    )


def depress(coeffs: CubicCoeffs) -> tuple[DepressedCubic, float]:
    """Return the depressed form and the shift ``-B/(3A)`` with ``N = X + shift``."""
    A, B, C, D = coeffs
    if A == 0:
        raise ValueError("leading coefficient is zero")
    shift = -B / (3 * A)
    p = (3 * A * C - B * B) / (3 * A * A)
    q = (2 * B**3 - 9 * A * B * C + 27 * A * A * D) / (27 * A**3)
    return DepressedCubic(p, q, p**3 / 27 + q * q / 4), shift


def depressed(params: SystemParams) -> DepressedCubic:
    return depress(cubic_coeffs(params))[0]


def _newton_polish(x: float, p: float, q: float) -> float:
    for _ in range(3):
        f = (x * x + p) * x + q
        df = 3 * x * x + p
        if df == 0:
            break
        step = f / df
        x_new = x - step
        if abs((x_new * x_new + p) * x_new + q) >= abs(f):
            break
        x = x_new
    return x


def real_roots(dc: DepressedCubic, shift: float = 0.0) -> list[float]:
    """Real roots of a depressed cubic, shifted back by ``shift``, ascending."""
    p, q, disc = dc
    if disc > 0:
        # Pick the cube-root branch that avoids cancellation.
        s = math.sqrt(disc)
        u = np.cbrt(-q / 2 - s if q > 0 else -q / 2 + s)
        x = u - p / (3 * u) if u != 0 else 0.0
        xs = [float(x)]
    elif p == 0:
        # disc <= 0 with p == 0 forces q == 0 up to rounding: a triple root.
        xs = [float(-np.cbrt(q))]
    else:
        r = 2 * math.sqrt(-p / 3)
        cos_arg = (3 * q / (2 * p)) * math.sqrt(-3 / p)
        phi = math.acos(min(1.0, max(-1.0, cos_arg))) / 3
        xs = [r * math.cos(phi - 2 * math.pi * j / 3) for j in range(3)]
    return sorted(_newton_polish(x, p, q) + shift for x in xs)


def _polish_original(coeffs: CubicCoeffs, x: float) -> float:
    # Depressing loses digits when |shift| is large; clean up on the original polynomial.
    A, B, C, _ = coeffs
    for _ in range(3):
        f = coeffs(x)
        df = (3 * A * x + 2 * B) * x + C
        if df == 0:
            break
        x_new = x - f / df
        if abs(coeffs(x_new)) >= abs(f):
            break
        x = x_new
    return x


def cubic_roots(coeffs: CubicCoeffs) -> list[float]:
    """Real roots of a general cubic, ascending."""
    dc, shift = depress(coeffs)
    return sorted(_polish_original(coeffs, x) for x in real_roots(dc, shift))


def stationary_points(params: SystemParams) -> list[float]:
    return cubic_roots(cubic_coeffs(params))


def candidates_from_roots(roots, m: int) -> list[int]:
    """Floor/ceil of each root in ``(0, m)``, clipped to ``[1, m-1]``, plus the endpoints."""
    cands = {1, m - 1}
    for r in roots:
        if 0 < r < m:
            for c in (math.floor(r), math.ceil(r)):
                if 1 <= c <= m - 1:
                    cands.add(int(c))
    return sorted(cands)


def _argmin(params: SystemParams, cands) -> int:
    cands = np.asarray(sorted(cands))
    vals = objective_sa(params, cands)
    return int(cands[int(np.argmin(np.atleast_1d(vals)))])


def optimal_n_closed_form(params: SystemParams) -> int:
    """Integer minimizer of the equal-power objective from the cubic's roots."""
    m = params.n_subcarriers
    if m == 2:
        require_valid(params)
        return 1
    return _argmin(params, candidates_from_roots(stationary_points(params), m))


def optimal_n_bruteforce(params: SystemParams) -> int:
    """Exhaustive argmin over ``1..M-1`` (ties go to the smaller value)."""
    require_valid(params)
    return _argmin(params, range(1, params.n_subcarriers))
