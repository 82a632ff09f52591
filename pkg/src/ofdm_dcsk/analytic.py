"""Closed-form BER expressions and the fractional objective.

Two systems are modelled:

* equal-power ("SA"): only the number of reference sub-carriers varies;
* power-and-sub-carrier ("PSA"): data sub-carriers use power ``a`` and
  reference sub-carriers power ``b``.

All expressions are the Gaussian-approximation forms, evaluated literally.
Functions taking ``n_ref`` broadcast over numpy arrays.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.special import erfc

from .model import Allocation, InvalidParameterError, SystemParams, require_valid


class RatioParts(NamedTuple):
    numerator: float
    denominator: float


def _check_n(params: SystemParams, n) -> np.ndarray:
    require_valid(params)
    n_arr = np.asarray(n)
    if n_arr.dtype.kind not in "iu":
        if not np.all(np.floor(n_arr) == n_arr):
            raise InvalidParameterError(f"n_ref must be integral (got {n!r})")
    if np.any(n_arr < 1) or np.any(n_arr > params.n_subcarriers - 1):
        raise InvalidParameterError(
            f"need 1 <= n_ref <= {params.n_subcarriers - 1} (got {n!r})")
    return n_arr.astype(float)


def _ber_from_arg(arg):
    ber = 0.5 * erfc(arg)
    return ber if np.ndim(ber) else float(ber)


def objective_sa(params: SystemParams, n_ref):
    """Inverse squared erfc argument of the equal-power BER.

    Three addends: reference/data noise cross terms, the noise-by-noise
    term, and multi-user interference (zero for a single user).
    """
    n = _check_n(params, n_ref)
    M = params.n_subcarriers
    P = params.n_users
    beta, n0, eb = params.spreading, params.n0, params.eb
    k = M - n
    val = ((n + 1) / n) * P * M * n0 / (k * eb) \
        + beta * M**2 * n0**2 / (2 * n * k**2 * eb**2) \
        + 2 * (P - 1) * M / (k * eb)
    return val if np.ndim(val) else float(val)


def ber_sa(params: SystemParams, n_ref):
    """Equal-power BER, ``0.5 erfc(objective ** -0.5)``."""
    return _ber_from_arg(np.asarray(objective_sa(params, n_ref)) ** -0.5)


def ratio_parts(params: SystemParams, alloc: Allocation) -> RatioParts:
    """Numerator and denominator of the fractional objective ``U``."""
    require_valid(params, alloc)
    M, P = params.n_subcarriers, params.n_users
    beta, n0, eb = params.spreading, params.n0, params.eb
    n = alloc.n_ref
    a, b = alloc.data_power, alloc.ref_power
    k = M - n
    total = k * a + n * b
    num = 2 * n * a * b * k**2 * eb**2
    den = k * eb * total * (2 * (a * P + b) * (n + 1) * n0 + 4 * a * b * (P - 1) * n) \
        + beta * n0**2 * total**2
    return RatioParts(float(num), float(den))


def ratio_u(params: SystemParams, alloc: Allocation) -> float:
    num, den = ratio_parts(params, alloc)
    return num / den


def ber_psa(params: SystemParams, alloc: Allocation) -> float:
    """Power-and-sub-carrier BER, ``0.5 erfc(sqrt(U))``.

    Written out independently of :func:`ratio_parts` so the two can be
    cross-checked.
    """
    require_valid(params, alloc)
    M, P = params.n_subcarriers, params.n_users
    beta, n0, eb = params.spreading, params.n0, params.eb
    N = alloc.n_ref
    a, b = alloc.data_power, alloc.ref_power
    sum_c = (M - N) * a + N * b
    arg = np.sqrt(
        2 * N * a * b * (M - N) ** 2 * eb**2
        / ((M - N) * eb * sum_c * (2 * (a * P + b) * (N + 1) * n0 + 4 * a * b * (P - 1) * N)
           + beta * n0**2 * sum_c**2))
    return _ber_from_arg(arg)


def ber_psa_expanded(params: SystemParams, alloc: Allocation) -> float:
    """PSA BER from the expanded three-term sum, evaluated literally.

    Differs from :func:`ber_psa` in the interference term, which here lacks
    the ``power_sum`` factor.  Kept for the errata report.
    """
    require_valid(params, alloc)
    M, P = params.n_subcarriers, params.n_users
    beta, n0, eb = params.spreading, params.n0, params.eb
    N = alloc.n_ref
    a, b = alloc.data_power, alloc.ref_power
    sum_c = alloc.power_sum(M)
    bracket = ((b + a * P) / (a * b)) * ((N + 1) / N) * n0 * sum_c / ((M - N) * eb) \
        + beta * n0**2 * sum_c**2 / (2 * a * b * N * (M - N) ** 2 * eb**2) \
        + 2 * (P - 1) / ((M - N) * eb)
    return _ber_from_arg(bracket ** -0.5)


def dinkelbach_v(params: SystemParams, alloc: Allocation, q: float) -> float:
    """Subtractive objective ``numerator - q * denominator``."""
    num, den = ratio_parts(params, alloc)
    return num - q * den
