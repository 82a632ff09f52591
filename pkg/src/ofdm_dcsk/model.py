"""Scenario and allocation types shared by every engine.

A frame of an OFDM-DCSK user occupies ``n_subcarriers`` orthogonal
sub-carriers: ``n_ref`` of them carry copies of the chaotic reference and
the remaining ``n_subcarriers - n_ref`` carry data bits.  The chip duration
is normalized to one, so per-chip energies are plain sums of squares.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class InvalidParameterError(ValueError):
    """Raised when an operation receives parameters outside its domain."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class SystemParams:
    """Global scenario.

    n_subcarriers
        Sub-carriers per block (references plus data).
    spreading
        Chips per bit.
    n_users
        Users sharing the data sub-carriers.
    eb, n0
        Energy per bit and noise power spectral density, normalized units.
    """

    n_subcarriers: int
    spreading: int
    n_users: int
    eb: float
    n0: float = 1.0

    @classmethod
    def from_ebn0_db(cls, n_subcarriers, spreading, n_users, ebn0_db, n0=1.0):
        return cls(n_subcarriers, spreading, n_users, ebn0_db_to_linear(ebn0_db, n0), n0)

    @property
    def ebn0_db(self) -> float:
        return 10.0 * math.log10(self.eb / self.n0)


@dataclass(frozen=True)
class Allocation:
    """Decision variables: number of references and per-sub-carrier powers.

    ``data_power`` and ``ref_power`` are linear power coefficients; equal-power
    (sub-carrier-only) allocation is the default ``1.0, 1.0``.
    """

    n_ref: int
    data_power: float = 1.0
    ref_power: float = 1.0

    def power_sum(self, n_subcarriers: int) -> float:
        return (n_subcarriers - self.n_ref) * self.data_power + self.n_ref * self.ref_power


def ebn0_db_to_linear(ebn0_db: float, n0: float = 1.0) -> float:
    """Return the energy per bit for an Eb/N0 given in dB."""
    if not (math.isfinite(ebn0_db) and math.isfinite(n0)) or n0 <= 0:
        raise InvalidParameterError(f"need finite ebn0_db and n0 > 0, got {ebn0_db!r}, {n0!r}")
    return n0 * 10.0 ** (ebn0_db / 10.0)


def _is_int(x) -> bool:
    try:
        return int(x) == x and not isinstance(x, bool)
    except (TypeError, ValueError, OverflowError):
        return False


def _is_pos_finite(x) -> bool:
    try:
        return math.isfinite(x) and x > 0
    except TypeError:
        return False


def param_violations(params: SystemParams) -> list[str]:
    out = []
    if not _is_int(params.n_subcarriers) or params.n_subcarriers < 2:
        out.append(f"n_subcarriers >= 2 (got {params.n_subcarriers!r})")
    if not _is_int(params.spreading) or params.spreading < 1:
        out.append(f"spreading >= 1 (got {params.spreading!r})")
    if not _is_int(params.n_users) or params.n_users < 1:
        out.append(f"n_users >= 1 (got {params.n_users!r})")
    if not _is_pos_finite(params.n0):
        out.append(f"n0 > 0 and finite (got {params.n0!r})")
    if not _is_pos_finite(params.eb):
        out.append(f"eb > 0 and finite (got {params.eb!r})")
    return out


def validate(params: SystemParams, alloc: Allocation | None = None,
             budget: float | None = None) -> list[str]:
    """Collect every violated invariant; an empty list means valid.

    ``budget`` is the total-power cap; ``None`` means no cap is in force.
    Never raises.
    """
    out = param_violations(params)
    if alloc is None:
        return out
    m = params.n_subcarriers
    n = alloc.n_ref
    if not _is_int(n) or n < 1:
        out.append(f"n_ref >= 1 (got {n!r})")
    elif _is_int(m) and n >= m:
        out.append(f"n_ref < n_subcarriers (got {n!r} >= {m!r})")
    if not _is_pos_finite(alloc.data_power):
        out.append(f"data_power > 0 and finite (got {alloc.data_power!r})")
    if not _is_pos_finite(alloc.ref_power):
        out.append(f"ref_power > 0 and finite (got {alloc.ref_power!r})")
    if not out and budget is not None:
        total = alloc.power_sum(m)
        if not total <= budget:
            out.append(f"power_sum <= budget (got {total!r} > {budget!r})")
    return out


def require_valid(params: SystemParams, alloc: Allocation | None = None,
                  budget: float | None = None) -> None:
    violations = validate(params, alloc, budget)
    if violations:
        raise InvalidParameterError(violations)
