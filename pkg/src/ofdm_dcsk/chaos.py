"""Chaotic spreading sequences.

Two maps are available: the second-order Chebyshev map
``x -> 1 - 2 x**2`` on ``(-1, 1)`` and the logistic map
``x -> r x (1 - x)`` with ``r = 3.9999`` on ``(0, 1)``.  The initial state is
a pure function of an integer seed (splitmix64 hash), so sequences are
reproducible and can be generated for many seeds at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

MapKind = Literal["chebyshev", "logistic"]

LOGISTIC_R = 3.9999
DEFAULT_BURN_IN = 1024
MAX_RESEEDS = 8

_MASK = (1 << 64) - 1


class DegenerateSequenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class ChaoticSequence:
    chips: np.ndarray

    @property
    def energy(self) -> float:
        return float(np.dot(self.chips, self.chips))

    def __len__(self):
        return len(self.chips)


def splitmix64(x):
    """splitmix64 finalizer on python ints or uint64 arrays."""
    if isinstance(x, np.ndarray):
        with np.errstate(over="ignore"):
            z = x.astype(np.uint64) + np.uint64(0x9E3779B97F4A7C15)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
            return z ^ (z >> np.uint64(31))
    z = (int(x) + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _unit_interval(h):
    """Map 64-bit hashes to floats in the open interval (0, 1)."""
    if isinstance(h, np.ndarray):
        return ((h >> np.uint64(11)).astype(np.float64) + 0.5) / float(1 << 53)
    return ((h >> 11) + 0.5) / float(1 << 53)


def _initial_state(map_kind: MapKind, u):
    if map_kind == "chebyshev":
        return 2.0 * u - 1.0
    if map_kind == "logistic":
        return u
    raise ValueError(f"unknown map kind {map_kind!r}")


def _step(map_kind: MapKind, x):
    if map_kind == "chebyshev":
        return 1.0 - 2.0 * x * x
    return LOGISTIC_R * x * (1.0 - x)


def _fixed_points(map_kind: MapKind):
    if map_kind == "chebyshev":
        # 0 -> 1 -> -1, and -1, 0.5 are fixed.
        return (0.0, 0.5, 1.0, -1.0)
    return (0.0, 1.0, 1.0 - 1.0 / LOGISTIC_R)


def iterate(map_kind: MapKind, x0, beta: int, burn_in: int = 0) -> np.ndarray:
    """Raw orbit: ``beta`` samples after discarding ``burn_in``, starting from ``x0``."""
    x = np.array(x0, dtype=np.float64)
    for _ in range(burn_in):
        x = _step(map_kind, x)
    out = np.empty(x.shape + (beta,))
    for k in range(beta):
        x = _step(map_kind, x)
        out[..., k] = x
    return out


def _degenerate(map_kind: MapKind, x0, raw: np.ndarray):
    """Boolean mask of orbits that started on or collapsed to a fixed point."""
    bad = np.isin(x0, _fixed_points(map_kind))
    bad |= ~np.all(np.isfinite(raw), axis=-1)
    bad |= np.ptp(raw, axis=-1) == 0
    return bad


def generate(map_kind: MapKind = "chebyshev", seed: int = 0, beta: int = 128,
             burn_in: int = DEFAULT_BURN_IN) -> ChaoticSequence:
    """Deterministic mean-removed chaotic sequence of ``beta`` chips.

    A seed whose orbit is degenerate is replaced by ``seed + 1`` (up to
    eight times).
    """
    if beta < 1 or burn_in < 0:
        raise ValueError("need beta >= 1 and burn_in >= 0")
    for attempt in range(MAX_RESEEDS + 1):
        x0 = _initial_state(map_kind, _unit_interval(splitmix64(seed + attempt)))
        raw = iterate(map_kind, x0, beta, burn_in)
        if beta > 1 and _degenerate(map_kind, x0, raw):
            continue
        if beta == 1 and np.isin(x0, _fixed_points(map_kind)):
            continue
        # A single chip cannot be mean-removed without vanishing.
        chips = raw - raw.mean() if beta > 1 else raw
        return ChaoticSequence(chips)
    raise DegenerateSequenceError(
        f"no usable orbit for seeds {seed}..{seed + MAX_RESEEDS}")


def generate_batch(map_kind: MapKind, seeds: np.ndarray, beta: int,
                   burn_in: int = DEFAULT_BURN_IN) -> np.ndarray:
    """Chips for many seeds at once; row ``i`` equals ``generate(seeds[i]).chips``.

    ``seeds`` are uint64 values; returns an array of shape ``seeds.shape + (beta,)``.
    """
    seeds = np.asarray(seeds, dtype=np.uint64)
    x0 = _initial_state(map_kind, _unit_interval(splitmix64(seeds)))
    raw = iterate(map_kind, x0, beta, burn_in)
    bad = _degenerate(map_kind, x0, raw) if beta > 1 else np.isin(x0, _fixed_points(map_kind))
    if beta > 1:
        raw = raw - raw.mean(axis=-1, keepdims=True)
    for idx in zip(*np.nonzero(bad)):
        raw[idx] = generate(map_kind, int(seeds[idx]), beta, burn_in).chips
    return raw


def normalize_energy(seq: ChaoticSequence, target_energy: float) -> ChaoticSequence:
    """Scale chips so that the sum of squares equals ``target_energy``."""
    if not target_energy > 0:
        raise ValueError("target_energy must be positive")
    energy = seq.energy
    if not energy > 0:
        raise ValueError("cannot normalize a zero-energy sequence")
    return ChaoticSequence(seq.chips * np.sqrt(target_energy / energy))


def normalize_rows(chips: np.ndarray, target_energy) -> np.ndarray:
    """Vectorized :func:`normalize_energy` over the last axis."""
    energy = np.einsum("...k,...k->...", chips, chips)
    if np.any(energy <= 0):
        raise ValueError("cannot normalize a zero-energy sequence")
    return chips * np.sqrt(np.asarray(target_energy) / energy)[..., None]
