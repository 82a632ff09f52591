"""Monte Carlo link simulation of multi-user OFDM-DCSK with reference averaging.

The model is the per-sub-carrier discrete equivalent of the OFDM link over
AWGN: each sub-carrier carries ``beta`` chips, one complex sample per chip.
A block has ``M`` sub-carriers; each user sends ``N`` private reference
copies and shares the ``M - N`` data sub-carriers with the other users.

All frame-level functions accept an optional leading batch axis, so
``estimate_ber`` can push many frames through numpy at once.

Randomness: trials are split into ``shards`` contiguous frame ranges.  Shard
``j`` draws bits and noise from ``SeedSequence(seed, spawn_key=(j,))``; the
chaotic sequence of user ``p`` in global frame ``f`` is seeded from a
counter, so the outcome depends only on ``(seed, shards)``.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Literal

import numpy as np

from . import chaos
from .model import Allocation, InvalidParameterError, SystemParams, require_valid

Mode = Literal["SA", "PSA"]

BATCH_FRAMES = 256


@dataclass
class Frame:
    """Noiseless transmit samples: ``ref`` is (..., P, N, beta), ``data`` is (..., M-N, beta)."""

    ref: np.ndarray
    data: np.ndarray

    def energy(self) -> np.ndarray:
        return (np.sum(np.abs(self.ref) ** 2, axis=(-3, -2, -1))
                + np.sum(np.abs(self.data) ** 2, axis=(-2, -1)))


@dataclass
class FrameObservation:
    ref_rx: np.ndarray
    data_rx: np.ndarray


def wilson_interval(errors: int, n: int, confidence: float = 0.99) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError("need at least one trial")
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    p = errors / n
    z2 = z * z
    denom = 1 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom
    return max(0.0, min(p, center - half)), min(1.0, max(p, center + half))


@dataclass
class BerEstimate:
    bit_errors: int
    bits: int
    confidence: float = 0.99
    ber: float = field(init=False)
    ci_low: float = field(init=False)
    ci_high: float = field(init=False)

    def __post_init__(self):
        if self.bits <= 0:
            raise ValueError("bits must be positive")
        self.ber = self.bit_errors / self.bits
        self.ci_low, self.ci_high = wilson_interval(self.bit_errors, self.bits, self.confidence)

    def overlaps(self, other: "BerEstimate") -> bool:
        return self.ci_low <= other.ci_high and other.ci_low <= self.ci_high


@dataclass
class SimulationResult:
    per_user: list[BerEstimate]
    pooled: BerEstimate
    trials: int
    seed: int
    shards: int


def chip_energy(params: SystemParams, alloc: Allocation) -> float:
    """Per-sequence chip energy giving exactly ``eb`` per transmitted bit.

    With equal powers this is ``(M - N) / M * eb``.
    """
    M = params.n_subcarriers
    return (M - alloc.n_ref) * params.eb / alloc.power_sum(M)


def _effective_alloc(alloc: Allocation, mode: Mode) -> Allocation:
    if mode == "SA":
        return Allocation(alloc.n_ref, 1.0, 1.0)
    if mode == "PSA":
        return alloc
    raise InvalidParameterError(f"mode must be 'SA' or 'PSA' (got {mode!r})")


def transmit_frame(params: SystemParams, alloc: Allocation, bits: np.ndarray,
                   sequences: np.ndarray) -> Frame:
    """Build reference and shared data sub-carriers.

    bits
        (..., P, M-N) array of +/-1.
    sequences
        (..., P, beta) chips, already energy-normalized.
    """
    require_valid(params, alloc)
    M, P, beta = params.n_subcarriers, params.n_users, params.spreading
    N = alloc.n_ref
    bits = np.asarray(bits)
    sequences = np.asarray(sequences, dtype=float)
    if bits.shape[-2:] != (P, M - N) or sequences.shape[-2:] != (P, beta) \
            or bits.shape[:-2] != sequences.shape[:-2]:
        raise InvalidParameterError(
            f"bits {bits.shape} / sequences {sequences.shape} do not match "
            f"P={P}, M-N={M - N}, beta={beta}")
    if not np.all(np.abs(bits) == 1):
        raise InvalidParameterError("bits must be +/-1")
    ref = np.sqrt(alloc.ref_power) * np.broadcast_to(
        sequences[..., :, None, :], sequences.shape[:-1] + (N, beta))
    data = np.sqrt(alloc.data_power) * np.einsum("...pi,...pk->...ik", bits, sequences)
    return Frame(np.array(ref), data)


def awgn(frame: Frame, n0: float, rng: np.random.Generator) -> FrameObservation:
    """Add circular complex Gaussian noise, variance ``n0/2`` per real dimension."""
    sigma = np.sqrt(n0 / 2)

    def noisy(x):
        w = rng.standard_normal(x.shape + (2,)).view(np.complex128)[..., 0]
        return x + sigma * w

    ref_rx = noisy(frame.ref)
    data_rx = noisy(frame.data)
    return FrameObservation(ref_rx, data_rx)


def averaged_reference(obs: FrameObservation) -> np.ndarray:
    """Mean over each user's reference copies: (..., P, beta)."""
    return obs.ref_rx.mean(axis=-2)


def receive_frame(obs: FrameObservation) -> tuple[np.ndarray, np.ndarray]:
    """Correlate every data sub-carrier with each user's averaged reference.

    Returns the decision statistics and decoded bits, both (..., P, M-N).
    A zero statistic decodes to +1.
    """
    r_bar = averaged_reference(obs)
    dec = np.einsum("...ik,...pk->...pi", obs.data_rx, np.conj(r_bar)).real
    return dec, np.where(dec >= 0, 1, -1)


def _frame_sequences(params, alloc, seed_base: int, frame_ids: np.ndarray,
                     map_kind, burn_in) -> np.ndarray:
    P = params.n_users
    counters = (frame_ids[:, None].astype(np.uint64) * np.uint64(P)
                + np.arange(P, dtype=np.uint64)[None, :])
    with np.errstate(over="ignore"):
        seeds = counters + np.uint64(seed_base)
    chips = chaos.generate_batch(map_kind, seeds, params.spreading, burn_in)
    return chaos.normalize_rows(chips, chip_energy(params, alloc))


def _run_shard(params, alloc, first, count, seed, shard, map_kind, burn_in):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(shard,)))
    seed_base = chaos.splitmix64(seed)
    P = params.n_users
    n_data = params.n_subcarriers - alloc.n_ref
    errors = np.zeros(P, dtype=np.int64)
    for start in range(first, first + count, BATCH_FRAMES):
        stop = min(start + BATCH_FRAMES, first + count)
        ids = np.arange(start, stop)
        seqs = _frame_sequences(params, alloc, seed_base, ids, map_kind, burn_in)
        bits = rng.integers(0, 2, size=(len(ids), P, n_data)) * 2 - 1
        obs = awgn(transmit_frame(params, alloc, bits, seqs), params.n0, rng)
        _, decoded = receive_frame(obs)
        errors += np.sum(decoded != bits, axis=(0, 2))
    return errors


def shard_ranges(trials: int, shards: int) -> list[tuple[int, int]]:
    base, extra = divmod(trials, shards)
    out, start = [], 0
    for j in range(shards):
        count = base + (1 if j < extra else 0)
        out.append((start, count))
        start += count
    return out


def estimate_ber(params: SystemParams, alloc: Allocation, trials: int, seed: int = 0,
                 mode: Mode = "SA", shards: int = 1, confidence: float = 0.99,
                 map_kind: chaos.MapKind = "chebyshev",
                 burn_in: int = chaos.DEFAULT_BURN_IN,
                 workers: int | None = 1) -> SimulationResult:
    """Monte Carlo BER over ``trials`` frames.

    Each frame carries ``P * (M - N)`` bits with fresh bits, noise and chaotic
    sequences.  ``workers`` only controls parallelism (``None`` = CPU count);
    the result depends on ``(seed, shards)`` alone.
    """
    eff = _effective_alloc(alloc, mode)
    require_valid(params, eff)
    if trials < 1 or shards < 1:
        raise InvalidParameterError("need trials >= 1 and shards >= 1")
    if seed < 0:
        raise InvalidParameterError("seed must be non-negative")
    shards = min(shards, trials)
    jobs = [(params, eff, first, count, seed, j, map_kind, burn_in)
            for j, (first, count) in enumerate(shard_ranges(trials, shards))]
    workers = os.cpu_count() if workers is None else workers
    if workers > 1 and shards > 1:
        with ProcessPoolExecutor(max_workers=min(workers, shards)) as pool:
            counts = list(pool.map(_run_shard, *zip(*jobs)))
    else:
        counts = [_run_shard(*job) for job in jobs]
    errors = np.sum(counts, axis=0)
    per_user_bits = trials * (params.n_subcarriers - eff.n_ref)
    per_user = [BerEstimate(int(e), per_user_bits, confidence) for e in errors]
    pooled = BerEstimate(int(errors.sum()), per_user_bits * params.n_users, confidence)
    return SimulationResult(per_user, pooled, trials, seed, shards)


def trials_for_bits(params: SystemParams, n_ref: int, bits: int) -> int:
    """Frames needed so that every user sees at least ``bits`` bits."""
    per_frame = params.n_subcarriers - n_ref
    return -(-bits // per_frame)


def reference_noise_variance(params: SystemParams, n_ref: int, frames: int,
                             seed: int = 0) -> float:
    """Empirical per-dimension variance of the averaged reference minus the clean chips.

    Equal-power, single-user transmission; the data sub-carriers are
    irrelevant here and are not simulated.
    """
    params1 = SystemParams(params.n_subcarriers, params.spreading, 1, params.eb, params.n0)
    alloc = Allocation(n_ref)
    require_valid(params1, alloc)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
    seed_base = chaos.splitmix64(seed)
    total, count = 0.0, 0
    for start in range(0, frames, BATCH_FRAMES):
        ids = np.arange(start, min(start + BATCH_FRAMES, frames))
        seqs = _frame_sequences(params1, alloc, seed_base, ids, "chebyshev",
                                chaos.DEFAULT_BURN_IN)
        ref = np.broadcast_to(seqs[:, :, None, :], seqs.shape[:2] + (n_ref, params.spreading))
        obs = awgn(Frame(np.array(ref), np.zeros((len(ids), 0, params.spreading))),
                   params.n0, rng)
        resid = averaged_reference(obs) - seqs
        total += np.sum(resid.real ** 2) + np.sum(resid.imag ** 2)
        count += 2 * resid.size
    return total / count
