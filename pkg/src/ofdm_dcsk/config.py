"""Experiment configuration: key=value files and sweep syntax.

Grammar, one setting per line::

    # comment
    key = value        # trailing comment

Keys are case-insensitive and ``-`` and ``_`` are interchangeable.  A sweep
value is either a comma-separated list (``1, 3, 12``) or an inclusive range
``start:stop:step`` (``0:14:1``).  Command-line flags override file values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np


class UsageError(ValueError):
    pass


KNOWN_KEYS = {
    "m", "beta", "p", "ebn0_db", "n0", "n", "a", "b", "ct", "trials", "seed",
    "shards", "out", "json", "mode", "method", "eps", "workers", "scenario",
}


def normalize_key(key: str) -> str:
    return key.strip().lower().replace("-", "_")


def read_config(path: str | Path) -> dict[str, str]:
    """Parse a key=value file.  Raises ``OSError`` if unreadable, ``UsageError`` if malformed."""
    out: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        key = normalize_key(key)
        if key not in KNOWN_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value.strip()
    return out


def parse_sweep(text: str, kind=float) -> list:
    """Expand ``"a,b,c"`` or ``"start:stop:step"`` (inclusive) into a list."""
    text = str(text).strip()
    if not text:
        raise UsageError("empty sweep")
    try:
        if ":" in text:
            parts = [float(x) for x in text.split(":")]
            if len(parts) != 3 or parts[2] == 0:
                raise UsageError(f"range must be start:stop:step (got {text!r})")
            start, stop, step = parts
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            if count < 1:
                raise UsageError(f"empty range {text!r}")
            vals = [start + i * step for i in range(count)]
            # Avoid 0.30000000000000004-style drift on decimal steps.
            vals = [float(np.round(v, 12)) for v in vals]
        else:
            vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad sweep value {text!r}: {exc}") from None
    if not vals:
        raise UsageError("empty sweep")
    if kind is int:
        if any(v != int(v) for v in vals):
            raise UsageError(f"expected integers in {text!r}")
        return [int(v) for v in vals]
    return vals


def parse_scalar(text: str, kind=float):
    vals = parse_sweep(text, kind)
    if len(vals) != 1:
        raise UsageError(f"expected a single value, got {text!r}")
    return vals[0]


def logspace(lo: float, hi: float, points: int) -> list[float]:
    return [float(x) for x in np.logspace(math.log10(lo), math.log10(hi), points)]


@dataclass
class ExperimentConfig:
    """Everything a figure run needs; list-valued fields are sweeps."""

    scenario: str
    m: int = 64
    beta: list[int] = field(default_factory=lambda: [128])
    p: list[int] = field(default_factory=lambda: [1])
    ebn0_db: list[float] = field(default_factory=lambda: [10.0])
    n0: float = 1.0
    n: list[int] | None = None
    a: list[float] | None = None
    b: list[float] | None = None
    mode: str = "SA"
    ct: float = 1.0
    trials: int = 0
    seed: int = 0
    shards: int = 1
    workers: int = 1
    out: str | None = None

    def with_overrides(self, values: dict[str, str]) -> "ExperimentConfig":
        """Return a copy with string-valued overrides applied."""
        kw = {}
        for key, text in values.items():
            key = normalize_key(key)
            if key in ("beta", "p", "n"):
                kw[key] = parse_sweep(text, int)
            elif key in ("ebn0_db", "a", "b"):
                kw[key] = parse_sweep(text, float)
            elif key in ("m", "trials", "seed", "shards", "workers"):
                kw[key] = parse_scalar(text, int)
            elif key in ("n0", "ct"):
                kw[key] = parse_scalar(text, float)
            elif key == "mode":
                mode = text.strip().upper()
                if mode not in ("SA", "PSA"):
                    raise UsageError(f"mode must be SA or PSA (got {text!r})")
                kw[key] = mode
            elif key in ("out", "scenario"):
                kw[key] = text
            elif key in KNOWN_KEYS:
                continue
            else:
                raise UsageError(f"unknown setting {key!r}")
        return replace(self, **kw)
