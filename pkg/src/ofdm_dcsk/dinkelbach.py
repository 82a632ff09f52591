"""Joint sub-carrier and power allocation by Dinkelbach's parametric method.

The fractional objective ``U = A / B`` (see :mod:`ofdm_dcsk.analytic`) is
maximized by finding the root ``q*`` of ``F(q) = max V(a, b, N, q)`` with
``V = A - q B``.  ``F`` is strictly decreasing, positive below ``q*`` and
negative above, so ``q*`` is bracketed and bisected.

Inner maximization of ``V`` for fixed ``q`` has two methods:

``numeric``
    Exhaustive over ``N``.  For each ``N`` the powers are written as a
    total ``s = (M-N) a + N b`` and a data share ``t = (M-N) a / s``.  Then
    ``A = s**2 A2(t)`` and ``B = s**2 B2(t) + s**3 B3(t)``.  For fixed ``t``
    the best ``s`` is closed-form; ``t`` is located by a logit-spaced scan
    refined with golden-section search.
``kkt-verbatim``
    Fixed-point iteration of the closed-form stationarity updates for
    ``a``, ``b`` and the quadratic in ``N``, falling back to ``numeric``
    whenever an iterate is non-physical or infeasible.

Powers are bounded below by ``power_floor`` (default ``1e-4 * budget``).
With more than one user the interference term makes ``U`` grow as both
powers shrink, so without a floor the supremum is not attained.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .analytic import dinkelbach_v
from .model import Allocation, InvalidParameterError, SystemParams, require_valid, validate

log = logging.getLogger(__name__)

Method = Literal["numeric", "kkt-verbatim"]

GOLDEN = (math.sqrt(5) - 1) / 2
SCAN_POINTS = 257
GOLDEN_ITERS = 80
KKT_SWEEPS = 200
KKT_DAMPING = 0.5
KKT_RTOL = 1e-8
MAX_DOUBLINGS = 128
MAX_BISECTIONS = 200


class NonPhysicalUpdate(ArithmeticError):
    """A closed-form update produced a non-positive or non-finite power."""


class UnboundedRatioError(RuntimeError):
    pass


@dataclass
class DinkelbachResult:
    q_star: float
    alloc_star: Allocation
    v_residual: float
    outer_iterations: int
    inner_method: str
    converged: bool
    trace: list[tuple[float, float]] = field(default_factory=list, repr=False)


# ---------------------------------------------------------------- closed-form updates

def _physical(x: float) -> float:
    if not math.isfinite(x) or x <= 0:
        raise NonPhysicalUpdate(x)
    return x


def update_a(params: SystemParams, b: float, n: int, q: float) -> float:
    """Data power from the ``a``-stationarity condition, as a closed form in ``b``."""
    M, P = params.n_subcarriers, params.n_users
    beta, n0, eb = params.spreading, params.n0, params.eb
    N, k = n, M - n
    num = (N * b * eb**2 * k**2
           - q * M * (N + 1) * k * eb * n0 * b
           - q * beta * n0**2 * N * b * M
           - 2 * q * N**2 * b**2 * eb * (P - 1) * k)
    den = (2 * q * (N + 1) * k**2 * eb * n0 * P
           + q * beta * n0**2 * k**2
           + 4 * q * k**2 * N * b * eb * (P - 1))
    if den == 0:
        raise NonPhysicalUpdate("zero denominator")
    return _physical(num / den)


def update_b(params: SystemParams, a: float, n: int, q: float) -> float:
    """Reference power from the ``b``-stationarity condition, as a closed form in ``a``."""
    M, P = params.n_subcarriers, params.n_users
    beta, n0, eb = params.spreading, params.n0, params.eb
    N, k = n, M - n
    num = k * a * (N * k * eb**2
                   + q * (N + 1) * eb * n0 * (N - P * N - M)
                   - q * beta * n0**2 * N
                   - 2 * q * N * a * eb * (P - 1) * k)
    den = (q * beta * n0**2 * N**2
           + q * N * ((N + 1) * k * eb * n0 + 4 * N * a * eb * (P - 1) * k))
    if den == 0:
        raise NonPhysicalUpdate("zero denominator")
    return _physical(num / den)


def n_quadratic_coeffs(params: SystemParams, a: float, b: float, q: float):
    """Coefficients of the ``N``-stationarity quadratic, transcribed term by term."""
    M, P = params.n_subcarriers, params.n_users
    beta, n0, eb = params.spreading, params.n0, params.eb
    c2 = 3 * (a * b * eb**2 + q * (a - b) * ((a * P + b) * eb * n0 - 2 * a * b * (P - 1) * eb))
    c1 = (-2 * M * a * b * eb**2
          + 2 * q * (a * P + b) * eb * n0 * (2 * M * a - M * b + a + b)
          - q * beta * n0**2 * (a + b) ** 2
          + 4 * a * b * eb * (P - 1) * q * M * (a - b))
    c0 = M * (a * b * eb**2
              + q * (a * P + b) * eb * n0 * (M * a - 2 * b - 2 * b)
              + q * beta * n0**2 * a * (a + b)
              - 2 * a**2 * b * eb * (P - 1) * q * M)
    return c2, c1, c0


def quadratic_candidates(c2: float, c1: float, c0: float, m: int) -> list[int]:
    """Integer neighbours of the real roots in ``(0, m)`` plus the endpoints ``1, m-1``."""
    roots: list[float] = []
    if c2 == 0:
        if c1 != 0:
            roots = [-c0 / c1]
    else:
        disc = c1 * c1 - 4 * c2 * c0
        if disc >= 0:
            s = math.sqrt(disc)
            # Citardauq form for the smaller-magnitude root.
            t = -0.5 * (c1 + math.copysign(s, c1))
            roots = [t / c2] + ([c0 / t] if t != 0 else [])
    cands = {1, m - 1}
    for r in roots:
        if math.isfinite(r) and 0 < r < m:
            cands.update(c for c in (math.floor(r), math.ceil(r)) if 1 <= c <= m - 1)
    return sorted(cands)


def solve_n_quadratic(params: SystemParams, a: float, b: float, q: float) -> list[int]:
    return quadratic_candidates(*n_quadratic_coeffs(params, a, b, q), params.n_subcarriers)


# ---------------------------------------------------------------- numeric inner solver

class _Profile:
    """Vectorized ``V`` over N (axis 0) and data share ``t`` for fixed ``q``."""

    def __init__(self, params: SystemParams, budget: float, floor: float):
        M, P = params.n_subcarriers, params.n_users
        self.params = params
        self.budget = budget
        self.floor = floor
        self.n = np.arange(1, M, dtype=float)[:, None]
        self.k = M - self.n
        self.P = P
        self.eb, self.n0, self.beta = params.eb, params.n0, params.spreading
        # Data share range that keeps both powers above the floor at s = budget.
        self.t_lo = floor * self.k / budget
        self.t_hi = 1.0 - floor * self.n / budget

    def parts(self, t):
        k, n, eb, n0 = self.k, self.n, self.eb, self.n0
        tt = t * (1 - t)
        a2 = 2 * k * eb**2 * tt
        b2 = 2 * k * eb * (n + 1) * n0 * (t * self.P / k + (1 - t) / n) + self.beta * n0**2
        b3 = 4 * eb * (self.P - 1) * tt
        return a2, b2, b3

    def best_s(self, t, q):
        a2, b2, b3 = self.parts(t)
        s_lo = np.maximum(self.floor * self.k / t, self.floor * self.n / (1 - t))
        s_hi = np.full_like(s_lo, self.budget)
        alpha = a2 - q * b2
        gamma = q * b3
        with np.errstate(divide="ignore", invalid="ignore"):
            s_int = np.where(gamma > 0, 2 * alpha / (3 * gamma), s_hi)
        s_int = np.clip(np.where(np.isfinite(s_int), s_int, s_hi), s_lo, s_hi)
        best_v = np.full(np.broadcast(t, s_lo).shape, -np.inf)
        best = np.zeros_like(best_v)
        for s in (s_lo, s_hi, s_int):
            v = s * s * (alpha - gamma * s)
            take = v > best_v
            best_v = np.where(take, v, best_v)
            best = np.where(take, s, best)
        return best, best_v

    def maximize(self, q):
        """Best data share, total power and ``V`` for every N."""
        lo = _logit(self.t_lo)
        hi = _logit(self.t_hi)
        grid = lo + (hi - lo) * np.linspace(0.0, 1.0, SCAN_POINTS)[None, :]
        _, v = self.best_s(_expit(grid), q)
        j = np.argmax(v, axis=1)
        rows = np.arange(len(j))
        left = grid[rows, np.maximum(j - 1, 0)][:, None]
        right = grid[rows, np.minimum(j + 1, SCAN_POINTS - 1)][:, None]
        best_z = grid[rows, j][:, None]
        best_v = v[rows, j][:, None]

        x1 = right - GOLDEN * (right - left)
        x2 = left + GOLDEN * (right - left)
        f1 = self.best_s(_expit(x1), q)[1]
        f2 = self.best_s(_expit(x2), q)[1]
        for _ in range(GOLDEN_ITERS):
            shrink_right = f1 >= f2
            right = np.where(shrink_right, x2, right)
            left = np.where(shrink_right, left, x1)
            x1_old, x2_old = x1, x2
            x2 = np.where(shrink_right, x1_old, left + GOLDEN * (right - left))
            x1 = np.where(shrink_right, right - GOLDEN * (right - left), x2_old)
            f_new = self.best_s(_expit(np.where(shrink_right, x1, x2)), q)[1]
            f1, f2 = np.where(shrink_right, f_new, f2), np.where(shrink_right, f1, f_new)

        for z, f in ((x1, f1), (x2, f2)):
            take = f > best_v
            best_z = np.where(take, z, best_z)
            best_v = np.where(take, f, best_v)
        t = _expit(best_z)
        s_best, v_best = self.best_s(t, q)
        return t[:, 0], s_best[:, 0], v_best[:, 0]

    def allocation(self, n_idx: int, t: float, s: float) -> Allocation:
        n = int(self.n[n_idx, 0])
        k = self.params.n_subcarriers - n
        a = max(t * s / k, self.floor)
        b = max((1 - t) * s / n, self.floor)
        # Rounding must not push the point over budget.
        over = (k * a + n * b) / self.budget
        if over > 1:
            a, b = a / over, b / over
        return Allocation(n, float(a), float(b))


def _logit(t):
    return np.log(t) - np.log1p(-t)


def _expit(z):
    return 1.0 / (1.0 + np.exp(-z))


def _floor_for(budget: float, power_floor: float | None) -> float:
    return 1e-4 * budget if power_floor is None else power_floor


def _check_inner(params, budget, floor):
    require_valid(params)
    if not (math.isfinite(budget) and budget > 0):
        raise InvalidParameterError(f"budget must be positive and finite (got {budget!r})")
    if not 0 < floor * params.n_subcarriers < budget:
        raise InvalidParameterError(
            f"power_floor must satisfy 0 < floor * M < budget (got {floor!r})")


def _numeric_inner(params, q, budget, floor) -> Allocation:
    prof = _Profile(params, budget, floor)
    t, s, v = prof.maximize(q)
    i = int(np.argmax(v))
    return prof.allocation(i, float(t[i]), float(s[i]))


def _kkt_inner(params, q, budget, floor) -> Allocation:
    M = params.n_subcarriers
    a = b = budget / M
    n = max(1, min(M - 1, M // 2))
    for _ in range(KKT_SWEEPS):
        a_new = KKT_DAMPING * a + (1 - KKT_DAMPING) * update_a(params, b, n, q)
        b_new = KKT_DAMPING * b + (1 - KKT_DAMPING) * update_b(params, a_new, n, q)
        cands = solve_n_quadratic(params, a_new, b_new, q)
        vals = [dinkelbach_v(params, Allocation(c, a_new, b_new), q) for c in cands]
        n_new = cands[int(np.argmax(vals))]
        trial = Allocation(n_new, a_new, b_new)
        if validate(params, trial, budget) or min(a_new, b_new) < floor:
            raise NonPhysicalUpdate(f"infeasible iterate {trial}")
        change = max(abs(a_new - a) / a, abs(b_new - b) / b)
        a, b, n_old, n = a_new, b_new, n, n_new
        if change < KKT_RTOL and n == n_old:
            break
    return Allocation(n, a, b)


def _inner(params, q, budget, method, floor) -> tuple[Allocation, str]:
    if method == "kkt-verbatim":
        try:
            return _kkt_inner(params, q, budget, floor), "kkt-verbatim"
        except NonPhysicalUpdate as exc:
            log.debug("kkt-verbatim fallback at q=%r: %s", q, exc)
            return _numeric_inner(params, q, budget, floor), "numeric"
    if method == "numeric":
        return _numeric_inner(params, q, budget, floor), "numeric"
    raise InvalidParameterError(f"unknown inner method {method!r}")


def inner_maximize(params: SystemParams, q: float, budget: float = 1.0,
                   method: Method = "numeric", power_floor: float | None = None) -> Allocation:
    """Maximize ``A - q B`` over feasible ``(a, b, N)`` for a fixed ``q``."""
    floor = _floor_for(budget, power_floor)
    _check_inner(params, budget, floor)
    if not (math.isfinite(q) and q >= 0):
        raise InvalidParameterError(f"q must be finite and >= 0 (got {q!r})")
    return _inner(params, q, budget, method, floor)[0]


def bisection_solve(params: SystemParams, budget: float = 1.0, eps: float = 1e-9,
                    q_hi_init: float = 1.0, method: Method = "numeric",
                    power_floor: float | None = None, xtol: float = 1e-12) -> DinkelbachResult:
    """Find ``q*`` with ``F(q*) = 0`` by bracketing and bisection.

    Stops once ``|F(q)| < eps`` and the bracket is narrower than
    ``xtol * q``, or after 200 bisections.  The extra bracket condition keeps
    the answer accurate when ``V`` is tiny for reasons of scale; pass
    ``xtol=math.inf`` to stop on the residual alone.
    """
    floor = _floor_for(budget, power_floor)
    _check_inner(params, budget, floor)
    if not eps > 0 or not q_hi_init > 0:
        raise InvalidParameterError("need eps > 0 and q_hi_init > 0")
    methods_used = set()
    trace: list[tuple[float, float]] = []

    def F(q):
        alloc, used = _inner(params, q, budget, method, floor)
        methods_used.add(used)
        v = dinkelbach_v(params, alloc, q)
        trace.append((q, v))
        return alloc, v

    q_lo = 0.0
    F(q_lo)
    q_hi = q_hi_init
    for _ in range(MAX_DOUBLINGS):
        _, v_hi = F(q_hi)
        if v_hi < 0:
            break
        q_lo = q_hi
        q_hi *= 2
    else:
        raise UnboundedRatioError(f"F(q) still non-negative at q={q_hi}")

    lower = None
    q, (alloc, v) = q_lo, F(q_lo)
    iters = 0
    for iters in range(1, MAX_BISECTIONS + 1):
        q_mid = 0.5 * (q_lo + q_hi)
        if not q_lo < q_mid < q_hi:
            break
        q = q_mid
        alloc, v = F(q)
        if v > 0:
            q_lo = q
            lower = (q, alloc, v)
        else:
            q_hi = q
        if abs(v) < eps and (q_hi - q_lo) <= xtol * q:
            if v > 0 or (lower is not None and abs(lower[2]) < eps):
                break
    # Prefer the last point below q*: it is a maximizer with U >= q, whereas
    # above q* the maximizer can collapse onto the power floor.
    if v <= 0 and lower is not None and abs(lower[2]) < eps:
        q, alloc, v = lower
    converged = abs(v) < eps
    inner = "kkt-verbatim" if methods_used == {"kkt-verbatim"} else "numeric"
    return DinkelbachResult(q, alloc, v, iters, inner, converged, trace)


# ---------------------------------------------------------------- grid oracle

@dataclass(frozen=True)
class GridSpec:
    points: int = 50
    low: float = 1e-4  # relative to the budget

    def values(self, budget: float) -> np.ndarray:
        return np.logspace(math.log10(self.low * budget), math.log10(budget), self.points)

    def refined(self) -> "GridSpec":
        """Twice as fine, keeping every existing node."""
        return GridSpec(2 * self.points - 1, self.low)


def grid_ratio(params: SystemParams, budget: float | None, grid: GridSpec | None = None,
               budget_for_grid: float = 1.0):
    """Ratio ``U`` on the full (N, a, b) grid; infeasible points are ``-inf``."""
    grid = grid or GridSpec()
    require_valid(params)
    M, P = params.n_subcarriers, params.n_users
    beta, n0, eb = params.spreading, params.n0, params.eb
    vals = grid.values(budget if budget is not None else budget_for_grid)
    n = np.arange(1, M, dtype=float)[:, None, None]
    a = vals[None, :, None]
    b = vals[None, None, :]
    k = M - n
    total = k * a + n * b
    num = 2 * n * a * b * k**2 * eb**2
    den = k * eb * total * (2 * (a * P + b) * (n + 1) * n0 + 4 * a * b * (P - 1) * n) \
        + beta * n0**2 * total**2
    u = num / den
    if budget is not None:
        u = np.where(total <= budget, u, -np.inf)
    return u, vals, total


def grid_oracle(params: SystemParams, budget: float = 1.0,
                grid: GridSpec | None = None) -> Allocation:
    """Exhaustive feasible argmax of ``U`` over log-spaced powers and all N.

    With a single user ``U`` depends only on the power ratio, so many grid
    points tie up to rounding; ties within 1e-12 relative go to the largest
    total power, then the smaller N.
    """
    u, vals, total = grid_ratio(params, budget, grid)
    best = u.max()
    near = u >= best * (1 - 1e-12)
    score = np.where(near, total, -np.inf)
    i, j, l = np.unravel_index(int(np.argmax(score)), u.shape)
    return Allocation(int(i) + 1, float(vals[j]), float(vals[l]))


def oracle_is_interior(alloc: Allocation, budget: float = 1.0,
                       grid: GridSpec | None = None) -> bool:
    """True when neither power of the oracle optimum sits on the edge of the grid."""
    vals = (grid or GridSpec()).values(budget)
    edges = (vals[0], vals[-1])
    return alloc.data_power not in edges and alloc.ref_power not in edges
