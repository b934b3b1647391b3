"""Maximization of PIE objectives over pulse energy, and (n_s, noise) sweeps."""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import INFINITE, DomainError, ObjectiveError
from .linkbudget import ChannelPoint, NoiseModel
from .ppmcore import Mode, binary_stats, hard_info, pie_hard, pie_soft_bound

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_NF_RANGE = (1e-6, 1e3)
PNR_NF_RANGE = (1e-6, 1e4)
BOUNDARY_FRACTION = 0.01


@dataclass(frozen=True)
class PpmOperatingPoint:
    nf_star: float
    m_star: float
    pie_star: float
    boundary_hit: bool
    evaluations: int
    flags: tuple = ()


class Model(str, enum.Enum):
    SIF_HARD = "SIF_HARD"
    SIF_SOFT = "SIF_SOFT"
    QPG_ONOFF = "QPG_ONOFF"
    QPG_PNR = "QPG_PNR"

    @property
    def noise_model(self):
        return NoiseModel.MULTIMODE if self.name.startswith("SIF") else NoiseModel.SINGLE_MODE


class _Counted:
    def __init__(self, fn):
        self.fn = fn
        self.calls = 0

    def __call__(self, x):
        self.calls += np.size(x)
        return self.fn(x)


def _evaluate(objective, x, vectorized):
    if vectorized:
        values = np.asarray(objective(x), dtype=float)
        if values.shape == x.shape:
            return values
    return np.array([float(objective(float(xi))) for xi in x])


def maximize_over_nf(objective, nf_range, rel_tol=1e-10, n_grid=240, vectorized=True):
    """Maximize a PIE objective over pulse energy n_f in ``nf_range``.

    A log-spaced scan of ``n_grid`` points locates the best grid cell; golden
    section search in log(n_f) then refines the bracketing triple until its
    width is below ``rel_tol`` (relative in n_f). The best value seen is
    returned, so the result never falls below the scan.

    ``objective`` takes n_f (an array when ``vectorized``) and returns PIE.
    An infinite value anywhere is propagated as ``pie_star = INFINITE``;
    NaN raises ObjectiveError.

    ``m_star`` is left NaN; callers with a signal strength fill it in.
    """
    lo, hi = float(nf_range[0]), float(nf_range[1])
    if not 0 < lo < hi:
        raise DomainError(f"need 0 < lo < hi, got {nf_range!r}")
    f = _Counted(objective)
    grid = np.exp(np.linspace(math.log(lo), math.log(hi), n_grid))
    grid[0], grid[-1] = lo, hi
    values = _evaluate(f, grid, vectorized)
    if np.any(np.isnan(values)):
        raise ObjectiveError(f"objective returned NaN at n_f={grid[np.isnan(values)][0]:.6g}")
    if np.any(np.isposinf(values)):
        i = int(np.argmax(np.isposinf(values)))
        return PpmOperatingPoint(grid[i], math.nan, INFINITE, False, f.calls, ("infinite",))
    i = int(np.argmax(values))
    best_x, best_v = grid[i], values[i]

    a = math.log(grid[max(i - 1, 0)])
    b = math.log(grid[min(i + 1, n_grid - 1)])

    def g(u):
        v = float(_evaluate(f, np.array([math.exp(u)]), vectorized)[0])
        if math.isnan(v):
            raise ObjectiveError(f"objective returned NaN at n_f={math.exp(u):.6g}")
        return v

    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = g(c), g(d)
    while b - a > rel_tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = g(d)
    for u, v in ((c, fc), (d, fd)):
        if v > best_v:
            best_x, best_v = math.exp(u), v

    boundary = best_x <= lo * (1 + BOUNDARY_FRACTION) or best_x >= hi / (1 + BOUNDARY_FRACTION)
    return PpmOperatingPoint(float(best_x), math.nan, float(best_v), bool(boundary), f.calls)


def default_nf_range(model):
    return PNR_NF_RANGE if Model(model) is Model.QPG_PNR else DEFAULT_NF_RANGE


def _hard_relaxed(channel):
    n_s = channel.n_s

    def objective(n_f):
        st = binary_stats(channel, n_f)
        return np.asarray(hard_info(st.p, st.q, np.asarray(n_f) / n_s)) / n_f

    return objective


def optimize_cell(model, n_s, noise, nf_range=None, rel_tol=1e-10):
    """Best PIE over n_f for one (n_s, noise) point under ``model``.

    The M >= 1 constraint is imposed by raising the lower end of the search
    to n_s (2 n_s for hard decoding, whose order is an integer >= 2); a
    lower-boundary optimum reached this way carries the ``M_CLAMPED`` flag.
    Hard decoding is optimized over a continuous order and then snapped to
    the better of the two neighbouring integers.
    """
    model = Model(model)
    lo, hi = nf_range or default_nf_range(model)
    channel = ChannelPoint(n_s, noise, model.noise_model)
    if not n_s > 0:
        raise DomainError("sweeps need n_s > 0")
    m_min = 2.0 if model is Model.SIF_HARD else 1.0
    lo_eff = max(lo, m_min * n_s)
    if lo_eff >= hi:
        raise DomainError(f"n_f range empty after enforcing M >= {m_min:g}")

    if model is Model.SIF_HARD:
        point = maximize_over_nf(_hard_relaxed(channel), (lo_eff, hi), rel_tol)
        m_cont = point.nf_star / n_s
        orders = {max(2, math.floor(m_cont)), max(2, math.ceil(m_cont))}
        orders = sorted(m for m in orders if m * n_s <= hi * (1 + 1e-12))
        if not orders:
            raise DomainError("no integer PPM order >= 2 fits the n_f range")
        v, m = max((pie_hard(channel, m * n_s, m), m) for m in orders)
        point = PpmOperatingPoint(float(m * n_s), float(m), v, point.boundary_hit,
                                  point.evaluations + len(orders))
    else:
        mode = Mode.PNR if model is Model.QPG_PNR else Mode.ONOFF
        point = maximize_over_nf(lambda nf: pie_soft_bound(channel, nf, mode), (lo_eff, hi), rel_tol)
        point = PpmOperatingPoint(point.nf_star, point.nf_star / n_s, point.pie_star,
                                  point.boundary_hit, point.evaluations, point.flags)

    flags = list(point.flags)
    if lo_eff > lo and point.nf_star <= lo_eff * (1 + BOUNDARY_FRACTION):
        flags.append("M_CLAMPED")
    if point.boundary_hit and point.nf_star >= hi / (1 + BOUNDARY_FRACTION):
        flags.append("NF_CAP")
    return PpmOperatingPoint(point.nf_star, point.m_star, point.pie_star, point.boundary_hit,
                             point.evaluations, tuple(flags))


@dataclass(frozen=True)
class SweepTable:
    """Optimization results on a rectangular grid.

    ``cells[i][j]`` holds the operating point for ``noise_grid[i]`` and
    ``ns_grid[j]``, so matrices read as noise rows by signal columns.
    """

    model: Model
    ns_grid: np.ndarray
    noise_grid: np.ndarray
    cells: list = field(repr=False)

    def _matrix(self, attr):
        return np.array([[getattr(c, attr) for c in row] for row in self.cells], dtype=float)

    @property
    def pie(self):
        return self._matrix("pie_star")

    @property
    def nf_star(self):
        return self._matrix("nf_star")

    @property
    def m_star(self):
        return self._matrix("m_star")

    def rows(self):
        for i, noise in enumerate(self.noise_grid):
            for j, n_s in enumerate(self.ns_grid):
                yield float(n_s), float(noise), self.cells[i][j]


def _check_grid(name, grid, allow_zero=False):
    grid = np.asarray(grid, dtype=float)
    low = grid < 0 if allow_zero else grid <= 0
    if grid.ndim != 1 or grid.size == 0 or np.any(low) or np.any(np.diff(grid) <= 0):
        raise DomainError(f"{name} must be a strictly increasing vector of valid values")
    return grid


def thread_count():
    try:
        return max(1, int(os.environ.get("PLL_THREADS", "1")))
    except ValueError:
        return 1


def sweep(model, ns_grid, noise_grid, nf_range=None, rel_tol=1e-10, threads=None) -> SweepTable:
    """Optimize every (n_s, noise) cell of a grid.

    Failures are captured in the cell (NaN values, ``error:`` flag) and never
    abort the sweep. Cells are independent; ``threads`` (default from the
    ``PLL_THREADS`` environment variable) only changes scheduling, not output.
    """
    model = Model(model)
    ns_grid = _check_grid("ns_grid", ns_grid)
    noise_grid = _check_grid("noise_grid", noise_grid, allow_zero=True)
    tasks = [(i, j) for i in range(noise_grid.size) for j in range(ns_grid.size)]
    cells = [[None] * ns_grid.size for _ in range(noise_grid.size)]

    def run(task):
        i, j = task
        try:
            cells[i][j] = optimize_cell(model, ns_grid[j], noise_grid[i], nf_range, rel_tol)
        except (ArithmeticError, ValueError) as exc:
            cells[i][j] = PpmOperatingPoint(math.nan, math.nan, math.nan, False, 0,
                                            (f"error: {exc}",))

    workers = threads or thread_count()
    if workers == 1:
        for task in tasks:
            run(task)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, tasks))
    return SweepTable(model, ns_grid, noise_grid, cells)
