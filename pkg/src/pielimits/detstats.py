"""Per-slot detection statistics for PPM receivers.

Three receiver models are covered:

* multimode filtering followed by on/off detection (Poissonian noise),
* single-mode pulse gating followed by on/off detection,
* single-mode pulse gating followed by photon-number-resolving detection,
  where the counts follow the displaced-thermal law built on Laguerre
  polynomials.

The displaced-thermal pulse-slot law used here is

    p_k = n_n**k / (1 + n_n)**(k + 1) * exp(-n_f / (1 + n_n))
          * L_k(-n_f / (n_n * (1 + n_n)))

which sums to one and reduces to the geometric empty-slot law at n_f = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import DomainError, TruncationError

DEFAULT_TAIL_TOL = 1e-12
K_CAP = 1 << 20
_BIG = 1e250
_SMALL = 1e-250


@dataclass(frozen=True)
class BinarySlotStats:
    """Click probabilities for a pulse slot (``p``) and an empty slot (``q``).

    Fields may be floats or equally shaped arrays.
    """

    p: float
    q: float

    def __post_init__(self):
        p, q = np.asarray(self.p), np.asarray(self.q)
        if np.any(q < 0) or np.any(p > 1) or np.any(q > p * (1 + 1e-12) + 1e-300):
            raise DomainError("slot statistics must satisfy 0 <= q <= p <= 1")


@dataclass(frozen=True)
class PnrSlotStats:
    """Photocount distributions over k = 0..k_max for pulse and empty slots.

    ``tail_mass`` bounds the probability beyond ``k_max`` in either vector.
    ``noiseless`` marks the n_n = 0 limit (Poissonian pulse, no empty-slot
    counts).
    """

    p_k: np.ndarray = field(repr=False)
    q_k: np.ndarray = field(repr=False)
    k_max: int
    tail_mass: float
    noiseless: bool = False

    def __post_init__(self):
        self.p_k.setflags(write=False)
        self.q_k.setflags(write=False)


def _check_nonneg(**kwargs):
    for name, value in kwargs.items():
        if np.any(~(np.asarray(value) >= 0)):
            raise DomainError(f"{name} must be >= 0")


def sif_stats(n_f, n_b) -> BinarySlotStats:
    """Click probabilities behind a multimode filter with Poissonian noise."""
    _check_nonneg(n_f=n_f, n_b=n_b)
    return BinarySlotStats(-np.expm1(-np.add(n_f, n_b)), -np.expm1(-np.asarray(n_b, float)))


def qpg_stats(n_f, n_n) -> BinarySlotStats:
    """Click probabilities behind a single-mode pulse gate with thermal noise."""
    _check_nonneg(n_f=n_f, n_n=n_n)
    n_f = np.asarray(n_f, float)
    nn1 = 1.0 + np.asarray(n_n, float)
    p = (n_n - np.expm1(-n_f / nn1)) / nn1
    q = n_n / nn1
    if p.ndim == 0:
        p, q = float(p), float(q)
    return BinarySlotStats(p, q)


# --- displaced-thermal count law -------------------------------------------
#
# The recurrence runs on t_k = r**k * L_k(-x), r = n_n/(1+n_n), which obeys
#   t_{k+1} = (((2k+1) r + b) t_k - k r**2 t_{k-1}) / (k+1),  b = r*x,
# and stays finite as n_n -> 0 (it becomes the Poisson recurrence).  t is
# kept within [_SMALL, _BIG] by folding a scale factor into ``log_scale``.


@numba.njit(cache=True, nogil=True)
def _recur(k, r, b, t_prev, t, log_scale):
    t_next = (((2 * k + 1) * r + b) * t - k * r * r * t_prev) / (k + 1)
    if t_next < r * t * (1.0 - 1e-9):
        # L_{k+1}(-x) >= L_k(-x) for x >= 0; anything else is a numerical fault.
        raise ArithmeticError("Laguerre recurrence lost monotonicity")
    if t_next > _BIG or 0.0 < t_next < _SMALL:
        s = t_next
        t_next = 1.0
        t = t / s
        log_scale += math.log(s)
    return t, t_next, log_scale


@numba.njit(cache=True, nogil=True)
def _tail_done(k, mean, n_n, r, pk, p_prev, tail_tol):
    """Return the pulse-law tail bound if truncation after ``k`` is safe, else -1.

    Both the mass and the first moment beyond ``k`` must be small: the mass
    absolutely, the moment relative to the law's mean.
    """
    q_tail = r ** (k + 1)
    if k <= mean or q_tail >= tail_tol:
        return -1.0
    if q_tail * (k + 1 + r / (1.0 - r)) > tail_tol * n_n:
        return -1.0
    if pk == 0.0:
        return 0.0
    rho = pk / p_prev
    if rho >= 1.0:
        return -1.0
    g = rho / (1.0 - rho)
    bound = pk * g
    if bound >= tail_tol or pk * g * (k + 1.0 / (1.0 - rho)) > tail_tol * mean:
        return -1.0
    return bound


@numba.njit(cache=True, nogil=True)
def _displaced_thermal_pmf(n_f, n_n, tail_tol, k_cap):
    nn1 = 1.0 + n_n
    r = n_n / nn1
    b = n_f / (nn1 * nn1)
    log_pref = -math.log(nn1) - n_f / nn1
    mean = n_f + n_n
    buf = np.empty(64)
    t_prev, t, log_scale = 0.0, 1.0, 0.0
    p_prev = 0.0
    k = 0
    while k <= k_cap:
        pk = math.exp(log_pref + log_scale + math.log(t)) if t > 0.0 else 0.0
        if k == buf.size:
            grown = np.empty(2 * buf.size)
            grown[:k] = buf
            buf = grown
        buf[k] = pk
        tail = _tail_done(k, mean, n_n, r, pk, p_prev, tail_tol)
        if tail >= 0.0:
            return buf[: k + 1].copy(), max(tail, r ** (k + 1))
        t_prev, t, log_scale = _recur(k, r, b, t_prev, t, log_scale)
        p_prev = pk
        k += 1
    return buf[:0].copy(), -1.0


@numba.njit(cache=True, nogil=True)
def _log_laguerre_neg(k_max, x):
    out = np.empty(k_max + 1)
    l_prev, l_cur, log_scale = 0.0, 1.0, 0.0
    for k in range(k_max + 1):
        out[k] = log_scale + math.log(l_cur)
        l_next = ((2 * k + 1 + x) * l_cur - k * l_prev) / (k + 1)
        if l_next > _BIG:
            l_prev = l_cur / l_next
            log_scale += math.log(l_next)
            l_cur = 1.0
        else:
            l_prev, l_cur = l_cur, l_next
    return out


def log_laguerre_neg(k_max: int, x: float) -> np.ndarray:
    """Natural log of L_k(-x) for k = 0..k_max and x >= 0.

    At negative argument every term of the Laguerre series is positive, so
    the forward three-term recurrence is stable; overflow is avoided by
    rescaling into a running log offset.
    """
    if not x >= 0:
        raise DomainError("log_laguerre_neg requires x >= 0")
    return _log_laguerre_neg(int(k_max), float(x))


def pnr_stats(n_f: float, n_n: float, tail_tol: float = DEFAULT_TAIL_TOL) -> PnrSlotStats:
    """Photocount distributions behind a single-mode pulse gate.

    The empty-slot law is geometric (Bose-Einstein) with mean ``n_n``; the
    pulse-slot law is displaced thermal with mean ``n_f + n_n``. Both vectors
    are truncated at a common ``k_max`` chosen so each tail is below
    ``tail_tol``.

    For ``n_n == 0`` the pulse law is Poissonian, the empty slot never
    counts, and the result is flagged ``noiseless``.
    """
    if not (0 < tail_tol <= 1e-9):
        raise DomainError(f"tail_tol must lie in (0, 1e-9], got {tail_tol!r}")
    _check_nonneg(n_f=n_f, n_n=n_n)
    p_k, tail = _displaced_thermal_pmf(float(n_f), float(n_n), float(tail_tol), K_CAP)
    if tail < 0:
        raise TruncationError(f"count law for n_f={n_f}, n_n={n_n} exceeds k_max={K_CAP}")
    k = np.arange(p_k.size)
    if n_n > 0:
        q_k = np.exp(k * math.log(n_n / (1.0 + n_n)) - math.log1p(n_n))
    else:
        q_k = np.zeros(p_k.size)
        q_k[0] = 1.0
    return PnrSlotStats(p_k, q_k, int(p_k.size - 1), float(tail), noiseless=(n_n == 0))


def binarize(stats: PnrSlotStats) -> BinarySlotStats:
    """Collapse photocounts to click / no click."""
    q = 1.0 - stats.q_k[0]
    # both complements round when p_0 ~ q_0 ~ 1; the laws are ordered, so keep p >= q
    return BinarySlotStats(max(1.0 - stats.p_k[0], q), q)
