"""Information measures for PPM with photon-counting detection.

PIE values are bits per received photon. Functions taking ``n_f`` accept a
float or an array of pulse energies unless stated otherwise.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numba
import numpy as np
from scipy.special import rel_entr, xlogy

from .detstats import (
    DEFAULT_TAIL_TOL,
    K_CAP,
    BinarySlotStats,
    _recur,
    _tail_done,
    qpg_stats,
    sif_stats,
)
from .errors import INFINITE, DomainError, TruncationError
from .linkbudget import ChannelPoint, NoiseModel

LN2 = math.log(2.0)


class Mode(str, enum.Enum):
    ONOFF = "onoff"
    PNR = "pnr"


@dataclass(frozen=True)
class PpmFrame:
    """Pulse energy, PPM order and slot signal strength, tied by n_f = M n_s."""

    n_f: float
    m: float
    n_s: float

    def __post_init__(self):
        if not self.n_f > 0 or not self.m >= 1:
            raise DomainError("PpmFrame requires n_f > 0 and m >= 1")
        if not math.isclose(self.n_f, self.m * self.n_s, rel_tol=1e-12):
            raise DomainError("PpmFrame requires n_f == m * n_s")

    @classmethod
    def from_order(cls, n_s, m):
        return cls(m * n_s, m, n_s)

    @classmethod
    def from_energy(cls, n_s, n_f):
        return cls(n_f, n_f / n_s, n_s)


def pie_ppm_noiseless(n_f, m):
    """PIE of noiseless PPM: erasure-limited, (1 - e^-n_f) log2(M) / n_f."""
    n_f = np.asarray(n_f, float)
    if np.any(n_f <= 0) or not m >= 1:
        raise DomainError("pie_ppm_noiseless requires n_f > 0 and m >= 1")
    out = -np.expm1(-n_f) / n_f * math.log2(m)
    return float(out) if out.ndim == 0 else out


def _check_low_signal(n_s):
    if not (0 < n_s < math.exp(-1)):
        raise DomainError(f"asymptotic formulas need 0 < n_s < 1/e, got {n_s!r}")


def pie_ppm_asymptotic(n_s: float) -> float:
    """Leading terms of the optimized noiseless PPM PIE, log2(1/n_s) - log2 ln(1/n_s)."""
    _check_low_signal(n_s)
    return math.log2(1.0 / n_s) - math.log2(math.log(1.0 / n_s))


def nf_star_approx(n_s: float) -> float:
    """Approximate optimal noiseless pulse energy, 2 / ln(2e / n_s)."""
    _check_low_signal(n_s)
    return 2.0 / math.log(2.0 * math.e / n_s)


def _binary_kl_nats(x, xc, y, yc):
    # xc, yc are the complements 1-x, 1-y, passed separately to keep precision.
    return rel_entr(x, y) + rel_entr(xc, yc)


def kl_binary(x, y):
    """Relative entropy D(x || y) between Bernoulli laws, in bits.

    Uses 0 log 0 = 0. Returns ``INFINITE`` when x puts mass where y has none.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if np.any((x < 0) | (x > 1) | (y < 0) | (y > 1)):
        raise DomainError("kl_binary arguments must be probabilities")
    out = _binary_kl_nats(x, 1.0 - x, y, 1.0 - y) / LN2
    return float(out) if out.ndim == 0 else out


def kl_discrete(p, y, tail_mass: float = 0.0, return_error: bool = False):
    """Relative entropy D(p || y) between integer-valued laws, in bits.

    ``p`` and ``y`` are aligned on k = 0..K. With ``return_error`` the result
    is ``(value, bound)`` where ``bound`` estimates the contribution of the
    mass ``tail_mass`` truncated beyond K: by the log-sum inequality it lies
    between ``tail_mass * log2(tail_mass)`` and the tail mass times the last
    log-likelihood ratio, taken as non-decreasing past K.
    """
    p = np.asarray(p, float)
    y = np.asarray(y, float)
    if p.shape != y.shape:
        raise DomainError("kl_discrete needs aligned supports")
    if np.any(p < 0) or np.any(y < 0):
        raise DomainError("kl_discrete needs non-negative vectors")
    value = float(np.sum(rel_entr(p, y)) / LN2)
    if not return_error:
        return value
    if tail_mass <= 0 or math.isinf(value):
        return value, 0.0
    last = np.flatnonzero(p > 0)
    llr = abs(math.log2(p[last[-1]] / y[last[-1]])) if last.size else 0.0
    bound = tail_mass * max(llr, -math.log2(tail_mass))
    return value, bound


def binary_stats(channel: ChannelPoint, n_f) -> BinarySlotStats:
    if channel.noise_model is NoiseModel.MULTIMODE:
        return sif_stats(n_f, channel.noise)
    return qpg_stats(n_f, channel.noise)


def _binary_laws(channel, n_f):
    """(p, 1-p, q, 1-q) with both complements computed without cancellation."""
    n_f = np.asarray(n_f, float)
    nz = channel.noise
    if channel.noise_model is NoiseModel.MULTIMODE:
        return -np.expm1(-(n_f + nz)), np.exp(-(n_f + nz)), -math.expm1(-nz), math.exp(-nz)
    nn1 = 1.0 + nz
    pc = np.exp(-n_f / nn1) / nn1
    return (nz - np.expm1(-n_f / nn1)) / nn1, pc, nz / nn1, 1.0 / nn1


@numba.njit(cache=True, nogil=True)
def _pnr_divergence(n_f, n_n, w, tail_tol, k_cap):
    """D(p || w p + (1 - w) q) in nats for the displaced-thermal / geometric pair.

    Terms are accumulated in log space while the Laguerre recurrence runs, so
    no distribution vectors are materialized. Returns NaN past ``k_cap``.
    """
    nn1 = 1.0 + n_n
    r = n_n / nn1
    b = n_f / (nn1 * nn1)
    log_pref = -math.log(nn1) - n_f / nn1
    log_q0 = -math.log(nn1)
    log_r = math.log(r) if r > 0.0 else -math.inf
    log_w = math.log(w) if w > 0.0 else -math.inf
    log_wc = math.log1p(-w) if w < 1.0 else -math.inf
    mean = n_f + n_n
    total = 0.0
    t_prev, t, log_scale = 0.0, 1.0, 0.0
    p_prev = 0.0
    k = 0
    while k <= k_cap:
        pk = 0.0
        if t > 0.0:
            lp = log_pref + log_scale + math.log(t)
            pk = math.exp(lp)
            if pk > 0.0:
                lq = log_q0 if k == 0 else log_q0 + k * log_r
                u = log_w + lp
                v = log_wc + lq
                hi = max(u, v)
                if hi == -math.inf:
                    return math.inf
                ly = hi + math.log1p(math.exp(min(u, v) - hi))
                total += pk * (lp - ly)
        if _tail_done(k, mean, n_n, r, pk, p_prev, tail_tol) >= 0.0:
            return max(total, 0.0)
        t_prev, t, log_scale = _recur(k, r, b, t_prev, t, log_scale)
        p_prev = pk
        k += 1
    return math.nan


@numba.njit(cache=True, nogil=True)
def _pnr_divergence_many(n_f, n_n, w, tail_tol, k_cap):
    out = np.empty(n_f.size)
    for i in range(n_f.size):
        out[i] = _pnr_divergence(n_f[i], n_n, w[i], tail_tol, k_cap)
    return out


def pnr_divergence(n_f, n_n, weight, tail_tol=DEFAULT_TAIL_TOL):
    """D(p || w p + (1 - w) q) in bits for photon-number-resolved counts.

    ``weight`` is the pulse share w of the reference mixture (1/M); w = 0
    gives D(p || q).
    """
    n_f_arr, w_arr = np.broadcast_arrays(np.asarray(n_f, float), np.asarray(weight, float))
    flat = _pnr_divergence_many(
        np.ascontiguousarray(n_f_arr).ravel(), float(n_n), np.ascontiguousarray(w_arr).ravel(),
        float(tail_tol), K_CAP,
    )
    if np.any(np.isnan(flat)):
        raise TruncationError(f"count law for n_n={n_n} exceeds k_max={K_CAP}")
    out = (flat / LN2).reshape(n_f_arr.shape)
    return float(out) if out.ndim == 0 else out


def _check_mode(channel, mode):
    mode = Mode(mode)
    if mode is Mode.PNR and channel.noise_model is not NoiseModel.SINGLE_MODE:
        raise DomainError("PNR statistics are defined for single-mode noise only")
    return mode


def pie_soft_bound(channel: ChannelPoint, n_f, mode=Mode.ONOFF):
    """Lower bound on the soft-decoded PPM PIE.

    Evaluates (1/n_f) D(p || p/M + (1 - 1/M) q) with M = n_f / n_s treated as
    continuous. ``n_s == 0`` gives the unrestricted-bandwidth integrand
    (1/n_f) D(p || q).
    """
    mode = _check_mode(channel, mode)
    n_f = np.asarray(n_f, float)
    if np.any(n_f <= 0):
        raise DomainError("n_f must be positive")
    if np.any(n_f < channel.n_s * (1.0 - 1e-12)):
        raise DomainError("PPM order M = n_f / n_s must be >= 1")
    w = np.minimum(channel.n_s / n_f, 1.0)
    if mode is Mode.PNR:
        info = np.asarray(pnr_divergence(n_f, channel.noise, w))
    else:
        p, pc, q, qc = _binary_laws(channel, n_f)
        info = _binary_kl_nats(p, pc, w * p + (1 - w) * q, w * pc + (1 - w) * qc) / LN2
    out = info / n_f
    return float(out) if out.ndim == 0 else out


def hard_info(p, q, m):
    """Mutual information (bits per frame) of single-click hard PPM decoding.

    A frame yields a decision only when exactly one of its ``m`` slots
    clicks; every other pattern is an erasure, whose probability does not
    depend on the symbol and so carries no information. ``m`` may be real
    (>= 2) for continuous relaxation.
    """
    p, q, m = np.broadcast_arrays(np.asarray(p, float), np.asarray(q, float), np.asarray(m, float))
    a = p * (1 - q) ** (m - 1)  # click only in the pulse slot
    b = (1 - p) * q * (1 - q) ** (m - 2)  # click only in one given empty slot
    ybar = (a + (m - 1) * b) / m
    with np.errstate(divide="ignore", invalid="ignore"):
        info = (xlogy(a, a) - xlogy(a, ybar) + (m - 1) * (xlogy(b, b) - xlogy(b, ybar))) / LN2
    info = np.where(ybar > 0, np.maximum(info, 0.0), 0.0)
    return float(info) if info.ndim == 0 else info


def pie_hard(channel: ChannelPoint, n_f, m: int):
    """PIE of hard-decoded PPM of integer order ``m``.

    Only the channel's noise enters; ``channel.n_s`` is not consulted.
    """
    if int(m) != m or m < 2:
        raise DomainError(f"hard decoding needs an integer PPM order >= 2, got {m!r}")
    n_f = np.asarray(n_f, float)
    if np.any(n_f < 0):
        raise DomainError("n_f must be >= 0")
    st = binary_stats(channel, n_f)
    info = np.asarray(hard_info(st.p, st.q, m))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(n_f > 0, info / np.where(n_f > 0, n_f, 1.0), 0.0)
    return float(out) if out.ndim == 0 else out


class Supremum(NamedTuple):
    pie: float
    nf_star: float
    boundary_hit: bool


def pie_unrestricted_bandwidth(channel: ChannelPoint, mode=Mode.ONOFF, nf_cap: float = 1e3,
                               nf_lo: float = 1e-6, rel_tol: float = 1e-10) -> Supremum:
    """PIE attainable without a bandwidth limit: sup over n_f of D(p || q) / n_f.

    Only the noise part of ``channel`` is used. Zero noise makes the
    divergence infinite and returns ``INFINITE``. ``boundary_hit`` reports a
    maximizer within 1% of ``nf_cap`` (or ``nf_lo``).
    """
    from .optimize import maximize_over_nf

    mode = _check_mode(channel, mode)
    if not nf_cap > nf_lo > 0:
        raise DomainError("need 0 < nf_lo < nf_cap")
    if channel.noise == 0:
        return Supremum(INFINITE, math.nan, False)
    noise_only = ChannelPoint(0.0, channel.noise, channel.noise_model, channel.mode_count)
    point = maximize_over_nf(
        lambda nf: pie_soft_bound(noise_only, nf, mode), (nf_lo, nf_cap), rel_tol=rel_tol,
    )
    return Supremum(point.pie_star, point.nf_star, point.boundary_hit)
