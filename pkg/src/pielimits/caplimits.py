"""Closed-form capacity and PIE limits for a single bosonic mode.

Rates are in bits per slot (per unit bandwidth), PIE in bits per photon.
At ``n_s == 0`` the PIE is returned as its analytic limit rather than NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import INFINITE, DomainError
from .linkbudget import H

LOG2E = 1.0 / math.log(2.0)


@dataclass(frozen=True)
class RatePie:
    rate_per_slot: float
    pie: float


def _check(n_s, n_n):
    if not n_s >= 0:
        raise DomainError(f"n_s must be >= 0, got {n_s!r}")
    if not n_n >= 0:
        raise DomainError(f"n_n must be >= 0, got {n_n!r}")


def g(x):
    """Entropy (bits) of a thermal state with mean photon number ``x``.

    Evaluated as ``log2(1 + x) + x * log2(1 + 1/x)``, which avoids the
    cancellation of the textbook form at large x; g(0) = 0.
    Accepts scalars or arrays.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("g(x) requires x >= 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log1p(x) + np.where(x > 0, x * np.log1p(1.0 / np.where(x > 0, x, 1.0)), 0.0)
    out = out * LOG2E
    return float(out) if out.ndim == 0 else out


def g_prime(x):
    """Derivative of g: log2(1 + 1/x)."""
    if not x > 0:
        raise DomainError("g'(x) requires x > 0")
    return math.log1p(1.0 / x) * LOG2E


def shannon_s1(n_s: float, n_n: float) -> RatePie:
    """Shot-noise limited homodyne detection of one quadrature."""
    _check(n_s, n_n)
    rate = 0.5 * math.log1p(4.0 * n_s / (1.0 + 2.0 * n_n)) * LOG2E
    pie = rate / n_s if n_s > 0 else 2.0 / (1.0 + 2.0 * n_n) * LOG2E
    return RatePie(rate, pie)


def shannon_s2(n_s: float, n_n: float) -> RatePie:
    """Shot-noise limited heterodyne detection of both quadratures."""
    _check(n_s, n_n)
    rate = math.log1p(n_s / (1.0 + n_n)) * LOG2E
    pie = rate / n_s if n_s > 0 else 1.0 / (1.0 + n_n) * LOG2E
    return RatePie(rate, pie)


def _gh_rate_nats(s, a):
    # g(a + s) - g(a) rearranged so that no O(1) terms cancel when s << a.
    head = s * math.log1p(1.0 / (a + s))
    tail = (a + 1.0) * math.log1p(s / (a + 1.0))
    if a > 0:
        # s / a overflows for subnormal a; the split form stays finite
        tail -= a * math.log1p(s / a) if s <= a else a * (math.log(a + s) - math.log(a))
    return head + tail


def gordon_holevo(n_s: float, n_n: float) -> RatePie:
    """Ultimate capacity of the thermal-noise bosonic channel.

    rate = g(n_s + n_n) - g(n_n). For ``n_s == 0`` the PIE is the
    wideband asymptote log2(1 + 1/n_n), infinite when n_n is also zero.
    """
    _check(n_s, n_n)
    if n_s == 0:
        return RatePie(0.0, gh_pie_asymptote(n_n) if n_n > 0 else INFINITE)
    rate = _gh_rate_nats(n_s, n_n) * LOG2E
    return RatePie(rate, rate / n_s)


def gh_pie_asymptote(n_n: float) -> float:
    """Supremum of the Gordon-Holevo PIE over signal strength, log2(1 + 1/n_n).

    Returns ``INFINITE`` for n_n == 0, where the PIE is unbounded.
    """
    if not n_n >= 0:
        raise DomainError(f"n_n must be >= 0, got {n_n!r}")
    if n_n == 0:
        return INFINITE
    return g_prime(n_n)


def classical_rate_strong_noise(p_rx: float, noise_psd: float) -> float:
    """Power-limited rate (bits/s) when the noise PSD dwarfs h*f_c."""
    if not noise_psd > 0:
        raise DomainError(f"noise_psd must be positive, got {noise_psd!r}")
    return p_rx / noise_psd * LOG2E


def classical_pie(f_c: float, noise_psd: float) -> float:
    """PIE of the strong-noise limit: (h f_c / noise_psd) * log2(e)."""
    if not f_c > 0:
        raise DomainError(f"f_c must be positive, got {f_c!r}")
    return classical_rate_strong_noise(H * f_c, noise_psd)


def gh_rate_wideband(p_rx: float, f_c: float, noise_psd: float) -> float:
    """Wideband Gordon-Holevo rate (bits/s): photon flux times log2(1 + h f_c / N)."""
    if not f_c > 0 or not noise_psd > 0:
        raise DomainError("f_c and noise_psd must be positive")
    return p_rx / (H * f_c) * math.log1p(H * f_c / noise_psd) * LOG2E
