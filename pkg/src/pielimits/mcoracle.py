"""Monte Carlo photocount sampling used to cross-check the analytic laws.

The photocount model is semiclassical: a slot's count is Poisson given its
intensity. Multimode background has fixed intensity n_b; single-mode thermal
background has a complex Gaussian amplitude beta with E|beta|^2 = n_n, which
the pulse displaces by sqrt(n_f).

Work is split into fixed-size chunks, each drawn from its own Philox stream
spawned from one SeedSequence. Chunk histograms are summed, so the result
depends only on (seed, parameters, chunk size), never on scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DomainError
from .linkbudget import NoiseModel

CHUNK = 1 << 20


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_err: float
    samples: int
    seed: int

    def z_score(self, expected):
        if self.std_err == 0:
            return 0.0 if self.value == expected else math.copysign(math.inf, self.value - expected)
        return (self.value - expected) / self.std_err


@dataclass(frozen=True)
class CountHistogram:
    """Empirical photocount histogram: ``counts[k]`` slots registered k photons."""

    counts: np.ndarray
    seed: int

    @property
    def samples(self):
        return int(self.counts.sum())

    def probability(self, k) -> McEstimate:
        """Estimated P(count == k) with its binomial standard error."""
        n = self.samples
        hits = int(self.counts[k]) if k < self.counts.size else 0
        return _binomial(hits, n, self.seed)

    def click_probability(self) -> McEstimate:
        """Estimated P(count >= 1)."""
        return _binomial(self.samples - int(self.counts[0]), self.samples, self.seed)

    def mean(self) -> McEstimate:
        k = np.arange(self.counts.size)
        n = self.samples
        mu = float(np.dot(k, self.counts)) / n
        var = float(np.dot((k - mu) ** 2, self.counts)) / max(n - 1, 1)
        return McEstimate(mu, math.sqrt(var / n), n, self.seed)


def _binomial(hits, n, seed):
    frac = hits / n
    return McEstimate(frac, math.sqrt(frac * (1 - frac) / n), n, seed)


def _streams(seed, n):
    if not 0 <= int(seed) < 2**64:
        raise DomainError("seed must be a 64-bit unsigned integer")
    children = np.random.SeedSequence(int(seed)).spawn(n)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def _chunked(total, seed, draw, workers=1, chunk=CHUNK):
    """Run ``draw(rng, size)`` over independent chunks and sum the results."""
    if total <= 0:
        raise DomainError("sample count must be positive")
    sizes = [chunk] * (total // chunk) + ([total % chunk] if total % chunk else [])
    jobs = list(zip(_streams(seed, len(sizes)), sizes))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: draw(*job), jobs))
    else:
        parts = [draw(*job) for job in jobs]
    width = max(p.size for p in parts)
    return sum(np.pad(p, (0, width - p.size)) for p in parts)


def _thermal_intensity(rng, n_f, n_n, shape):
    sigma = math.sqrt(n_n / 2.0)
    re = rng.standard_normal(shape) * sigma + math.sqrt(n_f)
    im = rng.standard_normal(shape) * sigma
    return re * re + im * im


def sample_sif_counts(mean, samples, seed, workers=1) -> CountHistogram:
    """Histogram of Poisson(mean) photocounts over ``samples`` slots."""
    if not mean >= 0:
        raise DomainError("mean must be >= 0")

    def draw(rng, size):
        return np.bincount(rng.poisson(mean, size))

    return CountHistogram(_chunked(int(samples), seed, draw, workers), int(seed))


def sample_qpg_counts(n_f, n_n, samples, seed, workers=1) -> CountHistogram:
    """Histogram of photocounts for a coherent pulse in single-mode thermal noise."""
    if not (n_f >= 0 and n_n >= 0):
        raise DomainError("n_f and n_n must be >= 0")

    def draw(rng, size):
        return np.bincount(rng.poisson(_thermal_intensity(rng, n_f, n_n, size)))

    return CountHistogram(_chunked(int(samples), seed, draw, workers), int(seed))


def plug_in_mutual_information(joint):
    """Plug-in mutual information (bits) of a joint count table, with its standard error.

    The standard error is the delta-method value sqrt(Var[i] / N), where i is
    the pointwise information log2 P(x, y) / (P(x) P(y)).
    """
    joint = np.asarray(joint, dtype=float)
    n = joint.sum()
    pxy = joint / n
    px = pxy.sum(axis=1, keepdims=True)
    py = pxy.sum(axis=0, keepdims=True)
    nz = pxy > 0
    info = np.zeros_like(pxy)
    info[nz] = np.log2(pxy[nz] / (px * py)[nz])
    mi = float(np.sum(pxy * info))
    second = float(np.sum(pxy * info * info))
    return mi, math.sqrt(max(second - mi * mi, 0.0) / n)


def simulate_hard_frames(n_s, noise, m, n_f=None, model=NoiseModel.MULTIMODE, frames=10**6,
                         seed=0, workers=1) -> McEstimate:
    """Estimate the hard-decoding PIE of PPM by simulating whole frames.

    Each frame carries a uniform symbol; every slot is sampled under the
    noise ``model`` and the decision is the clicking slot when exactly one
    slot clicks, an erasure otherwise. The plug-in mutual information of the
    symbol-to-decision table is divided by ``n_f`` (default ``m * n_s``).
    """
    m = int(m)
    if m < 2:
        raise DomainError("hard decoding needs m >= 2")
    n_f = m * n_s if n_f is None else n_f
    if not math.isclose(n_f, m * n_s, rel_tol=1e-12):
        raise DomainError("n_f must equal m * n_s")
    model = NoiseModel(model)
    chunk = max(1, CHUNK // m)

    def draw(rng, size):
        sym = rng.integers(0, m, size)
        rows = np.arange(size)
        if model is NoiseModel.MULTIMODE:
            counts = rng.poisson(noise, (size, m))
            counts[rows, sym] += rng.poisson(n_f, size)
        else:
            intensity = _thermal_intensity(rng, 0.0, noise, (size, m))
            intensity[rows, sym] = _thermal_intensity(rng, n_f, noise, size)
            counts = rng.poisson(intensity)
        clicks = counts > 0
        single = clicks.sum(axis=1) == 1
        decision = np.where(single, clicks.argmax(axis=1), m)
        return np.bincount(sym * (m + 1) + decision, minlength=m * (m + 1))

    joint = _chunked(int(frames), seed, draw, workers, chunk).reshape(m, m + 1)
    mi, se = plug_in_mutual_information(joint)
    return McEstimate(mi / n_f, se / n_f, int(frames), int(seed))


def bin_z_scores(hist: CountHistogram, pmf, min_expected=25.0):
    """Per-bin z-scores of an empirical histogram against a model pmf.

    Only bins whose expected count reaches ``min_expected`` are returned, as
    a list of ``(k, z)``.
    """
    n = hist.samples
    pmf = np.asarray(pmf, float)
    out = []
    for k, pk in enumerate(pmf):
        expected = n * pk
        if expected < min_expected:
            continue
        observed = hist.counts[k] if k < hist.counts.size else 0
        out.append((k, (observed - expected) / math.sqrt(expected * (1 - pk))))
    return out


def chi_square_gof(hist: CountHistogram, pmf, min_expected=5.0):
    """Pearson chi-square goodness of fit, pooling sparse bins into one tail bin.

    Returns ``(statistic, dof, p_value)``.
    """
    n = hist.samples
    pmf = np.asarray(pmf, float)
    width = max(pmf.size, hist.counts.size)
    observed = np.pad(hist.counts, (0, width - hist.counts.size)).astype(float)
    expected = np.pad(pmf, (0, width - pmf.size)) * n
    keep = expected >= min_expected
    obs = list(observed[keep])
    exp = list(expected[keep])
    rest_obs, rest_exp = n - sum(obs), n - sum(exp)
    if rest_exp >= min_expected or not obs:
        obs.append(rest_obs)
        exp.append(rest_exp)
    else:
        obs[-1] += rest_obs
        exp[-1] += rest_exp
    obs, exp = np.array(obs), np.array(exp)
    stat = float(np.sum((obs - exp) ** 2 / exp))
    dof = max(len(obs) - 1, 1)
    return stat, dof, float(stats.chi2.sf(stat, dof))
