import math

import numpy as np
import pytest
from scipy import stats

from pielimits import detstats as ds
from pielimits import mcoracle as mc
from pielimits.errors import DomainError
from pielimits.linkbudget import NoiseModel
from pielimits.ppmcore import hard_info

N = 400_000


class TestSamplers:
    def test_sif_click_probability(self):
        hist = mc.sample_sif_counts(0.5 + 1.122e-4, N, seed=11)
        assert abs(hist.click_probability().z_score(ds.sif_stats(0.5, 1.122e-4).p)) < 3

    def test_sif_histogram(self):
        hist = mc.sample_sif_counts(2.0, N, seed=3)
        pmf = stats.poisson.pmf(np.arange(40), 2.0)
        _, _, pval = mc.chi_square_gof(hist, pmf)
        assert pval > 1e-3

    def test_qpg_click_probability(self):
        hist = mc.sample_qpg_counts(2.0, 0.1, N, seed=5)
        ref = ds.qpg_stats(2.0, 0.1)
        assert abs(hist.click_probability().z_score(ref.p)) < 3
        empty = mc.sample_qpg_counts(0.0, 0.1, N, seed=6)
        assert abs(empty.click_probability().z_score(ref.q)) < 3

    @pytest.mark.parametrize("n_f,n_n", [(1.0, 0.1), (0.3, 1.0), (5.0, 0.01)])
    def test_qpg_histogram(self, n_f, n_n):
        hist = mc.sample_qpg_counts(n_f, n_n, N, seed=17)
        law = ds.pnr_stats(n_f, n_n)
        assert all(abs(z) < 4 for _, z in mc.bin_z_scores(hist, law.p_k))
        _, _, pval = mc.chi_square_gof(hist, law.p_k)
        assert pval > 1e-3

    def test_thermal_mean(self):
        hist = mc.sample_qpg_counts(0.5, 0.4, N, seed=2)
        assert abs(hist.mean().z_score(0.9)) < 3

    @pytest.mark.slow
    def test_no_bias_across_seeds(self):
        # q_0 = 1/2 at n_n = 1 over ten independent streams of 1e7 slots
        zs = [mc.sample_qpg_counts(0.0, 1.0, 10**7, seed=s).probability(0).z_score(0.5)
              for s in range(10)]
        assert abs(np.mean(zs)) * math.sqrt(10) < 3
        assert 0.5 < np.std(zs) < 1.6

    def test_reproducible(self):
        a = mc.sample_qpg_counts(1.0, 0.1, 3 * mc.CHUNK // 2, seed=9)
        b = mc.sample_qpg_counts(1.0, 0.1, 3 * mc.CHUNK // 2, seed=9)
        np.testing.assert_array_equal(a.counts, b.counts)

    def test_workers_do_not_change_result(self):
        a = mc.sample_sif_counts(1.0, 3 * mc.CHUNK // 2, seed=4, workers=1)
        b = mc.sample_sif_counts(1.0, 3 * mc.CHUNK // 2, seed=4, workers=2)
        np.testing.assert_array_equal(a.counts, b.counts)

    def test_seed_changes_result(self):
        a = mc.sample_sif_counts(1.0, 1000, seed=1)
        b = mc.sample_sif_counts(1.0, 1000, seed=2)
        assert not np.array_equal(a.counts, b.counts)

    @pytest.mark.parametrize("kw", [dict(samples=0, seed=1), dict(samples=10, seed=-1)])
    def test_domain(self, kw):
        with pytest.raises(DomainError):
            mc.sample_sif_counts(1.0, **kw)


class TestMutualInformation:
    def test_independent_table(self):
        mi, se = mc.plug_in_mutual_information(np.full((4, 5), 100))
        assert mi == 0.0 and se == 0.0

    def test_identity_channel(self):
        mi, _ = mc.plug_in_mutual_information(np.eye(8) * 50)
        assert mi == pytest.approx(3.0, rel=1e-14)

    def test_noiseless_frames(self):
        # no noise: the frame decodes iff the pulse registers, PIE = p log2(m) / n_f
        n_s, m = 0.02, 16
        est = mc.simulate_hard_frames(n_s, 0.0, m, frames=200_000, seed=8)
        n_f = m * n_s
        assert abs(est.z_score(-math.expm1(-n_f) * 4 / n_f)) < 3

    @pytest.mark.parametrize("model", [NoiseModel.MULTIMODE, NoiseModel.SINGLE_MODE])
    def test_frames_match_closed_form(self, model):
        n_s, noise, m = 0.02, 0.01, 8
        n_f = m * n_s
        st = ds.sif_stats(n_f, noise) if model is NoiseModel.MULTIMODE else ds.qpg_stats(n_f, noise)
        est = mc.simulate_hard_frames(n_s, noise, m, model=model, frames=300_000, seed=21)
        assert abs(est.z_score(hard_info(st.p, st.q, m) / n_f)) < 3

    def test_useless_channel(self):
        # a vanishing pulse leaves the decision independent of the symbol
        est = mc.simulate_hard_frames(1e-12, 0.2, 2, frames=200_000, seed=4)
        assert est.value * 2e-12 < 3 * est.std_err * 2e-12 + 1e-4

    def test_frame_domain(self):
        with pytest.raises(DomainError):
            mc.simulate_hard_frames(0.1, 0.1, 1)
        with pytest.raises(DomainError):
            mc.simulate_hard_frames(0.1, 0.1, 4, n_f=1.0)


class TestStatistics:
    def test_chi_square_totals_balance(self):
        hist = mc.CountHistogram(np.array([50, 30, 15, 4, 1]), seed=0)
        pmf = np.array([0.5, 0.3, 0.15, 0.04, 0.01])
        stat, dof, pval = mc.chi_square_gof(hist, pmf)
        assert stat == pytest.approx(0.0, abs=1e-12) and pval == pytest.approx(1.0)
        assert dof >= 1

    def test_chi_square_detects_mismatch(self):
        hist = mc.sample_sif_counts(1.0, N, seed=1)
        _, _, pval = mc.chi_square_gof(hist, stats.poisson.pmf(np.arange(30), 1.05))
        assert pval < 1e-6

    def test_bin_z_scores_threshold(self):
        hist = mc.CountHistogram(np.array([90, 10]), seed=0)
        assert [k for k, _ in mc.bin_z_scores(hist, [0.9, 0.1], min_expected=25)] == [0]
