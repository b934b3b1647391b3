import math

import numpy as np
import pytest

from pielimits import optimize as opt
from pielimits.caplimits import gh_pie_asymptote
from pielimits.errors import INFINITE, DomainError, ObjectiveError
from pielimits.linkbudget import ChannelPoint, from_db
from pielimits.ppmcore import pie_hard

NIGHT_NN = from_db(-72.5)


class TestMaximizer:
    def test_smooth_peak(self):
        point = opt.maximize_over_nf(lambda x: -np.log(x / 0.37) ** 2, (1e-6, 1e3))
        assert point.nf_star == pytest.approx(0.37, rel=1e-8)
        assert point.pie_star == pytest.approx(0.0, abs=1e-15)
        assert not point.boundary_hit

    def test_boundary(self):
        point = opt.maximize_over_nf(lambda x: np.log(x), (1e-3, 10.0))
        assert point.boundary_hit and point.nf_star == 10.0

    def test_scalar_objective(self):
        point = opt.maximize_over_nf(lambda x: -(math.log(x) - 1) ** 2, (1e-2, 1e2), vectorized=False)
        assert point.nf_star == pytest.approx(math.e, rel=1e-8)

    def test_nan(self):
        with pytest.raises(ObjectiveError):
            opt.maximize_over_nf(lambda x: np.full_like(x, np.nan), (1e-3, 1.0))

    def test_infinite(self):
        point = opt.maximize_over_nf(lambda x: np.where(x > 0.5, np.inf, 1.0), (1e-3, 1.0))
        assert point.pie_star == INFINITE and "infinite" in point.flags

    @pytest.mark.parametrize("rng", [(0.0, 1.0), (1.0, 0.5), (-1.0, 1.0)])
    def test_bad_range(self, rng):
        with pytest.raises(DomainError):
            opt.maximize_over_nf(np.log, rng)

    def test_multimodal_guarded_by_scan(self):
        # narrow global peak at 100 beside a broad local one at 1e-3
        f = lambda x: np.exp(-np.log(x / 1e-3) ** 2) + 2 * np.exp(-np.log(x / 100) ** 2 / 0.1)
        assert opt.maximize_over_nf(f, (1e-6, 1e3)).nf_star == pytest.approx(100, rel=1e-6)


class TestCell:
    def test_sif_soft_reference(self):
        cell = opt.optimize_cell("SIF_SOFT", 1e-2, 1e-4)
        assert 0.1 < cell.nf_star < 1.5
        assert cell.pie_star == pytest.approx(3.695310696655556, rel=1e-9)

    def test_sif_soft_second_reference(self):
        cell = opt.optimize_cell("SIF_SOFT", 1e-4, 1e-3)
        assert cell.pie_star == pytest.approx(5.853667419424777, rel=1e-9)
        assert cell.nf_star == pytest.approx(0.42568, rel=1e-3)

    def test_qpg_reference(self):
        cell = opt.optimize_cell("QPG_ONOFF", 1e-6, NIGHT_NN)
        assert cell.pie_star == pytest.approx(14.700550731548232, rel=1e-9)

    @pytest.mark.parametrize("model", list(opt.Model))
    def test_energy_order_consistency(self, model):
        cell = opt.optimize_cell(model, 1e-3, 1e-3)
        assert cell.m_star * 1e-3 == pytest.approx(cell.nf_star, rel=1e-12)

    @pytest.mark.parametrize("model", ["SIF_SOFT", "QPG_ONOFF", "QPG_PNR"])
    def test_certificate(self, model):
        cell = opt.optimize_cell(model, 1e-3, 1e-3)
        ch = ChannelPoint(1e-3, 1e-3, opt.Model(model).noise_model)
        mode = "pnr" if model == "QPG_PNR" else "onoff"
        from pielimits.ppmcore import pie_soft_bound
        for nb in (cell.nf_star * (1 - 1e-5), cell.nf_star * (1 + 1e-5)):
            assert cell.pie_star >= pie_soft_bound(ch, nb, mode)

    def test_hard_integer_order(self):
        cell = opt.optimize_cell("SIF_HARD", 1e-3, 1e-4)
        assert cell.m_star == int(cell.m_star) >= 2
        ch = ChannelPoint.multimode(1e-3, 1e-4)
        m = int(cell.m_star)
        for other in (m - 1, m + 1):
            if other >= 2:
                assert cell.pie_star >= pie_hard(ch, other * 1e-3, other)

    def test_order_clamp_flag(self):
        # unconstrained the optimum wants M ~ 3; a tight range pins it to M = 2
        cell = opt.optimize_cell("SIF_HARD", 1.0, 1e-3, nf_range=(1e-6, 2.5))
        assert cell.m_star == 2.0 and cell.nf_star == 2.0
        assert "M_CLAMPED" in cell.flags

    def test_hard_order_stays_in_range(self):
        with pytest.raises(DomainError):
            opt.optimize_cell("SIF_HARD", 1.0, 1e-3, nf_range=(1e-6, 1.5))

    def test_pnr_cap_flag(self):
        cell = opt.optimize_cell("QPG_PNR", 1e-12, NIGHT_NN, nf_range=(1e-6, 0.1))
        assert cell.boundary_hit and "NF_CAP" in cell.flags
        assert cell.nf_star == 0.1

    def test_deterministic(self):
        a = opt.optimize_cell("QPG_PNR", 1e-4, 1e-3)
        b = opt.optimize_cell("QPG_PNR", 1e-4, 1e-3)
        assert a == b

    def test_domain(self):
        with pytest.raises(DomainError):
            opt.optimize_cell("SIF_SOFT", 0.0, 1e-3)
        with pytest.raises(DomainError):
            opt.optimize_cell("SIF_SOFT", 2e3, 1e-3)
        with pytest.raises(ValueError):
            opt.optimize_cell("NOPE", 1e-3, 1e-3)


class TestSweep:
    NS = np.geomspace(1e-6, 1e-1, 4)
    NOISE = np.geomspace(1e-6, 1e-1, 4)

    @pytest.mark.parametrize("model", list(opt.Model))
    def test_monotone_in_noise(self, model):
        table = opt.sweep(model, self.NS, self.NOISE)
        assert np.all(np.diff(table.pie, axis=0) <= 1e-12)

    def test_pnr_dominates_onoff(self):
        on = opt.sweep("QPG_ONOFF", self.NS, self.NOISE).pie
        pnr = opt.sweep("QPG_PNR", self.NS, self.NOISE).pie
        assert np.all(pnr >= on * (1 - 1e-9))
        gap = pnr - on
        # the advantage opens up as the signal falls below the noise
        assert np.all(gap[:, 0] >= gap[:, -1])

    def test_soft_below_gh_asymptote(self):
        for model in ("QPG_ONOFF", "QPG_PNR"):
            table = opt.sweep(model, self.NS, self.NOISE)
            bound = np.array([gh_pie_asymptote(n) for n in self.NOISE])[:, None]
            assert np.all(table.pie <= bound * (1 + 1e-9))

    def test_qpg_saturation(self):
        n_n = 10 ** -7.25
        ns = [n_n / 10, n_n / 100, n_n / 1000]
        pies = [opt.optimize_cell("QPG_ONOFF", x, n_n).pie_star for x in ns]
        assert max(pies) / min(pies) - 1 < 0.01
        assert pies[-1] == pytest.approx(18.48, abs=0.01)

    def test_threads_do_not_change_output(self):
        a = opt.sweep("SIF_SOFT", self.NS, self.NOISE, threads=1)
        b = opt.sweep("SIF_SOFT", self.NS, self.NOISE, threads=3)
        assert a.cells == b.cells

    def test_errors_stay_in_cell(self):
        table = opt.sweep("SIF_SOFT", [1e-3, 5e3], [1e-3])
        good, bad = table.cells[0]
        assert math.isfinite(good.pie_star)
        assert math.isnan(bad.pie_star) and bad.flags[0].startswith("error:")

    def test_zero_noise_row(self):
        table = opt.sweep("SIF_SOFT", [1e-3], [0.0, 1e-3])
        assert np.all(np.isfinite(table.pie))
        assert table.pie[0, 0] > table.pie[1, 0]

    def test_layout(self):
        table = opt.sweep("SIF_SOFT", [1e-3, 1e-2], [1e-4])
        assert table.pie.shape == (1, 2)
        assert [r[:2] for r in table.rows()] == [(1e-3, 1e-4), (1e-2, 1e-4)]

    @pytest.mark.parametrize("grid", [[], [1e-3, 1e-4], [-1.0]])
    def test_bad_grid(self, grid):
        with pytest.raises(DomainError):
            opt.sweep("SIF_SOFT", grid, [1e-3])
