"""Photon information efficiency limits for photon-starved optical links."""

from .caplimits import RatePie, g, gh_pie_asymptote, gordon_holevo, shannon_s1, shannon_s2
from .detstats import BinarySlotStats, PnrSlotStats, binarize, pnr_stats, qpg_stats, sif_stats
from .errors import INFINITE, DomainError, NearFieldWarning, ObjectiveError, TruncationError
from .linkbudget import ChannelPoint, LinkGeometry, NoiseModel
from .optimize import Model, PpmOperatingPoint, SweepTable, maximize_over_nf, optimize_cell, sweep
from .ppmcore import (
    Mode,
    kl_binary,
    kl_discrete,
    pie_hard,
    pie_ppm_noiseless,
    pie_soft_bound,
    pie_unrestricted_bandwidth,
)

__all__ = [
    "BinarySlotStats", "ChannelPoint", "DomainError", "INFINITE", "LinkGeometry", "Mode", "Model",
    "NearFieldWarning", "NoiseModel", "ObjectiveError", "PnrSlotStats", "PpmOperatingPoint",
    "RatePie", "SweepTable", "TruncationError", "binarize", "g", "gh_pie_asymptote",
    "gordon_holevo", "kl_binary", "kl_discrete", "maximize_over_nf", "optimize_cell",
    "pie_hard", "pie_ppm_noiseless", "pie_soft_bound", "pie_unrestricted_bandwidth",
    "pnr_stats", "qpg_stats", "shannon_s1", "shannon_s2", "sif_stats", "sweep",
]
