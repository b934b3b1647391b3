"""Reference data for the Psyche deep-space downlink to the Aristarchos Telescope.

Signal fluxes and mission rate expectations follow the downlink budget of
Rielander et al. (ICSO 2022). The expected rates are echoed as reference
data only and are never computed here.
"""

DISTANCE_AU = (1.25, 1.50, 1.75, 2.00, 2.25, 2.50, 2.75)

SIGNAL_FLUX_PHPS = (1.67e5, 1.16e5, 8.53e4, 6.53e4, 5.16e4, 4.18e4, 3.45e4)

EXPECTED_RATE_MBPS = (0.456, 0.456, 0.228, 0.228, 0.228, 0.114, 0.114)

EXPECTED_RATE_SOURCE = "mission downlink budget estimate (Rielander et al., ICSO 2022); not computed"

# Night background: 1.40e4 photons/s through a 2 nm filter in an 8 ns slot,
# about N = 2000 modes. Day operation assumes a 30 dB noise penalty.
NIGHT_BG_FLUX_PHPS = 1.40e4
SLOT_NS = 8.0
MODE_COUNT = 2000
NIGHT_NB_DB = -39.5
NIGHT_NN_DB = -72.5
DAY_NN_DB = -42.5
DAY_PENALTY_DB = 30.0

# Attainable-rate figures (Mbps) published with the expected rates, used to
# check reproductions. The multimode daytime column was never published.
PUBLISHED_RATES_MBPS = {
    "sif_dd_night": (1.435, 0.997, 0.733, 0.561, 0.443, 0.359, 0.296),
    "qpg_dd_night": (3.087, 2.144, 1.577, 1.207, 0.954, 0.773, 0.638),
    "qpg_dd_day": (1.579, 1.097, 0.807, 0.617, 0.488, 0.395, 0.326),
    "gh_night": (4.023, 2.794, 2.055, 1.573, 1.243, 1.007, 0.831),
    "gh_day": (2.359, 1.638, 1.205, 0.922, 0.729, 0.590, 0.487),
}
