"""Link budget: constants, diffraction loss and photon-number conversions.

All inputs are SI. Conversions from astronomical units, wavelengths and
slot durations live in the CLI layer.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Optional

from .errors import DomainError, NearFieldWarning

# Exact SI (2019) and IAU (2012) defined values.
C = 299_792_458.0
H = 6.626_070_15e-34
AU = 1.495_978_707e11


@dataclass(frozen=True)
class PhysicalConstants:
    c: float = C
    h: float = H
    au: float = AU


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class LinkGeometry:
    """Physical parameters of a free-space optical link.

    Parameters
    ----------
    r : float
        Link range (m).
    d_tx, d_rx : float
        Transmit and receive aperture diameters (m).
    f_c : float
        Carrier frequency (Hz).
    eta_rx, eta_atm : float
        Receiver subsystem efficiency and atmospheric transmission, in (0, 1].
    p_tx : float
        Transmitted optical power (W). Zero is accepted and yields zero flux.
    """

    r: float
    d_tx: float
    d_rx: float
    f_c: float
    eta_rx: float = 1.0
    eta_atm: float = 1.0
    p_tx: float = 1.0

    def __post_init__(self):
        for name in ("r", "d_tx", "d_rx", "f_c", "eta_rx", "eta_atm"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")
        if self.eta_rx > 1 or self.eta_atm > 1:
            raise DomainError("efficiencies must not exceed 1")
        if not (self.p_tx >= 0 and math.isfinite(self.p_tx)):
            raise DomainError(f"p_tx must be non-negative, got {self.p_tx!r}")


class NoiseModel(str, enum.Enum):
    """How background noise reaches the detector."""

    MULTIMODE = "multimode"  # n_b: Poissonian counts from N >> 1 modes
    SINGLE_MODE = "single_mode"  # n_n: thermal noise in the signal mode only


@dataclass(frozen=True)
class ChannelPoint:
    """Signal and noise strengths per slot.

    ``noise`` is n_b for MULTIMODE and n_n for SINGLE_MODE. ``mode_count``
    optionally records the number of filter modes N behind a MULTIMODE value.
    """

    n_s: float
    noise: float
    noise_model: NoiseModel = NoiseModel.SINGLE_MODE
    mode_count: Optional[int] = None

    def __post_init__(self):
        if not self.n_s >= 0:
            raise DomainError(f"n_s must be >= 0, got {self.n_s!r}")
        if not self.noise >= 0:
            raise DomainError(f"noise must be >= 0, got {self.noise!r}")
        object.__setattr__(self, "noise_model", NoiseModel(self.noise_model))

    @classmethod
    def multimode(cls, n_s, n_b, mode_count=None):
        return cls(n_s, n_b, NoiseModel.MULTIMODE, mode_count)

    @classmethod
    def single_mode(cls, n_s, n_n):
        return cls(n_s, n_n, NoiseModel.SINGLE_MODE, 1)

    @property
    def n_b(self):
        if self.noise_model is not NoiseModel.MULTIMODE:
            raise AttributeError("n_b is defined for MULTIMODE channels only")
        return self.noise

    @property
    def n_n(self):
        if self.noise_model is not NoiseModel.SINGLE_MODE:
            raise AttributeError("n_n is defined for SINGLE_MODE channels only")
        return self.noise


def diffraction_loss(geom: LinkGeometry) -> float:
    """Far-field power transmission between two circular apertures.

    Returns ``f_c**2 * (pi * d_rx * d_tx / (4 c))**2 / r**2``. A value above
    one means the far-field approximation is broken; a NearFieldWarning is
    issued and the value is still returned.
    """
    loss = (geom.f_c / geom.r) ** 2 * (math.pi * geom.d_rx * geom.d_tx / (4.0 * C)) ** 2
    if loss > 1.0:
        warnings.warn(
            f"diffraction transmission {loss:.3g} > 1; far-field formula invalid",
            NearFieldWarning,
            stacklevel=2,
        )
    return loss


def received_power(geom: LinkGeometry) -> float:
    """Received optical power (W)."""
    return geom.eta_rx * geom.eta_atm * diffraction_loss(geom) * geom.p_tx


def photon_flux(p_rx: float, f_c: float) -> float:
    """Photons per second carried by power ``p_rx`` at carrier ``f_c``."""
    if not f_c > 0:
        raise DomainError(f"f_c must be positive, got {f_c!r}")
    if not p_rx >= 0:
        raise DomainError(f"p_rx must be non-negative, got {p_rx!r}")
    return p_rx / (H * f_c)


def signal_per_slot(flux: float, slot_rate: float) -> float:
    """Mean signal photons per slot, n_s = flux / B."""
    if not slot_rate > 0:
        raise DomainError(f"slot_rate must be positive, got {slot_rate!r}")
    if not flux >= 0:
        raise DomainError(f"flux must be non-negative, got {flux!r}")
    return flux / slot_rate


def noise_per_slot(noise_psd: float, f_c: float, mode_count: int = 1) -> float:
    """Mean background photons per slot from a noise PSD (W/Hz).

    With ``mode_count == 1`` this is n_n, the noise in the signal mode;
    otherwise it is n_b = N * n_n for a filter passing N modes.
    """
    if int(mode_count) != mode_count or mode_count < 1:
        raise DomainError(f"mode_count must be a positive integer, got {mode_count!r}")
    if not noise_psd >= 0:
        raise DomainError(f"noise_psd must be non-negative, got {noise_psd!r}")
    if not f_c > 0:
        raise DomainError(f"f_c must be positive, got {f_c!r}")
    return mode_count * noise_psd / (H * f_c)


def db(x: float) -> float:
    """Power ratio in decibels."""
    if not x > 0:
        raise DomainError(f"dB of non-positive value {x!r}")
    return 10.0 * math.log10(x)


def from_db(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def frequency_from_wavelength(wavelength: float) -> float:
    if not wavelength > 0:
        raise DomainError(f"wavelength must be positive, got {wavelength!r}")
    return C / wavelength
