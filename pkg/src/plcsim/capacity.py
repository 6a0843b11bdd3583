"""Shannon-style link rates under flat transmit and noise power densities.

The per-subcarrier SNR is the flat PSD gap (tx - noise, in dB) shifted by the
channel gain; the spectral efficiency is capped to model finite constellation
orders.  Capacity is the bandwidth-weighted sum over the frequency grid:

    C = df * sum_k min(log2(1 + |H(f_k)|^2 * snr0), eta_max)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelResponse, FrequencyGrid


@dataclass(frozen=True)
class PsdConfig:
    """Flat transmit PSD, flat Gaussian noise floor, spectral-efficiency cap.

    The defaults give a 90 dB per-Hz SNR at 0 dB channel gain, which puts a
    -100 dB link near 10 Mbit/s and a -120 dB link below 1 Mbit/s, and a cap
    that pins an ideal link at about 1 Gbit/s over the default band.
    """

    tx_dbm_per_hz: float = -50.0
    noise_dbm_per_hz: float = -140.0
    eta_max_bits_per_s_per_hz: float = 12.0

    def __post_init__(self) -> None:
        if self.tx_dbm_per_hz <= self.noise_dbm_per_hz:
            raise ValueError("transmit PSD must exceed the noise PSD")
        if self.eta_max_bits_per_s_per_hz <= 0:
            raise ValueError("eta_max must be positive")


@dataclass(frozen=True)
class CapacityResult:
    bps: float


def link_capacity(response: ChannelResponse, psd: PsdConfig, fgrid: FrequencyGrid) -> CapacityResult:
    """Achievable rate of one link over the frequency grid."""
    h = np.asarray(response.h)
    if h.size != fgrid.n_points:
        raise ValueError(f"response has {h.size} points, grid has {fgrid.n_points}")
    snr0 = 10.0 ** ((psd.tx_dbm_per_hz - psd.noise_dbm_per_hz) / 10.0)
    bits = np.minimum(np.log2(1.0 + np.abs(h) ** 2 * snr0), psd.eta_max_bits_per_s_per_hz)
    return CapacityResult(bps=float(fgrid.df_hz * bits.sum()))
