"""PN-ASK: a covert amplitude stream layered on M-PSK, with analytic SER,
Monte Carlo simulation, rate optimization and an OFDM packet layer."""

__version__ = "0.1.0"

from .analytic import QuadratureError, covert_ser, energy_per_symbol, goodput, primary_ser, ser_fading
from .channel import ChannelKind, ChannelModel, NoiseSpec, apply_channel, squared_gain_pdf
from .marcum import marcum_q1
from .modem import (
    CovertCodingMap,
    ModemError,
    build_coding_map,
    pnask_demodulate,
    pnask_modulate,
)
from .montecarlo import SimConfig, amplitude_statistics, estimate_ser
from .optimizer import SearchSpace, optimize

__all__ = [
    "ChannelKind",
    "ChannelModel",
    "CovertCodingMap",
    "ModemError",
    "NoiseSpec",
    "QuadratureError",
    "SearchSpace",
    "SimConfig",
    "amplitude_statistics",
    "apply_channel",
    "build_coding_map",
    "covert_ser",
    "energy_per_symbol",
    "estimate_ser",
    "goodput",
    "marcum_q1",
    "optimize",
    "pnask_demodulate",
    "pnask_modulate",
    "primary_ser",
    "ser_fading",
    "squared_gain_pdf",
]
