"""Downlink multi-user MISO precoding under a per-antenna peak power limit."""

__version__ = "0.1.0"

from .amplifier import PaConfig, PowerReport, clip, consumed_power, power_report, radiated_power
from .linear import (
    LinearPrecoder,
    LrceSettings,
    LrceTrace,
    fit_lrce,
    lrce_cost,
    lrce_gradient_P,
    optimal_f_linear,
    selection_matrix,
    wiener_filter,
)
from .receiver import BerRecord, blind_gain, count_bit_errors, detect
from .signals import (
    Constellation,
    NoiseModel,
    build_constellation,
    draw_channel,
    draw_noise,
    draw_symbols,
)
from .symbolwise import (
    SymbolwiseSettings,
    SymbolwiseSolution,
    calibrate_f,
    solve_block,
    solve_symbol,
    symbolwise_cost,
    symbolwise_gradient_x,
)
