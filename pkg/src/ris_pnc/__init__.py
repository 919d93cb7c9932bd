"""Link-level simulator for RIS-assisted OFDM physical-layer network coding."""
from .channel import CeeSpec, ChannelRealization, NodeGeometry, apply_cee, free_space_path_loss, sample_realization
from .modem import Modulation, bits_to_digits, detect_symbol, digits_to_bits, digits_to_symbol
from .ofdm import DEFAULT_GRID, OfdmGrid, assemble, disassemble
from .pnc import pnc_map_digits, recover_peer, relay_detect
from .powerctl import AllocationError, PowerAllocation, allocate
from .riscontrol import RisPhaseConfig, effective_gain, optimal_phases, random_phases
from .simengine import (
    BerPoint,
    Scenario,
    noise_power,
    power_for_ber,
    run_bc_round,
    run_ma_round,
    run_point,
    sweep,
)

__version__ = "0.1.0"
