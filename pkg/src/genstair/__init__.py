"""Generalized staircase codes with arbitrary bit degree."""

from .channel import crossover_to_gap, entropy2, entropy2_inv, gap_to_crossover, shannon_limit_ebn0
from .component import ComponentCode, DecodeAction
from .decoder import DecodeStats, WindowState, decode_frame, init_window
from .encoder import EncoderState, FrameLayout, encode_block, encode_frame
from .geometry import (
    BitCoord,
    CodeParams,
    CodewordSlot,
    block_rate,
    constraint_members,
    locate,
    nominal_rate,
    validate,
    verify_intersection,
)
from .nets import GolombRuler, PermKind, build_perm_family, lpf, optimal_ruler, verify_net, verify_ruler
from .sim import Point, SimResult, SweepSpec, run_point, run_sweep

__version__ = "0.1.0"
