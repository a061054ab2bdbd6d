"""Pulse-sequence language, supercycles and refocused-nutation runs."""

from .dsl import format_sequence, load_sequence, parse_sequence, tokenize
from .pulses import (
    BLOCK_REGISTRY,
    EnsembleMember,
    InhomogeneitySpec,
    Pulse,
    PulseBlock,
    Supercycle,
    SupercycleEntry,
    build_r2,
    build_r3,
    expand_to_program,
    register_block,
    waltz8_supercycle,
)
from .refocus import (
    CwEnsembleResult,
    DecaySeries,
    leakage_ratio,
    n_sweep,
    simulate_cw_ensemble,
    simulate_refocused_nutation,
    simulated_leakage_ratio,
)

__all__ = [
    "BLOCK_REGISTRY",
    "CwEnsembleResult",
    "DecaySeries",
    "EnsembleMember",
    "InhomogeneitySpec",
    "Pulse",
    "PulseBlock",
    "Supercycle",
    "SupercycleEntry",
    "build_r2",
    "build_r3",
    "expand_to_program",
    "format_sequence",
    "leakage_ratio",
    "load_sequence",
    "n_sweep",
    "parse_sequence",
    "register_block",
    "simulate_cw_ensemble",
    "simulate_refocused_nutation",
    "simulated_leakage_ratio",
    "tokenize",
    "waltz8_supercycle",
]
