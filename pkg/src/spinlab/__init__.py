"""Exact-diagonalisation tools for always-on XXZ spin arrays."""
from __future__ import annotations

from .errors import (
    BudgetError,
    ContractError,
    NoRevivalWindowError,
    PrecisionFloorError,
    ProtocolError,
    SingularityError,
)
from .spin_core import ChainSpec, ManyBodyOperator, SpinState, build_h, build_h1, build_h2
from .evolution import IntegratorConfig, Propagator, propagator_exact, timedep_propagator, trotter_propagator
from .ising_limit import DetuningPattern, ResidualReport, scaling_sweep, x_factor
from .triplet_gate import (
    TripletParams,
    TwoQubitGate,
    dressed_gate,
    frozen_neighbor_check,
    primitive_gate_analytic,
    primitive_gate_numeric,
    revival_time,
)
from .gate_synth import GateCircuit, MakhlinInvariants, is_entangling, makhlin, synthesize_cnot
from .switching import SwitchProfile, search_flat_duration
from .geometry import SpinGraph, commensurate_search, r_q

__version__ = "0.1.0"
