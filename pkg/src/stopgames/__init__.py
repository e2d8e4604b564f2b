"""Solver and verifier for two-player stopping games on finite event trees.

Payoffs are revealed at the later of the two stop times, and each player may
adjust her plan after observing the other player's stop.  The package
computes mixed equilibria for the simultaneous-move game, pure equilibria
for the game where player 1 commits first at each stage, and saddle points
for the zero-sum case, certifying every output with exact best-response
oracles.
"""

from .dynkin import (
    DynkinSolution,
    ZeroSumSaddle,
    dynkin_hitting_saddle,
    dynkin_value,
    solve_dynkin,
    zero_sum_saddle,
)
from .errors import EnumerationCapError, GameSpecError, SolverDefectError
from .gamefile import GameDocument, generate_random_game
from .sequential import SeqEquilibrium, SeqProcessBundle, seq_equilibrium, seq_processes
from .simultaneous import (
    RandomizedDynkinEquilibrium,
    SimEquilibrium,
    SimProcessBundle,
    randomized_dynkin_equilibrium,
    sim_equilibrium,
    sim_processes,
    stage_nash_2x2,
)
from .snell import ReactionValue, SnellResult, reaction_value, snell
from .strategies import (
    AdjustmentFamilyA,
    AdjustmentFamilyB,
    MixedStrategyA,
    PayoffField,
    RandomizedStoppingTime,
    StrategyA,
    StrategyB,
    as_mixed,
    effective_times_seq,
    effective_times_sim,
    payoff_mixed_sim,
    payoff_pure,
)
from .tree import (
    EventTree,
    HittingResult,
    LeveledValue,
    Node,
    StoppingTime,
    build_tree,
    canonical_stopping_time,
    conditional_expectation,
    constant_stopping_time,
    expectation_to_level,
    hitting_time,
    stopping_time_from_realized,
)
from .verify import (
    EnumerationResult,
    EquilibriumReport,
    best_response,
    check_equilibrium,
    count_stopping_times,
    count_strategies,
    enumerate_oracle,
    enumerate_stopping_times,
    enumerate_strategies,
)

__version__ = "0.1.0"

__all__ = [
    "AdjustmentFamilyA",
    "AdjustmentFamilyB",
    "DynkinSolution",
    "EnumerationCapError",
    "EnumerationResult",
    "EquilibriumReport",
    "EventTree",
    "GameDocument",
    "GameSpecError",
    "HittingResult",
    "LeveledValue",
    "MixedStrategyA",
    "Node",
    "PayoffField",
    "RandomizedDynkinEquilibrium",
    "RandomizedStoppingTime",
    "ReactionValue",
    "SeqEquilibrium",
    "SeqProcessBundle",
    "SimEquilibrium",
    "SimProcessBundle",
    "SnellResult",
    "SolverDefectError",
    "StoppingTime",
    "StrategyA",
    "StrategyB",
    "ZeroSumSaddle",
    "as_mixed",
    "best_response",
    "build_tree",
    "canonical_stopping_time",
    "check_equilibrium",
    "conditional_expectation",
    "constant_stopping_time",
    "count_stopping_times",
    "count_strategies",
    "dynkin_hitting_saddle",
    "dynkin_value",
    "effective_times_seq",
    "effective_times_sim",
    "enumerate_oracle",
    "enumerate_stopping_times",
    "enumerate_strategies",
    "expectation_to_level",
    "generate_random_game",
    "hitting_time",
    "payoff_mixed_sim",
    "payoff_pure",
    "randomized_dynkin_equilibrium",
    "reaction_value",
    "seq_equilibrium",
    "seq_processes",
    "sim_equilibrium",
    "sim_processes",
    "snell",
    "solve_dynkin",
    "stage_nash_2x2",
    "stopping_time_from_realized",
    "zero_sum_saddle",
]
