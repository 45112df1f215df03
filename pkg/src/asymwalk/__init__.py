"""Asymmetric discrete-time quantum walks with polarization-dependent loss."""

from .errors import (
    CapacityError,
    ConfigError,
    DegenerateStateError,
    DomainError,
    NumericalConsistencyError,
    StatisticsError,
    SweepError,
    WalkError,
)
from .observables import (
    EntropyValue,
    PositionDistribution,
    ReducedDensityMatrix,
    entanglement_entropy,
    ipr,
    position_distribution,
    reduced_density_matrix,
    summarize,
)
from .walk import (
    WalkParams,
    WalkerState,
    apply_coin,
    apply_loss,
    apply_shift,
    coin_matrix,
    evolve,
    initial_state,
    step,
)

__version__ = "0.1.0"
