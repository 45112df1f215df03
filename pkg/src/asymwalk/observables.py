"""Position distribution, inverse participation ratio and coin entanglement.

Every observable is computed from the renormalized state, so a lossy
walk is treated as post-selected on photon survival.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateStateError, NumericalConsistencyError
from .walk import WalkerState

__all__ = [
    "PositionDistribution",
    "ReducedDensityMatrix",
    "EntropyValue",
    "Summary",
    "position_distribution",
    "ipr",
    "reduced_density_matrix",
    "entanglement_entropy",
    "summarize",
]

DEGENERATE_NORM = 1e-300
EIGEN_TOL = 1e-10


def _require_norm(state: WalkerState) -> float:
    norm = state.squared_norm
    if not norm > DEGENERATE_NORM:
        raise DegenerateStateError(
            f"state at t={state.t} is fully attenuated (squared norm {norm:.3e})"
        )
    return norm


@dataclass(frozen=True, eq=False)
class PositionDistribution:
    t: int
    x: np.ndarray
    p_h: np.ndarray
    p_v: np.ndarray

    @property
    def p_total(self) -> np.ndarray:
        return self.p_h + self.p_v

    def at(self, x: int) -> float:
        idx = np.flatnonzero(self.x == x)
        return float(self.p_total[idx[0]]) if idx.size else 0.0

    def argmax(self) -> int:
        return int(self.x[np.argmax(self.p_total)])


@dataclass(frozen=True)
class ReducedDensityMatrix:
    """Coin density matrix ``[[alpha, chi], [conj(chi), beta]]``."""

    alpha: float
    beta: float
    chi: complex

    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.alpha, self.chi], [np.conj(self.chi), self.beta]], dtype=np.complex128
        )

    @property
    def determinant(self) -> float:
        return self.alpha * self.beta - abs(self.chi) ** 2


@dataclass(frozen=True)
class EntropyValue:
    s_e: float
    lambda1: float
    lambda2: float


class Summary(NamedTuple):
    s_e: float
    ipr: float
    survival: float
    lambda1: float
    lambda2: float


def position_distribution(state: WalkerState) -> PositionDistribution:
    norm = _require_norm(state)
    p_h = np.abs(state.a) ** 2 / norm
    p_v = np.abs(state.b) ** 2 / norm
    return PositionDistribution(state.t, state.positions, p_h, p_v)


def ipr(dist: PositionDistribution) -> float:
    """Inverse participation ratio ``sum_x P(x)**2``.

    Equals 1 for a walker on a single site and ``1/N`` for a uniform
    spread over ``N`` occupied sites.
    """
    p = dist.p_total
    return float(np.dot(p, p))


def reduced_density_matrix(state: WalkerState) -> ReducedDensityMatrix:
    """Trace out position from the normalized walker state."""
    norm = _require_norm(state)
    a, b = state.a, state.b
    alpha = float(np.sum(np.abs(a) ** 2)) / norm
    beta = float(np.sum(np.abs(b) ** 2)) / norm
    chi = complex(np.sum(a * np.conj(b))) / norm
    return ReducedDensityMatrix(alpha, beta, chi)


def _clamp_unit(value: float, name: str) -> float:
    if value < -EIGEN_TOL or value > 1.0 + EIGEN_TOL:
        raise NumericalConsistencyError(f"{name}={value!r} outside [0, 1]")
    return min(max(value, 0.0), 1.0)


def entanglement_entropy(rho: ReducedDensityMatrix) -> EntropyValue:
    r"""Von Neumann entropy (base 2) of the coin density matrix.

    Eigenvalues come from the closed form for a unit-trace 2x2 matrix,
    ``λ = (1 ± sqrt(1 - 4 (αβ - |χ|²))) / 2``, with ``0 log 0 = 0``.

    Raises
    ------
    NumericalConsistencyError
        When the discriminant is negative beyond ``1e-10`` (the input is
        not a density matrix).
    """
    disc = 1.0 - 4.0 * rho.determinant
    if disc < -EIGEN_TOL:
        raise NumericalConsistencyError(f"negative discriminant {disc!r}")
    root = math.sqrt(max(disc, 0.0))
    lam1 = _clamp_unit(0.5 * (1.0 + root), "lambda1")
    lam2 = _clamp_unit(0.5 * (1.0 - root), "lambda2")
    s = 0.0
    for lam in (lam1, lam2):
        if lam > 0.0:
            s -= lam * math.log2(lam)
    return EntropyValue(min(max(s, 0.0), 1.0), lam1, lam2)


def summarize(state: WalkerState) -> Summary:
    ent = entanglement_entropy(reduced_density_matrix(state))
    return Summary(
        s_e=ent.s_e,
        ipr=ipr(position_distribution(state)),
        survival=state.squared_norm,
        lambda1=ent.lambda1,
        lambda2=ent.lambda2,
    )
