r"""One-dimensional discrete-time quantum walk with polarization-dependent loss.

The walker lives on the lattice ``x = -t_max .. t_max`` and carries a
two-component polarization coin ``(a, b)`` for ``|H>`` and ``|V>``.  One
step is

.. math::

   U = S \, M(\gamma) \, (C(\theta) \otimes I_p),

applied right to left: coin, then loss, then conditional shift.  The
loss operator damps only the ``|V>`` amplitude by ``exp(-gamma)`` and is
non-unitary for ``gamma > 0``; amplitudes are kept unnormalized so the
surviving probability stays available downstream.

Angles: ``theta`` is in degrees everywhere in the public API, ``phi`` in
radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, DomainError

__all__ = [
    "WalkParams",
    "WalkerState",
    "coin_matrix",
    "initial_state",
    "apply_coin",
    "apply_loss",
    "apply_shift",
    "step",
    "evolve",
]


def _check_theta(theta: float) -> None:
    if not (0.0 <= theta <= 180.0) or not math.isfinite(theta):
        raise DomainError(f"theta must lie in [0, 180] degrees, got {theta!r}")


def _check_phi(phi: float) -> None:
    if not (0.0 <= phi <= math.pi) or not math.isfinite(phi):
        raise DomainError(f"phi must lie in [0, pi] radians, got {phi!r}")


def _check_gamma(gamma: float) -> None:
    if not (gamma >= 0.0) or not math.isfinite(gamma):
        raise DomainError(f"gamma must be a finite value >= 0, got {gamma!r}")


@dataclass(frozen=True)
class WalkParams:
    """Coin angle (degrees), initial-state angle (radians), loss, step count."""

    theta: float
    phi: float = 0.0
    gamma: float = 0.0
    steps: int = 16

    def __post_init__(self) -> None:
        _check_theta(self.theta)
        _check_phi(self.phi)
        _check_gamma(self.gamma)
        if isinstance(self.steps, bool) or int(self.steps) != self.steps or self.steps < 0:
            raise DomainError(f"steps must be a non-negative integer, got {self.steps!r}")
        object.__setattr__(self, "steps", int(self.steps))


@dataclass(frozen=True, eq=False)
class WalkerState:
    """Walker amplitudes on a fixed lattice of ``2 * t_max + 1`` sites.

    ``a[i]`` and ``b[i]`` are the H and V amplitudes at position
    ``x = i - t_max``.  Arrays are read-only; every operation returns a
    new state.
    """

    t: int
    t_max: int
    a: np.ndarray
    b: np.ndarray
    squared_norm: float = field(init=False)

    def __post_init__(self) -> None:
        n = 2 * self.t_max + 1
        a = np.asarray(self.a, dtype=np.complex128)
        b = np.asarray(self.b, dtype=np.complex128)
        if a.shape != (n,) or b.shape != (n,):
            raise ValueError(f"amplitude arrays must have shape ({n},)")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("non-finite amplitude")
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        norm = float(np.sum(a.real**2 + a.imag**2) + np.sum(b.real**2 + b.imag**2))
        object.__setattr__(self, "squared_norm", norm)

    @property
    def positions(self) -> np.ndarray:
        return np.arange(-self.t_max, self.t_max + 1)

    def amplitude(self, x: int) -> tuple[complex, complex]:
        """Return ``(a(x), b(x))``; zero outside the lattice."""
        if abs(x) > self.t_max:
            return 0j, 0j
        i = x + self.t_max
        return complex(self.a[i]), complex(self.b[i])

    def scaled(self, factor: float) -> WalkerState:
        return WalkerState(self.t, self.t_max, self.a * factor, self.b * factor)


def coin_matrix(theta: float) -> np.ndarray:
    r"""Return the real 2x2 coin ``[[cos θ, sin θ], [sin θ, -cos θ]]`` for θ in degrees.

    The matrix is orthogonal with determinant -1, so it is its own inverse.
    """
    _check_theta(theta)
    th = math.radians(theta)
    c, s = math.cos(th), math.sin(th)
    return np.array([[c, s], [s, -c]], dtype=np.float64)


def initial_state(phi: float, t_max: int = 0) -> WalkerState:
    """Prepare ``(cos φ |H> + i sin φ |V>) |0>`` on a lattice sized for ``t_max`` steps."""
    _check_phi(phi)
    if t_max < 0:
        raise DomainError(f"t_max must be >= 0, got {t_max}")
    n = 2 * t_max + 1
    a = np.zeros(n, dtype=np.complex128)
    b = np.zeros(n, dtype=np.complex128)
    a[t_max] = math.cos(phi)
    b[t_max] = 1j * math.sin(phi)
    return WalkerState(0, t_max, a, b)


def apply_coin(state: WalkerState, theta: float) -> WalkerState:
    (c, s), (_, d) = coin_matrix(theta)
    a, b = state.a, state.b
    return WalkerState(state.t, state.t_max, c * a + s * b, s * a + d * b)


def apply_loss(state: WalkerState, gamma: float) -> WalkerState:
    """Damp the V amplitude by ``exp(-gamma)``; H is untouched."""
    _check_gamma(gamma)
    if gamma == 0.0:
        return state
    return WalkerState(state.t, state.t_max, state.a, state.b * math.exp(-gamma))


def apply_shift(state: WalkerState) -> WalkerState:
    """Move H one site right and V one site left; advances ``t`` by one.

    Raises
    ------
    CapacityError
        If the lattice was allocated for fewer steps than requested.
    """
    if state.t >= state.t_max:
        raise CapacityError(
            f"lattice allocated for {state.t_max} steps; cannot shift past t={state.t}"
        )
    a = np.zeros_like(state.a)
    b = np.zeros_like(state.b)
    a[1:] = state.a[:-1]
    b[:-1] = state.b[1:]
    return WalkerState(state.t + 1, state.t_max, a, b)


def step(state: WalkerState, params: WalkParams) -> WalkerState:
    return apply_shift(apply_loss(apply_coin(state, params.theta), params.gamma))


def evolve(params: WalkParams) -> WalkerState:
    """Run ``params.steps`` steps from the initial state.

    The coin is built once and the loop works on private buffers; the
    arithmetic is the same sequence of operations as repeated :func:`step`.
    """
    state = initial_state(params.phi, params.steps)
    if params.steps == 0:
        return state
    (c, s), (_, d) = coin_matrix(params.theta)
    damp = math.exp(-params.gamma)
    a = np.array(state.a)
    b = np.array(state.b)
    for _ in range(params.steps):
        a, b = c * a + s * b, s * a + d * b
        if params.gamma != 0.0:
            b = b * damp
        a[1:] = a[:-1].copy()
        a[0] = 0.0
        b[:-1] = b[1:].copy()
        b[-1] = 0.0
    return WalkerState(params.steps, params.steps, a, b)
