"""Independent reference computations used only by the tests.

The dense oracle builds the full operator ``S M (C ⊗ I)`` on the
``2 (2T + 1)``-dimensional space (position-major, coin-minor) and applies
it by matrix multiplication; it shares no code with the package.
"""

from __future__ import annotations

import math

import numpy as np


def dense_step_operator(theta_deg: float, gamma: float, t_max: int) -> np.ndarray:
    n = 2 * t_max + 1
    th = math.radians(theta_deg)
    coin = np.array([[math.cos(th), math.sin(th)], [math.sin(th), -math.cos(th)]])
    loss = np.diag([1.0, math.exp(-gamma)])
    eye = np.eye(n)
    shift = np.zeros((2 * n, 2 * n))
    for i in range(n):
        if i + 1 < n:
            shift[2 * (i + 1), 2 * i] = 1.0  # H: x -> x + 1
        if i - 1 >= 0:
            shift[2 * (i - 1) + 1, 2 * i + 1] = 1.0  # V: x -> x - 1
    return shift @ np.kron(eye, loss) @ np.kron(eye, coin)


def dense_evolve(theta_deg: float, phi: float, gamma: float, steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(a, b)`` on sites ``-steps..steps``."""
    n = 2 * steps + 1
    psi = np.zeros(2 * n, dtype=complex)
    psi[2 * steps] = math.cos(phi)
    psi[2 * steps + 1] = 1j * math.sin(phi)
    u = dense_step_operator(theta_deg, gamma, steps)
    for _ in range(steps):
        psi = u @ psi
    return psi[0::2], psi[1::2]


def brute_observables(a: np.ndarray, b: np.ndarray) -> dict:
    """Distribution, IPR and entropy via a dense partial trace and ``eigvalsh``."""
    norm = np.sum(np.abs(a) ** 2 + np.abs(b) ** 2)
    psi = np.stack([a, b], axis=1) / math.sqrt(norm)  # rows: position, cols: coin
    rho = psi.T @ psi.conj()  # trace over position
    lam = np.clip(np.linalg.eigvalsh(rho), 0.0, 1.0)
    s = -sum(v * math.log2(v) for v in lam if v > 0)
    p = np.sum(np.abs(psi) ** 2, axis=1)
    return {"p": p, "ipr": float(np.sum(p**2)), "s_e": float(s), "rho": rho, "lam": lam}
