"""Kinematic single-track vehicle model.

State vector ``[x, y, psi, v, delta]`` (CG position, yaw, speed, steering
angle); input ``[u_v, u_delta]`` (acceleration, steering rate).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil
from typing import Callable, Union

import numpy as np

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class VehicleParams:
    wheelbase: float = 0.22
    rear_to_cg: float = 0.11
    length: float = 0.22
    width: float = 0.10

    def __post_init__(self):
        if not 0 < self.rear_to_cg < self.wheelbase:
            raise ValueError("need 0 < rear_to_cg < wheelbase")
        if self.length <= 0 or self.width <= 0:
            raise ValueError("body dimensions must be positive")


def side_slip(delta, params: VehicleParams):
    return np.arctan(params.rear_to_cg / params.wheelbase * np.tan(delta))


def dynamics_derivative(state, u, params: VehicleParams) -> np.ndarray:
    x, y, psi, v, delta = state
    beta = side_slip(delta, params)
    return np.array([
        v * np.cos(psi + beta),
        v * np.sin(psi + beta),
        v / params.wheelbase * np.tan(delta) * np.cos(beta),
        u[0],
        u[1],
    ])


Input = Union[np.ndarray, Callable[[float], np.ndarray]]


def integrate(state, u: Input, dt: float, params: VehicleParams,
              max_substep: float = 0.01, min_substeps: int = 10) -> np.ndarray:
    """Fixed-step RK4 over ``dt``; ``u`` is a constant input or a function of time."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    ufun = u if callable(u) else (lambda t, _u=np.asarray(u, dtype=float): _u)
    n = max(min_substeps, ceil(dt / max_substep - 1e-9))
    h = dt / n
    s = np.asarray(state, dtype=float).copy()
    t = 0.0
    for _ in range(n):
        k1 = dynamics_derivative(s, ufun(t), params)
        k2 = dynamics_derivative(s + h / 2 * k1, ufun(t + h / 2), params)
        k3 = dynamics_derivative(s + h / 2 * k2, ufun(t + h / 2), params)
        k4 = dynamics_derivative(s + h * k3, ufun(t + h), params)
        s = s + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    s[2] = np.mod(s[2], TWO_PI)
    return s


def turning_radius(delta: float, params: VehicleParams) -> float:
    """Radius of the circle traced by the CG at constant steering angle."""
    beta = side_slip(delta, params)
    return params.wheelbase / (np.tan(delta) * np.cos(beta))
