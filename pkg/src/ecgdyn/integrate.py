"""Fixed-step integration of the oscillator on a sampling grid."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import IntegrationDiverged
from .model import EdmParams, RhythmParams, State, make_rhs

#: Abort threshold: forward Euler with absurd parameters can blow up silently.
DIVERGENCE_LIMIT = 1e6

#: Starting point theta0 = -pi, so one revolution sweeps P..T within a beat.
DEFAULT_INIT = State(x=-1.0, y=0.0, z=0.0, t=0.0)


@dataclass(frozen=True)
class SamplingGrid:
    """Uniform grid: fs in Hz, L samples, dt = 1/fs by construction."""

    fs: float
    L: int

    def __post_init__(self):
        if not (math.isfinite(self.fs) and self.fs > 0.0):
            raise ValueError(f"sampling frequency must be positive, got {self.fs}")
        if self.L < 2:
            raise ValueError(f"need at least 2 samples, got {self.L}")

    @property
    def dt(self) -> float:
        return 1.0 / self.fs

    def times(self) -> np.ndarray:
        """Sample times l*dt for l = 0..L-1."""
        return np.arange(self.L) * self.dt


def beat_grid(fs: float, f: float) -> SamplingGrid:
    """Grid for one beat: L = round(fs/f), one cycle revolution per beat."""
    return SamplingGrid(fs=fs, L=int(round(fs / f)))


@dataclass
class Trajectory:
    """Discrete (x, y, z) paths on a grid, one value per sample."""

    grid: SamplingGrid
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        for name in ("x", "y", "z"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (self.grid.L,):
                raise ValueError(f"{name} must have length {self.grid.L}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
            setattr(self, name, arr)


def _check_step(x: float, y: float, z: float, step: int) -> None:
    m = DIVERGENCE_LIMIT
    if not (abs(x) < m and abs(y) < m and abs(z) < m):
        raise IntegrationDiverged(step)
    if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
        raise IntegrationDiverged(step)


def integrate_euler(eta: EdmParams, rhythm: RhythmParams, grid: SamplingGrid,
                    init: State = DEFAULT_INIT) -> Trajectory:
    """Forward-Euler trajectory: u[l+1] = u[l] + f(u[l], t_l)*dt.

    Sample times run t_l = init.t + l*dt, so a record can be integrated in
    chained segments by passing each segment's end state (and time) as the
    next segment's init.
    """
    rhs = make_rhs(eta, rhythm)
    dt = grid.dt
    t0 = init.t
    n = grid.L
    xs = np.empty(n)
    ys = np.empty(n)
    zs = np.empty(n)
    x, y, z = init.x, init.y, init.z
    xs[0], ys[0], zs[0] = x, y, z
    for step in range(n - 1):
        dx, dy, dz = rhs(x, y, z, t0 + step * dt)
        x += dx * dt
        y += dy * dt
        z += dz * dt
        _check_step(x, y, z, step + 1)
        xs[step + 1], ys[step + 1], zs[step + 1] = x, y, z
    return Trajectory(grid=grid, x=xs, y=ys, z=zs)


def integrate_rk4(eta: EdmParams, rhythm: RhythmParams, grid: SamplingGrid,
                  init: State = DEFAULT_INIT) -> Trajectory:
    """Classical 4th-order Runge-Kutta on the same fixed grid.

    Used as the accuracy reference for the first-order scheme.
    """
    rhs = make_rhs(eta, rhythm)
    dt = grid.dt
    half = 0.5 * dt
    t0 = init.t
    n = grid.L
    xs = np.empty(n)
    ys = np.empty(n)
    zs = np.empty(n)
    x, y, z = init.x, init.y, init.z
    xs[0], ys[0], zs[0] = x, y, z
    for step in range(n - 1):
        t = t0 + step * dt
        k1x, k1y, k1z = rhs(x, y, z, t)
        k2x, k2y, k2z = rhs(x + half * k1x, y + half * k1y, z + half * k1z, t + half)
        k3x, k3y, k3z = rhs(x + half * k2x, y + half * k2y, z + half * k2z, t + half)
        k4x, k4y, k4z = rhs(x + dt * k3x, y + dt * k3y, z + dt * k3z, t + dt)
        x += (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        y += (dt / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        z += (dt / 6.0) * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
        _check_step(x, y, z, step + 1)
        xs[step + 1], ys[step + 1], zs[step + 1] = x, y, z
    return Trajectory(grid=grid, x=xs, y=ys, z=zs)
