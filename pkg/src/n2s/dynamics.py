"""Newtonian point-particle mechanics in one dimension.

Positions are measured along the direction of the reference momentum, so a
scalar coordinate carries the whole motion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .grid import Grid1D, derivative


@dataclass(frozen=True)
class ParticleState:
    position: float
    momentum: float
    mass: float = 1.0
    time: float = 0.0

    def __post_init__(self):
        for name in ("position", "momentum", "mass", "time"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
        if self.mass <= 0:
            raise ValueError(f"mass must be positive, got {self.mass}")

    @property
    def velocity(self) -> float:
        return self.momentum / self.mass


@dataclass(frozen=True)
class Potential:
    """Conservative potential U(x).

    Build with the classmethods: :meth:`free`, :meth:`harmonic`, :meth:`linear`,
    :meth:`quartic` or :meth:`tabulated`. ``value`` and ``gradient`` accept
    scalars or arrays.
    """

    kind: str
    coefficient: float = 0.0
    table_grid: Grid1D | None = field(default=None, repr=False)
    table_values: np.ndarray | None = field(default=None, repr=False)
    table_gradient: np.ndarray | None = field(default=None, repr=False)

    KINDS = ("free", "harmonic", "linear", "quartic", "tabulated")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}; expected one of {self.KINDS}")

    @classmethod
    def free(cls) -> "Potential":
        return cls("free")

    @classmethod
    def harmonic(cls, stiffness: float = 1.0) -> "Potential":
        return cls("harmonic", float(stiffness))

    @classmethod
    def linear(cls, slope: float) -> "Potential":
        return cls("linear", float(slope))

    @classmethod
    def quartic(cls, coefficient: float) -> "Potential":
        return cls("quartic", float(coefficient))

    @classmethod
    def tabulated(cls, grid: Grid1D, values) -> "Potential":
        vals = np.array(values, dtype=float)
        if vals.shape != (grid.n,):
            raise ValueError(f"expected {grid.n} tabulated values, got shape {vals.shape}")
        grad = derivative(vals, grid.h, order=2)
        vals.setflags(write=False)
        grad.setflags(write=False)
        return cls("tabulated", table_grid=grid, table_values=vals, table_gradient=grad)

    @property
    def is_symmetric(self) -> bool:
        """True when U(-x) = U(x) identically."""
        return self.kind in ("free", "harmonic", "quartic")

    def _check_table_domain(self, x):
        g = self.table_grid
        xs = np.asarray(x)
        if np.any(xs < g.x_min) or np.any(xs > g.x_max):
            raise DomainError(f"tabulated potential is defined on [{g.x_min}, {g.x_max}] only")

    def value(self, x):
        k = self.kind
        if k == "free":
            return np.zeros_like(x, dtype=float) if np.ndim(x) else 0.0
        if k == "harmonic":
            return 0.5 * self.coefficient * np.square(x)
        if k == "linear":
            return self.coefficient * np.asarray(x, dtype=float) if np.ndim(x) else self.coefficient * x
        if k == "quartic":
            return self.coefficient * np.power(x, 4)
        self._check_table_domain(x)
        return np.interp(x, self.table_grid.x, self.table_values)

    def gradient(self, x):
        k = self.kind
        if k == "free":
            return np.zeros_like(x, dtype=float) if np.ndim(x) else 0.0
        if k == "harmonic":
            return self.coefficient * np.asarray(x, dtype=float) if np.ndim(x) else self.coefficient * x
        if k == "linear":
            return np.full_like(x, self.coefficient, dtype=float) if np.ndim(x) else self.coefficient
        if k == "quartic":
            return 4.0 * self.coefficient * np.power(x, 3)
        self._check_table_domain(x)
        return np.interp(x, self.table_grid.x, self.table_gradient)


@dataclass(frozen=True)
class Trajectory:
    """Particle states sampled every ``dt``; ``len`` gives the number of samples."""

    times: np.ndarray
    positions: np.ndarray
    momenta: np.ndarray
    mass: float
    dt: float

    def __post_init__(self):
        for name in ("times", "positions", "momenta"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (self.times.shape == self.positions.shape == self.momenta.shape):
            raise ValueError("trajectory arrays must share one length")

    def __len__(self) -> int:
        return self.times.shape[0]

    def __getitem__(self, i) -> ParticleState:
        return ParticleState(
            float(self.positions[i]), float(self.momenta[i]), self.mass, float(self.times[i])
        )

    @property
    def states(self) -> list[ParticleState]:
        return [self[i] for i in range(len(self))]

    @property
    def t_start(self) -> float:
        return float(self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def state_at(self, t: float, pot: Potential) -> ParticleState:
        """State at time ``t``, stepping off the nearest earlier sample when ``t`` is between samples."""
        if len(self) == 1 or self.dt == 0:
            if abs(t - self.t_start) > 1e-12 * max(1.0, abs(t)):
                raise DomainError(f"t={t} outside trajectory range")
            return self[0]
        slack = 1e-9 * abs(self.dt)
        if t < self.t_start - slack or t > self.t_end + slack:
            raise DomainError(f"t={t} outside trajectory range [{self.t_start}, {self.t_end}]")
        pos = (t - self.t_start) / self.dt
        i = int(round(pos))
        if abs(pos - i) < 1e-9:
            return self[min(max(i, 0), len(self) - 1)]
        i = int(math.floor(pos))
        s = self[i]
        return verlet_step(s, pot, t - s.time)


def force_at(pot: Potential, x):
    if not np.all(np.isfinite(x)):
        raise ValueError("position must be finite")
    return -pot.gradient(x)


def verlet_step(s: ParticleState, pot: Potential, dt: float) -> ParticleState:
    """One velocity-Verlet step.

    Negative ``dt`` steps backwards; stepping ``dt`` then ``-dt`` recovers the
    starting state up to rounding.
    """
    if not math.isfinite(dt):
        raise ValueError("dt must be finite")
    half = 0.5 * dt
    p_half = s.momentum + half * force_at(pot, s.position)
    x_new = s.position + dt * p_half / s.mass
    p_new = p_half + half * force_at(pot, x_new)
    return ParticleState(float(x_new), float(p_new), s.mass, s.time + dt)


def integrate(s: ParticleState, pot: Potential, dt: float, n: int) -> Trajectory:
    """``n`` velocity-Verlet steps from ``s``; the result holds ``n + 1`` samples."""
    if n < 0:
        raise ValueError(f"step count must be non-negative, got {n}")
    xs = np.empty(n + 1)
    ps = np.empty(n + 1)
    x, p, m = s.position, s.momentum, s.mass
    xs[0], ps[0] = x, p
    half = 0.5 * dt
    f = float(force_at(pot, x))
    for i in range(1, n + 1):
        p_half = p + half * f
        x = x + dt * p_half / m
        f = float(force_at(pot, x))
        p = p_half + half * f
        xs[i], ps[i] = x, p
    times = s.time + dt * np.arange(n + 1)
    return Trajectory(times, xs, ps, m, dt)


def total_energy(s: ParticleState, pot: Potential) -> float:
    return s.momentum**2 / (2.0 * s.mass) + float(pot.value(s.position))
