"""Uniform 1D grids, sampled wave functions and the shared discrete calculus.

Every grid quantity in the package goes through the two helpers here:
trapezoid quadrature and finite-difference first derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import GridError

# one-sided stencils (coefficients over 12h) for the first two nodes, 4th order
_D4_EDGE = np.array(
    [
        [-25.0, 48.0, -36.0, 16.0, -3.0],
        [-3.0, -10.0, 18.0, -6.0, 1.0],
    ]
)


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid of ``n`` nodes covering ``[x_min, x_max]`` inclusive."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)):
            raise GridError("grid bounds must be finite")
        if self.x_max <= self.x_min:
            raise GridError(f"x_max ({self.x_max}) must exceed x_min ({self.x_min})")
        if int(self.n) != self.n or self.n < 3:
            raise GridError(f"grid needs at least 3 nodes, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @cached_property
    def x(self) -> np.ndarray:
        nodes = np.linspace(self.x_min, self.x_max, self.n)
        nodes.setflags(write=False)
        return nodes

    @classmethod
    def centered(cls, half_width: float, n: int, center: float = 0.0) -> "Grid1D":
        return cls(center - half_width, center + half_width, n)

    @classmethod
    def periodic(cls, period: float, n: int, x_min: float = 0.0) -> "Grid1D":
        """Grid whose last node sits one spacing before ``x_min + period``.

        Used with periodic closure, where node ``n-1`` neighbours node 0.
        """
        return cls(x_min, x_min + period * (n - 1) / n, n)

    def refined(self) -> "Grid1D":
        """Same interval with the spacing halved."""
        return Grid1D(self.x_min, self.x_max, 2 * self.n - 1)

    def coarsened(self) -> "Grid1D":
        """Same interval with the spacing doubled (requires odd ``n``)."""
        if self.n % 2 == 0:
            raise GridError("coarsening needs an odd node count")
        return Grid1D(self.x_min, self.x_max, (self.n + 1) // 2)


def trapezoid(values, h: float):
    """Trapezoid rule on uniformly spaced samples."""
    values = np.asarray(values)
    return h * (values.sum() - 0.5 * (values[0] + values[-1]))


def derivative(values, h: float, order: int = 2, periodic: bool = False) -> np.ndarray:
    """First derivative of uniformly spaced samples.

    Central differences in the interior. Without periodic closure the end nodes
    use one-sided stencils of the same order.
    """
    f = np.asarray(values)
    n = f.shape[0]
    if order not in (2, 4):
        raise ValueError(f"order must be 2 or 4, got {order}")
    if n < order + 1:
        raise GridError(f"order-{order} derivative needs at least {order + 1} nodes, got {n}")

    if periodic:
        if order == 2:
            return (np.roll(f, -1) - np.roll(f, 1)) / (2.0 * h)
        return (
            np.roll(f, 2) - 8.0 * np.roll(f, 1) + 8.0 * np.roll(f, -1) - np.roll(f, -2)
        ) / (12.0 * h)

    out = np.empty_like(f, dtype=np.result_type(f, 1.0))
    if order == 2:
        out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
        # written in differences so constant samples give exactly zero
        out[0] = (4.0 * (f[1] - f[0]) - (f[2] - f[0])) / (2.0 * h)
        out[-1] = (4.0 * (f[-1] - f[-2]) - (f[-1] - f[-3])) / (2.0 * h)
        return out

    out[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    head = f[:5] - f[0]
    tail = f[-5:][::-1] - f[-1]
    out[0] = _D4_EDGE[0] @ head / (12.0 * h)
    out[1] = _D4_EDGE[1] @ head / (12.0 * h)
    out[-1] = -(_D4_EDGE[0] @ tail) / (12.0 * h)
    out[-2] = -(_D4_EDGE[1] @ tail) / (12.0 * h)
    return out


@dataclass(frozen=True)
class WaveFunction:
    """Complex samples of a wave function on a :class:`Grid1D`."""

    grid: Grid1D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.shape != (self.grid.n,):
            raise GridError(f"expected {self.grid.n} samples, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("wave function samples must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid: Grid1D, fn) -> "WaveFunction":
        return cls(grid, fn(grid.x))

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def norm(self) -> float:
        """Trapezoid quadrature of ``|psi|^2`` (not its square root)."""
        return float(trapezoid(self.density, self.grid.h))

    def inner(self, other: "WaveFunction") -> complex:
        """``<self|other>`` by trapezoid quadrature."""
        return complex(trapezoid(np.conj(self.values) * other.values, self.grid.h))

    def normalized(self) -> "WaveFunction":
        nrm = self.norm()
        if nrm <= 0.0:
            raise ValueError("cannot normalize a zero wave function")
        return WaveFunction(self.grid, self.values / np.sqrt(nrm))

    def with_values(self, values) -> "WaveFunction":
        return WaveFunction(self.grid, values)
