"""Matter-wave kinematics: the reference frame, plane waves and the momentum operator.

Analytic quantities take 3-vectors. Grid operations work on the 1D reduction
along the reference momentum, where the coordinate is ``x = r . p0 / |p0|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, GridError, NormalizationError
from .grid import Grid1D, WaveFunction, derivative, trapezoid

NORM_TOLERANCE = 1e-6


class UndefinedWavelengthError(DomainError):
    """Raised when a quantity needs a non-zero reference momentum."""


@dataclass(frozen=True)
class MatterWaveFrame:
    """Parameters fixing the matter wave of a particle with reference momentum ``p0``.

    ``alpha`` has units of inverse action; ``alpha = 1/hbar`` (1 in natural
    units) is the de Broglie value. ``p0`` may be a scalar, meaning a momentum
    along x. A zero ``p0`` is accepted, but every wave quantity derived from
    it raises :class:`UndefinedWavelengthError`.
    """

    p0: tuple
    alpha: float = 1.0
    mass: float = 1.0
    volume: float = 1.0

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.p0, dtype=float))
        if p.shape == (1,):
            p = np.array([p[0], 0.0, 0.0])
        if p.shape != (3,) or not np.all(np.isfinite(p)):
            raise ValueError(f"p0 must be a finite scalar or 3-vector, got {self.p0!r}")
        object.__setattr__(self, "p0", tuple(float(c) for c in p))
        for name in ("alpha", "mass", "volume"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value}")

    @property
    def p0_vector(self) -> np.ndarray:
        return np.array(self.p0)

    @property
    def p0_norm(self) -> float:
        return math.hypot(*self.p0)

    def _require_momentum(self) -> float:
        p = self.p0_norm
        if p == 0.0:
            raise UndefinedWavelengthError("reference momentum is zero; wavelength is undefined")
        return p

    @property
    def direction(self) -> np.ndarray:
        return self.p0_vector / self._require_momentum()

    @property
    def wavenumber(self) -> float:
        return self.alpha * self._require_momentum()

    @property
    def classical_frequency(self) -> float:
        """Rate of change of the phase variable for free motion, ``alpha p0^2 / m``."""
        return self.alpha * self._require_momentum() ** 2 / self.mass

    @property
    def quantum_frequency(self) -> float:
        return 0.5 * self.classical_frequency

    @property
    def kinetic_energy(self) -> float:
        return self._require_momentum() ** 2 / (2.0 * self.mass)

    @property
    def velocity(self) -> float:
        return self._require_momentum() / self.mass


@dataclass(frozen=True)
class DensitySpec:
    """Density ``gamma |Gamma(x)|^2`` whose integral is a constant of the motion."""

    gamma: float
    gamma_fn: Callable[[np.ndarray], np.ndarray]


def xi_of(frame: MatterWaveFrame, r) -> float | np.ndarray:
    """Phase variable ``alpha r . p0``; ``r`` may have shape ``(..., 3)``."""
    return frame.alpha * (np.asarray(r, dtype=float) @ frame.p0_vector)


def plane_wave(frame: MatterWaveFrame, r) -> complex | np.ndarray:
    return np.exp(1j * xi_of(frame, r)) / math.sqrt(frame.volume)


def de_broglie_wavelength(frame: MatterWaveFrame) -> float:
    return 2.0 * math.pi / (frame.alpha * frame._require_momentum())


def periodicity_step(frame: MatterWaveFrame) -> np.ndarray:
    """Shortest displacement along ``p0`` after which the plane wave repeats."""
    return frame.direction * (2.0 * math.pi / (frame.alpha * frame.p0_norm))


def apply_momentum_operator(
    frame: MatterWaveFrame, psi: WaveFunction, order: int = 2, periodic: bool = False
) -> WaveFunction:
    """``-(i/alpha) d/dx`` on the grid.

    ``order=2`` is the three-point central stencil (one-sided second order at
    the ends); ``order=4`` the five-point one. ``periodic`` wraps the last node
    onto the first.
    """
    return psi.with_values(
        momentum_operator_values(psi.values, psi.grid.h, frame.alpha, order=order, periodic=periodic)
    )


def momentum_operator_values(values, h: float, alpha: float, order: int = 2, periodic: bool = False):
    """Array form of :func:`apply_momentum_operator`."""
    if len(values) < 3:
        raise GridError("momentum operator needs at least 3 nodes")
    return -1j / alpha * derivative(values, h, order=order, periodic=periodic)


def momentum_form(
    frame: MatterWaveFrame, psi: WaveFunction, order: int = 4, periodic: bool = False
) -> complex:
    """Quadrature of ``psi* P psi`` including its (diagnostic) imaginary part."""
    nrm = periodic_norm(psi) if periodic else psi.norm()
    if abs(nrm - 1.0) > NORM_TOLERANCE:
        raise NormalizationError(f"state norm is {nrm!r}, expected 1 within {NORM_TOLERANCE}")
    ppsi = apply_momentum_operator(frame, psi, order=order, periodic=periodic)
    integrand = np.conj(psi.values) * ppsi.values
    if periodic:
        return complex(psi.grid.h * integrand.sum())
    return complex(trapezoid(integrand, psi.grid.h))


def momentum_expectation(
    frame: MatterWaveFrame, psi: WaveFunction, order: int = 4, periodic: bool = False
) -> float:
    """Expectation value of the momentum operator.

    Defaults to the five-point stencil, whose O(h^4) error keeps analytic
    Gaussian oracles within 1e-6 at h = 1e-2.
    """
    return momentum_form(frame, psi, order=order, periodic=periodic).real


def periodic_norm(psi: WaveFunction) -> float:
    """Rectangle-rule norm over one period of a periodically closed grid."""
    return float(psi.grid.h * np.sum(psi.density))


def constant_of_motion(spec: DensitySpec, domain: Grid1D) -> float:
    """``gamma * integral |Gamma|^2`` over the domain, which equals ``gamma`` for normalized ``Gamma``."""
    values = np.asarray(spec.gamma_fn(domain.x))
    nrm = float(trapezoid(np.abs(values) ** 2, domain.h))
    if abs(nrm - 1.0) > NORM_TOLERANCE:
        raise NormalizationError(f"Gamma integrates to {nrm!r} on the domain, expected 1")
    return spec.gamma * nrm
