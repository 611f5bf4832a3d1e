"""Classical wave equation for f(xi) along a Newtonian trajectory.

The wave equation is checked as a residual, never time-marched: with the
chain-rule derivatives of the phase variable it must vanish identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .dynamics import Potential, Trajectory, force_at, verlet_step
from .errors import DomainError
from .grid import Grid1D, trapezoid
from .matterwave import MatterWaveFrame, de_broglie_wavelength

DECAY_THRESHOLD = 1e-12
REL_FLOOR = 1e-12


@dataclass(frozen=True)
class DispersionBundle:
    k: float
    wavelength: float
    Omega: float
    omega: float
    energy: float


def dispersion_of(frame: MatterWaveFrame) -> DispersionBundle:
    Omega = frame.classical_frequency
    return DispersionBundle(
        k=frame.wavenumber,
        wavelength=de_broglie_wavelength(frame),
        Omega=Omega,
        omega=0.5 * Omega,
        energy=frame.kinetic_energy,
    )


def wavelength_from_dispersion(frame: MatterWaveFrame) -> float:
    """Wavelength reached through the phase rate: ``Omega = 2 pi v0 / lambda``."""
    return 2.0 * math.pi * frame.velocity / frame.classical_frequency


@dataclass(frozen=True)
class WaveAnsatz:
    """A twice-differentiable ``f(xi)`` together with its analytic derivatives."""

    frame: MatterWaveFrame
    f: Callable
    df: Callable
    d2f: Callable
    name: str = "custom"

    def xi(self, x):
        """Phase variable at coordinate ``x`` along the reference momentum."""
        return self.frame.alpha * self.frame.p0_norm * np.asarray(x, dtype=float)

    def unit_modulus_gap(self, xis) -> float:
        return float(np.max(np.abs(np.abs(self.f(np.asarray(xis))) ** 2 - 1.0)))


def exponential_ansatz(frame: MatterWaveFrame) -> WaveAnsatz:
    return WaveAnsatz(
        frame,
        f=lambda xi: np.exp(1j * xi),
        df=lambda xi: 1j * np.exp(1j * xi),
        d2f=lambda xi: -np.exp(1j * xi),
        name="exp(i xi)",
    )


def constant_ansatz(frame: MatterWaveFrame, value: complex = 1.0) -> WaveAnsatz:
    return WaveAnsatz(
        frame,
        f=lambda xi: np.full_like(np.asarray(xi, dtype=float), value, dtype=complex),
        df=lambda xi: np.zeros_like(np.asarray(xi, dtype=float), dtype=complex),
        d2f=lambda xi: np.zeros_like(np.asarray(xi, dtype=float), dtype=complex),
        name="constant",
    )


def gaussian_windowed_ansatz(frame: MatterWaveFrame, sigma: float) -> WaveAnsatz:
    """``exp(i xi)`` under a Gaussian envelope whose ``|f|^2`` has spatial width ``sigma``."""
    s = frame.alpha * frame.p0_norm * sigma
    c = 1.0 / (2.0 * s * s)

    def f(xi):
        xi = np.asarray(xi, dtype=float)
        return np.exp(1j * xi - 0.5 * c * xi * xi)

    def df(xi):
        return (1j - c * np.asarray(xi, dtype=float)) * f(xi)

    def d2f(xi):
        g = 1j - c * np.asarray(xi, dtype=float)
        return (g * g - c) * f(xi)

    return WaveAnsatz(frame, f, df, d2f, name=f"gaussian-windowed(sigma={sigma})")


def time_derivatives(ansatz: WaveAnsatz, x: float, v: float, a: float) -> tuple[complex, complex]:
    """Total time derivatives of ``f(xi(t))`` from position, velocity and acceleration along ``p0``."""
    fr = ansatz.frame
    p = fr.p0_norm
    xi = ansatz.xi(x)
    rate = fr.alpha * p * v
    first = rate * ansatz.df(xi)
    second = rate * rate * ansatz.d2f(xi) + fr.alpha * p * a * ansatz.df(xi)
    return complex(first), complex(second)


def laplacian(ansatz: WaveAnsatz, x) -> complex:
    fr = ansatz.frame
    return fr.alpha**2 * fr.p0_norm**2 * ansatz.d2f(ansatz.xi(x))


def wave_residual(ansatz: WaveAnsatz, traj: Trajectory, pot: Potential, t: float) -> complex:
    """LHS minus RHS of the classical wave equation at time ``t`` along ``traj``.

    The acceleration comes from Newton's law ``m a = -dU/dx``.
    """
    s = traj.state_at(t, pot)
    fr = ansatz.frame
    p = fr.p0_norm
    x, v = s.position, s.velocity
    a = float(force_at(pot, x)) / s.mass
    _, d2f_dt2 = time_derivatives(ansatz, x, v, a)
    speed_sq = (p * v) ** 2 / p**2
    lhs = -speed_sq * laplacian(ansatz, x) + d2f_dt2
    rhs = fr.alpha * p * a * ansatz.df(ansatz.xi(x))
    return complex(lhs - rhs)


def fd_second_time_derivative(
    ansatz: WaveAnsatz, traj: Trajectory, pot: Potential, t: float, step: float = 1e-4
) -> complex:
    """``d^2 f/dt^2`` by a central second difference of ``f(xi(t))`` along the Newtonian path."""
    s = traj.state_at(t, pot)
    fwd = verlet_step(s, pot, step)
    bwd = verlet_step(s, pot, -step)
    vals = ansatz.f(ansatz.xi(np.array([bwd.position, s.position, fwd.position])))
    return complex((vals[0] - 2.0 * vals[1] + vals[2]) / step**2)


def free_tise_eigenvalue(frame: MatterWaveFrame) -> Fraction:
    """Eigenvalue of ``-(1/(2 m alpha^2)) laplacian`` on ``exp(i xi)``, in exact rational arithmetic."""
    alpha = Fraction(frame.alpha)
    p_sq = sum(Fraction(c) ** 2 for c in frame.p0)
    lap_eig = -(alpha**2) * p_sq
    return -lap_eig / (2 * Fraction(frame.mass) * alpha**2)


def free_tise_residual(frame: MatterWaveFrame) -> float:
    """``|eigenvalue - p0^2/(2m)|`` for the exponential ansatz; zero for every frame."""
    p_sq = sum(Fraction(c) ** 2 for c in frame.p0)
    energy = p_sq / (2 * Fraction(frame.mass))
    return float(abs(free_tise_eigenvalue(frame) - energy))


@dataclass(frozen=True)
class IBPReport:
    lhs: complex
    rhs: complex
    surface: complex
    rel_residual: float


def ibp_residual(
    ansatz: WaveAnsatz, pot: Potential, domain: Grid1D, require_decay: bool = True
) -> IBPReport:
    """Integration-by-parts identity for ``(p0 . grad U) f f'`` along the reference axis.

    With ``require_decay`` (the default) the ansatz and its derivative must be
    below 1e-12 at both ends, otherwise :class:`DomainError` is raised. Pass
    ``require_decay=False`` to study truncated domains where the surface term
    survives.
    """
    fr = ansatz.frame
    p = fr.p0_norm
    x = domain.x
    xi = ansatz.xi(x)
    f, df, d2f = ansatz.f(xi), ansatz.df(xi), ansatz.d2f(xi)
    if require_decay:
        edge = max(abs(f[0]), abs(f[-1]), abs(df[0]), abs(df[-1]))
        if edge >= DECAY_THRESHOLD:
            raise DomainError(
                f"domain too small: |f| or |f'| reaches {edge:.3g} at the boundary"
            )
    u = pot.value(x)
    lhs = trapezoid(p * pot.gradient(x) * f * df, domain.h)
    divergence = fr.alpha * p * p * (df * df + f * d2f)
    flux = u * f * df * p
    surface = flux[-1] - flux[0]
    rhs = surface - trapezoid(u * divergence, domain.h)
    rel = abs(lhs - rhs) / max(abs(lhs), REL_FLOOR)
    return IBPReport(complex(lhs), complex(rhs), complex(surface), float(rel))


_D1_SIX = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0


def flux_divergence_gap(ansatz: WaveAnsatz, x, step: float = 1e-3) -> float:
    """Largest gap between ``d/dx [p0 f f']`` by finite differences and ``alpha p0^2 d(f f')/dxi``."""
    fr = ansatz.frame
    p = fr.p0_norm
    x = np.atleast_1d(np.asarray(x, dtype=float))
    offsets = np.arange(-3, 4) * step
    pts = x[:, None] + offsets[None, :]
    xi = ansatz.xi(pts)
    flux = p * ansatz.f(xi) * ansatz.df(xi)
    direct = flux @ _D1_SIX / step
    xi0 = ansatz.xi(x)
    reduced = fr.alpha * p * p * (ansatz.df(xi0) ** 2 + ansatz.f(xi0) * ansatz.d2f(xi0))
    return float(np.max(np.abs(direct - reduced)))
