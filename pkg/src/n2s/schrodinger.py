"""Finite-difference Schrodinger solvers on a uniform 1D grid.

The Hamiltonian is the three-point stencil of ``-(hbar^2/2m) d^2/dx^2 + U``.
With the default hard walls the two end nodes are the walls themselves and
stay pinned at zero; ``periodic=True`` closes the grid on itself instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import Potential
from .errors import DomainError, GridError, NormalizationError, PreconditionError, SolverError
from .grid import Grid1D, WaveFunction, trapezoid
from .matterwave import NORM_TOLERANCE, momentum_operator_values
from .tridiag import CyclicFactorization, ThomasFactorization, bisect_eigenvalues, shifted_solve

PACKET_HALF_WIDTH = 8.0
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class HamiltonianTridiag:
    grid: Grid1D
    diag: np.ndarray = field(repr=False)
    offdiag: np.ndarray = field(repr=False)
    hbar: float = 1.0
    mass: float = 1.0
    potential: Potential | None = None
    periodic: bool = False

    def __post_init__(self):
        for name in ("diag", "offdiag"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.diag.shape != (self.grid.n,) or self.offdiag.shape != (self.grid.n - 1,):
            raise GridError("band shapes do not match the grid")

    @property
    def active(self) -> slice:
        """Nodes that carry amplitude: all of them when periodic, the interior otherwise."""
        return slice(None) if self.periodic else slice(1, -1)

    @property
    def corner(self) -> float:
        """Coupling between the last and first node under periodic closure."""
        return float(self.offdiag[0])

    def apply(self, values) -> np.ndarray:
        v = np.asarray(values)
        out = np.zeros(v.shape, dtype=np.result_type(v, 1.0))
        d, e = self.diag, self.offdiag
        if self.periodic:
            out[:] = d * v
            out[:-1] += e * v[1:]
            out[1:] += e * v[:-1]
            out[0] += self.corner * v[-1]
            out[-1] += self.corner * v[0]
            return out
        inner = v[1:-1]
        out[1:-1] = d[1:-1] * inner
        out[1:-2] += e[1:-1] * inner[1:]
        out[2:-1] += e[1:-1] * inner[:-1]
        return out

    def to_dense(self) -> np.ndarray:
        mat = np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)
        if self.periodic:
            mat[0, -1] = mat[-1, 0] = self.corner
        return mat


def build_hamiltonian(
    grid: Grid1D,
    pot: Potential,
    mass: float = 1.0,
    hbar: float = 1.0,
    periodic: bool = False,
) -> HamiltonianTridiag:
    if grid.n < 3:
        raise GridError("Hamiltonian needs at least 3 nodes")
    u = np.asarray(pot.value(grid.x), dtype=float)
    if not np.all(np.isfinite(u)):
        raise DomainError("potential is not finite on the grid")
    kin = hbar * hbar / (mass * grid.h * grid.h)
    diag = kin + u
    offdiag = np.full(grid.n - 1, -0.5 * kin)
    return HamiltonianTridiag(grid, diag, offdiag, hbar, mass, pot, periodic)


@dataclass(frozen=True)
class EigenPair:
    energy: float
    state: WaveFunction


def _fix_sign(v: np.ndarray) -> np.ndarray:
    big = np.abs(v) > 1e-3 * np.max(np.abs(v))
    first = int(np.argmax(big))
    return -v if v[first] < 0 else v


def eigensolve(H: HamiltonianTridiag, count: int, max_restarts: int = 3) -> list[EigenPair]:
    """Lowest ``count`` eigenpairs by Sturm bisection plus inverse iteration.

    States are real, normalized under trapezoid quadrature, and signed so that
    their first significant lobe is positive.
    """
    if H.periodic:
        raise PreconditionError("eigensolve works on hard-wall Hamiltonians only")
    d = np.ascontiguousarray(H.diag[1:-1])
    e = np.ascontiguousarray(H.offdiag[1:-1])
    m = d.shape[0]
    if not 1 <= count <= m:
        raise ValueError(f"count must lie in [1, {m}], got {count}")
    scale = max(float(np.max(np.abs(d))) + 2.0 * float(np.max(np.abs(e), initial=0.0)), 1.0)
    tol = 64.0 * _EPS * scale
    energies = bisect_eigenvalues(d, e, count)
    h = H.grid.h

    vectors: list[np.ndarray] = []
    pairs = []
    for idx, lam in enumerate(energies):
        vec = None
        for restart in range(max_restarts + 1):
            rng = np.random.default_rng(7919 * idx + restart)
            x = 1.0 + 0.5 * rng.standard_normal(m)
            x /= np.linalg.norm(x)
            best = math.inf
            polish = 0
            for _ in range(10):
                y = shifted_solve(d, e, lam, x)
                for w in vectors:
                    y -= (w @ y) * w
                ny = np.linalg.norm(y)
                if not np.isfinite(ny) or ny == 0.0:
                    break
                x = y / ny
                r = d * x - lam * x
                r[:-1] += e * x[1:]
                r[1:] += e * x[:-1]
                res = np.linalg.norm(r)
                if res < best:
                    best, vec_try = res, x
                # two extra sweeps once converged; they reach the rounding floor
                if best <= tol:
                    polish += 1
                    if polish > 2:
                        break
            if best <= tol:
                vec = vec_try
                break
        if vec is None:
            raise SolverError(f"inverse iteration did not converge for eigenvalue {idx}", index=idx)
        vectors.append(vec)
        full = np.zeros(H.grid.n)
        full[1:-1] = _fix_sign(vec) / math.sqrt(h)
        pairs.append(EigenPair(float(lam), WaveFunction(H.grid, full)))
    return pairs


def gaussian_packet(grid: Grid1D, x0: float, sigma: float, k0: float = 0.0) -> WaveFunction:
    """Normalized Gaussian ``exp(-(x-x0)^2/(4 sigma^2) + i k0 x)``; ``sigma`` is the position spread."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    lo, hi = x0 - PACKET_HALF_WIDTH * sigma, x0 + PACKET_HALF_WIDTH * sigma
    if lo < grid.x_min or hi > grid.x_max:
        raise DomainError(
            f"domain [{grid.x_min}, {grid.x_max}] must contain [{lo}, {hi}] (x0 +/- 8 sigma)"
        )
    x = grid.x
    vals = np.exp(-((x - x0) ** 2) / (4.0 * sigma * sigma) + 1j * k0 * x)
    return WaveFunction(grid, vals).normalized()


class CrankNicolson:
    """Cayley propagator ``(1 + i dt H/2hbar)^-1 (1 - i dt H/2hbar)`` with a cached factorization."""

    def __init__(self, H: HamiltonianTridiag, dt: float):
        if not math.isfinite(dt):
            raise ValueError("dt must be finite")
        self.H = H
        self.dt = dt
        self._coef = 0.5j * dt / H.hbar
        d, e = H.diag, H.offdiag
        if H.periodic:
            band = self._coef * e
            self._solver = CyclicFactorization(band, 1.0 + self._coef * d, band, band[0], band[0])
        else:
            band = self._coef * e[1:-1]
            self._solver = ThomasFactorization(band, 1.0 + self._coef * d[1:-1], band)

    def step_values(self, v: np.ndarray) -> np.ndarray:
        if self.dt == 0.0:
            return v
        rhs = v - self._coef * self.H.apply(v)
        out = np.zeros(v.shape, dtype=complex)
        act = self.H.active
        out[act] = self._solver.solve(rhs[act])
        return out

    def step(self, psi: WaveFunction) -> WaveFunction:
        return psi.with_values(self.step_values(psi.values))


def cn_step(psi: WaveFunction, H: HamiltonianTridiag, dt: float) -> WaveFunction:
    if psi.grid != H.grid:
        raise GridError("wave function and Hamiltonian live on different grids")
    if dt == 0.0:
        return psi
    return CrankNicolson(H, dt).step(psi)


def cayley_phase(energy: float, dt: float, hbar: float = 1.0) -> complex:
    """One-step multiplier the Cayley scheme applies to an eigenstate of energy ``energy``."""
    z = 0.5j * energy * dt / hbar
    return (1.0 - z) / (1.0 + z)


# -- observables ------------------------------------------------------------

def _quad(grid: Grid1D, integrand, periodic: bool):
    if periodic:
        return grid.h * np.sum(integrand)
    return trapezoid(integrand, grid.h)


def expectation(
    psi: WaveFunction,
    observable: str,
    *,
    potential: Potential | None = None,
    hamiltonian: HamiltonianTridiag | None = None,
    hbar: float = 1.0,
    order: int = 4,
    periodic: bool = False,
) -> float:
    """Expectation value of ``position``, ``momentum``, ``potential_gradient``, ``energy`` or ``norm``.

    Everything but ``norm`` requires a normalized state. Momentum uses
    ``-i hbar d/dx`` with the stencil ``order``; ``order=2`` is the lattice
    velocity operator ``m i[H, x]`` of the three-point Hamiltonian.
    """
    if hamiltonian is not None:
        periodic = hamiltonian.periodic
        hbar = hamiltonian.hbar
    grid = psi.grid
    dens = psi.density
    nrm = float(_quad(grid, dens, periodic))
    if observable == "norm":
        return nrm
    if abs(nrm - 1.0) > NORM_TOLERANCE:
        raise NormalizationError(f"state norm is {nrm!r}; {observable} needs a normalized state")
    if observable == "position":
        return float(_quad(grid, grid.x * dens, periodic))
    if observable == "momentum":
        pv = momentum_operator_values(psi.values, grid.h, 1.0 / hbar, order=order, periodic=periodic)
        return float(_quad(grid, np.conj(psi.values) * pv, periodic).real)
    if observable == "potential_gradient":
        if potential is None:
            raise ValueError("potential_gradient needs a potential")
        return float(_quad(grid, potential.gradient(grid.x) * dens, periodic))
    if observable == "energy":
        if hamiltonian is None:
            raise ValueError("energy needs a hamiltonian")
        return float(_quad(grid, np.conj(psi.values) * hamiltonian.apply(psi.values), periodic).real)
    raise ValueError(f"unknown observable {observable!r}")


def position_spread(psi: WaveFunction) -> float:
    """Standard deviation of the position distribution."""
    mean = expectation(psi, "position")
    return math.sqrt(max(float(trapezoid(psi.grid.x**2 * psi.density, psi.grid.h)) - mean * mean, 0.0))


@dataclass(frozen=True)
class PropagationTrace:
    times: np.ndarray
    norms: np.ndarray
    x_exp: np.ndarray
    p_exp: np.ndarray
    gradU_exp: np.ndarray
    energy_exp: np.ndarray
    autocorrelation: np.ndarray
    final_state: WaveFunction = field(repr=False)

    def __len__(self) -> int:
        return self.times.shape[0]

    @property
    def record_spacing(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self) > 1 else 0.0


def propagate(
    psi: WaveFunction,
    H: HamiltonianTridiag,
    dt: float,
    n: int,
    record_every: int = 1,
    momentum_order: int = 4,
) -> PropagationTrace:
    """``n`` Crank-Nicolson steps, recording observables every ``record_every`` steps.

    Records are taken at step counts 0, r, 2r, ... up to ``n``.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if record_every < 1:
        raise ValueError("record_every must be at least 1")
    if psi.grid != H.grid:
        raise GridError("wave function and Hamiltonian live on different grids")
    grid = H.grid
    periodic = H.periodic
    pot = H.potential or Potential.free()
    x = grid.x
    grad = np.asarray(pot.gradient(x), dtype=float)
    h = grid.h
    if periodic:
        weights = np.full(grid.n, h)
    else:
        weights = np.full(grid.n, h)
        weights[0] = weights[-1] = 0.5 * h
    alpha = 1.0 / H.hbar
    prop = CrankNicolson(H, dt)
    v0 = psi.values
    cv0 = np.conj(v0) * weights

    rows = []

    def record(step, v):
        dens = (v.real**2 + v.imag**2) * weights
        nrm = dens.sum()
        cw = np.conj(v) * weights
        pv = momentum_operator_values(v, h, alpha, order=momentum_order, periodic=periodic)
        rows.append(
            (
                step * dt,
                nrm,
                (x * dens).sum() / nrm,
                (cw * pv).sum().real / nrm,
                (grad * dens).sum() / nrm,
                (cw * H.apply(v)).sum().real / nrm,
                (cv0 * v).sum(),
            )
        )

    v = v0
    record(0, v)
    for step in range(1, n + 1):
        v = prop.step_values(v)
        if step % record_every == 0:
            record(step, v)

    cols = list(zip(*rows))
    return PropagationTrace(
        times=np.array(cols[0]),
        norms=np.array(cols[1]),
        x_exp=np.array(cols[2]),
        p_exp=np.array(cols[3]),
        gradU_exp=np.array(cols[4]),
        energy_exp=np.array(cols[5]),
        autocorrelation=np.array(cols[6], dtype=complex),
        final_state=psi.with_values(v),
    )
