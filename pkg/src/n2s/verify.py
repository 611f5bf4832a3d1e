"""Theorem-level checks: Ehrenfest, expectation values versus Newton, frequency halving.

:func:`run_all` strings every check in the package into one deterministic
suite; the CLI's ``verify`` command is a thin wrapper over it.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .dynamics import ParticleState, Potential, integrate
from .errors import PreconditionError
from .grid import Grid1D, WaveFunction, derivative
from .matterwave import MatterWaveFrame, de_broglie_wavelength
from .schrodinger import (
    PropagationTrace,
    build_hamiltonian,
    eigensolve,
    expectation,
    gaussian_packet,
    position_spread,
    propagate,
)
from .wavefield import (
    exponential_ansatz,
    fd_second_time_derivative,
    free_tise_residual,
    gaussian_windowed_ansatz,
    ibp_residual,
    time_derivatives,
    wave_residual,
    wavelength_from_dispersion,
)

GRID_ENV = "N2S_DEFAULT_GRID_N"
DEFAULT_GRID_N = 2000


def default_grid_n() -> int:
    raw = os.environ.get(GRID_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_GRID_N
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{GRID_ENV} must be an integer, got {raw!r}") from None
    if n < 3:
        raise ValueError(f"{GRID_ENV} must be at least 3, got {n}")
    return n


@dataclass(frozen=True)
class VerificationResult:
    name: str
    residual: float
    tolerance: float
    passed: bool
    details: str = ""
    measurements: dict = field(default_factory=dict, compare=False)

    @classmethod
    def judge(cls, name, residual, tolerance, details="", **measurements) -> "VerificationResult":
        residual = float(residual)
        return cls(name, residual, float(tolerance), bool(residual <= tolerance), details, measurements)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class PacketParams:
    x0: float = 0.0
    sigma: float = 1.0
    k0: float = 0.0


# -- Ehrenfest ---------------------------------------------------------------

def ehrenfest_residual(
    trace: PropagationTrace, tolerance: float = 1e-4, name: str = "ehrenfest"
) -> VerificationResult:
    """Largest ``|d<p>/dt + <dU/dx>|`` over interior records, ``d/dt`` by central differences."""
    if len(trace) < 3:
        raise PreconditionError("Ehrenfest check needs at least 3 records")
    gaps = np.diff(trace.times)
    spacing = gaps[0]
    if spacing <= 0 or np.max(np.abs(gaps - spacing)) > 1e-9 * spacing:
        raise PreconditionError("records must be uniformly spaced in time")
    dp_dt = (trace.p_exp[2:] - trace.p_exp[:-2]) / (2.0 * spacing)
    gap = np.abs(dp_dt + trace.gradU_exp[1:-1])
    worst = int(np.argmax(gap))
    return VerificationResult.judge(
        name, gap[worst], tolerance, f"worst at t={trace.times[worst + 1]:.6g}"
    )


def ehrenfest_trace(
    pot: Potential,
    n: int,
    dt: float,
    packet: PacketParams,
    half_width: float = 10.0,
    periods: float = 1.0,
    mass: float = 1.0,
    hbar: float = 1.0,
) -> PropagationTrace:
    """Propagate a packet for ``periods`` units of ``2 pi``, recording every step."""
    grid = Grid1D.centered(half_width, n)
    H = build_hamiltonian(grid, pot, mass, hbar)
    psi = gaussian_packet(grid, packet.x0, packet.sigma, packet.k0)
    steps = int(round(2.0 * math.pi * periods / dt))
    return propagate(psi, H, dt, steps, 1)


# -- expectation values versus Newton ----------------------------------------

def classical_quantum_compare(
    pot: Potential,
    packet: PacketParams,
    horizon: float,
    *,
    grid: Grid1D | None = None,
    dt: float = 1e-3,
    record_every: int = 1,
    mass: float = 1.0,
    hbar: float = 1.0,
    tolerance: float = 1e-3,
    name: str | None = None,
) -> VerificationResult:
    """Largest gap between the packet centroid and a Newtonian particle started at its mean.

    The classical momentum is the packet's lattice velocity times mass, that is
    the expectation of the three-point momentum stencil, which is exactly what
    transports the centroid of the discretized packet. Potentials other than
    free and harmonic produce a report-only result.
    """
    name = name or f"newton_{pot.kind}"
    if grid is None:
        grid = Grid1D.centered(10.0, default_grid_n(), packet.x0)
    H = build_hamiltonian(grid, pot, mass, hbar)
    psi = gaussian_packet(grid, packet.x0, packet.sigma, packet.k0)
    steps = int(round(horizon / dt))
    trace = propagate(psi, H, dt, steps, record_every)
    x_q0 = expectation(psi, "position")
    p_q0 = expectation(psi, "momentum", hbar=hbar, order=2)
    traj = integrate(ParticleState(x_q0, p_q0, mass), pot, dt, steps)
    x_cl = traj.positions[::record_every]
    gap = float(np.max(np.abs(trace.x_exp - x_cl)))
    exact = pot.kind in ("free", "harmonic")
    details = "" if exact else "report-only: agreement is not exact for this potential"
    return VerificationResult.judge(
        name, gap, tolerance if exact else math.inf, details, trace=trace, classical=traj
    )


# -- frequency halving -------------------------------------------------------

def _phase_frequency(autocorrelation: np.ndarray, times: np.ndarray) -> float:
    phase = np.unwrap(np.angle(autocorrelation))
    slope = np.polyfit(times, phase, 1)[0]
    return float(-slope)


def omega_halving_check(
    frame: MatterWaveFrame,
    hbar: float = 1.0,
    n: int | None = None,
    samples: int = 200,
    tolerance: float = 1e-3,
    box_level: int = 4,
    name: str | None = None,
) -> VerificationResult:
    """Three views of ``omega = Omega/2 = E/hbar`` for a free particle with momentum ``|p0|``.

    (a) the arithmetic identity ``Omega = 2E/hbar`` in exact rationals;
    (b) the phase frequency of a propagated periodic plane-wave mode, fitted
    to the unwrapped autocorrelation phase; (c) the eigensolve energy of the
    hard-wall box level whose wavenumber equals ``alpha |p0|``.
    """
    if not math.isclose(frame.alpha * hbar, 1.0, rel_tol=1e-12):
        raise PreconditionError("frequency halving is only meaningful at alpha = 1/hbar")
    name = name or f"omega_halving_p0={frame.p0_norm:g}"
    n = n or default_grid_n()
    m = frame.mass
    p = frame.p0_norm

    # (a) exact rational arithmetic; hbar is taken as exactly 1/alpha
    alpha_q = Fraction(frame.alpha)
    p_sq = sum(Fraction(c) ** 2 for c in frame.p0)
    omega_cl = alpha_q * p_sq / Fraction(m)
    energy_q = p_sq / (2 * Fraction(m))
    arith = float(abs(omega_cl - 2 * energy_q * alpha_q) / omega_cl)

    omega = 0.5 * frame.classical_frequency
    energy = frame.kinetic_energy

    # (b) periodic plane-wave mode, one wavelength per period
    k = frame.wavenumber
    period = 2.0 * math.pi / k
    grid = Grid1D.periodic(period, n)
    H = build_hamiltonian(grid, Potential.free(), m, hbar, periodic=True)
    psi = WaveFunction(grid, np.exp(1j * k * grid.x) / math.sqrt(period))
    dt = min(1e-3, 0.02 * hbar / energy)
    trace = propagate(psi, H, dt, samples, 1)
    measured = _phase_frequency(trace.autocorrelation, trace.times)
    phase_rel = abs(measured - omega) / omega

    # (c) hard-wall box whose level `box_level` has wavenumber k
    box = Grid1D(0.0, box_level * math.pi / k, n)
    Hbox = build_hamiltonian(box, Potential.free(), m, hbar)
    level = eigensolve(Hbox, box_level)[-1].energy
    eig_rel = abs(level - hbar * omega) / (hbar * omega)

    residual = max(arith, phase_rel, eig_rel)
    details = (
        f"Omega={frame.classical_frequency:.12g} omega={omega:.12g} E={energy:.12g} "
        f"arith={arith:.3g} phase_freq={measured:.12g} (rel {phase_rel:.3g}) "
        f"box_level={level:.12g} (rel {eig_rel:.3g})"
    )
    return VerificationResult.judge(
        name,
        residual,
        tolerance,
        details,
        arithmetic=arith,
        phase_frequency=measured,
        phase_rel=phase_rel,
        box_energy=level,
        box_rel=eig_rel,
    )


# -- suite --------------------------------------------------------------------

@dataclass(frozen=True)
class SuiteConfig:
    grid_n: int = field(default_factory=default_grid_n)
    dt: float = 1e-3
    tolerance_scale: float = 1.0
    seed: int = 20240101

    def tol(self, value: float) -> float:
        return value * self.tolerance_scale


def _check_debroglie(cfg):
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for _ in range(20):
        frame = MatterWaveFrame(
            p0=tuple(rng.uniform(-5.0, 5.0, 3)),
            alpha=float(rng.uniform(0.1, 10.0)),
            mass=float(rng.uniform(0.1, 10.0)),
        )
        a, b = de_broglie_wavelength(frame), wavelength_from_dispersion(frame)
        worst = max(worst, abs(a - b) / abs(a))
    return [VerificationResult.judge("debroglie_closure", worst, cfg.tol(1e-14))]


def momentum_operator_errors(k: float = 1.0, spacings=(4e-3, 2e-3, 1e-3, 5e-4, 2.5e-4)):
    """Max relative error of the three-point momentum operator on a sampled plane wave."""
    errs = []
    for h in spacings:
        n = int(round(1.0 / h)) + 1
        grid = Grid1D(0.0, 1.0, n)
        vals = np.exp(1j * k * grid.x)
        applied = -1j * derivative(vals, grid.h, order=2)
        errs.append(float(np.max(np.abs(applied - k * vals))) / k)
    return np.array(spacings), np.array(errs)


def observed_orders(spacings, errors) -> np.ndarray:
    return np.log(errors[:-1] / errors[1:]) / np.log(spacings[:-1] / spacings[1:])


def _check_momentum_operator(cfg):
    hs, errs = momentum_operator_errors()
    orders = observed_orders(hs, errs)
    return [
        VerificationResult.judge(
            "momentum_operator_order",
            float(np.max(np.abs(orders - 2.0))),
            cfg.tol(0.1),
            "observed orders " + ", ".join(f"{o:.4f}" for o in orders),
        ),
        VerificationResult.judge("momentum_operator_error", errs[-1], cfg.tol(1e-6)),
    ]


def _check_wave_equation(cfg):
    frame = MatterWaveFrame(p0=1.3, alpha=1.0)
    ans = exponential_ansatz(frame)
    out = []
    fd_worst = 0.0
    for label, pot in (("free", Potential.free()), ("harmonic", Potential.harmonic(1.0))):
        traj = integrate(ParticleState(0.7, 1.1), pot, 1e-4, 50_000)
        times = np.linspace(traj.t_start, traj.t_end, 52)[1:-1]
        worst = 0.0
        for t in times:
            worst = max(worst, abs(wave_residual(ans, traj, pot, t)))
            s = traj.state_at(t, pot)
            _, exact = time_derivatives(ans, s.position, s.velocity, -pot.gradient(s.position) / s.mass)
            fd_worst = max(fd_worst, abs(fd_second_time_derivative(ans, traj, pot, t) - exact))
        out.append(VerificationResult.judge(f"wave_equation_{label}", worst, cfg.tol(1e-10)))
    out.append(VerificationResult.judge("wave_equation_fd_crosscheck", fd_worst, cfg.tol(1e-5)))
    return out


def _check_free_tise(cfg):
    frames = [
        MatterWaveFrame(p0=p, alpha=a, mass=m)
        for p, a, m in [(1.0, 1.0, 1.0), (1.0, 2.0, 1.0), (3.0, 1.0, 2.0), ((0.3, -1.7, 2.2), 0.37, 5.1)]
    ]
    worst = max(free_tise_residual(fr) for fr in frames)
    return [VerificationResult.judge("free_tise", worst, cfg.tol(0.0))]


def _check_ibp(cfg):
    frame = MatterWaveFrame(p0=1.0, alpha=1.0)
    ans = gaussian_windowed_ansatz(frame, 1.0)
    pot = Potential.harmonic(1.0)
    wide = ibp_residual(ans, pot, Grid1D(-12.0, 12.0, 24001))
    narrow = ibp_residual(ans, pot, Grid1D(-2.0, 2.0, 4001), require_decay=False)
    return [
        VerificationResult.judge("ibp_identity", wide.rel_residual, cfg.tol(1e-6)),
        VerificationResult.judge("ibp_surface_decayed", abs(wide.surface), cfg.tol(1e-12)),
        VerificationResult.judge(
            "ibp_surface_truncated",
            1e-3 / max(abs(narrow.surface), 1e-300),
            cfg.tol(1.0),
            f"|surface|={abs(narrow.surface):.6g} must exceed 1e-3",
        ),
    ]


def harmonic_spectrum(n: int, count: int = 6, half_width: float = 10.0):
    H = build_hamiltonian(Grid1D.centered(half_width, n), Potential.harmonic(1.0))
    return H, eigensolve(H, count)


def _check_spectra(cfg):
    n = cfg.grid_n
    well = eigensolve(build_hamiltonian(Grid1D(0.0, 1.0, n), Potential.free()), 1)[0].energy
    exact_well = math.pi**2 / 2.0
    H, pairs = harmonic_spectrum(n)
    energies = np.array([p.energy for p in pairs])
    ground_err = abs(energies[0] - 0.5)
    spacing_err = float(np.max(np.abs(np.diff(energies) - 1.0)))
    _, fine = harmonic_spectrum(2 * n - 1, count=1)
    ratio = ground_err / abs(fine[0].energy - 0.5)
    overlaps = np.array([[a.state.inner(b.state).real for b in pairs] for a in pairs])
    ortho = float(np.max(np.abs(overlaps - np.eye(len(pairs)))))
    virial = 0.0
    u = H.potential.value(H.grid.x)
    for p in pairs:
        pot_e = float(np.sum(u * p.state.density) * H.grid.h)
        kin_e = p.energy - pot_e
        virial = max(virial, abs(kin_e - pot_e) / p.energy)
    return [
        VerificationResult.judge("spectrum_well_ground", abs(well - exact_well) / exact_well, cfg.tol(1e-3)),
        VerificationResult.judge("spectrum_harmonic_ground", ground_err, cfg.tol(1e-4)),
        VerificationResult.judge("spectrum_harmonic_spacing", spacing_err, cfg.tol(1e-3)),
        VerificationResult.judge(
            "spectrum_refinement_ratio", abs(ratio - 4.0), cfg.tol(0.5), f"ratio={ratio:.6f}"
        ),
        VerificationResult.judge("eigenstate_orthonormality", ortho, cfg.tol(1e-8)),
        VerificationResult.judge("virial_harmonic", virial, cfg.tol(1e-3)),
    ]


def _check_unitarity(cfg):
    out = []
    grid = Grid1D.centered(10.0, cfg.grid_n)
    for label, pot in (("harmonic", Potential.harmonic(1.0)), ("quartic", Potential.quartic(0.25))):
        H = build_hamiltonian(grid, pot)
        psi = gaussian_packet(grid, 1.0, 1.0 / math.sqrt(2.0), 0.5)
        trace = propagate(psi, H, cfg.dt, 10_000, 10)
        out.append(
            VerificationResult.judge(
                f"unitarity_{label}", float(np.max(np.abs(trace.norms - 1.0))), cfg.tol(1e-10)
            )
        )
    return out


def _check_spreading(cfg):
    grid = Grid1D.centered(20.0, 2 * cfg.grid_n + 1)
    H = build_hamiltonian(grid, Potential.free())
    psi = gaussian_packet(grid, 0.0, 1.0, 0.0)
    steps = int(round(2.0 / cfg.dt))
    trace = propagate(psi, H, cfg.dt, steps, steps)
    width = position_spread(trace.final_state)
    return [
        VerificationResult.judge(
            "free_packet_spreading", abs(width - math.sqrt(2.0)), cfg.tol(1e-3), f"sigma(2)={width:.10f}"
        )
    ]


COHERENT = PacketParams(x0=1.0, sigma=1.0 / math.sqrt(2.0), k0=0.0)
QUARTIC_PACKET = PacketParams(x0=1.0, sigma=1.0 / math.sqrt(2.0), k0=0.0)


def _check_ehrenfest(cfg):
    out = []
    for label, pot, packet, tol in (
        ("harmonic", Potential.harmonic(1.0), COHERENT, 1e-4),
        ("quartic", Potential.quartic(0.25), QUARTIC_PACKET, 1e-3),
    ):
        coarse = ehrenfest_residual(
            ehrenfest_trace(pot, cfg.grid_n, cfg.dt, packet), cfg.tol(tol), f"ehrenfest_{label}"
        )
        fine = ehrenfest_residual(ehrenfest_trace(pot, 2 * cfg.grid_n - 1, 0.5 * cfg.dt, packet))
        ratio = coarse.residual / fine.residual
        out.append(coarse)
        out.append(
            VerificationResult.judge(
                f"ehrenfest_refinement_ratio_{label}", abs(ratio - 4.0), cfg.tol(0.5), f"ratio={ratio:.6f}"
            )
        )
    return out


def _check_newton(cfg):
    harmonic = classical_quantum_compare(
        Potential.harmonic(1.0),
        COHERENT,
        2.0 * math.pi,
        grid=Grid1D.centered(10.0, cfg.grid_n),
        dt=cfg.dt,
        tolerance=cfg.tol(1e-3),
        name="newton_harmonic",
    )
    free = classical_quantum_compare(
        Potential.free(),
        PacketParams(x0=-4.0, sigma=1.0, k0=2.0),
        1.0,
        grid=Grid1D.centered(15.0, int(1.5 * cfg.grid_n) + 1),
        dt=0.25 * cfg.dt,
        record_every=10,
        tolerance=cfg.tol(1e-6),
        name="newton_free",
    )
    return [replace(harmonic, measurements={}), replace(free, measurements={})]


def _check_omega(cfg):
    return [
        omega_halving_check(MatterWaveFrame(p0=p0), tolerance=cfg.tol(1e-3), n=cfg.grid_n)
        for p0 in (1.0, 2.0)
    ]


CHECKS = (
    _check_debroglie,
    _check_momentum_operator,
    _check_wave_equation,
    _check_free_tise,
    _check_ibp,
    _check_spectra,
    _check_unitarity,
    _check_spreading,
    _check_ehrenfest,
    _check_newton,
    _check_omega,
)


def run_all(config: SuiteConfig | None = None) -> list[VerificationResult]:
    """Run every check; failures are recorded, never raised. Results come back sorted by name."""
    cfg = config or SuiteConfig()
    results: list[VerificationResult] = []
    for check in CHECKS:
        try:
            results.extend(check(cfg))
        except Exception as exc:  # a crashing check is a failed check
            label = check.__name__.removeprefix("_check_")
            results.append(
                VerificationResult(label, math.inf, 0.0, False, f"{type(exc).__name__}: {exc}")
            )
    return sorted(results, key=lambda r: r.name)
