"""End-to-end acceptance criteria, each judged at its stated tolerance.

Every test records a single PASS/FAIL line; the lines are printed in the
terminal summary (and inline when run with ``-s``).
"""

import math
import subprocess
import sys

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from n2s.dynamics import ParticleState, Potential, integrate
from n2s.grid import Grid1D
from n2s.matterwave import MatterWaveFrame, de_broglie_wavelength
from n2s.schrodinger import (
    build_hamiltonian,
    eigensolve,
    expectation,
    gaussian_packet,
    position_spread,
    propagate,
)
from n2s.verify import (
    COHERENT,
    PacketParams,
    classical_quantum_compare,
    ehrenfest_residual,
    ehrenfest_trace,
    momentum_operator_errors,
    observed_orders,
    omega_halving_check,
)
from n2s.wavefield import (
    exponential_ansatz,
    fd_second_time_derivative,
    free_tise_residual,
    gaussian_windowed_ansatz,
    ibp_residual,
    time_derivatives,
    wave_residual,
    wavelength_from_dispersion,
)

pytestmark = pytest.mark.acceptance


def report(number, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {title} -- {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_de_broglie_closure():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(20):
        frame = MatterWaveFrame(
            p0=tuple(rng.uniform(-5, 5, 3)), alpha=float(rng.uniform(0.1, 10)), mass=float(rng.uniform(0.1, 10))
        )
        a, b = de_broglie_wavelength(frame), wavelength_from_dispersion(frame)
        worst = max(worst, abs(a - b) / a)
    report(1, "de Broglie closure", worst <= 1e-14, f"max rel gap {worst:.3g} <= 1e-14")


def test_criterion_02_momentum_operator_eigenrelation():
    hs, errs = momentum_operator_errors(k=1.0)
    orders = observed_orders(hs, errs)
    ok = bool(np.all((orders >= 1.9) & (orders <= 2.1)) and errs[-1] < 1e-6 and hs[-1] == 2.5e-4)
    report(
        2,
        "momentum operator eigenrelation",
        ok,
        f"orders {np.round(orders, 4).tolist()} in [1.9, 2.1]; final rel err {errs[-1]:.3g} < 1e-6",
    )


def test_criterion_03_classical_wave_equation():
    frame = MatterWaveFrame(p0=1.3, alpha=1.0)
    ans = exponential_ansatz(frame)
    worst = fd_worst = 0.0
    for pot in (Potential.free(), Potential.harmonic(1.0)):
        traj = integrate(ParticleState(0.7, 1.1), pot, 1e-4, 50_000)
        for t in np.linspace(traj.t_start, traj.t_end, 52)[1:-1]:
            worst = max(worst, abs(wave_residual(ans, traj, pot, t)))
            s = traj.state_at(t, pot)
            _, exact = time_derivatives(ans, s.position, s.velocity, float(-pot.gradient(s.position)))
            fd_worst = max(fd_worst, abs(fd_second_time_derivative(ans, traj, pot, t) - exact))
    ok = worst < 1e-10 and fd_worst < 1e-5
    report(3, "classical wave-equation identity", ok, f"|residual| {worst:.3g} < 1e-10; FD gap {fd_worst:.3g} < 1e-5")


def test_criterion_04_free_tise_exact():
    frames = [
        MatterWaveFrame(p0=p, alpha=a, mass=m)
        for p, a, m in [(1.0, 1.0, 1.0), (1.0, 2.0, 1.0), (1.5, 1.0, 0.5), (3.0, 0.25, 2.0), ((0.3, -1.7, 2.2), 0.37, 5.1)]
    ]
    residuals = [free_tise_residual(f) for f in frames]
    report(4, "free-particle TISE", all(r == 0 for r in residuals), f"residuals {residuals} all exactly 0")


def test_criterion_05_integration_by_parts():
    frame = MatterWaveFrame(p0=1.0)
    ans = gaussian_windowed_ansatz(frame, 1.0)
    pot = Potential.harmonic(1.0)
    wide = ibp_residual(ans, pot, Grid1D(-12.0, 12.0, 24001))
    narrow = ibp_residual(ans, pot, Grid1D(-2.0, 2.0, 4001), require_decay=False)
    ok = wide.rel_residual < 1e-6 and abs(wide.surface) < 1e-12 and abs(narrow.surface) > 1e-3
    report(
        5,
        "integration-by-parts identity",
        ok,
        f"relResidual {wide.rel_residual:.3g}, |surface| {abs(wide.surface):.3g} (+-12s); "
        f"|surface| {abs(narrow.surface):.3g} (+-2s)",
    )


def test_criterion_06_tise_spectra():
    well = eigensolve(build_hamiltonian(Grid1D(0.0, 1.0, 2000), Potential.free()), 1)[0].energy
    well_rel = abs(well - math.pi**2 / 2) / (math.pi**2 / 2)
    energies = np.array(
        [p.energy for p in eigensolve(build_hamiltonian(Grid1D.centered(10.0, 2000), Potential.harmonic(1.0)), 6)]
    )
    ground = abs(energies[0] - 0.5)
    spacing = float(np.max(np.abs(np.diff(energies) - 1.0)))
    errs = []
    for n in (500, 999, 1997, 3993):
        e0 = eigensolve(build_hamiltonian(Grid1D.centered(10.0, n), Potential.harmonic(1.0)), 1)[0].energy
        errs.append(abs(e0 - 0.5))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    ok = well_rel < 1e-3 and ground < 1e-4 and spacing < 1e-3 and bool(np.all((ratios >= 3.5) & (ratios <= 4.5)))
    report(
        6,
        "TISE spectra",
        ok,
        f"well rel {well_rel:.3g}; E0 err {ground:.3g}; spacing err {spacing:.3g}; ratios {np.round(ratios, 4).tolist()}",
    )


def test_criterion_07_unitarity():
    grid = Grid1D.centered(10.0, 2000)
    worst = {}
    for label, pot in (("harmonic", Potential.harmonic(1.0)), ("quartic", Potential.quartic(0.25))):
        psi = gaussian_packet(grid, 1.0, 1.0 / math.sqrt(2.0), 0.5)
        trace = propagate(psi, build_hamiltonian(grid, pot), 1e-3, 10_000, 1)
        worst[label] = float(np.max(np.abs(trace.norms - 1.0)))
    ok = all(v < 1e-10 for v in worst.values())
    report(7, "TDSE unitarity", ok, ", ".join(f"{k} max|norm-1| {v:.3g}" for k, v in worst.items()) + " < 1e-10")


def test_criterion_08_free_packet_spreading():
    grid = Grid1D.centered(20.0, 4001)
    psi = gaussian_packet(grid, 0.0, 1.0, 0.0)
    trace = propagate(psi, build_hamiltonian(grid, Potential.free()), 1e-3, 2000, 2000)
    width = position_spread(trace.final_state)
    err = abs(width - math.sqrt(2.0))
    report(8, "free-packet spreading", err < 1e-3, f"sigma(2) = {width:.8f}, |err| {err:.3g} < 1e-3")


def test_criterion_09_ehrenfest():
    parts = []
    ok = True
    for label, pot, tol in (("harmonic", Potential.harmonic(1.0), 1e-4), ("quartic", Potential.quartic(0.25), 1e-3)):
        coarse = ehrenfest_residual(ehrenfest_trace(pot, 2000, 1e-3, COHERENT)).residual
        fine = ehrenfest_residual(ehrenfest_trace(pot, 3999, 5e-4, COHERENT)).residual
        ratio = coarse / fine
        ok &= coarse < tol and 3.5 <= ratio <= 4.5
        parts.append(f"{label} {coarse:.3g} < {tol:g}, ratio {ratio:.4f}")
    report(9, "Ehrenfest identity", ok, "; ".join(parts))


def test_criterion_10_expectation_vs_newton():
    grid = Grid1D.centered(10.0, 2000)
    psi = gaussian_packet(grid, 1.0, 1.0 / math.sqrt(2.0), 0.0)
    steps = int(round(2 * math.pi / 1e-3))
    trace = propagate(psi, build_hamiltonian(grid, Potential.harmonic(1.0)), 1e-3, steps, 10)
    harmonic_gap = float(np.max(np.abs(trace.x_exp - np.cos(trace.times))))

    free = classical_quantum_compare(
        Potential.free(),
        PacketParams(x0=-4.0, sigma=1.0, k0=2.0),
        1.0,
        grid=Grid1D.centered(15.0, 3001),
        dt=2.5e-4,
        record_every=10,
        tolerance=1e-6,
    )
    tr = free.measurements["trace"]
    p_cl = expectation(gaussian_packet(Grid1D.centered(15.0, 3001), -4.0, 1.0, 2.0), "momentum", order=2)
    drift_gap = float(np.max(np.abs(tr.x_exp - (tr.x_exp[0] + p_cl * tr.times))))
    ok = harmonic_gap < 1e-3 and drift_gap < 1e-6
    report(10, "expectation vs Newton", ok, f"max|<x>-cos t| {harmonic_gap:.3g} < 1e-3; free drift gap {drift_gap:.3g} < 1e-6")


def test_criterion_11_omega_halving():
    results = [omega_halving_check(MatterWaveFrame(p0=p)) for p in (1.0, 2.0)]
    arith = max(r.measurements["arithmetic"] for r in results)
    phase = max(r.measurements["phase_rel"] for r in results)
    ok = arith == 0.0 and phase < 1e-3
    report(11, "Omega halving", ok, f"arithmetic gap {arith} (exact); phase-frequency rel err {phase:.3g} < 1e-3")


def _cli(args, tmp_path):
    return subprocess.run([sys.executable, "-m", "n2s", *args], capture_output=True, cwd=tmp_path)


def test_criterion_12_cli_determinism(tmp_path):
    identical = []
    for scenario in ("free-packet", "harmonic-coherent", "quartic-packet", "spectra", "derivation-suite"):
        cfg = tmp_path / f"{scenario}.cfg"
        cfg.write_text(f"scenario = {scenario}\nsteps = 500\nrecord_every = 50\n")
        outs = []
        for i in range(2):
            out = tmp_path / f"{scenario}-{i}.csv"
            proc = _cli(["run", str(cfg), "--out", str(out)], tmp_path)
            assert proc.returncode == 0, proc.stderr
            outs.append(out.read_bytes())
        identical.append(outs[0] == outs[1] and len(outs[0]) > 0)
    verify = _cli(["verify"], tmp_path)
    ok = all(identical) and verify.returncode == 0
    report(12, "CLI determinism", ok, f"byte-identical reruns {sum(identical)}/5; verify exit code {verify.returncode}")
