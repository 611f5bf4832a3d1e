import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import n2s.schrodinger as sch
from n2s.dynamics import Potential
from n2s.errors import DomainError, NormalizationError, SolverError
from n2s.grid import Grid1D, WaveFunction
from n2s.schrodinger import (
    build_hamiltonian,
    cayley_phase,
    cn_step,
    eigensolve,
    expectation,
    gaussian_packet,
    position_spread,
    propagate,
)


def test_free_hamiltonian_stencil():
    H = build_hamiltonian(Grid1D(0.0, 1.0, 11), Potential.free())
    assert np.allclose(H.diag, 100.0, rtol=1e-13)
    assert np.allclose(H.offdiag, -50.0, rtol=1e-13)
    dense = H.to_dense()
    assert np.array_equal(dense, dense.T)


def test_hamiltonian_includes_potential_on_diagonal():
    grid = Grid1D(-2.0, 2.0, 41)
    H = build_hamiltonian(grid, Potential.harmonic(1.0))
    assert np.allclose(H.diag - 1 / grid.h**2, 0.5 * grid.x**2, atol=1e-10)


@pytest.fixture(scope="module")
def harmonic_pairs(harmonic_H):
    return eigensolve(harmonic_H, 6)


def test_infinite_well_ground_state():
    E1 = eigensolve(build_hamiltonian(Grid1D(0.0, 1.0, 2000), Potential.free()), 1)[0].energy
    assert abs(E1 - math.pi**2 / 2) / (math.pi**2 / 2) < 1e-3


def test_harmonic_ground_and_spacing(harmonic_pairs):
    energies = np.array([p.energy for p in harmonic_pairs])
    assert abs(energies[0] - 0.5) < 1e-4
    assert np.all(np.abs(np.diff(energies) - 1.0) < 1e-3)


def test_eigenpairs_are_orthonormal_and_accurate(harmonic_H, harmonic_pairs):
    for i, a in enumerate(harmonic_pairs):
        assert np.all(a.state.values.imag == 0)
        for j, b in enumerate(harmonic_pairs):
            assert abs(a.state.inner(b.state) - (i == j)) < 1e-8
        v = a.state.values.real
        resid = harmonic_H.apply(v) - a.energy * v
        assert np.linalg.norm(resid) / np.linalg.norm(v) < 1e-8


def test_eigensolve_matches_dense_reference():
    H = build_hamiltonian(Grid1D.centered(5.0, 200), Potential.quartic(0.25))
    ref = np.linalg.eigvalsh(H.to_dense()[1:-1, 1:-1])[:5]
    got = [p.energy for p in eigensolve(H, 5)]
    assert np.allclose(got, ref, rtol=1e-12)


def test_virial_theorem(harmonic_H, harmonic_pairs):
    u = harmonic_H.potential.value(harmonic_H.grid.x)
    for p in harmonic_pairs:
        pot = float(np.sum(u * p.state.density) * harmonic_H.grid.h)
        assert abs((p.energy - pot) - pot) < 1e-3 * p.energy


@pytest.mark.parametrize("case", ["well", "harmonic"])
def test_spectral_convergence_order(case):
    errs, hs = [], []
    for n in (250, 499, 997, 1993):
        if case == "well":
            grid, pot, exact = Grid1D(0.0, 1.0, n), Potential.free(), math.pi**2 / 2
        else:
            grid, pot, exact = Grid1D.centered(10.0, n), Potential.harmonic(1.0), 0.5
        errs.append(abs(eigensolve(build_hamiltonian(grid, pot), 1)[0].energy - exact))
        hs.append(grid.h)
    orders = np.log(np.array(errs[:-1]) / errs[1:]) / np.log(np.array(hs[:-1]) / hs[1:])
    assert np.all((orders > 1.9) & (orders < 2.1))


def test_eigensolve_count_bounds():
    H = build_hamiltonian(Grid1D(0.0, 1.0, 10), Potential.free())
    with pytest.raises(ValueError):
        eigensolve(H, 0)
    with pytest.raises(ValueError):
        eigensolve(H, 9)


def test_eigensolve_reports_failing_index(monkeypatch):
    H = build_hamiltonian(Grid1D(0.0, 1.0, 50), Potential.free())
    monkeypatch.setattr(sch, "shifted_solve", lambda d, e, lam, x: np.zeros_like(x))
    with pytest.raises(SolverError) as info:
        eigensolve(H, 2, max_restarts=1)
    assert info.value.index == 0


def test_gaussian_packet_examples(harmonic_grid):
    psi = gaussian_packet(harmonic_grid, 0.0, 1.0, 0.0)
    assert abs(expectation(psi, "norm") - 1) < 1e-10
    assert abs(expectation(psi, "momentum")) < 1e-10
    assert abs(expectation(psi, "position")) < 1e-10
    moving = gaussian_packet(harmonic_grid, 0.5, 1.0, 2.0)
    assert abs(expectation(moving, "momentum") - 2.0) < 1e-6
    assert abs(expectation(moving, "position") - 0.5) < 1e-8


def test_gaussian_packet_needs_room():
    with pytest.raises(DomainError):
        gaussian_packet(Grid1D(-3.0, 3.0, 301), 0.0, 1.0)


def test_cn_zero_step_is_identity(harmonic_grid, harmonic_H):
    psi = gaussian_packet(harmonic_grid, 1.0, 0.7, 0.3)
    assert np.array_equal(cn_step(psi, harmonic_H, 0.0).values, psi.values)


def test_eigenstate_evolves_by_cayley_phase(harmonic_H, harmonic_pairs):
    dt = 1e-2
    for pair in harmonic_pairs[:3]:
        out = cn_step(pair.state, harmonic_H, dt)
        a = harmonic_H.active
        mult = out.values[a] / pair.state.values[a]
        mask = np.abs(pair.state.values[a]) > 1e-3
        assert np.max(np.abs(mult[mask] - cayley_phase(pair.energy, dt))) < 1e-10
    # the Cayley multiplier matches exp(-i E dt) to third order
    gaps = [abs(cayley_phase(2.0, d) - np.exp(-2j * d)) for d in (1e-2, 5e-3)]
    assert 7.0 < gaps[0] / gaps[1] < 9.0


def test_free_packet_spreading():
    grid = Grid1D.centered(20.0, 4001)
    psi = gaussian_packet(grid, 0.0, 1.0)
    trace = propagate(psi, build_hamiltonian(grid, Potential.free()), 1e-3, 2000, 2000)
    assert abs(position_spread(trace.final_state) - math.sqrt(2)) < 1e-3


@settings(max_examples=15, deadline=None)
@given(
    kind=st.sampled_from(["free", "harmonic", "quartic", "linear"]),
    c=st.floats(0.1, 2.0),
    dt=st.floats(1e-4, 0.1),
    k0=st.floats(-2, 2),
)
def test_cn_step_unitary_and_reversible(kind, c, dt, k0):
    grid = Grid1D.centered(10.0, 400)
    pot = Potential.free() if kind == "free" else getattr(Potential, kind)(c)
    H = build_hamiltonian(grid, pot)
    packet = gaussian_packet(grid, 0.5, 1.0, k0).values.copy()
    packet[[0, -1]] = 0.0  # wall nodes carry no amplitude under hard walls
    psi = WaveFunction(grid, packet)
    fwd = cn_step(psi, H, dt)
    assert abs(fwd.norm() - psi.norm()) < 1e-12
    back = cn_step(fwd, H, -dt)
    assert np.max(np.abs(back.values - psi.values)) < 1e-12


def test_periodic_plane_wave_is_stationary():
    k = 2.0
    grid = Grid1D.periodic(2 * math.pi / k, 256)
    H = build_hamiltonian(grid, Potential.free(), periodic=True)
    psi = WaveFunction(grid, np.exp(1j * k * grid.x))
    out = cn_step(psi, H, 1e-2)
    ratio = out.values / psi.values
    assert np.max(np.abs(ratio - ratio[0])) < 1e-12
    assert abs(abs(ratio[0]) - 1) < 1e-14


def test_propagate_zero_steps(harmonic_grid, harmonic_H):
    psi = gaussian_packet(harmonic_grid, 1.0, 0.7)
    trace = propagate(psi, harmonic_H, 1e-3, 0)
    assert len(trace) == 1 and trace.times[0] == 0.0
    assert np.array_equal(trace.final_state.values, psi.values)


def test_propagate_records_and_coherent_return(harmonic_grid, harmonic_H, coherent_sigma):
    psi = gaussian_packet(harmonic_grid, 1.0, coherent_sigma)
    steps = int(round(2 * math.pi / 1e-3))
    trace = propagate(psi, harmonic_H, 1e-3, steps, 10)
    lengths = {len(a) for a in (trace.times, trace.norms, trace.x_exp, trace.p_exp, trace.gradU_exp)}
    assert lengths == {steps // 10 + 1}
    assert abs(trace.x_exp[-1] - 1.0) < 1e-3
    assert np.max(np.abs(trace.norms - trace.norms[0])) < 1e-10


def test_long_propagation_keeps_norm(harmonic_grid):
    H = build_hamiltonian(harmonic_grid, Potential.quartic(0.25))
    trace = propagate(gaussian_packet(harmonic_grid, 1.0, 0.7, 1.0), H, 1e-3, 10_000, 100)
    assert np.max(np.abs(trace.norms - 1)) < 1e-10


def test_expectation_energy_of_eigenstate(harmonic_H, harmonic_pairs):
    for p in harmonic_pairs:
        assert abs(expectation(p.state, "energy", hamiltonian=harmonic_H) - p.energy) < 1e-8 * p.energy


def test_expectation_errors(harmonic_grid):
    psi = gaussian_packet(harmonic_grid, 0.0, 1.0)
    with pytest.raises(NormalizationError):
        expectation(psi.with_values(2 * psi.values), "position")
    with pytest.raises(ValueError):
        expectation(psi, "spin")
    with pytest.raises(ValueError):
        expectation(psi, "potential_gradient")
