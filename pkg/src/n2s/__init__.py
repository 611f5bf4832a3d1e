"""Newtonian mechanics to wave mechanics, one checkable step at a time."""

__version__ = "0.1.0"

from .dynamics import ParticleState, Potential, Trajectory, force_at, integrate, total_energy, verlet_step
from .grid import Grid1D, WaveFunction
from .matterwave import (
    DensitySpec,
    MatterWaveFrame,
    apply_momentum_operator,
    constant_of_motion,
    de_broglie_wavelength,
    momentum_expectation,
    plane_wave,
    xi_of,
)
from .schrodinger import (
    EigenPair,
    HamiltonianTridiag,
    PropagationTrace,
    build_hamiltonian,
    cn_step,
    eigensolve,
    expectation,
    gaussian_packet,
    propagate,
)
from .verify import VerificationResult, classical_quantum_compare, ehrenfest_residual, omega_halving_check, run_all
from .wavefield import (
    DispersionBundle,
    WaveAnsatz,
    dispersion_of,
    free_tise_residual,
    ibp_residual,
    wave_residual,
)
