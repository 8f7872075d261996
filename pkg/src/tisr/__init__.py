"""Two atoms in separated harmonic traps: spectra, trap-induced resonances and their companions.

Units throughout: hbar = mu = omega = 1, energies in hbar*omega and lengths
in z0 = sqrt(hbar / (mu omega)), mu the reduced mass.
"""

__version__ = "0.1.0"

from .basis import BasisSpec, build_basis, busch_energies, busch_states, busch_wavefunction
from .scattering import ConstantScatteringLength, StepWell
from .spectrum import SeparationGrid, SpectrumResult, spectrum_sweep

__all__ = [
    "BasisSpec",
    "ConstantScatteringLength",
    "SeparationGrid",
    "SpectrumResult",
    "StepWell",
    "build_basis",
    "busch_energies",
    "busch_states",
    "busch_wavefunction",
    "spectrum_sweep",
]
