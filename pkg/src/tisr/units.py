"""Trap units for the relative motion of two atoms of equal mass.

Internally hbar = mu = omega = 1, so energies are in hbar*omega and lengths in
``z0 = sqrt(hbar / (mu * omega))`` with reduced mass ``mu = m / 2``.

The centre-of-mass coordinate separates off as an isotropic oscillator of
mass 2m and plays no role in any result computed by this package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

HBAR = 1.054_571_817e-34  # J s
BOHR_RADIUS = 5.291_772_109_03e-11  # m
ATOMIC_MASS_UNIT = 1.660_539_066_60e-27  # kg


@dataclass(frozen=True)
class TrapUnits:
    mu: float  # kg
    omega: float  # rad / s

    @classmethod
    def for_atoms(cls, atom_mass: float, omega: float) -> "TrapUnits":
        return cls(mu=atom_mass / 2.0, omega=omega)

    @property
    def atom_mass(self) -> float:
        return 2.0 * self.mu

    @property
    def hbar_omega(self) -> float:
        return HBAR * self.omega

    @property
    def z0(self) -> float:
        return math.sqrt(HBAR / (self.mu * self.omega))

    def length_to_natural(self, meters: float) -> float:
        return meters / self.z0

    def length_from_natural(self, z: float) -> float:
        return z * self.z0

    def energy_to_natural(self, joules: float) -> float:
        return joules / self.hbar_omega

    def energy_from_natural(self, e: float) -> float:
        return e * self.hbar_omega

    def time_from_natural(self, t: float) -> float:
        """Convert a time in units of 1/omega to seconds."""
        return t / self.omega

    def as_dict(self) -> dict:
        return {"mu_kg": self.mu, "omega_rad_s": self.omega,
                "z0_m": self.z0, "hbar_omega_J": self.hbar_omega}
