"""s-wave scattering data for model interatomic potentials.

Units: hbar = mu = 1, energies in hbar*omega, lengths in z0 (the trap units of
:mod:`tisr.units`).  Relative kinetic energy is ``E_K = k**2 / 2`` above
threshold and ``E_K = -kappa**2 / 2`` below.

The effective scattering length ``a_eff(E_K) = -tan(delta_0) / k`` of a step
well has the closed form::

    a_eff = (cos(qR) S(k) - Sq cos(kR)) / (cos(qR) cos(kR) + 2 E_K S(k) Sq)

with ``S(k) = sin(kR)/k`` and ``Sq = sin(qR)/q``.  Both ``cos(kR)`` and
``S(k)`` are entire functions of ``E_K``; substituting ``k -> i kappa`` turns
them into ``cosh(kappa R)`` and ``sinh(kappa R)/kappa``, which is the real
continuation used below threshold.  At a bound state,
``q cot(qR) = -kappa`` and the expression collapses to ``1/kappa``.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .numerics import solve_bracketed_root

VALIDITY_RADIUS = 0.5


class DomainError(ValueError):
    """Energy outside the range where the model is defined."""


@dataclass(frozen=True)
class BoundState:
    """s-wave bound state at ``E_b = -kappa_b**2 / 2``."""

    E_b: float
    kappa_b: float


@dataclass(frozen=True)
class EffectiveScatteringLength:
    E_K: float
    a_eff: float
    k: float | None = None
    kappa: float | None = None

    @property
    def pole_flag(self) -> bool:
        return math.isinf(self.a_eff)


def _cos_sinc(two_e: float, R: float) -> tuple[float, float]:
    """(cos(sqrt(two_e) R), sin(sqrt(two_e) R)/sqrt(two_e)), continued to two_e < 0."""
    if two_e > 0:
        k = math.sqrt(two_e)
        x = k * R
        return math.cos(x), (math.sin(x) / k if x > 1e-8 else R * (1.0 - x * x / 6.0))
    if two_e < 0:
        kap = math.sqrt(-two_e)
        x = kap * R
        return math.cosh(x), (math.sinh(x) / kap if x > 1e-8 else R * (1.0 + x * x / 6.0))
    return 1.0, R


class ScatteringModel(ABC):
    """Interface for anything that supplies an energy-dependent scattering length."""

    @abstractmethod
    def aeff(self, E_K: float) -> float:
        """Effective scattering length; ``+-inf`` at a pole."""

    def inverse_aeff(self, E_K: float) -> float:
        """``1 / a_eff``; smooth through the poles of ``a_eff``."""
        a = self.aeff(E_K)
        if a == 0.0:
            return math.inf
        return 0.0 if math.isinf(a) else 1.0 / a

    @abstractmethod
    def phase_shift(self, E_K: float) -> float:
        """s-wave phase shift for ``E_K > 0``."""

    @abstractmethod
    def bound_states(self) -> list[BoundState]:
        """All s-wave bound states, deepest first."""

    def min_energy(self) -> float:
        """Lower edge of the energy domain (exclusive)."""
        return -math.inf

    def describe(self) -> dict:
        return {}


@dataclass(frozen=True)
class StepWell(ScatteringModel):
    """Attractive spherical step: ``V(r) = -V0`` for ``r < R``, zero outside.

    ``V0`` in hbar*omega (positive is attractive), ``R`` in z0.
    """

    V0: float
    R: float

    def __post_init__(self):
        if self.V0 < 0:
            raise ValueError(f"V0 must be >= 0, got {self.V0}")
        if not self.R > 0:
            raise ValueError(f"R must be > 0, got {self.R}")

    @property
    def valid(self) -> bool:
        """Pseudopotential treatment is trusted only for ranges well below the trap size."""
        return self.R <= VALIDITY_RADIUS

    def q(self, E_K: float) -> float:
        """Interior wavenumber sqrt(2 (E_K + V0))."""
        return math.sqrt(2.0 * (E_K + self.V0))

    def min_energy(self) -> float:
        return -self.V0 if self.V0 > 0 else -math.inf

    def _check(self, E_K: float) -> None:
        if self.V0 > 0 and not E_K > -self.V0:
            raise DomainError(f"E_K={E_K:g} must exceed -V0={-self.V0:g}")

    def _parts(self, E_K: float) -> tuple[float, float]:
        cq, sq = _cos_sinc(2.0 * (E_K + self.V0), self.R)
        ck, sk = _cos_sinc(2.0 * E_K, self.R)
        num = cq * sk - sq * ck
        den = cq * ck + 2.0 * E_K * sk * sq
        return num, den

    def aeff(self, E_K: float) -> float:
        if self.V0 == 0:
            return 0.0
        self._check(E_K)
        num, den = self._parts(E_K)
        if den == 0.0:
            return math.copysign(math.inf, num)
        return num / den

    def inverse_aeff(self, E_K: float) -> float:
        if self.V0 == 0:
            return math.inf
        self._check(E_K)
        num, den = self._parts(E_K)
        if num == 0.0:
            return math.copysign(math.inf, den)
        return den / num

    def phase_shift(self, E_K: float) -> float:
        """delta_0 = arctan(k tan(qR) / q) - kR on the continuous branch.

        The arctan jumps by pi whenever ``cos(qR)`` changes sign; adding
        ``pi * floor(qR/pi + 1/2)`` removes those jumps, so the branch used
        here is continuous in ``E_K`` and obeys Levinson's theorem
        (``delta_0 -> pi * n_bound`` as ``E_K -> 0+``).
        """
        if not E_K > 0:
            raise DomainError(f"phase_shift needs E_K > 0, got {E_K:g}; use aeff below threshold")
        if self.V0 == 0:
            return 0.0
        k = math.sqrt(2.0 * E_K)
        q = self.q(E_K)
        qR = q * self.R
        cq = math.cos(qR)
        ratio = k * math.sin(qR) / q
        principal = math.atan(ratio / cq) if cq != 0.0 else math.copysign(math.pi / 2, ratio)
        return principal + math.pi * math.floor(qR / math.pi + 0.5) - k * self.R

    def zero_energy_length(self) -> float:
        """a(0) = R (1 - tan(q0 R) / (q0 R))."""
        return self.aeff(0.0)

    def bound_states(self) -> list[BoundState]:
        X0 = math.sqrt(2.0 * self.V0) * self.R
        states = []
        m = 0
        # q cot(qR) = -kappa  <=>  x cos x + sqrt(X0^2 - x^2) sin x = 0,  x = qR
        while math.pi / 2 + m * math.pi < X0:
            lo = math.pi / 2 + m * math.pi
            hi = min(math.pi * (m + 1), X0)

            def F(x):
                return x * math.cos(x) + math.sqrt(max(X0 * X0 - x * x, 0.0)) * math.sin(x)

            x = solve_bracketed_root(F, lo, hi, tol=1e-15)
            kappa = math.sqrt(max(X0 * X0 - x * x, 0.0)) / self.R
            states.append(BoundState(-0.5 * kappa * kappa, kappa))
            m += 1
        return sorted(states, key=lambda s: s.E_b)

    def describe(self) -> dict:
        return {"kind": "step-well", "V0": self.V0, "R": self.R}


@dataclass(frozen=True)
class ConstantScatteringLength(ScatteringModel):
    """Energy-independent pseudopotential, ``a_eff(E_K) = a``.

    ``a = 0`` is the non-interacting limit and ``a = inf`` unitarity.
    """

    a: float

    def aeff(self, E_K: float) -> float:
        return self.a

    def inverse_aeff(self, E_K: float) -> float:
        if self.a == 0:
            return math.inf
        return 0.0 if math.isinf(self.a) else 1.0 / self.a

    def phase_shift(self, E_K: float) -> float:
        if not E_K > 0:
            raise DomainError(f"phase_shift needs E_K > 0, got {E_K:g}")
        return -math.atan(math.sqrt(2.0 * E_K) * self.a)

    def bound_states(self) -> list[BoundState]:
        if 0 < self.a < math.inf:
            return [BoundState(-0.5 / self.a**2, 1.0 / self.a)]
        return []

    def describe(self) -> dict:
        return {"kind": "constant", "a": self.a}


def phase_shift(model: ScatteringModel, E_K: float) -> float:
    return model.phase_shift(E_K)


def aeff(model: ScatteringModel, E_K: float) -> float:
    """Energy-dependent scattering length for either sign of ``E_K``."""
    return model.aeff(E_K)


def effective_scattering_length(model: ScatteringModel, E_K: float) -> EffectiveScatteringLength:
    a = model.aeff(E_K)
    if E_K > 0:
        return EffectiveScatteringLength(E_K, a, k=math.sqrt(2.0 * E_K))
    if E_K < 0:
        return EffectiveScatteringLength(E_K, a, kappa=math.sqrt(-2.0 * E_K))
    return EffectiveScatteringLength(E_K, a, k=0.0)


def square_well_bound_states(well: StepWell) -> list[BoundState]:
    return well.bound_states()


def aeff_table(model: ScatteringModel, energies) -> list[EffectiveScatteringLength]:
    return [effective_scattering_length(model, float(E)) for E in np.asarray(energies, float)]
