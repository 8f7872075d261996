"""Characterisation of the trap-induced resonance and simple companion models."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg
from scipy.optimize import minimize_scalar
from scipy.special import eval_hermite, gammaln, spherical_in

from .basis import BasisSpec, busch_states, busch_wavefunction, inverse_length, radial_grid
from .spectrum import (
    CrossingInfo,
    SeparationGrid,
    SpectrumResult,
    gap_minimum,
    grid_gap_minima,
    spectrum_sweep,
)

SINGULAR_OVERLAP = 1e-10


def estimate_resonance_dz(a: float) -> float:
    """Separation where molecular energy plus trap offset meets the trap ground level: sqrt(3 + 1/a^2)."""
    if not a > 0:
        raise ValueError(f"the estimate needs a > 0, got {a}")
    return math.sqrt(3.0 + (0.0 if math.isinf(a) else 1.0 / (a * a)))


def locate_avoided_crossing(result: SpectrumResult, lower: int = 0, *, spec: BasisSpec | None = None,
                            xtol: float = 1e-6) -> CrossingInfo | None:
    """Lowest avoided crossing between branches ``lower`` and ``lower + 1``.

    For a fixed-a result the grid minimum is refined by re-diagonalising
    (``spec`` defaults to the one recorded in the result).  Other models are
    refined by a parabola through the three grid points around the minimum.
    Returns ``None`` when the gap has no qualifying interior minimum.
    """
    if lower + 1 >= result.n_branches:
        raise ValueError("branch pair outside the result")
    idx = grid_gap_minima(result.dz, result.energies, lower)
    if not idx:
        return None
    i = idx[0]
    lo, hi = float(result.dz[i - 1]), float(result.dz[i + 1])
    if result.model in ("fixed-a", "constant-a") and "c" in result.params:
        if spec is None:
            spec = BasisSpec(**result.diagnostics["spec"])
        return gap_minimum(result.params["c"], spec, lower, lo, hi, xtol=xtol)
    g = result.gaps(lower)[i - 1:i + 2]
    z = result.dz[i - 1:i + 2]
    coef = np.polyfit(z, g, 2)
    if coef[0] <= 0:
        return CrossingInfo(float(result.dz[i]), float(g[1]), (lower, lower + 1))
    zm = float(np.clip(-coef[1] / (2 * coef[0]), lo, hi))
    return CrossingInfo(zm, float(np.polyval(coef, zm)), (lower, lower + 1), float(2 * coef[0]))


def find_crossing(a: float, spec: BasisSpec = BasisSpec(), grid: SeparationGrid | None = None,
                  lower: int = 0, *, xtol: float = 1e-6) -> CrossingInfo | None:
    """Sweep at fixed ``a`` and refine the lowest crossing of the pair (lower, lower + 1)."""
    if grid is None:
        top = estimate_resonance_dz(a) + 1.5 if a > 0 else 3.0
        grid = SeparationGrid.from_range(0.0, round(top, 2), 0.02)
    res = spectrum_sweep(a, grid, spec, max(lower + 2, 2), check="none")
    return locate_avoided_crossing(res, lower, spec=spec, xtol=xtol)


# --------------------------------------------------------------------------
# Two-state variational model
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class VariationalResult:
    dz: float
    levels: tuple[float, float]
    overlap: float
    singular: bool

    @property
    def gap(self) -> float:
        return self.levels[1] - self.levels[0]


@lru_cache(maxsize=64)
def _bound_table(a: float, order: int):
    state = busch_states(inverse_length(a), 1)[0]
    r, w = radial_grid(order)
    return state.E, r, w, busch_wavefunction(state, r)


def _displaced_gaussian_moments(r: np.ndarray, dz: float) -> tuple[np.ndarray, np.ndarray]:
    """Angular integrals of the displaced trap ground state and of cos(theta) times it.

    phi_d = pi^{-3/4} exp(-|r - dz z|^2 / 2); returns, per radius,
    int phi_d dOmega and int cos(theta) phi_d dOmega.
    """
    pref = 4.0 * math.pi * math.pi ** -0.75
    x = dz * r
    em = np.exp(-0.5 * (r - dz) ** 2)
    ep = np.exp(-0.5 * (r + dz) ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        s0 = np.where(x > 1e-3, 0.5 * (em - ep) / x, np.exp(-0.5 * (r * r + dz * dz)) * (1 + x * x / 6))
        large = 0.5 * ((x - 1) * em + (x + 1) * ep) / (x * x)
        small = np.exp(-0.5 * (r * r + dz * dz)) * spherical_in(1, x)
        s1 = np.where(x > 1.0, large, small)
    return pref * s0, pref * s1


def variational_gap(a: float, dz: float, *, order: int = 24) -> VariationalResult:
    """Two-state Rayleigh-Ritz model in {bound s-wave state at the origin, displaced trap ground state}.

    With the bound state ``b`` (energy ``E_b``) and the displaced Gaussian
    ``d``::

        H_bb = E_b + dz^2/2,  H_dd = 3/2,  H_db = (E_b + dz^2/2) S - dz <d|z|b>

    where ``S = <d|b>``.  ``H_dd`` is the free value because the contact
    interaction has no quadratic-form contribution from a regular function.
    """
    if not a > 0:
        raise ValueError("variational model needs a > 0 (a bound state)")
    E_b, r, w, b = _bound_table(float(a), order)
    m0, m1 = _displaced_gaussian_moments(r, dz)
    S = float(np.sum(w * r * r * m0 * b))
    Z = float(np.sum(w * r**3 * m1 * b))
    e_bb = E_b + 0.5 * dz * dz
    h_db = e_bb * S - dz * Z
    H = np.array([[e_bb, h_db], [h_db, 1.5]])
    O = np.array([[1.0, S], [S, 1.0]])
    singular = 1.0 - S * S < SINGULAR_OVERLAP
    if singular:
        vals = np.sort(np.array([e_bb, 1.5]))
    else:
        vals = linalg.eigh(H, O, eigvals_only=True)
    return VariationalResult(float(dz), (float(vals[0]), float(vals[1])), S, bool(singular))


def variational_minimum(a: float, lo: float | None = None, hi: float | None = None) -> tuple[float, float]:
    """(dz, gap) at the minimum of the variational gap near the resonance estimate."""
    z0 = estimate_resonance_dz(a)
    lo = max(0.0, z0 - 1.0) if lo is None else lo
    hi = z0 + 1.0 if hi is None else hi
    opt = minimize_scalar(lambda z: variational_gap(a, z).gap, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-6})
    return float(opt.x), float(opt.fun)


# --------------------------------------------------------------------------
# First-order perturbation theory
# --------------------------------------------------------------------------

def _ho1d_sq(n: int, x: float) -> float:
    # |phi_n(x)|^2 for the 1D oscillator
    lognorm = -(n * math.log(2.0) + gammaln(n + 1.0) + 0.5 * math.log(math.pi))
    return math.exp(lognorm - x * x) * float(eval_hermite(n, x)) ** 2


def perturbative_shift(a: float, dz: float) -> float:
    """First-order shift of the trap ground level, 2 pi a |phi_0(origin)|^2 = 2a/sqrt(pi) exp(-dz^2)."""
    if math.isinf(a):
        raise ValueError("first-order theory needs finite a")
    return 2.0 * a / math.sqrt(math.pi) * math.exp(-dz * dz)


def shell_shift(a: float, dz: float, N: int) -> float:
    """First-order shift of shell ``N``.

    The contact term is rank one inside a degenerate shell, so exactly one
    (m = 0) combination moves, by ``2 pi a sum |psi(origin)|^2`` over the
    shell's Cartesian states.
    """
    if N < 0:
        raise ValueError("N must be >= 0")
    total = 0.0
    for nz in range(N + 1):
        transverse = 0.0
        for nx in range(N - nz + 1):
            transverse += _ho1d_sq(nx, 0.0) * _ho1d_sq(N - nz - nx, 0.0)
        total += transverse * _ho1d_sq(nz, dz)
    return 2.0 * math.pi * a * total


def perturbative_levels(a: float, dz: float, shells: int = 3) -> np.ndarray:
    """N + 3/2 + first-order shift of the interacting combination, N = 0..shells-1."""
    return np.array([N + 1.5 + shell_shift(a, dz, N) for N in range(shells)])


# --------------------------------------------------------------------------
# Gate sketch
# --------------------------------------------------------------------------

def gate_phase_time(gap: float) -> tuple[float, float]:
    """Full Rabi cycle through the resonance: duration 2 pi / gap (units 1/omega) and phase pi."""
    if not gap > 0:
        raise ValueError(f"gap must be positive, got {gap}")
    return 2.0 * math.pi / gap, math.pi


def return_amplitude(gap: float, t: float) -> complex:
    """<atoms| exp(-i H t) |atoms> for the resonant pair split by ``gap``."""
    H = 0.5 * gap * np.array([[0.0, 1.0], [1.0, 0.0]])
    return complex(linalg.expm(-1j * H * t)[0, 0])


@dataclass(frozen=True)
class ResonanceRow:
    a: float
    dz_res_estimate: float
    dz_res_located: float
    gap: float
    gap_variational: float

    def as_tuple(self) -> tuple:
        return (self.a, self.dz_res_estimate, self.dz_res_located, self.gap, self.gap_variational)


def resonance_table(a_values, spec: BasisSpec = BasisSpec()) -> list[ResonanceRow]:
    """Estimated and located lowest crossing, with full and variational gaps, for each a > 0."""
    rows = []
    for a in a_values:
        est = estimate_resonance_dz(a)
        info = find_crossing(a, spec)
        _, g_var = variational_minimum(a)
        rows.append(ResonanceRow(float(a), est, math.nan if info is None else info.dz_res,
                                 math.nan if info is None else info.gap, g_var))
    return rows


def _m0_shell_counts(n_levels: int) -> list[int]:
    # shell index of each m = 0 level in ascending order: shell N holds floor(N/2) + 1 of them
    out, N = [], 0
    while len(out) < n_levels:
        out.extend([N] * (N // 2 + 1))
        N += 1
    return out[:n_levels]


def perturbative_branches(a: float, dz: float, n_branches: int) -> np.ndarray:
    """First-order m = 0 levels in sorted order.

    In each shell only one combination is shifted; it sits at the bottom of
    the shell for a < 0 and at the top for a > 0.
    """
    shells = _m0_shell_counts(n_branches + 8)
    levels = []
    for N in sorted(set(shells)):
        count = shells.count(N)
        levels.append(N + 1.5 + shell_shift(a, dz, N))
        levels.extend([N + 1.5] * (count - 1))
    return np.sort(np.array(levels))[:n_branches]
