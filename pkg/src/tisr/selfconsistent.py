"""Self-consistent spectrum with an energy-dependent scattering length.

A level at total energy ``E`` and separation ``dz`` sees the kinetic energy
``E_K = E - dz^2/2`` at the interatomic origin, so the pseudopotential
strength must be ``c(E) = 1 / a_eff(E_K)``.  Branch ``k`` is a root of::

    g(E) = E_k(c(E), dz) - E

where ``E_k(c, dz)`` is the k-th fixed-c level.  Roots are bracketed by
scanning ``E`` on a lattice of fixed step inside a window around the
fixed-a(0) level and refined with Brent's method.  All roots in the window
are kept; the one reported follows the branch by continuity.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .basis import BasisSpec
from .numerics import ConvergenceError, solve_bracketed_root
from .scattering import ScatteringModel
from .spectrum import SeparationGrid, SpectrumResult, levels, parallel_map

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-8
ROOT_TOL = 1e-13


class NoRootError(ConvergenceError):
    """No sign change of g(E) inside the search window."""

    def __init__(self, message: str, scan: list[tuple[float, float]]):
        super().__init__(message)
        self.scan = scan


@dataclass(frozen=True)
class SelfConsistentSolution:
    branch: int
    dz: float
    E: float
    a_eff: float
    E_K: float
    residual: float
    iterations: int
    roots: tuple[float, ...] = field(default=())

    @property
    def multiple(self) -> bool:
        return len(self.roots) > 1

    def as_dict(self) -> dict:
        return {"branch": self.branch, "dz": self.dz, "E": self.E, "a_eff": self.a_eff,
                "E_K": self.E_K, "residual": self.residual, "iterations": self.iterations,
                "roots": list(self.roots)}


def _strength(model: ScatteringModel, E: float, dz: float) -> float:
    return model.inverse_aeff(E - 0.5 * dz * dz)


def _levels_raw(model, E, dz, spec, count):
    return levels(_strength(model, E, dz), dz, spec, count)


@lru_cache(maxsize=65536)
def _levels_cached(model, E, dz, spec, count):
    out = _levels_raw(model, E, dz, spec, count)
    out.setflags(write=False)
    return out


def branch_levels(model: ScatteringModel, E: float, dz: float, spec: BasisSpec, count: int) -> np.ndarray:
    """Lowest ``count`` fixed-c levels at ``c = 1/a_eff(E - dz^2/2)``."""
    try:
        return _levels_cached(model, float(E), float(dz), spec, count)
    except TypeError:  # unhashable model
        return _levels_raw(model, E, dz, spec, count)


def residual(model: ScatteringModel, E: float, dz: float, branch: int, spec: BasisSpec) -> float:
    """g(E) = E_branch(c(E), dz) - E."""
    return float(branch_levels(model, E, dz, spec, branch + 1)[branch]) - E


def _scan_lattice(lo: float, hi: float, step: float, floor_E: float) -> np.ndarray:
    i0 = math.floor(lo / step)
    i1 = math.ceil(hi / step)
    pts = np.arange(i0, i1 + 1) * step
    pts = pts[pts > floor_E]
    return pts


def seed_levels(model: ScatteringModel, dz: float, spec: BasisSpec, count: int) -> np.ndarray:
    """Fixed-a levels with a = a_eff(0): the windows for the root scan."""
    return levels(model.inverse_aeff(0.0), dz, spec, count)


def all_roots(model: ScatteringModel, dz: float, branch: int, spec: BasisSpec = BasisSpec(), *,
              center: float, window: float = 2.0, step: float = 0.05,
              ) -> tuple[list[tuple[float, float, int]], list[tuple[float, float]]]:
    """Every bracketed root of g in ``[center - window, center + window]``.

    Returns ``(roots, scan)`` with roots as ``(E, |g(E)|, evaluations)``.
    Roots whose residual exceeds the tolerance (jumps of g where a_eff
    changes sign through zero) are discarded.
    """
    floor_E = model.min_energy() + 0.5 * dz * dz
    Es = _scan_lattice(center - window, center + window, step, floor_E)
    scan = [(float(E), residual(model, E, dz, branch, spec)) for E in Es]
    roots = []
    for (E0, g0), (E1, g1) in zip(scan[:-1], scan[1:]):
        if g0 == 0.0:
            roots.append((E0, 0.0, 0))
            continue
        if g0 * g1 > 0 or g1 == 0.0:
            continue
        calls = [0]

        def g(E):
            calls[0] += 1
            return residual(model, E, dz, branch, spec)

        E = solve_bracketed_root(g, E0, E1, ROOT_TOL)
        r = abs(g(E))
        if r < RESIDUAL_TOL:
            roots.append((E, r, calls[0]))
    if scan and scan[-1][1] == 0.0:
        roots.append((scan[-1][0], 0.0, 0))
    return roots, scan


def self_consistent_energy(model: ScatteringModel, dz: float, branch: int,
                           spec: BasisSpec = BasisSpec(), seed: float | None = None, *,
                           window: float = 2.0, step: float = 0.05,
                           prefer: float | None = None) -> SelfConsistentSolution:
    """Self-consistent level of ``branch`` at separation ``dz``.

    Parameters
    ----------
    seed
        Centre of the scan window.  Defaults to the fixed-a level with
        ``a = a_eff(0)``.
    prefer
        Energy the chosen root should be closest to (the previous grid
        point of a sweep).  Defaults to ``seed``.

    Raises
    ------
    NoRootError
        If g(E) has no sign change in the window.
    """
    if dz < 0:
        raise ValueError("dz must be >= 0")
    if seed is None:
        seed = float(seed_levels(model, dz, spec, branch + 1)[branch])
    roots, scan = all_roots(model, dz, branch, spec, center=seed, window=window, step=step)
    if not roots:
        raise NoRootError(
            f"no self-consistent root for branch {branch} at dz={dz:g} in "
            f"[{seed - window:g}, {seed + window:g}]", scan)
    target = seed if prefer is None else prefer
    E, r, calls = min(roots, key=lambda t: abs(t[0] - target))
    if len(roots) > 1:
        log.warning("branch %d at dz=%g: %d self-consistent roots %s", branch, dz, len(roots),
                    [round(x[0], 6) for x in roots])
    E_K = E - 0.5 * dz * dz
    return SelfConsistentSolution(branch, float(dz), float(E), float(model.aeff(E_K)), float(E_K),
                                  float(r), calls, tuple(float(x[0]) for x in roots))


def sweep_self_consistent(model: ScatteringModel, grid: SeparationGrid,
                          spec: BasisSpec = BasisSpec(), n_branches: int = 2, *,
                          window: float = 2.0, step: float = 0.05,
                          threads: int | None = None, model_tag: str = "self-consistent") -> SpectrumResult:
    """Self-consistent levels of the lowest ``n_branches`` branches on ``grid``.

    Root sets are computed independently per separation (in parallel), then
    each branch picks, point by point, the root closest to its previous
    value.  Missing roots become NaN with an entry in ``flags``.
    """
    dz = grid.as_array()

    def roots_at(z):
        seeds = seed_levels(model, z, spec, n_branches)
        per_branch = []
        for k in range(n_branches):
            roots, _ = all_roots(model, z, k, spec, center=float(seeds[k]), window=window, step=step)
            per_branch.append((float(seeds[k]), roots))
        return per_branch

    found = parallel_map(roots_at, dz, threads)
    energies = np.full((len(dz), n_branches), np.nan)
    interaction = np.full_like(energies, np.nan)
    solutions: list[list[SelfConsistentSolution | None]] = []
    flags = []
    previous = [None] * n_branches
    for i, z in enumerate(dz):
        row = []
        for k in range(n_branches):
            seed, roots = found[i][k]
            if not roots:
                flags.append({"dz": float(z), "branch": k, "flag": "no-root"})
                row.append(None)
                continue
            target = seed if previous[k] is None else previous[k]
            E, r, calls = min(roots, key=lambda t: abs(t[0] - target))
            if len(roots) > 1:
                flags.append({"dz": float(z), "branch": k, "flag": "multiple-roots",
                              "roots": [float(x[0]) for x in roots]})
            E_K = E - 0.5 * z * z
            sol = SelfConsistentSolution(k, float(z), float(E), float(model.aeff(E_K)), float(E_K),
                                         float(r), calls, tuple(float(x[0]) for x in roots))
            row.append(sol)
            energies[i, k] = E
            interaction[i, k] = sol.a_eff
            previous[k] = E
        solutions.append(row)
    residuals = [s.residual for row in solutions for s in row if s is not None]
    result = SpectrumResult(
        model=model_tag,
        params=model.describe(),
        dz=dz,
        energies=energies,
        interaction=interaction,
        converged=np.array([all(s is not None for s in row) for row in solutions]),
        diagnostics={"spec": spec.as_dict(), "window": window, "step": step,
                     "max_residual": max(residuals) if residuals else math.nan},
        flags=flags,
    )
    result.diagnostics["max_slope"] = result.max_slope()
    result.solutions = solutions
    return result
