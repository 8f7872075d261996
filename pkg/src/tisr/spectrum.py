"""Spectrum of the relative motion versus trap separation at fixed scattering length.

With the trap centred at ``dz`` on the z axis the relative Hamiltonian is
``H0 + dz^2/2 - dz r cos(theta)``, so in the dz = 0 eigenbasis

    H(dz) = diag(E_i) + dz^2/2 - dz W.

Branches are labelled adiabatically (sorted order at each dz).
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .basis import BasisSpec, build_basis, inverse_length, length_from_inverse
from .numerics import sym_eig

log = logging.getLogger(__name__)

CONVERGENCE_TOL = 1e-3
ENLARGE_STEP = 4
CROSSING_CONTRAST = 1.5


def worker_count() -> int:
    """Threads for sweeps: ``TISR_THREADS`` if set, else all cores."""
    raw = os.environ.get("TISR_THREADS")
    if raw:
        n = int(raw)
        if n < 1:
            raise ValueError(f"TISR_THREADS must be >= 1, got {raw!r}")
        return n
    return os.cpu_count() or 1


def parallel_map(fn, items, threads: int | None = None) -> list:
    """Ordered map over ``items``; results do not depend on the thread count."""
    items = list(items)
    n = threads or worker_count()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class SeparationGrid:
    """Ascending, non-negative trap separations in units of z0."""

    values: tuple[float, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("grid needs at least one separation")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("separations must be finite and >= 0")
        if np.any(np.diff(v) <= 0):
            raise ValueError("separations must be strictly ascending")
        object.__setattr__(self, "values", tuple(float(x) for x in v))

    @classmethod
    def from_range(cls, start: float, stop: float, step: float) -> "SeparationGrid":
        """Inclusive range; ``stop`` is kept when it lies on the lattice within 1e-9 steps."""
        if step <= 0:
            raise ValueError("step must be positive")
        if stop < start:
            raise ValueError("stop must be >= start")
        n = int(math.floor((stop - start) / step + 1e-9))
        return cls(tuple(round(start + i * step, 12) for i in range(n + 1)))

    @classmethod
    def parse(cls, text: str) -> "SeparationGrid":
        """``start:stop:step``, a single value, or a comma-separated list."""
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError(f"range must be start:stop:step, got {text!r}")
            return cls.from_range(*(float(p) for p in parts))
        return cls(tuple(float(p) for p in text.split(",")))

    def __len__(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.array(self.values)


@dataclass(frozen=True)
class CrossingInfo:
    """Minimum of the gap between adjacent branches ``(lower, lower + 1)``."""

    dz_res: float
    gap: float
    branches: tuple[int, int]
    curvature: float = math.nan
    energy: float = math.nan

    def as_dict(self) -> dict:
        return {"dz_res": self.dz_res, "gap": self.gap, "branches": list(self.branches),
                "curvature": self.curvature, "energy": self.energy}


@dataclass
class SpectrumResult:
    """Branch energies on a separation grid.

    ``energies[i, k]`` is branch ``k`` at ``dz[i]`` (NaN where no solution was
    found); ``interaction[i, k]`` the scattering length used there.
    """

    model: str
    params: dict
    dz: np.ndarray
    energies: np.ndarray
    interaction: np.ndarray
    converged: np.ndarray
    diagnostics: dict = field(default_factory=dict)
    crossings: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    overlaps: list | None = None
    solutions: list | None = None

    @property
    def n_branches(self) -> int:
        return self.energies.shape[1]

    def branch(self, k: int) -> np.ndarray:
        return self.energies[:, k]

    def gaps(self, lower: int = 0) -> np.ndarray:
        return self.energies[:, lower + 1] - self.energies[:, lower]

    def max_slope(self) -> float:
        """Largest |dE/d(dz)| between neighbouring grid points (the continuity constant)."""
        if len(self.dz) < 2:
            return 0.0
        with np.errstate(invalid="ignore"):
            s = np.abs(np.diff(self.energies, axis=0)) / np.diff(self.dz)[:, None]
        return float(np.nanmax(s)) if np.any(np.isfinite(s)) else math.nan

    def rows(self):
        for i, z in enumerate(self.dz):
            for k in range(self.n_branches):
                yield (float(z), k, float(self.energies[i, k]), self.model,
                       float(self.interaction[i, k]), bool(self.converged[i]))

    def as_dict(self) -> dict:
        def clean(x):
            return None if not math.isfinite(x) else x

        return {
            "model": self.model,
            "params": self.params,
            "grid": [float(z) for z in self.dz],
            "branches": [[clean(float(e)) for e in self.energies[:, k]]
                         for k in range(self.n_branches)],
            "interaction": [[clean(float(a)) for a in self.interaction[:, k]]
                            for k in range(self.n_branches)],
            "converged": [bool(c) for c in self.converged],
            "diagnostics": self.diagnostics,
            "crossings": [c.as_dict() for c in self.crossings],
            "flags": self.flags,
        }


def hamiltonian_fixed_a(a: float, dz: float, spec: BasisSpec = BasisSpec()) -> np.ndarray:
    """Dense H(dz) in the basis built for scattering length ``a``."""
    if dz < 0:
        raise ValueError("dz must be >= 0; the spectrum is even in dz")
    return build_basis(inverse_length(a), spec).hamiltonian(dz)


def levels(c: float, dz: float, spec: BasisSpec, count: int, *, vectors: bool = False):
    """Lowest ``count`` eigenvalues (and optionally vectors) at strength ``c`` and separation ``dz``."""
    basis = build_basis(c, spec)
    count = min(count, basis.dimension)
    res = sym_eig(basis.hamiltonian(dz), count=count, vectors=vectors)
    return (res.values, res.vectors) if vectors else res.values


def gap_minimum(c: float, spec: BasisSpec, lower: int, lo: float, hi: float, *,
                xtol: float = 1e-6) -> CrossingInfo:
    """Refine a gap minimum on [lo, hi] by bounded Brent search, re-diagonalising each time."""
    def gap(z):
        e = levels(c, z, spec, lower + 2)
        return e[lower + 1] - e[lower]

    opt = minimize_scalar(gap, bounds=(lo, hi), method="bounded",
                          options={"xatol": xtol, "maxiter": 500})
    z = float(opt.x)
    g = float(opt.fun)
    # a sharp crossing is V-shaped on the scale of the gap; zoom until the gap stops dropping
    step = xtol
    while step > 1e-13:
        step *= 1e-2
        lo2, hi2 = max(lo, z - 100 * step), min(hi, z + 100 * step)
        opt = minimize_scalar(gap, bounds=(lo2, hi2), method="bounded",
                              options={"xatol": step, "maxiter": 500})
        if not opt.fun < 0.99 * g:
            if opt.fun < g:
                z, g = float(opt.x), float(opt.fun)
            break
        z, g = float(opt.x), float(opt.fun)
    h = min(1e-3, max(10 * xtol, g))
    curv = (gap(z + h) - 2 * g + gap(z - h)) / (h * h) if z - h >= 0 else math.nan
    e = levels(c, z, spec, lower + 2)
    return CrossingInfo(z, g, (lower, lower + 1), float(curv), float(0.5 * (e[lower] + e[lower + 1])))


def grid_gap_minima(dz: np.ndarray, energies: np.ndarray, lower: int,
                    contrast: float = CROSSING_CONTRAST) -> list[int]:
    """Interior gap minima between ``lower`` and ``lower+1`` that qualify as avoided crossings.

    A local minimum counts only if the gap grows to ``contrast`` times its
    minimum value somewhere on each side within the scan.  Broad dips of
    an otherwise flat gap (as for a < 0) are rejected.
    """
    g = energies[:, lower + 1] - energies[:, lower]
    out = []
    for i in range(1, len(g) - 1):
        if not (np.isfinite(g[i - 1:i + 2]).all() and g[i] < g[i - 1] and g[i] <= g[i + 1]):
            continue
        if np.nanmax(g[:i]) >= contrast * g[i] and np.nanmax(g[i + 1:]) >= contrast * g[i]:
            out.append(i)
    return out


def convergence_shift(c: float, dz: float, spec: BasisSpec, count: int,
                      step: int = ENLARGE_STEP) -> float:
    """Largest change of the lowest ``count`` levels when every cutoff grows by ``step``."""
    e0 = levels(c, dz, spec, count)
    e1 = levels(c, dz, spec.enlarged(step), count)
    return float(np.max(np.abs(e1 - e0)))


def diabatic_overlaps(vectors: list[np.ndarray]) -> list[list[int]]:
    """For each grid step, the index at the next point with the largest overlap (argmax rule)."""
    out = []
    for v0, v1 in zip(vectors[:-1], vectors[1:]):
        ov = np.abs(v0.T @ v1)
        out.append([int(j) for j in np.argmax(ov, axis=1)])
    return out


def spectrum_sweep(a: float, grid: SeparationGrid, spec: BasisSpec = BasisSpec(),
                   n_branches: int = 6, *, refine: bool = False, check: str = "last",
                   track_diabatic: bool = False, threads: int | None = None,
                   model: str = "fixed-a") -> SpectrumResult:
    """Lowest ``n_branches`` levels of H(dz) on ``grid`` at fixed scattering length ``a``.

    Parameters
    ----------
    refine
        Refine every grid-level gap minimum by re-diagonalisation.  Results
        go to ``crossings``; the grid itself is not altered.
    check
        ``"last"`` compares against a basis enlarged by 4 in every cutoff at
        the largest separation (the worst case), ``"all"`` at every point,
        ``"none"`` skips the check.
    """
    c = inverse_length(a)
    basis = build_basis(c, spec)
    if n_branches < 1 or n_branches > basis.dimension // 2:
        raise ValueError(f"n_branches must be in [1, {basis.dimension // 2}]")
    dz = grid.as_array()

    def solve(z):
        res = sym_eig(basis.hamiltonian(z), count=n_branches, vectors=track_diabatic)
        return res.values, res.vectors

    out = parallel_map(solve, dz, threads)
    energies = np.array([e for e, _ in out])
    converged = np.ones(len(dz), dtype=bool)
    diagnostics: dict = {"spec": spec.as_dict(), "convergence_tol": CONVERGENCE_TOL}
    if check != "none":
        idx = range(len(dz)) if check == "all" else [len(dz) - 1]
        shifts = parallel_map(lambda i: convergence_shift(c, dz[i], spec, n_branches), idx, threads)
        worst = max(shifts)
        diagnostics["convergence_shift"] = worst
        diagnostics["convergence_checked_at"] = [float(dz[i]) for i in idx]
        if check == "all":
            converged = np.array(shifts) <= CONVERGENCE_TOL
        else:
            converged[:] = worst <= CONVERGENCE_TOL
        if worst > CONVERGENCE_TOL:
            log.warning("basis %s not converged: enlarging moves levels by %.3g", spec, worst)

    crossings = []
    for lower in range(n_branches - 1):
        for i in grid_gap_minima(dz, energies, lower):
            if refine:
                crossings.append(gap_minimum(c, spec, lower, dz[i - 1], dz[i + 1]))
            else:
                crossings.append(CrossingInfo(float(dz[i]), float(energies[i, lower + 1] - energies[i, lower]),
                                              (lower, lower + 1),
                                              energy=float(energies[i, lower:lower + 2].mean())))
    result = SpectrumResult(
        model=model,
        params={"a": a, "c": c, "a_from_c": length_from_inverse(c)},
        dz=dz,
        energies=energies,
        interaction=np.full(energies.shape, float(a)),
        converged=converged,
        diagnostics=diagnostics,
        crossings=crossings,
    )
    diagnostics["max_slope"] = result.max_slope()
    if track_diabatic:
        result.overlaps = diabatic_overlaps([v for _, v in out])
    return result
