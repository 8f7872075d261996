"""Eigenbasis of the undisplaced trap plus a zero-range s-wave interaction.

For a contact interaction of strength ``c = 1/a`` the s-wave energies of the
isotropic oscillator solve (lengths in z0, energies in hbar*omega)::

    F(E) = 2 Gamma(3/4 - E/2) / Gamma(1/4 - E/2) = c

and the eigenfunctions are ``psi(r) = A exp(-r^2/2) U(3/4 - E/2, 3/2, r^2)``,
which behave as ``1/r`` at the origin with ``(r psi)'/(r psi) -> -c``.
States with ``l >= 1`` do not feel the interaction and are ordinary
oscillator states ``R_nl`` with energy ``2n + l + 3/2``.

The s-wave state is proportional to the oscillator Green's function at the
origin, ``G_E(r) = sum_n phi_n(0) phi_n(r) / (e_n - E)`` (``phi_n`` the l = 0
oscillator states, ``e_n = 2n + 3/2``).  Two consequences drive the fast
path used here:

* ``||G_E||^2 = -F'(E) / (2 pi)``, which fixes the normalisation;
* ``r cos(theta)`` links ``phi_n`` only to the l = 1 states with
  ``m = n`` and ``m = n - 1``, so every s <-> p dipole element is a sum of two
  terms.

The quadrature route (``method="quadrature"``) evaluates the same integrals
from the Tricomi-function wavefunctions and is kept as an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import digamma, gammaln, gammasgn, poch, rgamma

from .numerics import (
    BracketError,
    composite_rule,
    gamma_real,
    integrate,
    solve_bracketed_root,
    tricomi_u,
)

ROOT_TOL = 1e-14
CACHE_DIGITS = 10


@dataclass(frozen=True)
class BasisSpec:
    """Truncation of the basis in the m = 0 sector.

    ``n_s`` s-wave interacting states (the molecular state included) plus
    oscillator states ``n = 0..n_max`` for every ``l = 1..l_max``.
    """

    n_s: int = 20
    l_max: int = 20
    n_max: int = 20

    def __post_init__(self):
        if min(self.n_s, self.l_max, self.n_max + 1) < 1:
            raise ValueError(f"all basis counts must be >= 1: {self}")

    @property
    def dimension(self) -> int:
        return self.n_s + self.l_max * (self.n_max + 1)

    def enlarged(self, step: int = 4) -> "BasisSpec":
        return BasisSpec(self.n_s + step, self.l_max + step, self.n_max + step)

    def as_dict(self) -> dict:
        return {"n_s": self.n_s, "l_max": self.l_max, "n_max": self.n_max}


# --------------------------------------------------------------------------
# Transcendental equation
# --------------------------------------------------------------------------

def inverse_length_for_energy(E: float) -> float:
    """F(E) = 2 Gamma(3/4 - E/2) / Gamma(1/4 - E/2): the ``1/a`` that puts a level at ``E``.

    Returns ``inf`` at the free-oscillator energies ``E = 2n + 3/2``.
    """
    alpha = 0.75 - 0.5 * E
    x = alpha - 0.5
    if x > 0:
        return 2.0 * float(poch(x, 0.5))
    if alpha <= 0 and alpha == math.floor(alpha):
        return math.inf
    return 2.0 * gamma_real(alpha) * float(rgamma(x))


def _bracket_function(E: float, c: float) -> float:
    # 2/Gamma(1/4 - E/2) - c/Gamma(3/4 - E/2): entire in E, same zeros as F(E) - c
    return 2.0 * float(rgamma(0.25 - 0.5 * E)) - c * float(rgamma(0.75 - 0.5 * E))


def _minus_dF_dE(E: float) -> float:
    alpha = 0.75 - 0.5 * E
    x = alpha - 0.5
    if x > 0:
        F = 2.0 * float(poch(x, 0.5))
        return 0.5 * F * (float(digamma(alpha)) - float(digamma(x)))
    if x == math.floor(x):
        n = int(-x)
        d_rgamma = (-1) ** n * math.exp(gammaln(n + 1.0))
    else:
        d_rgamma = -float(digamma(x)) * float(rgamma(x))
    return gamma_real(alpha) * (float(digamma(alpha)) * float(rgamma(x)) + d_rgamma)


def _root(c: float, n: int) -> float:
    """The unique root of F(E) = c in (2n - 1/2, 2n + 3/2); (-inf, 3/2) for n = 0."""
    if n == 0 and c > 0:
        lo = -2.0 * c * c - 5.0
        return solve_bracketed_root(lambda E: inverse_length_for_energy(E) - c, lo, 0.5, ROOT_TOL)
    lo = 0.5 if n == 0 else 2.0 * n - 0.5
    hi = 2.0 * n + 1.5
    try:
        return solve_bracketed_root(lambda E: _bracket_function(E, c), lo, hi, ROOT_TOL)
    except BracketError as exc:
        scan = np.linspace(lo, hi, 9)
        vals = [_bracket_function(E, c) for E in scan]
        raise BracketError(
            f"no root for c={c:g} in ({lo}, {hi}); scan: "
            + ", ".join(f"{E:.3g}:{v:.3g}" for E, v in zip(scan, vals)),
            exc.lo, exc.hi, exc.f_lo, exc.f_hi,
        ) from exc


def busch_energies(c: float, count: int) -> np.ndarray:
    """Lowest ``count`` s-wave energies at interaction strength ``c = 1/a``.

    For ``c > 0`` the first entry is the molecular (bound-branch) level.  At
    ``c = +-inf`` the interaction vanishes and the free values ``2n + 3/2``
    are returned (the molecular level has gone to minus infinity).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if math.isinf(c):
        return 2.0 * np.arange(count) + 1.5
    return np.array([_root(c, n) for n in range(count)])


# --------------------------------------------------------------------------
# States and wavefunctions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BuschState:
    """One interacting s-wave level.

    ``weight`` is the normalisation of the Green's-function form,
    ``psi = weight * G_E``; ``norm`` is the prefactor ``A`` of the Tricomi
    form.  For ``c = +-inf`` both describe the plain oscillator state.
    """

    index: int
    E: float
    c: float
    weight: float
    norm: float
    kind: str

    @property
    def nu(self) -> float:
        return 0.5 * self.E - 0.75

    @property
    def alpha(self) -> float:
        return 0.75 - 0.5 * self.E

    @property
    def free(self) -> bool:
        return math.isinf(self.c)


def _orthonormal_laguerre(n_max: int, alpha: float, x: np.ndarray) -> np.ndarray:
    """sqrt(n!/Gamma(n+alpha+1)) L_n^(alpha)(x) for n = 0..n_max, by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = math.exp(-0.5 * gammaln(alpha + 1.0))
    if n_max >= 1:
        out[1] = (1.0 + alpha - x) * out[0] / math.sqrt(1.0 + alpha)
    for n in range(1, n_max):
        out[n + 1] = ((2 * n + 1 + alpha - x) * out[n]
                      - math.sqrt(n * (n + alpha)) * out[n - 1]) / math.sqrt((n + 1) * (n + alpha + 1))
    return out


def ho_radial_table(n_max: int, l: int, r, length: float = 1.0) -> np.ndarray:
    """Normalised oscillator radial functions ``R_nl(r)`` for ``n = 0..n_max``.

    ``length`` is the oscillator length of the basis (1 for the trap itself).
    Rows index ``n``; ``int R_nl^2 r^2 dr = 1``.
    """
    rho = np.asarray(r, dtype=float) / length
    lag = _orthonormal_laguerre(n_max, l + 0.5, rho * rho)
    return math.sqrt(2.0) * lag * rho**l * np.exp(-0.5 * rho * rho) / length**1.5


def ho_radial(n: int, l: int, r) -> np.ndarray:
    """Normalised radial oscillator function R_nl(r), energy 2n + l + 3/2."""
    if n < 0 or l < 0:
        raise ValueError("n and l must be non-negative")
    return ho_radial_table(n, l, r)[n]


def _origin_amplitudes(n_max: int) -> np.ndarray:
    # phi_n(0) for the 3D l = 0 oscillator states (R_n0(0) / sqrt(4 pi)), all positive
    n = np.arange(n_max + 1)
    return np.sqrt(2.0 * np.exp(gammaln(n + 1.5) - gammaln(n + 1.0))) / math.pi


def busch_states(c: float, count: int) -> list[BuschState]:
    energies = busch_energies(c, count)
    states = []
    for i, E in enumerate(energies):
        if math.isinf(c):
            n = i
            # psi = phi_n = A e^{-r^2/2} U(-n, 3/2, r^2),  U(-n) = (-1)^n n! L_n^(1/2)
            A = (-1) ** n * math.sqrt(2.0) * math.exp(
                -0.5 * (gammaln(n + 1.0) + gammaln(n + 1.5))) / math.sqrt(4 * math.pi)
            states.append(BuschState(i, float(E), c, 1.0, A, "trap"))
            continue
        weight = math.sqrt(2.0 * math.pi / _minus_dF_dE(E))
        alpha = 0.75 - 0.5 * E
        # psi = weight * G,  G = Gamma(alpha) / (2 pi^{3/2}) e^{-r^2/2} U(alpha, 3/2, r^2)
        sign = float(gammasgn(alpha))
        log_a = math.log(weight) + gammaln(alpha) - math.log(2.0 * math.pi**1.5)
        # deep molecular levels (alpha >~ 150): the prefactor overflows; only the Tricomi route needs it
        A = sign * math.exp(log_a) if log_a < 700.0 else math.copysign(math.inf, sign)
        kind = "bound" if (i == 0 and c > 0) else "trap"
        states.append(BuschState(i, float(E), c, weight, A, kind))
    return states


def busch_wavefunction(state: BuschState, r) -> np.ndarray:
    """Normalised 3D amplitude psi(r) (angular factor included), for r > 0."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise ValueError("busch_wavefunction needs r > 0; use busch_r_psi_at_origin for the limit")
    if state.free:
        return ho_radial(state.index, 0, r_arr) / math.sqrt(4 * math.pi)
    if not math.isfinite(state.norm):
        raise OverflowError(f"Tricomi prefactor overflows for E={state.E:g}; use the Green's-function route")
    flat = np.array([tricomi_u(state.alpha, x * x) for x in r_arr.ravel()])
    return (state.norm * np.exp(-0.5 * r_arr.ravel() ** 2) * flat).reshape(r_arr.shape)


def busch_r_psi_at_origin(state: BuschState) -> float:
    """lim_{r->0} r psi(r) (finite; zero for a free oscillator state)."""
    if state.free:
        return 0.0
    return state.weight / (2.0 * math.pi)


# --------------------------------------------------------------------------
# Dipole matrix and the assembled basis
# --------------------------------------------------------------------------

def angular_cos(l: int) -> float:
    """<l+1, 0| cos(theta) |l, 0>."""
    return (l + 1) / math.sqrt((2 * l + 1) * (2 * l + 3))


def ho_dipole_radial(n: int, l: int, m: int) -> float:
    """<R_{n,l}| r |R_{m,l+1}> between oscillator states (unit length)."""
    if m == n:
        return math.sqrt(n + l + 1.5)
    if m == n - 1:
        return -math.sqrt(n)
    return 0.0


def _swave_p_elements_analytic(states: list[BuschState], n_max: int) -> np.ndarray:
    m = np.arange(n_max + 1)
    p = _origin_amplitudes(n_max + 1)
    e = 2.0 * np.arange(n_max + 2) + 1.5
    out = np.zeros((len(states), n_max + 1))
    s3 = math.sqrt(3.0)
    for i, st in enumerate(states):
        if st.free:
            n = st.index
            if n <= n_max:
                out[i, n] += math.sqrt(n + 1.5) / s3
            if 1 <= n <= n_max + 1:
                out[i, n - 1] += -math.sqrt(n) / s3
            continue
        term = (p[m] * np.sqrt(m + 1.5) / (e[m] - st.E)
                - p[m + 1] * np.sqrt(m + 1.0) / (e[m + 1] - st.E))
        out[i] = st.weight * term / s3
    return out


RADIAL_EDGES = (0.0, 0.01, 0.03, 0.07, 0.15, 0.3, 0.6, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5,
                4.0, 5.0, 6.0, 7.0, 8.0, 9.5, 11.0, 13.0, 15.0)


def radial_grid(order: int = 24, edges=RADIAL_EDGES) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes on [0, 15] graded towards the origin."""
    return composite_rule(edges, order)


def _swave_p_elements_quadrature(states: list[BuschState], n_max: int, order: int) -> np.ndarray:
    r, w = radial_grid(order)
    p_waves = ho_radial_table(n_max, 1, r)
    out = np.zeros((len(states), n_max + 1))
    for i, st in enumerate(states):
        rad = math.sqrt(4 * math.pi) * busch_wavefunction(st, r)
        out[i] = (p_waves * (w * rad * r**3)).sum(axis=1) / math.sqrt(3.0)
    return out


def swave_dipole_element(state: BuschState, m: int, *, method: str = "adaptive",
                         order: int = 200) -> float:
    """<state| r cos(theta) |R_{m,1} Y_10> by direct integration.

    ``method="adaptive"`` uses the adaptive integrator, ``"fixed"`` a single
    ``order``-point Gauss-Legendre rule on [0, 15].
    """
    def f(r):
        rad = math.sqrt(4 * math.pi) * busch_wavefunction(state, r)
        return rad * ho_radial(m, 1, r) * r**3 / math.sqrt(3.0)

    if method == "adaptive":
        return integrate(f, 0.0, 15.0, atol=1e-13, points=(0.1, 1.0, 3.0))
    if method == "fixed":
        r, w = composite_rule((0.0, 15.0), order)
        return float(np.dot(w, f(r)))
    raise ValueError(f"unknown method {method!r}")


@lru_cache(maxsize=16)
def _regular_dipole(spec: BasisSpec) -> np.ndarray:
    # l >= 1 couplings only; independent of c, so shared read-only between bases
    nb = spec.n_max + 1
    W = np.zeros((spec.dimension, spec.dimension))
    n = np.arange(nb)
    for l in range(1, spec.l_max):
        # rows (l, n), cols (l+1, m): m = n gives sqrt(n+l+3/2), m = n-1 gives -sqrt(n)
        block = np.diag(np.sqrt(n + l + 1.5))
        block[np.arange(1, nb), np.arange(nb - 1)] = -np.sqrt(n[1:])
        i0 = spec.n_s + (l - 1) * nb
        W[i0:i0 + nb, i0 + nb:i0 + 2 * nb] = angular_cos(l) * block
    W = W + W.T
    W.setflags(write=False)
    return W


def _assemble_dipole(sp: np.ndarray, spec: BasisSpec) -> np.ndarray:
    W = _regular_dipole(spec).copy()
    n_s, nb = spec.n_s, spec.n_max + 1
    W[:n_s, n_s:n_s + nb] = sp
    W[n_s:n_s + nb, :n_s] = sp.T
    return W


def dipole_matrix(c: float, spec: BasisSpec, states: list[BuschState] | None = None, *,
                  method: str = "analytic", order: int = 24) -> np.ndarray:
    """Symmetric ``r cos(theta)`` matrix over the basis ordered as in :class:`TrapBasis`."""
    if states is None:
        states = busch_states(c, spec.n_s)
    if method == "analytic":
        sp = _swave_p_elements_analytic(states, spec.n_max)
    elif method == "quadrature":
        sp = _swave_p_elements_quadrature(states, spec.n_max, order)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _assemble_dipole(sp, spec)


@dataclass(frozen=True)
class TrapBasis:
    """Interacting s-waves plus free l >= 1 oscillator states.

    ``labels[i] = (l, n)``; for l = 0, ``n`` is the s-wave level index.
    Only the s <-> p block of the dipole matrix depends on ``c``; it is kept
    in ``sp_block`` and the rest is shared between bases.
    """

    c: float
    spec: BasisSpec
    states: tuple[BuschState, ...] = field(repr=False)
    labels: tuple[tuple[int, int], ...] = field(repr=False)
    energies: np.ndarray = field(repr=False)
    sp_block: np.ndarray = field(repr=False)

    @property
    def dimension(self) -> int:
        return len(self.energies)

    @property
    def dipole(self) -> np.ndarray:
        """``W[i, j] = <i| r cos(theta) |j>`` in the m = 0 sector."""
        return _assemble_dipole(self.sp_block, self.spec)

    def hamiltonian(self, dz: float) -> np.ndarray:
        """diag(E_i) + dz^2/2 - dz * W."""
        H = self.dipole
        H *= -dz
        H[np.diag_indices_from(H)] += self.energies + 0.5 * dz * dz
        return H


def _build(c: float, spec: BasisSpec) -> TrapBasis:
    states = busch_states(c, spec.n_s)
    labels = [(0, st.index) for st in states]
    energies = [st.E for st in states]
    for l in range(1, spec.l_max + 1):
        for n in range(spec.n_max + 1):
            labels.append((l, n))
            energies.append(2.0 * n + l + 1.5)
    sp = _swave_p_elements_analytic(states, spec.n_max)
    sp.setflags(write=False)
    return TrapBasis(c, spec, tuple(states), tuple(labels), np.array(energies), sp)


@lru_cache(maxsize=4096)
def _cached_build(c_key: float, spec: BasisSpec) -> TrapBasis:
    return _build(c_key, spec)


def cache_key(c: float) -> float:
    return c if math.isinf(c) else round(float(c), CACHE_DIGITS) + 0.0


def build_basis(c: float, spec: BasisSpec = BasisSpec()) -> TrapBasis:
    """Basis at interaction strength ``c = 1/a``, memoised on ``c`` rounded to 1e-10."""
    return _cached_build(cache_key(c), spec)


def inverse_length(a: float) -> float:
    """c = 1/a with a = 0 mapped to the free limit and |a| = inf to unitarity."""
    if a == 0:
        return math.inf
    return 0.0 if math.isinf(a) else 1.0 / a


def length_from_inverse(c: float) -> float:
    if c == 0:
        return math.inf
    return 0.0 if math.isinf(c) else 1.0 / c
