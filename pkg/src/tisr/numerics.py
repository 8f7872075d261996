"""Numerical kernels: Gamma, Tricomi U(a, 3/2, x), quadrature, roots, eigensolver.

Everything here is a pure function of its arguments.  Tolerance defaults are
module constants so that downstream checks are reproducible.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import linalg, optimize
from scipy.special import eval_genlaguerre, gammaln

DEFAULT_ATOL = 1e-11
DEFAULT_ROOT_TOL = 1e-12
DEFAULT_ORDER = 15
MAX_INTERVALS = 4000


class NumericsError(RuntimeError):
    """Base class for numerical failures (as opposed to bad input)."""


class PoleError(ValueError):
    """Argument sits on a pole of the function."""


class AsymmetryError(ValueError):
    """Matrix handed to the symmetric eigensolver is not symmetric."""


class BracketError(NumericsError):
    """The supplied interval does not bracket a sign change."""

    def __init__(self, message: str, lo: float, hi: float, f_lo: float, f_hi: float):
        super().__init__(message)
        self.lo, self.hi, self.f_lo, self.f_hi = lo, hi, f_lo, f_hi


class ConvergenceError(NumericsError):
    """Iteration stopped before reaching the requested tolerance."""

    def __init__(self, message: str, estimate: float = float("nan"), error: float = float("nan")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


# --------------------------------------------------------------------------
# Gamma function
# --------------------------------------------------------------------------

def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def gamma_real(x: float) -> float:
    """Gamma function for real arguments away from the poles 0, -1, -2, ..."""
    x = float(x)
    if _is_nonpositive_integer(x):
        raise PoleError(f"Gamma has a pole at x={x:g}")
    return math.gamma(x)


# --------------------------------------------------------------------------
# Quadrature
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    """Fixed-order Gauss-Legendre rule on [-1, 1].

    Exact for polynomials of degree ``2 * order - 1``.
    """

    order: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @classmethod
    def gauss_legendre(cls, order: int) -> "QuadratureRule":
        if order < 1:
            raise ValueError("order must be >= 1")
        x, w = leggauss(order)
        return cls(order, x, w)

    @property
    def degree(self) -> int:
        return 2 * self.order - 1

    def scaled(self, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights mapped onto [lo, hi]."""
        half = 0.5 * (hi - lo)
        return lo + half * (self.nodes + 1.0), half * self.weights

    def apply(self, f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float) -> float:
        x, w = self.scaled(lo, hi)
        return float(np.dot(w, f(x)))


_RULES: dict[int, QuadratureRule] = {}


def gauss_legendre(order: int) -> QuadratureRule:
    rule = _RULES.get(order)
    if rule is None:
        rule = _RULES[order] = QuadratureRule.gauss_legendre(order)
    return rule


def composite_rule(edges: Sequence[float], order: int = 32) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights on consecutive panels given by ``edges``."""
    rule = gauss_legendre(order)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        x, w = rule.scaled(lo, hi)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    *,
    atol: float = DEFAULT_ATOL,
    rtol: float = 0.0,
    points: Sequence[float] = (),
    order: int = DEFAULT_ORDER,
    max_intervals: int = MAX_INTERVALS,
) -> float:
    """Globally adaptive Gauss-Legendre integration of a vectorised ``f``.

    ``hi`` may be ``inf``; the tail beyond the last finite breakpoint is
    mapped onto [0, 1) with ``x = a + t / (1 - t)``.  Each panel is estimated
    with one rule on the whole panel and on its two halves; the panel with the
    largest discrepancy is split until the summed discrepancy falls below
    ``max(atol, rtol * |I|)``.

    Raises
    ------
    ConvergenceError
        If ``max_intervals`` panels are used up; ``estimate`` carries the
        best value reached.
    """
    if hi < lo:
        return -integrate(f, hi, lo, atol=atol, rtol=rtol, points=points, order=order,
                          max_intervals=max_intervals)
    rule = gauss_legendre(order)
    finite_hi = math.isfinite(hi)
    cuts = sorted(p for p in points if lo < p < hi)
    edges = [lo, *cuts] + ([hi] if finite_hi else [])

    panels: list[tuple[Callable[[np.ndarray], np.ndarray], float, float]] = [
        (f, a, b) for a, b in zip(edges[:-1], edges[1:])
    ]
    if not finite_hi:
        start = edges[-1]

        def tail(t: np.ndarray, start: float = start) -> np.ndarray:
            s = 1.0 - t
            return f(start + t / s) / (s * s)

        panels.append((tail, 0.0, 1.0))

    def estimate(g, a, b):
        whole = rule.apply(g, a, b)
        m = 0.5 * (a + b)
        halves = rule.apply(g, a, m) + rule.apply(g, m, b)
        return halves, abs(halves - whole)

    heap: list[tuple[float, int, float, float, float, Callable]] = []
    total = 0.0
    err = 0.0
    counter = 0
    for g, a, b in panels:
        val, e = estimate(g, a, b)
        total += val
        err += e
        heapq.heappush(heap, (-e, counter, a, b, val, g))
        counter += 1

    while err > max(atol, rtol * abs(total)):
        if len(heap) >= max_intervals:
            raise ConvergenceError(
                f"integrate: tolerance not reached after {len(heap)} panels "
                f"(estimate {total:.16g}, error {err:.3g})",
                estimate=total, error=err,
            )
        neg_e, _, a, b, val, g = heapq.heappop(heap)
        total -= val
        err += neg_e
        m = 0.5 * (a + b)
        for a2, b2 in ((a, m), (m, b)):
            v2, e2 = estimate(g, a2, b2)
            total += v2
            err += e2
            heapq.heappush(heap, (-e2, counter, a2, b2, v2, g))
            counter += 1
    return float(total)


def integrate_gaussian(g: Callable[[np.ndarray], np.ndarray], **kwargs) -> float:
    """Half-line integral of ``exp(-r**2) * g(r)`` over (0, inf)."""
    return integrate(lambda r: np.exp(-r * r) * g(r), 0.0, math.inf, points=(1.0, 4.0), **kwargs)


# --------------------------------------------------------------------------
# Confluent hypergeometric function of the second kind, b = 3/2
# --------------------------------------------------------------------------

_U_RTOL = 1e-14


def _tricomi_integral(a: float, x: float) -> float:
    # U(a,b,x) = x^-a / Gamma(a) * int_0^inf e^-s s^(a-1) (1 + s/x)^(b-a-1) ds,  a >= 1
    lg = gammaln(a)

    def g(s):
        with np.errstate(divide="ignore"):
            out = np.exp(-s + (a - 1.0) * np.log(s) + (0.5 - a) * np.log1p(s / x) - lg)
        return np.where(s > 0, out, 0.0) if a > 1.0 else out

    points = (min(x, a), max(a - 1.0, 0.5), a + 10.0 * math.sqrt(a))
    val = integrate(g, 0.0, math.inf, atol=0.0, rtol=_U_RTOL, points=points)
    return x ** (-a) * val


def tricomi_u(alpha: float, x: float) -> float:
    """U(alpha, 3/2, x) for real ``alpha`` and ``x > 0``.

    ``alpha >= 1`` uses the Laplace-type integral representation.
    Non-positive integers give the Laguerre polynomial
    ``(-1)^n n! L_n^(1/2)(x)``.  Everything else is reached from
    ``frac + 1`` and ``frac + 2`` (``frac`` the fractional part) by the
    downward recurrence ``U(a-1) = (2a - b + x) U(a) - a (a - b + 1) U(a+1)``,
    which is stable in that direction because U is the dominant solution.
    """
    x = float(x)
    alpha = float(alpha)
    if not x > 0:
        raise ValueError(f"tricomi_u requires x > 0, got {x!r}")
    if alpha == 0.0:
        return 1.0
    if alpha >= 1.0:
        return _tricomi_integral(alpha, x)
    if alpha == math.floor(alpha):
        n = int(-alpha)
        return (-1) ** n * math.exp(gammaln(n + 1.0)) * float(eval_genlaguerre(n, 0.5, x))

    frac = alpha - math.floor(alpha)  # in (0, 1)
    u_next = _tricomi_integral(frac + 2.0, x)
    u_cur = _tricomi_integral(frac + 1.0, x)
    a = frac + 1.0
    while a > alpha + 0.5:
        u_prev = (2.0 * a - 1.5 + x) * u_cur - a * (a - 0.5) * u_next
        u_next, u_cur = u_cur, u_prev
        a -= 1.0
    return u_cur


# --------------------------------------------------------------------------
# Root finding
# --------------------------------------------------------------------------

def solve_bracketed_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = DEFAULT_ROOT_TOL,
    *,
    maxiter: int = 200,
) -> float:
    """Root of ``f`` inside ``[lo, hi]`` by Brent's method.

    Raises
    ------
    BracketError
        If ``f(lo)`` and ``f(hi)`` have the same sign.
    ConvergenceError
        If the iteration cap is reached.
    """
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return float(lo)
    if f_hi == 0.0:
        return float(hi)
    if not (np.isfinite(f_lo) and np.isfinite(f_hi)) or np.sign(f_lo) == np.sign(f_hi):
        raise BracketError(
            f"no sign change on [{lo:.6g}, {hi:.6g}]: f={f_lo:.3g}, {f_hi:.3g}",
            lo, hi, f_lo, f_hi,
        )
    try:
        root, info = optimize.brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps,
                                     maxiter=maxiter, full_output=True, disp=False)
    except RuntimeError as exc:  # pragma: no cover - disp=False makes this unreachable
        raise ConvergenceError(str(exc)) from exc
    if not info.converged:
        raise ConvergenceError(
            f"root search did not converge in {maxiter} iterations", estimate=root
        )
    return float(root)


# --------------------------------------------------------------------------
# Dense symmetric eigensolver
# --------------------------------------------------------------------------

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class EigResult:
    """Ascending eigenvalues and (optionally) orthonormal eigenvectors as columns."""

    values: np.ndarray
    vectors: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.values)


def sym_eig(
    matrix: np.ndarray,
    *,
    count: int | None = None,
    vectors: bool = True,
) -> EigResult:
    """Eigen-decomposition of a real symmetric matrix.

    ``count`` restricts the output to the lowest ``count`` eigenpairs.
    """
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if A.size and np.max(np.abs(A - A.T)) > SYMMETRY_TOL * scale:
        raise AsymmetryError(f"matrix asymmetric by {np.max(np.abs(A - A.T)):.3g}")
    n = A.shape[0]
    subset = None
    if count is not None and count < n:
        subset = [0, count - 1]
    if vectors:
        w, v = linalg.eigh(A, subset_by_index=subset, check_finite=False)
        return EigResult(w, v)
    w = linalg.eigh(A, eigvals_only=True, subset_by_index=subset, check_finite=False)
    return EigResult(w)
