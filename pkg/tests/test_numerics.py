import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tisr.numerics import (
    AsymmetryError,
    BracketError,
    PoleError,
    composite_rule,
    gamma_real,
    gauss_legendre,
    integrate,
    integrate_gaussian,
    solve_bracketed_root,
    sym_eig,
    tricomi_u,
)


def test_gamma_real_values_and_poles():
    assert gamma_real(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert gamma_real(-0.5) == pytest.approx(-2 * math.sqrt(math.pi), rel=1e-15)
    for x in (0.0, -1.0, -7.0):
        with pytest.raises(PoleError):
            gamma_real(x)


def test_gauss_legendre_exact_for_polynomials():
    rule = gauss_legendre(8)
    assert rule.degree == 15
    x, w = rule.scaled(-1.0, 2.0)
    for k in range(16):
        exact = (2.0 ** (k + 1) - (-1.0) ** (k + 1)) / (k + 1)
        assert np.dot(w, x**k) == pytest.approx(exact, rel=1e-13)


def test_composite_rule_covers_edges():
    x, w = composite_rule([0.0, 1.0, 3.0], order=10)
    assert len(x) == 20
    assert w.sum() == pytest.approx(3.0, rel=1e-14)


def test_integrate_gaussian_tail():
    assert integrate(lambda x: np.exp(-x * x), 0.0, math.inf) == pytest.approx(math.sqrt(math.pi) / 2, abs=1e-11)
    assert integrate_gaussian(lambda x: x * x) == pytest.approx(math.sqrt(math.pi) / 4, abs=1e-11)


def test_integrate_endpoint_singularity():
    # integrable 1/sqrt singularity at the left end
    val = integrate(lambda x: 1.0 / np.sqrt(x), 0.0, 1.0, atol=1e-9)
    assert val == pytest.approx(2.0, abs=1e-8)


@given(st.floats(-12.0, 12.0), st.floats(0.05, 30.0))
def test_tricomi_matches_mpmath(alpha, x):
    ref = float(mp.hyperu(alpha, 1.5, x))
    got = tricomi_u(alpha, x)
    assert got == pytest.approx(ref, rel=1e-10, abs=1e-300)


def test_tricomi_special_cases():
    assert tricomi_u(0.0, 2.3) == 1.0
    # U(-n, 3/2, x) is a Laguerre polynomial times (-1)^n n!
    assert tricomi_u(-2.0, 1.7) == pytest.approx(float(mp.hyperu(-2, 1.5, 1.7)), rel=1e-13)


def test_root_solver_and_bracket_error():
    assert solve_bracketed_root(lambda x: x * x - 2, 0.0, 2.0) == pytest.approx(math.sqrt(2), abs=1e-12)
    with pytest.raises(BracketError) as exc:
        solve_bracketed_root(lambda x: x * x + 1, -1.0, 1.0)
    assert exc.value.f_lo > 0 and exc.value.f_hi > 0


def test_sym_eig_subset_and_symmetry_check():
    rng = np.random.default_rng(3)
    A = rng.normal(size=(30, 30))
    A = A + A.T
    full = np.linalg.eigvalsh(A)
    sub = sym_eig(A, count=5, vectors=False)
    np.testing.assert_allclose(sub.values, full[:5], atol=1e-12)
    res = sym_eig(A, count=3)
    np.testing.assert_allclose(A @ res.vectors, res.vectors * res.values, atol=1e-10)
    A[0, 1] += 1e-6
    with pytest.raises(AsymmetryError):
        sym_eig(A)
