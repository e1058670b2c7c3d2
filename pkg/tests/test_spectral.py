import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gpyweight.extremal import S_of_k, eigenpair
from gpyweight.quadrature import composite_gauss_legendre, dyadic_grid, geometric_breaks
from gpyweight.spectral import (
    ConvergenceError,
    T_one_closed_form,
    apply_T,
    kernel,
    leading_eigenvalues,
    nystrom_extrapolated,
    nystrom_grid,
    nystrom_lambda1,
    nystrom_matrix,
    richardson,
    verify_T_derivative,
)


# -- grids

@pytest.mark.parametrize("grid", [nystrom_grid(200), nystrom_grid(803), dyadic_grid(1024)])
def test_quadrature_grid_invariants(grid):
    assert abs(grid.weights.sum() - 1) <= 1e-12
    assert np.all(np.diff(grid.nodes) > 0)
    assert np.all(grid.weights > 0)
    assert grid.nodes[0] > 0 and grid.nodes[-1] < 1
    assert grid.scheme == "gauss_legendre_composite"


def test_geometric_breaks():
    assert list(geometric_breaks(4)) == [0.0, 0.125, 0.25, 0.5, 1.0]
    with pytest.raises(ValueError):
        composite_gauss_legendre([0, 0.5, 0.5, 1], 4)


def test_grid_integrates_polynomials():
    g = nystrom_grid(200)
    for p in range(0, 40, 7):
        assert np.sum(g.weights * g.nodes**p) == pytest.approx(1 / (p + 1), rel=1e-13)


# -- kernel

def test_kernel_examples():
    assert kernel(4, 0.25, 1.0) == pytest.approx(1 / 8)
    assert kernel(9, 0.3, 0.3) == 1.0
    assert kernel(6, 0.0, 0.4) == 0.0 and kernel(6, 0.4, 0.0) == 0.0


@given(st.integers(3, 200), st.floats(0, 1), st.floats(0, 1))
def test_kernel_symmetric_and_bounded(k, x, y):
    v = kernel(k, x, y)
    assert v == kernel(k, y, x)
    assert 0.0 <= v <= 1.0


# -- Nystrom

def test_extrapolated_k5_matches_closed_form():
    ext = nystrom_extrapolated(5, (200, 400, 800))
    assert abs(ext.value - S_of_k(5)) / S_of_k(5) <= 1e-4


@pytest.mark.parametrize("k", [4, 13, 30])
def test_eigenvector_is_bessel_of_order_n(k):
    res = nystrom_lambda1(k, 400)
    x, w = res.grid.nodes, res.grid.weights
    phi = eigenpair(k).phi(x)
    cos = abs(np.sum(w * phi * res.eigvec)) / math.sqrt(np.sum(w * phi**2) * np.sum(w * res.eigvec**2))
    assert cos >= 1 - 1e-6


def test_eigenvector_is_not_sqrt_x_times_bessel():
    # the variant with an extra sqrt(x) factor is measurably off
    res = nystrom_lambda1(10, 400)
    x, w = res.grid.nodes, res.grid.weights
    alt = np.sqrt(x) * eigenpair(10).phi(x)
    cos = abs(np.sum(w * alt * res.eigvec)) / math.sqrt(np.sum(w * alt**2) * np.sum(w * res.eigvec**2))
    assert cos < 1 - 1e-4


@pytest.mark.parametrize("k", range(4, 51, 3))
def test_lambda_below_trivial_bound(k):
    res = nystrom_lambda1(k, 200)
    assert 0 < res.lambda1 < 4 / k


def test_result_invariants():
    res = nystrom_lambda1(12, 300)
    assert res.residual <= 1e-10
    assert np.all(res.eigvec >= 0)
    assert np.sum(res.grid.weights * res.eigvec**2) == pytest.approx(1.0, rel=1e-12)
    assert res.iterations >= 1


def test_matrix_is_symmetric_and_nonnegative():
    B = nystrom_matrix(20, nystrom_grid(400))
    assert np.array_equal(B, B.T)
    assert B.min() >= 0


def test_plain_and_corrected_rules_converge_to_the_same_limit():
    plain = nystrom_extrapolated(8, corrected=False).value
    corr = nystrom_extrapolated(8).value
    assert plain == pytest.approx(corr, rel=1e-5)


@pytest.mark.parametrize("k", [4, 10, 25, 50])
def test_convergence_differences_shrink(k):
    vals = [nystrom_lambda1(k, N).lambda1 for N in (100, 200, 400, 800)]
    d = [abs(b - a) for a, b in zip(vals, vals[1:])]
    assert d[0] > d[1] > d[2]


def test_node_count_and_iteration_limits():
    with pytest.raises(ValueError):
        nystrom_lambda1(5, 20)
    with pytest.raises(ConvergenceError) as info:
        nystrom_lambda1(5, 100, maxiter=1)
    assert info.value.iterations == 1


def test_leading_eigenvalues_match_bessel_family():
    k = 9
    lams = leading_eigenvalues(k, 800)
    exact = [eigenpair(k, r).lam for r in range(1, 6)]
    assert lams == pytest.approx(exact, rel=1e-5)
    with pytest.raises(ValueError):
        leading_eigenvalues(k, 200, count=6)


def test_richardson():
    ext = richardson([1.1, 1.025, 1.00625], [1, 2, 4])
    assert ext.order == pytest.approx(2.0)
    assert ext.value == pytest.approx(1.0)
    flat = richardson([1.0, 1.0, 1.0], [1, 2, 4])
    assert flat.value == 1.0 and math.isnan(flat.order)
    with pytest.raises(ValueError):
        richardson([1.0, 2.0], [1, 2])


# -- operator identities

def test_T_one_example():
    assert apply_T(5, lambda y: 1.0, 0.5) == pytest.approx(5 / 12, abs=1e-10)
    assert float(T_one_closed_form(5, 0.5)) == pytest.approx(5 / 12, abs=1e-15)


@pytest.mark.parametrize("k", [3, 5, 7, 11])
def test_T_one_closed_form(k):
    for x in np.linspace(0.01, 1, 25):
        assert apply_T(k, lambda y: 1.0, x) == pytest.approx(float(T_one_closed_form(k, x)), abs=1e-10)


def test_T_of_anything_vanishes_at_zero():
    assert apply_T(6, lambda y: math.exp(y), 0.0) == 0.0


def test_T_acting_on_eigenfunction():
    e = eigenpair(8)
    for x in (0.1, 0.4, 0.8):
        assert apply_T(8, lambda y: float(e.phi(y)), x) == pytest.approx(e.lam * float(e.phi(x)), rel=1e-6)


def test_derivative_identity_for_constants():
    lhs, rhs = verify_T_derivative(5, lambda y: 1.0, 0.5)
    assert lhs == pytest.approx(1 / 3, abs=1e-5)
    assert rhs == pytest.approx(1 / 3, abs=1e-5)


@pytest.mark.parametrize("x", [0.1, 0.5, 0.9])
def test_derivative_identity_smooth(x):
    lhs, rhs = verify_T_derivative(7, lambda y: y, x)
    assert abs(lhs - rhs) <= 1e-5


def test_derivative_identity_eigenfunction():
    e = eigenpair(6)
    phi = lambda y: float(e.phi(y))  # noqa: E731
    x, h = 0.35, 1e-5
    _, rhs = verify_T_derivative(6, phi, x)
    fd = (phi(x + h) - phi(x - h)) / (2 * h)
    assert rhs / e.lam == pytest.approx(fd, rel=1e-6)


def test_derivative_identity_domain():
    with pytest.raises(ValueError):
        verify_T_derivative(5, lambda y: 1.0, 0.001)
