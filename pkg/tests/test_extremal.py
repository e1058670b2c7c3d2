import math

import numpy as np
import pytest
from scipy import integrate

import oracles
from gpyweight.bounds import refined_bound
from gpyweight.extremal import S_of_k, eigenpair, ode_residual, optimal_P
from gpyweight.rayleigh import best_monomial, ratio_of_q
from gpyweight.spectral import nystrom_extrapolated


def test_S4_against_oracle_zero():
    alpha = oracles.bisect_zero(2, 5, 5.5)
    assert 12 / alpha**2 == pytest.approx(0.454982, abs=1e-6)
    assert S_of_k(4) == pytest.approx(12 / alpha**2, rel=1e-13)


def test_kS_tends_to_four_from_below():
    v = 10**4 * S_of_k(10**4)
    assert 3.8 < v < 4.0


def test_two_term_asymptotic():
    k = 10**5
    c = (4 / S_of_k(k) - k) / k ** (1 / 3)
    assert abs(c - 3.7115) / 3.7115 <= 0.03


def test_S_of_k_domain():
    with pytest.raises(ValueError):
        S_of_k(2)
    with pytest.raises(ValueError):
        S_of_k(10**6 + 1)


@pytest.mark.parametrize("k", [3, 4, 9, 25, 60])
def test_q1_positive_inside(k):
    e = eigenpair(k)
    xs = np.linspace(0, 1, 1002)[1:-1]
    assert np.all(e.q_unit(xs) > 0)
    assert abs(float(e.q_unit(1.0))) <= 1e-10


@pytest.mark.parametrize("k", range(4, 51))
def test_eigenpair_family(k):
    e1, e2 = eigenpair(k, 1), eigenpair(k, 2)
    assert e1.lam == S_of_k(k)
    assert e2.lam < e1.lam < 4 / k
    assert e1.b == 0.25 * e1.alpha.value**2
    assert e1.b == pytest.approx(e1.k.n / e1.lam, rel=1e-15)


def test_q_unnormalised_matches_definition():
    e = eigenpair(6)
    from gpyweight.specfun import bessel_j

    for x in (0.1, 0.5, 0.9):
        assert float(e.q(x)) == pytest.approx(x ** (-2) * bessel_j(4, e.alpha.value * math.sqrt(x)), rel=1e-12)
    assert float(e.q(0.0)) == pytest.approx((e.alpha.value / 2) ** 4 / 24, rel=1e-13)


def test_analytic_derivatives_match_finite_differences():
    e = eigenpair(6)
    x, h = 0.5, 1e-5
    fd1 = (e.q_unit(x + h) - e.q_unit(x - h)) / (2 * h)
    fd2 = (e.q_unit(x + h) - 2 * e.q_unit(x) + e.q_unit(x - h)) / h**2
    assert float(e.dq_unit(x)) == pytest.approx(fd1, rel=1e-8)
    assert float(e.d2q(x, unit=True)) == pytest.approx(fd2, rel=1e-4)


def test_ode_residual_example():
    assert abs(ode_residual(eigenpair(6), 0.5)) <= 1e-8


@pytest.mark.parametrize("k", [4, 6, 15, 30])
def test_ode_negative_control(k):
    e = eigenpair(k)
    assert abs(ode_residual(e, 0.5, alpha=1.01 * e.alpha.value)) > 1e-3


def test_ode_residual_domain():
    with pytest.raises(ValueError):
        ode_residual(eigenpair(5), 1e-7)


def test_phi_continuous_at_zero():
    for k in (4, 10, 30):
        assert abs(float(eigenpair(k).phi(1e-6))) <= 1e-3


def test_phi_is_x_power_times_q_prime():
    e = eigenpair(9)
    for x in (0.2, 0.7):
        assert float(e.phi(x)) == pytest.approx(x ** (e.k.n / 2) * float(e.dq(x)), rel=1e-12)


def test_optimal_P_normalisation_and_vanishing_order():
    k = 6
    P = optimal_P(k, [0.0, 1e-2, 1e-3, 1.0])
    assert P[0] == 0.0
    assert P[3] == pytest.approx(1.0, abs=1e-8)
    assert P[2] / 1e-3 ** (k - 1) < P[1] / 1e-2 ** (k - 1)
    with pytest.raises(ValueError):
        optimal_P(k, [1.2])


@pytest.mark.parametrize("k", [5, 8, 12])
def test_optimal_P_ratio_reproduces_S(k):
    # rebuild the quotient in its original (P-space) weighting from the
    # Liouville representation P^(k-1)(1-x) = q_1(x)
    e = eigenpair(k)
    norm = float(optimal_P(k, [1.0])[0])
    q = lambda x: float(e.q_unit(x)) / norm  # noqa: E731
    dq = lambda x: float(e.dq_unit(x)) / norm  # noqa: E731
    num, _ = integrate.quad(lambda x: x ** (k - 2) / math.factorial(k - 2) * q(x) ** 2, 0, 1, epsrel=1e-12)
    den, _ = integrate.quad(lambda x: x ** (k - 1) / math.factorial(k - 1) * dq(x) ** 2, 0, 1, epsrel=1e-12)
    assert num / den == pytest.approx(S_of_k(k), rel=1e-5)


def test_optimal_P_monotone():
    P = optimal_P(7, np.linspace(0, 1, 21))
    assert np.all(np.diff(P) > 0)


@pytest.mark.parametrize("k", [4, 17, 33, 60])
def test_three_routes_agree(k):
    closed = S_of_k(k)
    spec = nystrom_extrapolated(k).value
    e = eigenpair(k)
    rq = ratio_of_q(e.q_unit, k, dq=e.dq_unit)
    for a, b in ((closed, spec), (closed, rq), (spec, rq)):
        assert abs(a - b) / closed <= 1e-4


@pytest.mark.parametrize("k", [16, 40, 100, 300])
def test_bound_sandwich(k):
    _, best = best_monomial(k)
    assert float(best) <= S_of_k(k) <= refined_bound(k)


def test_maximiser_is_locally_optimal():
    k = 9
    e = eigenpair(k)
    rng = np.random.default_rng(20240611)
    base = S_of_k(k)
    for _ in range(20):
        c = rng.normal(size=4)
        # perturbations vanish at x = 1
        pert = lambda x, c=c: sum(cj * (1 - x) * x**j for j, cj in enumerate(c))  # noqa: E731
        dpert = lambda x, c=c: sum(cj * (j * x ** max(j - 1, 0) * (1 - x) - x**j) for j, cj in enumerate(c))  # noqa: E731
        val = ratio_of_q(lambda x: e.q_unit(x) + 1e-3 * pert(x), k,
                         dq=lambda x: e.dq_unit(x) + 1e-3 * dpert(x))
        assert val <= base + 1e-7
