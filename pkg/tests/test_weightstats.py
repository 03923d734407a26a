"""Weight distributions, sparsity orders, exact rate loss, regime analysis."""

import math
from fractions import Fraction

import pytest

from polarldgm.kernels import catalog, sparsity_ratio
from polarldgm.weightstats import (
    EPSILON_STAR,
    a_terms,
    binom_tail_ge,
    classify_regime,
    epsilon_prime_finite,
    epsilon_star,
    epsilon_star_numeric,
    exact_R,
    exact_R_direct,
    fraction_below,
    lambda_exponent,
    log2_fraction,
    rate_loss_slope,
    sparsity_orders,
    w_max,
    w_mc,
    weight_distribution,
)

CAT = catalog()
G2 = CAT["G2"]


def test_weight_distribution_examples():
    assert weight_distribution(G2, 4).as_dict() == {1: 1, 2: 4, 4: 6, 8: 4, 16: 1}
    assert weight_distribution(CAT["G3'"], 0).as_dict() == {1: 1}
    assert weight_distribution(CAT["G3'"], 3).as_dict() == {1: 8, 3: 12, 9: 6, 27: 1}


def test_weight_distribution_total():
    for name, k in CAT.items():
        for n in (1, 3, 5):
            assert weight_distribution(k, n).total == k.l**n, (name, n)


def test_w_mc():
    assert w_mc(G2, 10) == 32
    assert w_mc(G2, 2) == 2
    assert w_mc(CAT["G3'"], 3) == 3
    # mode equals GM^n when l divides n (balanced mode)
    for name in ("G2", "G3'", "G4'"):
        k = CAT[name]
        n = 2 * k.l
        gm_n = round(math.prod(k.column_weights) ** (n / k.l))
        assert w_mc(k, n) == gm_n, name


def test_w_max():
    assert w_max(G2, 10) == 1024
    assert w_max(CAT["G4'"], 3) == 64
    for name, k in CAT.items():
        for n in (1, 4, 7):
            assert w_max(k, n) <= k.l**n, name


def test_sparsity_orders_g2():
    lam_mc, lam_max = sparsity_orders(G2, 40, 0.1)
    assert abs(lam_mc - 1.0 / 0.9) < 0.05
    assert abs(lam_max - 2.0 / 0.9) < 0.1


def test_sparsity_order_ratio_sandwich():
    # ratio <= lambda_MC <= ratio/(1-delta), using the exact benchmark bounds
    delta = 0.1
    for name in ("G2", "G3'", "G4'", "G3*", "G4*"):
        k = CAT[name]
        n = 12 * k.l  # l | n keeps the mode balanced; n large enough for Eq-8 sandwich
        ratio = sparsity_ratio(k)
        lam_mc, _ = sparsity_orders(k, n, delta)
        assert ratio - 1e-9 <= lam_mc <= ratio / (1 - delta) + 1e-9, name


def test_sparsity_orders_table_limits():
    # G4*: limiting lambda_MC ~ 1.146/(1-delta); G3*: lambda_max -> 1.5/(1-delta)
    lam_mc, _ = sparsity_orders(CAT["G4*"], 96, 0.1)
    assert abs(lam_mc - 1.14624 / 0.9) < 0.02
    _, lam_max = sparsity_orders(CAT["G3*"], 96, 0.1)
    assert abs(lam_max - 1.5 / 0.9) < 0.03


def test_exact_R_examples():
    assert exact_R(4, 4) == Fraction(7, 16)
    assert exact_R(4, 16) == 0
    assert exact_R(5, 1) == Fraction(3, 2) ** 5 - 1
    with pytest.raises(ValueError):
        exact_R(4, 17)


def test_exact_R_equals_direct_count():
    for n in range(1, 13):
        for w_ub in range(1, 2**n + 1):
            assert exact_R(n, w_ub) == exact_R_direct(n, w_ub), (n, w_ub)


def test_a_terms():
    terms = a_terms(4, 2)
    assert terms == (Fraction(5, 16), Fraction(2, 16))
    assert sum(terms) == Fraction(7, 16)
    assert a_terms(6, 5) == (Fraction(1, 64),)
    with pytest.raises(ValueError):
        a_terms(4, 4)


def test_a_terms_sum_equals_exact_R():
    for n in (5, 9, 13, 20):
        for n_lub in range(1, n):
            assert sum(a_terms(n, n_lub)) == exact_R(n, 2**n_lub), (n, n_lub)


def test_a_terms_sandwich():
    terms = a_terms(20, 12)
    top = max(terms)
    total = sum(terms)
    assert top <= total <= 20 * top


def test_tail_term_exponents_within_polynomial_slack():
    # |(1/n) log2 a_i - lambda(eps', (i+1)/n)| <= (2 log2(n+1) + 2)/n
    for n in (24, 48):
        n_lub = round(0.7 * n)
        eps_prime = n_lub / n - 0.5
        terms = a_terms(n, n_lub)
        bound = (2 * math.log2(n + 1) + 2) / n
        for i, a in enumerate(terms):
            if a == 0:
                continue
            lhs = log2_fraction(a) / n
            lam = lambda_exponent(eps_prime, (i + 1) / n)
            assert abs(lhs - lam) <= bound, (n, i)


def test_lambda_exponent_properties():
    # lambda(x, 0) = -D(1/2+x || 1/2) <= 0
    for x in (0.0, 0.1, 0.3):
        assert lambda_exponent(x, 0.0) <= 1e-15
    # argmax over y at fixed x is y = 1/6 - x
    for x in (0.0, 0.05, 0.12):
        y_star = 1.0 / 6.0 - x
        best = lambda_exponent(x, y_star)
        for y in (y_star - 0.01, y_star + 0.01):
            assert lambda_exponent(x, y) < best
        assert abs(best - (EPSILON_STAR - x)) < 1e-12
    with pytest.raises(ValueError):
        lambda_exponent(0.3, 0.3)
    with pytest.raises(ValueError):
        lambda_exponent(-0.1, 0.0)


def test_lambda_concavity_in_y():
    for x in (0.0, 0.08):
        ys = [0.02 * i for i in range(1, 20) if x + 0.02 * i + 0.02 <= 0.5]
        for y1 in ys:
            for y2 in ys:
                mid = lambda_exponent(x, (y1 + y2) / 2)
                assert lambda_exponent(x, y1) + lambda_exponent(x, y2) <= 2 * mid + 1e-12


def test_epsilon_star():
    assert abs(epsilon_star() - (math.log2(3) - 1.5)) < 1e-15
    assert abs(epsilon_star() - 0.085) < 5e-4
    assert abs(epsilon_star_numeric() - epsilon_star()) < 1e-9


def test_epsilon_prime_finite():
    # limits: eps' -> (1+eps)(1-delta)/2 - 1/2
    assert abs(epsilon_prime_finite(0.3, 0.01, 4000) - 0.1435) < 1e-3
    assert abs(epsilon_prime_finite(0.05, 0.01, 4000) - 0.0198) < 1e-3


def test_classify_regime():
    van = classify_regime(0.3, 0.01, 64)
    assert van.regime == "vanishing"
    assert van.exponent is not None and van.exponent < 0
    assert van.R_exact == exact_R(64, van.w_ub)
    assert sum(van.a_terms) == van.R_exact
    div = classify_regime(0.05, 0.01, 64)
    assert div.regime == "diverging" and div.exponent is None
    # boundary window: pick eps so that eps' lands within 1e-3 of eps*
    target = EPSILON_STAR
    n, delta = 64, 0.01
    a = (1 - delta) * 0.5 * n
    log2_log_np = math.log2(2.0**a + n)
    eps = (target + 0.5) * n / log2_log_np - 1.0
    assert classify_regime(eps, delta, n).regime == "boundary"


def test_rate_loss_vanishing_regime_decreases():
    # eps' = 0.2 > eps*: exact_R decreases over n = 32, 48, 64
    rs = [exact_R(n, 2 ** round(0.7 * n)) for n in (32, 48, 64)]
    assert rs[0] > rs[1] > rs[2]


def test_rate_loss_diverging_regime_increases():
    rs = [exact_R(n, 2 ** round(0.52 * n)) for n in (32, 48, 64)]
    assert rs[0] < rs[1] < rs[2]


def test_rate_loss_slope():
    slope = rate_loss_slope(64, 0.2)
    assert abs(slope - (EPSILON_STAR - 0.2)) <= 0.05


def test_fraction_below():
    assert fraction_below(G2, 4, 16) == 1
    assert fraction_below(G2, 10, 100) == Fraction(848, 1024)
    # Prop-2 trend at threshold (log2 N)^2
    vals = [fraction_below(G2, n, n * n) for n in (10, 20, 30)]
    assert vals[0] > vals[1] > vals[2]


def test_binom_tail():
    assert binom_tail_ge(4, 0) == 1
    assert binom_tail_ge(4, 5) == 0
    assert binom_tail_ge(4, 3) == Fraction(5, 16)


def test_log2_R_float_path_matches_exact():
    from polarldgm.weightstats import log2_R

    n, n_lub = 2100, 1500  # past the exact-rational threshold: float tail path
    approx = log2_R(n, n_lub)
    exact = log2_fraction(exact_R(n, 2**n_lub))
    assert abs(approx - exact) < 1e-6
