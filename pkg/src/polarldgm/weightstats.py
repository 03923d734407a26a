"""Column-weight statistics of kernel Kronecker powers: exact distributions,
most-common/maximum weights, sparsity orders, the exact splitting rate loss
and its binomial-tail form, and the large-deviations regime classification."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .channels import binary_entropy
from .kernels import Kernel

#: critical threshold separating vanishing from diverging rate loss,
#: log2(3) - 3/2 = 1/6 - D(2/3 || 1/2) with base-2 divergence
EPSILON_STAR = math.log2(3.0) - 1.5

EXACT_TAIL_LIMIT = 2000  # rational binomial tails stay cheap well past this


@dataclass(frozen=True)
class WeightDistribution:
    """Exact multiset of column weights of kernel^{kron n}."""

    kernel_weights: tuple[int, ...]
    n: int
    entries: tuple[tuple[int, int], ...]  # (weight, multiplicity), ascending weight

    def as_dict(self) -> dict[int, int]:
        return dict(self.entries)

    @property
    def total(self) -> int:
        return sum(m for _, m in self.entries)


def weight_distribution(kernel: Kernel, n: int) -> WeightDistribution:
    """Multiplicative convolution of the kernel column weights, n times."""
    if n < 0:
        raise ValueError("n must be >= 0")
    counts: dict[int, int] = {1: 1}
    for _ in range(n):
        nxt: dict[int, int] = {}
        for value, mult in counts.items():
            for w in kernel.column_weights:
                nxt[value * w] = nxt.get(value * w, 0) + mult
        counts = nxt
    entries = tuple(sorted(counts.items()))
    return WeightDistribution(kernel.column_weights, n, entries)


def w_mc(kernel: Kernel, n: int) -> int:
    """Most common column weight; ties break toward the smaller weight."""
    if n < 1:
        raise ValueError("n must be >= 1")
    dist = weight_distribution(kernel, n)
    best_w, best_m = dist.entries[0]
    for w, m in dist.entries[1:]:
        if m > best_m:
            best_w, best_m = w, m
    return best_w


def w_max(kernel: Kernel, n: int) -> int:
    """Maximum column weight: (max_i w_i)^n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return max(kernel.column_weights) ** n


def log2_log_blocklength(kernel: Kernel, n: int, delta: float) -> float:
    """log2(log2 N') with log2 N' = N^((1-delta)E) + log2 N, overflow-safe."""
    a = (1.0 - delta) * kernel.exponent * n * math.log2(kernel.l)
    log2_n_term = math.log2(n * math.log2(kernel.l))
    if a > 500.0:
        # 2^a dwarfs log2 N; fold the remainder in log space
        return a + math.log2(1.0 + 2.0 ** (log2_n_term - a))
    return math.log2(2.0**a + n * math.log2(kernel.l))


def sparsity_orders(kernel: Kernel, n: int, delta: float) -> tuple[float, float]:
    """(lambda_MC, lambda_max): weight statistics measured in base log2(N')."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    bench = log2_log_blocklength(kernel, n, delta)
    lam_mc = math.log2(w_mc(kernel, n)) / bench
    lam_max = math.log2(w_max(kernel, n)) / bench
    return lam_mc, lam_max


def fraction_below(kernel: Kernel, n: int, threshold: int) -> Fraction:
    """Exact fraction of columns of kernel^{kron n} with weight <= threshold."""
    if n < 1:
        raise ValueError("n must be >= 1")
    dist = weight_distribution(kernel, n)
    hits = sum(m for w, m in dist.entries if w <= threshold)
    return Fraction(hits, kernel.l**n)


# ---------------------------------------------------------------------------
# Exact rate loss for the G2 kernel (weights follow X(n) ~ Bin(n, 1/2))
# ---------------------------------------------------------------------------


def binom_tail_ge(n: int, t: int) -> Fraction:
    """Pr(Bin(n, 1/2) >= t), exact."""
    if t <= 0:
        return Fraction(1)
    if t > n:
        return Fraction(0)
    return Fraction(sum(comb(n, j) for j in range(t, n + 1)), 2**n)


def exact_R(n: int, w_ub: int) -> Fraction:
    """Splitting rate loss for the full G2^{kron n}: sum over k of
    Pr(X(n) > log2(k * w_ub)), k = 1 .. 2^n / w_ub, as an exact rational.

    Terms are grouped by the bit length of k * w_ub, so arbitrary (not just
    power-of-two) thresholds stay cheap.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 1 <= w_ub <= 2**n:
        raise ValueError(f"w_ub must lie in 1..2^{n}")
    k_max = (2**n) // w_ub
    total = 0
    b = w_ub.bit_length()
    tail = sum(comb(n, j) for j in range(b, n + 1))  # |{X >= b}| * 2^n weight
    while True:
        lo = max(1, -((-(1 << (b - 1))) // w_ub))  # ceil(2^(b-1) / w_ub)
        if lo > k_max:
            break
        hi = min(k_max, ((1 << b) - 1) // w_ub)
        total += (hi - lo + 1) * tail
        if b <= n:
            tail -= comb(n, b)
        b += 1
    return Fraction(total, 2**n)


def exact_R_direct(n: int, w_ub: int) -> Fraction:
    """Independent count of the same ratio straight from the weight multiset:
    sum over columns of ceil(W / w_ub) - 1, divided by 2^n."""
    if not 1 <= w_ub <= 2**n:
        raise ValueError(f"w_ub must lie in 1..2^{n}")
    extras = 0
    for k in range(n + 1):
        w = 2**k
        extras += comb(n, k) * ((w + w_ub - 1) // w_ub - 1)
    return Fraction(extras, 2**n)


def a_terms(n: int, n_lub: int) -> tuple[Fraction, ...]:
    """a_i = Pr(X(n) >= 1 + i + n_lub) * 2^i for i = 0 .. n - n_lub - 1."""
    if not 0 <= n_lub < n:
        raise ValueError("need 0 <= n_lub < n")
    return tuple(binom_tail_ge(n, 1 + i + n_lub) * 2**i for i in range(n - n_lub))


def log2_fraction(x: Fraction) -> float:
    if x == 0:
        return -math.inf
    return math.log2(x.numerator) - math.log2(x.denominator)


def log2_binom_tail_ge(n: int, t: int) -> float:
    """Float log2 Pr(Bin(n, 1/2) >= t) for n beyond the exact-rational range."""
    if t <= 0:
        return 0.0
    if t > n:
        return -math.inf
    terms = [math.lgamma(n + 1) - math.lgamma(j + 1) - math.lgamma(n - j + 1) for j in range(t, n + 1)]
    base = max(terms)
    acc = math.fsum(math.exp(v - base) for v in terms)
    return (base + math.log(acc)) / math.log(2.0) - n


def log2_R(n: int, w_ub_log2: int) -> float:
    """log2 of the rate loss for w_ub = 2^w_ub_log2; exact rationals while
    cheap, compensated log-domain summation beyond that."""
    if n <= EXACT_TAIL_LIMIT:
        return log2_fraction(exact_R(n, 2**w_ub_log2))
    vals = [log2_binom_tail_ge(n, 1 + i + w_ub_log2) + i for i in range(n - w_ub_log2)]
    base = max(vals)
    if base == -math.inf:
        return -math.inf
    return base + math.log2(math.fsum(2.0 ** (v - base) for v in vals))


def rate_loss_slope(n: int, epsilon_prime: float) -> float:
    """Empirical decay slope (1/n) log2 R at threshold w_ub = 2^round((1/2+eps')n)."""
    n_lub = round((0.5 + epsilon_prime) * n)
    if not 0 < n_lub < n:
        raise ValueError("threshold exponent out of range for this n")
    return log2_R(n, n_lub) / n


# ---------------------------------------------------------------------------
# Large-deviations exponent and regime classification
# ---------------------------------------------------------------------------


def lambda_exponent(x: float, y: float) -> float:
    """lambda(x, y) = -D(1/2 + x + y || 1/2) + y, divergence in bits."""
    if x < 0 or y < 0 or x + y > 0.5 + 1e-15:
        raise ValueError("need x, y >= 0 and x + y <= 1/2")
    p = min(0.5 + x + y, 1.0)
    return binary_entropy(p) - 1.0 + y


def epsilon_star() -> float:
    """Closed form of the critical threshold: log2(3) - 3/2."""
    return EPSILON_STAR


def epsilon_star_numeric(tol: float = 1e-12) -> float:
    """max_y lambda(0, y) by golden-section search (lambda is concave in y)."""
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    lo, hi = 0.0, 0.5
    c = hi - phi * (hi - lo)
    d = lo + phi * (hi - lo)
    fc, fd = lambda_exponent(0.0, c), lambda_exponent(0.0, d)
    while hi - lo > tol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - phi * (hi - lo)
            fc = lambda_exponent(0.0, c)
        else:
            lo, c, fc = c, d, fd
            d = lo + phi * (hi - lo)
            fd = lambda_exponent(0.0, d)
    return max(fc, fd)


def epsilon_prime_finite(epsilon: float, delta: float, n: int) -> float:
    """eps'(n) = (1 + eps) * log2(log2 N') / n - 1/2 for the G2 kernel,
    using the actual finite-n benchmark rather than its limit."""
    a = (1.0 - delta) * 0.5 * n
    if a > 500.0:
        log2_log_np = a + math.log2(1.0 + n * 2.0 ** (-a))
    else:
        log2_log_np = math.log2(2.0**a + n)
    return (1.0 + epsilon) * log2_log_np / n - 0.5


@dataclass(frozen=True)
class RateLossAnalysis:
    """Exact rate loss at finite n together with its asymptotic regime."""

    n: int
    w_ub: int
    n_lub: int
    epsilon: float
    epsilon_prime: float
    delta: float
    a_terms: tuple[Fraction, ...]
    R_exact: Fraction
    regime: str  # "vanishing" | "diverging" | "boundary"
    exponent: float | None  # epsilon_star - epsilon_prime, when vanishing
    empirical_slope: float | None


BOUNDARY_WINDOW = 1e-3


def classify_regime(epsilon: float, delta: float, n: int) -> RateLossAnalysis:
    """Instantiate the threshold at finite n, compute the exact loss, and
    label the regime by comparing eps' to the critical threshold."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    eps_prime = epsilon_prime_finite(epsilon, delta, n)
    n_lub = round((0.5 + eps_prime) * n)
    if not 0 < n_lub < n:
        raise ValueError(f"threshold 2^{n_lub} degenerate at n={n}; pick a larger n")
    w_ub = 2**n_lub
    terms = a_terms(n, n_lub)
    r_exact = exact_R(n, w_ub)
    slope = log2_fraction(r_exact) / n if r_exact > 0 else None
    if abs(eps_prime - EPSILON_STAR) < BOUNDARY_WINDOW:
        regime, exponent = "boundary", None
    elif eps_prime > EPSILON_STAR:
        regime, exponent = "vanishing", EPSILON_STAR - eps_prime
    else:
        regime, exponent = "diverging", None
    return RateLossAnalysis(
        n=n,
        w_ub=w_ub,
        n_lub=n_lub,
        epsilon=epsilon,
        epsilon_prime=eps_prime,
        delta=delta,
        a_terms=terms,
        R_exact=r_exact,
        regime=regime,
        exponent=exponent,
        empirical_slope=slope,
    )
