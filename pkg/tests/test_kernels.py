"""Kernel validity, partial distances, polarization rates, catalog, search."""

import math

import numpy as np
import pytest

from polarldgm.errors import RefusalError
from polarldgm.gf2 import BitMatrix
from polarldgm.kernels import (
    Kernel,
    catalog,
    lambda_max_limit,
    partial_distances,
    g2_block_kernel,
    rate_of_polarization,
    search_min_sparsity,
    sparsity_ratio,
    min_side_for_order,
    ones_column_kernel,
    validate_kernel,
)


def test_validate_kernel():
    assert validate_kernel(BitMatrix.identity(2)) is False  # upper triangular
    assert validate_kernel(BitMatrix.from_rows([[1, 0], [1, 1]])) is True
    assert validate_kernel(BitMatrix.from_rows([[1, 1], [1, 1]])) is False  # singular
    with pytest.raises(ValueError):
        validate_kernel(BitMatrix.from_rows([[1, 0, 1], [0, 1, 0]]))


def test_partial_distances_catalog():
    cat = catalog()
    assert cat["G2"].partial_distances == (1, 2)
    assert cat["G4*"].partial_distances == (1, 2, 2, 4)
    assert cat["G4'"].partial_distances == (1, 2, 2, 2)
    assert cat["G3*"].partial_distances == (1, 2, 2)
    assert cat["G3'"].partial_distances == (1, 2, 2)


def test_partial_distances_rejects_singular():
    with pytest.raises(ValueError):
        partial_distances(BitMatrix.from_rows([[1, 1], [1, 1]]))


def test_rate_of_polarization_values():
    cat = catalog()
    assert abs(cat["G2"].exponent - 0.5) < 1e-12
    assert abs(cat["G3*"].exponent - (2.0 / 3.0) * math.log(2, 3)) < 1e-12
    assert abs(cat["G4'"].exponent - 0.375) < 1e-12
    assert abs(rate_of_polarization(cat["G3'"].matrix) - cat["G3'"].exponent) < 1e-15


def test_kernel_invariants():
    for name, k in catalog().items():
        assert validate_kernel(k.matrix), name
        assert 0.0 < k.exponent <= 1.0
        assert all(1 <= d <= k.l for d in k.partial_distances)
        assert k.partial_distances[-1] == k.matrix.row(k.l - 1).weight


def test_from_matrix_rejects_nonpolarizing():
    # not upper triangular, invertible, but all partial distances are 1
    swap = BitMatrix.from_rows([[0, 1], [1, 0]])
    assert validate_kernel(swap) is True
    with pytest.raises(ValueError):
        Kernel.from_matrix(swap)
    with pytest.raises(ValueError):
        Kernel.from_matrix(BitMatrix.identity(3))


def test_families():
    cat = catalog()
    assert g2_block_kernel(2).matrix == cat["G2"].matrix
    assert g2_block_kernel(4).partial_distances == (1, 1, 2, 2)
    assert ones_column_kernel(4).matrix == cat["G4'"].matrix
    assert ones_column_kernel(3).matrix == cat["G3'"].matrix
    # ones-column family: D_1 = 1, all later partial distances are 2
    for l in (2, 3, 5, 6):
        dists = ones_column_kernel(l).partial_distances
        assert dists[0] == 1 and all(d == 2 for d in dists[1:])
    with pytest.raises(ValueError):
        g2_block_kernel(3)
    with pytest.raises(ValueError):
        ones_column_kernel(1)


def test_sparsity_ratio_values():
    cat = catalog()
    assert abs(sparsity_ratio(cat["G2"]) - 1.0) < 1e-12
    assert abs(sparsity_ratio(cat["G3'"]) - math.log2(3) / 2.0) < 1e-12
    assert abs(sparsity_ratio(cat["G4'"]) - 2.0 / 3.0) < 1e-12
    assert abs(sparsity_ratio(cat["G4*"]) - (1.5 + math.log(3, 4)) / 2.0) < 1e-12


def test_lambda_max_limits():
    cat = catalog()
    expect = {"G2": 2.0, "G3*": 1.5, "G4*": math.log2(3), "G3'": 1.5 / math.log(2, 3), "G4'": 8.0 / 3.0}
    for name, val in expect.items():
        assert abs(lambda_max_limit(cat[name]) - val) < 1e-12


def test_column_permutation_invariance():
    rng = np.random.default_rng(31)
    for name, k in catalog().items():
        perm = rng.permutation(k.l)
        rows = [[k.matrix.entry(i, int(j)) for j in perm] for i in range(k.l)]
        permuted = Kernel.from_matrix(BitMatrix.from_rows(rows))
        assert permuted.partial_distances == k.partial_distances, name
        assert abs(permuted.exponent - k.exponent) < 1e-12
        assert sorted(permuted.column_weights) == sorted(k.column_weights)


def test_ones_column_ratio_decreasing():
    vals = [sparsity_ratio(ones_column_kernel(l)) for l in range(3, 11)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_min_side_for_order():
    assert min_side_for_order(1.0, 0.01) == 3
    # smallest l with log2(l)/(l-1)/0.99 < 0.5
    l = min_side_for_order(0.5, 0.01)
    assert math.log2(l) / (l - 1) / 0.99 < 0.5
    assert math.log2(l - 1) / (l - 2) / 0.99 >= 0.5
    with pytest.raises(ValueError):
        min_side_for_order(0.0, 0.1)


def test_search_small():
    k2, r2 = search_min_sparsity(2)
    assert abs(r2 - 1.0) < 1e-12
    k3, r3 = search_min_sparsity(3)
    assert abs(r3 - math.log2(3) / 2.0) < 1e-9
    g3p = catalog()["G3'"]
    assert k3.partial_distances == g3p.partial_distances
    assert sorted(k3.column_weights) == sorted(g3p.column_weights)
    with pytest.raises(RefusalError):
        search_min_sparsity(5)
