"""Polarizing kernels: validity, partial distances, polarization rate, catalog, and sparsity search."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import RefusalError
from .gf2 import BitMatrix, coset_min_weight, rank


@dataclass(frozen=True)
class Kernel:
    """An l x l polarizing matrix with its derived weight/distance data."""

    l: int
    matrix: BitMatrix
    partial_distances: tuple[int, ...]
    exponent: float
    column_weights: tuple[int, ...]

    @classmethod
    def from_matrix(cls, m: BitMatrix) -> "Kernel":
        if not validate_kernel(m):
            raise ValueError("matrix is not a polarizing kernel (singular or upper triangular)")
        dists = partial_distances(m)
        expo = _exponent_from_distances(dists)
        if expo <= 0.0:
            raise ValueError("matrix does not polarize (all partial distances are 1)")
        return cls(m.cols, m, dists, expo, m.column_weights())


def validate_kernel(m: BitMatrix) -> bool:
    """Full rank and literally not upper triangular (some 1 below the diagonal)."""
    if m.nrows != m.cols:
        raise ValueError(f"kernel must be square, got {m.shape}")
    l = m.cols
    below = any(m.entry(i, j) for i in range(1, l) for j in range(i))
    return below and rank(m) == l


def partial_distances(m: BitMatrix) -> tuple[int, ...]:
    """D_i = distance from row i to span(rows i+1..l); D_l = weight of the last row."""
    if m.nrows != m.cols:
        raise ValueError(f"kernel must be square, got {m.shape}")
    l = m.cols
    if rank(m) != l:
        raise ValueError("singular matrix has no partial distances")
    dists = []
    for i in range(l):
        tail = [m.row(k) for k in range(i + 1, l)]
        dists.append(coset_min_weight(m.row(i), tail))
    return tuple(dists)


def _exponent_from_distances(dists: tuple[int, ...]) -> float:
    l = len(dists)
    return sum(math.log(d, l) for d in dists) / l


def rate_of_polarization(m: BitMatrix) -> float:
    """E(G) = (1/l) * sum_i log_l D_i."""
    return _exponent_from_distances(partial_distances(m))


def sparsity_ratio(k: Kernel) -> float:
    """sum_i log w_i / sum_i log D_i: the large-n, small-delta limit of the
    most-common-weight sparsity order."""
    num = math.fsum(sorted(math.log(w) for w in k.column_weights))
    den = math.fsum(sorted(math.log(d) for d in k.partial_distances))
    return num / den


def lambda_max_limit(k: Kernel) -> float:
    """Limiting sparsity order of the maximum column weight: log_l(max w_i) / E."""
    return math.log(max(k.column_weights), k.l) / k.exponent


_G2 = [[1, 0], [1, 1]]
_G3_STAR = [[0, 1, 0], [1, 1, 0], [1, 0, 1]]
_G4_STAR = [[1, 0, 0, 0], [0, 1, 0, 1], [0, 0, 1, 1], [1, 1, 1, 1]]
_G3_PRIME = [[1, 0, 0], [1, 1, 0], [1, 0, 1]]
_G4_PRIME = [[1, 0, 0, 0], [1, 1, 0, 0], [1, 0, 1, 0], [1, 0, 0, 1]]

CATALOG_NAMES = ("G2", "G3*", "G4*", "G3'", "G4'")

_ALIASES = {
    "g2": "G2",
    "g3*": "G3*",
    "g3star": "G3*",
    "g4*": "G4*",
    "g4star": "G4*",
    "g3'": "G3'",
    "g3prime": "G3'",
    "g4'": "G4'",
    "g4prime": "G4'",
}


def catalog() -> dict[str, Kernel]:
    """The five named kernels used throughout the library."""
    return {
        "G2": Kernel.from_matrix(BitMatrix.from_rows(_G2)),
        "G3*": Kernel.from_matrix(BitMatrix.from_rows(_G3_STAR)),
        "G4*": Kernel.from_matrix(BitMatrix.from_rows(_G4_STAR)),
        "G3'": Kernel.from_matrix(BitMatrix.from_rows(_G3_PRIME)),
        "G4'": Kernel.from_matrix(BitMatrix.from_rows(_G4_PRIME)),
    }


def kernel_by_name(name: str) -> Kernel:
    key = _ALIASES.get(name.lower())
    if key is None:
        raise ValueError(f"unknown kernel name {name!r}; known: {', '.join(CATALOG_NAMES)}")
    return catalog()[key]


def g2_block_kernel(l: int) -> Kernel:
    """[[I, 0], [I, I]] block kernel of even side l; column weights at most 2."""
    if l < 2 or l % 2 != 0:
        raise ValueError("g2_block_kernel requires an even l >= 2")
    h = l // 2
    rows = []
    for i in range(h):
        rows.append(1 << i)
    for i in range(h):
        rows.append((1 << i) | (1 << (h + i)))
    return Kernel.from_matrix(BitMatrix(tuple(rows), l))


def ones_column_kernel(l: int) -> Kernel:
    """[[1, 0], [1-vector, I]] kernel: all-ones first column, geometric mean l^(1/l)."""
    if l < 2:
        raise ValueError("ones_column_kernel requires l >= 2")
    rows = [1]
    for i in range(1, l):
        rows.append(1 | (1 << i))
    return Kernel.from_matrix(BitMatrix(tuple(rows), l))


def min_side_for_order(r: float, delta: float) -> int:
    """Smallest l whose ones-column kernel has sparsity_ratio/(1 - delta) < r.

    That family's ratio is log2(l)/(l-1), which tends to 0, so the scan
    terminates for any r.
    """
    if not 0 < r <= 1:
        raise ValueError("r must lie in (0, 1]")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    l = 2
    while True:
        ratio = math.log2(l) / (l - 1)
        if ratio / (1.0 - delta) < r:
            return l
        l += 1


def search_min_sparsity(l: int) -> tuple[Kernel, float]:
    """Exhaustive scan of all 2^(l*l) matrices for the polarizing kernel with
    minimum sparsity_ratio; ties broken by lexicographically smallest
    row-major bit string."""
    if not 2 <= l <= 4:
        raise RefusalError(f"exhaustive search supported for 2 <= l <= 4, got {l}")
    best_key: tuple[float, tuple[int, ...]] | None = None
    best_kernel: Kernel | None = None
    ncells = l * l
    for code in range(1 << ncells):
        rows = tuple((code >> (l * i)) & ((1 << l) - 1) for i in range(l))
        m = BitMatrix(rows, l)
        if not validate_kernel(m):
            continue
        dists = partial_distances(m)
        if all(d == 1 for d in dists):
            continue  # exponent 0: does not polarize
        kern = Kernel(l, m, dists, _exponent_from_distances(dists), m.column_weights())
        ratio = sparsity_ratio(kern)
        lex = tuple(m.entry(i, j) for i in range(l) for j in range(l))
        key = (ratio, lex)
        if best_key is None or key < best_key:
            best_key = key
            best_kernel = kern
    assert best_kernel is not None and best_key is not None
    return best_kernel, best_key[0]
