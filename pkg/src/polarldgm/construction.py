"""Code construction: bit-channel reliability, information sets, sparse
generators extracted from kernel Kronecker powers, and the column-splitting
algorithm with its exact rate-loss report."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._scengine import ScEngine, encode_batch
from .channels import BEC, BSC, ChannelModel, channel_label, llr_pairs, parse_channel
from .gf2 import BitMatrix, int_span_contains
from .kernels import Kernel

DEFAULT_SEED = 0x5EED
DEFAULT_BSC_TRIALS = 100_000
_MC_BATCH = 4096  # fixed so the random stream never depends on call pattern


@dataclass(frozen=True)
class CodeSpec:
    """Full description of a code built from kernel^{kron n} x I_{n'}.

    n' is astronomically large by design, so it is carried only in log form:
    log2_nprime = N^((1-delta) * E).
    """

    kernel: Kernel
    n: int
    delta: float
    K: int
    info_set: tuple[int, ...]
    selection_channel: ChannelModel

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0 < self.delta:
            raise ValueError("delta must be positive")
        big_n = self.kernel.l**self.n
        if not 0 < self.K <= big_n:
            raise ValueError(f"K must lie in 1..{big_n}")
        if len(self.info_set) != self.K or len(set(self.info_set)) != self.K:
            raise ValueError("info_set must hold exactly K distinct indices")
        if any(not 0 <= i < big_n for i in self.info_set):
            raise ValueError("info_set indices out of range")
        if tuple(sorted(self.info_set)) != self.info_set:
            raise ValueError("info_set must be sorted")

    @property
    def N(self) -> int:
        return self.kernel.l**self.n

    @property
    def rate(self) -> float:
        return self.K / self.N

    @property
    def log2_nprime(self) -> float:
        return float(self.N) ** ((1.0 - self.delta) * self.kernel.exponent)

    @property
    def frozen_set(self) -> tuple[int, ...]:
        info = set(self.info_set)
        return tuple(i for i in range(self.N) if i not in info)

    def frozen_values(self) -> dict[int, int]:
        return {i: 0 for i in self.frozen_set}


def log_blocklength(spec: CodeSpec) -> float:
    """log2(N') = N^((1-delta) E) + log2(N), the sparsity benchmark."""
    return spec.log2_nprime + math.log2(spec.N)


# ---------------------------------------------------------------------------
# Bit-channel reliability
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _erasure_profile(matrix: BitMatrix) -> tuple[tuple[int, ...], ...]:
    """counts[i][m] = number of unerased-column subsets of size m for which
    input bit i is NOT determined given bits < i (exact BEC bit channels).

    Bit i is determined when its indicator vector (within rows i..l-1) lies
    in the span of the kernel columns restricted to those rows and to the
    unerased positions.
    """
    l = matrix.cols
    counts = [[0] * (l + 1) for _ in range(l)]
    for i in range(l):
        depth = l - i
        cols = []
        for j in range(l):
            bits = 0
            for k in range(depth):
                bits |= matrix.entry(i + k, j) << k
            cols.append(bits)
        for unerased in range(1 << l):
            sub = [cols[j] for j in range(l) if (unerased >> j) & 1]
            if not int_span_contains(sub, 1):
                counts[i][unerased.bit_count()] += 1
    return tuple(tuple(c) for c in counts)


def bec_bit_channels(kernel: Kernel, z: float) -> list[float]:
    """Exact erasure probabilities of the l bit channels after one kernel step."""
    if not 0.0 <= z <= 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1], got {z}")
    profile = _erasure_profile(kernel.matrix)
    l = kernel.l
    out = []
    for i in range(l):
        total = 0.0
        for m in range(l + 1):
            if profile[i][m]:
                total += profile[i][m] * z ** (l - m) * (1.0 - z) ** m
        out.append(total)
    return out


def bec_reliabilities(kernel: Kernel, n: int, z: float) -> np.ndarray:
    """Exact per-bit-channel erasure probabilities after n recursion levels."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= z <= 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1], got {z}")
    profile = _erasure_profile(kernel.matrix)
    l = kernel.l
    values = np.array([z], dtype=np.float64)
    for _ in range(n):
        # children of parent p occupy slots p*l .. p*l + l - 1
        nxt = np.empty(values.size * l, dtype=np.float64)
        for i in range(l):
            acc = np.zeros_like(values)
            for m in range(l + 1):
                if profile[i][m]:
                    acc += profile[i][m] * values ** (l - m) * (1.0 - values) ** m
            nxt[i::l] = acc
        values = nxt
    return values


def bsc_reliability_estimates(
    kernel: Kernel,
    n: int,
    q: float,
    trials: int = DEFAULT_BSC_TRIALS,
    seed: int = DEFAULT_SEED,
) -> np.ndarray:
    """Monte Carlo genie-aided SC error-rate estimate per bit channel.

    Random messages are transmitted over BSC(q); each bit decision is made
    with the true prefix fed back, and decision errors are counted per
    position. Deterministic given seed.
    """
    if not 0.0 <= q < 0.5:
        raise ValueError(f"crossover probability must lie in [0, 1/2), got {q}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    big_n = kernel.l**n
    engine = ScEngine(kernel, n)
    frozen_mask = np.zeros(big_n, dtype=bool)
    frozen_vals = np.zeros(big_n, dtype=np.uint8)
    channel = BSC(q)
    errors = np.zeros(big_n, dtype=np.int64)
    done = 0
    batch_index = 0
    while done < trials:
        b = min(_MC_BATCH, trials - done)
        rng = np.random.default_rng(np.random.SeedSequence(entropy=(int(seed), batch_index)))
        u = rng.integers(0, 2, size=(b, big_n), dtype=np.uint8)
        x = encode_batch(kernel, n, u)
        y = x ^ (rng.random((b, big_n)) < q).astype(np.uint8)
        _, err = engine.decode(llr_pairs(y, channel), frozen_mask, frozen_vals, genie_u=u)
        errors += err.sum(axis=0)
        done += b
        batch_index += 1
    return errors / float(trials)


def channel_reliabilities(
    kernel: Kernel,
    n: int,
    channel: ChannelModel,
    trials: int = DEFAULT_BSC_TRIALS,
    seed: int = DEFAULT_SEED,
) -> np.ndarray:
    """Reliability proxy per bit channel: exact for BEC, Monte Carlo for BSC."""
    if isinstance(channel, BEC):
        return bec_reliabilities(kernel, n, float(channel.z))
    return bsc_reliability_estimates(kernel, n, float(channel.q), trials, seed)


def select_info_set(reliabilities: Sequence[float], k: int) -> tuple[int, ...]:
    """Indices of the K smallest values; ties break toward the smaller index."""
    if k > len(reliabilities):
        raise ValueError(f"K={k} exceeds {len(reliabilities)} channels")
    order = sorted(range(len(reliabilities)), key=lambda i: (reliabilities[i], i))
    return tuple(sorted(order[:k]))


def make_code_spec(
    kernel: Kernel,
    n: int,
    channel: ChannelModel | str,
    rate: float | None = None,
    k: int | None = None,
    delta: float = 0.1,
    trials: int = DEFAULT_BSC_TRIALS,
    seed: int = DEFAULT_SEED,
) -> CodeSpec:
    """Build a CodeSpec by ranking bit channels and keeping the best K."""
    if isinstance(channel, str):
        channel = parse_channel(channel)
    big_n = kernel.l**n
    if k is None:
        if rate is None:
            raise ValueError("one of rate or k is required")
        k = round(rate * big_n)
    if not 0 < k <= big_n:
        raise ValueError(f"K={k} out of range for N={big_n}")
    rel = channel_reliabilities(kernel, n, channel, trials, seed)
    info = select_info_set(rel.tolist(), k)
    return CodeSpec(kernel=kernel, n=n, delta=delta, K=k, info_set=info, selection_channel=channel)


# ---------------------------------------------------------------------------
# Sparse generators and the splitting algorithm
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SparseGenerator:
    """K x cols generator stored column-wise as sorted row-index lists."""

    rows: int
    cols: int
    columns: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if len(self.columns) != self.cols:
            raise ValueError("cols does not match number of column lists")
        for col in self.columns:
            if any(not 0 <= r < self.rows for r in col):
                raise ValueError("row index out of range")
            if any(a >= b for a, b in zip(col, col[1:])):
                raise ValueError("column row lists must be strictly increasing")

    def column_weights(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.columns)

    def max_column_weight(self) -> int:
        return max((len(c) for c in self.columns), default=0)

    def encode(self, u: np.ndarray) -> np.ndarray:
        """Multiply message(s) by the generator over GF(2); u is (K,) or (B, K)."""
        msg = np.asarray(u, dtype=np.uint8)
        squeeze = msg.ndim == 1
        if squeeze:
            msg = msg[None, :]
        if msg.shape[1] != self.rows:
            raise ValueError(f"message length must be {self.rows}")
        out = np.zeros((msg.shape[0], self.cols), dtype=np.uint8)
        for j, col in enumerate(self.columns):
            if col:
                out[:, j] = msg[:, list(col)].sum(axis=1) & 1
        return out[0] if squeeze else out

    def to_dict(self) -> dict:
        return {"rows": self.rows, "cols": self.cols, "columns": [list(c) for c in self.columns]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "SparseGenerator":
        return cls(
            rows=int(data["rows"]),
            cols=int(data["cols"]),
            columns=tuple(tuple(int(r) for r in col) for col in data["columns"]),
        )


@dataclass(frozen=True)
class SplitReport:
    """Outcome of the splitting algorithm."""

    w_ub: int
    original_cols: int
    extra_cols: int
    R: Fraction
    piece_map: tuple[tuple[int, ...], ...]


def build_generator(kernel: Kernel, n: int, info_set: Iterable[int]) -> SparseGenerator:
    """Rows of kernel^{kron n} indexed by info_set, stored column-sparse.

    Column entries are derived positionally from base-l digits, via the
    Kronecker factorization of each column, so the full matrix is never
    materialized.
    """
    l = kernel.l
    big_n = l**n
    info = tuple(sorted(info_set))
    if any(not 0 <= i < big_n for i in info):
        raise ValueError("info_set indices out of range")
    if len(set(info)) != len(info):
        raise ValueError("info_set has duplicates")
    kcols = [kernel.matrix.column(j).bits for j in range(l)]
    mask = 0
    for i in info:
        mask |= 1 << i
    local = {g: p for p, g in enumerate(info)}
    columns = []
    for j in range(big_n):
        digits = []
        jj = j
        for _ in range(n):
            jj, d = divmod(jj, l)
            digits.append(d)
        digits.reverse()
        col = 1
        width = 1
        for d in digits:
            nxt = 0
            rest = col
            while rest:
                low = rest & -rest
                p = low.bit_length() - 1
                nxt |= kcols[d] << (p * l)
                rest ^= low
            col = nxt
            width *= l
        sel = col & mask
        rows = []
        while sel:
            low = sel & -sel
            rows.append(local[low.bit_length() - 1])
            sel ^= low
        columns.append(tuple(rows))
    return SparseGenerator(rows=len(info), cols=big_n, columns=tuple(columns))


def split(g: SparseGenerator, w_ub: int) -> tuple[SparseGenerator, SplitReport]:
    """Replace every column of weight W > w_ub by ceil(W / w_ub) pieces.

    Pieces take runs of w_ub ones in increasing row order (lowest rows
    first) and replace the original column in place, so chunk locality is
    preserved. Exact multiples produce exactly W / w_ub pieces: a trailing
    all-zero piece would be a useless codeword bit.
    """
    if w_ub < 1:
        raise ValueError("w_ub must be >= 1")
    new_columns: list[tuple[int, ...]] = []
    piece_map: list[tuple[int, ...]] = []
    extra = 0
    for col in g.columns:
        w = len(col)
        if w <= w_ub:
            piece_map.append((len(new_columns),))
            new_columns.append(col)
            continue
        pieces = [col[s : s + w_ub] for s in range(0, w, w_ub)]
        piece_map.append(tuple(range(len(new_columns), len(new_columns) + len(pieces))))
        new_columns.extend(pieces)
        extra += len(pieces) - 1
    ratio = Fraction(extra, g.cols) if g.cols else Fraction(0)
    gen = SparseGenerator(rows=g.rows, cols=len(new_columns), columns=tuple(new_columns))
    return gen, SplitReport(w_ub, g.cols, extra, ratio, tuple(piece_map))


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def spec_to_dict(spec: CodeSpec) -> dict:
    return {
        "kernel": spec.kernel.matrix.to_lists(),
        "n": spec.n,
        "N": spec.N,
        "delta": spec.delta,
        "log2_nprime": spec.log2_nprime,
        "K": spec.K,
        "rate": spec.rate,
        "info_set": list(spec.info_set),
        "channel": channel_label(spec.selection_channel),
    }


def spec_from_dict(data: Mapping) -> CodeSpec:
    kern = Kernel.from_matrix(BitMatrix.from_rows(data["kernel"]))
    return CodeSpec(
        kernel=kern,
        n=int(data["n"]),
        delta=float(data["delta"]),
        K=int(data["K"]),
        info_set=tuple(int(i) for i in data["info_set"]),
        selection_channel=parse_channel(data["channel"]),
    )
