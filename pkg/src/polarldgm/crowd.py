"""Crowdsourced label learning over unreliable workers: LDPC compression of
Bernoulli labels, LDGM query encoding, BSC worker noise, two-stage decoding,
and comparison against the information-theoretic query lower bound."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._scengine import ScEngine, encode_batch
from .channels import BSC, binary_entropy, llr_pairs
from .construction import (
    SparseGenerator,
    SplitReport,
    bsc_reliability_estimates,
    build_generator,
    select_info_set,
    split,
)
from .gf2 import BitMatrix
from .kernels import Kernel, kernel_by_name
from .simulate import collapse_piece_pairs, _frozen_arrays


def lower_bound_m_bsc(n: int, p: float, q: float) -> float:
    """Information-theoretic query lower bound n * H_b(p) / (1 - H_b(q))."""
    if not 0 <= q < 0.5:
        raise ValueError("q must lie in [0, 1/2)")
    return n * binary_entropy(p) / (1.0 - binary_entropy(q))


@dataclass(frozen=True)
class QuerySchemeParams:
    """Problem instance: n Ber(p) labels, BSC(q) workers, LDPC slack zeta."""

    n: int
    p: float
    q: float
    zeta: float
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0.0 < self.p < 0.5:
            raise ValueError("p must lie in (0, 1/2)")
        if not 0.0 <= self.q < 0.5:
            raise ValueError("q must lie in [0, 1/2)")
        if not 0.0 < self.zeta < 1.0:
            raise ValueError("zeta must lie in (0, 1)")


# ---------------------------------------------------------------------------
# LDPC compression matrix
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LdpcMatrix:
    """Sparse m x n parity-check matrix with constant row weight."""

    m: int
    n: int
    row_weight: int
    rows: tuple[tuple[int, ...], ...]

    def check_index(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.int64)

    def row_masks(self) -> list[int]:
        return [sum(1 << j for j in row) for row in self.rows]

    def column_weights(self) -> np.ndarray:
        counts = np.zeros(self.n, dtype=np.int64)
        for row in self.rows:
            for j in row:
                counts[j] += 1
        return counts

    def syndrome(self, x: np.ndarray) -> np.ndarray:
        return x[self.check_index()].sum(axis=1).astype(np.uint8) & 1

    def as_bitmatrix(self) -> BitMatrix:
        return BitMatrix(tuple(self.row_masks()), self.n)


def ldpc_row_count(n: int, p: float, zeta: float) -> int:
    """m = ceil(n * (H_b(p) + zeta * (1 - H_b(p))))."""
    hb = binary_entropy(p)
    return math.ceil(n * (hb + zeta * (1.0 - hb)))


def gen_ldpc(
    n: int,
    zeta: float,
    p: float,
    seed: int,
    row_weight_factor: float = 3.0,
) -> LdpcMatrix:
    """Seeded regular-row-weight ensemble with near-uniform column weights.

    Row weight is exactly ceil(row_weight_factor * log2(1/zeta)); edges are
    dealt by a permutation-socket construction and repaired until no row
    touches the same column twice. The factor-3 default keeps column weights
    at 3 and up: column-weight-2 graphs trap syndrome BP in near-codewords
    and never reach perfect recovery at these sizes.
    """
    if not 0.0 < zeta < 1.0:
        raise ValueError("zeta must lie in (0, 1)")
    if not 0.0 < p < 0.5:
        raise ValueError("p must lie in (0, 1/2)")
    m = ldpc_row_count(n, p, zeta)
    if m >= n:
        raise ValueError(f"compression requires m < n, got m={m}, n={n}")
    w_r = math.ceil(row_weight_factor * math.log2(1.0 / zeta))
    if w_r < 1 or w_r > n:
        raise ValueError(f"infeasible row weight {w_r} for n={n}")
    edges = m * w_r
    if edges < n:
        raise ValueError("infeasible degrees: some item would never be queried")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(int(seed), 0x1D9C)))
    base, rem = divmod(edges, n)
    degrees = np.full(n, base, dtype=np.int64)
    degrees[rng.permutation(n)[:rem]] += 1
    sockets = np.repeat(np.arange(n, dtype=np.int64), degrees)
    rng.shuffle(sockets)
    grid = sockets.reshape(m, w_r)
    _repair_duplicate_edges(grid, rng)
    rows = tuple(tuple(sorted(int(v) for v in grid[i])) for i in range(m))
    return LdpcMatrix(m=m, n=n, row_weight=w_r, rows=rows)


def _repair_duplicate_edges(grid: np.ndarray, rng: np.random.Generator, max_sweeps: int = 200) -> None:
    m, w = grid.shape
    for _ in range(max_sweeps):
        srt = np.sort(grid, axis=1)
        bad = np.flatnonzero((srt[:, 1:] == srt[:, :-1]).any(axis=1))
        if bad.size == 0:
            return
        for i in bad:
            row = grid[i]
            seen: set[int] = set()
            for k in range(w):
                if int(row[k]) in seen:
                    j = int(rng.integers(m))
                    kk = int(rng.integers(w))
                    row[k], grid[j, kk] = grid[j, kk], row[k]
                else:
                    seen.add(int(row[k]))
    raise RuntimeError("could not remove duplicate edges; degrees too dense")


# ---------------------------------------------------------------------------
# Query matrix
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QueryMatrix:
    """Queries as item subsets: query i is the support of column i of H^T G*."""

    m_prime: int
    n_items: int
    max_items: int
    row_ints: tuple[int, ...] = field(repr=False)

    def items(self, i: int) -> tuple[int, ...]:
        bits = self.row_ints[i]
        out = []
        while bits:
            low = bits & -bits
            out.append(low.bit_length() - 1)
            bits ^= low
        return tuple(out)

    def respond(self, labels: np.ndarray) -> np.ndarray:
        """Correct responses Y = X^T (H^T G*) for a 0/1 label vector."""
        x_int = _pack_bits(labels)
        return np.array([(q & x_int).bit_count() & 1 for q in self.row_ints], dtype=np.uint8)

    def dump(self, path: str) -> None:
        with open(path, "w", encoding="ascii") as fh:
            for i in range(self.m_prime):
                fh.write(" ".join(str(j) for j in self.items(i)) + "\n")


def _pack_bits(bits: np.ndarray) -> int:
    arr = np.asarray(bits, dtype=np.uint8)
    return int.from_bytes(np.packbits(arr, bitorder="little").tobytes(), "little")


def build_query_matrix(h: LdpcMatrix, gstar: SparseGenerator) -> QueryMatrix:
    """Support of each column of H^T G* over GF(2): query i asks the XOR of
    the labels it touches, and its item count is at most w_r * w_ub."""
    if gstar.rows != h.m:
        raise ValueError(f"generator rows ({gstar.rows}) must equal LDPC rows ({h.m})")
    masks = h.row_masks()
    q_ints = []
    max_items = 0
    for col in gstar.columns:
        acc = 0
        for r in col:
            acc ^= masks[r]
        q_ints.append(acc)
        max_items = max(max_items, acc.bit_count())
    return QueryMatrix(m_prime=gstar.cols, n_items=h.n, max_items=max_items, row_ints=tuple(q_ints))


# ---------------------------------------------------------------------------
# Syndrome belief propagation (stage-2 source decoding)
# ---------------------------------------------------------------------------

_LLR_CLIP = 50.0
_TANH_CLIP = 1.0 - 1e-15


def bp_syndrome_decode(
    h: LdpcMatrix,
    syndrome: np.ndarray,
    p: float,
    max_iters: int = 100,
) -> tuple[np.ndarray, bool]:
    """Recover a Ber(p) vector from its parity syndrome via sum-product BP.

    Channel-free priors log((1-p)/p); flooding schedule (all checks, then all
    variables); stops early once the syndrome matches.
    """
    idx = h.check_index()
    m, w = idx.shape
    prior = math.log((1.0 - p) / p)
    sign_s = (1.0 - 2.0 * syndrome.astype(np.float64))[:, None]
    v2c = np.full((m, w), prior, dtype=np.float64)
    x_hat = np.zeros(h.n, dtype=np.uint8)
    for _ in range(max_iters):
        t = np.tanh(0.5 * v2c)
        left = np.ones_like(t)
        for k in range(1, w):
            left[:, k] = left[:, k - 1] * t[:, k - 1]
        right = np.ones_like(t)
        for k in range(w - 2, -1, -1):
            right[:, k] = right[:, k + 1] * t[:, k + 1]
        ext = np.clip(sign_s * left * right, -_TANH_CLIP, _TANH_CLIP)
        c2v = 2.0 * np.arctanh(ext)
        totals = np.zeros(h.n, dtype=np.float64)
        np.add.at(totals, idx.ravel(), c2v.ravel())
        posterior = prior + totals
        x_hat = (posterior < 0.0).astype(np.uint8)
        if np.array_equal(x_hat[idx].sum(axis=1) & 1, syndrome):
            return x_hat, True
        v2c = np.clip(posterior[idx] - c2v, -_LLR_CLIP, _LLR_CLIP)
    return x_hat, False


# ---------------------------------------------------------------------------
# Scheme assembly and end-to-end simulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CrowdMargins:
    """Desk-scale design slack: the LDGM block code runs at a fraction of
    capacity, and the LDPC compression rate must clear a floor above the
    source entropy for BP decodability."""

    capacity_fraction: float = 0.8
    ldpc_redundancy: float = 1.15
    row_weight_factor: float = 3.0
    reliability_trials: int = 100_000


@dataclass(frozen=True)
class BlockSegment:
    """A run of identical LDGM blocks carrying consecutive syndrome bits.

    The last block may carry fewer bits than k; its unused (least significant
    by position order) information slots are frozen to zero.
    """

    levels: int
    k: int
    info_set: tuple[int, ...]
    generator: SparseGenerator  # split per-block generator
    split_report: SplitReport
    n_blocks: int
    last_k: int

    @property
    def bits(self) -> int:
        return (self.n_blocks - 1) * self.k + self.last_k

    @property
    def cols(self) -> int:
        return self.n_blocks * self.generator.cols


@dataclass(frozen=True)
class CrowdCode:
    """Assembled query scheme: LDPC compressor plus split block LDGM code.

    Syndrome bits pack into uniform main blocks; the remainder goes into a
    shorter tail segment so block quantization does not inflate the query
    count past the design budget."""

    params: QuerySchemeParams
    margins: CrowdMargins
    kernel: Kernel
    w_ub: int
    ldpc: LdpcMatrix
    segments: tuple[BlockSegment, ...]
    queries: QueryMatrix

    @property
    def m_prime(self) -> int:
        return sum(seg.cols for seg in self.segments)

    @property
    def design_m_prime(self) -> float:
        rate = self.margins.capacity_fraction * BSC(self.params.q).capacity
        return self.ldpc.m / rate


def _build_segment(
    kernel: Kernel,
    levels: int,
    k: int,
    bits: int,
    q: float,
    w_ub: int,
    margins: CrowdMargins,
    seed: int,
) -> BlockSegment:
    rel = bsc_reliability_estimates(kernel, levels, q, margins.reliability_trials, seed)
    info = select_info_set(rel.tolist(), k)
    gen = build_generator(kernel, levels, info)
    sgen, report = split(gen, w_ub)
    n_blocks = -(-bits // k)
    last_k = bits - (n_blocks - 1) * k
    return BlockSegment(
        levels=levels,
        k=k,
        info_set=info,
        generator=sgen,
        split_report=report,
        n_blocks=n_blocks,
        last_k=last_k,
    )


def build_crowd_code(
    params: QuerySchemeParams,
    block_levels: int = 11,
    tail_levels: int = 8,
    w_ub: int = 1024,
    margins: CrowdMargins | None = None,
    kernel: Kernel | None = None,
) -> CrowdCode:
    """Design the full scheme: LDPC rows from the compression formula, LDGM
    block sizes from the capacity fraction, split generators, query matrix."""
    margins = margins or CrowdMargins()
    kernel = kernel or kernel_by_name("G2")
    h = gen_ldpc(params.n, params.zeta, params.p, params.seed, margins.row_weight_factor)
    floor = margins.ldpc_redundancy * params.n * binary_entropy(params.p)
    if h.m < floor:
        raise ValueError(
            f"compression rate too aggressive for BP: m={h.m} below the "
            f"{margins.ldpc_redundancy}x entropy floor {floor:.0f}"
        )
    cap = BSC(params.q).capacity
    rate = margins.capacity_fraction * cap
    k_main = round(rate * kernel.l**block_levels)
    if not 0 < k_main < kernel.l**block_levels:
        raise ValueError("degenerate block code; adjust block_levels")
    segments: list[BlockSegment] = []
    n_main = h.m // k_main
    leftover = h.m - n_main * k_main
    if n_main:
        segments.append(
            _build_segment(kernel, block_levels, k_main, n_main * k_main, params.q, w_ub, margins, params.seed)
        )
    if leftover:
        t_levels = block_levels if tail_levels is None else tail_levels
        k_tail = min(leftover, round(rate * kernel.l**t_levels))
        if k_tail < 1:
            raise ValueError("degenerate tail code; adjust tail_levels")
        segments.append(
            _build_segment(kernel, t_levels, k_tail, leftover, params.q, w_ub, margins, params.seed)
        )
    columns: list[tuple[int, ...]] = []
    offset = 0
    for seg in segments:
        for b in range(seg.n_blocks):
            base = offset + b * seg.k
            for col in seg.generator.columns:
                columns.append(tuple(base + r for r in col if base + r < h.m))
        offset += seg.bits
    gstar = SparseGenerator(rows=h.m, cols=len(columns), columns=tuple(columns))
    queries = build_query_matrix(h, gstar)
    return CrowdCode(
        params=params,
        margins=margins,
        kernel=kernel,
        w_ub=w_ub,
        ldpc=h,
        segments=tuple(segments),
        queries=queries,
    )


@dataclass(frozen=True)
class CrowdReport:
    trials: int
    success_rate: float
    stage1_success_rate: float
    stage2_success_rate: float
    m: int
    m_prime: int
    w_r: int
    w_ub: int | None
    max_items: int
    m_bsc: float
    ratio: float
    ideal_m_prime: float
    ideal_ratio: float
    design_m_prime: float


def simulate_crowd(
    params: QuerySchemeParams,
    code: CrowdCode | None = None,
    trials: int = 50,
    bp_iters: int = 100,
) -> CrowdReport:
    """End-to-end trials: sample labels, compress, encode queries, add worker
    noise, decode the syndrome (stage 1), then recover the labels by syndrome
    BP (stage 2). With code=None the identity scheme is used: queries are the
    LDPC rows themselves and stage 1 passes observations through."""
    if code is not None and code.params != params:
        raise ValueError("code was built for different parameters")
    if code is None:
        h = gen_ldpc(params.n, params.zeta, params.p, params.seed)
        return _simulate_identity(params, h, trials, bp_iters)
    return _simulate_ldgm(params, code, trials, bp_iters)


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=(int(seed), 0xC0FFEE, trial)))


def _report(
    params: QuerySchemeParams,
    trials: int,
    successes: int,
    stage1: int,
    stage2: int,
    m: int,
    m_prime: int,
    w_r: int,
    w_ub: int | None,
    max_items: int,
    design_m_prime: float,
) -> CrowdReport:
    m_bsc = lower_bound_m_bsc(params.n, params.p, params.q)
    ideal = m / (1.0 - binary_entropy(params.q))
    return CrowdReport(
        trials=trials,
        success_rate=successes / trials,
        stage1_success_rate=stage1 / trials,
        stage2_success_rate=stage2 / trials,
        m=m,
        m_prime=m_prime,
        w_r=w_r,
        w_ub=w_ub,
        max_items=max_items,
        m_bsc=m_bsc,
        ratio=m_prime / m_bsc,
        ideal_m_prime=ideal,
        ideal_ratio=ideal / m_bsc,
        design_m_prime=design_m_prime,
    )


def _simulate_identity(
    params: QuerySchemeParams, h: LdpcMatrix, trials: int, bp_iters: int
) -> CrowdReport:
    successes = stage1 = stage2 = 0
    q = params.q
    for t in range(trials):
        rng = _trial_rng(params.seed, t)
        labels = (rng.random(params.n) < params.p).astype(np.uint8)
        s = h.syndrome(labels)
        z = s ^ (rng.random(s.shape) < q).astype(np.uint8)
        ok1 = bool(np.array_equal(z, s))
        stage1 += ok1
        x_hat, _ = bp_syndrome_decode(h, z, params.p, bp_iters)
        ok2 = bool(np.array_equal(x_hat, labels))
        stage2 += ok2
        successes += ok2
    return _report(
        params, trials, successes, stage1, stage2,
        h.m, h.m, h.row_weight, None, h.row_weight, float(h.m),
    )


class _SegmentCoder:
    """Precomputed encode/decode machinery for one segment."""

    def __init__(self, kernel: Kernel, seg: BlockSegment):
        self.seg = seg
        self.kernel = kernel
        self.big_n = kernel.l**seg.levels
        self.engine = ScEngine(kernel, seg.levels)
        self.info = np.array(seg.info_set, dtype=np.int64)
        frozen_full = {i: 0 for i in range(self.big_n) if i not in set(seg.info_set)}
        frozen_last = dict(frozen_full)
        for t in range(seg.last_k, seg.k):
            frozen_last[seg.info_set[t]] = 0
        self.mask_full, self.vals_full = _frozen_arrays(self.big_n, frozen_full)
        self.mask_last, self.vals_last = _frozen_arrays(self.big_n, frozen_last)
        pm = seg.split_report.piece_map
        self.piece_map = pm
        self.multi = [(j, pm[j]) for j in range(len(pm)) if len(pm[j]) > 1]
        self.single_src = np.array([j for j in range(len(pm)) if len(pm[j]) == 1], dtype=np.int64)
        self.single_dst = np.array([pm[j][0] for j in range(len(pm)) if len(pm[j]) == 1], dtype=np.int64)

    def encode(self, bits: np.ndarray) -> np.ndarray:
        """bits: this segment's syndrome slice, length seg.bits; returns the
        split codeword as (n_blocks, split cols)."""
        seg = self.seg
        msg = np.zeros(seg.n_blocks * seg.k, dtype=np.uint8)
        msg[: seg.bits] = bits
        msg = msg.reshape(seg.n_blocks, seg.k)
        u = np.zeros((seg.n_blocks, self.big_n), dtype=np.uint8)
        u[:, self.info] = msg
        cw = encode_batch(self.kernel, seg.levels, u)
        sent = np.zeros((seg.n_blocks, seg.generator.cols), dtype=np.uint8)
        sent[:, self.single_dst] = cw[:, self.single_src]
        for j, ids in self.multi:
            acc = np.zeros(seg.n_blocks, dtype=np.uint8)
            for pid in ids[:-1]:
                piece = msg[:, list(seg.generator.columns[pid])].sum(axis=1).astype(np.uint8) & 1
                sent[:, pid] = piece
                acc ^= piece
            sent[:, ids[-1]] = cw[:, j] ^ acc
        return sent

    def decode(self, received: np.ndarray, channel: BSC) -> np.ndarray:
        """received: (n_blocks, split cols) BSC symbols; returns the decoded
        syndrome slice of length seg.bits."""
        seg = self.seg
        pairs = collapse_piece_pairs(llr_pairs(received, channel), self.piece_map)
        if seg.last_k < seg.k and seg.n_blocks > 1:
            full, _ = self.engine.decode(pairs[:-1], self.mask_full, self.vals_full)
            last, _ = self.engine.decode(pairs[-1:], self.mask_last, self.vals_last)
            u_hat = np.concatenate([full, last], axis=0)
        elif seg.last_k < seg.k:
            u_hat, _ = self.engine.decode(pairs, self.mask_last, self.vals_last)
        else:
            u_hat, _ = self.engine.decode(pairs, self.mask_full, self.vals_full)
        return u_hat[:, self.info].reshape(-1)[: seg.bits]


def correct_responses(code: CrowdCode, labels: np.ndarray) -> np.ndarray:
    """Noiseless responses via the encoding path (HX)^T G*; bit-for-bit equal
    to code.queries.respond(labels), which computes X^T (H^T G*)."""
    s = code.ldpc.syndrome(np.asarray(labels, dtype=np.uint8))
    out = []
    pos = 0
    for seg in code.segments:
        coder = _SegmentCoder(code.kernel, seg)
        out.append(coder.encode(s[pos : pos + seg.bits]).reshape(-1))
        pos += seg.bits
    return np.concatenate(out)


def _simulate_ldgm(
    params: QuerySchemeParams, code: CrowdCode, trials: int, bp_iters: int
) -> CrowdReport:
    h = code.ldpc
    channel = BSC(params.q)
    coders = [_SegmentCoder(code.kernel, seg) for seg in code.segments]
    successes = stage1 = stage2 = 0
    for t in range(trials):
        rng = _trial_rng(params.seed, t)
        labels = (rng.random(params.n) < params.p).astype(np.uint8)
        s = h.syndrome(labels)
        s_hat = np.empty_like(s)
        pos = 0
        for coder in coders:
            bits = s[pos : pos + coder.seg.bits]
            sent = coder.encode(bits)
            received = sent ^ (rng.random(sent.shape) < params.q).astype(np.uint8)
            s_hat[pos : pos + coder.seg.bits] = coder.decode(received, channel)
            pos += coder.seg.bits
        ok1 = bool(np.array_equal(s_hat, s))
        stage1 += ok1
        x_hat, _ = bp_syndrome_decode(h, s_hat, params.p, bp_iters)
        ok2 = bool(np.array_equal(x_hat, labels))
        stage2 += ok2
        successes += ok2
    return _report(
        params, trials, successes, stage1, stage2,
        h.m, code.m_prime, h.row_weight, code.w_ub, code.queries.max_items,
        code.design_m_prime,
    )
