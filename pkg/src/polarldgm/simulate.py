"""Decoders and error-probability estimation: successive cancellation for
general kernels, block and split-aware decoding, exact brute-force ML/SC
oracles, and the Monte Carlo block-error harness."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from ._scengine import ScEngine, encode_batch
from .channels import BEC, BSC, ChannelModel, ERASED, llr_pairs, transmit
from .construction import CodeSpec, SparseGenerator
from .errors import RefusalError
from .gf2 import int_span_contains
from .kernels import Kernel

__all__ = [
    "BEC",
    "BSC",
    "BlockDecodeResult",
    "ChannelModel",
    "DecodeResult",
    "McResult",
    "block_decode",
    "collapse_piece_pairs",
    "exact_pe_ml",
    "exact_pe_sc",
    "mc_bler",
    "sc_decode",
    "split_combine_decode",
    "transmit",
    "union_bound_log2",
    "wilson_interval",
]

_MC_BATCH = 2048  # fixed so random streams never depend on call pattern


@dataclass(frozen=True)
class DecodeResult:
    """Decoder output: estimated information bits, optional block-error flag
    (when the transmitted message is known), optional per-bit flags."""

    info_estimate: np.ndarray
    block_error: bool | None = None
    per_bit_flags: np.ndarray | None = None


def _frozen_arrays(big_n: int, frozen_values: Mapping[int, int]) -> tuple[np.ndarray, np.ndarray]:
    mask = np.zeros(big_n, dtype=bool)
    vals = np.zeros(big_n, dtype=np.uint8)
    for pos, val in frozen_values.items():
        if not 0 <= pos < big_n:
            raise ValueError(f"frozen position {pos} out of range")
        mask[pos] = True
        vals[pos] = val & 1
    return mask, vals


def _info_positions(big_n: int, frozen_values: Mapping[int, int]) -> np.ndarray:
    frozen = set(frozen_values)
    return np.array([i for i in range(big_n) if i not in frozen], dtype=np.int64)


def sc_decode(
    kernel: Kernel,
    n: int,
    frozen_values: Mapping[int, int],
    observations: np.ndarray,
    channel: ChannelModel,
    true_info: np.ndarray | None = None,
) -> DecodeResult:
    """Successive-cancellation decode of one observation vector.

    At every kernel stage the likelihood of the next input bit marginalizes
    all later stage bits with uniform priors; hard-decision ties resolve to 0.
    """
    obs = np.asarray(observations)
    big_n = kernel.l**n
    if obs.shape != (big_n,):
        raise ValueError(f"expected {big_n} observations, got {obs.shape}")
    mask, vals = _frozen_arrays(big_n, frozen_values)
    engine = ScEngine(kernel, n)
    u_hat, _ = engine.decode(llr_pairs(obs[None, :], channel), mask, vals)
    info = _info_positions(big_n, frozen_values)
    est = u_hat[0, info]
    err = None
    if true_info is not None:
        err = bool((est != np.asarray(true_info, dtype=np.uint8)).any())
    return DecodeResult(info_estimate=est, block_error=err)


@dataclass(frozen=True)
class BlockDecodeResult:
    chunks: tuple[DecodeResult, ...]
    block_error: bool | None


def block_decode(
    spec: CodeSpec,
    chunk_observations: np.ndarray,
    channel: ChannelModel | None = None,
    true_infos: np.ndarray | None = None,
) -> BlockDecodeResult:
    """Decode independent chunks (one SC decoder per kernel-power block).

    The overall block errs iff any chunk errs. chunk_observations is
    (n_chunks, l^n); true_infos, when given, is (n_chunks, K).
    """
    ch = channel if channel is not None else spec.selection_channel
    obs = np.asarray(chunk_observations)
    if obs.ndim != 2 or obs.shape[1] != spec.N:
        raise ValueError(f"chunk observations must be (n_chunks, {spec.N})")
    mask, vals = _frozen_arrays(spec.N, spec.frozen_values())
    engine = ScEngine(spec.kernel, spec.n)
    u_hat, _ = engine.decode(llr_pairs(obs, ch), mask, vals)
    info = np.array(spec.info_set, dtype=np.int64)
    results = []
    any_err: bool | None = None
    for c in range(obs.shape[0]):
        est = u_hat[c, info]
        err = None
        if true_infos is not None:
            err = bool((est != np.asarray(true_infos[c], dtype=np.uint8)).any())
            any_err = bool(any_err) or err
        results.append(DecodeResult(info_estimate=est, block_error=err))
    return BlockDecodeResult(chunks=tuple(results), block_error=any_err)


def union_bound_log2(spec: CodeSpec | float, log2_pe_chunk: float) -> float:
    """log2 of the union bound n' * per-chunk P_e."""
    log2_nprime = spec.log2_nprime if isinstance(spec, CodeSpec) else float(spec)
    return log2_nprime + log2_pe_chunk


def collapse_piece_pairs(pairs: np.ndarray, piece_map: Sequence[Sequence[int]]) -> np.ndarray:
    """Combine per-piece likelihood pairs into per-original-column pairs.

    The original coded bit is the XOR of its piece bits, so pieces combine
    check-node style; over the BEC this is exact (erased unless all pieces
    are known), over the BSC two pieces behave like crossover 2q(1-q).
    """
    singles = np.array([ids[0] for ids in piece_map], dtype=np.int64)
    out = pairs[:, singles, :].copy()
    for j, ids in enumerate(piece_map):
        if len(ids) <= 1:
            continue
        acc = pairs[:, ids[0], :]
        for pid in ids[1:]:
            nxt = pairs[:, pid, :]
            e0 = np.logaddexp(acc[:, 0] + nxt[:, 0], acc[:, 1] + nxt[:, 1])
            e1 = np.logaddexp(acc[:, 0] + nxt[:, 1], acc[:, 1] + nxt[:, 0])
            acc = np.stack([e0, e1], axis=-1)
        out[:, j, :] = acc
    return out


def split_combine_decode(
    kernel: Kernel,
    n: int,
    frozen_values: Mapping[int, int],
    piece_map: Sequence[Sequence[int]],
    observations: np.ndarray,
    channel: ChannelModel,
    true_info: np.ndarray | None = None,
) -> DecodeResult:
    """Decode a split code by collapsing each column's pieces, then running SC.

    This is a practical decoder: collapsing discards the joint information in
    the pieces, so it is a heuristic and is not guaranteed to dominate the
    unsplit code the way the exact SC oracle does.
    """
    obs = np.asarray(observations)
    big_n = kernel.l**n
    if len(piece_map) != big_n:
        raise ValueError(f"piece map must cover {big_n} original columns")
    total = sum(len(ids) for ids in piece_map)
    if obs.shape != (total,):
        raise ValueError(f"expected {total} observations, got {obs.shape}")
    pairs = collapse_piece_pairs(llr_pairs(obs[None, :], channel), piece_map)
    mask, vals = _frozen_arrays(big_n, frozen_values)
    engine = ScEngine(kernel, n)
    u_hat, _ = engine.decode(pairs, mask, vals)
    info = _info_positions(big_n, frozen_values)
    est = u_hat[0, info]
    err = None
    if true_info is not None:
        err = bool((est != np.asarray(true_info, dtype=np.uint8)).any())
    return DecodeResult(info_estimate=est, block_error=err)


# ---------------------------------------------------------------------------
# Exact brute-force oracles (arbitrary-precision rationals)
# ---------------------------------------------------------------------------

ORACLE_MAX_ROWS = 10
ORACLE_MAX_COLS_BSC = 14
ORACLE_MAX_COLS_BEC = 9


def _check_oracle_size(gen: SparseGenerator, ch: ChannelModel) -> None:
    if gen.rows > ORACLE_MAX_ROWS:
        raise RefusalError(f"exact oracle limited to K <= {ORACLE_MAX_ROWS}, got {gen.rows}")
    limit = ORACLE_MAX_COLS_BEC if isinstance(ch, BEC) else ORACLE_MAX_COLS_BSC
    if gen.cols > limit:
        raise RefusalError(f"exact oracle limited to {limit} columns for this channel, got {gen.cols}")


def _column_masks(gen: SparseGenerator) -> list[int]:
    return [sum(1 << r for r in col) for col in gen.columns]


def _codeword_table(gen: SparseGenerator) -> list[int]:
    """Packed codeword (bit j = coded bit j) for every message 0..2^K-1."""
    masks = _column_masks(gen)
    table = []
    for u in range(1 << gen.rows):
        bits = 0
        for j, m in enumerate(masks):
            bits |= ((u & m).bit_count() & 1) << j
        table.append(bits)
    return table


def _resolve_order(gen: SparseGenerator, order: Sequence[int] | None) -> tuple[int, ...]:
    if order is None:
        return tuple(range(gen.rows))
    order = tuple(order)
    if sorted(order) != list(range(gen.rows)):
        raise ValueError("order must be a permutation of the row indices")
    return order


def exact_pe_ml(gen: SparseGenerator, ch: ChannelModel) -> Fraction:
    """Exact ML block-error probability with a uniform message prior.

    Ties break toward the lexicographically smaller message; the true message
    losing a tie counts as an error, which with a uniform prior equals the
    optimal MAP error Sum_y max_u P(y|u) / 2^K.
    """
    _check_oracle_size(gen, ch)
    k, n = gen.rows, gen.cols
    cw = _codeword_table(gen)
    if isinstance(ch, BSC):
        q = Fraction(ch.q)
        pq = [q**d * (1 - q) ** (n - d) for d in range(n + 1)]
        corr = Fraction(0)
        for y in range(1 << n):
            corr += max(pq[(y ^ c).bit_count()] for c in cw)
        return 1 - corr / (1 << k)
    z = Fraction(ch.z)
    corr = Fraction(0)
    for unerased in range(1 << n):
        e = n - unerased.bit_count()
        weight = z**e * (1 - z) ** unerased.bit_count()
        if weight == 0:
            continue
        distinct = len({c & unerased for c in cw})
        corr += weight * Fraction(distinct, 1 << k)
    return 1 - corr


def exact_pe_sc(
    gen: SparseGenerator, ch: ChannelModel, order: Sequence[int] | None = None
) -> Fraction:
    """Exact genie-aided SC block-error probability: each bit decision is a
    MAP estimate given the channel output and the true earlier bits, with
    ties resolved to 0; the block errs when any decision is wrong."""
    _check_oracle_size(gen, ch)
    seq = _resolve_order(gen, order)
    if isinstance(ch, BSC):
        return _exact_pe_sc_bsc(gen, Fraction(ch.q), seq)
    return _exact_pe_sc_bec(gen, Fraction(ch.z), seq)


def _exact_pe_sc_bsc(gen: SparseGenerator, q: Fraction, order: tuple[int, ...]) -> Fraction:
    k, n = gen.rows, gen.cols
    cw = _codeword_table(gen)
    pq = [q**d * (1 - q) ** (n - d) for d in range(n + 1)]
    messages = list(range(1 << k))

    def walk(py: list[Fraction], members: list[int], t: int) -> Fraction:
        if t == k:
            return Fraction(0)
        bit = order[t]
        zeros = [u for u in members if not (u >> bit) & 1]
        ones = [u for u in members if (u >> bit) & 1]
        s0 = sum((py[u] for u in zeros), Fraction(0))
        s1 = sum((py[u] for u in ones), Fraction(0))
        decision_zero = s0 >= s1  # tie resolves to 0
        if decision_zero:
            return s1 + walk(py, zeros, t + 1)
        return s0 + walk(py, ones, t + 1)

    total_err = Fraction(0)
    for y in range(1 << n):
        py = [pq[(y ^ cw[u]).bit_count()] for u in messages]
        total_err += walk(py, messages, 0)
    return total_err / (1 << k)


def _exact_pe_sc_bec(gen: SparseGenerator, z: Fraction, order: tuple[int, ...]) -> Fraction:
    """Over the BEC, ambiguity of a bit decision does not depend on the
    message, so each erasure pattern contributes 1 - 2^-(ambiguous bits):
    the decoder errs iff some ambiguous (tie to 0) position carries a 1."""
    k, n = gen.rows, gen.cols
    pos_of = {row: t for t, row in enumerate(order)}
    # column bitsets in decode-order row coordinates
    cols = [sum(1 << pos_of[r] for r in col) for col in gen.columns]
    pe = Fraction(0)
    for unerased in range(1 << n):
        e = n - unerased.bit_count()
        weight = z**e * (1 - z) ** unerased.bit_count()
        if weight == 0:
            continue
        live = [cols[j] for j in range(n) if (unerased >> j) & 1]
        ambiguous = 0
        for t in range(k):
            shifted = [c >> t for c in live if (c >> t) != 0]
            if not int_span_contains(shifted, 1):
                ambiguous += 1
        pe += weight * (1 - Fraction(1, 1 << ambiguous))
    return pe


# ---------------------------------------------------------------------------
# Monte Carlo block-error harness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class McResult:
    estimate: float
    interval: tuple[float, float]  # Wilson 95%
    errors: int
    trials: int


def wilson_interval(errors: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = errors / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
    lo = 0.0 if errors == 0 else max(0.0, center - half)
    hi = 1.0 if errors == trials else min(1.0, center + half)
    return (lo, hi)


def mc_bler(
    code: CodeSpec | SparseGenerator,
    ch: ChannelModel,
    trials: int,
    seed: int,
) -> McResult:
    """Monte Carlo block-error rate; deterministic given seed.

    Per-trial randomness derives from (seed, batch index) with a fixed
    internal batch size, so results do not depend on how work is scheduled.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if isinstance(code, CodeSpec):
        errors = _mc_errors_polar(code, ch, trials, seed)
    elif isinstance(code, SparseGenerator):
        errors = _mc_errors_generator(code, ch, trials, seed)
    else:
        raise TypeError(f"unsupported code object {type(code)!r}")
    return McResult(errors / trials, wilson_interval(errors, trials), errors, trials)


def _noise(rng: np.random.Generator, x: np.ndarray, ch: ChannelModel) -> np.ndarray:
    if isinstance(ch, BEC):
        return np.where(rng.random(x.shape) < float(ch.z), np.uint8(ERASED), x)
    return x ^ (rng.random(x.shape) < float(ch.q)).astype(np.uint8)


def _mc_errors_polar(spec: CodeSpec, ch: ChannelModel, trials: int, seed: int) -> int:
    engine = ScEngine(spec.kernel, spec.n)
    mask, vals = _frozen_arrays(spec.N, spec.frozen_values())
    info = np.array(spec.info_set, dtype=np.int64)
    errors = 0
    done = 0
    batch_index = 0
    while done < trials:
        b = min(_MC_BATCH, trials - done)
        rng = np.random.default_rng(np.random.SeedSequence(entropy=(int(seed), batch_index)))
        u_info = rng.integers(0, 2, size=(b, spec.K), dtype=np.uint8)
        u = np.zeros((b, spec.N), dtype=np.uint8)
        u[:, info] = u_info
        y = _noise(rng, encode_batch(spec.kernel, spec.n, u), ch)
        u_hat, _ = engine.decode(llr_pairs(y, ch), mask, vals)
        errors += int((u_hat[:, info] != u_info).any(axis=1).sum())
        done += b
        batch_index += 1
    return errors


def _mc_errors_generator(gen: SparseGenerator, ch: ChannelModel, trials: int, seed: int) -> int:
    """Plain sequential SC on an arbitrary small generator (float likelihoods)."""
    _check_oracle_size(gen, ch)
    k, n = gen.rows, gen.cols
    cw = _codeword_table(gen)
    messages = list(range(1 << k))
    errors = 0
    for t in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=(int(seed), t)))
        u_bits = rng.integers(0, 2, size=k, dtype=np.uint8)
        u = int(sum(int(b) << i for i, b in enumerate(u_bits)))
        x = np.array([(cw[u] >> j) & 1 for j in range(n)], dtype=np.uint8)
        y = _noise(rng, x, ch)
        py = _float_likelihoods(cw, y, ch, n)
        members = messages
        decoded = 0
        for t_bit in range(k):
            zeros = [m for m in members if not (m >> t_bit) & 1]
            ones = [m for m in members if (m >> t_bit) & 1]
            s0 = sum(py[m] for m in zeros)
            s1 = sum(py[m] for m in ones)
            if s0 >= s1:
                members = zeros
            else:
                members = ones
                decoded |= 1 << t_bit
        errors += decoded != u
    return errors


def _float_likelihoods(cw: list[int], y: np.ndarray, ch: ChannelModel, n: int) -> list[float]:
    if isinstance(ch, BSC):
        q = float(ch.q)
        ybits = int(sum(int(b) << j for j, b in enumerate(y)))
        return [q ** ((ybits ^ c).bit_count()) * (1 - q) ** (n - (ybits ^ c).bit_count()) for c in cw]
    z = float(ch.z)
    known_mask = 0
    known_bits = 0
    erased = 0
    for j, s in enumerate(y):
        if s == ERASED:
            erased += 1
        else:
            known_mask |= 1 << j
            known_bits |= int(s) << j
    base = z**erased * (1 - z) ** (n - erased)
    return [base if (c & known_mask) == known_bits else 0.0 for c in cw]
