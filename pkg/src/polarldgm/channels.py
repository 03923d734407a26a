"""Binary-input memoryless symmetric channel models: BEC and BSC."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

Prob = Union[float, Fraction]

ERASED = 2  # ternary BEC output symbol


@dataclass(frozen=True)
class BEC:
    """Binary erasure channel with erasure probability z."""

    z: Prob

    def __post_init__(self) -> None:
        if not 0 <= self.z <= 1:
            raise ValueError(f"erasure probability must lie in [0, 1], got {self.z}")

    @property
    def capacity(self) -> float:
        return 1.0 - float(self.z)


@dataclass(frozen=True)
class BSC:
    """Binary symmetric channel with crossover probability q < 1/2."""

    q: Prob

    def __post_init__(self) -> None:
        if not 0 <= self.q < 0.5:
            raise ValueError(f"crossover probability must lie in [0, 1/2), got {self.q}")

    @property
    def capacity(self) -> float:
        return 1.0 - binary_entropy(float(self.q))


ChannelModel = Union[BEC, BSC]


def binary_entropy(p: float) -> float:
    """H_b(p) in bits, with H_b(0) = H_b(1) = 0."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def parse_channel(spec: str) -> ChannelModel:
    """Parse 'bec:<z>' or 'bsc:<q>'."""
    kind, _, value = spec.partition(":")
    if not value:
        raise ValueError(f"channel spec must look like bec:0.5 or bsc:0.1, got {spec!r}")
    param = float(value)
    kind = kind.lower()
    if kind == "bec":
        return BEC(param)
    if kind == "bsc":
        return BSC(param)
    raise ValueError(f"unknown channel kind {kind!r}")


def channel_label(ch: ChannelModel) -> str:
    if isinstance(ch, BEC):
        return f"bec:{float(ch.z)}"
    return f"bsc:{float(ch.q)}"


def transmit(codeword: np.ndarray, ch: ChannelModel, seed: int, index: int = 0) -> np.ndarray:
    """Pass bits through the channel; deterministic given (seed, index).

    BEC returns ternary symbols with ERASED = 2; BSC returns flipped bits.
    Accepts a (..., N) array of 0/1 and preserves its shape.
    """
    bits = np.asarray(codeword, dtype=np.uint8)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(int(seed), int(index))))
    if isinstance(ch, BEC):
        erased = rng.random(bits.shape) < float(ch.z)
        return np.where(erased, np.uint8(ERASED), bits)
    flips = rng.random(bits.shape) < float(ch.q)
    return bits ^ flips.astype(np.uint8)


def llr_pairs(observations: np.ndarray, ch: ChannelModel) -> np.ndarray:
    """Map channel symbols to log-likelihood pairs (..., 2) = (log P(y|0), log P(y|1)).

    Pairs are unnormalized: common per-symbol factors are dropped, so BEC
    erasures become exactly (0, 0) and known bits (0, -inf)/(-inf, 0).
    """
    obs = np.asarray(observations)
    out = np.zeros(obs.shape + (2,), dtype=np.float64)
    if isinstance(ch, BEC):
        out[..., 0] = np.where(obs == 1, -np.inf, 0.0)
        out[..., 1] = np.where(obs == 0, -np.inf, 0.0)
        return out
    q = float(ch.q)
    log_q = math.log(q) if q > 0 else -np.inf
    log_1q = math.log(1.0 - q)
    out[..., 0] = np.where(obs == 0, log_1q, log_q)
    out[..., 1] = np.where(obs == 0, log_q, log_1q)
    return out
