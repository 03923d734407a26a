"""Batched successive-cancellation engine for arbitrary polarizing kernels.

Likelihoods are carried as log-probability pairs so BEC erasures stay exact
and kernels of any side need no LLR approximations. All operations are
elementwise across the batch axis, so batch size never changes results.
"""

from __future__ import annotations

import numpy as np

from .kernels import Kernel


def encode_batch(kernel: Kernel, n: int, u: np.ndarray) -> np.ndarray:
    """Encode a (B, l^n) batch of messages: x = u * G^{kron n} over GF(2)."""
    l = kernel.l
    big_n = l**n
    x = np.array(u, dtype=np.uint8)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
    if x.shape[1] != big_n:
        raise ValueError(f"message length must be {big_n}, got {x.shape[1]}")
    g = np.array(kernel.matrix.to_lists(), dtype=np.uint8)
    batch = x.shape[0]
    for level in range(1, n + 1):
        blk = l**level
        v = x.reshape(batch, big_n // blk, l, blk // l)
        out = np.empty_like(v)
        for j1 in range(l):
            acc = None
            for i1 in range(l):
                if g[i1, j1]:
                    acc = v[:, :, i1, :].copy() if acc is None else acc ^ v[:, :, i1, :]
            out[:, :, j1, :] = acc
        x = out.reshape(batch, big_n)
    return x[0] if squeeze else x


class ScEngine:
    """SC decoding over G^{kron n} for one kernel, vectorized across a batch."""

    def __init__(self, kernel: Kernel, n: int):
        self.kernel = kernel
        self.n = n
        self.l = kernel.l
        self.N = kernel.l**n
        self.g = np.array(kernel.matrix.to_lists(), dtype=np.uint8)
        # scalar kernel-output bits for every (stage, hypothesis, tail) combination
        self._stage_terms: list[list[tuple[int, tuple[int, ...]]]] = []
        l = self.l
        for i1 in range(l):
            terms = []
            for b in (0, 1):
                for tail in range(1 << (l - i1 - 1)):
                    bits = []
                    for j1 in range(l):
                        bit = b & int(self.g[i1, j1])
                        for k in range(l - i1 - 1):
                            if (tail >> k) & 1:
                                bit ^= int(self.g[i1 + 1 + k, j1])
                        bits.append(bit)
                    terms.append((b, tuple(bits)))
            self._stage_terms.append(terms)

    def decode(
        self,
        pairs: np.ndarray,
        frozen_mask: np.ndarray,
        frozen_values: np.ndarray,
        genie_u: np.ndarray | None = None,
    ) -> tuple[np.ndarray, np.ndarray | None]:
        """Run SC over a (B, N, 2) batch of log-likelihood pairs.

        Returns (u_hat, err_flags). In genie mode every decision is compared
        to genie_u and the true bit is fed back, so err_flags are per-bit
        first-error indicators of the genie-aided decoder.
        """
        if pairs.shape[1] != self.N:
            raise ValueError(f"expected {self.N} observations, got {pairs.shape[1]}")
        batch = pairs.shape[0]
        self._u_hat = np.zeros((batch, self.N), dtype=np.uint8)
        self._err = None if genie_u is None else np.zeros((batch, self.N), dtype=bool)
        self._genie = genie_u
        self._frozen_mask = frozen_mask
        self._frozen_values = frozen_values
        self._pos = 0
        self._rec(pairs)
        u_hat, err = self._u_hat, self._err
        del self._u_hat, self._err, self._genie
        return u_hat, err

    def _rec(self, logp: np.ndarray) -> np.ndarray:
        batch, length = logp.shape[0], logp.shape[1]
        if length == 1:
            pos = self._pos
            self._pos += 1
            pair = logp[:, 0, :]
            if self._frozen_mask[pos]:
                u = np.full(batch, self._frozen_values[pos], dtype=np.uint8)
            else:
                u = (pair[:, 1] > pair[:, 0]).astype(np.uint8)  # tie resolves to 0
            if self._genie is not None:
                truth = self._genie[:, pos].astype(np.uint8)
                self._err[:, pos] = u != truth
                u = truth
            self._u_hat[:, pos] = u
            return u.reshape(batch, 1)
        l = self.l
        m = length // l
        lp = logp.reshape(batch, l, m, 2)
        decoded: list[np.ndarray] = []
        for i1 in range(l):
            child = self._marginalize(lp, decoded, i1)
            decoded.append(self._rec(child))
        out = np.empty((batch, l, m), dtype=np.uint8)
        for j1 in range(l):
            acc = None
            for i1 in range(l):
                if self.g[i1, j1]:
                    acc = decoded[i1].copy() if acc is None else acc ^ decoded[i1]
            out[:, j1, :] = acc
        return out.reshape(batch, length)

    def _marginalize(
        self, lp: np.ndarray, decoded: list[np.ndarray], i1: int
    ) -> np.ndarray:
        """Log-likelihood pair of stage-i1 input bits given earlier decisions,
        marginalizing the later stages with uniform priors."""
        l = self.l
        base: list[np.ndarray | None] = []
        for j1 in range(l):
            acc = None
            for i, y in enumerate(decoded):
                if self.g[i, j1]:
                    acc = y if acc is None else acc ^ y
            base.append(acc)
        e = [None, None]
        for b, bits in self._stage_terms[i1]:
            term = None
            for j1 in range(l):
                known = base[j1]
                if known is None:
                    sel = lp[:, j1, :, bits[j1]]
                else:
                    x = known ^ bits[j1] if bits[j1] else known
                    sel = np.where(x.astype(bool), lp[:, j1, :, 1], lp[:, j1, :, 0])
                term = sel if term is None else term + sel
            e[b] = term if e[b] is None else np.logaddexp(e[b], term)
        e0, e1 = e
        top = np.maximum(e0, e1)
        dead = ~np.isfinite(top)  # contradictory evidence after a wrong guess
        with np.errstate(invalid="ignore"):
            if dead.any():
                e0 = np.where(dead, 0.0, e0 - top)
                e1 = np.where(dead, 0.0, e1 - top)
            else:
                e0 = e0 - top
                e1 = e1 - top
        return np.stack([e0, e1], axis=-1)
