"""Floating-point SC / SCL / fast-SCL decoding.

The list engine walks a (possibly pruned) decoder tree. Interior nodes apply
the f/g updates; leaves either fork paths bit-by-bit (single-bit leaves) or
run a one-shot constituent decoder (rate-0, rate-1, repetition, single parity
check). The same walk drives the lookup-table decoders, which only swap the
message arithmetic and translate messages to LLRs at the leaves.

All constituent decoders use the hardware-friendly approximate path metric.
Candidate order is deterministic: parent path first, fork flag 0 before 1,
and ties in the pruning sort keep that order.
"""

from dataclasses import dataclass, field

import numpy as np

from .arith import f_exact, f_minsum, g_func, combine_bits, hard_decision, metric_increment
from .codes import PolarCode, polar_transform, extract_info_bits, crc_check
from .tree import DecoderTree, NodeKind, sc_tree


@dataclass(frozen=True)
class ListConfig:
    list_size: int = 8
    metric_mode: str = "approx"

    def __post_init__(self):
        if self.list_size < 1:
            raise ValueError("list size must be >= 1")
        if self.metric_mode not in ("approx", "exact"):
            raise ValueError(f"unknown metric mode {self.metric_mode!r}")


@dataclass
class DecodeResult:
    """Final list, best metric first. Rows of u_hats/x_hats are one candidate."""

    u_hats: np.ndarray
    x_hats: np.ndarray
    metrics: np.ndarray
    touched_decoding: set = field(default_factory=set)
    touched_translation: set = field(default_factory=set)

    def __len__(self):
        return self.metrics.size


def _stable_prune(flat_metrics: np.ndarray, keep: int) -> np.ndarray:
    """Indices of the ``keep`` smallest metrics; ties keep candidate order."""
    order = np.argsort(flat_metrics, kind="stable")
    return order[:keep]


def _fork_prune(metrics_keep, metrics_fork, list_size):
    """Interleave (parent-major, keep before fork) and prune.

    Returns (parent_idx, fork_flag, metrics) for the survivors.
    """
    cands = np.stack([metrics_keep, metrics_fork], axis=1).ravel()
    sel = _stable_prune(cands, min(list_size, cands.size))
    return sel // 2, (sel % 2).astype(np.uint8), cands[sel]


def decode_rate0(metrics, alpha):
    """All-frozen span: no forking, charge the hard-decision mismatch penalty."""
    alpha = np.atleast_2d(alpha)
    penalty = np.sum(np.where(alpha < 0, np.abs(alpha), 0.0), axis=1)
    parent = np.arange(alpha.shape[0])
    beta = np.zeros(alpha.shape, dtype=np.uint8)
    return parent, metrics + penalty, beta


def decode_rep(metrics, alpha, list_size):
    """Repetition span: each path forks to the all-zero and all-one word."""
    alpha = np.atleast_2d(alpha)
    mag = np.abs(alpha)
    pen0 = np.sum(np.where(alpha < 0, mag, 0.0), axis=1)
    pen1 = np.sum(np.where(alpha < 0, 0.0, mag), axis=1)
    parent, fork, mu = _fork_prune(metrics + pen0, metrics + pen1, list_size)
    beta = np.repeat(fork[:, None], alpha.shape[1], axis=1).astype(np.uint8)
    return parent, mu, beta


def decode_rate1(metrics, alpha, list_size):
    """All-information span: split on the min(L-1, size) least reliable bits."""
    alpha = np.atleast_2d(alpha)
    n_paths, size = alpha.shape
    mag = np.abs(alpha)
    order = np.argsort(mag, axis=1, kind="stable")
    beta = hard_decision(alpha)
    mu = np.asarray(metrics, dtype=np.float64).copy()
    parent = np.arange(n_paths)
    splits = min(list_size - 1, size)
    for step in range(splits):
        pos = order[:, step]
        cost = np.take_along_axis(mag, pos[:, None], axis=1)[:, 0]
        sel_parent, fork, mu = _fork_prune(mu, mu + cost, list_size)
        parent = parent[sel_parent]
        beta = beta[sel_parent]
        mag = mag[sel_parent]
        order = order[sel_parent]
        pos = pos[sel_parent]
        flip = fork == 1
        beta[flip, pos[flip]] ^= 1
    return parent, mu, beta


def decode_spc(metrics, alpha, list_size):
    """Single-parity-check span.

    Start from the hard decision, pre-charge the parity fix at the least
    reliable position, then split on the next min(L, size) - 1 least reliable
    positions. Each split toggles whether the least reliable bit needs
    flipping, so the running parity state of a path decides the sign of the
    |alpha_min| term in its fork increment. The least reliable bit is set
    last to restore even parity.
    """
    alpha = np.atleast_2d(alpha)
    n_paths, size = alpha.shape
    mag = np.abs(alpha)
    order = np.argsort(mag, axis=1, kind="stable")
    beta = hard_decision(alpha)
    min_pos = order[:, 0]
    min_mag = np.take_along_axis(mag, min_pos[:, None], axis=1)[:, 0]
    parity = np.bitwise_xor.reduce(beta, axis=1)
    mu = np.asarray(metrics, dtype=np.float64) + parity * min_mag
    parent = np.arange(n_paths)
    splits = min(list_size, size)
    for step in range(1, splits):
        pos = order[:, step]
        cost = np.take_along_axis(mag, pos[:, None], axis=1)[:, 0]
        cost = cost + (1.0 - 2.0 * parity) * min_mag
        sel_parent, fork, mu = _fork_prune(mu, mu + cost, list_size)
        parent = parent[sel_parent]
        beta = beta[sel_parent]
        mag = mag[sel_parent]
        order = order[sel_parent]
        min_pos = min_pos[sel_parent]
        min_mag = min_mag[sel_parent]
        parity = parity[sel_parent]
        pos = pos[sel_parent]
        flip = fork == 1
        beta[flip, pos[flip]] ^= 1
        parity[flip] ^= 1
    rows = np.arange(beta.shape[0])
    beta[rows, min_pos] = 0
    beta[rows, min_pos] = np.bitwise_xor.reduce(beta, axis=1)
    return parent, mu, beta


_SPECIAL_DECODERS = {
    NodeKind.R0: lambda mu, a, L: decode_rate0(mu, a),
    NodeKind.REP: decode_rep,
    NodeKind.R1: decode_rate1,
    NodeKind.SPC: decode_spc,
}


class _FloatOps:
    """Message arithmetic for LLR-domain decoding."""

    dtype = np.float64

    def __init__(self, metric_mode: str):
        self._f = f_minsum if metric_mode == "approx" else f_exact

    def root_messages(self, y):
        return np.asarray(y, dtype=np.float64)

    def f_update(self, node, a, b):
        return self._f(a, b)

    def g_update(self, node, a, b, bit):
        return g_func(a, b, bit)

    def leaf_llrs(self, node, msgs):
        return msgs

    def note_result(self, result):
        pass


class ListEngine:
    """One decode pass over a tree; single-use per frame, create per call."""

    def __init__(self, code: PolarCode, tree: DecoderTree, cfg: ListConfig, ops):
        if tree.block_len != code.block_len:
            raise ValueError("tree and code block lengths differ")
        self.code = code
        self.tree = tree
        self.cfg = cfg
        self.ops = ops

    def decode(self, channel_msgs) -> DecodeResult:
        code = self.code
        n, n_bits = code.n, code.block_len
        root_msgs = self.ops.root_messages(channel_msgs)
        if root_msgs.shape != (n_bits,):
            raise ValueError("channel message length != block length")
        self.msgs = np.zeros((1, n + 1, n_bits), dtype=self.ops.dtype)
        self.msgs[0, 0, :] = root_msgs
        self.bits = np.zeros((1, n + 1, n_bits), dtype=np.uint8)
        self.u_hat = np.zeros((1, n_bits), dtype=np.uint8)
        self.mu = np.zeros(1, dtype=np.float64)
        self._walk(self.tree.root)
        order = np.argsort(self.mu, kind="stable")
        result = DecodeResult(
            u_hats=self.u_hat[order],
            x_hats=self.bits[order, 0, :],
            metrics=self.mu[order],
        )
        self.ops.note_result(result)
        return result

    def _permute(self, parent_idx):
        self.msgs = self.msgs[parent_idx]
        self.bits = self.bits[parent_idx]
        self.u_hat = self.u_hat[parent_idx]

    def _walk(self, node):
        d, lo, size = node.depth, node.span_start, node.size
        hi = lo + size
        if node.is_leaf:
            llrs = self.ops.leaf_llrs(node, self.msgs[:, d, lo:hi])
            if size == 1:
                self._bit_leaf(node, lo, d, llrs[:, 0])
            else:
                handler = _SPECIAL_DECODERS[node.kind]
                parent, self.mu, beta = handler(self.mu, llrs, self.cfg.list_size)
                self._permute(parent)
                self.bits[:, d, lo:hi] = beta
                self.u_hat[:, lo:hi] = polar_transform(beta)
            return
        mid = lo + size // 2
        a = self.msgs[:, d, lo:mid]
        b = self.msgs[:, d, mid:hi]
        self.msgs[:, d + 1, lo:mid] = self.ops.f_update(node, a, b)
        self._walk(node.left)
        beta_left = self.bits[:, d + 1, lo:mid]
        a = self.msgs[:, d, lo:mid]
        b = self.msgs[:, d, mid:hi]
        self.msgs[:, d + 1, mid:hi] = self.ops.g_update(node, a, b, beta_left)
        self._walk(node.right)
        self.bits[:, d, lo:hi] = combine_bits(
            self.bits[:, d + 1, lo:mid], self.bits[:, d + 1, mid:hi]
        )

    def _bit_leaf(self, node, pos, depth, llrs):
        mode = self.cfg.metric_mode
        if self.code.frozen_mask[pos]:
            self.mu = self.mu + metric_increment(0, llrs, mode)
            self.bits[:, depth, pos] = 0
            self.u_hat[:, pos] = 0
            return
        parent, fork, self.mu = _fork_prune(
            self.mu + metric_increment(0, llrs, mode),
            self.mu + metric_increment(1, llrs, mode),
            self.cfg.list_size,
        )
        self._permute(parent)
        self.bits[:, depth, pos] = fork
        self.u_hat[:, pos] = fork


def scl_decode(code: PolarCode, y_llr, cfg: ListConfig, tree: DecoderTree = None) -> DecodeResult:
    """Conventional SCL on the unpruned schedule."""
    if tree is None:
        tree = sc_tree(code)
    elif tree.enabled_kinds:
        raise ValueError("scl_decode expects a tree without special nodes")
    return ListEngine(code, tree, cfg, _FloatOps(cfg.metric_mode)).decode(y_llr)


def fscl_decode(code: PolarCode, tree: DecoderTree, y_llr, cfg: ListConfig) -> DecodeResult:
    """List decoding on a pruned schedule with one-shot constituent decoders."""
    return ListEngine(code, tree, cfg, _FloatOps(cfg.metric_mode)).decode(y_llr)


def ca_select(code: PolarCode, result: DecodeResult):
    """CRC-aided selection: first CRC-passing candidate, else the metric winner.

    Returns (candidate_index, info_bits, crc_ok).
    """
    infos = extract_info_bits(code, result.u_hats)
    for idx in range(len(result)):
        if crc_check(code, infos[idx]):
            return idx, infos[idx], True
    return 0, infos[0], False
