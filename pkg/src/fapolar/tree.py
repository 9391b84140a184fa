"""Pruned decoder trees for fast list decoding.

The full decode of a length-N code is a binary tree with N single-bit leaves.
Subtrees whose frozen pattern matches a special node type (rate-0, rate-1,
repetition, single parity check) are condensed into one leaf, which shortens
the schedule and shrinks the number of lookup tables a quantized decoder
needs: one decoding table per surviving edge, one translation table per leaf.
"""

import hashlib
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .codes import PolarCode


class NodeKind(str, Enum):
    SC = "SC"
    R0 = "R0"
    R1 = "R1"
    REP = "Rep"
    SPC = "SPC"


SPECIAL_KINDS = (NodeKind.R0, NodeKind.R1, NodeKind.REP, NodeKind.SPC)
ALL_NODE_KINDS = frozenset(SPECIAL_KINDS)


def classify_span(frozen_span) -> NodeKind:
    """Match a frozen pattern against the special node types.

    Tie order R0, R1, Rep, SPC: single-bit spans come out as R0/R1, the
    two-bit pattern (frozen, info) as Rep.
    """
    frozen_span = np.asarray(frozen_span, dtype=bool)
    if frozen_span.size < 1:
        raise ValueError("empty span")
    if frozen_span.all():
        return NodeKind.R0
    if not frozen_span.any():
        return NodeKind.R1
    if frozen_span[:-1].all() and not frozen_span[-1]:
        return NodeKind.REP
    if frozen_span[0] and not frozen_span[1:].any():
        return NodeKind.SPC
    return NodeKind.SC


@dataclass(frozen=True)
class NodeSpec:
    """One pruned-tree leaf in activation order (index is 1-based)."""

    index: int
    depth: int
    size: int
    span_start: int
    kind: NodeKind


@dataclass
class TreeNode:
    """Internal recursive form: leaves carry a leaf id, interior nodes edge ids."""

    depth: int
    span_start: int
    size: int
    kind: NodeKind
    leaf_id: int = -1
    f_edge_id: int = -1
    g_edge_id: int = -1
    left: "TreeNode" = None
    right: "TreeNode" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass(frozen=True)
class DecoderTree:
    """Pruned decode schedule plus the edge/leaf numbering used for table files."""

    block_len: int
    enabled_kinds: frozenset
    root: TreeNode
    schedule: tuple
    edge_kinds: tuple          # edge id -> "f" | "g", in activation order
    leaf_count: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "leaf_count", len(self.schedule))

    @property
    def edge_count(self) -> int:
        return len(self.edge_kinds)

    @property
    def f_edge_count(self) -> int:
        return sum(1 for k in self.edge_kinds if k == "f")

    @property
    def g_edge_count(self) -> int:
        return sum(1 for k in self.edge_kinds if k == "g")

    def schedule_hash(self) -> str:
        h = hashlib.sha256()
        h.update(str(self.block_len).encode())
        for spec in self.schedule:
            h.update(f"{spec.depth},{spec.size},{spec.span_start},{spec.kind.value};".encode())
        return h.hexdigest()[:16]


def build_tree(code: PolarCode, enabled_kinds=ALL_NODE_KINDS) -> DecoderTree:
    """Prune the decode tree top-down: the largest span matching an enabled
    special pattern becomes a leaf, everything else recurses. Single-bit spans
    always terminate (as R0/R1). Edge and leaf ids follow activation order."""
    enabled = frozenset(NodeKind(k) for k in enabled_kinds)
    frozen = code.frozen_mask
    schedule = []
    edge_kinds = []

    def rec(lo: int, size: int, depth: int) -> TreeNode:
        kind = classify_span(frozen[lo:lo + size])
        if size == 1 or (kind != NodeKind.SC and kind in enabled):
            node = TreeNode(depth, lo, size, kind, leaf_id=len(schedule))
            schedule.append(NodeSpec(len(schedule) + 1, depth, size, lo, kind))
            return node
        node = TreeNode(depth, lo, size, NodeKind.SC)
        node.f_edge_id = len(edge_kinds)
        edge_kinds.append("f")
        node.left = rec(lo, size // 2, depth + 1)
        node.g_edge_id = len(edge_kinds)
        edge_kinds.append("g")
        node.right = rec(lo + size // 2, size // 2, depth + 1)
        return node

    root = rec(0, code.block_len, 0)
    return DecoderTree(
        block_len=code.block_len,
        enabled_kinds=enabled,
        root=root,
        schedule=tuple(schedule),
        edge_kinds=tuple(edge_kinds),
    )


def sc_tree(code: PolarCode) -> DecoderTree:
    """The unpruned schedule: N single-bit leaves, 2N-2 edges."""
    return build_tree(code, enabled_kinds=frozenset())


def table_counts(tree: DecoderTree, variant: str) -> tuple:
    """(decoding_tables, translation_tables) needed by a quantized decoder.

    IB stores a table per edge. MSIB replaces every f-table with index
    arithmetic, leaving the g-tables plus the channel quantizer.
    """
    if variant not in ("ib", "msib"):
        raise ValueError(f"unknown variant {variant!r}")
    translation = tree.leaf_count
    if variant == "ib":
        return tree.edge_count, translation
    return tree.g_edge_count + 1, translation


def dump_schedule(tree: DecoderTree):
    """Rows (index, depth, kind, size, span_start) in activation order."""
    return [(s.index, s.depth, s.kind.value, s.size, s.span_start) for s in tree.schedule]


def parse_kinds(text: str) -> frozenset:
    """Parse a node-kind list like "r0,r1,rep,spc"; empty means none enabled."""
    text = text.strip()
    if not text:
        return frozenset()
    alias = {"r0": NodeKind.R0, "r1": NodeKind.R1, "rep": NodeKind.REP, "spc": NodeKind.SPC}
    kinds = set()
    for tok in text.split(","):
        tok = tok.strip().lower()
        if tok not in alias:
            raise ValueError(f"unknown node kind {tok!r}")
        kinds.add(alias[tok])
    return frozenset(kinds)
