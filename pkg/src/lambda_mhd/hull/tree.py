"""Laminate trees: binary certificates of lamination-hull membership."""

from __future__ import annotations

from typing import Iterator, Optional

import numpy as np

from ..algebra import ElsasserState, State2D
from ..numbers import to_exact
from ..wavecone import ConeWitness

__all__ = ["LaminateTree", "leaf", "branch", "iter_nodes"]


class LaminateTree:
    """A node of a laminate.

    Every node carries its Elsasser state as tuples (``M`` flattened
    row-major).  A leaf stores its pressure ``pi``; a branch stores the
    weight ``lam`` of its left child, both children, and optionally a
    wave-cone witness ``(xi, c)`` for ``left - right`` together with the
    case tag of the construction step that produced it.
    """

    __slots__ = ("zp", "zm", "M", "pi", "lam", "left", "right", "witness", "tag")

    def __init__(self, zp, zm, M, pi=None, lam=None, left=None, right=None,
                 witness=None, tag=None):
        self.zp = zp
        self.zm = zm
        self.M = M
        self.pi = pi
        self.lam = lam
        self.left = left
        self.right = right
        self.witness = witness
        self.tag = tag

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    @property
    def dim(self) -> int:
        return len(self.zp)

    @property
    def state(self):
        """The node state as an :class:`ElsasserState` (or :class:`State2D`)."""
        n = len(self.zp)
        dtype = float if any(isinstance(x, float) for x in self.M) else object
        zp = np.array(self.zp, dtype=dtype)
        zm = np.array(self.zm, dtype=dtype)
        M = np.array(self.M, dtype=dtype).reshape(n, n)
        if n == 2:
            return State2D(zp, zm, M)
        return ElsasserState(zp, zm, M)

    @property
    def cone_witness(self) -> Optional[ConeWitness]:
        if self.witness is None:
            return None
        return ConeWitness(tuple(self.witness[0]), self.witness[1])

    def depth(self) -> int:
        best = 0
        stack = [(self, 0)]
        while stack:
            node, d = stack.pop()
            if node.left is None:
                best = max(best, d)
            else:
                stack.append((node.left, d + 1))
                stack.append((node.right, d + 1))
        return best

    def leaves(self) -> Iterator[tuple[object, "LaminateTree"]]:
        """Yield ``(weight, leaf)`` pairs; weights are products of branch weights."""
        one = self.lam - self.lam + 1 if self.lam is not None else 1
        stack = [(one, self)]
        while stack:
            w, node = stack.pop()
            if node.left is None:
                yield w, node
            else:
                stack.append((w * node.lam, node.left))
                stack.append((w * (1 - node.lam), node.right))

    def count(self) -> int:
        return sum(1 for _ in iter_nodes(self))

    def transposed(self) -> "LaminateTree":
        """Tree for ``(zp, zm, M) -> (zm, zp, M^T)``; witnesses carry over."""
        n = len(self.zp)
        idx = [j * n + i for i in range(n) for j in range(n)]

        def tr(node):
            M = tuple(node.M[k] for k in idx)
            if node.left is None:
                return LaminateTree(node.zm, node.zp, M, pi=node.pi)
            return LaminateTree(node.zm, node.zp, M, lam=node.lam, left=tr(node.left),
                                right=tr(node.right), witness=node.witness, tag=node.tag)

        return tr(self)

    def __repr__(self) -> str:
        kind = "Leaf" if self.is_leaf else "Branch"
        return f"<LaminateTree {kind} depth={self.depth()} nodes={self.count()}>"


def leaf(zp, zm, pi, M=None) -> LaminateTree:
    """Leaf at ``(zp, zm, zp (x) zm + pi I)`` (or the given ``M``)."""
    zp = tuple(zp)
    zm = tuple(zm)
    if M is None:
        n = len(zp)
        M = tuple(zp[i] * zm[j] + (pi if i == j else 0) for i in range(n) for j in range(n))
    return LaminateTree(zp, zm, tuple(M), pi=pi)


def branch(lam, left: LaminateTree, right: LaminateTree, witness=None, tag=None) -> LaminateTree:
    """Branch with weight ``lam`` on ``left``; the state is the convex combination."""
    mu = 1 - lam
    comb = lambda a, b: tuple(lam * x + mu * y for x, y in zip(a, b))
    return LaminateTree(comb(left.zp, right.zp), comb(left.zm, right.zm),
                        comb(left.M, right.M), lam=lam, left=left, right=right,
                        witness=witness, tag=tag)


def iter_nodes(tree: LaminateTree) -> Iterator[LaminateTree]:
    stack = [tree]
    while stack:
        node = stack.pop()
        yield node
        if node.left is not None:
            stack.append(node.left)
            stack.append(node.right)


def exact_tuple(values) -> tuple:
    return tuple(to_exact(v) for v in values)
