"""JSON form of laminate trees.

A file holds ``{"format", "backend", "dim", "tree"}`` plus an optional
free-form ``"meta"`` object (for example the ``r, s, tau`` it was built for).  Each node is
``{"state", "pi"?, "lambda"?, "left"?, "right"?, "witness"?}`` where the
state uses the pointwise state schema (``{u, b, S, a}`` in 3D,
``{alpha, beta, M}`` in 2D).  Exact numbers are strings ``"p/q"``.
"""

from __future__ import annotations

import json
from typing import Union

import numpy as np

from ..algebra import _json_list, from_elsasser, state_from_json, to_elsasser
from ..algebra import ElsasserState, State2D, State3D
from ..errors import ParseError
from ..numbers import FLOAT, to_exact
from .tree import LaminateTree

__all__ = ["FORMAT", "tree_to_json", "tree_from_json", "dump_tree", "load_tree"]

FORMAT = "lambda-mhd-laminate/1"


def _num(x):
    return _json_list([x])[0]


def _node_json(node: LaminateTree, exact: bool) -> dict:
    out = {"state": node.state.to_json()}
    if node.left is None:
        if node.pi is not None:
            out["pi"] = _num(node.pi)
        return out
    out["lambda"] = _num(node.lam)
    if node.witness is not None:
        out["witness"] = {"xi": _json_list(list(node.witness[0])), "c": _num(node.witness[1])}
    out["left"] = _node_json(node.left, exact)
    out["right"] = _node_json(node.right, exact)
    return out


def tree_to_json(tree: LaminateTree, meta: dict = None) -> dict:
    exact = not any(isinstance(x, float) for x in tree.zp + tree.zm + tree.M)
    out = {"format": FORMAT, "backend": "exact" if exact else "float",
           "dim": len(tree.zp)}
    if meta:
        out["meta"] = meta
    out["tree"] = _node_json(tree, exact)
    return out


def _conv(exact: bool):
    return to_exact if exact else FLOAT.num


def _node_from(obj: dict, exact: bool, dim: int) -> LaminateTree:
    if not isinstance(obj, dict) or "state" not in obj:
        raise ParseError("tree node must be an object with a 'state'")
    conv = _conv(exact)
    try:
        st = state_from_json(obj["state"], exact=exact)
    except (ValueError, TypeError, ZeroDivisionError) as err:
        raise ParseError(f"bad node state: {err}") from err
    if isinstance(st, State3D):
        st = to_elsasser(st)
    if len(st.zp) != dim:
        raise ParseError("node dimension does not match the tree")
    zp = tuple(np.asarray(st.zp).tolist())
    zm = tuple(np.asarray(st.zm).tolist())
    M = tuple(np.asarray(st.M).ravel().tolist())
    has_l, has_r = "left" in obj, "right" in obj
    if has_l != has_r:
        raise ParseError("a branch needs both 'left' and 'right'")
    try:
        if not has_l:
            pi = conv(obj["pi"]) if "pi" in obj else None
            return LaminateTree(zp, zm, M, pi=pi)
        lam = conv(obj["lambda"])
        w = obj.get("witness")
        witness = None
        if w is not None:
            witness = (tuple(conv(x) for x in w["xi"]), conv(w["c"]))
    except (KeyError, ValueError, TypeError, ZeroDivisionError) as err:
        raise ParseError(f"bad node field: {err}") from err
    return LaminateTree(zp, zm, M, lam=lam, left=_node_from(obj["left"], exact, dim),
                        right=_node_from(obj["right"], exact, dim), witness=witness)


def tree_from_json(obj: dict) -> LaminateTree:
    if not isinstance(obj, dict) or "tree" not in obj:
        raise ParseError("not a laminate file (missing 'tree')")
    if obj.get("format", FORMAT) != FORMAT:
        raise ParseError(f"unsupported format {obj.get('format')!r}")
    backend = obj.get("backend", "exact")
    if backend not in ("exact", "float"):
        raise ParseError(f"unknown backend {backend!r}")
    dim = int(obj.get("dim", 3))
    return _node_from(obj["tree"], backend == "exact", dim)


def dump_tree(tree: LaminateTree, path, meta: dict = None) -> None:
    with open(path, "w") as fh:
        json.dump(tree_to_json(tree, meta), fh)
        fh.write("\n")


def load_tree(path) -> LaminateTree:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as err:
        raise ParseError(f"malformed JSON: {err}") from err
    return tree_from_json(obj)
