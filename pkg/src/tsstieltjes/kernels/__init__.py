"""Array kernels for expression evaluation and monotone inversion.

Two interchangeable backends implement the same three functions:

``eval_points(prog, ts)``
    Point values of a compiled expression; NaN marks a domain violation.
``eval_boxes(prog, lo, hi)``
    Natural interval extension over the boxes ``[lo[i], hi[i]]``.
``invert_increasing(prog, lo, hi, y, ttol, gtol)``
    For each target ``y[i]`` the largest bracket point ``x`` in
    ``[lo[i], hi[i]]`` found by bisection with ``g(x) <= y[i]``.

The numba backend is used when numba imports; setting the environment
variable ``TSSTIELTJES_NO_JIT=1`` selects the pure numpy backend instead.
"""

from __future__ import annotations

import os
from contextlib import contextmanager
from typing import NamedTuple

import numpy as np

from . import _numpy

ENV_FLAG = "TSSTIELTJES_NO_JIT"

OP_CONST, OP_VAR, OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_NEG, OP_POW, OP_EXP, OP_LN, OP_SQRT = range(11)


class Program(NamedTuple):
    """Postfix encoding of an expression tree."""

    ops: np.ndarray  # int64 opcodes
    args: np.ndarray  # int64: constant index (OP_CONST) or exponent (OP_POW)
    consts: np.ndarray  # float64
    depth: int  # maximum stack depth


def _load_numba():
    try:
        from . import _numba
    except ImportError:  # pragma: no cover - numba is a declared dependency
        return None
    return _numba


_backends = {"numpy": _numpy}
if not os.environ.get(ENV_FLAG):
    _nb = _load_numba()
    if _nb is not None:
        _backends["numba"] = _nb

_active = _backends.get("numba", _numpy)


def available() -> list[str]:
    return sorted(_backends)


def active():
    """The backend module currently in use."""
    return _active


def active_name() -> str:
    return _active.NAME


def get(name: str):
    if name == "numba" and "numba" not in _backends:
        nb = _load_numba()
        if nb is None:
            raise RuntimeError("numba backend is unavailable")
        _backends["numba"] = nb
    return _backends[name]


def set_backend(name: str) -> None:
    global _active
    _active = get(name)


@contextmanager
def use(name: str):
    """Temporarily switch the active backend."""
    global _active
    prev = _active
    _active = get(name)
    try:
        yield _active
    finally:
        _active = prev
