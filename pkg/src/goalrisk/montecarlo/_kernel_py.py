"""Vectorized numpy backend: batched coin draws and slot evaluation.

This module mirrors the compiled kernel batch-wise.  Both consume the same
compiled program and the same counter RNG, so their outputs are required
to be bit-identical; the numpy path is the always-available fallback and
the reference the native kernel is tested against.

``evaluate_slots`` is shared by sampling and exact enumeration: it maps a
matrix of fired coins to a matrix of node values, one column per slot.
"""

from __future__ import annotations

import numpy as np

from ._program import OP_AND, OP_LEAF, OP_OR, Program
from ._rng import COIN_MULT, STREAM_MULT, stream_base

_SHIFT33 = np.uint64(33)
_SHIFT11 = np.uint64(11)
_MIX1 = np.uint64(0xFF51AFD7ED558CCD)
_MIX2 = np.uint64(0xC4CEB9FE1A85EC53)
_STREAM = np.uint64(STREAM_MULT)
_COIN = np.uint64(COIN_MULT)

DEFAULT_BATCH = 32768


def mix64_array(z: np.ndarray) -> np.ndarray:
    """Murmur3 finalizer on a uint64 array (wrapping multiplies)."""
    z = z ^ (z >> _SHIFT33)
    z = z * _MIX1
    z = z ^ (z >> _SHIFT33)
    z = z * _MIX2
    z = z ^ (z >> _SHIFT33)
    return z


def draw_matrix(program: Program, seed: int, first: int, last: int) -> np.ndarray:
    """Fired-coin matrix for sample indices [first, last): shape (n, sites)."""
    base = np.uint64(stream_base(seed))
    indices = np.arange(first, last, dtype=np.uint64)
    keys = mix64_array(base ^ (indices * _STREAM))
    site_keys = np.arange(program.n_sites, dtype=np.uint64) * _COIN
    bits = mix64_array(keys[:, None] ^ site_keys[None, :]) >> _SHIFT11
    return bits < program.site_thresholds[None, :]


def evaluate_slots(program: Program, fired: np.ndarray) -> np.ndarray:
    """Node values for a batch of worlds: bool matrix (batch, n_slots).

    Slots are in topological order, so each child column exists before it
    is read.
    """
    batch = fired.shape[0]
    values = np.empty((batch, program.n_slots), dtype=bool)
    op = program.op
    arg_off = program.arg_off
    args = program.args
    arg_sites = program.arg_sites
    node_site = program.node_site
    for s in range(program.n_slots):
        code = op[s]
        lo, hi = arg_off[s], arg_off[s + 1]
        if code == OP_LEAF:
            column = fired[:, node_site[s]]
        elif code == OP_AND:
            column = fired[:, node_site[s]].copy()
            for a in args[lo:hi]:
                column &= values[:, a]
        else:
            any_cause = np.zeros(batch, dtype=bool)
            for i in range(lo, hi):
                any_cause |= values[:, args[i]] & fired[:, arg_sites[i]]
            column = any_cause if code == OP_OR else ~any_cause
        values[:, s] = column
    return values


def count_range(
    program: Program, seed: int, first: int, last: int, batch: int = DEFAULT_BATCH
) -> np.ndarray:
    """Per-slot true-counts over sample indices [first, last)."""
    counts = np.zeros(program.n_slots, dtype=np.int64)
    start = first
    while start < last:
        stop = min(start + batch, last)
        fired = draw_matrix(program, seed, start, stop)
        counts += evaluate_slots(program, fired).sum(axis=0, dtype=np.int64)
        start = stop
    return counts
