"""Monte Carlo simulation and exact enumeration for goal-obstacle models.

Three independent evaluators answer the same question (how often is each
node true when every annotated probability and conditional is an
independent coin):

* :func:`sample_world` draws one world at a time in pure Python, the
  readable reference semantics;
* :func:`estimate` counts over a sample range with a batched kernel, the
  compiled one when the extension built, otherwise vectorized numpy, both
  bit-identical to the reference;
* :func:`brute_force_exact` enumerates all coin assignments and sums exact
  world weights, feasible up to a configurable coin budget.

Draws are counter-based (see ``_rng``), so results depend only on
``(seed, sample index, coin index)``: estimates are reproducible across
backends, machines, and any partitioning of the sample range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Protocol

import numpy as np

from ..model import GoalModel, NodeId
from ._program import OP_AND, OP_LEAF, OP_OR, Program, compile_program
from ._rng import CounterStream
from . import _kernel_py

try:
    from . import _ckernel
except ImportError:  # extension not built; numpy path is fully equivalent
    _ckernel = None

BACKEND = "cython" if _ckernel is not None else "numpy"

_SEED_MASK = (1 << 64) - 1

__all__ = [
    "BACKEND",
    "CounterStream",
    "Program",
    "SimulationResult",
    "brute_force_exact",
    "compile_program",
    "estimate",
    "sample_world",
]


class RandomStream(Protocol):
    """Anything that yields one uniform [0, 1) draw per coin index."""

    def uniform(self, coin_index: int) -> float: ...


@dataclass(frozen=True)
class SimulationResult:
    """Empirical node frequencies plus a z=4 binomial confidence radius."""

    samples: int
    empirical_obstacle_freq: Mapping[NodeId, float]
    empirical_goal_freq: Mapping[NodeId, float]
    confidence_radius: Mapping[NodeId, float]


def sample_world(model: GoalModel, random_stream: RandomStream) -> dict[NodeId, bool]:
    """Evaluate one sampled world: occurrence for obstacles, satisfaction
    for goals, as a mapping over every node id."""
    program = compile_program(model)
    return dict(zip(program.ids, _sample_program(program, random_stream)))


def _sample_program(program: Program, stream: RandomStream) -> list[bool]:
    # plain-int copies: the pure-python RNG must not receive numpy scalars
    probs = program.site_probs.tolist()
    op = program.op.tolist()
    arg_off = program.arg_off.tolist()
    args = program.args.tolist()
    arg_sites = program.arg_sites.tolist()
    node_site = program.node_site.tolist()
    values: list[bool] = []
    for s in range(program.n_slots):
        code = op[s]
        lo, hi = arg_off[s], arg_off[s + 1]
        if code == OP_LEAF:
            site = node_site[s]
            value = stream.uniform(site) < probs[site]
        elif code == OP_AND:
            site = node_site[s]
            value = all(values[a] for a in args[lo:hi]) and (
                stream.uniform(site) < probs[site]
            )
        else:
            any_cause = any(
                values[args[i]] and stream.uniform(arg_sites[i]) < probs[arg_sites[i]]
                for i in range(lo, hi)
            )
            value = any_cause if code == OP_OR else not any_cause
        values.append(bool(value))
    return values


def _count_range(program: Program, seed: int, first: int, last: int) -> np.ndarray:
    if _ckernel is not None:
        return _ckernel.count_range(
            program.op,
            program.arg_off,
            program.args,
            program.arg_sites,
            program.node_site,
            program.site_thresholds,
            seed,
            first,
            last,
        )
    return _kernel_py.count_range(program, seed, first, last)


def estimate(
    model: GoalModel, n_samples: int, seed: int, *, partitions: int = 1
) -> SimulationResult:
    """Estimate every node's probability from ``n_samples`` seeded worlds.

    ``partitions`` splits the sample range into contiguous sub-ranges
    counted separately (as concurrent workers would); because draws are
    counter-based the result is bit-identical for every partition count.
    """
    if n_samples <= 0:
        raise ValueError("n_samples must be positive")
    if partitions <= 0:
        raise ValueError("partitions must be positive")
    program = compile_program(model)
    seed &= _SEED_MASK
    counts = np.zeros(program.n_slots, dtype=np.int64)
    bounds = [n_samples * i // partitions for i in range(partitions + 1)]
    for lo, hi in zip(bounds, bounds[1:]):
        if hi > lo:
            counts += _count_range(program, seed, lo, hi)

    freq = counts / float(n_samples)
    radius = 4.0 * np.sqrt(freq * (1.0 - freq) / float(n_samples))
    by_id = dict(zip(program.ids, range(program.n_slots)))
    obstacle_ids = sorted(i for i in program.ids if not program.is_goal[by_id[i]])
    goal_ids = sorted(i for i in program.ids if program.is_goal[by_id[i]])
    return SimulationResult(
        samples=n_samples,
        empirical_obstacle_freq={i: float(freq[by_id[i]]) for i in obstacle_ids},
        empirical_goal_freq={i: float(freq[by_id[i]]) for i in goal_ids},
        confidence_radius={i: float(radius[by_id[i]]) for i in sorted(program.ids)},
    )


def brute_force_exact(model: GoalModel, *, max_coins: int = 24) -> dict[NodeId, float]:
    """Exact probability of every node by enumerating all coin outcomes.

    Only genuinely random coins (0 < p < 1) are enumerated; certain and
    impossible coins contribute a fixed value.  The number of random coins
    is capped by ``max_coins`` (2**max_coins worlds); beyond that the
    enumeration refuses rather than run unbounded.
    """
    program = compile_program(model)
    random_sites = program.random_sites()
    if len(random_sites) > max_coins:
        raise ValueError(
            f"model has {len(random_sites)} random coins, "
            f"exceeding the enumeration budget of {max_coins}"
        )
    n_random = len(random_sites)
    certain = program.site_probs >= 1.0
    p_random = program.site_probs[random_sites]
    n_worlds = 1 << n_random
    chunk = 1 << 16
    subtotals: list[list[float]] = [[] for _ in range(program.n_slots)]
    bit_positions = np.arange(n_random, dtype=np.uint64)
    for start in range(0, n_worlds, chunk):
        stop = min(start + chunk, n_worlds)
        world_index = np.arange(start, stop, dtype=np.uint64)
        fired = np.broadcast_to(certain, (stop - start, program.n_sites)).copy()
        if n_random:
            bits = (world_index[:, None] >> bit_positions[None, :]) & np.uint64(1)
            on = bits.astype(bool)
            fired[:, random_sites] = on
            weights = np.prod(np.where(on, p_random, 1.0 - p_random), axis=1)
        else:
            weights = np.ones(stop - start)
        values = evaluate_slots_matrix(program, fired)
        for s in range(program.n_slots):
            subtotals[s].append(float(np.sum(weights * values[:, s])))
    return {
        node: math.fsum(subtotals[s])
        for node, s in sorted(zip(program.ids, range(program.n_slots)))
    }


# Shared world evaluator, exposed for the enumeration above and for tests.
evaluate_slots_matrix = _kernel_py.evaluate_slots
