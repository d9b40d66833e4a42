"""Domain types for AND/OR goal-obstacle graphs and structural validation.

A model is a forest of goal refinements plus a forest of obstacle
refinements, connected by obstruction links from root obstacles to leaf
goals.  Leaf obstacles carry probability estimates; refinements and
obstructions carry causal conditionals.  Everything here is immutable and
every operation is a pure function.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

NodeId = str

_ID_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

# Attributes bounded to [0,1]: probabilities, conditionals, and rds.
def _in_unit(value: float) -> bool:
    return 0.0 <= value <= 1.0


def _nonnegative(value: float) -> bool:
    return value >= 0.0


class RefinementKind(str, Enum):
    AND = "and"
    OR = "or"


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


@dataclass(frozen=True, slots=True)
class SourcePosition:
    """1-based line/column of a token, counted in code points."""

    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


@dataclass(frozen=True, slots=True)
class Diagnostic:
    """One validation or parse finding.

    ``severity == ERROR`` blocks analysis; warnings and infos do not.
    ``location`` is set when the finding maps to a source position (parser
    output); ``subject`` names the node or link the finding is about.
    """

    severity: Severity
    code: str
    message: str
    location: SourcePosition | None = None
    subject: NodeId | None = None

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def __str__(self) -> str:
        prefix = f"{self.location}: " if self.location else ""
        return f"{prefix}{self.severity.value}[{self.code}]: {self.message}"


@dataclass(frozen=True, slots=True)
class GoalNode:
    """A desired condition; ``rds`` is the minimum acceptable probability
    of satisfaction and ``weight`` its share in severity scoring.

    Optional attributes stay ``None`` when not declared so that
    serialization can reproduce the original text; readers wanting the
    applied defaults use ``display_name``, ``rds_value``, ``weight_value``.
    """

    id: NodeId
    name: str | None = None
    category: str | None = None
    definition: str | None = None
    formal_spec: str | None = None  # opaque text, never interpreted
    rds: float | None = None
    weight: float | None = None

    @property
    def display_name(self) -> str:
        return self.name if self.name is not None else self.id

    @property
    def rds_value(self) -> float:
        return 1.0 if self.rds is None else self.rds

    @property
    def weight_value(self) -> float:
        return 1.0 if self.weight is None else self.weight


@dataclass(frozen=True, slots=True)
class ObstacleNode:
    """An exceptional condition; ``probability`` is present iff the
    obstacle is a leaf (it has no refinement)."""

    id: NodeId
    name: str | None = None
    definition: str | None = None
    formal_spec: str | None = None
    probability: float | None = None

    @property
    def display_name(self) -> str:
        return self.name if self.name is not None else self.id


@dataclass(frozen=True, slots=True)
class Refinement:
    """One AND/OR decomposition of ``parent`` into ``children``.

    AND carries one joint conditional P(parent | all children); OR carries
    one conditional per child, aligned with ``children`` (``None`` entries
    were not declared and default to 1.0).
    """

    parent: NodeId
    kind: RefinementKind
    children: tuple[NodeId, ...]
    and_conditional: float | None = None
    or_conditionals: tuple[float | None, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "children", tuple(self.children))
        if self.or_conditionals is not None:
            object.__setattr__(self, "or_conditionals", tuple(self.or_conditionals))
        if not self.children:
            raise ValueError("refinement requires at least one child")
        if self.kind is RefinementKind.AND and self.or_conditionals is not None:
            raise ValueError("AND refinement takes a joint conditional, not per-child ones")
        if self.kind is RefinementKind.OR and self.and_conditional is not None:
            raise ValueError("OR refinement takes per-child conditionals, not a joint one")
        if self.or_conditionals is not None and len(self.or_conditionals) != len(self.children):
            raise ValueError("per-child conditionals must align with children")

    def conditional_for(self, index: int) -> float:
        """Effective per-child conditional (OR refinements)."""
        if self.or_conditionals is None or self.or_conditionals[index] is None:
            return 1.0
        return self.or_conditionals[index]

    @property
    def joint_conditional(self) -> float:
        """Effective joint conditional (AND refinements)."""
        return 1.0 if self.and_conditional is None else self.and_conditional


@dataclass(frozen=True, slots=True)
class Obstruction:
    """A link asserting that root obstacle ``obstacle`` prevents leaf goal
    ``goal`` with probability ``conditional`` when it occurs."""

    obstacle: NodeId
    goal: NodeId
    conditional: float | None = None

    @property
    def conditional_value(self) -> float:
        return 1.0 if self.conditional is None else self.conditional


@dataclass(frozen=True)
class GoalModel:
    """A validated goal-obstacle graph.

    Members are stored in canonical order (nodes by id, refinements by
    parent, obstructions by goal then obstacle) so that structural equality
    and serialization do not depend on declaration order.
    """

    name: str
    goals: tuple[GoalNode, ...] = field(default=())
    obstacles: tuple[ObstacleNode, ...] = field(default=())
    refinements: tuple[Refinement, ...] = field(default=())
    obstructions: tuple[Obstruction, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "goals", tuple(sorted(self.goals, key=lambda g: g.id)))
        object.__setattr__(self, "obstacles", tuple(sorted(self.obstacles, key=lambda o: o.id)))
        object.__setattr__(
            self, "refinements", tuple(sorted(self.refinements, key=lambda r: r.parent))
        )
        object.__setattr__(
            self,
            "obstructions",
            tuple(sorted(self.obstructions, key=lambda l: (l.goal, l.obstacle))),
        )

    def goal(self, node_id: NodeId) -> GoalNode:
        for g in self.goals:
            if g.id == node_id:
                return g
        raise KeyError(node_id)

    def obstacle(self, node_id: NodeId) -> ObstacleNode:
        for o in self.obstacles:
            if o.id == node_id:
                return o
        raise KeyError(node_id)


def refinement_map(model: GoalModel) -> dict[NodeId, Refinement]:
    """Parent id -> its (single) refinement."""
    return {r.parent: r for r in model.refinements}


def obstruction_map(model: GoalModel) -> dict[NodeId, tuple[Obstruction, ...]]:
    """Leaf-goal id -> obstructions against it, ordered by obstacle id."""
    grouped: dict[NodeId, list[Obstruction]] = {}
    for link in model.obstructions:
        grouped.setdefault(link.goal, []).append(link)
    return {
        goal: tuple(sorted(links, key=lambda l: l.obstacle)) for goal, links in grouped.items()
    }


def build_model(
    goals: Iterable[GoalNode],
    obstacles: Iterable[ObstacleNode],
    refinements: Iterable[Refinement],
    obstructions: Iterable[Obstruction],
    *,
    name: str = "model",
    positions: Mapping[NodeId, SourcePosition] | None = None,
) -> GoalModel | list[Diagnostic]:
    """Assemble and structurally check a model.

    Returns the model iff no error-severity diagnostic is found, otherwise
    the full diagnostic list (warnings and infos included).  ``positions``
    optionally maps node ids to source positions so callers that parsed the
    input can get located diagnostics.
    """
    candidate = GoalModel(
        name=name,
        goals=tuple(goals),
        obstacles=tuple(obstacles),
        refinements=tuple(refinements),
        obstructions=tuple(obstructions),
    )
    diagnostics = validate(candidate, positions=positions)
    if any(d.is_error for d in diagnostics):
        return diagnostics
    return candidate


def validate(
    model: GoalModel,
    *,
    positions: Mapping[NodeId, SourcePosition] | None = None,
) -> list[Diagnostic]:
    """Run every structural check; pure and idempotent.

    An empty result means the model is analyzable with no caveats.  Errors
    block analysis; the single warning (``shared-child``) flags structure
    whose analytic propagation assumes an independence the graph does not
    provide, and infos report applied defaults.
    """
    positions = positions or {}
    out: list[Diagnostic] = []

    def emit(severity: Severity, code: str, message: str, subject: NodeId | None) -> None:
        location = positions.get(subject) if subject is not None else None
        out.append(Diagnostic(severity, code, message, location=location, subject=subject))

    goal_ids = {g.id for g in model.goals}
    obstacle_ids = {o.id for o in model.obstacles}
    known = goal_ids | obstacle_ids

    # -- identifiers ------------------------------------------------------
    seen: set[NodeId] = set()
    for node_id in [g.id for g in model.goals] + [o.id for o in model.obstacles]:
        if not _ID_RE.match(node_id):
            emit(Severity.ERROR, "bad-id", f"invalid identifier {node_id!r}", node_id)
        if node_id in seen:
            emit(Severity.ERROR, "duplicate-id", f"id {node_id!r} declared more than once", node_id)
        seen.add(node_id)

    # -- numeric ranges ---------------------------------------------------
    for g in model.goals:
        if g.rds is not None and not _in_unit(g.rds):
            emit(Severity.ERROR, "prob-range", f"rds of {g.id!r} must lie in [0,1]", g.id)
        if g.weight is not None and not _nonnegative(g.weight):
            emit(Severity.ERROR, "weight-range", f"weight of {g.id!r} must be >= 0", g.id)
    for o in model.obstacles:
        if o.probability is not None and not _in_unit(o.probability):
            emit(
                Severity.ERROR,
                "prob-range",
                f"probability of {o.id!r} must lie in [0,1]",
                o.id,
            )
    for r in model.refinements:
        if r.and_conditional is not None and not _in_unit(r.and_conditional):
            emit(Severity.ERROR, "prob-range", f"conditional of {r.parent!r} must lie in [0,1]", r.parent)
        for c in r.or_conditionals or ():
            if c is not None and not _in_unit(c):
                emit(
                    Severity.ERROR,
                    "prob-range",
                    f"child conditional of {r.parent!r} must lie in [0,1]",
                    r.parent,
                )
    for link in model.obstructions:
        if link.conditional is not None and not _in_unit(link.conditional):
            emit(
                Severity.ERROR,
                "prob-range",
                f"conditional of obstruction {link.obstacle!r} -> {link.goal!r} must lie in [0,1]",
                link.obstacle,
            )

    # -- refinement structure --------------------------------------------
    parents: set[NodeId] = set()
    child_parents: dict[NodeId, list[NodeId]] = {}
    for r in model.refinements:
        if r.parent in parents:
            emit(
                Severity.ERROR,
                "duplicate-refinement",
                f"{r.parent!r} is the parent of more than one refinement",
                r.parent,
            )
        parents.add(r.parent)
        if r.parent not in known:
            emit(Severity.ERROR, "dangling-ref", f"refinement parent {r.parent!r} is not declared", r.parent)
        seen_children: set[NodeId] = set()
        for child in r.children:
            if child not in known:
                emit(
                    Severity.ERROR,
                    "dangling-ref",
                    f"refinement child {child!r} of {r.parent!r} is not declared",
                    child,
                )
                continue
            if child in seen_children:
                emit(
                    Severity.ERROR,
                    "duplicate-child",
                    f"{child!r} appears twice under {r.parent!r}",
                    r.parent,
                )
            seen_children.add(child)
            child_parents.setdefault(child, []).append(r.parent)
        parent_is_goal = r.parent in goal_ids
        for child in r.children:
            if child in known and (child in goal_ids) != parent_is_goal:
                emit(
                    Severity.ERROR,
                    "cross-kind",
                    f"refinement of {r.parent!r} mixes goals and obstacles",
                    r.parent,
                )
                break

    for child, its_parents in sorted(child_parents.items()):
        if len(its_parents) > 1:
            emit(
                Severity.WARNING,
                "shared-child",
                f"{child!r} is a child of several refinements "
                f"({', '.join(sorted(its_parents))}); analytic propagation assumes independence "
                "and the simulator is ground truth for this model",
                child,
            )

    # -- cycles ------------------------------------------------------------
    for cycle in _refinement_cycles(model.refinements, known):
        emit(
            Severity.ERROR,
            "cycle",
            "refinement cycle: " + " -> ".join(cycle),
            cycle[0],
        )

    # -- leaf obstacle annotations -----------------------------------------
    for o in model.obstacles:
        refined = o.id in parents
        if refined and o.probability is not None:
            emit(
                Severity.ERROR,
                "prob-on-refined",
                f"obstacle {o.id!r} is refined and may not carry a probability",
                o.id,
            )
        if not refined and o.probability is None:
            emit(
                Severity.ERROR,
                "missing-probability",
                f"leaf obstacle {o.id!r} needs a probability estimate",
                o.id,
            )

    # -- obstructions --------------------------------------------------------
    seen_links: set[tuple[NodeId, NodeId]] = set()
    for link in model.obstructions:
        if link.obstacle not in known or link.goal not in known:
            missing = link.obstacle if link.obstacle not in known else link.goal
            emit(
                Severity.ERROR,
                "dangling-ref",
                f"obstruction references undeclared {missing!r}",
                missing,
            )
            continue
        if link.obstacle not in obstacle_ids or link.goal not in goal_ids:
            emit(
                Severity.ERROR,
                "obstruction-kind",
                f"obstruction must link an obstacle to a goal, got {link.obstacle!r} -> {link.goal!r}",
                link.obstacle,
            )
            continue
        if (link.obstacle, link.goal) in seen_links:
            emit(
                Severity.ERROR,
                "duplicate-obstruction",
                f"obstruction {link.obstacle!r} -> {link.goal!r} declared more than once",
                link.obstacle,
            )
        seen_links.add((link.obstacle, link.goal))
        if link.goal in parents:
            emit(
                Severity.ERROR,
                "obstruction-on-refined",
                f"obstruction targets {link.goal!r}, which is refined; only leaf goals can be obstructed",
                link.goal,
            )
        if link.obstacle in child_parents:
            emit(
                Severity.ERROR,
                "obstruction-from-nonroot",
                f"obstruction source {link.obstacle!r} is itself a refinement child, not a root obstacle",
                link.obstacle,
            )

    # -- applied defaults ----------------------------------------------------
    goal_children = {
        child for r in model.refinements if r.parent in goal_ids for child in r.children
    }
    obstructed = {link.goal for link in model.obstructions}
    for g in model.goals:
        if g.rds is None and g.id not in goal_children:
            emit(
                Severity.INFO,
                "default-rds",
                f"root goal {g.id!r} has no rds; 1.0 applied",
                g.id,
            )
        if g.id not in parents and g.id not in obstructed:
            emit(
                Severity.INFO,
                "unobstructed-goal",
                f"goal {g.id!r} has neither refinement nor obstruction; its probability of satisfaction is 1.0",
                g.id,
            )
    return out


def topological_order(model: GoalModel) -> list[NodeId]:
    """Every node after everything it depends on.

    Dependencies are refinement children (child before parent) and
    obstruction sources (obstacle before the goal it obstructs).  Ties are
    broken lexicographically, so the order is stable under node-set
    equality.  Raises ``ValueError`` on a refinement cycle, which is
    unreachable for a model that passed validation.
    """
    nodes = sorted({g.id for g in model.goals} | {o.id for o in model.obstacles})
    dependents: dict[NodeId, list[NodeId]] = {n: [] for n in nodes}
    indegree: dict[NodeId, int] = {n: 0 for n in nodes}

    def add_edge(src: NodeId, dst: NodeId) -> None:
        dependents[src].append(dst)
        indegree[dst] += 1

    for r in model.refinements:
        for child in r.children:
            add_edge(child, r.parent)
    for link in model.obstructions:
        add_edge(link.obstacle, link.goal)

    ready = [n for n in nodes if indegree[n] == 0]
    heapq.heapify(ready)
    out: list[NodeId] = []
    while ready:
        node = heapq.heappop(ready)
        out.append(node)
        for dep in dependents[node]:
            indegree[dep] -= 1
            if indegree[dep] == 0:
                heapq.heappush(ready, dep)
    if len(out) != len(nodes):
        raise ValueError("refinement graph contains a cycle")
    return out


def leaf_obstacles(model: GoalModel) -> list[NodeId]:
    """Ids of the obstacles carrying a direct probability estimate,
    lexicographically ordered."""
    return [o.id for o in model.obstacles if o.probability is not None]


def _refinement_cycles(
    refinements: Sequence[Refinement], known: set[NodeId]
) -> list[list[NodeId]]:
    """Find refinement cycles; each is reported once, rotated so the
    lexicographically smallest member leads."""
    edges: dict[NodeId, list[NodeId]] = {}
    for r in refinements:
        for child in r.children:
            if child in known and r.parent in known:
                edges.setdefault(child, []).append(r.parent)

    WHITE, GREY, BLACK = 0, 1, 2
    color: dict[NodeId, int] = {}
    stack: list[NodeId] = []
    cycles: list[list[NodeId]] = []
    found: set[tuple[NodeId, ...]] = set()

    def visit(node: NodeId) -> None:
        color[node] = GREY
        stack.append(node)
        for nxt in sorted(edges.get(node, ())):
            state = color.get(nxt, WHITE)
            if state == WHITE:
                visit(nxt)
            elif state == GREY:
                cycle = stack[stack.index(nxt) :]
                smallest = min(range(len(cycle)), key=lambda i: cycle[i])
                rotated = tuple(cycle[smallest:] + cycle[:smallest])
                if rotated not in found:
                    found.add(rotated)
                    cycles.append(list(rotated) + [rotated[0]])
        stack.pop()
        color[node] = BLACK

    for start in sorted(edges):
        if color.get(start, WHITE) == WHITE:
            visit(start)
    return cycles
