"""Split semantic graphs into event subgraphs and turn them into text.

The splitter finds every predicate (a concept with a numeric sense suffix
such as ``want-01``) and, for each of its core roles (``:ARGn`` labels,
including ``:ARGn-of`` inverses normalized to forward direction), cuts out
a subgraph holding the predicate, that core-role edge, and the full
descendant subtree below the role filler. Modifier edges hanging off the
predicate itself (``:time``, ``:manner``, ...) are pruned; modifiers deeper
inside the role subtree stay. A re-entrant mention deeper in the subtree,
pointing at a node defined elsewhere in the graph, keeps the edge but only
copies the referenced node's concept and attributes, so every subgraph is
self-contained.

Two split modes exist: ``one-cr`` (the default) emits one subgraph per
core role, ``all-deps`` groups all core roles of a predicate into a single
subgraph.

Realization is pluggable: :func:`realize_baseline` is a deterministic
offline template, :func:`realize_remote` calls a generation service.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Sequence

from .amr import AmrGraph, Attribute, Edge, serialize_penman
from .errors import MalformedServiceReply
from .services import GraphToTextClient

_PREDICATE_RE = re.compile(r".+-(\d{2,})$")
_CORE_RE = re.compile(r":ARG(\d+)$")
_CORE_INVERSE_RE = re.compile(r":ARG(\d+)-of$")

SPLIT_MODES = ("one-cr", "all-deps")


@dataclass(frozen=True)
class PredicateNode:
    """A node whose concept carries a sense suffix, e.g. ``recruit-01``."""

    variable: str
    concept: str
    sense: int

    @property
    def lemma(self) -> str:
        return self.concept.rsplit("-", 1)[0]


@dataclass(frozen=True)
class CoreRoleEdge:
    """A core-role edge of a predicate, in normalized (forward) reading.

    ``edge`` is the stored edge as it appears in the graph; when ``inverse``
    is set it carries an ``:ARGn-of`` label and the normalized direction
    runs from its target (the predicate) to its source.
    """

    edge: Edge
    arg_index: int
    inverse: bool

    @property
    def predicate_var(self) -> str:
        return self.edge.target if self.inverse else self.edge.source

    @property
    def filler_var(self) -> str:
        return self.edge.source if self.inverse else self.edge.target

    @property
    def role(self) -> str:
        return f":ARG{self.arg_index}"


@dataclass(frozen=True)
class SmuCandidate:
    """One unit candidate: a subgraph rooted at its predicate, plus the
    core roles it was cut around and, once realized, its text."""

    subgraph: AmrGraph
    predicate: PredicateNode
    core_roles: tuple[CoreRoleEdge, ...]
    text: str | None = None


def _dfs_order(graph: AmrGraph) -> list[str]:
    children: dict[str, list[Edge]] = {}
    for edge in graph.edges:
        children.setdefault(edge.source, []).append(edge)
    order: list[str] = []
    seen: set[str] = set()

    def walk(var: str) -> None:
        seen.add(var)
        order.append(var)
        for edge in children.get(var, []):
            if edge.target not in seen:
                walk(edge.target)

    walk(graph.root)
    for var in graph.nodes:
        if var not in seen:
            walk(var)
    return order


def _defining_edges(graph: AmrGraph) -> dict[str, Edge | None]:
    """First-visit edge per node in depth-first order; the root has None.

    This recovers the tree structure behind the stored edge list: a node's
    defining edge is where it would be expanded in serialized form, every
    other mention of it is a re-entrancy.
    """
    children: dict[str, list[Edge]] = {}
    for edge in graph.edges:
        children.setdefault(edge.source, []).append(edge)
    defining: dict[str, Edge | None] = {graph.root: None}

    def walk(var: str) -> None:
        for edge in children.get(var, []):
            if edge.target not in defining:
                defining[edge.target] = edge
                walk(edge.target)

    walk(graph.root)
    for var in graph.nodes:
        defining.setdefault(var, None)
    return defining


def find_predicates(graph: AmrGraph) -> list[PredicateNode]:
    """All predicate nodes, ordered by first appearance in a depth-first
    traversal from the root."""
    predicates = []
    for var in _dfs_order(graph):
        match = _PREDICATE_RE.match(graph.nodes[var])
        if match:
            predicates.append(
                PredicateNode(var, graph.nodes[var], int(match.group(1)))
            )
    return predicates


def _core_roles(graph: AmrGraph, predicate: PredicateNode) -> list[CoreRoleEdge]:
    roles = []
    for edge in graph.edges:
        forward = _CORE_RE.fullmatch(edge.role)
        if edge.source == predicate.variable and forward:
            roles.append(CoreRoleEdge(edge, int(forward.group(1)), False))
            continue
        inverse = _CORE_INVERSE_RE.fullmatch(edge.role)
        if edge.target == predicate.variable and inverse:
            roles.append(CoreRoleEdge(edge, int(inverse.group(1)), True))
    return roles


def _build_candidate(
    graph: AmrGraph,
    predicate: PredicateNode,
    group: tuple[CoreRoleEdge, ...],
    all_roles: list[CoreRoleEdge],
    defining: dict[str, Edge | None],
    adjacency: dict[str, list[Edge]],
) -> SmuCandidate:
    nodes: dict[str, str] = {predicate.variable: predicate.concept}
    edges: list[Edge] = []
    # every stored core-role edge of this predicate is excluded from
    # expansion; only the group's get re-added in normalized direction
    stored = {core.edge for core in all_roles}

    def expand(var: str) -> None:
        for edge in adjacency.get(var, []):
            if edge in stored:
                continue
            target = edge.target
            if target in nodes:
                edges.append(edge)
            elif defining.get(target) == edge:
                nodes[target] = graph.nodes[target]
                edges.append(edge)
                expand(target)
            else:
                # re-entrant mention of a node defined elsewhere: keep the
                # edge, copy only the concept (attributes travel below)
                nodes[target] = graph.nodes[target]
                edges.append(edge)

    for core in group:
        filler = core.filler_var
        edges.append(Edge(predicate.variable, core.role, filler))
        if filler not in nodes:
            nodes[filler] = graph.nodes[filler]
            expand(filler)

    attributes = tuple(a for a in graph.attributes if a.source in nodes)
    sub = AmrGraph(
        root=predicate.variable,
        nodes=nodes,
        edges=tuple(edges),
        attributes=attributes,
    )
    return SmuCandidate(sub, predicate, group)


def split_graph(graph: AmrGraph, mode: str = "one-cr") -> list[SmuCandidate]:
    """Cut *graph* into per-predicate core-role subgraphs.

    Predicates without any core role contribute nothing. Output order is
    deterministic: predicates in depth-first order, and within a predicate
    its core roles in stored edge order.
    """
    if mode not in SPLIT_MODES:
        raise ValueError(f"unknown split mode {mode!r}, expected one of {SPLIT_MODES}")
    defining = _defining_edges(graph)
    adjacency: dict[str, list[Edge]] = {}
    for edge in graph.edges:
        adjacency.setdefault(edge.source, []).append(edge)

    candidates = []
    for predicate in find_predicates(graph):
        roles = _core_roles(graph, predicate)
        if not roles:
            continue
        groups = [(r,) for r in roles] if mode == "one-cr" else [tuple(roles)]
        for group in groups:
            candidates.append(
                _build_candidate(graph, predicate, group, roles, defining, adjacency)
            )
    return candidates


# ---------------------------------------------------------------------------
# Realization


def _strip_quotes(value: str) -> str:
    if len(value) >= 2 and value.startswith('"') and value.endswith('"'):
        return value[1:-1].replace('\\"', '"')
    return value


def _lemma_of(concept: str) -> str:
    match = _PREDICATE_RE.match(concept)
    if match:
        return concept[: -(len(match.group(1)) + 1)]
    return concept


def realize_baseline(candidate: SmuCandidate) -> str:
    """Deterministic template realization of a candidate subgraph.

    At every node: an ``:ARG0`` subtree comes first, then "not" for
    ``:polarity -``, the concept lemma, remaining attribute values, the
    other ``:ARGn`` subtrees by index, and finally non-core subtrees in
    edge order. ``:name`` structures are spliced in as their literal parts.
    No inflection is attempted; tokens are joined by single spaces.
    """
    graph = candidate.subgraph
    adjacency: dict[str, list[Edge]] = {}
    for edge in graph.edges:
        adjacency.setdefault(edge.source, []).append(edge)
    attrs: dict[str, list[Attribute]] = {}
    for attr in graph.attributes:
        attrs.setdefault(attr.source, []).append(attr)
    visited: set[str] = set()

    def name_words(var: str) -> list[str]:
        visited.add(var)
        ops = []
        for attr in attrs.get(var, []):
            match = re.fullmatch(r":op(\d+)", attr.role)
            if match:
                ops.append((int(match.group(1)), _strip_quotes(attr.value)))
        return [word for _, word in sorted(ops)]

    def words_for(var: str) -> list[str]:
        visited.add(var)
        arg_edges = []
        other_edges = []
        for edge in adjacency.get(var, []):
            match = _CORE_RE.fullmatch(edge.role)
            if match:
                arg_edges.append((int(match.group(1)), edge))
            else:
                other_edges.append(edge)
        arg_edges.sort(key=lambda item: item[0])

        def descend(edge: Edge) -> list[str]:
            if edge.target in visited:
                return []
            if edge.role == ":name":
                return name_words(edge.target)
            return words_for(edge.target)

        words: list[str] = []
        for index, edge in arg_edges:
            if index == 0:
                words.extend(descend(edge))
        if any(a.role == ":polarity" and a.value == "-" for a in attrs.get(var, [])):
            words.append("not")
        words.append(_lemma_of(graph.nodes[var]))
        for attr in attrs.get(var, []):
            if attr.role == ":polarity":
                continue
            words.append(_strip_quotes(attr.value))
        for index, edge in arg_edges:
            if index != 0:
                words.extend(descend(edge))
        for edge in other_edges:
            words.extend(descend(edge))
        return [w for w in words if w]

    return " ".join(words_for(graph.root))


def realize_remote(
    candidates: Sequence[SmuCandidate],
    endpoint: str,
    *,
    batch_size: int = 32,
    concurrency: int = 4,
    client: GraphToTextClient | None = None,
) -> list[SmuCandidate]:
    """Fill in candidate texts via the graph-to-text service.

    Subgraphs are serialized to PENMAN and sent in batches; the reply order
    matches the input order. An empty candidate list makes no network call.
    """
    if not candidates:
        return []
    if client is None:
        client = GraphToTextClient(
            endpoint, batch_size=batch_size, concurrency=concurrency
        )
    penman = [serialize_penman(c.subgraph) for c in candidates]
    texts = client.generate(penman)
    if len(texts) != len(candidates):
        raise MalformedServiceReply(
            f"generation service answered {len(texts)} texts for {len(candidates)} graphs"
        )
    return [replace(c, text=t) for c, t in zip(candidates, texts)]
