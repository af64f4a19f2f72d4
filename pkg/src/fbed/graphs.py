"""DAGs with optional latent nodes, d-separation and Markov-blanket ground truth.

Separation statements involving latent nodes are answered by d-separation
in the full DAG with conditioning sets restricted to observed nodes. This
gives exactly the independencies of the marginal over the observed nodes,
so no ancestral-graph structure is ever built.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .criteria import Criterion, Decision
from .dataset import Dataset

MAX_BRUTE_FORCE = 14


class GraphError(ValueError):
    pass


class NonUniqueBlanketError(GraphError):
    """More than one minimum-size separating set exists for the target."""


@dataclass(frozen=True)
class Dag:
    n_nodes: int
    edges: frozenset
    latent: frozenset = frozenset()
    parents: tuple = field(init=False, repr=False, compare=False)
    children: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        edges = frozenset((int(a), int(b)) for a, b in self.edges)
        latent = frozenset(int(v) for v in self.latent)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "latent", latent)
        n = self.n_nodes
        parents = [set() for _ in range(n)]
        children = [set() for _ in range(n)]
        for a, b in edges:
            if not (0 <= a < n and 0 <= b < n):
                raise GraphError(f"edge {a}->{b} references a missing node")
            if a == b:
                raise GraphError(f"self-loop on node {a}")
            if (b, a) in edges:
                raise GraphError(f"nodes {a} and {b} are connected in both directions")
            parents[b].add(a)
            children[a].add(b)
        for v in latent:
            if not 0 <= v < n:
                raise GraphError(f"latent node {v} does not exist")
        object.__setattr__(self, "parents", tuple(frozenset(s) for s in parents))
        object.__setattr__(self, "children", tuple(frozenset(s) for s in children))
        self.topological_order()

    def topological_order(self) -> list[int]:
        indeg = [len(p) for p in self.parents]
        queue = deque(v for v in range(self.n_nodes) if indeg[v] == 0)
        order = []
        while queue:
            v = queue.popleft()
            order.append(v)
            for c in sorted(self.children[v]):
                indeg[c] -= 1
                if indeg[c] == 0:
                    queue.append(c)
        if len(order) != self.n_nodes:
            raise GraphError("graph contains a directed cycle")
        return order

    @property
    def observed(self) -> list[int]:
        return [v for v in range(self.n_nodes) if v not in self.latent]

    def ancestors(self, nodes: Iterable[int]) -> set[int]:
        """Nodes with a directed path into ``nodes``, including ``nodes`` themselves."""
        seen = set(nodes)
        stack = list(seen)
        while stack:
            for p in self.parents[stack.pop()]:
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        return seen

    def spouses(self, v: int) -> set[int]:
        out = set()
        for c in self.children[v]:
            out |= self.parents[c]
        out.discard(v)
        return out


def _check_node(g: Dag, v: int) -> None:
    if not 0 <= v < g.n_nodes:
        raise GraphError(f"node {v} out of range for {g.n_nodes} nodes")


def d_connected_nodes(g: Dag, x: int, Z: Iterable[int]) -> set[int]:
    """All nodes d-connected to ``x`` given ``Z`` (nodes of ``Z`` excluded).

    Reachability over (node, direction) states: a trail may pass a
    non-collider outside ``Z`` and a collider that is an ancestor of ``Z``.
    """
    Z = set(Z)
    _check_node(g, x)
    for z in Z:
        _check_node(g, z)
    anc = g.ancestors(Z)
    # direction "up": arrived from a child; "down": arrived from a parent
    visited = set()
    reached = set()
    queue = deque([(x, "up")])
    while queue:
        v, direction = queue.popleft()
        if (v, direction) in visited:
            continue
        visited.add((v, direction))
        if v not in Z:
            reached.add(v)
        if direction == "up" and v not in Z:
            queue.extend((p, "up") for p in g.parents[v])
            queue.extend((c, "down") for c in g.children[v])
        elif direction == "down":
            if v not in Z:
                queue.extend((c, "down") for c in g.children[v])
            if v in anc:
                queue.extend((p, "up") for p in g.parents[v])
    reached.discard(x)
    return reached


def d_separated(g: Dag, x: int, y: int, Z: Iterable[int]) -> bool:
    Z = set(Z)
    _check_node(g, y)
    if x == y:
        raise GraphError("x and y must differ")
    if x in Z or y in Z:
        raise GraphError("x and y must not be in the conditioning set")
    return y not in d_connected_nodes(g, x, Z)


def d_separated_sets(g: Dag, X: Iterable[int], Y: Iterable[int], Z: Iterable[int]) -> bool:
    """Set-level separation: every node of X is d-separated from every node of Y."""
    Z = set(Z)
    Y = set(Y)
    return all(not (Y & d_connected_nodes(g, x, Z)) for x in X)


def markov_blanket(g: Dag, t: int) -> set[int]:
    """Parents, children and spouses of ``t`` in a fully observed DAG."""
    if g.latent:
        raise GraphError("graph has latent nodes; use brute_force_mb")
    _check_node(g, t)
    return set(g.parents[t]) | set(g.children[t]) | g.spouses(t)


def brute_force_mb(g: Dag, t: int) -> set[int]:
    """Smallest observed set separating ``t`` from all other observed nodes.

    Searches subsets by increasing size and raises NonUniqueBlanketError if
    two different sets of the minimum size qualify.
    """
    _check_node(g, t)
    if t in g.latent:
        raise GraphError("target must be observed")
    others = [v for v in g.observed if v != t]
    if len(others) > MAX_BRUTE_FORCE:
        raise GraphError(f"{len(others)} candidate nodes exceed the brute-force limit {MAX_BRUTE_FORCE}")
    obs = set(others)
    for size in range(len(others) + 1):
        hits = []
        for S in itertools.combinations(others, size):
            if not (d_connected_nodes(g, t, S) & (obs - set(S))):
                hits.append(set(S))
        if len(hits) > 1:
            raise NonUniqueBlanketError(f"{len(hits)} separating sets of size {size}")
        if hits:
            return hits[0]
    raise AssertionError("the full observed set always separates")


def random_dag(n_nodes: int, edge_prob: float, n_latent: int, seed: int,
               target: int = 0) -> Dag:
    """Random DAG over a random topological order; ``n_latent`` non-target nodes are latent."""
    if not 0 <= n_latent < n_nodes:
        raise ValueError("need 0 <= n_latent < n_nodes")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n_nodes)
    edges = set()
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            if rng.random() < edge_prob:
                edges.add((int(order[i]), int(order[j])))
    pool = [v for v in range(n_nodes) if v != target]
    latent = rng.choice(pool, size=n_latent, replace=False) if n_latent else []
    return Dag(n_nodes, frozenset(edges), frozenset(int(v) for v in latent))


def to_edgelist(g: Dag) -> str:
    lines = [f"{g.n_nodes} {len(g.edges)}"]
    lines += [f"{a} {b}" for a, b in sorted(g.edges)]
    lines.append("latent: " + " ".join(str(v) for v in sorted(g.latent)))
    return "\n".join(lines).rstrip() + "\n"


def from_edgelist(text: str) -> Dag:
    lines = [ln.strip() for ln in text.strip().splitlines()]
    try:
        n_nodes, n_edges = (int(tok) for tok in lines[0].split())
        edges = [tuple(int(tok) for tok in ln.split()) for ln in lines[1:1 + n_edges]]
        tail = lines[1 + n_edges]
    except (ValueError, IndexError):
        raise GraphError("malformed edge list") from None
    if any(len(e) != 2 for e in edges) or not tail.startswith("latent:"):
        raise GraphError("malformed edge list")
    latent = [int(tok) for tok in tail[len("latent:"):].split()]
    return Dag(n_nodes, frozenset(edges), frozenset(latent))


class OracleCriterion(Criterion):
    """Perfect independence tests read off a DAG.

    Variables are the observed non-target nodes in increasing node order;
    variable ``i`` is node ``nodes[i]``. Forward scores are 0 for dependent
    and 1 for independent candidates; backward scores are 1 when removal is
    allowed.
    """

    removal_prefers_high = True
    name = "oracle"

    def __init__(self, g: Dag, target: int):
        _check_node(g, target)
        if target in g.latent:
            raise GraphError("target must be observed")
        self.graph = g
        self.target = target
        self.nodes = [v for v in g.observed if v != target]
        self._var = {node: i for i, node in enumerate(self.nodes)}

    def var_of(self, node: int) -> int:
        return self._var[node]

    def to_nodes(self, vars: Iterable[int]) -> set[int]:
        return {self.nodes[i] for i in vars}

    def n_variables(self, d: Dataset | None) -> int:
        if d is not None and d.p != len(self.nodes):
            raise ValueError(f"dataset has {d.p} variables, oracle has {len(self.nodes)}")
        return len(self.nodes)

    def dependent(self, v: int, S: Sequence[int]) -> bool:
        """Is variable ``v`` d-connected to the target given variables ``S``?"""
        return self.nodes[v] in d_connected_nodes(self.graph, self.target, self.to_nodes(S))

    def forward_sweep(self, d, S, candidates):
        reach = d_connected_nodes(self.graph, self.target, self.to_nodes(S))
        out = []
        for v in candidates:
            dep = self.nodes[v] in reach
            out.append(Decision(dep, 0.0 if dep else 1.0))
        return out

    def backward_sweep(self, d, S, candidates=None):
        S = list(S)
        candidates = S if candidates is None else list(candidates)
        out = []
        for v in candidates:
            rest = [u for u in S if u != v]
            indep = not self.dependent(v, rest)
            out.append(Decision(indep, 1.0 if indep else 0.0))
        return out

    def describe(self):
        return {"criterion": self.name, "target": self.target}


def oracle_criterion(g: Dag, target: int) -> OracleCriterion:
    return OracleCriterion(g, target)
