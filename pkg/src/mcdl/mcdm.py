"""Benefit-factor aggregation over an agent neighborhood graph.

Each agent ``i`` carries its own benefit ``b_i`` and a neighborhood ``N_i``.
Its overall assessment is::

    B_i = b_i + sum_{j in N_i} mu_ij * b_j
    mu_ij = (b_i + b_j) / K                      (plain)
    mu_ij = (b_i + b_j) / K * (C_ij + 1)         (mutual, C_ij = |N_i & N_j|)

Agents are ranked by ``B`` descending, ties by ascending id.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Literal, Mapping, Sequence

import numpy as np
from sortedcontainers import SortedList

Weighting = Literal["plain", "mutual"]
WEIGHTINGS = ("plain", "mutual")


class McdmError(ValueError):
    pass


def mu(b_i: float, b_j: float, K: float) -> float:
    if K <= 0:
        raise McdmError(f"K must be positive, got {K}")
    return (b_i + b_j) / K


def mutual_mu(b_i: float, b_j: float, k: float, C_j: int) -> float:
    if k <= 0:
        raise McdmError(f"k must be positive, got {k}")
    if C_j < 0:
        raise McdmError(f"common-agent count must be >= 0, got {C_j}")
    return (b_i + b_j) / k * (C_j + 1)


def _neighbor_benefit(
    i: int,
    b: Mapping[int, float],
    neighbors: Mapping[int, Iterable[int]],
    K: float,
    weighting: str,
) -> float:
    # mu / mutual_mu inlined; sorted iteration keeps the summation order canonical
    if K <= 0:
        raise McdmError(f"K must be positive, got {K}")
    total = 0.0
    b_i = b[i]
    n_i = neighbors[i]
    if weighting == "plain":
        for j in sorted(n_i):
            b_j = b[j]
            total += (b_i + b_j) / K * b_j
    else:
        n_i = set(n_i)
        for j in sorted(n_i):
            b_j = b[j]
            total += (b_i + b_j) / K * (len(n_i.intersection(neighbors[j])) + 1) * b_j
    return total


@dataclass(frozen=True)
class Agent:
    id: int
    b: float
    criteria: tuple[float, ...] = ()
    neighbors: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "neighbors", frozenset(int(j) for j in self.neighbors))
        object.__setattr__(self, "criteria", tuple(float(c) for c in self.criteria))
        if self.id in self.neighbors:
            raise McdmError(f"agent {self.id} lists itself as a neighbor")


@dataclass(frozen=True)
class AgentGraph:
    agents: tuple[Agent, ...]
    K: float
    symmetric: bool = False
    _b: dict = field(init=False, repr=False, compare=False)
    _nbrs: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        agents = tuple(self.agents)
        object.__setattr__(self, "agents", agents)
        if not self.K > 0:
            raise McdmError(f"K must be positive, got {self.K}")
        ids = [a.id for a in agents]
        if len(set(ids)) != len(ids):
            raise McdmError("agent ids must be unique")
        known = set(ids)
        for a in agents:
            unknown = a.neighbors - known
            if unknown:
                raise McdmError(f"agent {a.id} has unknown neighbors {sorted(unknown)}")
        object.__setattr__(self, "_b", {a.id: float(a.b) for a in agents})
        object.__setattr__(self, "_nbrs", {a.id: a.neighbors for a in agents})

    def __len__(self) -> int:
        return len(self.agents)

    def __contains__(self, agent_id: int) -> bool:
        return agent_id in self._b

    def scaled(self, c: float) -> "AgentGraph":
        """Same graph with every benefit multiplied by ``c``."""
        return AgentGraph(
            tuple(Agent(a.id, a.b * c, a.criteria, a.neighbors) for a in self.agents),
            self.K,
            self.symmetric,
        )


@dataclass(frozen=True)
class Ranking:
    entries: tuple[tuple[int, float], ...]

    @property
    def order(self) -> list[int]:
        return [i for i, _ in self.entries]

    def position(self, agent_id: int) -> int:
        return self.order.index(agent_id)


def _check_weighting(weighting: str) -> None:
    if weighting not in WEIGHTINGS:
        raise McdmError(f"weighting must be one of {WEIGHTINGS}, got {weighting!r}")


def neighbor_benefit(agent_id: int, graph: AgentGraph, weighting: Weighting = "plain") -> float:
    """Weighted neighbor benefit ``b(N_i)`` of one agent."""
    _check_weighting(weighting)
    if agent_id not in graph:
        raise McdmError(f"unknown agent {agent_id}")
    return _neighbor_benefit(agent_id, graph._b, graph._nbrs, graph.K, weighting)


def overall_benefit(agent_id: int, graph: AgentGraph, weighting: Weighting = "plain") -> float:
    """Overall assessment ``B(a_i) = b_i + b(N_i)``."""
    nb = neighbor_benefit(agent_id, graph, weighting)
    return graph._b[agent_id] + nb


def _ranked(scores: Mapping[int, float]) -> Ranking:
    return Ranking(tuple(sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))))


def rank(graph: AgentGraph, weighting: Weighting = "plain") -> Ranking:
    if len(graph) == 0:
        raise McdmError("cannot rank an empty graph")
    _check_weighting(weighting)
    return _ranked({a.id: overall_benefit(a.id, graph, weighting) for a in graph.agents})


def _nearest(dists: np.ndarray, k: int) -> np.ndarray:
    """Indices of the ``k`` smallest distances, ties broken by lower index."""
    if k >= len(dists):
        return np.lexsort((np.arange(len(dists)), dists))
    kth = np.partition(dists, k - 1)[k - 1]
    cand = np.flatnonzero(dists <= kth)
    return cand[np.lexsort((cand, dists[cand]))][:k]


def build_agent_graph(
    criteria: np.ndarray,
    neighborhood_k: int = 10,
    K: float | None = None,
    ids: Sequence[int] | None = None,
) -> AgentGraph:
    """Agents from per-criterion decision values.

    ``b_i`` is the row mean of ``criteria``; ``N_i`` the ``neighborhood_k``
    nearest other rows (Euclidean, ties by lower index), symmetrized by union.
    ``K`` defaults to ``neighborhood_k``.
    """
    criteria = np.asarray(criteria, dtype=float)
    if criteria.ndim == 1:
        criteria = criteria[:, None]
    n = len(criteria)
    if n < 2:
        raise McdmError(f"need at least 2 alternatives, got {n}")
    if not 1 <= neighborhood_k < n:
        raise McdmError(f"neighborhood_k={neighborhood_k} must lie in [1, {n - 1}]")
    K = float(neighborhood_k) if K is None else float(K)
    ids = list(range(n)) if ids is None else [int(i) for i in ids]

    nbrs: list[set[int]] = [set() for _ in range(n)]
    for i in range(n):
        d = np.sqrt(((criteria - criteria[i]) ** 2).sum(axis=1))
        d[i] = np.inf
        for j in _nearest(d, neighborhood_k):
            nbrs[i].add(int(j))
            nbrs[int(j)].add(i)
    b = criteria.mean(axis=1)
    agents = tuple(
        Agent(ids[i], float(b[i]), tuple(criteria[i]), frozenset(ids[j] for j in nbrs[i]))
        for i in range(n)
    )
    return AgentGraph(agents, K, symmetric=True)


@dataclass(frozen=True)
class RankingDelta:
    """Score changes caused by one arriving agent."""

    agent_id: int
    position: int
    changes: tuple[tuple[int, float | None, float], ...]


class IncrementalAgentGraph:
    """Append-only agent graph that keeps its ranking current.

    A new agent links to its ``neighborhood_k`` nearest existing agents
    (symmetrized). Only the new agent and those neighbors change score, in
    both weighting modes, so each insertion re-ranks ``neighborhood_k + 1``
    agents.
    """

    def __init__(self, neighborhood_k: int = 10, K: float | None = None, weighting: Weighting = "plain", dim: int = 1):
        _check_weighting(weighting)
        if neighborhood_k < 1:
            raise McdmError("neighborhood_k must be >= 1")
        self.neighborhood_k = neighborhood_k
        self.K = float(neighborhood_k) if K is None else float(K)
        if self.K <= 0:
            raise McdmError("K must be positive")
        self.weighting = weighting
        self._criteria = np.empty((64, dim))
        self.b: dict[int, float] = {}
        self.neighbors: dict[int, set[int]] = {}
        self.scores: dict[int, float] = {}
        self._order = SortedList()
        self._ids: list[int] = []

    def __len__(self) -> int:
        return len(self._ids)

    def add(self, agent_id: int, criteria: Sequence[float]) -> RankingDelta:
        crit = np.asarray(criteria, dtype=float).reshape(-1)
        if agent_id in self.b:
            raise McdmError(f"duplicate agent id {agent_id}")
        m = len(self._ids)
        if m == self._criteria.shape[0]:
            grown = np.empty((2 * m, self._criteria.shape[1]))
            grown[:m] = self._criteria
            self._criteria = grown
        new_nbrs: set[int] = set()
        if m:
            d = ((self._criteria[:m] - crit) ** 2).sum(axis=1)  # squared: same order
            new_nbrs = {self._ids[j] for j in _nearest(d, min(self.neighborhood_k, m))}
        self._criteria[m] = crit
        self._ids.append(agent_id)
        self.b[agent_id] = float(crit.mean())
        self.neighbors[agent_id] = new_nbrs
        for j in new_nbrs:
            self.neighbors[j].add(agent_id)

        changes = []
        for i in sorted(new_nbrs | {agent_id}):
            old = self.scores.get(i)
            if old is not None:
                self._order.remove((-old, i))
            new = self.b[i] + _neighbor_benefit(i, self.b, self.neighbors, self.K, self.weighting)
            self.scores[i] = new
            self._order.add((-new, i))
            changes.append((i, old, new))
        position = self._order.index((-self.scores[agent_id], agent_id))
        return RankingDelta(agent_id, position, tuple(changes))

    def ranking(self) -> Ranking:
        return Ranking(tuple((i, -s) for s, i in self._order))

    def to_agent_graph(self) -> AgentGraph:
        agents = tuple(
            Agent(i, self.b[i], tuple(self._criteria[n]), frozenset(self.neighbors[i]))
            for n, i in enumerate(self._ids)
        )
        return AgentGraph(agents, self.K, symmetric=True)
