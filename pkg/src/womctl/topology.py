"""Directed delay networks: validation, minimum communication delays, relay paths.

Agents are numbered 1..K and the agent order is meaningful throughout the
package (it determines which information counts as shared). Links are
directed and carry a strictly positive integer delay, so the delay from j
to k generally differs from the delay from k to j.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import (
    DuplicateLink,
    NonPositiveDelay,
    NotStronglyConnected,
    SameAgent,
    SelfLink,
    TopologyError,
)


@dataclass(frozen=True, order=True)
class Link:
    src: int
    dst: int
    delay: int


@dataclass(frozen=True)
class Topology:
    """A directed graph of agents with per-link transmission delays."""

    agent_count: int
    links: tuple[Link, ...]

    @classmethod
    def of(cls, agent_count: int, links) -> "Topology":
        """Build a topology from (src, dst, delay) triples, sorted canonically."""
        ls = tuple(sorted(Link(int(a), int(b), int(w)) for a, b, w in links))
        return cls(agent_count=int(agent_count), links=ls)

    def agents(self) -> range:
        return range(1, self.agent_count + 1)

    def out_links(self, agent: int) -> list[Link]:
        return [l for l in self.links if l.src == agent]


@dataclass(frozen=True)
class InfoPath:
    """A relay path through the network and its accumulated delay."""

    nodes: tuple[int, ...]
    total_delay: int


@dataclass(frozen=True)
class DelayMatrix:
    """Minimum communication delays for every ordered agent pair.

    ``delay(j, k)`` is the least total delay over all paths from j to k;
    the diagonal is 0 by convention.
    """

    agent_count: int
    rows: tuple[tuple[int, ...], ...]

    def delay(self, src: int, dst: int) -> int:
        return self.rows[src - 1][dst - 1]

    def agents(self) -> range:
        return range(1, self.agent_count + 1)


def validate_topology(t: Topology) -> None:
    """Raise a TopologyError unless ``t`` satisfies every structural invariant.

    Checks, in order: agent count, link endpoints, self links, duplicate
    ordered pairs, positive delays, and strong connectivity (the first
    unreachable ordered pair is named in the error).
    """
    if t.agent_count < 1:
        raise TopologyError(f"agent count must be >= 1, got {t.agent_count}")
    seen: set[tuple[int, int]] = set()
    for l in t.links:
        if not (1 <= l.src <= t.agent_count and 1 <= l.dst <= t.agent_count):
            raise TopologyError(f"link {l} references an unknown agent")
        if l.src == l.dst:
            raise SelfLink(l.src)
        if (l.src, l.dst) in seen:
            raise DuplicateLink(l.src, l.dst)
        seen.add((l.src, l.dst))
        if l.delay < 1:
            raise NonPositiveDelay(l.src, l.dst, l.delay)
    reach = _reachability(t)
    for a, b in itertools.product(t.agents(), t.agents()):
        if a != b and not reach[a - 1][b - 1]:
            raise NotStronglyConnected(a, b)


def _reachability(t: Topology) -> list[list[bool]]:
    n = t.agent_count
    r = [[False] * n for _ in range(n)]
    adj: dict[int, list[int]] = {a: [] for a in t.agents()}
    for l in t.links:
        adj[l.src].append(l.dst)
    for a in t.agents():
        stack, seen = [a], {a}
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        for b in seen:
            r[a - 1][b - 1] = True
    return r


def min_delay_matrix(t: Topology) -> DelayMatrix:
    """All-pairs minimum communication delays (Floyd-Warshall on link delays)."""
    validate_topology(t)
    n = t.agent_count
    inf = float("inf")
    d = [[inf] * n for _ in range(n)]
    for i in range(n):
        d[i][i] = 0
    for l in t.links:
        d[l.src - 1][l.dst - 1] = min(d[l.src - 1][l.dst - 1], l.delay)
    for m in range(n):
        for i in range(n):
            dim = d[i][m]
            if dim == inf:
                continue
            row_m = d[m]
            row_i = d[i]
            for j in range(n):
                alt = dim + row_m[j]
                if alt < row_i[j]:
                    row_i[j] = alt
    # strong connectivity guarantees every entry is finite
    return DelayMatrix(n, tuple(tuple(int(x) for x in row) for row in d))


def information_path(t: Topology, k: int, j: int) -> InfoPath:
    """The relay path from k to j used for transmissions.

    Among all simple paths achieving the minimum total delay, ties are broken
    by the lexicographically smallest sequence of cumulative arrival times at
    the successive relays (information reaches each intermediate agent as
    early as possible), and remaining ties by the smallest node sequence.
    """
    validate_topology(t)
    if k == j:
        raise SameAgent(k)
    d = min_delay_matrix(t)
    best = d.delay(k, j)
    out: dict[int, list[Link]] = {a: sorted(t.out_links(a)) for a in t.agents()}

    best_key: tuple | None = None
    best_path: tuple[int, ...] | None = None

    def walk(node: int, path: tuple[int, ...], arrivals: tuple[int, ...]) -> None:
        nonlocal best_key, best_path
        if node == j:
            key = (arrivals, path)
            if best_key is None or key < best_key:
                best_key, best_path = key, path
            return
        so_far = arrivals[-1] if arrivals else 0
        for l in out[node]:
            if l.dst in path:
                continue  # positive delays: revisits can never win
            if so_far + l.delay + d.delay(l.dst, j) > best:
                continue
            walk(l.dst, path + (l.dst,), arrivals + (so_far + l.delay,))

    walk(k, (k,), ())
    assert best_path is not None  # strong connectivity
    return InfoPath(nodes=best_path, total_delay=best)
