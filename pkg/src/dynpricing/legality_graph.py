"""Legality graph of a simplified market relative to a legal allocation.

There is an edge ``x -> y`` when the owner of ``x`` could legally hold
``y`` but does not.  Shifting items backwards along a cycle (each item
goes to the owner of its predecessor) produces another legal allocation.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .errors import InternalInvariantError, PreconditionError
from .market import Allocation, SimplifiedMarket


def check_legal_allocation(sm: SimplifiedMarket, allocation: Allocation) -> None:
    if not allocation.is_full(sm):
        raise PreconditionError("allocation is not full")
    for p in sm.players:
        if not allocation.bundle(p) <= sm.L(p):
            raise PreconditionError(f"player {p!r} holds an illegal item")


@dataclass(frozen=True)
class Cycle:
    """Cyclic item sequence; ``players[j]`` owns ``items[j]`` and induces the edge
    ``items[j] -> items[j+1]``."""

    items: tuple[str, ...]
    players: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.items)

    @property
    def uniquely_assigned(self) -> bool:
        return len(set(self.players)) == len(self.players)

    def rotate(self, start: int) -> "Cycle":
        s = start % len(self.items)
        return Cycle(self.items[s:] + self.items[:s], self.players[s:] + self.players[:s])

    def rotate_to(self, item: str) -> "Cycle":
        return self.rotate(self.items.index(item))

    def canonical(self, sm: SimplifiedMarket) -> "Cycle":
        first = min(range(len(self.items)), key=lambda j: sm.item_index(self.items[j]))
        return self.rotate(first)


@dataclass(frozen=True)
class LegalityGraph:
    market: SimplifiedMarket
    allocation: Allocation
    succ: Mapping[str, tuple[str, ...]]

    def edges(self) -> Iterator[tuple[str, str, str]]:
        for x in self.market.items:
            for y in self.succ[x]:
                yield x, y, self.allocation.owner(x)

    def has_edge(self, x: str, y: str) -> bool:
        return y in self.succ.get(x, ())

    def owner(self, item: str) -> str:
        return self.allocation.owner(item)

    def cycle(self, items: Iterable[str]) -> Cycle:
        """Wrap an item sequence as a cycle, checking every edge."""
        seq = tuple(items)
        if not seq:
            raise PreconditionError("empty cycle")
        for a, b in zip(seq, seq[1:] + seq[:1]):
            if not self.has_edge(a, b):
                raise PreconditionError(f"{a} -> {b} is not an edge")
        if len(set(seq)) != len(seq):
            raise PreconditionError("cycle repeats an item")
        return Cycle(seq, tuple(self.owner(x) for x in seq))


def build_legality_graph(sm: SimplifiedMarket, allocation: Allocation) -> LegalityGraph:
    check_legal_allocation(sm, allocation)
    succ = {}
    for x in sm.items:
        p = allocation.owner(x)
        succ[x] = tuple(sm.sort_items(sm.L(p) - allocation.bundle(p)))
    return LegalityGraph(sm, allocation, succ)


def reallocate(graph: LegalityGraph, cycle: Cycle | Iterable[str]) -> Allocation:
    """Give every cycle item to the owner of its predecessor."""
    if not isinstance(cycle, Cycle):
        cycle = graph.cycle(cycle)
    else:
        graph.cycle(cycle.items)
    bundles = {p: set(b) for p, b in graph.allocation.items()}
    seq = cycle.items
    for a, b in zip(seq, seq[1:] + seq[:1]):
        pa = graph.owner(a)
        bundles[pa].discard(a)
    for a, b in zip(seq, seq[1:] + seq[:1]):
        bundles[graph.owner(a)].add(b)
    return Allocation(bundles)


def _shortest_return(graph: LegalityGraph, item: str) -> list[str] | None:
    """Shortest item path ``item -> ... -> item`` by breadth-first search."""
    parent: dict[str, str] = {}
    queue = deque()
    for y in graph.succ[item]:
        if y == item:
            continue
        if y not in parent:
            parent[y] = item
            queue.append(y)
    while queue:
        x = queue.popleft()
        for y in graph.succ[x]:
            if y == item:
                path = [x]
                while path[-1] != item:
                    path.append(parent[path[-1]])
                path.reverse()
                return path
            if y not in parent:
                parent[y] = x
                queue.append(y)
    return None


def find_uniquely_assigned_cycle(graph: LegalityGraph, item: str) -> Cycle:
    """A shortest cycle through ``item``, shortcut until no player repeats."""
    path = _shortest_return(graph, item)
    if path is None:
        raise InternalInvariantError(f"no cycle through {item!r}")
    while True:
        owners = [graph.owner(x) for x in path]
        clash = None
        for a in range(len(path)):
            for b in range(a + 1, len(path)):
                if owners[a] == owners[b]:
                    clash = (a, b)
                    break
            if clash:
                break
        if clash is None:
            return graph.cycle(path)
        a, b = clash
        # the owner of x_a may jump straight to x_{b+1}
        if b + 1 < len(path) and graph.has_edge(path[a], path[(b + 1)]):
            path = path[: a + 1] + path[b + 1:]
        elif b + 1 == len(path) and graph.has_edge(path[a], path[0]):
            path = path[: a + 1]
        else:
            raise InternalInvariantError("shortcut edge missing")
        if item not in path:
            raise InternalInvariantError("shortcut dropped the anchor item")


def induced_submarket(sm: SimplifiedMarket, allocation: Allocation, items: Iterable[str]) -> SimplifiedMarket:
    """Market on ``items`` whose players keep their share of ``allocation``.

    Legality is that of ``sm`` restricted to ``items``.
    """
    keep = frozenset(items)
    demand = {}
    for p in sm.players:
        share = len(allocation.bundle(p) & keep)
        if share:
            demand[p] = share
    return sm.submarket(keep, demand)
