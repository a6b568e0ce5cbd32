"""Edge streams: data model, file formats, orderings, and scenario generators.

A stream is a sequence of edge events over an undirected simple graph. Each
event inserts or deletes one edge. Streams are *feasible*: an insertion never
duplicates a live edge and a deletion always targets a live edge. Everything
downstream (exact counting, sampling, estimation) assumes feasibility; the
reader validates it, the generators guarantee it by construction.
"""

import random
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, TextIO, Union

import numpy as np

MAX_VERTEX = 2**31 - 1

ORDERINGS = ("natural", "uar", "rbfs")
SCENARIOS = ("insert-only", "massive", "light")

Edge = tuple[int, int]


class StreamError(ValueError):
    """Malformed or infeasible stream input."""


def make_edge(u: int, v: int) -> Edge:
    """Canonical edge (min, max). Rejects self-loops and out-of-range ids."""
    if u == v:
        raise StreamError(f"self-loop ({u}, {v}) is not a valid edge")
    if u < 0 or v < 0:
        raise StreamError(f"negative vertex id in ({u}, {v})")
    if u > MAX_VERTEX or v > MAX_VERTEX:
        raise StreamError(f"vertex id above {MAX_VERTEX} in ({u}, {v})")
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class EdgeEvent:
    """One stream event: op is '+' or '-', index is 1-based stream position."""

    op: str
    edge: Edge
    index: int


@dataclass
class StreamConfig:
    """Scenario parameters for turning a base edge sequence into a stream."""

    scenario: str = "insert-only"
    ordering: str = "natural"
    alpha: float = 0.0
    beta_m: float = 0.0
    beta_l: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.ordering not in ORDERINGS:
            raise ValueError(f"unknown ordering {self.ordering!r}")
        for name in ("alpha", "beta_m", "beta_l"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")


# ---------------------------------------------------------------------------
# file formats


def _lines(source: Union[str, TextIO, Iterable[str]]) -> Iterator[tuple[int, str]]:
    """Yield (line_number, stripped_content) for non-blank, non-comment lines."""
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as handle:
            yield from _lines(handle)
        return
    for lineno, raw in enumerate(source, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line


def read_edge_list(source: Union[str, TextIO, Iterable[str]]) -> list[Edge]:
    """Read a raw edge list (`u v` per line, `#` comments).

    Edges are canonicalized; repeats (either orientation) keep the first
    occurrence only, so real-world lists with both directions are usable.
    """
    edges: list[Edge] = []
    seen: set[Edge] = set()
    for lineno, line in _lines(source):
        parts = line.split()
        if len(parts) != 2:
            raise StreamError(f"line {lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise StreamError(f"line {lineno}: non-integer vertex in {line!r}") from None
        try:
            e = make_edge(u, v)
        except StreamError as exc:
            raise StreamError(f"line {lineno}: {exc}") from None
        if e not in seen:
            seen.add(e)
            edges.append(e)
    return edges


def read_stream(source: Union[str, TextIO, Iterable[str]]) -> list[EdgeEvent]:
    """Read an event file (`+ u v` / `- u v` per line, `#` comments).

    Validates feasibility while reading; errors carry both the line number
    and the 1-based event number.
    """
    events: list[EdgeEvent] = []
    live: set[Edge] = set()
    index = 0
    for lineno, line in _lines(source):
        parts = line.split()
        if len(parts) != 3 or parts[0] not in ("+", "-"):
            raise StreamError(f"line {lineno}: expected '+ u v' or '- u v', got {line!r}")
        try:
            u, v = int(parts[1]), int(parts[2])
        except ValueError:
            raise StreamError(f"line {lineno}: non-integer vertex in {line!r}") from None
        index += 1
        try:
            e = make_edge(u, v)
        except StreamError as exc:
            raise StreamError(f"line {lineno} (event {index}): {exc}") from None
        if parts[0] == "+":
            if e in live:
                raise StreamError(
                    f"line {lineno} (event {index}): insertion of live edge {e}"
                )
            live.add(e)
        else:
            if e not in live:
                raise StreamError(
                    f"line {lineno} (event {index}): deletion of absent edge {e}"
                )
            live.remove(e)
        events.append(EdgeEvent(parts[0], e, index))
    return events


def write_stream(events: Iterable[EdgeEvent], sink: Union[str, TextIO]) -> None:
    """Write events in the `+ u v` / `- u v` format."""
    if isinstance(sink, str):
        with open(sink, "w", encoding="utf-8") as handle:
            write_stream(events, handle)
        return
    for ev in events:
        sink.write(f"{ev.op} {ev.edge[0]} {ev.edge[1]}\n")


def events_to_arrays(events: Sequence[EdgeEvent]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pack events into (ops, us, vs) arrays for the kernels. op 1 = insert."""
    n = len(events)
    ops = np.empty(n, dtype=np.uint8)
    us = np.empty(n, dtype=np.int64)
    vs = np.empty(n, dtype=np.int64)
    for i, ev in enumerate(events):
        ops[i] = 1 if ev.op == "+" else 0
        us[i] = ev.edge[0]
        vs[i] = ev.edge[1]
    return ops, us, vs


# ---------------------------------------------------------------------------
# orderings


def apply_ordering(edges: Sequence[Edge], ordering: str, seed: int = 0) -> list[Edge]:
    """Permute a base edge sequence.

    natural: keep input order.
    uar: uniform shuffle.
    rbfs: breadth-first from a random start vertex, neighbors scanned in
    ascending id order; each remaining component restarts from a fresh
    random unvisited vertex. The seed only influences start choices.
    """
    if ordering == "natural":
        return list(edges)
    if ordering == "uar":
        rng = random.Random(seed)
        out = list(edges)
        rng.shuffle(out)
        return out
    if ordering == "rbfs":
        return _rbfs_order(edges, seed)
    raise ValueError(f"unknown ordering {ordering!r}")


def _rbfs_order(edges: Sequence[Edge], seed: int) -> list[Edge]:
    adj: dict[int, list[int]] = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    for nbrs in adj.values():
        nbrs.sort()

    rng = random.Random(seed)
    unvisited = set(adj)
    emitted: set[Edge] = set()
    order: list[Edge] = []
    while unvisited:
        start = rng.choice(sorted(unvisited))
        unvisited.discard(start)
        queue = [start]
        while queue:
            x = queue.pop(0)
            for y in adj[x]:
                e = (x, y) if x < y else (y, x)
                if e not in emitted:
                    emitted.add(e)
                    order.append(e)
                if y in unvisited:
                    unvisited.discard(y)
                    queue.append(y)
    return order


# ---------------------------------------------------------------------------
# scenario generators


def gen_insert_only(edges: Sequence[Edge]) -> list[EdgeEvent]:
    """Insertion-only stream in the given edge order."""
    return [EdgeEvent("+", e, i) for i, e in enumerate(edges, 1)]


def gen_massive(
    edges: Sequence[Edge], alpha: float, beta_m: float, seed: int = 0
) -> list[EdgeEvent]:
    """Massive-deletion stream.

    After each insertion a wipe occurs with probability alpha; a wipe deletes
    each currently live edge independently with probability beta_m, emitting
    the deletions in canonical sorted order, one event each.
    """
    rng = random.Random(seed)
    alive: set[Edge] = set()
    events: list[EdgeEvent] = []
    index = 0
    for e in edges:
        index += 1
        events.append(EdgeEvent("+", e, index))
        alive.add(e)
        if rng.random() < alpha:
            for f in sorted(alive):
                if rng.random() < beta_m:
                    index += 1
                    events.append(EdgeEvent("-", f, index))
                    alive.discard(f)
    return events


def gen_light(edges: Sequence[Edge], beta_l: float, seed: int = 0) -> list[EdgeEvent]:
    """Light-deletion stream.

    Each edge is deleted with probability beta_l, at a position drawn
    uniformly at random over the rest of the stream after its insertion.
    Insertions sit at integer keys 1..n on the position axis; each deletion
    draws a real key in (i, n+1) and the merged key order is the stream.
    """
    rng = random.Random(seed)
    n = len(edges)
    # (key, kind, edge): kind orders a deletion after an insertion at the
    # same key; kind 0 = insert, 1 = delete.
    entries: list[tuple[float, int, Edge]] = []
    for i, e in enumerate(edges, 1):
        entries.append((float(i), 0, e))
        if rng.random() < beta_l:
            entries.append((i + rng.random() * (n + 1 - i), 1, e))
    entries.sort(key=lambda item: (item[0], item[1]))
    return [
        EdgeEvent("+" if kind == 0 else "-", e, idx)
        for idx, (_, kind, e) in enumerate(entries, 1)
    ]


def generate_events(edges: Sequence[Edge], config: StreamConfig) -> list[EdgeEvent]:
    """Apply ordering then scenario from one config."""
    config.validate()
    ordered = apply_ordering(edges, config.ordering, config.seed)
    if config.scenario == "insert-only":
        return gen_insert_only(ordered)
    if config.scenario == "massive":
        return gen_massive(ordered, config.alpha, config.beta_m, config.seed)
    return gen_light(ordered, config.beta_l, config.seed)


# ---------------------------------------------------------------------------
# synthetic base graphs


def gen_forest_fire(n: int, p: float, seed: int = 0) -> list[Edge]:
    """Forest-fire graph on vertices 1..n, edges in creation order.

    Each new vertex picks a uniform earlier ambassador and starts a burn:
    from each burning vertex it burns k of its unburned neighbors chosen
    uniformly without replacement, where k is geometric with mean p/(1-p).
    The new vertex then links to every burned vertex. p = 0 yields a tree;
    n = 2 yields the single edge (1, 2).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0.0 <= p < 1.0:
        raise ValueError("p must be in [0, 1)")
    rng = random.Random(seed)
    adj: dict[int, list[int]] = {1: []}
    edges: list[Edge] = []
    for v in range(2, n + 1):
        amb = rng.randrange(1, v)
        burned = {amb}
        burn_order = [amb]
        queue = [amb]
        while queue:
            x = queue.pop(0)
            k = 0
            while rng.random() < p:
                k += 1
            if k == 0:
                continue
            candidates = [y for y in adj[x] if y not in burned]
            for y in rng.sample(candidates, min(k, len(candidates))):
                burned.add(y)
                burn_order.append(y)
                queue.append(y)
        adj[v] = []
        for w in burn_order:
            edges.append(make_edge(w, v))
            adj[w].append(v)
            adj[v].append(w)
    return edges
