"""Pattern definitions and reference instance enumeration.

A pattern instance is the edge set of one embedded copy of the target
subgraph. The enumeration here is the readable reference used by tests and
small tools; the event kernels fuse the same logic into their hot loop.
"""

from dataclasses import dataclass
from typing import Mapping

Adjacency = Mapping[int, Mapping[int, int]]  # vertex -> {neighbor: insert index}

# each instance edge is (u, v, insert_index); non-trigger edges come sorted
# ascending by insert index, the triggering edge is always last
InstanceEdge = tuple[int, int, int]
Instance = tuple[InstanceEdge, ...]


@dataclass(frozen=True)
class PatternSpec:
    """Static facts about one supported pattern."""

    name: str
    edge_count: int

    @property
    def state_dim(self) -> int:
        """Length of the policy state vector: 3 summary features + one slot per edge."""
        return self.edge_count + 3


_SPECS = {
    "wedge": PatternSpec("wedge", 2),
    "triangle": PatternSpec("triangle", 3),
    "fourclique": PatternSpec("fourclique", 6),
}

PATTERNS = tuple(_SPECS)


def pattern_spec(name: str) -> PatternSpec:
    try:
        return _SPECS[name]
    except KeyError:
        raise ValueError(f"unknown pattern {name!r}") from None


def _edge(a: int, b: int, idx: int) -> InstanceEdge:
    return (a, b, idx) if a < b else (b, a, idx)


def enumerate_completions(
    u: int, v: int, t: int, adj: Adjacency, pattern: str
) -> list[Instance]:
    """Instances of `pattern` completed by edge (u, v) against `adj`.

    `adj` holds the other edges available for completion (for a sampler, its
    sampled untagged edges). The edge (u, v) itself is excluded from `adj`
    lookups even if present, so the same call serves insertion (edge not yet
    stored) and deletion (edge still stored).
    """
    if pattern not in _SPECS:
        raise ValueError(f"unknown pattern {pattern!r}")
    nu = adj.get(u, {})
    nv = adj.get(v, {})
    trigger = _edge(u, v, t)
    out: list[Instance] = []

    if pattern == "wedge":
        for x, idx in nu.items():
            if x != v:
                out.append((_edge(u, x, idx), trigger))
        for x, idx in nv.items():
            if x != u:
                out.append((_edge(v, x, idx), trigger))
        return out

    small, big, sv = (nu, nv, u) if len(nu) <= len(nv) else (nv, nu, v)
    if pattern == "triangle":
        for w, idx_s in small.items():
            if w == u or w == v:
                continue
            idx_b = big.get(w)
            if idx_b is None:
                continue
            a = _edge(sv, w, idx_s)
            b = _edge(u + v - sv, w, idx_b)
            pair = (a, b) if a[2] < b[2] else (b, a)
            out.append(pair + (trigger,))
        return out

    # 4-clique: pairs {w, x} of common neighbors with the edge (w, x) sampled
    common: list[int] = []
    for w in small:
        if w != u and w != v and w in big:
            common.append(w)
    for i in range(len(common)):
        w = common[i]
        nw = adj.get(w, {})
        for j in range(i + 1, len(common)):
            x = common[j]
            idx_wx = nw.get(x)
            if idx_wx is None:
                continue
            edges = sorted(
                (
                    _edge(u, w, nu[w]),
                    _edge(u, x, nu[x]),
                    _edge(v, w, nv[w]),
                    _edge(v, x, nv[x]),
                    _edge(w, x, idx_wx),
                ),
                key=lambda e: e[2],
            )
            out.append(tuple(edges) + (trigger,))
    return out


__all__ = [
    "Adjacency",
    "Instance",
    "InstanceEdge",
    "PatternSpec",
    "PATTERNS",
    "pattern_spec",
    "enumerate_completions",
]
