"""Pure-Python event kernel: reservoir samplers plus the count estimator.

This is the reference implementation and the fallback used when the compiled
extension is unavailable. The compiled kernel mirrors this module operation
for operation (same RNG discipline, same data-structure mutation order), so
both produce bit-identical results for the same seed.
"""

import random

import numpy as np

from .constants import (
    ADMITTED_EVICT,
    ADMITTED_NONFULL,
    DELETE_ABSENT,
    DELETE_REMOVED,
    DELETE_TAGGED,
    PATTERN_EDGES,
    PATTERN_FOURCLIQUE,
    PATTERN_WEDGE,
    POLICY_CONSTANT,
    POLICY_HEURISTIC,
    POLICY_LEARNED,
    POLICY_SCRIPTED,
    REJECTED,
    SCHEME_GPSA,
    SCHEME_WSD,
    V_AGG_AVG,
)
from .stream import StreamError

KERNEL_NAME = "pure"


def _pack(u, v):
    return (u << 31) | v


class Sampler:
    """Bounded weighted reservoir over a dynamic edge stream.

    Scheme selects the deletion discipline:
    wsd         physical removal with threshold memory (tau_p, tau_q)
    gpsa        entries are tagged on deletion, stay rank-evictable
    naive-gps   physical removal with no threshold memory (biased; kept as
                an experimental control)

    Ranks are weight / u with u uniform on (0, 1]; rank ties evict the entry
    with the smaller insertion index first. Physical occupancy never exceeds
    the capacity, so all storage is preallocated.
    """

    __slots__ = (
        "scheme", "capacity", "rng", "tau_p", "tau_q", "r_threshold",
        "e_key", "e_w", "e_rank", "e_idx", "e_tag",
        "heap", "heap_size", "pos", "free", "live", "adj",
    )

    def __init__(self, scheme, capacity, seed):
        if capacity < 1:
            raise ValueError("capacity must be at least 1")
        self.scheme = scheme
        self.capacity = capacity
        self.rng = random.Random(seed)
        self.tau_p = 0.0
        self.tau_q = 0.0
        self.r_threshold = 0.0
        self.e_key = [0] * capacity
        self.e_w = [0.0] * capacity
        self.e_rank = [0.0] * capacity
        self.e_idx = [0] * capacity
        self.e_tag = [0] * capacity
        self.heap = [0] * capacity
        self.heap_size = 0
        self.pos = [-1] * capacity
        self.free = list(range(capacity - 1, -1, -1))
        self.live = {}
        self.adj = {}

    # -- indexed binary heap on (rank, insertion index) ---------------------

    def _less(self, a, b):
        ra = self.e_rank[a]
        rb = self.e_rank[b]
        return ra < rb or (ra == rb and self.e_idx[a] < self.e_idx[b])

    def _swim(self, i):
        heap, pos = self.heap, self.pos
        slot = heap[i]
        while i > 0:
            parent = (i - 1) >> 1
            other = heap[parent]
            if not self._less(slot, other):
                break
            heap[i] = other
            pos[other] = i
            i = parent
        heap[i] = slot
        pos[slot] = i

    def _sink(self, i):
        heap, pos = self.heap, self.pos
        n = self.heap_size
        slot = heap[i]
        while True:
            child = 2 * i + 1
            if child >= n:
                break
            right = child + 1
            if right < n and self._less(heap[right], heap[child]):
                child = right
            other = heap[child]
            if not self._less(other, slot):
                break
            heap[i] = other
            pos[other] = i
            i = child
        heap[i] = slot
        pos[slot] = i

    def _heap_push(self, slot):
        i = self.heap_size
        self.heap_size = i + 1
        self.heap[i] = slot
        self.pos[slot] = i
        self._swim(i)

    def _heap_remove(self, slot):
        i = self.pos[slot]
        self.pos[slot] = -1
        n = self.heap_size - 1
        self.heap_size = n
        if i != n:
            moved = self.heap[n]
            self.heap[i] = moved
            self.pos[moved] = i
            self._swim(i)
            self._sink(i)

    # -- entry management ---------------------------------------------------

    def _admit(self, u, v, key, w, rank, t):
        slot = self.free.pop()
        self.e_key[slot] = key
        self.e_w[slot] = w
        self.e_rank[slot] = rank
        self.e_idx[slot] = t
        self.e_tag[slot] = 0
        self._heap_push(slot)
        self.live[key] = slot
        au = self.adj.get(u)
        if au is None:
            au = {}
            self.adj[u] = au
        au[v] = slot
        av = self.adj.get(v)
        if av is None:
            av = {}
            self.adj[v] = av
        av[u] = slot

    def _evict_min(self):
        slot = self.heap[0]
        self._heap_remove(slot)
        key = self.e_key[slot]
        if not self.e_tag[slot]:
            u = key >> 31
            v = key & 0x7FFFFFFF
            del self.live[key]
            del self.adj[u][v]
            del self.adj[v][u]
            evicted = (u, v)
        else:
            evicted = None
        self.free.append(slot)
        return evicted

    # -- public operations --------------------------------------------------

    def insert(self, u, v, w, t):
        """Offer edge (u, v) with weight w at stream index t; draws the rank."""
        uval = 1.0 - self.rng.random()
        return self._insert_ranked(u, v, w, w / uval, t)

    def insert_with_rank(self, u, v, w, rank, t):
        """Offer an edge with an externally fixed rank (tests and traces)."""
        return self._insert_ranked(u, v, w, rank, t)

    def _insert_ranked(self, u, v, w, rank, t):
        if w <= 0.0:
            raise ValueError(f"weight must be positive, got {w}")
        if u > v:
            u, v = v, u
        key = _pack(u, v)
        if key in self.live:
            raise StreamError(f"insertion of edge ({u}, {v}) already sampled")
        if self.scheme == SCHEME_WSD:
            if self.heap_size < self.capacity:
                if rank > self.tau_p:
                    self._admit(u, v, key, w, rank, t)
                    return (ADMITTED_NONFULL, None)
                return (REJECTED, None)
            self.tau_p = self.e_rank[self.heap[0]]
            if rank > self.tau_p:
                evicted = self._evict_min()
                self._admit(u, v, key, w, rank, t)
                self.tau_q = self.tau_p
                return (ADMITTED_EVICT, evicted)
            if rank > self.tau_q:
                self.tau_q = rank
            return (REJECTED, None)
        # GPS family: unconditional admission while not full
        if self.heap_size < self.capacity:
            self._admit(u, v, key, w, rank, t)
            return (ADMITTED_NONFULL, None)
        min_rank = self.e_rank[self.heap[0]]
        if rank > min_rank:
            if min_rank > self.r_threshold:
                self.r_threshold = min_rank
            evicted = self._evict_min()
            self._admit(u, v, key, w, rank, t)
            return (ADMITTED_EVICT, evicted)
        if rank > self.r_threshold:
            self.r_threshold = rank
        return (REJECTED, None)

    def delete(self, u, v):
        """Withdraw edge (u, v). Thresholds are never touched by deletion."""
        if u > v:
            u, v = v, u
        key = _pack(u, v)
        slot = self.live.get(key)
        if slot is None:
            return DELETE_ABSENT
        del self.live[key]
        del self.adj[u][v]
        del self.adj[v][u]
        if self.scheme == SCHEME_GPSA:
            self.e_tag[slot] = 1
            return DELETE_TAGGED
        self._heap_remove(slot)
        self.free.append(slot)
        return DELETE_REMOVED

    # -- inspection ---------------------------------------------------------

    @property
    def size(self):
        """Physical occupancy, tagged entries included."""
        return self.heap_size

    @property
    def live_size(self):
        return len(self.live)

    def threshold(self):
        """Threshold used by inclusion probabilities for this scheme."""
        return self.tau_q if self.scheme == SCHEME_WSD else self.r_threshold

    def inclusion_prob(self, w):
        """P[an edge with weight w is currently sampled], given this scheme's threshold."""
        thresh = self.threshold()
        if thresh <= 0.0:
            return 1.0
        p = w / thresh
        return 1.0 if p > 1.0 else p

    def contains(self, u, v):
        if u > v:
            u, v = v, u
        return _pack(u, v) in self.live

    def sampled_degree(self, u):
        return len(self.adj.get(u, ()))

    def sampled_neighbors(self, u):
        return list(self.adj.get(u, ()))

    def snapshot(self):
        """All physical entries as (u, v, weight, rank, insert_index, tagged)."""
        rows = []
        for i in range(self.heap_size):
            slot = self.heap[i]
            key = self.e_key[slot]
            rows.append(
                (
                    key >> 31,
                    key & 0x7FFFFFFF,
                    self.e_w[slot],
                    self.e_rank[slot],
                    self.e_idx[slot],
                    self.e_tag[slot],
                )
            )
        rows.sort(key=lambda row: row[4])
        return rows


class Estimator:
    """Streaming estimate of a pattern count driven by one sampler.

    Per event, instances completed by the event's edge are enumerated against
    the sampled edges *before* the sampler mutates, and the estimate moves by
    the sum over instances of the product of inverse inclusion probabilities
    of the already-sampled edges, evaluated at the current threshold. The
    estimate is a signed accumulator; transient negatives are legal.
    """

    __slots__ = (
        "pattern", "sampler", "c", "inserts_seen", "policy_kind",
        "policy_w", "policy_b", "policy_mean", "policy_std", "v_agg",
        "scripted_weights", "scripted_ranks", "_cursor_w", "_cursor_r",
        "_n_edges", "_vbuf",
    )

    def __init__(
        self,
        pattern,
        scheme,
        capacity,
        seed,
        policy_kind=POLICY_CONSTANT,
        policy_w=None,
        policy_b=0.0,
        policy_mean=None,
        policy_std=None,
        v_agg=0,
        scripted_weights=None,
        scripted_ranks=None,
    ):
        self._n_edges = PATTERN_EDGES[pattern]
        self.pattern = pattern
        self.sampler = Sampler(scheme, capacity, seed)
        self.c = 0.0
        self.inserts_seen = 0
        self.policy_kind = policy_kind
        self.policy_w = None if policy_w is None else [float(x) for x in policy_w]
        self.policy_b = float(policy_b)
        self.policy_mean = None if policy_mean is None else [float(x) for x in policy_mean]
        self.policy_std = None if policy_std is None else [float(x) for x in policy_std]
        self.v_agg = v_agg
        self.scripted_weights = None if scripted_weights is None else list(scripted_weights)
        self.scripted_ranks = None if scripted_ranks is None else list(scripted_ranks)
        self._cursor_w = 0
        self._cursor_r = 0
        self._vbuf = [0.0] * self._n_edges
        if policy_kind == POLICY_LEARNED:
            dim = self._n_edges + 3
            if self.policy_w is None or len(self.policy_w) != dim:
                raise ValueError(f"learned policy needs {dim} weights")
            if self.policy_mean is None or len(self.policy_mean) != dim:
                raise ValueError(f"learned policy needs {dim} feature means")
            if self.policy_std is None or len(self.policy_std) != dim:
                raise ValueError(f"learned policy needs {dim} feature scales")

    # -- enumeration ---------------------------------------------------------

    def _factor(self, thresh, slot):
        if thresh <= 0.0:
            return 1.0
        w = self.sampler.e_w[slot]
        return 1.0 if w >= thresh else thresh / w

    def _enumerate(self, u, v, t, want_state):
        """(count, estimate delta) for edge (u, v) at index t, pre-mutation.

        With want_state, also fills self._vbuf with the per-position
        aggregate of instance edge indices (max or mean).
        """
        s = self.sampler
        thresh = s.tau_q if s.scheme == SCHEME_WSD else s.r_threshold
        vbuf = self._vbuf
        n_v = self._n_edges
        if want_state:
            for j in range(n_v):
                vbuf[j] = 0.0
        count = 0
        total = 0.0
        use_avg = self.v_agg == V_AGG_AVG

        au = s.adj.get(u)
        av = s.adj.get(v)
        if self.pattern == PATTERN_WEDGE:
            if au:
                for x, slot in au.items():
                    if x == v:
                        continue
                    count += 1
                    total += self._factor(thresh, slot)
                    if want_state:
                        idx = s.e_idx[slot]
                        if use_avg:
                            vbuf[0] += idx
                        elif idx > vbuf[0]:
                            vbuf[0] = idx
            if av:
                for x, slot in av.items():
                    if x == u:
                        continue
                    count += 1
                    total += self._factor(thresh, slot)
                    if want_state:
                        idx = s.e_idx[slot]
                        if use_avg:
                            vbuf[0] += idx
                        elif idx > vbuf[0]:
                            vbuf[0] = idx
        elif self.pattern == PATTERN_FOURCLIQUE:
            if au and av:
                small, big = (au, av) if len(au) <= len(av) else (av, au)
                common = []
                for w in small:
                    if w != u and w != v and w in big:
                        common.append(w)
                adj = s.adj
                for i in range(len(common)):
                    x1 = common[i]
                    n1 = adj[x1]
                    for j in range(i + 1, len(common)):
                        x2 = common[j]
                        slot_12 = n1.get(x2)
                        if slot_12 is None:
                            continue
                        s_u1 = au[x1]
                        s_u2 = au[x2]
                        s_v1 = av[x1]
                        s_v2 = av[x2]
                        count += 1
                        total += (
                            self._factor(thresh, s_u1)
                            * self._factor(thresh, s_u2)
                            * self._factor(thresh, s_v1)
                            * self._factor(thresh, s_v2)
                            * self._factor(thresh, slot_12)
                        )
                        if want_state:
                            idxs = sorted(
                                (
                                    s.e_idx[s_u1],
                                    s.e_idx[s_u2],
                                    s.e_idx[s_v1],
                                    s.e_idx[s_v2],
                                    s.e_idx[slot_12],
                                )
                            )
                            if use_avg:
                                for j in range(5):
                                    vbuf[j] += idxs[j]
                            else:
                                for j in range(5):
                                    if idxs[j] > vbuf[j]:
                                        vbuf[j] = idxs[j]
        else:  # triangle
            if au and av:
                if len(au) <= len(av):
                    small, big = au, av
                else:
                    small, big = av, au
                for w, slot_s in small.items():
                    if w == u or w == v:
                        continue
                    slot_b = big.get(w)
                    if slot_b is None:
                        continue
                    count += 1
                    total += self._factor(thresh, slot_s) * self._factor(thresh, slot_b)
                    if want_state:
                        ia = s.e_idx[slot_s]
                        ib = s.e_idx[slot_b]
                        if ia > ib:
                            ia, ib = ib, ia
                        if use_avg:
                            vbuf[0] += ia
                            vbuf[1] += ib
                        else:
                            if ia > vbuf[0]:
                                vbuf[0] = ia
                            if ib > vbuf[1]:
                                vbuf[1] = ib
        if want_state:
            if count == 0:
                for j in range(n_v):
                    vbuf[j] = 0.0
            else:
                if use_avg:
                    inv = 1.0 / count
                    for j in range(n_v - 1):
                        vbuf[j] *= inv
                vbuf[n_v - 1] = float(t)
        return count, total

    def _state_from(self, u, v, count):
        s = self.sampler
        state = [float(count), float(s.sampled_degree(u)), float(s.sampled_degree(v))]
        state.extend(self._vbuf)
        return state

    # -- policy --------------------------------------------------------------

    def _policy_weight(self, count, state):
        kind = self.policy_kind
        if kind == POLICY_CONSTANT:
            return 1.0
        if kind == POLICY_HEURISTIC:
            return 9.0 * count + 1.0
        if kind == POLICY_SCRIPTED:
            if self._cursor_w >= len(self.scripted_weights):
                raise ValueError("scripted weights exhausted")
            w = self.scripted_weights[self._cursor_w]
            self._cursor_w += 1
            return w
        acc = 0.0
        w_vec = self.policy_w
        mean = self.policy_mean
        std = self.policy_std
        for j in range(len(w_vec)):
            acc += w_vec[j] * ((state[j] - mean[j]) / std[j])
        acc += self.policy_b
        return (acc if acc > 0.0 else 0.0) + 1.0

    # -- event processing ----------------------------------------------------

    def peek_insert(self, u, v, t):
        """(completions, state) for an insertion, without mutating anything."""
        count, _ = self._enumerate(u, v, t, True)
        return count, self._state_from(u, v, count)

    def process_insert(self, u, v, t, weight=None):
        want_state = self.policy_kind == POLICY_LEARNED and weight is None
        count, total = self._enumerate(u, v, t, want_state)
        self.c += total
        if weight is None:
            state = self._state_from(u, v, count) if want_state else None
            weight = self._policy_weight(count, state)
        self.inserts_seen += 1
        if self.scripted_ranks is not None:
            if self._cursor_r >= len(self.scripted_ranks):
                raise ValueError("scripted ranks exhausted")
            rank = self.scripted_ranks[self._cursor_r]
            self._cursor_r += 1
            self.sampler.insert_with_rank(u, v, weight, rank, t)
        else:
            self.sampler.insert(u, v, weight, t)

    def process_delete(self, u, v, t):
        _, total = self._enumerate(u, v, t, False)
        self.c -= total
        self.sampler.delete(u, v)

    @property
    def estimate(self):
        return self.c

    def run(self, ops, us, vs, record_every=0):
        """Process a packed event stream; returns (indices, estimates) arrays.

        With record_every = k > 0 the estimate is recorded every k events and
        always at the final event; 0 records nothing (final estimate is read
        from .estimate).
        """
        n = len(ops)
        out_t = []
        out_c = []
        for i in range(n):
            t = i + 1
            u = int(us[i])
            v = int(vs[i])
            if ops[i]:
                self.process_insert(u, v, t)
            else:
                self.process_delete(u, v, t)
            if record_every > 0 and (t % record_every == 0 or t == n):
                out_t.append(t)
                out_c.append(self.c)
        return np.asarray(out_t, dtype=np.int64), np.asarray(out_c, dtype=np.float64)
