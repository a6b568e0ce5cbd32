# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled event kernel. Mirrors _pykernel operation for operation; both
produce bit-identical results for the same seed (same RNG discipline, same
mutation order, same float evaluation order)."""

import random

import numpy as np

from .constants import (
    ADMITTED_EVICT,
    ADMITTED_NONFULL,
    DELETE_ABSENT,
    DELETE_REMOVED,
    DELETE_TAGGED,
    PATTERN_EDGES,
    REJECTED,
)
from .stream import StreamError

KERNEL_NAME = "compiled"

DEF MAX_PATTERN_EDGES = 6

cdef int C_WSD = 0
cdef int C_GPSA = 1
cdef int C_WEDGE = 0
cdef int C_TRIANGLE = 1
cdef int C_FOURCLIQUE = 2
cdef int C_CONSTANT = 0
cdef int C_HEURISTIC = 1
cdef int C_LEARNED = 2
cdef int C_SCRIPTED = 3
cdef int C_AVG = 1

cdef int R_NONFULL = 0
cdef int R_EVICT = 1
cdef int R_REJECTED = 2
cdef int R_DEL_REMOVED = 0
cdef int R_DEL_TAGGED = 1
cdef int R_DEL_ABSENT = 2


cdef class Sampler:
    cdef readonly int scheme
    cdef readonly Py_ssize_t capacity
    cdef readonly object rng
    cdef object _random
    cdef readonly double tau_p
    cdef readonly double tau_q
    cdef readonly double r_threshold
    cdef long long[::1] e_key
    cdef double[::1] e_w
    cdef double[::1] e_rank
    cdef long long[::1] e_idx
    cdef signed char[::1] e_tag
    cdef Py_ssize_t[::1] heap
    cdef Py_ssize_t heap_size
    cdef Py_ssize_t[::1] pos
    cdef Py_ssize_t[::1] free_stack
    cdef Py_ssize_t free_top
    cdef dict live
    cdef dict adj
    cdef long long _evicted_u
    cdef long long _evicted_v

    def __init__(self, scheme, capacity, seed):
        cdef Py_ssize_t m = capacity
        cdef Py_ssize_t i
        if m < 1:
            raise ValueError("capacity must be at least 1")
        self.scheme = scheme
        self.capacity = m
        self.rng = random.Random(seed)
        self._random = self.rng.random
        self.tau_p = 0.0
        self.tau_q = 0.0
        self.r_threshold = 0.0
        self.e_key = np.zeros(m, dtype=np.int64)
        self.e_w = np.zeros(m, dtype=np.float64)
        self.e_rank = np.zeros(m, dtype=np.float64)
        self.e_idx = np.zeros(m, dtype=np.int64)
        self.e_tag = np.zeros(m, dtype=np.int8)
        self.heap = np.zeros(m, dtype=np.intp)
        self.heap_size = 0
        self.pos = np.full(m, -1, dtype=np.intp)
        self.free_stack = np.zeros(m, dtype=np.intp)
        for i in range(m):
            self.free_stack[i] = m - 1 - i
        self.free_top = m
        self.live = {}
        self.adj = {}

    # -- indexed binary heap on (rank, insertion index) ---------------------

    cdef inline bint _less(self, Py_ssize_t a, Py_ssize_t b):
        cdef double ra = self.e_rank[a]
        cdef double rb = self.e_rank[b]
        return ra < rb or (ra == rb and self.e_idx[a] < self.e_idx[b])

    cdef void _swim(self, Py_ssize_t i):
        cdef Py_ssize_t slot = self.heap[i]
        cdef Py_ssize_t parent, other
        while i > 0:
            parent = (i - 1) >> 1
            other = self.heap[parent]
            if not self._less(slot, other):
                break
            self.heap[i] = other
            self.pos[other] = i
            i = parent
        self.heap[i] = slot
        self.pos[slot] = i

    cdef void _sink(self, Py_ssize_t i):
        cdef Py_ssize_t n = self.heap_size
        cdef Py_ssize_t slot = self.heap[i]
        cdef Py_ssize_t child, right, other
        while True:
            child = 2 * i + 1
            if child >= n:
                break
            right = child + 1
            if right < n and self._less(self.heap[right], self.heap[child]):
                child = right
            other = self.heap[child]
            if not self._less(other, slot):
                break
            self.heap[i] = other
            self.pos[other] = i
            i = child
        self.heap[i] = slot
        self.pos[slot] = i

    cdef void _heap_push(self, Py_ssize_t slot):
        cdef Py_ssize_t i = self.heap_size
        self.heap_size = i + 1
        self.heap[i] = slot
        self.pos[slot] = i
        self._swim(i)

    cdef void _heap_remove(self, Py_ssize_t slot):
        cdef Py_ssize_t i = self.pos[slot]
        cdef Py_ssize_t n = self.heap_size - 1
        cdef Py_ssize_t moved
        self.pos[slot] = -1
        self.heap_size = n
        if i != n:
            moved = self.heap[n]
            self.heap[i] = moved
            self.pos[moved] = i
            self._swim(i)
            self._sink(i)

    # -- entry management ---------------------------------------------------

    cdef int _admit(self, long long u, long long v, long long key, double w,
                    double rank, long long t) except -1:
        self.free_top -= 1
        cdef Py_ssize_t slot = self.free_stack[self.free_top]
        self.e_key[slot] = key
        self.e_w[slot] = w
        self.e_rank[slot] = rank
        self.e_idx[slot] = t
        self.e_tag[slot] = 0
        self._heap_push(slot)
        cdef object uo = u
        cdef object vo = v
        self.live[key] = slot
        cdef object au = self.adj.get(uo)
        if au is None:
            au = {}
            self.adj[uo] = au
        (<dict>au)[vo] = slot
        cdef object av = self.adj.get(vo)
        if av is None:
            av = {}
            self.adj[vo] = av
        (<dict>av)[uo] = slot
        return 0

    cdef bint _evict_min(self) except? -1:
        """Pops the min-rank entry; leaves (u, v) in _evicted_* when it was live."""
        cdef Py_ssize_t slot = self.heap[0]
        self._heap_remove(slot)
        cdef long long key = self.e_key[slot]
        cdef long long u, v
        cdef bint was_live = 0
        if not self.e_tag[slot]:
            u = key >> 31
            v = key & 0x7FFFFFFF
            del self.live[key]
            del (<dict>self.adj[u])[v]
            del (<dict>self.adj[v])[u]
            self._evicted_u = u
            self._evicted_v = v
            was_live = 1
        self.free_stack[self.free_top] = slot
        self.free_top += 1
        return was_live

    # -- public operations --------------------------------------------------

    cdef int _insert_ranked_c(self, long long u, long long v, double w,
                              double rank, long long t, bint* evicted_live) except -1:
        cdef long long tmp, key
        cdef double min_rank
        evicted_live[0] = 0
        if w <= 0.0:
            raise ValueError(f"weight must be positive, got {w}")
        if u > v:
            tmp = u
            u = v
            v = tmp
        key = (u << 31) | v
        if key in self.live:
            raise StreamError(f"insertion of edge ({u}, {v}) already sampled")
        if self.scheme == C_WSD:
            if self.heap_size < self.capacity:
                if rank > self.tau_p:
                    self._admit(u, v, key, w, rank, t)
                    return R_NONFULL
                return R_REJECTED
            self.tau_p = self.e_rank[self.heap[0]]
            if rank > self.tau_p:
                evicted_live[0] = self._evict_min()
                self._admit(u, v, key, w, rank, t)
                self.tau_q = self.tau_p
                return R_EVICT
            if rank > self.tau_q:
                self.tau_q = rank
            return R_REJECTED
        if self.heap_size < self.capacity:
            self._admit(u, v, key, w, rank, t)
            return R_NONFULL
        min_rank = self.e_rank[self.heap[0]]
        if rank > min_rank:
            if min_rank > self.r_threshold:
                self.r_threshold = min_rank
            evicted_live[0] = self._evict_min()
            self._admit(u, v, key, w, rank, t)
            return R_EVICT
        if rank > self.r_threshold:
            self.r_threshold = rank
        return R_REJECTED

    cdef object _outcome(self, int code, bint evicted_live):
        if code == R_NONFULL:
            return (ADMITTED_NONFULL, None)
        if code == R_REJECTED:
            return (REJECTED, None)
        if evicted_live:
            return (ADMITTED_EVICT, (self._evicted_u, self._evicted_v))
        return (ADMITTED_EVICT, None)

    def insert(self, u, v, w, t):
        cdef double uval = 1.0 - <double>self._random()
        cdef double wd = w
        cdef bint evicted_live = 0
        cdef int code = self._insert_ranked_c(u, v, wd, wd / uval, t, &evicted_live)
        return self._outcome(code, evicted_live)

    def insert_with_rank(self, u, v, w, rank, t):
        cdef bint evicted_live = 0
        cdef int code = self._insert_ranked_c(u, v, w, rank, t, &evicted_live)
        return self._outcome(code, evicted_live)

    cdef int _delete_c(self, long long u, long long v) except -1:
        cdef long long tmp, key
        cdef object slot_obj
        cdef Py_ssize_t slot
        if u > v:
            tmp = u
            u = v
            v = tmp
        key = (u << 31) | v
        slot_obj = self.live.get(key)
        if slot_obj is None:
            return R_DEL_ABSENT
        slot = <Py_ssize_t>slot_obj
        del self.live[key]
        del (<dict>self.adj[u])[v]
        del (<dict>self.adj[v])[u]
        if self.scheme == C_GPSA:
            self.e_tag[slot] = 1
            return R_DEL_TAGGED
        self._heap_remove(slot)
        self.free_stack[self.free_top] = slot
        self.free_top += 1
        return R_DEL_REMOVED

    def delete(self, u, v):
        cdef int code = self._delete_c(u, v)
        if code == R_DEL_ABSENT:
            return DELETE_ABSENT
        if code == R_DEL_TAGGED:
            return DELETE_TAGGED
        return DELETE_REMOVED

    # -- inspection ---------------------------------------------------------

    @property
    def size(self):
        return self.heap_size

    @property
    def live_size(self):
        return len(self.live)

    def threshold(self):
        return self.tau_q if self.scheme == C_WSD else self.r_threshold

    def inclusion_prob(self, w):
        cdef double thresh = self.tau_q if self.scheme == C_WSD else self.r_threshold
        cdef double p
        if thresh <= 0.0:
            return 1.0
        p = <double>w / thresh
        return 1.0 if p > 1.0 else p

    def contains(self, u, v):
        cdef long long a = u
        cdef long long b = v
        cdef long long tmp
        if a > b:
            tmp = a
            a = b
            b = tmp
        return ((a << 31) | b) in self.live

    def sampled_degree(self, u):
        nbrs = self.adj.get(u)
        return 0 if nbrs is None else len(<dict>nbrs)

    def sampled_neighbors(self, u):
        nbrs = self.adj.get(u)
        return [] if nbrs is None else list(<dict>nbrs)

    def snapshot(self):
        cdef Py_ssize_t i, slot
        cdef long long key
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
                    <int>self.e_tag[slot],
                )
            )
        rows.sort(key=lambda row: row[4])
        return rows


cdef class Estimator:
    cdef readonly int pattern
    cdef readonly Sampler sampler
    cdef double c
    cdef readonly long long inserts_seen
    cdef readonly int policy_kind
    cdef double[::1] policy_w
    cdef double policy_b
    cdef double[::1] policy_mean
    cdef double[::1] policy_std
    cdef int v_agg
    cdef double[::1] scripted_w
    cdef double[::1] scripted_r
    cdef Py_ssize_t n_scripted_w
    cdef Py_ssize_t n_scripted_r
    cdef Py_ssize_t _cursor_w
    cdef Py_ssize_t _cursor_r
    cdef int _n_edges
    cdef double _vbuf[MAX_PATTERN_EDGES]

    def __init__(self, pattern, scheme, capacity, seed, policy_kind=0,
                 policy_w=None, policy_b=0.0, policy_mean=None, policy_std=None,
                 v_agg=0, scripted_weights=None, scripted_ranks=None):
        cdef int dim
        self._n_edges = PATTERN_EDGES[pattern]
        self.pattern = pattern
        self.sampler = Sampler(scheme, capacity, seed)
        self.c = 0.0
        self.inserts_seen = 0
        self.policy_kind = policy_kind
        self.policy_b = policy_b
        self.v_agg = v_agg
        self._cursor_w = 0
        self._cursor_r = 0
        if policy_w is not None:
            self.policy_w = np.asarray(policy_w, dtype=np.float64)
        if policy_mean is not None:
            self.policy_mean = np.asarray(policy_mean, dtype=np.float64)
        if policy_std is not None:
            self.policy_std = np.asarray(policy_std, dtype=np.float64)
        if scripted_weights is not None:
            self.scripted_w = np.asarray(scripted_weights, dtype=np.float64)
            self.n_scripted_w = len(scripted_weights)
        else:
            self.n_scripted_w = -1
        if scripted_ranks is not None:
            self.scripted_r = np.asarray(scripted_ranks, dtype=np.float64)
            self.n_scripted_r = len(scripted_ranks)
        else:
            self.n_scripted_r = -1
        if policy_kind == C_LEARNED:
            dim = self._n_edges + 3
            if policy_w is None or len(policy_w) != dim:
                raise ValueError(f"learned policy needs {dim} weights")
            if policy_mean is None or len(policy_mean) != dim:
                raise ValueError(f"learned policy needs {dim} feature means")
            if policy_std is None or len(policy_std) != dim:
                raise ValueError(f"learned policy needs {dim} feature scales")

    # -- enumeration ---------------------------------------------------------

    cdef inline double _factor(self, double thresh, Py_ssize_t slot):
        cdef double w
        if thresh <= 0.0:
            return 1.0
        w = self.sampler.e_w[slot]
        return 1.0 if w >= thresh else thresh / w

    cdef double _enumerate(self, long long u, long long v, long long t,
                           bint want_state, Py_ssize_t* count_out) except? -1.0:
        cdef Sampler s = self.sampler
        cdef double thresh = s.tau_q if s.scheme == C_WSD else s.r_threshold
        cdef int n_v = self._n_edges
        cdef bint use_avg = self.v_agg == C_AVG
        cdef Py_ssize_t count = 0
        cdef double total = 0.0
        cdef double f, inv
        cdef long long idx, ia, ib
        cdef Py_ssize_t slot, slot_b, i, j, k
        cdef long long idxs[5]
        cdef long long tmp_idx
        cdef object au_o, av_o, slot_o, x1_o, x2_o, n1_o
        cdef dict au, av, small, big, n1, adj
        cdef list common

        if want_state:
            for i in range(n_v):
                self._vbuf[i] = 0.0

        au_o = s.adj.get(u)
        av_o = s.adj.get(v)
        if self.pattern == C_WEDGE:
            if au_o is not None:
                au = <dict>au_o
                for x_o, slot_o in au.items():
                    if <long long>x_o == v:
                        continue
                    count += 1
                    total += self._factor(thresh, <Py_ssize_t>slot_o)
                    if want_state:
                        idx = s.e_idx[<Py_ssize_t>slot_o]
                        if use_avg:
                            self._vbuf[0] += idx
                        elif idx > self._vbuf[0]:
                            self._vbuf[0] = idx
            if av_o is not None:
                av = <dict>av_o
                for x_o, slot_o in av.items():
                    if <long long>x_o == u:
                        continue
                    count += 1
                    total += self._factor(thresh, <Py_ssize_t>slot_o)
                    if want_state:
                        idx = s.e_idx[<Py_ssize_t>slot_o]
                        if use_avg:
                            self._vbuf[0] += idx
                        elif idx > self._vbuf[0]:
                            self._vbuf[0] = idx
        elif self.pattern == C_FOURCLIQUE:
            if au_o is not None and av_o is not None:
                au = <dict>au_o
                av = <dict>av_o
                if len(au) <= len(av):
                    small = au
                    big = av
                else:
                    small = av
                    big = au
                common = []
                for x_o in small:
                    if <long long>x_o != u and <long long>x_o != v and x_o in big:
                        common.append(x_o)
                adj = s.adj
                for i in range(len(common)):
                    x1_o = common[i]
                    n1_o = adj[x1_o]
                    n1 = <dict>n1_o
                    for j in range(i + 1, len(common)):
                        x2_o = common[j]
                        slot_o = n1.get(x2_o)
                        if slot_o is None:
                            continue
                        count += 1
                        total += (
                            self._factor(thresh, <Py_ssize_t>au[x1_o])
                            * self._factor(thresh, <Py_ssize_t>au[x2_o])
                            * self._factor(thresh, <Py_ssize_t>av[x1_o])
                            * self._factor(thresh, <Py_ssize_t>av[x2_o])
                            * self._factor(thresh, <Py_ssize_t>slot_o)
                        )
                        if want_state:
                            idxs[0] = s.e_idx[<Py_ssize_t>au[x1_o]]
                            idxs[1] = s.e_idx[<Py_ssize_t>au[x2_o]]
                            idxs[2] = s.e_idx[<Py_ssize_t>av[x1_o]]
                            idxs[3] = s.e_idx[<Py_ssize_t>av[x2_o]]
                            idxs[4] = s.e_idx[<Py_ssize_t>slot_o]
                            # insertion sort, 5 elements
                            for k in range(1, 5):
                                tmp_idx = idxs[k]
                                m = k - 1
                                while m >= 0 and idxs[m] > tmp_idx:
                                    idxs[m + 1] = idxs[m]
                                    m -= 1
                                idxs[m + 1] = tmp_idx
                            if use_avg:
                                for k in range(5):
                                    self._vbuf[k] += idxs[k]
                            else:
                                for k in range(5):
                                    if idxs[k] > self._vbuf[k]:
                                        self._vbuf[k] = idxs[k]
        else:  # triangle
            if au_o is not None and av_o is not None:
                au = <dict>au_o
                av = <dict>av_o
                if len(au) <= len(av):
                    small = au
                    big = av
                else:
                    small = av
                    big = au
                for x_o, slot_o in small.items():
                    if <long long>x_o == u or <long long>x_o == v:
                        continue
                    slot_b_o = big.get(x_o)
                    if slot_b_o is None:
                        continue
                    slot = <Py_ssize_t>slot_o
                    slot_b = <Py_ssize_t>slot_b_o
                    count += 1
                    total += self._factor(thresh, slot) * self._factor(thresh, slot_b)
                    if want_state:
                        ia = s.e_idx[slot]
                        ib = s.e_idx[slot_b]
                        if ia > ib:
                            ia, ib = ib, ia
                        if use_avg:
                            self._vbuf[0] += ia
                            self._vbuf[1] += ib
                        else:
                            if ia > self._vbuf[0]:
                                self._vbuf[0] = ia
                            if ib > self._vbuf[1]:
                                self._vbuf[1] = ib
        if want_state:
            if count == 0:
                for i in range(n_v):
                    self._vbuf[i] = 0.0
            else:
                if use_avg:
                    inv = 1.0 / count
                    for i in range(n_v - 1):
                        self._vbuf[i] *= inv
                self._vbuf[n_v - 1] = <double>t
        count_out[0] = count
        return total

    cdef list _state_from(self, long long u, long long v, Py_ssize_t count):
        cdef Sampler s = self.sampler
        cdef object nu = s.adj.get(u)
        cdef object nv = s.adj.get(v)
        cdef Py_ssize_t deg_u = 0 if nu is None else len(<dict>nu)
        cdef Py_ssize_t deg_v = 0 if nv is None else len(<dict>nv)
        state = [<double>count, <double>deg_u, <double>deg_v]
        cdef Py_ssize_t j
        for j in range(self._n_edges):
            state.append(self._vbuf[j])
        return state

    # -- policy --------------------------------------------------------------

    cdef double _policy_weight_c(self, long long u, long long v,
                                 Py_ssize_t count) except? -1.0:
        """Policy value; for the learned policy the state is read from _vbuf,
        which _enumerate(want_state=True) must have just filled."""
        cdef int kind = self.policy_kind
        cdef double acc, s_j
        cdef Sampler smp
        cdef object nu, nv
        cdef Py_ssize_t j, dim
        if kind == C_CONSTANT:
            return 1.0
        if kind == C_HEURISTIC:
            return 9.0 * <double>count + 1.0
        if kind == C_SCRIPTED:
            if self._cursor_w >= self.n_scripted_w:
                raise ValueError("scripted weights exhausted")
            self._cursor_w += 1
            return self.scripted_w[self._cursor_w - 1]
        smp = self.sampler
        nu = smp.adj.get(u)
        nv = smp.adj.get(v)
        acc = 0.0
        dim = self._n_edges + 3
        for j in range(dim):
            if j == 0:
                s_j = <double>count
            elif j == 1:
                s_j = 0.0 if nu is None else <double>len(<dict>nu)
            elif j == 2:
                s_j = 0.0 if nv is None else <double>len(<dict>nv)
            else:
                s_j = self._vbuf[j - 3]
            acc += self.policy_w[j] * ((s_j - self.policy_mean[j]) / self.policy_std[j])
        acc += self.policy_b
        return (acc if acc > 0.0 else 0.0) + 1.0

    # -- event processing ----------------------------------------------------

    def peek_insert(self, u, v, t):
        cdef Py_ssize_t count = 0
        self._enumerate(u, v, t, 1, &count)
        return count, self._state_from(u, v, count)

    cdef int _process_insert_c(self, long long u, long long v, long long t,
                               double weight, bint have_weight) except -1:
        cdef bint want_state = self.policy_kind == C_LEARNED and not have_weight
        cdef Py_ssize_t count = 0
        cdef double total = self._enumerate(u, v, t, want_state, &count)
        cdef double rank, uval
        cdef bint evicted_live = 0
        self.c += total
        if not have_weight:
            weight = self._policy_weight_c(u, v, count)
        self.inserts_seen += 1
        if self.n_scripted_r >= 0:
            if self._cursor_r >= self.n_scripted_r:
                raise ValueError("scripted ranks exhausted")
            rank = self.scripted_r[self._cursor_r]
            self._cursor_r += 1
            self.sampler._insert_ranked_c(u, v, weight, rank, t, &evicted_live)
        else:
            uval = 1.0 - <double>self.sampler._random()
            self.sampler._insert_ranked_c(u, v, weight, weight / uval, t, &evicted_live)
        return 0

    def process_insert(self, u, v, t, weight=None):
        if weight is None:
            self._process_insert_c(u, v, t, 0.0, 0)
        else:
            self._process_insert_c(u, v, t, weight, 1)

    cdef int _process_delete_c(self, long long u, long long v, long long t) except -1:
        cdef Py_ssize_t count = 0
        cdef double total = self._enumerate(u, v, t, 0, &count)
        self.c -= total
        self.sampler._delete_c(u, v)
        return 0

    def process_delete(self, u, v, t):
        self._process_delete_c(u, v, t)

    @property
    def estimate(self):
        return self.c

    def run(self, ops, us, vs, record_every=0):
        cdef const unsigned char[::1] mops = ops
        cdef const long long[::1] mus = us
        cdef const long long[::1] mvs = vs
        cdef Py_ssize_t n = mops.shape[0]
        cdef Py_ssize_t stride = record_every
        cdef Py_ssize_t i
        cdef long long t
        out_t = []
        out_c = []
        for i in range(n):
            t = i + 1
            if mops[i]:
                self._process_insert_c(mus[i], mvs[i], t, 0.0, 0)
            else:
                self._process_delete_c(mus[i], mvs[i], t)
            if stride > 0 and (t % stride == 0 or t == n):
                out_t.append(t)
                out_c.append(self.c)
        return np.asarray(out_t, dtype=np.int64), np.asarray(out_c, dtype=np.float64)
