"""Kernel selection and typed facade over the event kernels.

The compiled extension is preferred when importable; the pure-Python kernel
is the fallback and the semantic reference. Both expose identical Sampler /
Estimator classes and produce bit-identical results for the same seed.
Set STREAMCOUNT_PURE=1 to force the fallback (used by the kernel benchmark).
"""

import os
from dataclasses import dataclass
from typing import Optional, Sequence, TextIO, Union

import numpy as np

from . import _pykernel
from .constants import (
    PATTERN_CODES,
    POLICY_CONSTANT,
    POLICY_HEURISTIC,
    POLICY_LEARNED,
    POLICY_SCRIPTED,
    SCHEME_WSD,
    SCHEMES,
    V_AGG_AVG,
    V_AGG_MAX,
)
from .policy import PolicyParams
from .stream import EdgeEvent, events_to_arrays

_forced_pure = bool(os.environ.get("STREAMCOUNT_PURE"))
if not _forced_pure:
    try:
        from . import _kernel as _impl
    except ImportError:
        _impl = _pykernel
else:
    _impl = _pykernel

KERNEL = _impl.KERNEL_NAME


def kernel_module(name: Optional[str] = None):
    """Kernel module by name: 'compiled', 'pure', or None for the active one."""
    if name is None:
        return _impl
    if name == "pure":
        return _pykernel
    if name == "compiled":
        if _impl.KERNEL_NAME != "compiled":
            from . import _kernel  # raises ImportError when unavailable

            return _kernel
        return _impl
    raise ValueError(f"unknown kernel {name!r}")


def _scheme_code(scheme: Union[str, int]) -> int:
    if isinstance(scheme, str):
        try:
            return SCHEMES[scheme]
        except KeyError:
            raise ValueError(f"unknown scheme {scheme!r}") from None
    return scheme


def _pattern_code(pattern: Union[str, int]) -> int:
    if isinstance(pattern, str):
        try:
            return PATTERN_CODES[pattern]
        except KeyError:
            raise ValueError(f"unknown pattern {pattern!r}") from None
    return pattern


def make_sampler(scheme: Union[str, int], capacity: int, seed: int, kernel: Optional[str] = None):
    return kernel_module(kernel).Sampler(_scheme_code(scheme), capacity, seed)


def make_estimator(
    pattern: Union[str, int],
    scheme: Union[str, int],
    capacity: int,
    seed: int,
    policy: Union[str, PolicyParams, None] = "constant",
    scripted_weights: Optional[Sequence[float]] = None,
    scripted_ranks: Optional[Sequence[float]] = None,
    kernel: Optional[str] = None,
):
    """Build an estimator.

    policy: 'constant', 'heuristic', a PolicyParams for a learned policy, or
    None when every insertion weight will be supplied explicitly (scripted
    weights or the serving loop).
    """
    kwargs = {}
    if scripted_weights is not None:
        kind = POLICY_SCRIPTED
        kwargs["scripted_weights"] = [float(w) for w in scripted_weights]
    elif isinstance(policy, PolicyParams):
        kind = POLICY_LEARNED
        kwargs.update(
            policy_w=list(policy.W),
            policy_b=policy.b,
            policy_mean=list(policy.feat_mean),
            policy_std=list(policy.feat_std),
            v_agg=V_AGG_AVG if policy.v_aggregate == "avg" else V_AGG_MAX,
        )
    elif policy in ("constant", None):
        kind = POLICY_CONSTANT
    elif policy == "heuristic":
        kind = POLICY_HEURISTIC
    else:
        raise ValueError(f"unknown policy {policy!r}")
    if scripted_ranks is not None:
        kwargs["scripted_ranks"] = [float(r) for r in scripted_ranks]
    return kernel_module(kernel).Estimator(
        _pattern_code(pattern), _scheme_code(scheme), capacity, seed, kind, **kwargs
    )


@dataclass
class RunResult:
    """Outcome of one estimator pass over a stream."""

    final_estimate: float
    traj_t: np.ndarray
    traj_estimate: np.ndarray
    events: int
    elapsed: float

    @property
    def events_per_sec(self) -> float:
        return self.events / self.elapsed if self.elapsed > 0 else float("inf")


def run_stream(
    events: Union[Sequence[EdgeEvent], tuple],
    pattern: Union[str, int],
    scheme: Union[str, int],
    capacity: int,
    seed: int,
    policy: Union[str, PolicyParams, None] = "constant",
    record_every: int = 0,
    kernel: Optional[str] = None,
) -> RunResult:
    """Run the estimator over a whole stream; events may be packed arrays."""
    import time

    if isinstance(events, tuple) and len(events) == 3:
        ops, us, vs = events
    else:
        ops, us, vs = events_to_arrays(events)
    est = make_estimator(pattern, scheme, capacity, seed, policy, kernel=kernel)
    start = time.perf_counter()
    traj_t, traj_c = est.run(ops, us, vs, record_every)
    elapsed = time.perf_counter() - start
    return RunResult(est.estimate, traj_t, traj_c, len(ops), elapsed)


def dump_reservoir(sampler, sink: Union[str, TextIO]) -> None:
    """Write the sampler's physical contents as CSV with a threshold header."""
    if isinstance(sink, str):
        with open(sink, "w", encoding="utf-8") as handle:
            dump_reservoir(sampler, handle)
        return
    rows = sampler.snapshot()
    if sampler.scheme == SCHEME_WSD:
        sink.write(f"# tau_p={sampler.tau_p!r} tau_q={sampler.tau_q!r}\n")
        sink.write("u,v,weight,rank,insert_index\n")
        for u, v, w, rank, idx, _tag in rows:
            sink.write(f"{u},{v},{w!r},{rank!r},{idx}\n")
    else:
        sink.write(f"# r_threshold={sampler.r_threshold!r}\n")
        sink.write("u,v,weight,rank,insert_index,tagged\n")
        for u, v, w, rank, idx, tag in rows:
            sink.write(f"{u},{v},{w!r},{rank!r},{idx},{tag}\n")
