"""Insertion-weight policies and the policy file format.

A policy maps the pre-insertion state of the sampler to a positive weight for
the arriving edge. Three families exist: the constant baseline, a fixed
heuristic on the completion count, and a learned linear layer over the state
vector. Learned policies are trained externally and exchanged as JSON.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

from .patterns import PATTERNS, pattern_spec

V_AGGREGATES = ("max", "avg")


def weight_constant() -> float:
    return 1.0


def weight_heuristic(completions: int) -> float:
    """Favor edges that close many instances at arrival."""
    return 9.0 * completions + 1.0


@dataclass
class PolicyParams:
    """Learned linear policy: weight = relu(W . standardized(state) + b) + 1."""

    pattern: str
    W: list[float]
    b: float
    feat_mean: list[float]
    feat_std: list[float]
    v_aggregate: str = "max"
    dim: int = field(default=0)

    def __post_init__(self):
        if self.dim == 0:
            self.dim = len(self.W)
        self.validate()

    def validate(self) -> None:
        if self.pattern not in PATTERNS:
            raise PolicyError(f"unknown pattern {self.pattern!r}")
        expected = pattern_spec(self.pattern).state_dim
        if self.dim != expected:
            raise PolicyError(
                f"dim {self.dim} does not match pattern {self.pattern!r} "
                f"(state dimension {expected})"
            )
        for name, arr in (("W", self.W), ("feat_mean", self.feat_mean), ("feat_std", self.feat_std)):
            if len(arr) != self.dim:
                raise PolicyError(f"{name} has length {len(arr)}, expected {self.dim}")
            if not all(isinstance(x, (int, float)) and math.isfinite(x) for x in arr):
                raise PolicyError(f"{name} must contain finite numbers")
        if not math.isfinite(self.b):
            raise PolicyError("b must be a finite number")
        if any(s <= 0 for s in self.feat_std):
            raise PolicyError("feat_std entries must be positive")
        if self.v_aggregate not in V_AGGREGATES:
            raise PolicyError(f"v_aggregate must be one of {V_AGGREGATES}")


class PolicyError(ValueError):
    """Invalid policy file or parameters."""


def weight_learned(state: Sequence[float], params: PolicyParams) -> float:
    """Reference scoring; the kernels reproduce this bit for bit."""
    acc = 0.0
    for j in range(params.dim):
        acc += params.W[j] * ((state[j] - params.feat_mean[j]) / params.feat_std[j])
    acc += params.b
    return (acc if acc > 0.0 else 0.0) + 1.0


_REQUIRED = ("pattern", "dim", "W", "b", "feat_mean", "feat_std", "v_aggregate")


def load_policy(source: Union[str, dict]) -> PolicyParams:
    """Load and validate a policy JSON file (or an already-parsed dict)."""
    if isinstance(source, dict):
        doc = source
    else:
        with open(source, "r", encoding="utf-8") as handle:
            try:
                doc = json.load(handle)
            except json.JSONDecodeError as exc:
                raise PolicyError(
                    f"{source}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
                ) from None
    if not isinstance(doc, dict):
        raise PolicyError("policy document must be a JSON object")
    missing = [key for key in _REQUIRED if key not in doc]
    if missing:
        raise PolicyError(f"policy document missing fields: {', '.join(missing)}")
    try:
        params = PolicyParams(
            pattern=doc["pattern"],
            W=[float(x) for x in doc["W"]],
            b=float(doc["b"]),
            feat_mean=[float(x) for x in doc["feat_mean"]],
            feat_std=[float(x) for x in doc["feat_std"]],
            v_aggregate=doc["v_aggregate"],
            dim=int(doc["dim"]),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, PolicyError):
            raise
        raise PolicyError(f"policy document has malformed values: {exc}") from None
    return params


def save_policy(params: PolicyParams, path: str) -> None:
    params.validate()
    doc = {
        "pattern": params.pattern,
        "dim": params.dim,
        "W": params.W,
        "b": params.b,
        "feat_mean": params.feat_mean,
        "feat_std": params.feat_std,
        "v_aggregate": params.v_aggregate,
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, indent=2)
        handle.write("\n")


def compute_state(estimator, u: int, v: int, t: int) -> list[float]:
    """Pre-insertion policy state for edge (u, v) at stream index t.

    Delegates to the estimator kernel, which owns the sampled adjacency:
    [completions, sampled degree of u, sampled degree of v, then one
    aggregated insertion index per pattern edge position].
    """
    _count, state = estimator.peek_insert(u, v, t)
    return state
