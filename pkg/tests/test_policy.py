import json
import random

import pytest

from streamcount.policy import (
    PolicyError,
    PolicyParams,
    compute_state,
    load_policy,
    save_policy,
    weight_constant,
    weight_heuristic,
    weight_learned,
)
from streamcount import engine


def _identity_policy(pattern="triangle", dim=6, w=None, b=0.0):
    return PolicyParams(
        pattern=pattern,
        W=w if w is not None else [0.0] * dim,
        b=b,
        feat_mean=[0.0] * dim,
        feat_std=[1.0] * dim,
        v_aggregate="max",
    )


def test_constant_and_heuristic_values():
    assert weight_constant() == 1.0
    assert weight_heuristic(0) == 1.0
    assert weight_heuristic(1) == 10.0
    assert weight_heuristic(3) == 28.0


def test_learned_degenerate_is_constant():
    params = _identity_policy()
    assert weight_learned([5.0, 2.0, 2.0, 1.0, 2.0, 3.0], params) == 1.0


def test_learned_matches_heuristic_embedding_bitwise():
    # first state feature is the completion count; this embedding must
    # reproduce the heuristic exactly, bit for bit
    params = _identity_policy(w=[9.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    rng = random.Random(4)
    for _ in range(2000):
        count = rng.randrange(0, 50)
        state = [float(count)] + [rng.uniform(0, 100) for _ in range(5)]
        assert weight_learned(state, params) == weight_heuristic(count)


def test_relu_floor_applies():
    params = _identity_policy(w=[-1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    assert weight_learned([10.0, 0, 0, 0, 0, 0], params) == 1.0  # relu clamps to 0, then +1


def test_round_trip(tmp_path):
    params = PolicyParams(
        pattern="wedge",
        W=[0.5, -1.25, 3.0, 0.0, 2.5],
        b=0.125,
        feat_mean=[1.0, 2.0, 3.0, 4.0, 5.0],
        feat_std=[1.0, 0.5, 2.0, 1.5, 3.0],
        v_aggregate="avg",
    )
    path = tmp_path / "policy.json"
    save_policy(params, str(path))
    loaded = load_policy(str(path))
    assert loaded == params


def test_load_rejects_missing_fields(tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"pattern": "wedge", "dim": 5}))
    with pytest.raises(PolicyError, match="missing fields"):
        load_policy(str(path))


def test_load_rejects_dim_mismatch(tmp_path):
    doc = {
        "pattern": "triangle",
        "dim": 5,  # triangle needs 6
        "W": [0.0] * 5,
        "b": 0.0,
        "feat_mean": [0.0] * 5,
        "feat_std": [1.0] * 5,
        "v_aggregate": "max",
    }
    path = tmp_path / "p.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(PolicyError, match="dim"):
        load_policy(str(path))
    doc["dim"] = 6
    path.write_text(json.dumps(doc))
    with pytest.raises(PolicyError, match="length"):
        load_policy(str(path))


def test_load_rejects_nonpositive_std(tmp_path):
    doc = {
        "pattern": "wedge",
        "dim": 5,
        "W": [0.0] * 5,
        "b": 0.0,
        "feat_mean": [0.0] * 5,
        "feat_std": [1.0, 0.0, 1.0, 1.0, 1.0],
        "v_aggregate": "max",
    }
    path = tmp_path / "p.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(PolicyError, match="feat_std"):
        load_policy(str(path))


def test_load_rejects_malformed_json_with_position(tmp_path):
    path = tmp_path / "p.json"
    path.write_text('{"pattern": "wedge",\n  "dim": oops}\n')
    with pytest.raises(PolicyError, match="line 2"):
        load_policy(str(path))


def test_load_rejects_bad_enum_values(tmp_path):
    doc = {
        "pattern": "square",
        "dim": 5,
        "W": [0.0] * 5,
        "b": 0.0,
        "feat_mean": [0.0] * 5,
        "feat_std": [1.0] * 5,
        "v_aggregate": "max",
    }
    path = tmp_path / "p.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(PolicyError, match="pattern"):
        load_policy(str(path))
    doc["pattern"] = "wedge"
    doc["v_aggregate"] = "median"
    path.write_text(json.dumps(doc))
    with pytest.raises(PolicyError, match="v_aggregate"):
        load_policy(str(path))


def test_kernel_learned_weight_matches_reference(kernel):
    # the kernel applies the same standardization and relu, bit for bit
    params = PolicyParams(
        pattern="triangle",
        W=[0.7, -0.3, 0.2, 0.05, -0.02, 0.01],
        b=0.4,
        feat_mean=[1.0, 2.0, 2.0, 10.0, 12.0, 15.0],
        feat_std=[0.5, 1.0, 1.0, 4.0, 4.0, 5.0],
        v_aggregate="max",
    )
    est = engine.make_estimator("triangle", "wsd", 16, seed=0, policy=params, kernel=kernel)
    inserted = [(1, 3), (2, 3), (1, 4), (2, 4), (3, 4)]
    for t, (u, v) in enumerate(inserted, 1):
        est.process_insert(u, v, t)
    _count, state = est.peek_insert(1, 2, 6)
    expected_weight = weight_learned(state, params)
    est.process_insert(1, 2, 6)
    rows = {(r[0], r[1]): r[2] for r in est.sampler.snapshot()}
    assert rows[(1, 2)] == expected_weight


def test_compute_state_delegates(kernel):
    est = engine.make_estimator("wedge", "wsd", 8, seed=0, kernel=kernel)
    est.process_insert(1, 2, 1, weight=1.0)
    state = compute_state(est, 2, 3, 2)
    assert state == [1.0, 1.0, 0.0, 1.0, 2.0]


def test_golden_policy_fixture():
    params = load_policy("tests/fixtures/policy_triangle_golden.json")
    state = [2.0, 3.0, 1.0, 5.0, 9.0, 11.0]
    assert weight_learned(state, params) == GOLDEN_POLICY_WEIGHT


GOLDEN_POLICY_WEIGHT = 1.3813333333333333  # frozen from the first verified run
