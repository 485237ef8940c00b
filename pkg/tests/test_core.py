import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from socgs.core import (
    ActiveSet,
    InvariantError,
    IterateState,
    StoppingCriterion,
    TraceRecorder,
    convex_combination,
    weighted_norm_sq,
)
from socgs.regions import Simplex


S3 = Simplex(3)


def test_convex_combination_single_atom():
    got = convex_combination(ActiveSet.singleton(S3.vertex(0)))
    assert np.array_equal(got, [1.0, 0.0, 0.0])


def test_convex_combination_two_atoms():
    aset = ActiveSet([S3.vertex(0), S3.vertex(1)], [0.5, 0.5])
    assert np.array_equal(convex_combination(aset), [0.5, 0.5, 0.0])


def test_convex_combination_matches_naive_loop(rng):
    region = Simplex(7)
    idx = rng.choice(7, size=4, replace=False)
    w = rng.random(4)
    w /= w.sum()
    aset = ActiveSet([region.vertex(i) for i in idx], w)
    naive = np.zeros(7)
    for i, wi in zip(idx, w):
        for j in range(7):
            naive[j] += wi * (1.0 if j == i else 0.0)
    assert np.allclose(convex_combination(aset), naive, rtol=0, atol=1e-15)


def test_convex_combination_empty():
    with pytest.raises(ValueError, match="empty active set"):
        convex_combination(ActiveSet([], []))


def test_weighted_norm_examples():
    assert weighted_norm_sq([1.0, 0.0], np.eye(2)) == 1.0
    assert weighted_norm_sq([1.0, 1.0], np.diag([2.0, 3.0])) == 5.0


def test_weighted_norm_double_loop(rng):
    v = rng.standard_normal(5)
    M = rng.standard_normal((5, 5))
    H = M @ M.T
    naive = sum(v[i] * H[i, j] * v[j] for i in range(5) for j in range(5))
    assert weighted_norm_sq(v, H) == pytest.approx(naive, rel=1e-12)


def test_weighted_norm_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension"):
        weighted_norm_sq(np.ones(3), np.eye(2))


@given(st.integers(0, 2**32 - 1))
def test_weighted_norm_positive(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 8))
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    H = (Q * rng.uniform(1e-6, 10.0, n)) @ Q.T
    v = rng.standard_normal(n)
    if np.linalg.norm(v) > 1e-8:
        assert weighted_norm_sq(v, H) > 0


def test_vertex_identity_uses_key():
    a, b = S3.vertex(1), S3.vertex(1)
    assert a == b and hash(a) == hash(b)
    assert a != S3.vertex(2)
    with pytest.raises(ValueError):
        a.dense[0] = 5.0


def test_duplicate_atom_rejected():
    with pytest.raises(InvariantError, match="duplicate"):
        ActiveSet([S3.vertex(0), S3.vertex(0)], [0.5, 0.5])


def test_fw_update_full_step_collapses():
    aset = ActiveSet([S3.vertex(0), S3.vertex(1)], [0.25, 0.75])
    out = aset.fw_update(S3.vertex(2), 1.0)
    assert out.keys() == [(2,)]


def test_fw_update_existing_atom():
    aset = ActiveSet([S3.vertex(0), S3.vertex(1)], [0.5, 0.5])
    out = aset.fw_update(S3.vertex(1), 0.5)
    assert np.allclose(out.weights, [0.25, 0.75])
    out.check()


def test_away_update_drop():
    aset = ActiveSet([S3.vertex(0), S3.vertex(1), S3.vertex(2)], [1 / 3, 1 / 3, 1 / 3])
    out = aset.away_update(S3.vertex(0), 0.5, 0.5)
    assert out.keys() == [(1,), (2,)]
    assert np.allclose(out.weights, [0.5, 0.5])


def test_away_update_partial():
    aset = ActiveSet([S3.vertex(0), S3.vertex(1)], [0.5, 0.5])
    out = aset.away_update(S3.vertex(0), 0.5, 1.0)
    # (1 + g) * 0.5 - g = 0.25 for a; (1 + g) * 0.5 = 0.75 for the other.
    assert np.allclose(out.weights, [0.25, 0.75])


def test_large_negative_weight_is_an_error():
    aset = ActiveSet([S3.vertex(0), S3.vertex(1)], [0.5, 0.5])
    with pytest.raises(InvariantError):
        aset.away_update(S3.vertex(0), 3.0, 5.0)


@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=40), st.integers(0, 2**31))
def test_random_updates_keep_invariants(gammas, seed):
    rng = np.random.default_rng(seed)
    region = Simplex(6)
    state = IterateState.from_vertex(region.vertex(0))
    for g in gammas:
        aset = state.active_set
        if rng.random() < 0.5 or len(aset) == 1:
            new = aset.fw_update(region.random_vertex(rng), g)
        else:
            a = aset.vertices[int(rng.integers(len(aset)))]
            lam = aset.weight_of(a)
            gmax = min(lam / float(sum(w for u, w in aset if u != a)), 1e300)
            new = aset.away_update(a, g * gmax, gmax)
        state = IterateState.from_active_set(new)
        state.check()
        assert len(set(state.active_set.keys())) == len(state.active_set)


def test_iterate_state_check_catches_drift():
    state = IterateState(np.array([0.5, 0.5, 0.0]), ActiveSet.singleton(S3.vertex(0)))
    with pytest.raises(InvariantError, match="differs"):
        state.check()


def test_stopping_criterion_requires_a_bound():
    with pytest.raises(ValueError):
        StoppingCriterion(None, 0.0, None)
    stop = StoppingCriterion(5, 1e-3)
    assert stop.done(5, 1.0, 0.0)
    assert stop.done(0, 1e-4, 0.0)
    assert not stop.done(1, 1.0, 0.0)
    assert StoppingCriterion(None, 0.0, 1.0).done(3, 1.0, 2.0)


def test_recorder_optional_columns():
    rec = TraceRecorder("x")
    rec.record(0, np.zeros(2), 1.0, 0.5, "fw")
    tr = rec.finish()
    assert tr.final.primal_gap is None and tr.final.dist_opt is None
    rec = TraceRecorder("x", f_opt=0.25, x_opt=np.array([3.0, 4.0]))
    rec.record(0, np.zeros(2), 1.0, 0.5, "fw")
    assert rec.finish().final.primal_gap == 0.75
    assert rec.finish().final.dist_opt == 5.0


def test_recorder_rejects_nan():
    rec = TraceRecorder("x")
    with pytest.raises(FloatingPointError):
        rec.record(0, np.zeros(1), float("nan"), 0.0, "fw")
