import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from socgs.cg import DropAccounting, acg_step, cg_step, exact_rule, fw_gap, golden_rule, run_acg, run_cg
from socgs.core import ActiveSet, IterateState, StoppingCriterion
from socgs.objectives import quadratic_objective, random_quadratic
from socgs.regions import L1Ball, Simplex

from conftest import project_simplex

S3 = Simplex(3)


def dist_sq(c):
    """``1/2 ||x - c||^2`` as a quadratic objective."""
    c = np.asarray(c, dtype=float)
    return quadratic_objective(np.eye(c.size), c)


def linear_rule(x, d, g, gamma_max):
    # A linear objective decreases monotonically along a descent direction.
    return gamma_max if g @ d < 0 else 0.0


def test_fw_gap_zero_at_optimum():
    f = dist_sq(np.zeros(3))
    x = np.full(3, 1 / 3)
    assert fw_gap(f.gradient(x), x, S3) == pytest.approx(0.0, abs=1e-15)


def test_fw_gap_at_vertex():
    f = dist_sq(np.zeros(3))
    e1 = np.array([1.0, 0.0, 0.0])
    assert fw_gap(f.gradient(e1), e1, S3) == 1.0


def test_fw_gap_dimension():
    with pytest.raises(ValueError, match="dimension"):
        fw_gap(np.ones(3), np.ones(4), S3)


def test_fw_gap_bounds_primal_gap():
    region = L1Ball(6, 1.0)
    f = random_quadratic(6, cond=20.0, seed=5)
    ref = run_acg(f, region, region.lowest_vertex(), StoppingCriterion(100000, 1e-12))
    f_opt = ref.final.f
    seen = []
    run_acg(f, region, region.lowest_vertex(), StoppingCriterion(200, 1e-10),
            on_step=lambda k, out: seen.append(out.state.x))
    for x in seen:
        assert fw_gap(f.gradient(x), x, region) >= f.value(x) - f_opt - 1e-12


def test_acg_full_fw_step():
    f = dist_sq([0.0, 1.0, 0.0])
    state = IterateState.from_vertex(S3.vertex(0))
    out = acg_step(f.gradient(state.x), state, S3, exact_rule(f.curvature))
    assert out.kind == "fw_full" and out.gamma == 1.0
    assert out.fw_gap == 2.0
    assert out.state.active_set.keys() == [(1,)]
    assert np.array_equal(out.state.x, [0.0, 1.0, 0.0])


def test_acg_away_drop_step():
    aset = ActiveSet([S3.vertex(i) for i in range(3)], np.full(3, 1 / 3))
    state = IterateState.from_active_set(aset)
    out = acg_step(np.array([2.0, 0.0, -1.0]), state, S3, linear_rule)
    assert out.kind == "away_drop"
    assert out.fw_gap == pytest.approx(4 / 3)
    assert out.gamma == pytest.approx(0.5)
    assert np.allclose(out.state.x, [0.0, 0.5, 0.5])
    assert out.state.active_set.keys() == [(1,), (2,)]
    assert np.allclose(out.state.active_set.weights, [0.5, 0.5])


def test_fw_wins_ties():
    aset = ActiveSet([S3.vertex(0), S3.vertex(1)], [0.5, 0.5])
    state = IterateState.from_active_set(aset)
    # FW gap <g, x - e3> = 1 equals away gap <g, e1 - x> = 1.
    out = acg_step(np.array([1.0, -1.0, -1.0]), state, S3, linear_rule)
    assert out.kind in ("fw", "fw_full")


def test_acg_random_steps_audit(rng):
    region = L1Ball(8, 1.0)
    for trial in range(10):
        f = random_quadratic(8, cond=30.0, seed=trial)
        state = IterateState.from_vertex(region.random_vertex(rng))
        rule = exact_rule(f.curvature)
        for _ in range(50):
            out = acg_step(f.gradient(state.x), state, region, rule)
            assert f.value(out.state.x) <= f.value(state.x) + 1e-12
            out.state.check()
            if out.kind == "away_drop":
                assert len(out.state.active_set) < len(state.active_set)
            if out.kind == "fw_full":
                assert len(out.state.active_set) == 1
            state = out.state


def test_cg_fixed_point():
    f = dist_sq([1.0, 0.0, 0.0])
    state = IterateState.from_vertex(S3.vertex(0))
    out = cg_step(f.gradient(state.x), state, S3, exact_rule(f.curvature))
    assert out.state is state and out.fw_gap == 0.0


def test_cg_one_step():
    f = dist_sq(np.zeros(3))
    state = IterateState.from_vertex(S3.vertex(0))
    out = cg_step(f.gradient(state.x), state, S3, exact_rule(f.curvature))
    assert out.gamma == pytest.approx(0.5)
    assert np.allclose(out.state.x, [0.5, 0.5, 0.0])


def test_cg_random_steps_nonincreasing(rng):
    region = Simplex(10)
    f = random_quadratic(10, cond=100.0, seed=2)
    state = IterateState.from_vertex(region.vertex(3))
    rule = golden_rule(f)
    for _ in range(200):
        out = cg_step(f.gradient(state.x), state, region, rule)
        assert f.value(out.state.x) <= f.value(state.x) + 1e-12
        out.state.check()
        state = out.state


def test_run_acg_interior_optimum():
    c = np.array([0.2, 0.5, 0.3])
    tr = run_acg(dist_sq(c), S3, S3.vertex(0), StoppingCriterion(1000, 1e-8))
    assert tr.final.fw_gap <= 1e-8
    assert np.max(np.abs(tr.x - c)) <= 1e-4


@given(st.integers(0, 2**31))
def test_run_acg_projection(seed):
    rng = np.random.default_rng(seed)
    c = 2.0 * rng.standard_normal(5)
    region = Simplex(5)
    tr = run_acg(dist_sq(c), region, region.vertex(0), StoppingCriterion(5000, 1e-12))
    assert np.max(np.abs(tr.x - project_simplex(c))) <= 1e-5


def test_trace_counters():
    f = random_quadratic(5, seed=1)
    region = Simplex(5)
    tr = run_acg(f, region, region.vertex(0), StoppingCriterion(30, 0.0))
    for r in tr.records:
        assert r.lmo_calls == r.iter + 1
        assert r.fo_calls == r.iter + 1
        assert r.hessian_calls == 0
    assert tr.records[0].step_kind == "fw"
    assert set(tr.column("step_kind")) <= {"fw", "away", "drop"}


def test_audit_mode_runs():
    f = random_quadratic(6, seed=0, center=np.full(6, 1 / 6))
    region = Simplex(6)
    tr = run_acg(f, region, region.vertex(0), StoppingCriterion(3000, 1e-12), audit=True)
    assert tr.final.fw_gap <= 1e-12
    run_cg(f, region, region.vertex(0), StoppingCriterion(300, 1e-12), audit=True)


def test_drop_accounting():
    acc = DropAccounting(1)
    acc.add("away_drop")
    assert not acc.ok()
    acc.add("fw")
    assert acc.ok()

