import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from planrl.planner import (ACTION_METHODS, ActionCommand, PlannerParams,
                            best_trajectory, default_params,
                            goal_directed_delta, node_rewards,
                            pareto_rank_pmf, plan, reach_reward, reachability,
                            sample_action, sample_goal, sample_method,
                            sample_rank, search_progress, select_node,
                            update_search_params, weighted_norm)
from planrl.planner.tree import SearchTree
from planrl.sim_core import (is_penetrating, make_env, proximity,
                             rollout_segment)


@pytest.fixture(scope="module")
def box1d():
    return make_env("box_push_1d")


def small_tree(env, seed=3, max_nodes=40):
    p = default_params(env)
    rng = np.random.default_rng(seed)
    return plan(env, env.start_state, env.task_goal, p, rng,
                max_nodes=max_nodes), p


# ---------------------------------------------------------------- pareto

def test_pmf_two_node_edge():
    assert pareto_rank_pmf(2, 1.0, 1) == pytest.approx(1.0)
    assert pareto_rank_pmf(2, 1.0, 2) == 0.0


def test_pmf_monotone_nonincreasing():
    for n_n, beta in [(10, 0.2), (10, 1.2), (100, 0.5)]:
        vals = [pareto_rank_pmf(n_n, beta, i) for i in range(1, n_n + 1)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_pmf_validation():
    with pytest.raises(ValueError):
        pareto_rank_pmf(1, 1.0, 1)
    with pytest.raises(ValueError):
        pareto_rank_pmf(5, 0.0, 1)
    with pytest.raises(ValueError):
        pareto_rank_pmf(5, 1.0, 6)


def test_sample_rank_single_node():
    rng = np.random.default_rng(0)
    assert all(sample_rank(1, 0.7, rng) == 1 for _ in range(10))


def test_sample_rank_matches_pmf_l1():
    rng = np.random.default_rng(42)
    n_draws = 100_000
    for n_n, beta in [(10, 0.2), (10, 1.2), (100, 0.5)]:
        counts = np.zeros(n_n)
        for _ in range(n_draws):
            counts[sample_rank(n_n, beta, rng) - 1] += 1
        emp = counts / n_draws
        ref = np.array([pareto_rank_pmf(n_n, beta, i)
                        for i in range(1, n_n + 1)])
        assert np.abs(emp - ref).sum() <= 0.02


def test_select_node_rank1_frequency(box1d):
    tree, _ = small_tree(box1d, seed=1, max_nodes=10)
    assert len(tree) == 10
    tree.recompute_rewards(box1d.task_goal)
    best = int(np.argmax(tree.r_total[:10]))
    rng = np.random.default_rng(9)
    n_draws = 100_000
    hits = sum(select_node(tree, 1.2, rng) == best for _ in range(n_draws))
    want = (1 - 2.0 ** -1.2) / (1 - 10.0 ** -1.2)
    assert hits / n_draws == pytest.approx(want, abs=0.01)


# ---------------------------------------------------------------- rewards

def test_rewards_perfect_state(box1d):
    p = default_params(box1d)
    s = box1d.task_goal
    d = np.zeros(box1d.n_p)
    r_d, r_p, r_m, total = node_rewards(s, s, d, p.reach_floor / 2, p)
    assert (r_d, r_p, r_m, total) == (0.0, 0.0, 0.0, 0.0)


def test_reach_reward_log_unit():
    assert reach_reward(1e-3 * np.e, 1.0, 1e-3) == pytest.approx(-1.0)


def test_distance_reward_scalar_norm(box1d):
    p = default_params(box1d)
    s = box1d.task_goal.copy()
    s[2 * box1d.n_r] += 2.0
    assert -weighted_norm(s - box1d.task_goal, p.dist_weights) \
        == pytest.approx(-2.0)


def test_reachability_zero_error():
    assert reachability(np.ones((2, 3)), np.zeros(2), 1e-4) == 0.0


def test_reachability_pure_regularizer():
    delta = np.array([0.3, -0.4])
    mu = 1e-4
    assert reachability(np.zeros((2, 5)), delta, mu) \
        == pytest.approx(delta @ delta / mu)


def test_reachability_identity_jacobian():
    delta = np.array([1.0, 2.0, -1.0])
    assert reachability(np.eye(3), delta, 1.0) \
        == pytest.approx(delta @ delta / 2.0)


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=25, deadline=None)
def test_reachability_nonnegative(seed):
    rng = np.random.default_rng(seed)
    b = rng.normal(size=(3, 4))
    delta = rng.normal(size=3)
    assert reachability(b, delta, 1e-4) >= 0.0


def test_reward_decomposition_after_recompute(box1d):
    tree, _ = small_tree(box1d, max_nodes=100)
    rng = np.random.default_rng(5)
    goal = rng.uniform(box1d.s_min, box1d.s_max)
    tree.recompute_rewards(goal)
    n = len(tree)
    np.testing.assert_array_equal(
        tree.r_total[:n], tree.r_d[:n] + tree.r_p[:n] + tree.r_m[:n])
    assert tree.best_index == int(np.argmax(tree.r_total[:n]))


def test_recompute_idempotent(box1d):
    tree, _ = small_tree(box1d, max_nodes=30)
    tree.recompute_rewards(box1d.task_goal)
    snap = tree.r_total[:len(tree)].copy()
    tree.recompute_rewards(box1d.task_goal)
    np.testing.assert_array_equal(tree.r_total[:len(tree)], snap)


# ---------------------------------------------------------------- goal directed

def _gd_objective(da, B, Q, R, f0, a0, s_g):
    e = f0 + B @ da - s_g
    a = a0 + da
    return float(e @ (Q * e) + R * (a @ a))


def test_goal_directed_matches_numeric_minimizer():
    rng = np.random.default_rng(11)
    B = rng.normal(size=(6, 3))
    Q = rng.uniform(0.5, 2.0, size=6)
    R = 1e-3
    f0 = rng.normal(size=6)
    a0 = rng.normal(size=3)
    s_g = rng.normal(size=6)
    da = goal_directed_delta(B, Q, R, f0, a0, s_g)
    res = minimize(_gd_objective, np.zeros(3), args=(B, Q, R, f0, a0, s_g),
                   method="BFGS", tol=1e-14)
    np.testing.assert_allclose(da, res.x, atol=1e-6)


def test_goal_directed_stationarity():
    rng = np.random.default_rng(12)
    for _ in range(5):
        B = rng.normal(size=(8, 4))
        Q = rng.uniform(0.0, 3.0, size=8)
        R = 1e-3
        f0 = rng.normal(size=8)
        a0 = rng.normal(size=4)
        s_g = rng.normal(size=8)
        da = goal_directed_delta(B, Q, R, f0, a0, s_g)
        grad = B.T @ (Q * (f0 + B @ da - s_g)) + R * (a0 + da)
        scale = max(1.0, float(np.linalg.norm(da)))
        assert np.linalg.norm(grad) <= 1e-8 * scale


def test_goal_directed_fully_actuated():
    f0 = np.array([1.0, -2.0])
    s_g = np.array([0.5, 0.5])
    da = goal_directed_delta(np.eye(2), np.ones(2), 1e-9, f0, np.zeros(2), s_g)
    np.testing.assert_allclose(da, s_g - f0, atol=1e-6)


def test_goal_directed_rejects_singular_system():
    with pytest.raises(np.linalg.LinAlgError):
        goal_directed_delta(np.zeros((4, 2)), np.ones(4), 0.0,
                            np.zeros(4), np.zeros(2), np.ones(4))


# ---------------------------------------------------------------- adaptation

def _params(box1d):
    return default_params(box1d)


def test_update_on_improvement(box1d):
    p = default_params(box1d)
    beta, horizon = update_search_params(0.5, 10.0, True, 1, p)
    assert beta == p.beta_max
    assert horizon == pytest.approx(9.6)


def test_update_beta_floor_holds(box1d):
    p = default_params(box1d)
    beta, _ = update_search_params(p.beta_min, 5.0, False, 3, p)
    assert beta == p.beta_min


def test_update_limits_under_sustained_failure(box1d):
    p = default_params(box1d)
    beta, horizon = p.beta, p.horizon
    prev = horizon
    for _ in range(2000):
        beta, horizon = update_search_params(beta, horizon, False, 1, p)
        assert horizon >= prev or horizon == p.horizon_max
        prev = horizon
    assert beta == pytest.approx(p.beta_min)
    assert horizon == pytest.approx(p.horizon_max)


@given(st.floats(0.21, 1.2), st.floats(1.0, 10.0), st.booleans(),
       st.integers(1, 10))
@settings(max_examples=50, deadline=None)
def test_update_stays_in_bounds(beta, horizon, better, i_e):
    env = make_env("box_push_1d")
    p = default_params(env)
    b2, h2 = update_search_params(beta, horizon, better, i_e, p)
    assert p.beta_min <= b2 <= p.beta_max
    assert h2 <= p.horizon_max


# ---------------------------------------------------------------- goals

def test_goal_bias_one_always_task(box1d):
    rng = np.random.default_rng(0)
    for _ in range(20):
        g = sample_goal(box1d.task_goal, 1.0, box1d, rng)
        np.testing.assert_array_equal(g, box1d.task_goal)


def test_goal_bias_zero_feasible_draws(box1d):
    rng = np.random.default_rng(1)
    for _ in range(200):
        g = sample_goal(box1d.task_goal, 0.0, box1d, rng)
        assert not np.array_equal(g, box1d.task_goal)
        assert not is_penetrating(box1d, g)


def test_goal_bias_half_frequency(box1d):
    rng = np.random.default_rng(2)
    n = 10_000
    hits = sum(np.array_equal(sample_goal(box1d.task_goal, 0.5, box1d, rng),
                              box1d.task_goal) for _ in range(n))
    assert hits / n == pytest.approx(0.5, abs=0.02)


# ---------------------------------------------------------------- actions

def test_method_frequencies_match_weights(box1d):
    p = default_params(box1d)
    rng = np.random.default_rng(3)
    n = 100_000
    counts = {m: 0 for m in ACTION_METHODS}
    for _ in range(n):
        counts[sample_method(p.action_probs, rng)] += 1
    ref = p.action_probs / p.action_probs.sum()
    for m, r in zip(ACTION_METHODS, ref):
        assert counts[m] / n == pytest.approx(r, abs=0.01)


def test_action_fields_all_methods(box1d):
    tree, p = small_tree(box1d, max_nodes=5)
    tree.recompute_rewards(box1d.task_goal)
    rng = np.random.default_rng(4)
    for method in ACTION_METHODS:
        for node in range(len(tree)):
            cmd = sample_action(tree, node, method, box1d, p, rng)
            assert np.linalg.norm(cmd.direction) == pytest.approx(1.0)
            assert ((cmd.magnitude >= 0) & (cmd.magnitude <= p.alpha_max)).all()
            assert 1 <= cmd.step_multiple <= p.step_multiple_max
            if method == "goal_directed":
                np.testing.assert_array_equal(cmd.magnitude, p.alpha_max)


def test_continuation_repeats_incoming_direction(box1d):
    tree, p = small_tree(box1d, max_nodes=5)
    tree.recompute_rewards(box1d.task_goal)
    child = 1
    assert tree.parent[child] == 0
    rng = np.random.default_rng(5)
    cmd = sample_action(tree, child, "continuation", box1d, p, rng)
    np.testing.assert_allclose(cmd.direction, tree.a_dir[child], atol=1e-12)


def test_continuation_at_root_falls_back_random(box1d):
    tree, p = small_tree(box1d, max_nodes=1)
    tree.recompute_rewards(box1d.task_goal)
    rng = np.random.default_rng(6)
    cmd = sample_action(tree, 0, "continuation", box1d, p, rng)
    assert np.linalg.norm(cmd.direction) == pytest.approx(1.0)


def test_proximity_direction_points_at_object(box1d):
    # pusher starts left of the box, so the descent direction is rightward
    tree, p = small_tree(box1d, max_nodes=1)
    tree.recompute_rewards(box1d.task_goal)
    rng = np.random.default_rng(7)
    cmd = sample_action(tree, 0, "proximity", box1d, p, rng)
    assert cmd.direction[0] > 0


# ---------------------------------------------------------------- extend

def test_extend_structural(box1d):
    from planrl.planner import extend
    tree, p = small_tree(box1d, max_nodes=3)
    tree.recompute_rewards(box1d.task_goal)
    n0 = len(tree)
    cmd = ActionCommand(direction=np.array([1.0]),
                        magnitude=np.array([0.05]), step_multiple=2)
    idx = extend(tree, 0, cmd, box1d)
    assert idx == n0 and len(tree) == n0 + 1
    assert tree.parent[idx] == 0
    assert tree.knot_states[idx].shape == (3, box1d.n_s)


def test_extend_zero_magnitude_keeps_state(box1d):
    from planrl.planner import extend
    tree, p = small_tree(box1d, max_nodes=1)
    tree.recompute_rewards(box1d.task_goal)
    cmd = ActionCommand(direction=np.array([1.0]),
                        magnitude=np.array([0.0]), step_multiple=1)
    idx = extend(tree, 0, cmd, box1d)
    np.testing.assert_array_equal(tree.states[idx], tree.states[0])


# ---------------------------------------------------------------- plan/tree

def test_plan_no_iterations_gives_root_only(box1d):
    p = default_params(box1d)
    p.n_goals, p.iters_per_goal = 1, 0
    tree = plan(box1d, box1d.start_state, box1d.task_goal, p,
                np.random.default_rng(0))
    assert len(tree) == 1
    np.testing.assert_array_equal(tree.states[0], box1d.start_state)


def test_plan_minimum_node_count(box1d):
    p = default_params(box1d)
    p.n_goals, p.iters_per_goal = 2, 3
    tree = plan(box1d, box1d.start_state, box1d.task_goal, p,
                np.random.default_rng(1))
    assert len(tree) >= 1 + 2 * 3
    assert tree.extend_failures == 0


def test_plan_topological_parent_order(box1d):
    tree, _ = small_tree(box1d, max_nodes=60)
    n = len(tree)
    assert tree.parent[0] == -1
    assert (tree.parent[1:n] < np.arange(1, n)).all()
    assert (tree.parent[1:n] >= 0).all()


def test_tree_capacity_growth(box1d):
    p = default_params(box1d)
    rng = np.random.default_rng(2)
    tree = plan(box1d, box1d.start_state, box1d.task_goal, p, rng,
                max_nodes=300)
    assert len(tree) == 300
    n = len(tree)
    assert (tree.parent[1:n] < np.arange(1, n)).all()


def test_max_total_monotone_for_fixed_goal(box1d):
    # within one goal's lifetime the running best total never decreases
    tree, _ = small_tree(box1d, max_nodes=80)
    tree.recompute_rewards(box1d.task_goal)
    n = len(tree)
    running = np.maximum.accumulate(tree.r_total[:n])
    assert running[-1] == tree.r_total[:n].max()
    assert (np.diff(running) >= 0).all()


# ---------------------------------------------------------------- progress

def test_progress_root_only_is_zero(box1d):
    tree, _ = small_tree(box1d, max_nodes=1)
    goal = box1d.task_goal
    assert search_progress(tree, box1d.start_state, goal) == 0.0


def test_progress_start_at_goal_is_one(box1d):
    tree, _ = small_tree(box1d, max_nodes=1)
    assert search_progress(tree, tree.states[0], tree.states[0]) == 1.0


def test_progress_arithmetic(box1d):
    tree, _ = small_tree(box1d, max_nodes=1)
    s_goal = tree.states[0].copy()
    s_goal[2 * box1d.n_r] += 2.0          # object offset 2, weight 1
    s_mid = tree.states[0].copy()
    s_mid[2 * box1d.n_r] += 1.5           # residual distance 0.5
    tree.add_node(s_mid, 0, np.array([1.0]), np.array([0.1]), 1,
                  tree.abs_cmd[0], np.zeros((box1d.n_s, 1)), s_mid,
                  s_mid[None, :])
    assert search_progress(tree, tree.states[0], s_goal) \
        == pytest.approx(0.75)


def test_progress_bounded(box1d):
    tree, _ = small_tree(box1d, max_nodes=50)
    rng = np.random.default_rng(8)
    for _ in range(20):
        g = rng.uniform(box1d.s_min, box1d.s_max)
        prog = search_progress(tree, box1d.start_state, g)
        assert 0.0 <= prog <= 1.0


# ---------------------------------------------------------------- trajectory

def test_trajectory_single_node(box1d):
    tree, _ = small_tree(box1d, max_nodes=1)
    traj = best_trajectory(tree, box1d.task_goal)
    assert len(traj) == 1
    np.testing.assert_array_equal(traj[0][0], box1d.start_state)


def test_trajectory_expands_step_multiples(box1d):
    from planrl.planner import extend
    tree, _ = small_tree(box1d, max_nodes=1)
    tree.recompute_rewards(box1d.task_goal)
    cmd = ActionCommand(direction=np.array([1.0]),
                        magnitude=np.array([0.2]), step_multiple=3)
    idx = extend(tree, 0, cmd, box1d)
    traj = best_trajectory(tree, tree.states[idx])
    assert len(traj) == 1 + 3
    np.testing.assert_array_equal(traj[-1][1], tree.abs_cmd[idx])


def test_trajectory_replay_reproduces_states(box1d):
    tree, _ = small_tree(box1d, seed=11, max_nodes=80)
    traj = best_trajectory(tree, box1d.task_goal)
    assert len(traj) > 1
    s, cmd = traj[0]
    for s_next, c_next in traj[1:]:
        s, _ = rollout_segment(box1d, s, cmd, c_next, box1d.dt_a)
        assert np.max(np.abs(s - s_next)) <= 1e-10
        s, cmd = s_next, c_next


def test_trajectory_targets_distance_not_total(box1d):
    tree, _ = small_tree(box1d, seed=13, max_nodes=120)
    goal = box1d.task_goal
    traj = best_trajectory(tree, goal)
    end = traj[-1][0]
    r_d_all = -weighted_norm(tree.states[:len(tree)] - goal,
                             tree.params.dist_weights)
    np.testing.assert_allclose(-weighted_norm(end - goal,
                                              tree.params.dist_weights),
                               r_d_all.max())


# ---------------------------------------------------------------- export

def test_tree_export_schema(box1d):
    tree, _ = small_tree(box1d, max_nodes=12)
    lines = tree.to_text().strip().split("\n")
    assert lines[0].startswith("#")
    assert len(lines) == 1 + len(tree)
    cols = lines[1].split(" ")
    assert cols[0] == "0" and cols[1] == "-1"
    state = np.array([float(x) for x in cols[-1].split(";")])
    np.testing.assert_array_equal(state, tree.states[0])


def test_tree_export_roundtrip_floats(box1d):
    tree, _ = small_tree(box1d, max_nodes=9)
    last = tree.to_text().strip().split("\n")[-1]
    cols = last.split(" ")
    i = len(tree) - 1
    assert int(cols[0]) == i
    assert int(cols[2]) == tree.step_multiple[i]
    assert float(cols[5]) == tree.r_d[i]
    assert float(cols[8]) == tree.r_total[i]
