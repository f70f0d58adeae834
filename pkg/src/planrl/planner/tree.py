"""Append-only search tree backed by growing flat arrays.

Per node the tree stores the state, parentage, the incoming action
(direction, magnitude, step multiple, tracked absolute command), cached
dynamics linearization (full control Jacobian and nominal next state), the
intermediate base-step states of the incoming rollout, and the three reward
components under the current goal.
"""

from __future__ import annotations

import io

import numpy as np

from ..sim_core import EnvModel, proximity
from . import rewards as rw


class SearchTree:
    def __init__(self, env: EnvModel, params, capacity: int = 256):
        self.env = env
        self.params = params
        n_s, n_r = env.n_s, env.n_r
        self._cap = capacity
        self.n = 0
        self.states = np.empty((capacity, n_s))
        self.parent = np.full(capacity, -1, dtype=np.int64)
        self.a_dir = np.zeros((capacity, n_r))
        self.a_mag = np.zeros((capacity, n_r))
        self.step_multiple = np.ones(capacity, dtype=np.int64)
        self.abs_cmd = np.empty((capacity, n_r))
        self.jac = np.empty((capacity, n_s, n_r))
        self.nominal_next = np.empty((capacity, n_s))
        self.prox = np.empty((capacity, env.n_p))
        self.r_d = np.empty(capacity)
        self.r_p = np.empty(capacity)
        self.r_m = np.empty(capacity)
        self.r_total = np.empty(capacity)
        # per node: (k+1, n_s) states at base-step boundaries of the incoming
        # rollout, row 0 being the parent state
        self.knot_states: list = []
        self.current_goal: np.ndarray | None = None
        self.best_index = 0
        self.extend_failures = 0
        self.progress_log: list = []    # (node count, progress) per goal

    def __len__(self) -> int:
        return self.n

    def _grow(self) -> None:
        new_cap = self._cap * 2
        for name in ("states", "parent", "a_dir", "a_mag", "step_multiple",
                     "abs_cmd", "jac", "nominal_next", "prox",
                     "r_d", "r_p", "r_m", "r_total"):
            old = getattr(self, name)
            buf = np.empty((new_cap,) + old.shape[1:], dtype=old.dtype)
            buf[:self.n] = old[:self.n]
            if name in ("parent",):
                buf[self.n:] = -1
            setattr(self, name, buf)
        self._cap = new_cap

    @property
    def jac_obj(self) -> np.ndarray:
        """Object-configuration rows of each node's control Jacobian."""
        e = self.env
        return self.jac[:self.n, 2 * e.n_r:2 * e.n_r + e.n_o, :]

    def add_node(self, state, parent: int, a_dir, a_mag, step_multiple: int,
                 abs_cmd, jac, nominal_next, knot_states) -> int:
        if self.n == self._cap:
            self._grow()
        i = self.n
        self.states[i] = state
        self.parent[i] = parent
        self.a_dir[i] = a_dir
        self.a_mag[i] = a_mag
        self.step_multiple[i] = step_multiple
        self.abs_cmd[i] = abs_cmd
        self.jac[i] = jac
        self.nominal_next[i] = nominal_next
        self.knot_states.append(np.asarray(knot_states))
        self.n = i + 1
        self._score_node(i)
        return i

    def _score_node(self, i: int) -> None:
        env = self.env
        p = self.params
        d = proximity(env, self.states[i])
        self.prox[i] = d
        if self.current_goal is None:
            self.r_d[i] = self.r_p[i] = self.r_m[i] = self.r_total[i] = 0.0
            return
        delta = self.states[i] - self.current_goal
        delta_obj = delta[2 * env.n_r:2 * env.n_r + env.n_o]
        b_obj = self.jac[i, 2 * env.n_r:2 * env.n_r + env.n_o, :]
        m = rw.reachability(b_obj, delta_obj, p.reach_reg)
        r_d, r_p, r_m, total = rw.node_rewards(self.states[i],
                                               self.current_goal, d, m, p)
        self.r_d[i] = r_d
        self.r_p[i] = r_p
        self.r_m[i] = r_m
        self.r_total[i] = total
        if total > self.r_total[self.best_index]:
            self.best_index = i

    def recompute_rewards(self, s_g: np.ndarray) -> None:
        """Re-evaluate goal-dependent rewards for every node under s_g."""
        env = self.env
        p = self.params
        self.current_goal = np.asarray(s_g, dtype=float).copy()
        n = self.n
        if n == 0:
            return
        diff = self.states[:n] - self.current_goal
        self.r_d[:n] = -rw.weighted_norm(diff, p.dist_weights)
        delta_obj = diff[:, 2 * env.n_r:2 * env.n_r + env.n_o]
        m = rw.reachability(self.jac_obj, delta_obj, p.reach_reg)
        self.r_m[:n] = rw.reach_reward(m, p.reach_scale, p.reach_floor)
        self.r_total[:n] = self.r_d[:n] + self.r_p[:n] + self.r_m[:n]
        self.best_index = int(np.argmax(self.r_total[:n]))

    def to_text(self) -> str:
        """Line-delimited export: one node per line.

        Columns: id, parent, step_multiple, direction, magnitude,
        (r_d, r_p, r_m, total), state; vectors are ;-joined repr floats.
        """
        out = io.StringIO()
        out.write("# id parent k dir mag r_d r_p r_m r_total state\n")

        def vec(v):
            return ";".join(repr(float(x)) for x in v)

        for i in range(self.n):
            out.write(" ".join([
                str(i), str(int(self.parent[i])), str(int(self.step_multiple[i])),
                vec(self.a_dir[i]), vec(self.a_mag[i]),
                repr(float(self.r_d[i])), repr(float(self.r_p[i])),
                repr(float(self.r_m[i])), repr(float(self.r_total[i])),
                vec(self.states[i])]) + "\n")
        return out.getvalue()
