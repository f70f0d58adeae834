"""Transitions, sparse rewards, replay storage, demonstrations, relabeling.

Episodes have a fixed horizon. An action lives in the policy's [-1, 1] box
and decodes to the absolute joint-space reference q_r + a * alpha_max; a
demonstration's padded prefix uses the zero action, which decodes to the
robot's initial joint positions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..planner import best_trajectory, weighted_norm
from ..sim_core import EnvModel


@dataclass
class Transition:
    s: np.ndarray
    a: np.ndarray
    s_g: np.ndarray
    r: float
    s_next: np.ndarray
    is_demo: bool = False


def sparse_reward(s_t, s_0, s_g, epsilon: float, dist_weights) -> float:
    """0 when the remaining goal distance is within epsilon of the initial
    one, else -1; a start already at the goal counts as success."""
    d0 = weighted_norm(np.asarray(s_0, dtype=float) - s_g, dist_weights)
    if d0 == 0.0:
        return 0.0
    d = weighted_norm(np.asarray(s_t, dtype=float) - s_g, dist_weights)
    return 0.0 if d / d0 <= epsilon else -1.0


class ReplayBuffer:
    """Ring buffer of fixed-horizon episodes with uniform transition draws."""

    def __init__(self, capacity: int, n_steps: int, n_s: int, n_r: int):
        self.capacity = capacity
        self.n_steps = n_steps
        self.states = np.empty((capacity, n_steps, n_s))
        self.next_states = np.empty((capacity, n_steps, n_s))
        self.actions = np.empty((capacity, n_steps, n_r))
        self.goals = np.empty((capacity, n_steps, n_s))
        self.rewards = np.empty((capacity, n_steps))
        self.is_demo = np.zeros(capacity, dtype=bool)
        self.n_stored = 0           # episodes currently held
        self._head = 0              # next write slot (FIFO ring)

    def __len__(self) -> int:
        return self.n_stored

    @property
    def n_transitions(self) -> int:
        return self.n_stored * self.n_steps

    def store_episode(self, transitions, is_demo: bool) -> None:
        if len(transitions) != self.n_steps:
            raise ValueError(
                f"episode length {len(transitions)} != horizon {self.n_steps}")
        i = self._head
        for t, tr in enumerate(transitions):
            self.states[i, t] = tr.s
            self.next_states[i, t] = tr.s_next
            self.actions[i, t] = tr.a
            self.goals[i, t] = tr.s_g
            self.rewards[i, t] = tr.r
        self.is_demo[i] = is_demo
        self._head = (i + 1) % self.capacity
        self.n_stored = min(self.n_stored + 1, self.capacity)

    def sample(self, n_batch: int, rng: np.random.Generator) -> dict:
        if self.n_transitions < n_batch:
            raise ValueError("not enough transitions to fill a batch")
        ep = rng.integers(self.n_stored, size=n_batch)
        t = rng.integers(self.n_steps, size=n_batch)
        return {
            "s": self.states[ep, t],
            "a": self.actions[ep, t],
            "s_g": self.goals[ep, t],
            "r": self.rewards[ep, t],
            "s_next": self.next_states[ep, t],
            "is_demo": self.is_demo[ep],
        }

    def demo_fraction(self) -> float:
        if self.n_stored == 0:
            return 0.0
        return float(self.is_demo[:self.n_stored].mean())


class DemoSet:
    """Planner search trees serving as demonstration sources."""

    def __init__(self, trees):
        self.trees = list(trees)
        if not self.trees:
            raise ValueError("demo set needs at least one tree")

    def pick(self, rng: np.random.Generator):
        return self.trees[int(rng.integers(len(self.trees)))]

    def closest(self, s_g: np.ndarray, dist_weights):
        """Tree holding the node closest to s_g in the weighted distance."""
        best_tree, best = None, -np.inf
        for tree in self.trees:
            d = weighted_norm(tree.states[:len(tree)] - s_g, dist_weights)
            top = float(-d.min())
            if top > best:
                best_tree, best = tree, top
        return best_tree


def demo_trajectory(demo_set: DemoSet, s_g: np.ndarray, n_steps: int,
                    rng: np.random.Generator, env: EnvModel,
                    epsilon: float, dist_weights,
                    alpha_max) -> list:
    """Planner path toward s_g as a fixed-length list of transitions.

    Long paths keep their last n_steps transitions; short ones are front
    padded with the start state and the zero action (the decoded command is
    then the initial joint positions). Rewards follow the sparse rule
    against the drawn goal, normalized by the stored episode's first state.
    """
    tree = demo_set.closest(s_g, dist_weights)
    pairs = best_trajectory(tree, s_g)
    raw = []
    for t in range(len(pairs) - 1):
        s, _ = pairs[t]
        s_next, cmd = pairs[t + 1]
        a = (cmd - s[env.sl_qr]) / alpha_max
        raw.append((s, np.clip(a, -1.0, 1.0), s_next))
    if len(raw) > n_steps:
        raw = raw[len(raw) - n_steps:]
    elif len(raw) < n_steps:
        start = pairs[0][0]
        pad = [(start, np.zeros(env.n_r), start)] * (n_steps - len(raw))
        raw = pad + raw
    s_0 = raw[0][0]
    out = []
    for s, a, s_next in raw:
        r = sparse_reward(s_next, s_0, s_g, epsilon, dist_weights)
        out.append(Transition(s=np.asarray(s, dtype=float).copy(), a=a,
                              s_g=np.asarray(s_g, dtype=float).copy(), r=r,
                              s_next=np.asarray(s_next, dtype=float).copy(),
                              is_demo=True))
    return out


def her_relabel(episode, p_her: float, rng: np.random.Generator,
                epsilon: float, dist_weights) -> list:
    """Hindsight copy of an episode with future achieved states as goals.

    Each transition is relabeled with probability p_her: its goal becomes
    the successor state of a uniformly drawn step at or after it, and its
    reward is recomputed. Returns the full relabeled copy, or an empty list
    when no transition was touched.
    """
    n = len(episode)
    out = []
    flipped = 0
    s_0 = episode[0].s
    for t, tr in enumerate(episode):
        if rng.random() < p_her:
            j = int(rng.integers(t, n))
            new_goal = episode[j].s_next.copy()
            r = sparse_reward(tr.s_next, s_0, new_goal, epsilon, dist_weights)
            out.append(Transition(s=tr.s, a=tr.a, s_g=new_goal, r=r,
                                  s_next=tr.s_next, is_demo=tr.is_demo))
            flipped += 1
        else:
            out.append(Transition(s=tr.s, a=tr.a, s_g=tr.s_g, r=tr.r,
                                  s_next=tr.s_next, is_demo=tr.is_demo))
    return out if flipped else []
