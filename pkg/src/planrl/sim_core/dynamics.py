"""Semi-implicit Euler stepping with PD-tracked position references.

The robot joints track a commanded reference through a PD law; the reference
is interpolated linearly from the previous command to the new command over
each base step, with knot values computed once per base step so that a long
rollout and the same rollout split into base-step segments produce bit
identical states.

All internal stepping is batch-first: states have shape (B, n_s).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import contacts
from .env import EnvModel, STATE_ORDER


class SimulationDivergence(RuntimeError):
    """A state coordinate left the finite range during stepping."""


class RetryBudgetError(RuntimeError):
    """Rejection sampling exhausted its retry budget."""


@dataclass
class RolloutTrace:
    """Recorded rollout: row t is the state after t control substeps.

    applied_reference[t] is the reference the PD law tracked at substep t
    (row 0 pairs with the initial state and equals the previous command).
    """

    substates: np.ndarray
    applied_reference: np.ndarray


def _check_finite(env: EnvModel, s: np.ndarray) -> None:
    if np.isfinite(s).all():
        return
    bad = np.argwhere(~np.isfinite(s))[0]
    blk = np.searchsorted([env.n_r, 2 * env.n_r, 2 * env.n_r + env.n_o],
                          int(bad[-1]), side="right")
    raise SimulationDivergence(
        f"{env.name}: non-finite state coordinate {int(bad[-1])} "
        f"({STATE_ORDER[blk]} block)")


# per-env constants hoisted out of the substep loop, keyed by object id;
# the env is kept alive in the value so ids cannot be recycled
_PREP: dict = {}


def _prep(env: EnvModel):
    key = id(env)
    hit = _PREP.get(key)
    if hit is None:
        nr, no = env.n_r, env.n_o
        g_force = env.mass_o * env.gravity_o
        hit = (env,
               env.s_min[:nr].copy(), env.s_max[:nr].copy(),
               env.s_min[nr:2 * nr].copy(), env.s_max[nr:2 * nr].copy(),
               env.s_min[2 * nr:2 * nr + no].copy(),
               env.s_max[2 * nr:2 * nr + no].copy(),
               env.s_min[2 * nr + no:].copy(), env.s_max[2 * nr + no:].copy(),
               g_force)
        _PREP[key] = hit
    return hit


def substep_batch(env: EnvModel, s: np.ndarray, a_ref: np.ndarray) -> np.ndarray:
    """One control substep of dt_c for a (B, n_s) state block."""
    (_, qr_lo, qr_hi, vr_lo, vr_hi, qo_lo, qo_hi, vo_lo, vo_hi,
     g_force) = _prep(env)
    nr, no = env.n_r, env.n_o
    dt = env.dt_c
    q_r = s[:, :nr]
    qd_r = s[:, nr:2 * nr]
    q_o = s[:, 2 * nr:2 * nr + no]
    qd_o = s[:, 2 * nr + no:]
    f_r, f_o = contacts.FORCES[env.kind](env, q_r, qd_r, q_o, qd_o)
    f_r += env.kp * (a_ref - q_r)
    f_r -= env.kd * qd_r
    f_o += g_force
    f_o -= env.damping_o * qd_o
    qd_r2 = np.minimum(np.maximum(qd_r + (dt / env.inertia_r) * f_r, vr_lo), vr_hi)
    qd_o2 = np.minimum(np.maximum(qd_o + (dt / env.mass_o) * f_o, vo_lo), vo_hi)
    qr_raw = q_r + dt * qd_r2
    qo_raw = q_o + dt * qd_o2
    q_r2 = np.minimum(np.maximum(qr_raw, qr_lo), qr_hi)
    q_o2 = np.minimum(np.maximum(qo_raw, qo_lo), qo_hi)
    out = np.empty_like(s)
    # position limits act as hard stops: clamp and kill the velocity
    out[:, :nr] = q_r2
    out[:, nr:2 * nr] = np.where(q_r2 != qr_raw, 0.0, qd_r2)
    out[:, 2 * nr:2 * nr + no] = q_o2
    out[:, 2 * nr + no:] = np.where(q_o2 != qo_raw, 0.0, qd_o2)
    return out


def substep(env: EnvModel, s: np.ndarray, a_ref: np.ndarray) -> np.ndarray:
    """Single-state wrapper around substep_batch with a divergence check."""
    out = substep_batch(env, s[None, :], a_ref[None, :])[0]
    _check_finite(env, out[None, :])
    return out


def _base_knots(prev_cmd: np.ndarray, new_cmd: np.ndarray, n_base: int) -> np.ndarray:
    """Per-base-step command knots, exact at both ends.

    Returns (n_base + 1, ..., n_r); row j is the reference at the end of base
    step j. Row n_base is new_cmd itself, not a rounded interpolation, so a
    segmented replay that restarts from a knot reproduces the references.
    """
    out = np.empty((n_base + 1,) + prev_cmd.shape, dtype=prev_cmd.dtype)
    out[0] = prev_cmd
    for j in range(1, n_base):
        out[j] = prev_cmd + (new_cmd - prev_cmd) * (j / n_base)
    out[n_base] = new_cmd
    return out


def rollout_batch(env: EnvModel, s: np.ndarray, prev_cmd: np.ndarray,
                  new_cmd: np.ndarray, n_base: int,
                  want_knots: bool = False):
    """Advance a (B, n_s) block by n_base base steps.

    prev_cmd/new_cmd are absolute commands, shape (B, n_r). Returns the final
    state block, or (final, knot_states) where knot_states[j] is the state
    after j base steps (j = 0 .. n_base).
    """
    n_sub = env.substeps_per_action
    knots = _base_knots(prev_cmd, new_cmd, n_base)
    rec = np.empty((n_base + 1,) + s.shape) if want_knots else None
    if want_knots:
        rec[0] = s
    for j in range(n_base):
        c0, c1 = knots[j], knots[j + 1]
        for t in range(1, n_sub + 1):
            ref = c1 if t == n_sub else c0 + (c1 - c0) * (t / n_sub)
            s = substep_batch(env, s, ref)
        _check_finite(env, s)
        if want_knots:
            rec[j + 1] = s
    return (s, rec) if want_knots else s


def rollout_segment(env: EnvModel, s: np.ndarray, prev_cmd: np.ndarray,
                    new_cmd: np.ndarray, dt_total: float):
    """Roll a single state forward dt_total seconds and record every substep.

    dt_total must be a whole number of base steps. Returns (final_state,
    RolloutTrace).
    """
    ratio = dt_total / env.dt_a
    n_base = int(round(ratio))
    if n_base < 1 or abs(ratio - n_base) > 1e-9:
        raise ValueError(
            f"dt_total={dt_total} is not a positive multiple of dt_a={env.dt_a}")
    n_sub = env.substeps_per_action
    n_tot = n_base * n_sub
    states = np.empty((n_tot + 1, env.n_s))
    refs = np.empty((n_tot + 1, env.n_r))
    states[0] = s
    refs[0] = prev_cmd
    knots = _base_knots(prev_cmd[None, :], new_cmd[None, :], n_base)
    cur = s[None, :]
    row = 1
    for j in range(n_base):
        c0, c1 = knots[j], knots[j + 1]
        for t in range(1, n_sub + 1):
            ref = c1 if t == n_sub else c0 + (c1 - c0) * (t / n_sub)
            cur = substep_batch(env, cur, ref)
            states[row] = cur[0]
            refs[row] = ref[0]
            row += 1
        _check_finite(env, cur)
    return cur[0], RolloutTrace(substates=states, applied_reference=refs)


def control_jacobian(env: EnvModel, s: np.ndarray, a0: np.ndarray,
                     prev_cmd: np.ndarray | None = None,
                     fd_step: float = 1e-4):
    """Sensitivity of the one-base-step outcome to the absolute command a0.

    Central differences over each command coordinate, all rollouts batched.
    Returns (jac, jac_obj, f0): jac is (n_s, n_r), jac_obj its
    object-configuration rows (n_o, n_r), f0 the unperturbed outcome.
    prev_cmd defaults to a0 (constant reference over the step).
    """
    nr = a0.shape[0]
    if prev_cmd is None:
        prev_cmd = a0
    lanes = np.tile(a0, (2 * nr + 1, 1))
    idx = np.arange(nr)
    lanes[idx, idx] += fd_step
    lanes[nr + idx, idx] -= fd_step
    s_block = np.broadcast_to(s, (2 * nr + 1, s.shape[0]))
    prev_block = np.broadcast_to(prev_cmd, (2 * nr + 1, nr))
    out = rollout_batch(env, np.ascontiguousarray(s_block),
                        np.ascontiguousarray(prev_block), lanes, 1)
    jac = (out[:nr] - out[nr:2 * nr]).T / (2.0 * fd_step)
    f0 = out[2 * nr]
    return jac, jac[2 * env.n_r:2 * env.n_r + env.n_o, :], f0


def proximity(env: EnvModel, s: np.ndarray) -> np.ndarray:
    """Sensor readings: body-pair surface distances, clamped at zero."""
    one = s.ndim == 1
    sb = s[None, :] if one else s
    q_r = sb[:, env.sl_qr]
    q_o = sb[:, env.sl_qo]
    d = contacts.SENSORS[env.kind](env, q_r, q_o)
    return d[0] if one else d


def proximity_jacobian(env: EnvModel, s: np.ndarray,
                       fd_step: float = 1e-5) -> np.ndarray:
    """d(sensor)/d(robot joints) by central differences, shape (n_p, n_r).

    Purely kinematic: joints are displaced directly, no dynamics involved.
    """
    nr = env.n_r
    block = np.tile(s, (2 * nr, 1))
    idx = np.arange(nr)
    block[idx, idx] += fd_step
    block[nr + idx, idx] -= fd_step
    d = proximity(env, block)
    return (d[:nr] - d[nr:]).T / (2.0 * fd_step)


def min_gap(env: EnvModel, s: np.ndarray) -> float:
    """Smallest signed gap over the candidate contact pair list."""
    q_r = s[None, env.sl_qr]
    q_o = s[None, env.sl_qo]
    return float(np.min(contacts.GAPS[env.kind](env, q_r, q_o)))


def is_penetrating(env: EnvModel, s: np.ndarray, tol: float = 1e-6) -> bool:
    """True when any candidate pair overlaps by more than tol."""
    return min_gap(env, s) < -tol


def sample_feasible_state(env: EnvModel, rng: np.random.Generator,
                          max_tries: int = 10000) -> np.ndarray:
    """Uniform draw from the state box, rejecting penetrating candidates."""
    for _ in range(max_tries):
        s = rng.uniform(env.s_min, env.s_max)
        if not is_penetrating(env, s):
            return s
    raise RetryBudgetError(
        f"{env.name}: no penetration-free state in {max_tries} draws")
