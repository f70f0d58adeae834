"""Task table: every numeric default for the three environments lives here.

Tasks:
  box_push_1d  point pusher block and object block on a line
  box_push_2d  square pusher and square object in the plane, no rotation
  planar_hand  two 2-link fingers over a palm reorienting a box under gravity

Values follow a few conventions: PD gains are near critical damping for the
robot inertia, contact stiffness keeps the stiff contact mode well inside the
stable region of the integrator (omega * dt_c < 1), and the per-step command
scale is 0.3 times the joint range.
"""

from __future__ import annotations

import math

import numpy as np

from .env import EnvModel


def _box_push_1d() -> dict:
    return dict(
        name="box_push_1d",
        kind="box1d",
        n_r=1,
        n_o=1,
        s_min=np.array([-0.6, -3.0, -0.2, -2.0]),
        s_max=np.array([1.4, 3.0, 1.3, 2.0]),
        inertia_r=np.array([1.0]),
        mass_o=np.array([1.0]),
        damping_o=np.array([2.0]),
        gravity_o=np.array([0.0]),
        kp=np.array([400.0]),
        kd=np.array([40.0]),
        dt_c=0.01,
        dt_a=0.4,
        # c_n kept under the explicit damper stability limit c_n*dt_c/m < 1
        k_n=5000.0,
        c_n=30.0,
        mu_f=0.0,
        c_t=10.0,
        geometry={"half_r": 0.1, "half_o": 0.1},
        sensor_pairs=(("pusher", "object"),),
        action_scale=np.array([0.6]),
        start_state=np.array([-0.3, 0.0, 0.0, 0.0]),
        task_goal=np.array([0.8, 0.0, 1.0, 0.0]),
    )


def _box_push_2d() -> dict:
    return dict(
        name="box_push_2d",
        kind="box2d",
        n_r=2,
        n_o=2,
        s_min=np.array([-0.8, -0.8, -3.0, -3.0, -0.5, -0.5, -2.0, -2.0]),
        s_max=np.array([1.4, 1.4, 3.0, 3.0, 1.2, 1.2, 2.0, 2.0]),
        inertia_r=np.array([1.0, 1.0]),
        mass_o=np.array([1.0, 1.0]),
        damping_o=np.array([2.0, 2.0]),
        gravity_o=np.array([0.0, 0.0]),
        kp=np.array([400.0, 400.0]),
        kd=np.array([40.0, 40.0]),
        dt_c=0.01,
        dt_a=0.4,
        k_n=5000.0,
        c_n=30.0,
        mu_f=0.2,
        c_t=20.0,
        geometry={"half_r": 0.1, "half_o": 0.1},
        sensor_pairs=(("pusher", "object"),),
        action_scale=np.array([0.66, 0.66]),
        start_state=np.array([0.4, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        task_goal=np.array([0.1, 0.0, 0.0, 0.0, 0.8, 0.0, 0.0, 0.0]),
    )


def _planar_hand() -> dict:
    return dict(
        name="planar_hand",
        kind="hand",
        n_r=4,
        n_o=3,
        s_min=np.array([-0.6, -0.3, -0.6, -0.3, -8.0, -8.0, -8.0, -8.0,
                        -0.15, 0.04, -3.2, -1.5, -1.5, -8.0]),
        s_max=np.array([1.9, 2.4, 1.9, 2.4, 8.0, 8.0, 8.0, 8.0,
                        0.15, 0.45, 3.2, 1.5, 1.5, 8.0]),
        inertia_r=np.array([0.02, 0.02, 0.02, 0.02]),
        mass_o=np.array([0.5, 0.5, 0.005]),
        damping_o=np.array([0.2, 0.2, 0.005]),
        gravity_o=np.array([0.0, -9.81, 0.0]),
        kp=np.array([12.0, 12.0, 12.0, 12.0]),
        kd=np.array([1.0, 1.0, 1.0, 1.0]),
        dt_c=0.01,
        dt_a=0.4,
        # c_n bounded by the explicit damper stability limit: with two
        # corners resting on the palm, 2*c_n*dt_c/m_o must stay under 2
        k_n=2000.0,
        c_n=20.0,
        mu_f=0.8,
        c_t=20.0,
        geometry={"link_len": 0.18, "finger_rad": 0.02, "half_o": 0.1,
                  "base_x": 0.25, "palm_half_w": 0.3},
        sensor_pairs=(("left_tip", "object"), ("right_tip", "object")),
        action_scale=np.array([0.75, 0.8, 0.75, 0.8]),
        start_state=np.array([0.35, 0.5, 0.35, 0.5, 0.0, 0.0, 0.0, 0.0,
                              0.0, 0.1, 0.0, 0.0, 0.0, 0.0]),
        task_goal=np.array([0.35, 0.5, 0.35, 0.5, 0.0, 0.0, 0.0, 0.0,
                            0.0, 0.1, math.pi / 2.0, 0.0, 0.0, 0.0]),
    )


_BUILDERS = {
    "box_push_1d": _box_push_1d,
    "box_push_2d": _box_push_2d,
    "planar_hand": _planar_hand,
}

TASK_NAMES = tuple(_BUILDERS)


def make_env(name: str, overrides: dict | None = None) -> EnvModel:
    """Build a task environment, optionally overriding numeric defaults.

    Override keys are EnvModel field names; geometry entries are addressed
    as geometry.<key>. The merged model is validated, so inconsistent
    overrides fail here.
    """
    if name not in _BUILDERS:
        raise ValueError(f"unknown task {name!r}, expected one of {TASK_NAMES}")
    kw = _BUILDERS[name]()
    for key, val in (overrides or {}).items():
        if key.startswith("geometry."):
            gkey = key[len("geometry."):]
            if gkey not in kw["geometry"]:
                raise ValueError(f"unknown geometry key {gkey!r} for {name}")
            kw["geometry"][gkey] = float(val)
        elif key in ("name", "kind", "n_r", "n_o", "sensor_pairs", "geometry"):
            raise ValueError(f"override of {key!r} is not supported")
        elif key in kw:
            cur = kw[key]
            kw[key] = (np.asarray(val, dtype=float)
                       if isinstance(cur, np.ndarray) else float(val))
        else:
            raise ValueError(f"unknown override key {key!r} for {name}")
    env = EnvModel(**kw)
    env.validate()
    return env
