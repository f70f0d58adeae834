"""Environment model for the planar manipulation tasks.

A state is a flat vector s = [q_r | qd_r | q_o | qd_o] of robot joint
positions/velocities and object configuration/velocity. All stepping code
operates on batches of states with shape (B, n_s); single states are
1-d arrays of length n_s.
"""

from __future__ import annotations

import dataclasses
import io

import numpy as np

STATE_ORDER = ("q_r", "qd_r", "q_o", "qd_o")


@dataclasses.dataclass(frozen=True)
class EnvModel:
    """Immutable description of one task's dynamics and geometry.

    kind selects the contact/kinematics routines ('box1d', 'box2d', 'hand');
    geometry holds the per-kind shape constants. All stepping functions are
    pure, so one EnvModel can be shared freely.
    """

    name: str
    kind: str
    n_r: int
    n_o: int
    s_min: np.ndarray            # (n_s,)
    s_max: np.ndarray            # (n_s,)
    inertia_r: np.ndarray        # (n_r,) diagonal joint-space inertia
    mass_o: np.ndarray           # (n_o,) diagonal generalized object mass
    damping_o: np.ndarray        # (n_o,) viscous generalized damping
    gravity_o: np.ndarray        # (n_o,) generalized gravity acceleration
    kp: np.ndarray               # (n_r,)
    kd: np.ndarray               # (n_r,)
    dt_c: float
    dt_a: float
    k_n: float                   # contact normal stiffness [N/m]
    c_n: float                   # contact normal damping [N s/m]
    mu_f: float                  # Coulomb friction coefficient
    c_t: float                   # tangential viscous coefficient [N s/m]
    geometry: dict
    sensor_pairs: tuple          # ((robot feature, object feature), ...)
    action_scale: np.ndarray     # (n_r,) max relative command per base step
    start_state: np.ndarray      # (n_s,)
    task_goal: np.ndarray        # (n_s,)

    @property
    def n_s(self) -> int:
        return 2 * (self.n_r + self.n_o)

    @property
    def n_p(self) -> int:
        return len(self.sensor_pairs)

    @property
    def substeps_per_action(self) -> int:
        return int(round(self.dt_a / self.dt_c))

    # slices into the flat state vector
    @property
    def sl_qr(self) -> slice:
        return slice(0, self.n_r)

    @property
    def sl_qdr(self) -> slice:
        return slice(self.n_r, 2 * self.n_r)

    @property
    def sl_qo(self) -> slice:
        return slice(2 * self.n_r, 2 * self.n_r + self.n_o)

    @property
    def sl_qdo(self) -> slice:
        return slice(2 * self.n_r + self.n_o, 2 * self.n_r + 2 * self.n_o)

    def split(self, s: np.ndarray):
        """Views (q_r, qd_r, q_o, qd_o) of a state or state batch."""
        return (s[..., self.sl_qr], s[..., self.sl_qdr],
                s[..., self.sl_qo], s[..., self.sl_qdo])

    def validate(self) -> None:
        n_s = self.n_s
        if self.s_min.shape != (n_s,) or self.s_max.shape != (n_s,):
            raise ValueError("state bounds must have shape (n_s,)")
        if not np.all(self.s_min < self.s_max):
            raise ValueError("require s_min < s_max elementwise")
        if not (self.dt_c > 0 and self.dt_a > 0 and self.dt_c <= self.dt_a):
            raise ValueError("require 0 < dt_c <= dt_a")
        ratio = self.dt_a / self.dt_c
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError("dt_a must be an integer multiple of dt_c")
        if self.k_n <= 0:
            raise ValueError("contact stiffness k_n must be positive")
        if self.mu_f < 0:
            raise ValueError("friction coefficient must be nonnegative")
        for arr, dim, label in ((self.inertia_r, self.n_r, "inertia_r"),
                                (self.kp, self.n_r, "kp"),
                                (self.kd, self.n_r, "kd"),
                                (self.action_scale, self.n_r, "action_scale"),
                                (self.mass_o, self.n_o, "mass_o"),
                                (self.damping_o, self.n_o, "damping_o"),
                                (self.gravity_o, self.n_o, "gravity_o")):
            if arr.shape != (dim,):
                raise ValueError(f"{label} must have shape ({dim},)")
        if np.any(self.inertia_r <= 0) or np.any(self.mass_o <= 0):
            raise ValueError("masses and inertias must be positive")
        for arr in (self.start_state, self.task_goal):
            if arr.shape != (n_s,) or not np.all(np.isfinite(arr)):
                raise ValueError("start/goal states must be finite (n_s,)")


# --- flat key-value serialization -----------------------------------------
#
# Environment parameter files use one `key = value` pair per line; vectors
# are comma-separated numbers. This is the one canonical schema; the same
# reader/writer backs the experiment configs.

_SCALAR_FIELDS = ("name", "kind", "n_r", "n_o", "dt_c", "dt_a",
                  "k_n", "c_n", "mu_f", "c_t")
_VECTOR_FIELDS = ("s_min", "s_max", "inertia_r", "mass_o", "damping_o",
                  "gravity_o", "kp", "kd", "action_scale",
                  "start_state", "task_goal")


def _fmt(v) -> str:
    if isinstance(v, (np.ndarray, list, tuple)):
        return ",".join(repr(float(x)) for x in np.asarray(v).ravel())
    if isinstance(v, float):
        return repr(v)
    return str(v)


def env_to_text(env: EnvModel) -> str:
    out = io.StringIO()
    for key in _SCALAR_FIELDS:
        out.write(f"{key} = {_fmt(getattr(env, key))}\n")
    for key in _VECTOR_FIELDS:
        out.write(f"{key} = {_fmt(getattr(env, key))}\n")
    for key, val in sorted(env.geometry.items()):
        out.write(f"geometry.{key} = {_fmt(val)}\n")
    pairs = ";".join(f"{a}:{b}" for a, b in env.sensor_pairs)
    out.write(f"sensor_pairs = {pairs}\n")
    return out.getvalue()


def parse_kv_text(text: str) -> dict:
    """Parse `key = value` lines into a {key: raw string} dict."""
    table = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        if key in table:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        table[key] = val.strip()
    return table


def env_from_text(text: str) -> EnvModel:
    table = parse_kv_text(text)

    def vec(key):
        return np.array([float(x) for x in table.pop(key).split(",")])

    geometry = {}
    for key in [k for k in table if k.startswith("geometry.")]:
        raw = table.pop(key)
        vals = [float(x) for x in raw.split(",")]
        geometry[key[len("geometry."):]] = vals[0] if len(vals) == 1 else np.array(vals)
    pairs = tuple(tuple(p.split(":")) for p in table.pop("sensor_pairs").split(";") if p)
    env = EnvModel(
        name=table.pop("name"), kind=table.pop("kind"),
        n_r=int(table.pop("n_r")), n_o=int(table.pop("n_o")),
        dt_c=float(table.pop("dt_c")), dt_a=float(table.pop("dt_a")),
        k_n=float(table.pop("k_n")), c_n=float(table.pop("c_n")),
        mu_f=float(table.pop("mu_f")), c_t=float(table.pop("c_t")),
        s_min=vec("s_min"), s_max=vec("s_max"),
        inertia_r=vec("inertia_r"), mass_o=vec("mass_o"),
        damping_o=vec("damping_o"), gravity_o=vec("gravity_o"),
        kp=vec("kp"), kd=vec("kd"), action_scale=vec("action_scale"),
        start_state=vec("start_state"), task_goal=vec("task_goal"),
        geometry=geometry, sensor_pairs=pairs)
    if table:
        raise ValueError(f"unknown keys in environment file: {sorted(table)}")
    env.validate()
    return env
