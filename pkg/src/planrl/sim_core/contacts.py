"""Batched contact forces, signed gaps, and proximity sensors per task family.

All routines take state blocks of shape (B, n) and return per-batch forces or
gaps. Contact is compliant: normal force k_n*pen + c_n*pen_rate clamped to be
non-adhesive, tangential force -min(mu_f*|F_n|, c_t*|v_t|)*sign(v_t). Each
task family has a fixed candidate pair list:

  box1d: pusher interval vs object interval (1 pair)
  box2d: pusher square vs object square, axis-aligned, no rotation (1 pair)
  hand:  8 finger sample spheres vs the oriented object box + 4 object
         corners vs a static palm half-plane y <= 0 (12 pairs)

This module sits on the hot path (it runs every control substep, usually at
batch sizes 1 to 10), so the hand routines keep x and y components in
separate flat arrays instead of stacked vectors: the per-call overhead of
small-array numpy ops dominates, not the arithmetic.
"""

from __future__ import annotations

import numpy as np

# sample points along each finger link, as fractions of the link length;
# the last entry must be 1.0 so the final point is the fingertip
_FRACS = (0.5, 1.0)
_PPL = len(_FRACS)
_PPF = 2 * _PPL                  # points per finger
_CX = np.array([1.0, 1.0, -1.0, -1.0])
_CY = np.array([1.0, -1.0, 1.0, -1.0])


def _sign0(x: np.ndarray) -> np.ndarray:
    """Sign with sign(0) = +1 (deterministic normal for touching bodies)."""
    return np.where(x >= 0.0, 1.0, -1.0)


# --------------------------------------------------------------------------
# box push 1d

def box1d_forces(env, q_r, qd_r, q_o, qd_o):
    g = env.geometry
    span = g["half_r"] + g["half_o"]
    dx = q_o[:, 0] - q_r[:, 0]
    n = _sign0(dx)
    pen = span - np.abs(dx)
    pen_rate = -n * (qd_o[:, 0] - qd_r[:, 0])
    f = np.maximum(0.0, env.k_n * pen + env.c_n * pen_rate)
    f *= pen > 0.0
    f_o = (f * n)[:, None]
    return -f_o, f_o


def box1d_gaps(env, q_r, q_o):
    g = env.geometry
    gap = np.abs(q_o[:, 0] - q_r[:, 0]) - (g["half_r"] + g["half_o"])
    return gap[:, None]


def box1d_sensors(env, q_r, q_o):
    return np.maximum(0.0, box1d_gaps(env, q_r, q_o))


# --------------------------------------------------------------------------
# box push 2d

def box2d_forces(env, q_r, qd_r, q_o, qd_o):
    g = env.geometry
    span = g["half_r"] + g["half_o"]
    d = q_o - q_r                           # (B, 2)
    ov = span - np.abs(d)                   # per-axis overlap
    touching = (ov[:, 0] > 0.0) & (ov[:, 1] > 0.0)
    axis = np.argmin(ov, axis=1)
    rows = np.arange(d.shape[0])
    sgn = _sign0(d[rows, axis])
    pen = ov[rows, axis]
    vrel = qd_o - qd_r
    pen_rate = -sgn * vrel[rows, axis]
    fn = np.maximum(0.0, env.k_n * pen + env.c_n * pen_rate)
    fn *= touching
    taxis = 1 - axis
    vt = vrel[rows, taxis]
    ft = -np.minimum(env.mu_f * fn, env.c_t * np.abs(vt)) * _sign0(vt)
    f_o = np.zeros_like(d)
    f_o[rows, axis] = fn * sgn
    f_o[rows, taxis] += ft
    return -f_o, f_o


def box2d_gaps(env, q_r, q_o):
    g = env.geometry
    span = g["half_r"] + g["half_o"]
    ax_gap = np.abs(q_o - q_r) - span       # (B, 2) per-axis gap
    # positive when separated along some axis, else -min overlap
    return np.max(ax_gap, axis=1, keepdims=True)


def box2d_sensors(env, q_r, q_o):
    g = env.geometry
    span = g["half_r"] + g["half_o"]
    ax_gap = np.maximum(0.0, np.abs(q_o - q_r) - span)
    return np.sqrt(ax_gap[:, 0] ** 2 + ax_gap[:, 1] ** 2)[:, None]


# --------------------------------------------------------------------------
# planar hand: two 2-link fingers over a palm, free box under gravity

def _hand_fk(env, q_r, with_jac: bool):
    """Finger sample points, optionally with joint Jacobian columns.

    Component arrays have shape (B, 2 * _PPF): points 0.._PPF-1 belong to the
    left finger, the rest to the right; within a finger the proximal link
    points come first and the last point is the fingertip. Returns
    (px, py, j1x, j1y, j2x, j2y); the Jacobian entries are None when
    with_jac is false.
    """
    g = env.geometry
    ln = g["link_len"]
    bx = g["base_x"]
    b = q_r.shape[0]
    a1 = q_r[:, 0::2]                       # (B, 2) base joints
    a2 = a1 + q_r[:, 1::2]
    # left finger curls toward +x, right toward -x: x uses sign-flipped
    # sin/cos, y uses the plain ones
    s1u = np.sin(a1)
    c1u = np.cos(a1)
    s2u = np.sin(a2)
    c2u = np.cos(a2)
    s1 = s1u.copy()
    s1[:, 1] = -s1[:, 1]
    s2 = s2u.copy()
    s2[:, 1] = -s2[:, 1]
    px = np.empty((b, 2, _PPF))
    py = np.empty((b, 2, _PPF))
    basex = np.array([-bx, bx])
    ex = basex + ln * s1                    # elbow
    ey = ln * c1u
    for k, t in enumerate(_FRACS):
        tl = t * ln
        px[:, :, k] = basex + tl * s1
        py[:, :, k] = tl * c1u
        px[:, :, _PPL + k] = ex + tl * s2
        py[:, :, _PPL + k] = ey + tl * c2u
    n = 2 * _PPF
    px = px.reshape(b, n)
    py = py.reshape(b, n)
    if not with_jac:
        return px, py, None, None, None, None
    c1 = c1u.copy()
    c1[:, 1] = -c1[:, 1]
    c2 = c2u.copy()
    c2[:, 1] = -c2[:, 1]
    j1x = np.empty((b, 2, _PPF))
    j1y = np.empty((b, 2, _PPF))
    j2x = np.empty((b, 2, _PPF))
    j2y = np.empty((b, 2, _PPF))
    for k, t in enumerate(_FRACS):
        tl = t * ln
        j1x[:, :, k] = tl * c1
        j1y[:, :, k] = -tl * s1u
        j2x[:, :, k] = 0.0
        j2y[:, :, k] = 0.0
        j1x[:, :, _PPL + k] = ln * c1 + tl * c2
        j1y[:, :, _PPL + k] = -(ln * s1u + tl * s2u)
        j2x[:, :, _PPL + k] = tl * c2
        j2y[:, :, _PPL + k] = -tl * s2u
    return (px, py, j1x.reshape(b, n), j1y.reshape(b, n),
            j2x.reshape(b, n), j2y.reshape(b, n))


def _sphere_box_query(env, px, py, q_o):
    """Closest-feature data for sample spheres vs the oriented object box.

    Returns (depth, nx, ny, sx, sy): penetration of each sphere, the world
    contact normal pointing from the box into the sphere, and the box surface
    point relative to the box center. All (B, P) for (B, P) point inputs.
    """
    g = env.geometry
    h = g["half_o"]
    rf = g["finger_rad"]
    ct = np.cos(q_o[:, 2])[:, None]
    st = np.sin(q_o[:, 2])[:, None]
    relx = px - q_o[:, 0][:, None]
    rely = py - q_o[:, 1][:, None]
    lx = ct * relx + st * rely
    ly = ct * rely - st * relx
    clx = np.minimum(np.maximum(lx, -h), h)
    cly = np.minimum(np.maximum(ly, -h), h)
    dx = lx - clx
    dy = ly - cly
    dist = np.sqrt(dx * dx + dy * dy)
    outside = dist > 0.0
    if outside.all():
        # common case: no sphere center inside the box
        nlx = dx / dist
        nly = dy / dist
        depth = rf - dist
        slx = clx
        sly = cly
    else:
        safe = np.where(outside, dist, 1.0)
        # center inside the box: push out along the least-penetrated axis
        pxd = h - np.abs(lx)
        pyd = h - np.abs(ly)
        use_x = pxd <= pyd
        nlx = np.where(outside, dx / safe, np.where(use_x, _sign0(lx), 0.0))
        nly = np.where(outside, dy / safe, np.where(use_x, 0.0, _sign0(ly)))
        depth = np.where(outside, rf - dist, rf + np.where(use_x, pxd, pyd))
        slx = np.where(outside, clx, np.where(use_x, _sign0(lx) * h, lx))
        sly = np.where(outside, cly, np.where(use_x, ly, _sign0(ly) * h))
    nx = ct * nlx - st * nly
    ny = st * nlx + ct * nly
    sx = ct * slx - st * sly
    sy = st * slx + ct * sly
    return depth, nx, ny, sx, sy


def hand_forces(env, q_r, qd_r, q_o, qd_o):
    b = q_r.shape[0]
    px, py, j1x, j1y, j2x, j2y = _hand_fk(env, q_r, with_jac=True)
    depth, nx, ny, sx, sy = _sphere_box_query(env, px, py, q_o)
    qd1 = np.repeat(qd_r[:, 0::2], _PPF, axis=1)    # (B, 2*_PPF)
    qd2 = np.repeat(qd_r[:, 1::2], _PPF, axis=1)
    vpx = j1x * qd1
    vpx += j2x * qd2
    vpy = j1y * qd1
    vpy += j2y * qd2
    vcx = qd_o[:, 0][:, None]
    vcy = qd_o[:, 1][:, None]
    om = qd_o[:, 2][:, None]
    dvx = vpx - (vcx - om * sy)             # sphere velocity relative to the
    dvy = vpy - (vcy + om * sx)             # box surface point
    vn = nx * dvx + ny * dvy
    fn = np.maximum(0.0, env.k_n * depth - env.c_n * vn)
    fn *= depth > 0.0
    vt = nx * dvy - ny * dvx
    ft = -np.minimum(env.mu_f * fn, env.c_t * np.abs(vt)) * _sign0(vt)
    fx = fn * nx - ft * ny                  # force on the finger point
    fy = fn * ny + ft * nx
    tj1 = (j1x * fx + j1y * fy).reshape(b, 2, _PPF).sum(axis=2)
    tj2 = (j2x * fx + j2y * fy).reshape(b, 2, _PPF).sum(axis=2)
    f_r = np.empty((b, 4))
    f_r[:, 0::2] = tj1
    f_r[:, 1::2] = tj2
    f_o = np.empty((b, 3))
    f_o[:, 0] = -fx.sum(axis=1)
    f_o[:, 1] = -fy.sum(axis=1)
    f_o[:, 2] = (sy * fx - sx * fy).sum(axis=1)

    # object corners vs palm half-plane y <= 0
    h = env.geometry["half_o"]
    ct = np.cos(q_o[:, 2])[:, None]
    st = np.sin(q_o[:, 2])[:, None]
    rx = h * (ct * _CX - st * _CY)          # corner offsets from center (B,4)
    ry = h * (st * _CX + ct * _CY)
    wy = q_o[:, 1][:, None] + ry
    vx = vcx - om * ry
    vy = vcy + om * rx
    cf = np.maximum(0.0, -env.k_n * wy - env.c_n * vy)
    cf *= wy < 0.0
    ftc = -np.minimum(env.mu_f * cf, env.c_t * np.abs(vx)) * _sign0(vx)
    f_o[:, 0] += ftc.sum(axis=1)
    f_o[:, 1] += cf.sum(axis=1)
    f_o[:, 2] += (rx * cf - ry * ftc).sum(axis=1)
    return f_r, f_o


def hand_gaps(env, q_r, q_o):
    """Signed gaps for all candidate pairs; negative is penetration."""
    px, py, _, _, _, _ = _hand_fk(env, q_r, with_jac=False)
    depth, _, _, _, _ = _sphere_box_query(env, px, py, q_o)
    h = env.geometry["half_o"]
    ct = np.cos(q_o[:, 2])[:, None]
    st = np.sin(q_o[:, 2])[:, None]
    wy = q_o[:, 1][:, None] + h * (st * _CX + ct * _CY)
    return np.concatenate([-depth, wy], axis=1)


def hand_sensors(env, q_r, q_o):
    """Fingertip-to-object surface distances, one per finger."""
    px, py, _, _, _, _ = _hand_fk(env, q_r, with_jac=False)
    tips = [_PPF - 1, 2 * _PPF - 1]
    depth, _, _, _, _ = _sphere_box_query(env, px[:, tips], py[:, tips], q_o)
    return np.maximum(0.0, -depth)


FORCES = {"box1d": box1d_forces, "box2d": box2d_forces, "hand": hand_forces}
GAPS = {"box1d": box1d_gaps, "box2d": box2d_gaps, "hand": hand_gaps}
SENSORS = {"box1d": box1d_sensors, "box2d": box2d_sensors, "hand": hand_sensors}
