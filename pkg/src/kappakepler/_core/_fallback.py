"""Pure numpy reference implementation of the integration kernels.

These are the semantics the compiled extension mirrors; keep the stepping
arithmetic in the same order in both so trajectories agree to rounding.

All kernels return (param_array, state_array, termination_code, last_step).
Termination codes: 0 completed, 1 collision, 2 min-step/starvation,
3 non-finite.
"""

from __future__ import annotations

import numpy as np

COMPLETED = 0
COLLISION = 1
MIN_STEP = 2
NONFINITE = 3


def _finite(*arrays) -> bool:
    return all(np.all(np.isfinite(a)) for a in arrays)


def kepler_verlet(q0, p0, mu, c, dt, n_steps, adaptive=False, min_step=1e-6,
                  energy_tol=1e-8, collision_radius=1e-6):
    """Kick-drift-kick integration of H = |p|^2/(2 mu) - c/|q|.

    Fixed stepping takes exactly n_steps of size dt. Adaptive stepping
    integrates to t_end = n_steps*dt, rejecting and halving any step whose
    energy jump exceeds energy_tol, doubling back toward dt after 20 calm
    steps, and stopping with MIN_STEP when the floor cannot hold the drift.
    """
    q = np.array(q0, dtype=float).ravel()
    p = np.array(p0, dtype=float).ravel()
    d = q.size
    mu = float(mu)
    c = float(c)
    dt = float(dt)
    t_end = dt * n_steps
    cap = (n_steps if not adaptive else 4 * n_steps + 65536) + 2

    t_arr = np.empty(cap)
    states = np.empty((cap, 2 * d))
    t_arr[0] = 0.0
    states[0, :d] = q
    states[0, d:] = p

    def accel(qv):
        r = float(np.sqrt(np.dot(qv, qv)))
        if r == 0.0:
            return np.full(d, np.inf), 0.0
        return (-c / (r * r * r)) * qv, r

    def energy(qv, pv):
        r = float(np.sqrt(np.dot(qv, qv)))
        return float(np.dot(pv, pv)) / (2.0 * mu) - (c / r if r > 0 else np.inf)

    h = dt
    t = 0.0
    k = 0
    calm = 0
    term = COMPLETED
    h_eff = h
    e_prev = energy(q, p)
    eps_end = 1e-12 * max(1.0, abs(t_end))

    while t < t_end - eps_end:
        h_eff = h if t + h <= t_end else (t_end - t)
        a, _ = accel(q)
        p_half = p + (0.5 * h_eff) * a
        q_new = q + (h_eff / mu) * p_half
        a_new, r_new = accel(q_new)
        p_new = p_half + (0.5 * h_eff) * a_new

        ok = _finite(q_new, p_new)
        drift = abs(energy(q_new, p_new) - e_prev) if ok else np.inf

        if not ok or (adaptive and drift > energy_tol):
            if not adaptive:
                term = NONFINITE
                break
            if h <= min_step * (1.0 + 1e-12):
                term = NONFINITE if not ok else MIN_STEP
                break
            h = max(0.5 * h, min_step)
            calm = 0
            continue

        t += h_eff
        q, p = q_new, p_new
        e_prev = energy(q, p)
        k += 1
        t_arr[k] = t
        states[k, :d] = q
        states[k, d:] = p

        if r_new < collision_radius:
            term = COLLISION
            break
        if k + 1 >= cap:
            term = MIN_STEP
            break
        if adaptive:
            calm = calm + 1 if drift < 0.1 * energy_tol else 0
            if calm >= 20 and h < dt:
                h = min(2.0 * h, dt)
                calm = 0

    return t_arr[:k + 1].copy(), states[:k + 1].copy(), term, h_eff


def kepler_rk4(q0, p0, mu, c, dt, n_steps, collision_radius=1e-6):
    """Classic fixed-step RK4 for the same Hamiltonian flow."""
    q = np.array(q0, dtype=float).ravel()
    p = np.array(p0, dtype=float).ravel()
    d = q.size
    mu = float(mu)
    c = float(c)
    dt = float(dt)

    t_arr = np.empty(n_steps + 1)
    states = np.empty((n_steps + 1, 2 * d))
    t_arr[0] = 0.0
    states[0, :d] = q
    states[0, d:] = p

    def rhs(z):
        qv, pv = z[:d], z[d:]
        r = float(np.sqrt(np.dot(qv, qv)))
        if r == 0.0:
            return np.full(2 * d, np.inf)
        return np.concatenate([pv / mu, (-c / (r * r * r)) * qv])

    z = np.concatenate([q, p])
    term = COMPLETED
    k = 0
    for k in range(1, n_steps + 1):
        k1 = rhs(z)
        k2 = rhs(z + 0.5 * dt * k1)
        k3 = rhs(z + 0.5 * dt * k2)
        k4 = rhs(z + dt * k3)
        z = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not _finite(z):
            term = NONFINITE
            k -= 1
            break
        t_arr[k] = k * dt
        states[k] = z
        if float(np.sqrt(np.dot(z[:d], z[:d]))) < collision_radius:
            term = COLLISION
            break

    return t_arr[:k + 1].copy(), states[:k + 1].copy(), term, dt


def sphere_midpoint(u0, v0, dt, n_steps, direction=1.0, renorm=False,
                    fp_tol=1e-13, fp_maxit=25, project=True):
    """Implicit midpoint for the geodesic field (u', v') = dir*(v, -|v|^2 u).

    With project=True each accepted step is followed by normalization of u
    and removal of the normal component of v; with renorm=True the speed |v|
    is reset to its initial value (an exact invariant of the flow).
    """
    u = np.array(u0, dtype=float).ravel()
    v = np.array(v0, dtype=float).ravel()
    n = u.size
    dt = float(dt)
    direction = float(direction)
    speed0 = float(np.sqrt(np.dot(v, v)))

    s_arr = np.empty(n_steps + 1)
    states = np.empty((n_steps + 1, 2 * n))
    s_arr[0] = 0.0
    states[0, :n] = u
    states[0, n:] = v

    def rhs(z):
        uv, vv = z[:n], z[n:]
        v2 = float(np.dot(vv, vv))
        return direction * np.concatenate([vv, -v2 * uv])

    z = np.concatenate([u, v])
    term = COMPLETED
    k = 0
    for k in range(1, n_steps + 1):
        z_new = z + dt * rhs(z)
        for _ in range(fp_maxit):
            z_next = z + dt * rhs(0.5 * (z + z_new))
            delta = float(np.max(np.abs(z_next - z_new)))
            z_new = z_next
            if delta < fp_tol:
                break
        if not _finite(z_new):
            term = NONFINITE
            k -= 1
            break
        un, vn = z_new[:n].copy(), z_new[n:].copy()
        if project:
            nrm = float(np.sqrt(np.dot(un, un)))
            un /= nrm
            vn -= float(np.dot(un, vn)) * un
        if renorm:
            sv = float(np.sqrt(np.dot(vn, vn)))
            if sv > 0.0:
                vn *= speed0 / sv
        z = np.concatenate([un, vn])
        s_arr[k] = k * dt
        states[k] = z

    return s_arr[:k + 1].copy(), states[:k + 1].copy(), term, dt


def delaunay_rk4(x0, y0, mu, dt, n_steps, project=True):
    """RK4 for xdot = mu^2 y/<y,y>^2, ydot = -mu^2 x/<y,y>, with optional
    per-step constraint projection (normalize x, remove <x,y> from y)."""
    x = np.array(x0, dtype=float).ravel()
    y = np.array(y0, dtype=float).ravel()
    n = x.size
    mu = float(mu)
    dt = float(dt)

    t_arr = np.empty(n_steps + 1)
    states = np.empty((n_steps + 1, 2 * n))
    t_arr[0] = 0.0
    states[0, :n] = x
    states[0, n:] = y

    mu2 = mu * mu

    def rhs(z):
        xv, yv = z[:n], z[n:]
        yy = float(np.dot(yv, yv))
        if yy < 1e-24:
            return np.full(2 * n, np.inf)
        return np.concatenate([(mu2 / (yy * yy)) * yv, (-mu2 / yy) * xv])

    z = np.concatenate([x, y])
    term = COMPLETED
    k = 0
    for k in range(1, n_steps + 1):
        k1 = rhs(z)
        k2 = rhs(z + 0.5 * dt * k1)
        k3 = rhs(z + 0.5 * dt * k2)
        k4 = rhs(z + dt * k3)
        z = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not _finite(z):
            term = NONFINITE
            k -= 1
            break
        if project:
            xv, yv = z[:n].copy(), z[n:].copy()
            nrm = float(np.sqrt(np.dot(xv, xv)))
            xv /= nrm
            yv -= float(np.dot(xv, yv)) * xv
            z = np.concatenate([xv, yv])
        t_arr[k] = k * dt
        states[k] = z

    return t_arr[:k + 1].copy(), states[:k + 1].copy(), term, dt
