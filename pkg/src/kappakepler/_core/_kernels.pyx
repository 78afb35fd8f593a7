# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled integration kernels. Mirrors _fallback.py step for step."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

COMPLETED = 0
COLLISION = 1
MIN_STEP = 2
NONFINITE = 3

cdef extern from "math.h":
    double sqrt(double x) nogil
    double fabs(double x) nogil
    int isfinite(double x) nogil
    double INFINITY


cdef inline double _dot(double[::1] a, double[::1] b, Py_ssize_t n) nogil:
    cdef double s = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        s += a[i] * b[i]
    return s


cdef inline bint _all_finite(double[::1] a, Py_ssize_t n) nogil:
    cdef Py_ssize_t i
    for i in range(n):
        if not isfinite(a[i]):
            return 0
    return 1


def kepler_verlet(q0, p0, double mu, double c, double dt, long n_steps,
                  bint adaptive=False, double min_step=1e-6,
                  double energy_tol=1e-8, double collision_radius=1e-6):
    cdef cnp.ndarray[double, ndim=1] q_arr = np.array(q0, dtype=np.float64).ravel()
    cdef cnp.ndarray[double, ndim=1] p_arr = np.array(p0, dtype=np.float64).ravel()
    cdef Py_ssize_t d = q_arr.shape[0]
    cdef long cap = (n_steps if not adaptive else 4 * n_steps + 65536) + 2

    cdef cnp.ndarray[double, ndim=1] t_out = np.empty(cap, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] z_out = np.empty((cap, 2 * d), dtype=np.float64)

    cdef double[::1] q = q_arr
    cdef double[::1] p = p_arr
    cdef double[::1] t_v = t_out
    cdef double[:, ::1] z_v = z_out

    cdef cnp.ndarray[double, ndim=1] work = np.empty(4 * d, dtype=np.float64)
    cdef double[::1] p_half = work[:d]
    cdef double[::1] q_new = work[d:2 * d]
    cdef double[::1] p_new = work[2 * d:3 * d]
    cdef double[::1] a_buf = work[3 * d:]

    cdef double t_end = dt * n_steps
    cdef double eps_end = 1e-12 * (1.0 if fabs(t_end) < 1.0 else fabs(t_end))
    cdef double h = dt, h_eff = dt, t = 0.0
    cdef double e_prev, e_new = 0.0, drift = 0.0, r, r_new, f, inv3
    cdef long k = 0, calm = 0
    cdef int term = COMPLETED
    cdef bint ok
    cdef Py_ssize_t i

    t_v[0] = 0.0
    for i in range(d):
        z_v[0, i] = q[i]
        z_v[0, d + i] = p[i]

    r = sqrt(_dot(q, q, d))
    e_prev = _dot(p, p, d) / (2.0 * mu) - (c / r if r > 0.0 else INFINITY)

    while t < t_end - eps_end:
        h_eff = h if t + h <= t_end else (t_end - t)

        r = sqrt(_dot(q, q, d))
        if r == 0.0:
            for i in range(d):
                a_buf[i] = INFINITY
        else:
            inv3 = -c / (r * r * r)
            for i in range(d):
                a_buf[i] = inv3 * q[i]
        for i in range(d):
            p_half[i] = p[i] + (0.5 * h_eff) * a_buf[i]
        f = h_eff / mu
        for i in range(d):
            q_new[i] = q[i] + f * p_half[i]
        r_new = sqrt(_dot(q_new, q_new, d))
        if r_new == 0.0:
            for i in range(d):
                a_buf[i] = INFINITY
        else:
            inv3 = -c / (r_new * r_new * r_new)
            for i in range(d):
                a_buf[i] = inv3 * q_new[i]
        for i in range(d):
            p_new[i] = p_half[i] + (0.5 * h_eff) * a_buf[i]

        ok = _all_finite(q_new, d) and _all_finite(p_new, d)
        if ok:
            e_new = _dot(p_new, p_new, d) / (2.0 * mu) - (c / r_new if r_new > 0.0 else INFINITY)
            drift = fabs(e_new - e_prev)

        if (not ok) or (adaptive and drift > energy_tol):
            if not adaptive:
                term = NONFINITE
                break
            if h <= min_step * (1.0 + 1e-12):
                term = NONFINITE if not ok else MIN_STEP
                break
            h = 0.5 * h
            if h < min_step:
                h = min_step
            calm = 0
            continue

        t += h_eff
        for i in range(d):
            q[i] = q_new[i]
            p[i] = p_new[i]
        e_prev = e_new
        k += 1
        t_v[k] = t
        for i in range(d):
            z_v[k, i] = q[i]
            z_v[k, d + i] = p[i]

        if r_new < collision_radius:
            term = COLLISION
            break
        if k + 1 >= cap:
            term = MIN_STEP
            break
        if adaptive:
            if drift < 0.1 * energy_tol:
                calm += 1
            else:
                calm = 0
            if calm >= 20 and h < dt:
                h = 2.0 * h
                if h > dt:
                    h = dt
                calm = 0

    return t_out[:k + 1].copy(), z_out[:k + 1].copy(), term, h_eff


cdef void _kepler_rhs(double[::1] z, double[::1] out, double mu, double c,
                      Py_ssize_t d) nogil:
    cdef double r2 = 0.0, r, inv3
    cdef Py_ssize_t i
    for i in range(d):
        r2 += z[i] * z[i]
    r = sqrt(r2)
    if r == 0.0:
        for i in range(2 * d):
            out[i] = INFINITY
        return
    inv3 = -c / (r * r * r)
    for i in range(d):
        out[i] = z[d + i] / mu
        out[d + i] = inv3 * z[i]


def kepler_rk4(q0, p0, double mu, double c, double dt, long n_steps,
               double collision_radius=1e-6):
    cdef cnp.ndarray[double, ndim=1] q_arr = np.array(q0, dtype=np.float64).ravel()
    cdef cnp.ndarray[double, ndim=1] p_arr = np.array(p0, dtype=np.float64).ravel()
    cdef Py_ssize_t d = q_arr.shape[0]
    cdef Py_ssize_t m = 2 * d

    cdef cnp.ndarray[double, ndim=1] t_out = np.empty(n_steps + 1, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] z_out = np.empty((n_steps + 1, m), dtype=np.float64)
    cdef double[::1] t_v = t_out
    cdef double[:, ::1] z_v = z_out

    cdef cnp.ndarray[double, ndim=1] work = np.empty(6 * m, dtype=np.float64)
    cdef double[::1] z = work[:m]
    cdef double[::1] k1 = work[m:2 * m]
    cdef double[::1] k2 = work[2 * m:3 * m]
    cdef double[::1] k3 = work[3 * m:4 * m]
    cdef double[::1] k4 = work[4 * m:5 * m]
    cdef double[::1] tmp = work[5 * m:]

    cdef Py_ssize_t i
    cdef long k = 0
    cdef int term = COMPLETED
    cdef double r2, half_dt = 0.5 * dt, sixth = dt / 6.0

    for i in range(d):
        z[i] = q_arr[i]
        z[d + i] = p_arr[i]
    t_v[0] = 0.0
    for i in range(m):
        z_v[0, i] = z[i]

    for k in range(1, n_steps + 1):
        _kepler_rhs(z, k1, mu, c, d)
        for i in range(m):
            tmp[i] = z[i] + half_dt * k1[i]
        _kepler_rhs(tmp, k2, mu, c, d)
        for i in range(m):
            tmp[i] = z[i] + half_dt * k2[i]
        _kepler_rhs(tmp, k3, mu, c, d)
        for i in range(m):
            tmp[i] = z[i] + dt * k3[i]
        _kepler_rhs(tmp, k4, mu, c, d)
        for i in range(m):
            z[i] = z[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        if not _all_finite(z, m):
            term = NONFINITE
            k -= 1
            break
        t_v[k] = k * dt
        for i in range(m):
            z_v[k, i] = z[i]
        r2 = 0.0
        for i in range(d):
            r2 += z[i] * z[i]
        if sqrt(r2) < collision_radius:
            term = COLLISION
            break

    if n_steps == 0:
        k = 0
    return t_out[:k + 1].copy(), z_out[:k + 1].copy(), term, dt


cdef void _geodesic_rhs(double[::1] z, double[::1] out, double direction,
                        Py_ssize_t n) nogil:
    cdef double v2 = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        v2 += z[n + i] * z[n + i]
    for i in range(n):
        out[i] = direction * z[n + i]
        out[n + i] = direction * ((-v2) * z[i])


def sphere_midpoint(u0, v0, double dt, long n_steps, double direction=1.0,
                    bint renorm=False, double fp_tol=1e-13, long fp_maxit=25,
                    bint project=True):
    cdef cnp.ndarray[double, ndim=1] u_arr = np.array(u0, dtype=np.float64).ravel()
    cdef cnp.ndarray[double, ndim=1] v_arr = np.array(v0, dtype=np.float64).ravel()
    cdef Py_ssize_t n = u_arr.shape[0]
    cdef Py_ssize_t m = 2 * n

    cdef cnp.ndarray[double, ndim=1] s_out = np.empty(n_steps + 1, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] z_out = np.empty((n_steps + 1, m), dtype=np.float64)
    cdef double[::1] s_v = s_out
    cdef double[:, ::1] z_v = z_out

    cdef cnp.ndarray[double, ndim=1] work = np.empty(4 * m, dtype=np.float64)
    cdef double[::1] z = work[:m]
    cdef double[::1] z_new = work[m:2 * m]
    cdef double[::1] mid = work[2 * m:3 * m]
    cdef double[::1] f = work[3 * m:]

    cdef Py_ssize_t i
    cdef long k = 0, it
    cdef int term = COMPLETED
    cdef double speed0, delta, diff, nrm, dotuv, sv

    for i in range(n):
        z[i] = u_arr[i]
        z[n + i] = v_arr[i]
    speed0 = sqrt(_dot(v_arr, v_arr, n))
    s_v[0] = 0.0
    for i in range(m):
        z_v[0, i] = z[i]

    for k in range(1, n_steps + 1):
        _geodesic_rhs(z, f, direction, n)
        for i in range(m):
            z_new[i] = z[i] + dt * f[i]
        for it in range(fp_maxit):
            for i in range(m):
                mid[i] = 0.5 * (z[i] + z_new[i])
            _geodesic_rhs(mid, f, direction, n)
            delta = 0.0
            for i in range(m):
                diff = z[i] + dt * f[i]
                if fabs(diff - z_new[i]) > delta:
                    delta = fabs(diff - z_new[i])
                z_new[i] = diff
            if delta < fp_tol:
                break
        if not _all_finite(z_new, m):
            term = NONFINITE
            k -= 1
            break
        if project:
            nrm = 0.0
            for i in range(n):
                nrm += z_new[i] * z_new[i]
            nrm = sqrt(nrm)
            for i in range(n):
                z_new[i] /= nrm
            dotuv = 0.0
            for i in range(n):
                dotuv += z_new[i] * z_new[n + i]
            for i in range(n):
                z_new[n + i] -= dotuv * z_new[i]
        if renorm:
            sv = 0.0
            for i in range(n):
                sv += z_new[n + i] * z_new[n + i]
            sv = sqrt(sv)
            if sv > 0.0:
                for i in range(n):
                    z_new[n + i] *= speed0 / sv
        for i in range(m):
            z[i] = z_new[i]
        s_v[k] = k * dt
        for i in range(m):
            z_v[k, i] = z[i]

    if n_steps == 0:
        k = 0
    return s_out[:k + 1].copy(), z_out[:k + 1].copy(), term, dt


cdef void _delaunay_rhs(double[::1] z, double[::1] out, double mu2,
                        Py_ssize_t n) nogil:
    cdef double yy = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        yy += z[n + i] * z[n + i]
    if yy < 1e-24:
        for i in range(2 * n):
            out[i] = INFINITY
        return
    for i in range(n):
        out[i] = (mu2 / (yy * yy)) * z[n + i]
        out[n + i] = (-mu2 / yy) * z[i]


def delaunay_rk4(x0, y0, double mu, double dt, long n_steps, bint project=True):
    cdef cnp.ndarray[double, ndim=1] x_arr = np.array(x0, dtype=np.float64).ravel()
    cdef cnp.ndarray[double, ndim=1] y_arr = np.array(y0, dtype=np.float64).ravel()
    cdef Py_ssize_t n = x_arr.shape[0]
    cdef Py_ssize_t m = 2 * n

    cdef cnp.ndarray[double, ndim=1] t_out = np.empty(n_steps + 1, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] z_out = np.empty((n_steps + 1, m), dtype=np.float64)
    cdef double[::1] t_v = t_out
    cdef double[:, ::1] z_v = z_out

    cdef cnp.ndarray[double, ndim=1] work = np.empty(6 * m, dtype=np.float64)
    cdef double[::1] z = work[:m]
    cdef double[::1] k1 = work[m:2 * m]
    cdef double[::1] k2 = work[2 * m:3 * m]
    cdef double[::1] k3 = work[3 * m:4 * m]
    cdef double[::1] k4 = work[4 * m:5 * m]
    cdef double[::1] tmp = work[5 * m:]

    cdef Py_ssize_t i
    cdef long k = 0
    cdef int term = COMPLETED
    cdef double mu2 = mu * mu, half_dt = 0.5 * dt, sixth = dt / 6.0
    cdef double nrm, dotxy

    for i in range(n):
        z[i] = x_arr[i]
        z[n + i] = y_arr[i]
    t_v[0] = 0.0
    for i in range(m):
        z_v[0, i] = z[i]

    for k in range(1, n_steps + 1):
        _delaunay_rhs(z, k1, mu2, n)
        for i in range(m):
            tmp[i] = z[i] + half_dt * k1[i]
        _delaunay_rhs(tmp, k2, mu2, n)
        for i in range(m):
            tmp[i] = z[i] + half_dt * k2[i]
        _delaunay_rhs(tmp, k3, mu2, n)
        for i in range(m):
            tmp[i] = z[i] + dt * k3[i]
        _delaunay_rhs(tmp, k4, mu2, n)
        for i in range(m):
            z[i] = z[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        if not _all_finite(z, m):
            term = NONFINITE
            k -= 1
            break
        if project:
            nrm = 0.0
            for i in range(n):
                nrm += z[i] * z[i]
            nrm = sqrt(nrm)
            for i in range(n):
                z[i] /= nrm
            dotxy = 0.0
            for i in range(n):
                dotxy += z[i] * z[n + i]
            for i in range(n):
                z[n + i] -= dotxy * z[i]
        t_v[k] = k * dt
        for i in range(m):
            z_v[k, i] = z[i]

    if n_steps == 0:
        k = 0
    return t_out[:k + 1].copy(), z_out[:k + 1].copy(), term, dt
