"""Compiled Jordan-algebra kernels for products of orthants and Lorentz cones.

Cone layout is passed as ``lidx`` (orthant coordinates) plus ``qs``/``qd``
(start offset and dimension of every second-order block).  ``v`` arrays for
the scaling live in slack coordinates, so the same offsets address them.
"""

import numpy as np
from numba import njit

_opts = dict(cache=True, nogil=True)


@njit(**_opts)
def product(u, v, lidx, qs, qd):
    out = np.empty_like(u)
    for i in lidx:
        out[i] = u[i] * v[i]
    for b in range(qs.size):
        s, d = qs[b], qd[b]
        acc = 0.0
        for j in range(d):
            acc += u[s + j] * v[s + j]
        out[s] = acc
        for j in range(1, d):
            out[s + j] = u[s] * v[s + j] + v[s] * u[s + j]
    return out


@njit(**_opts)
def divide(lam, r, lidx, qs, qd):
    """x with lam o x = r."""
    out = np.empty_like(r)
    for i in lidx:
        out[i] = r[i] / lam[i]
    for b in range(qs.size):
        s, d = qs[b], qd[b]
        l0 = lam[s]
        n2 = 0.0
        dot = 0.0
        for j in range(1, d):
            n2 += lam[s + j] * lam[s + j]
            dot += lam[s + j] * r[s + j]
        x0 = (l0 * r[s] - dot) / ((l0 - np.sqrt(n2)) * (l0 + np.sqrt(n2)))
        out[s] = x0
        for j in range(1, d):
            out[s + j] = (r[s + j] - x0 * lam[s + j]) / l0
    return out


@njit(**_opts)
def dets(u, qs, qd):
    out = np.empty(qs.size)
    for b in range(qs.size):
        s, d = qs[b], qd[b]
        n2 = 0.0
        for j in range(1, d):
            n2 += u[s + j] * u[s + j]
        n1 = np.sqrt(n2)
        out[b] = (u[s] - n1) * (u[s] + n1)
    return out


@njit(**_opts)
def min_eig(u, lidx, qs, qd):
    best = np.inf
    for i in lidx:
        if u[i] < best:
            best = u[i]
    for b in range(qs.size):
        s, d = qs[b], qd[b]
        n2 = 0.0
        for j in range(1, d):
            n2 += u[s + j] * u[s + j]
        val = u[s] - np.sqrt(n2)
        if val < best:
            best = val
    return best


@njit(**_opts)
def max_step(lam, dvec, lidx, qs, qd):
    """Largest a with lam + a*dvec in the cone; lam strictly interior."""
    best = np.inf
    for i in lidx:
        if dvec[i] < 0.0:
            a = -lam[i] / dvec[i]
            if a < best:
                best = a
    for b in range(qs.size):
        s, d = qs[b], qd[b]
        x0, d0 = lam[s], dvec[s]
        xx = 0.0
        xd = 0.0
        dd = 0.0
        for j in range(1, d):
            xx += lam[s + j] * lam[s + j]
            xd += lam[s + j] * dvec[s + j]
            dd += dvec[s + j] * dvec[s + j]
        nx = np.sqrt(xx)
        detx = (x0 - nx) * (x0 + nx)
        B = x0 * d0 - xd
        C = d0 * d0 - dd
        disc = B * B - detx * C
        root = np.sqrt(disc) if disc > 0.0 else 0.0
        # smallest root of det(d - mu x) = 0 without cancellation
        if B > 0.0:
            mu = C / (B + root)
        else:
            mu = (B - root) / detx
        if mu < 0.0:
            a = -1.0 / mu
            if a < best:
                best = a
    return best


@njit(**_opts)
def nt_scaling(s, z, sdet, zdet, lidx, qs, qd):
    """Nesterov-Todd scaling: orthant factors, per-cone beta and v."""
    dl = np.empty(lidx.size)
    for k in range(lidx.size):
        i = lidx[k]
        dl[k] = np.sqrt(s[i] / z[i])
    beta = np.empty(qs.size)
    v = np.zeros(s.size)
    for b in range(qs.size):
        st, d = qs[b], qd[b]
        rs = np.sqrt(sdet[b])
        rz = np.sqrt(zdet[b])
        dot = 0.0
        for j in range(d):
            dot += s[st + j] * z[st + j]
        # s'z >= sqrt(det s det z) in exact arithmetic; clamp round-off
        gamma = np.sqrt((1.0 + max(dot / (rs * rz), 1.0)) / 2.0)
        w0 = (s[st] / rs + z[st] / rz) / (2.0 * gamma)
        nv = np.sqrt(2.0 * (w0 + 1.0))
        v[st] = (w0 + 1.0) / nv
        for j in range(1, d):
            v[st + j] = (s[st + j] / rs - z[st + j] / rz) / (2.0 * gamma) / nv
        beta[b] = np.sqrt(np.sqrt(sdet[b] / zdet[b]))
    return dl, beta, v


@njit(**_opts)
def apply_w(u, dl, beta, v, inverse, lidx, qs, qd):
    """W u (or W^{-1} u); W = beta (2 v v' - J) per cone, diag(dl) on the orthant."""
    out = np.empty_like(u)
    for k in range(lidx.size):
        i = lidx[k]
        out[i] = u[i] / dl[k] if inverse else u[i] * dl[k]
    for b in range(qs.size):
        s, d = qs[b], qd[b]
        sign = -1.0 if inverse else 1.0
        # inverse uses J v in place of v
        proj = v[s] * u[s]
        for j in range(1, d):
            proj += sign * v[s + j] * u[s + j]
        f = 1.0 / beta[b] if inverse else beta[b]
        out[s] = f * (2.0 * v[s] * proj - u[s])
        for j in range(1, d):
            out[s + j] = f * (2.0 * sign * v[s + j] * proj + u[s + j])
    return out


@njit(**_opts)
def apply_winv_rows(G, dl, beta, v, lidx, qs, qd):
    """W^{-1} G for a matrix with one row per slack coordinate."""
    m, n = G.shape
    out = np.empty_like(G)
    for k in range(lidx.size):
        i = lidx[k]
        inv = 1.0 / dl[k]
        for c in range(n):
            out[i, c] = G[i, c] * inv
    proj = np.empty(n)
    for b in range(qs.size):
        s, d = qs[b], qd[b]
        f = 1.0 / beta[b]
        for c in range(n):
            proj[c] = v[s] * G[s, c]
        for j in range(1, d):
            vj = -v[s + j]
            if vj != 0.0:
                for c in range(n):
                    proj[c] += vj * G[s + j, c]
        for c in range(n):
            out[s, c] = f * (2.0 * v[s] * proj[c] - G[s, c])
        for j in range(1, d):
            vj = -v[s + j]
            for c in range(n):
                out[s + j, c] = f * (2.0 * vj * proj[c] + G[s + j, c])
    return out
