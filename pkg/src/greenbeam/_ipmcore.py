"""Compiled interior-point iteration behind ``socp.solve_socp``.

Everything from the starting point to the termination test runs inside one
jitted call, so a solve costs a few dense factorisations and no Python
overhead per iteration.  Status codes match ``socp._STATUS_CODES``.
"""

import numpy as np
from numba import njit

from ._conekernels import apply_w, apply_winv_rows, dets, divide, max_step, min_eig, nt_scaling, product

_opts = dict(cache=True, nogil=True)
# reassociation lets the dot-product loops vectorise; NaN semantics are kept
_REASSOC = {"reassoc", "contract"}

OPTIMAL, PRIMAL_INFEASIBLE, DUAL_INFEASIBLE, MAX_ITERATIONS, NUMERICAL_FAILURE = range(5)

# factorisation modes
_CHOL, _EIG, _LU, _FAIL = range(4)
_EPS = np.finfo(np.float64).eps


@njit(**_opts)
def _norm(v):
    acc = 0.0
    for i in range(v.size):
        acc += v[i] * v[i]
    return np.sqrt(acc)


@njit(**_opts)
def _all_finite(v):
    for i in range(v.size):
        if not np.isfinite(v[i]):
            return False
    return True


@njit(fastmath=_REASSOC, **_opts)
def _cholesky(H):
    """Lower Cholesky factor; ok=False when H is not numerically positive definite."""
    n = H.shape[0]
    L = np.zeros_like(H)
    for j in range(n):
        d = H[j, j]
        for k in range(j):
            d -= L[j, k] * L[j, k]
        if not d > 0.0:
            return L, False
        ljj = np.sqrt(d)
        L[j, j] = ljj
        for i in range(j + 1, n):
            acc = H[i, j]
            for k in range(j):
                acc -= L[i, k] * L[j, k]
            L[i, j] = acc / ljj
    return L, True


@njit(fastmath=_REASSOC, **_opts)
def _chol_solve(L, r):
    n = r.size
    y = np.empty(n)
    for i in range(n):
        acc = r[i]
        for k in range(i):
            acc -= L[i, k] * y[k]
        y[i] = acc / L[i, i]
    x = np.empty(n)
    for i in range(n - 1, -1, -1):
        acc = y[i]
        for k in range(i + 1, n):
            acc -= L[k, i] * x[k]
        x[i] = acc / L[i, i]
    return x


@njit(**_opts)
def block_supports(G, lidx, qs, qd):
    """Row ranges of every cone block and the columns each block touches.

    Every orthant coordinate is its own block.  W^{-1} mixes rows only
    within a block, so ``W^{-1} G`` keeps these column supports.
    """
    nblk = lidx.size + qs.size
    r0 = np.empty(nblk, dtype=np.int64)
    r1 = np.empty(nblk, dtype=np.int64)
    for k in range(lidx.size):
        r0[k] = lidx[k]
        r1[k] = lidx[k] + 1
    for b in range(qs.size):
        r0[lidx.size + b] = qs[b]
        r1[lidx.size + b] = qs[b] + qd[b]
    n = G.shape[1]
    ptr = np.zeros(nblk + 1, dtype=np.int64)
    idx = np.empty(nblk * n, dtype=np.int64)
    for k in range(nblk):
        cnt = ptr[k]
        for col in range(n):
            for r in range(r0[k], r1[k]):
                if G[r, col] != 0.0:
                    idx[cnt] = col
                    cnt += 1
                    break
        ptr[k + 1] = cnt
    return r0, r1, ptr, idx[: ptr[nblk]].copy()


@njit(fastmath=_REASSOC, **_opts)
def _gram(Gs, r0, r1, ptr, idx):
    """``Gs' Gs`` summed block by block over each block's column support."""
    n = Gs.shape[1]
    H = np.zeros((n, n))
    for k in range(r0.size):
        cols = idx[ptr[k]: ptr[k + 1]]
        nc = cols.size
        for r in range(r0[k], r1[k]):
            row = Gs[r]
            for a in range(nc):
                ga = row[cols[a]]
                if ga == 0.0:
                    continue
                Ha = H[cols[a]]
                for b in range(a + 1):
                    Ha[cols[b]] += ga * row[cols[b]]
    # mirror; supports are sorted so the lower triangle was filled
    for i in range(n):
        for j in range(i):
            H[j, i] = H[i, j]
    return H


@njit(**_opts)
def _factor(G, A, dl, beta, v, reg, lidx, qs, qd, sup):
    """Return (mode, Gs, H, F, inv) for the reduced KKT system."""
    n = G.shape[1]
    p = A.shape[0]
    Gs = apply_winv_rows(G, dl, beta, v, lidx, qs, qd)
    H = _gram(Gs, sup[0], sup[1], sup[2], sup[3])
    inv = np.zeros(0)
    if not _all_finite(H.ravel()):
        return _FAIL, Gs, H, H, inv
    if p == 0:
        Hr = H.copy()
        for i in range(n):
            Hr[i, i] += reg
        L, ok = _cholesky(Hr)
        if ok:
            return _CHOL, Gs, H, L, inv
        # G without full column rank: fall back to a pseudo-inverse
        vals, vecs = np.linalg.eigh(H)
        cut = max(vals.max(), 1.0) * 1e-14
        inv = np.zeros(n)
        for i in range(n):
            if vals[i] > cut:
                inv[i] = 1.0 / vals[i]
        return _EIG, Gs, H, np.ascontiguousarray(vecs), inv
    K = np.zeros((n + p, n + p))
    K[:n, :n] = H
    for i in range(n):
        K[i, i] += reg
    K[:n, n:] = A.T
    K[n:, :n] = A
    for i in range(p):
        K[n + i, n + i] = -reg
    return _LU, Gs, H, K, inv


@njit(**_opts)
def _reduced(mode, F, inv, rx, ry):
    n = rx.size
    if mode == _CHOL:
        return _chol_solve(F, rx), np.zeros(0)
    if mode == _EIG:
        return F @ (inv * (F.T @ rx)), np.zeros(0)
    sol = np.linalg.solve(F, np.concatenate((rx, ry)))
    return sol[:n].copy(), sol[n:].copy()


@njit(**_opts)
def _kkt_solve(mode, Gs, H, F, inv, A, dl, beta, v, bx, by, bz, refine, lidx, qs, qd):
    """(ux, uy, uz) with A'uy + G'uz = bx, A ux = by, G ux - W'W uz = bz."""
    p = A.shape[0]
    wbz = apply_w(bz, dl, beta, v, True, lidx, qs, qd)
    rx = bx + Gs.T @ wbz
    ux, uy = _reduced(mode, F, inv, rx, by)
    for _ in range(refine):
        ex = rx - H @ ux
        if p > 0:
            ex = ex - A.T @ uy
            ey = by - A @ ux
        else:
            ey = by.copy()
        dx, dy = _reduced(mode, F, inv, ex, ey)
        ux = ux + dx
        uy = uy + dy
    uz = apply_w(Gs @ ux - wbz, dl, beta, v, True, lidx, qs, qd)
    return ux, uy, uz


@njit(**_opts)
def _step_length(lam, tau, kappa, dtau, dkappa, ds_scaled, dz_scaled, lidx, qs, qd):
    a = min(max_step(lam, ds_scaled, lidx, qs, qd), max_step(lam, dz_scaled, lidx, qs, qd))
    if dtau < 0:
        a = min(a, -tau / dtau)
    if dkappa < 0:
        a = min(a, -kappa / dkappa)
    return a


@njit(**_opts)
def _safe_dets(u, qs, qd):
    """Cone determinants floored at the round-off level of each block.

    A step of 0.99 of the exact ratio-test length stays interior; a
    nonpositive value here is cancellation, not a boundary crossing.
    """
    out = dets(u, qs, qd)
    for b in range(qs.size):
        floor = (_EPS * u[qs[b]]) ** 2
        if out[b] < floor and u[qs[b]] > 0.0:
            out[b] = floor
    return out


@njit(**_opts)
def _interior(s, z, sdet, zdet, lidx):
    for b in range(sdet.size):
        if not (sdet[b] > 0.0 and zdet[b] > 0.0):
            return False
    for i in lidx:
        if not (s[i] > 0.0 and z[i] > 0.0):
            return False
    return True


@njit(**_opts)
def _stopped(code, x, s, y, z, tau, it, primal, dual, gap, cert):
    # an early stop still reports infeasibility if a good enough ray was seen
    best_viol, best_y, best_z, best_scale, cert_tol, nc = cert
    if best_viol <= cert_tol:
        return (PRIMAL_INFEASIBLE, x, s, best_y, best_z, best_scale, it, primal, dual, gap,
                best_viol * nc)
    return code, x, s, y, z, tau, it, primal, dual, gap, np.nan


@njit(cache=True, nogil=True)
def ipm(c, G, h, A, b, lidx, qs, qd, degree, tol, max_iter, reg, step_fraction, refine,
        cert_tol):
    """Run the homogeneous self-dual iteration.

    Returns ``(status, x, s, y, z, tau_or_scale, iterations, primal, dual,
    gap, certificate_violation)``; vectors are unnormalised, the caller
    divides by ``tau_or_scale``.  A run that breaks down or runs out of
    iterations returns the best primal infeasibility ray it met if that
    ray's violation is at most ``cert_tol``.
    """
    n = c.size
    m = h.size
    e = np.zeros(m)
    for i in lidx:
        e[i] = 1.0
    for i in qs:
        e[i] = 1.0
    nb = max(1.0, _norm(b))
    nh = max(1.0, _norm(h))
    nc = max(1.0, _norm(c))
    nan = np.nan

    # identity scaling for the starting point
    one_dl = np.ones(lidx.size)
    one_beta = np.ones(qs.size)
    sup = block_supports(G, lidx, qs, qd)
    mode, Gs, H, F, inv = _factor(G, A, one_dl, one_beta, e, reg, lidx, qs, qd, sup)
    if mode == _FAIL:
        return (NUMERICAL_FAILURE, np.zeros(n), np.zeros(m), np.zeros(b.size), np.zeros(m),
                1.0, 0, nan, nan, nan, nan)
    x, y, uz = _kkt_solve(mode, Gs, H, F, inv, A, one_dl, one_beta, e,
                          np.zeros(n), b, h, refine, lidx, qs, qd)
    s = -uz
    _, y, z = _kkt_solve(mode, Gs, H, F, inv, A, one_dl, one_beta, e,
                         -c, np.zeros(b.size), np.zeros(m), refine, lidx, qs, qd)
    if not (_all_finite(x) and _all_finite(s) and _all_finite(z)):
        return (NUMERICAL_FAILURE, np.zeros(n), np.zeros(m), np.zeros(b.size), np.zeros(m),
                1.0, 0, nan, nan, nan, nan)
    for u in (s, z):
        lo = min_eig(u, lidx, qs, qd)
        if lo <= 1e-8 * max(1.0, _norm(u)):
            u += (1.0 - lo) * e
    tau = 1.0
    kappa = 1.0
    sdet = dets(s, qs, qd)
    zdet = dets(z, qs, qd)

    primal = dual = gap = np.inf
    best_viol = np.inf
    best_y = y.copy()
    best_z = z.copy()
    best_scale = 1.0
    for it in range(max_iter + 1):
        r_x = A.T @ y + G.T @ z + c * tau
        r_y = A @ x - b * tau
        r_z = G @ x + s - h * tau
        cx = c @ x
        by_hz = b @ y + h @ z
        r_t = kappa + cx + by_hz
        sz = s @ z

        pobj = cx / tau
        dobj = -by_hz / tau
        primal = max(_norm(r_y) / nb, _norm(r_z) / nh) / tau
        dual = _norm(r_x) / nc / tau
        gap = max(sz / tau ** 2, abs(pobj - dobj)) / max(1.0, abs(pobj))
        if max(primal, dual, gap) <= tol:
            return OPTIMAL, x, s, y, z, tau, it, primal, dual, gap, nan
        if by_hz < 0:
            viol = _norm(A.T @ y + G.T @ z) / nc / -by_hz
            if viol <= tol:
                return (PRIMAL_INFEASIBLE, x, s, y, z, -by_hz, it, primal, dual, gap,
                        viol * nc)
            if viol < best_viol:
                best_viol = viol
                best_y = y.copy()
                best_z = z.copy()
                best_scale = -by_hz
        if cx < 0:
            viol = max(_norm(A @ x) / nb, _norm(G @ x + s) / nh) / -cx
            if viol <= tol:
                return (DUAL_INFEASIBLE, x, s, y, z, -cx, it, primal, dual, gap,
                        max(_norm(A @ x), _norm(G @ x + s)) / -cx)
        if it == max_iter:
            break

        if not _interior(s, z, sdet, zdet, lidx):
            return _stopped(NUMERICAL_FAILURE, x, s, y, z, tau, it, primal, dual, gap,
                            (best_viol, best_y, best_z, best_scale, cert_tol, nc))
        dl, beta, v = nt_scaling(s, z, sdet, zdet, lidx, qs, qd)
        lam = apply_w(z, dl, beta, v, False, lidx, qs, qd)
        mode, Gs, H, F, inv = _factor(G, A, dl, beta, v, reg, lidx, qs, qd, sup)
        if mode == _FAIL:
            return _stopped(NUMERICAL_FAILURE, x, s, y, z, tau, it, primal, dual, gap,
                            (best_viol, best_y, best_z, best_scale, cert_tol, nc))
        x1, y1, z1 = _kkt_solve(mode, Gs, H, F, inv, A, dl, beta, v, -c, b, h, refine, lidx, qs, qd)
        denom = c @ x1 + b @ y1 + h @ z1 - kappa / tau
        mu = (sz + tau * kappa) / (degree + 1)
        lamlam = product(lam, lam, lidx, qs, qd)

        # predictor (sigma = 0), then corrector
        sigma = 0.0
        bs = -lamlam
        bk = -tau * kappa
        dx = x1
        dy = y1
        dz = z1
        ds = r_z
        dtau = dkappa = 0.0
        ds_scaled = dz_scaled = lam
        a = 0.0
        for phase in range(2):
            eta = 1.0 - sigma
            rhs_z = -eta * r_z - apply_w(divide(lam, bs, lidx, qs, qd), dl, beta, v, False, lidx, qs, qd)
            x2, y2, z2 = _kkt_solve(mode, Gs, H, F, inv, A, dl, beta, v,
                                    -eta * r_x, -eta * r_y, rhs_z, refine, lidx, qs, qd)
            dtau = (-eta * r_t - bk / tau - (c @ x2 + b @ y2 + h @ z2)) / denom
            dx = x2 + dtau * x1
            dy = y2 + dtau * y1
            dz = z2 + dtau * z1
            # ds and dkappa from the linear equations keep the residual
            # update exact; the complementarity rows hold up to round-off
            ds = -eta * r_z - G @ dx + h * dtau
            dkappa = -eta * r_t - (c @ dx + b @ dy + h @ dz)
            ds_scaled = apply_w(ds, dl, beta, v, True, lidx, qs, qd)
            dz_scaled = apply_w(dz, dl, beta, v, False, lidx, qs, qd)
            a = _step_length(lam, tau, kappa, dtau, dkappa, ds_scaled, dz_scaled, lidx, qs, qd)
            if phase == 0:
                sigma = (1.0 - min(1.0, a)) ** 3
                bs = -lamlam - product(ds_scaled, dz_scaled, lidx, qs, qd) + sigma * mu * e
                bk = -tau * kappa - dtau * dkappa + sigma * mu
        a = min(1.0, step_fraction * a)
        if not np.isfinite(a) or a < 1e-12:
            return _stopped(NUMERICAL_FAILURE, x, s, y, z, tau, it, primal, dual, gap,
                            (best_viol, best_y, best_z, best_scale, cert_tol, nc))

        x = x + a * dx
        y = y + a * dy
        s_scaled = lam + a * ds_scaled
        z_scaled = lam + a * dz_scaled
        # determinants from the well-centred scaled space avoid the
        # cancellation in u0^2 - ||u1||^2 near the boundary
        b2 = beta ** 2
        sdet = _safe_dets(s_scaled, qs, qd) * b2
        zdet = _safe_dets(z_scaled, qs, qd) / b2
        z = z + a * dz
        s = s + a * ds
        # orthant coordinates from the scaled form keep full relative accuracy
        for k in range(lidx.size):
            i = lidx[k]
            s[i] = dl[k] * s_scaled[i]
            z[i] = z_scaled[i] / dl[k]
        tau = tau + a * dtau
        kappa = kappa + a * dkappa
        if not (_all_finite(x) and np.isfinite(tau)) or tau <= 0 or kappa <= 0:
            return _stopped(NUMERICAL_FAILURE, x, s, y, z, tau, it, primal, dual, gap,
                            (best_viol, best_y, best_z, best_scale, cert_tol, nc))

    return _stopped(MAX_ITERATIONS, x, s, y, z, tau, max_iter, primal, dual, gap,
                    (best_viol, best_y, best_z, best_scale, cert_tol, nc))
