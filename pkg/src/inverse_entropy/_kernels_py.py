"""Vectorized numpy fallback for the hot membership kernels.

Selected by :mod:`inverse_entropy.backend` when the compiled extension is not
available (or when IEL_BACKEND=python).  Every function here mirrors the
arithmetic of the compiled core operation-for-operation (same accumulation
order, division instead of reciprocal multiplication) so that both backends
return identical depth arrays.

All ``*_inverse_depths`` functions answer, for a batch of sample points and
one anchor backward trajectory (row i = the point i steps back), the deepest
m such that the sample admits a backward branch staying eps-close to the
anchor for 0..m steps; -1 means the sample misses even the level-0 ball.
The ``*_forward_depths`` functions are the forward-orbit analogue.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"
_TWO_PI = 2.0 * math.pi


def _circ(a, b):
    d = np.abs(a - b)
    return np.minimum(d, 1.0 - d)


def _torus_dist(pts, ref, euclidean):
    # pts (M, d), ref (d,)
    if euclidean:
        acc = np.zeros(pts.shape[0])
        for k in range(pts.shape[1]):
            c = _circ(pts[:, k], ref[k])
            acc = acc + c * c
        return np.sqrt(acc)
    out = _circ(pts[:, 0], ref[0])
    for k in range(1, pts.shape[1]):
        out = np.maximum(out, _circ(pts[:, k], ref[k]))
    return out


def _matvec_rows(pts, mat):
    # row-wise mat @ p for every p in pts, accumulated column by column so the
    # float rounding matches a plain C loop over k.
    out = pts[:, 0:1] * mat[:, 0]
    for k in range(1, pts.shape[1]):
        out = out + pts[:, k : k + 1] * mat[:, k]
    return out


def toral_inverse_depths(ainv, cosets, anchor, pts, eps, euclidean):
    nmax = anchor.shape[0] - 1
    depths = np.full(pts.shape[0], -1, dtype=np.int32)
    alive = _torus_dist(pts, anchor[0], euclidean) < eps
    depths[alive] = 0
    idx = np.nonzero(alive)[0].astype(np.int64)
    cur = pts[idx]
    ncos = cosets.shape[0]
    for lev in range(1, nmax + 1):
        if idx.size == 0:
            break
        base = _matvec_rows(cur, ainv)
        cand = base[:, None, :] + cosets[None, :, :]
        cand = cand - np.floor(cand)
        flat = cand.reshape(-1, cand.shape[2])
        keep = _torus_dist(flat, anchor[lev], euclidean) < eps
        idx = np.repeat(idx, ncos)[keep]
        cur = flat[keep]
        depths[idx] = lev
    return depths


def circle_inverse_depths(degree, anchor, pts, eps):
    nmax = anchor.shape[0] - 1
    depths = np.full(pts.shape[0], -1, dtype=np.int32)
    alive = _circ(pts, anchor[0]) < eps
    depths[alive] = 0
    idx = np.nonzero(alive)[0].astype(np.int64)
    cur = pts[idx]
    js = np.arange(degree, dtype=float)
    for lev in range(1, nmax + 1):
        if idx.size == 0:
            break
        cand = (cur[:, None] + js[None, :]) / degree
        flat = cand.reshape(-1)
        keep = _circ(flat, anchor[lev]) < eps
        idx = np.repeat(idx, degree)[keep]
        cur = flat[keep]
        depths[idx] = lev
    return depths


def fatbaker_inverse_depths(beta, anchor, pts, eps):
    nmax = anchor.shape[0] - 1
    omb = 1.0 - beta
    depths = np.full(pts.shape[0], -1, dtype=np.int32)
    d0 = np.maximum(np.abs(pts[:, 0] - anchor[0, 0]), np.abs(pts[:, 1] - anchor[0, 1]))
    alive = d0 < eps
    depths[alive] = 0
    idx = np.nonzero(alive)[0].astype(np.int64)
    cur = pts[alive]
    for lev in range(1, nmax + 1):
        if idx.size == 0:
            break
        u = cur[:, 0]
        v = cur[:, 1]
        xp = (u - omb) / beta
        yp = (v + 1.0) / 2.0
        xm = (u + omb) / beta
        ym = (v - 1.0) / 2.0
        ok_p = (xp >= -1.0) & (xp <= 1.0)
        ok_m = (xm >= -1.0) & (xm <= 1.0) & (ym < 0.0)
        ax, ay = anchor[lev, 0], anchor[lev, 1]
        keep_p = ok_p & (np.maximum(np.abs(xp - ax), np.abs(yp - ay)) < eps)
        keep_m = ok_m & (np.maximum(np.abs(xm - ax), np.abs(ym - ay)) < eps)
        new_idx = np.concatenate([idx[keep_p], idx[keep_m]])
        new_cur = np.concatenate(
            [np.column_stack([xp[keep_p], yp[keep_p]]), np.column_stack([xm[keep_m], ym[keep_m]])]
        )
        idx, cur = new_idx, new_cur
        depths[idx] = lev
    return depths


def _trig_poly(coef_a, coef_b, x):
    acc = np.full_like(x, coef_a[0])
    for k in range(1, coef_a.shape[0]):
        t = (_TWO_PI * k) * x
        acc = acc + coef_a[k] * np.cos(t) + coef_b[k] * np.sin(t)
    return acc


def tsujii_inverse_depths(ell, lam, coef_a, coef_b, anchor, pts, eps):
    nmax = anchor.shape[0] - 1
    depths = np.full(pts.shape[0], -1, dtype=np.int32)
    d0 = np.maximum(_circ(pts[:, 0], anchor[0, 0]), np.abs(pts[:, 1] - anchor[0, 1]))
    alive = d0 < eps
    depths[alive] = 0
    idx = np.nonzero(alive)[0].astype(np.int64)
    cur = pts[alive]
    js = np.arange(ell, dtype=float)
    for lev in range(1, nmax + 1):
        if idx.size == 0:
            break
        xb = (cur[:, 0][:, None] + js[None, :]) / ell
        flat_x = xb.reshape(-1)
        yb = (np.repeat(cur[:, 1], ell) - _trig_poly(coef_a, coef_b, flat_x)) / lam
        ax, ay = anchor[lev, 0], anchor[lev, 1]
        keep = np.maximum(_circ(flat_x, ax), np.abs(yb - ay)) < eps
        idx = np.repeat(idx, ell)[keep]
        cur = np.column_stack([flat_x[keep], yb[keep]])
        depths[idx] = lev
    return depths


def toral_forward_depths(amat, orbit, pts, eps, euclidean):
    nmax = orbit.shape[0] - 1
    depths = np.full(pts.shape[0], -1, dtype=np.int32)
    idx = np.arange(pts.shape[0], dtype=np.int64)
    cur = pts.copy()
    for i in range(nmax + 1):
        keep = _torus_dist(cur, orbit[i], euclidean) < eps
        idx = idx[keep]
        if idx.size == 0:
            break
        depths[idx] = i
        if i < nmax:
            cur = _matvec_rows(cur[keep], amat)
            cur = cur - np.floor(cur)
    return depths


def circle_forward_depths(degree, orbit, pts, eps):
    nmax = orbit.shape[0] - 1
    depths = np.full(pts.shape[0], -1, dtype=np.int32)
    idx = np.arange(pts.shape[0], dtype=np.int64)
    cur = pts.copy()
    for i in range(nmax + 1):
        keep = _circ(cur, orbit[i]) < eps
        idx = idx[keep]
        if idx.size == 0:
            break
        depths[idx] = i
        if i < nmax:
            cur = cur[keep] * degree
            cur = cur - np.floor(cur)
    return depths


def fatbaker_forward_depths(beta, orbit, pts, eps):
    nmax = orbit.shape[0] - 1
    omb = 1.0 - beta
    depths = np.full(pts.shape[0], -1, dtype=np.int32)
    idx = np.arange(pts.shape[0], dtype=np.int64)
    cur = pts.copy()
    for i in range(nmax + 1):
        d = np.maximum(np.abs(cur[:, 0] - orbit[i, 0]), np.abs(cur[:, 1] - orbit[i, 1]))
        keep = d < eps
        idx = idx[keep]
        if idx.size == 0:
            break
        depths[idx] = i
        if i < nmax:
            cur = cur[keep]
            up = cur[:, 1] >= 0.0
            x = np.where(up, beta * cur[:, 0] + omb, beta * cur[:, 0] - omb)
            y = np.where(up, 2.0 * cur[:, 1] - 1.0, 2.0 * cur[:, 1] + 1.0)
            cur = np.column_stack([x, y])
    return depths


def tsujii_forward_depths(ell, lam, coef_a, coef_b, orbit, pts, eps):
    nmax = orbit.shape[0] - 1
    depths = np.full(pts.shape[0], -1, dtype=np.int32)
    idx = np.arange(pts.shape[0], dtype=np.int64)
    cur = pts.copy()
    for i in range(nmax + 1):
        d = np.maximum(_circ(cur[:, 0], orbit[i, 0]), np.abs(cur[:, 1] - orbit[i, 1]))
        keep = d < eps
        idx = idx[keep]
        if idx.size == 0:
            break
        depths[idx] = i
        if i < nmax:
            cur = cur[keep]
            x = cur[:, 0] * ell
            x = x - np.floor(x)
            y = lam * cur[:, 1] + _trig_poly(coef_a, coef_b, cur[:, 0])
            cur = np.column_stack([x, y])
    return depths
