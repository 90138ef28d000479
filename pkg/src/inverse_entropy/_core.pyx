# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled membership kernels (hot path of the Monte-Carlo estimators).

Arithmetic mirrors inverse_entropy._kernels_py operation-for-operation; the
extension is built with -ffp-contract=off so both backends produce identical
depth arrays (up to libm-vs-numpy trig rounding for the Tsujii family).
All kernels release the GIL, so chunked calls scale across threads.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, floor, sin, sqrt

cnp.import_array()

cdef int MAXDIM = 8
cdef int STACKCAP = 4096

cdef double TWO_PI = 6.283185307179586476925287


cdef inline double _circ(double a, double b) nogil:
    cdef double d = a - b
    if d < 0.0:
        d = -d
    cdef double alt = 1.0 - d
    if d < alt:
        return d
    return alt


cdef inline double _torus_dist(double* p, const double* ref, int d, bint euclidean) nogil:
    cdef double acc, c
    cdef int k
    if euclidean:
        acc = 0.0
        for k in range(d):
            c = _circ(p[k], ref[k])
            acc = acc + c * c
        return sqrt(acc)
    acc = _circ(p[0], ref[0])
    for k in range(1, d):
        c = _circ(p[k], ref[k])
        if c > acc:
            acc = c
    return acc


def toral_inverse_depths(double[:, ::1] ainv, double[:, ::1] cosets,
                         double[:, ::1] anchor, double[:, ::1] pts,
                         double eps, bint euclidean):
    cdef Py_ssize_t n_samples = pts.shape[0]
    cdef int d = <int> pts.shape[1]
    cdef int nmax = <int> anchor.shape[0] - 1
    cdef int ncos = <int> cosets.shape[0]
    if d > MAXDIM:
        raise ValueError("dimension above 8")
    out = np.empty(n_samples, dtype=np.int32)
    cdef int[::1] depths = out
    scratch = np.empty((STACKCAP, d), dtype=np.float64)
    lscratch = np.empty(STACKCAP, dtype=np.int32)
    cdef double[:, ::1] stack_p = scratch
    cdef int[::1] stack_l = lscratch
    cdef Py_ssize_t s
    cdef int top, lev, child_lev, best, j, k, c, overflow = 0
    cdef double p[8]
    cdef double base[8]
    cdef double child[8]
    cdef double acc, w, dist
    with nogil:
        for s in range(n_samples):
            for j in range(d):
                p[j] = pts[s, j]
            dist = _torus_dist(p, &anchor[0, 0], d, euclidean)
            if not dist < eps:
                depths[s] = -1
                continue
            best = 0
            if nmax == 0:
                depths[s] = 0
                continue
            for j in range(d):
                stack_p[0, j] = p[j]
            stack_l[0] = 0
            top = 1
            while top > 0:
                top = top - 1
                lev = stack_l[top]
                for j in range(d):
                    p[j] = stack_p[top, j]
                child_lev = lev + 1
                for j in range(d):
                    acc = 0.0
                    for k in range(d):
                        acc = acc + ainv[j, k] * p[k]
                    base[j] = acc
                for c in range(ncos):
                    for j in range(d):
                        w = base[j] + cosets[c, j]
                        w = w - floor(w)
                        child[j] = w
                    dist = _torus_dist(child, &anchor[child_lev, 0], d, euclidean)
                    if dist < eps:
                        if child_lev > best:
                            best = child_lev
                        if best == nmax:
                            top = 0
                            break
                        if top >= STACKCAP:
                            overflow = 1
                            top = 0
                            break
                        for j in range(d):
                            stack_p[top, j] = child[j]
                        stack_l[top] = child_lev
                        top = top + 1
                if overflow or best == nmax:
                    break
            depths[s] = best
            if overflow:
                break
    if overflow:
        raise RuntimeError("inverse-ball search exceeded the branch stack; eps too large")
    return out


def circle_inverse_depths(int degree, double[::1] anchor, double[::1] pts, double eps):
    cdef Py_ssize_t n_samples = pts.shape[0]
    cdef int nmax = <int> anchor.shape[0] - 1
    out = np.empty(n_samples, dtype=np.int32)
    cdef int[::1] depths = out
    scratch = np.empty(STACKCAP, dtype=np.float64)
    lscratch = np.empty(STACKCAP, dtype=np.int32)
    cdef double[::1] stack_p = scratch
    cdef int[::1] stack_l = lscratch
    cdef Py_ssize_t s
    cdef int top, lev, child_lev, best, j, overflow = 0
    cdef double p, child, dist
    with nogil:
        for s in range(n_samples):
            p = pts[s]
            if not _circ(p, anchor[0]) < eps:
                depths[s] = -1
                continue
            best = 0
            if nmax == 0:
                depths[s] = 0
                continue
            stack_p[0] = p
            stack_l[0] = 0
            top = 1
            while top > 0:
                top = top - 1
                lev = stack_l[top]
                p = stack_p[top]
                child_lev = lev + 1
                for j in range(degree):
                    child = (p + j) / degree
                    dist = _circ(child, anchor[child_lev])
                    if dist < eps:
                        if child_lev > best:
                            best = child_lev
                        if best == nmax:
                            top = 0
                            break
                        if top >= STACKCAP:
                            overflow = 1
                            top = 0
                            break
                        stack_p[top] = child
                        stack_l[top] = child_lev
                        top = top + 1
                if overflow or best == nmax:
                    break
            depths[s] = best
            if overflow:
                break
    if overflow:
        raise RuntimeError("inverse-ball search exceeded the branch stack; eps too large")
    return out


def fatbaker_inverse_depths(double beta, double[:, ::1] anchor, double[:, ::1] pts, double eps):
    cdef Py_ssize_t n_samples = pts.shape[0]
    cdef int nmax = <int> anchor.shape[0] - 1
    cdef double omb = 1.0 - beta
    out = np.empty(n_samples, dtype=np.int32)
    cdef int[::1] depths = out
    scratch = np.empty((STACKCAP, 2), dtype=np.float64)
    lscratch = np.empty(STACKCAP, dtype=np.int32)
    cdef double[:, ::1] stack_p = scratch
    cdef int[::1] stack_l = lscratch
    cdef Py_ssize_t s
    cdef int top, lev, child_lev, best, br, overflow = 0
    cdef double u, v, cx, cy, dx, dy, dist
    cdef bint ok
    with nogil:
        for s in range(n_samples):
            u = pts[s, 0]
            v = pts[s, 1]
            dx = u - anchor[0, 0]
            if dx < 0.0:
                dx = -dx
            dy = v - anchor[0, 1]
            if dy < 0.0:
                dy = -dy
            dist = dx if dx > dy else dy
            if not dist < eps:
                depths[s] = -1
                continue
            best = 0
            if nmax == 0:
                depths[s] = 0
                continue
            stack_p[0, 0] = u
            stack_p[0, 1] = v
            stack_l[0] = 0
            top = 1
            while top > 0:
                top = top - 1
                lev = stack_l[top]
                u = stack_p[top, 0]
                v = stack_p[top, 1]
                child_lev = lev + 1
                for br in range(2):
                    if br == 0:
                        cx = (u - omb) / beta
                        cy = (v + 1.0) / 2.0
                        ok = cx >= -1.0 and cx <= 1.0
                    else:
                        cx = (u + omb) / beta
                        cy = (v - 1.0) / 2.0
                        ok = cx >= -1.0 and cx <= 1.0 and cy < 0.0
                    if not ok:
                        continue
                    dx = cx - anchor[child_lev, 0]
                    if dx < 0.0:
                        dx = -dx
                    dy = cy - anchor[child_lev, 1]
                    if dy < 0.0:
                        dy = -dy
                    dist = dx if dx > dy else dy
                    if dist < eps:
                        if child_lev > best:
                            best = child_lev
                        if best == nmax:
                            top = 0
                            break
                        if top >= STACKCAP:
                            overflow = 1
                            top = 0
                            break
                        stack_p[top, 0] = cx
                        stack_p[top, 1] = cy
                        stack_l[top] = child_lev
                        top = top + 1
                if overflow or best == nmax:
                    break
            depths[s] = best
            if overflow:
                break
    if overflow:
        raise RuntimeError("inverse-ball search exceeded the branch stack; eps too large")
    return out


cdef inline double _trig_poly(const double* ca, const double* cb, int nk, double x) nogil:
    cdef double acc = ca[0]
    cdef double t
    cdef int k
    for k in range(1, nk):
        t = (TWO_PI * k) * x
        acc = acc + ca[k] * cos(t) + cb[k] * sin(t)
    return acc


def tsujii_inverse_depths(int ell, double lam, double[::1] coef_a, double[::1] coef_b,
                          double[:, ::1] anchor, double[:, ::1] pts, double eps):
    cdef Py_ssize_t n_samples = pts.shape[0]
    cdef int nmax = <int> anchor.shape[0] - 1
    cdef int nk = <int> coef_a.shape[0]
    out = np.empty(n_samples, dtype=np.int32)
    cdef int[::1] depths = out
    scratch = np.empty((STACKCAP, 2), dtype=np.float64)
    lscratch = np.empty(STACKCAP, dtype=np.int32)
    cdef double[:, ::1] stack_p = scratch
    cdef int[::1] stack_l = lscratch
    cdef Py_ssize_t s
    cdef int top, lev, child_lev, best, j, overflow = 0
    cdef double u, v, cx, cy, dx, dy, dist
    with nogil:
        for s in range(n_samples):
            u = pts[s, 0]
            v = pts[s, 1]
            dx = _circ(u, anchor[0, 0])
            dy = v - anchor[0, 1]
            if dy < 0.0:
                dy = -dy
            dist = dx if dx > dy else dy
            if not dist < eps:
                depths[s] = -1
                continue
            best = 0
            if nmax == 0:
                depths[s] = 0
                continue
            stack_p[0, 0] = u
            stack_p[0, 1] = v
            stack_l[0] = 0
            top = 1
            while top > 0:
                top = top - 1
                lev = stack_l[top]
                u = stack_p[top, 0]
                v = stack_p[top, 1]
                child_lev = lev + 1
                for j in range(ell):
                    cx = (u + j) / ell
                    cy = (v - _trig_poly(&coef_a[0], &coef_b[0], nk, cx)) / lam
                    dx = _circ(cx, anchor[child_lev, 0])
                    dy = cy - anchor[child_lev, 1]
                    if dy < 0.0:
                        dy = -dy
                    dist = dx if dx > dy else dy
                    if dist < eps:
                        if child_lev > best:
                            best = child_lev
                        if best == nmax:
                            top = 0
                            break
                        if top >= STACKCAP:
                            overflow = 1
                            top = 0
                            break
                        stack_p[top, 0] = cx
                        stack_p[top, 1] = cy
                        stack_l[top] = child_lev
                        top = top + 1
                if overflow or best == nmax:
                    break
            depths[s] = best
            if overflow:
                break
    if overflow:
        raise RuntimeError("inverse-ball search exceeded the branch stack; eps too large")
    return out


def toral_forward_depths(double[:, ::1] amat, double[:, ::1] orbit,
                         double[:, ::1] pts, double eps, bint euclidean):
    cdef Py_ssize_t n_samples = pts.shape[0]
    cdef int d = <int> pts.shape[1]
    cdef int nmax = <int> orbit.shape[0] - 1
    if d > MAXDIM:
        raise ValueError("dimension above 8")
    out = np.empty(n_samples, dtype=np.int32)
    cdef int[::1] depths = out
    cdef Py_ssize_t s
    cdef int i, j, k, reached
    cdef double p[8]
    cdef double nxt[8]
    cdef double acc, w
    with nogil:
        for s in range(n_samples):
            for j in range(d):
                p[j] = pts[s, j]
            reached = -1
            for i in range(nmax + 1):
                if not _torus_dist(p, &orbit[i, 0], d, euclidean) < eps:
                    break
                reached = i
                if i < nmax:
                    for j in range(d):
                        acc = 0.0
                        for k in range(d):
                            acc = acc + amat[j, k] * p[k]
                        w = acc - floor(acc)
                        nxt[j] = w
                    for j in range(d):
                        p[j] = nxt[j]
            depths[s] = reached
    return out


def circle_forward_depths(int degree, double[::1] orbit, double[::1] pts, double eps):
    cdef Py_ssize_t n_samples = pts.shape[0]
    cdef int nmax = <int> orbit.shape[0] - 1
    out = np.empty(n_samples, dtype=np.int32)
    cdef int[::1] depths = out
    cdef Py_ssize_t s
    cdef int i, reached
    cdef double p
    with nogil:
        for s in range(n_samples):
            p = pts[s]
            reached = -1
            for i in range(nmax + 1):
                if not _circ(p, orbit[i]) < eps:
                    break
                reached = i
                if i < nmax:
                    p = p * degree
                    p = p - floor(p)
            depths[s] = reached
    return out


def fatbaker_forward_depths(double beta, double[:, ::1] orbit, double[:, ::1] pts, double eps):
    cdef Py_ssize_t n_samples = pts.shape[0]
    cdef int nmax = <int> orbit.shape[0] - 1
    cdef double omb = 1.0 - beta
    out = np.empty(n_samples, dtype=np.int32)
    cdef int[::1] depths = out
    cdef Py_ssize_t s
    cdef int i, reached
    cdef double u, v, dx, dy, x, y
    with nogil:
        for s in range(n_samples):
            u = pts[s, 0]
            v = pts[s, 1]
            reached = -1
            for i in range(nmax + 1):
                dx = u - orbit[i, 0]
                if dx < 0.0:
                    dx = -dx
                dy = v - orbit[i, 1]
                if dy < 0.0:
                    dy = -dy
                if not (dx if dx > dy else dy) < eps:
                    break
                reached = i
                if i < nmax:
                    if v >= 0.0:
                        x = beta * u + omb
                        y = 2.0 * v - 1.0
                    else:
                        x = beta * u - omb
                        y = 2.0 * v + 1.0
                    u = x
                    v = y
            depths[s] = reached
    return out


def tsujii_forward_depths(int ell, double lam, double[::1] coef_a, double[::1] coef_b,
                          double[:, ::1] orbit, double[:, ::1] pts, double eps):
    cdef Py_ssize_t n_samples = pts.shape[0]
    cdef int nmax = <int> orbit.shape[0] - 1
    cdef int nk = <int> coef_a.shape[0]
    out = np.empty(n_samples, dtype=np.int32)
    cdef int[::1] depths = out
    cdef Py_ssize_t s
    cdef int i, reached
    cdef double u, v, dx, dy, x, y
    with nogil:
        for s in range(n_samples):
            u = pts[s, 0]
            v = pts[s, 1]
            reached = -1
            for i in range(nmax + 1):
                dx = _circ(u, orbit[i, 0])
                dy = v - orbit[i, 1]
                if dy < 0.0:
                    dy = -dy
                if not (dx if dx > dy else dy) < eps:
                    break
                reached = i
                if i < nmax:
                    x = u * ell
                    x = x - floor(x)
                    y = lam * v + _trig_poly(&coef_a[0], &coef_b[0], nk, u)
                    u = x
                    v = y
            depths[s] = reached
    return out
