# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels. Mirrors pyref.py operation-for-operation; see that
module for the semantics. Keep the arithmetic order in sync so the two
backends agree to the last ulp wherever no reduction is involved."""

import numpy as np

cimport numpy as cnp
from libc.math cimport erfc, exp, fabs, floor, sqrt

cnp.import_array()

NAME = "native"

cdef double SQRT3_2 = sqrt(3.0) / 2.0
cdef double SQRT2 = sqrt(2.0)
cdef double TWO_PI = 2.0 * np.pi


cdef inline double _ndtr(double x) nogil:
    return 0.5 * erfc(-x / SQRT2)


def rk4_advance(y, forces, coeff, double dt, int n_steps, bint attitude_only=False):
    cdef double m = coeff[0], length = coeff[1], iyy = coeff[2], izz = coeff[3]
    cdef double g = coeff[4], sin_a = coeff[5], cos_a = coeff[6]
    cdef double c1 = coeff[7], c2 = coeff[8], c3 = coeff[9], s1 = coeff[10]
    cdef double kdrag = coeff[11], vflow = coeff[12]
    cdef double f1 = forces[0], f2 = forces[1], f3 = forces[2]
    cdef double x = y[0], xd = y[1], phi = y[2], phid = y[3], psi = y[4], psid = y[5]

    cdef double phi_dd = SQRT3_2 * length * (f3 * c3 - f2 * c2) / iyy
    cdef double psi_dd = (length * (0.5 * f3 * c3 + SQRT3_2 * f2 * c2 - f1 * c1)
                          - m * g * cos_a * length * s1) / izz
    cdef double f_sum = f1 + f2 + f3
    cdef double axial_bias = f_sum - m * g * sin_a

    cdef double k1x, k1v, k2x, k2v, k3x, k3v, k4x, k4v
    cdef double p1x, p1v, p2x, p2v, p3x, p3v, p4x, p4v
    cdef double q1x, q1v, q2x, q2v, q3x, q3v, q4x, q4v
    cdef double rel, v2, v3, v4
    cdef int i

    for i in range(n_steps):
        if attitude_only:
            k1x = k1v = k2x = k2v = k3x = k3v = k4x = k4v = 0.0
        else:
            k1x = xd
            rel = xd - vflow
            k1v = (axial_bias - kdrag * rel * fabs(rel)) / m
            v2 = xd + 0.5 * dt * k1v
            k2x = v2
            rel = v2 - vflow
            k2v = (axial_bias - kdrag * rel * fabs(rel)) / m
            v3 = xd + 0.5 * dt * k2v
            k3x = v3
            rel = v3 - vflow
            k3v = (axial_bias - kdrag * rel * fabs(rel)) / m
            v4 = xd + dt * k3v
            k4x = v4
            rel = v4 - vflow
            k4v = (axial_bias - kdrag * rel * fabs(rel)) / m
        x = x + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        xd = xd + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)

        p1x = phid
        p1v = phi_dd
        p2x = phid + 0.5 * dt * p1v
        p2v = phi_dd
        p3x = phid + 0.5 * dt * p2v
        p3v = phi_dd
        p4x = phid + dt * p3v
        p4v = phi_dd
        phi = phi + (dt / 6.0) * (p1x + 2.0 * p2x + 2.0 * p3x + p4x)
        phid = phid + (dt / 6.0) * (p1v + 2.0 * p2v + 2.0 * p3v + p4v)

        q1x = psid
        q1v = psi_dd
        q2x = psid + 0.5 * dt * q1v
        q2v = psi_dd
        q3x = psid + 0.5 * dt * q2v
        q3v = psi_dd
        q4x = psid + dt * q3v
        q4v = psi_dd
        psi = psi + (dt / 6.0) * (q1x + 2.0 * q2x + 2.0 * q3x + q4x)
        psid = psid + (dt / 6.0) * (q1v + 2.0 * q2v + 2.0 * q3v + q4v)

    return (x, xd, phi, phid, psi, psid)


def shift_clamp(cnp.ndarray[cnp.float64_t, ndim=1] s, double delta,
                cnp.ndarray[cnp.float64_t, ndim=1] noise, double lo, double hi):
    cdef Py_ssize_t n = s.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double v
    for i in range(n):
        v = s[i] + (delta + noise[i])
        if v < lo:
            v = lo
        elif v > hi:
            v = hi
        out[i] = v
    return out


def ranges_to_next_feature(cnp.ndarray[cnp.float64_t, ndim=1] s,
                           cnp.ndarray[cnp.float64_t, ndim=1] bounds):
    cdef Py_ssize_t n = s.shape[0], nb = bounds.shape[0], i, lo, hi, mid
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double si, d
    for i in range(n):
        si = s[i]
        # first index with bounds[idx] > si (searchsorted side='right')
        lo = 0
        hi = nb
        while lo < hi:
            mid = (lo + hi) // 2
            if bounds[mid] <= si:
                lo = mid + 1
            else:
                hi = mid
        if lo < nb:
            d = bounds[lo] - si
            if d < 0.0:
                d = 0.0
            out[i] = d
        else:
            out[i] = 0.0
    return out


def sonar_likelihood(double z, bint saturated, bint floored,
                     cnp.ndarray[cnp.float64_t, ndim=1] expected,
                     double sigma, double p_out, double min_r, double max_r):
    cdef Py_ssize_t n = expected.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double inv_norm = 1.0 / (sigma * sqrt(TWO_PI))
    cdef double u_dens = p_out / (max_r - min_r)
    cdef double keep = 1.0 - p_out
    cdef double t
    if saturated:
        for i in range(n):
            out[i] = keep * _ndtr((expected[i] - max_r) / sigma)
    elif floored:
        for i in range(n):
            out[i] = keep * _ndtr((min_r - expected[i]) / sigma)
    else:
        for i in range(n):
            t = (z - expected[i]) / sigma
            out[i] = keep * (exp(-0.5 * t * t) * inv_norm) + u_dens
    return out


def weights_mul_norm(cnp.ndarray[cnp.float64_t, ndim=1] w,
                     cnp.ndarray[cnp.float64_t, ndim=1] lik):
    cdef Py_ssize_t n = w.shape[0], i
    cdef double eta = 0.0
    for i in range(n):
        w[i] = w[i] * lik[i]
        eta += w[i]
    if eta > 0.0 and eta == eta and eta != float("inf"):
        for i in range(n):
            w[i] = w[i] / eta
    return eta


def systematic_indices(cnp.ndarray[cnp.float64_t, ndim=1] w, Py_ssize_t n_out, double u0):
    cdef Py_ssize_t n = w.shape[0], i, j = 0
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cum = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.empty(n_out, dtype=np.int64)
    cdef double acc = 0.0, pos
    for i in range(n):
        acc += w[i]
        cum[i] = acc
    for i in range(n_out):
        pos = (u0 + i) / n_out
        while j < n and cum[j] <= pos:
            j += 1
        out[i] = j if j < n else n - 1
    return out


def occupied_bins(cnp.ndarray[cnp.float64_t, ndim=1] s,
                  cnp.ndarray[cnp.float64_t, ndim=1] w,
                  double w_min, double bin_w, double total):
    cdef Py_ssize_t n = s.shape[0], i
    cdef Py_ssize_t n_bins = <Py_ssize_t>(total / bin_w) + 2
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] seen = np.zeros(n_bins, dtype=np.uint8)
    cdef Py_ssize_t b, count = 0
    for i in range(n):
        if w[i] > w_min:
            b = <Py_ssize_t>floor(s[i] / bin_w)
            if b > n_bins - 1:
                b = n_bins - 1
            if not seen[b]:
                seen[b] = 1
                count += 1
    return count
