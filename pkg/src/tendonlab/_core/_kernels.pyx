# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled simulation kernels.

Mirrors `_fallback.py` expression for expression (same packed parameter
layout, same arithmetic order); compiled with -ffp-contract=off so both
backends produce bit-identical trajectories.
"""

from libc.math cimport cos, exp, fabs, isfinite, sin, sqrt, tanh

cdef double FV_PLATEAU_Y = -1.0 / 11.0
cdef double DAMP_RAMP = 1e-3
cdef double V_REG = 1e-2
cdef double DIVERGENCE_BOUND = 1e3


cdef inline double clamp01(double a) nogil:
    if a < 0.0:
        return 0.0
    if a > 1.0:
        return 1.0
    return a


cdef inline double tension(double a, double l, double ld, double f_max,
                           double l_opt, double l_rest, double k, double b,
                           double v_max) nogil:
    cdef double x = (l / l_opt - 1.0) / 0.45
    cdef double fl = exp(-x * x)
    cdef double y = -ld / v_max
    cdef double fv
    if y <= FV_PLATEAU_Y:
        fv = 1.5
    elif y >= 1.0:
        fv = 0.0
    else:
        fv = (1.0 - y) / (1.0 + 3.0 * y)
    cdef double t = a * f_max * fl * fv
    cdef double stretch = l - l_rest
    cdef double ramp
    if stretch > 0.0:
        ramp = stretch / DAMP_RAMP
        if ramp > 1.0:
            ramp = 1.0
        t += k * stretch + b * ld * ramp
    if t < 0.0:
        return 0.0
    return t


cdef inline void muscle_torques(double q1, double q2, double qd1, double qd2,
                                double a1, double a2, double a3,
                                const double[::1] p,
                                double* tau1, double* tau2) nogil:
    cdef double acts[3]
    acts[0] = a1
    acts[1] = a2
    acts[2] = a3
    cdef double t1 = 0.0
    cdef double t2 = 0.0
    cdef int i, o
    cdef double r1, r2, l, ld, t
    for i in range(3):
        o = 15 + 8 * i
        r1 = p[o + 6]
        r2 = p[o + 7]
        l = p[o + 1] - (r1 * q1 + r2 * q2)
        ld = -(r1 * qd1 + r2 * qd2)
        t = tension(clamp01(acts[i]), l, ld,
                    p[o], p[o + 1], p[o + 2], p[o + 3], p[o + 4], p[o + 5])
        t1 += r1 * t
        t2 += r2 * t
    tau1[0] = t1
    tau2[0] = t2


cdef inline void limb_acc(double q1, double q2, double qd1, double qd2,
                          double tau1, double tau2, const double[::1] p,
                          double* qdd1, double* qdd2) nogil:
    cdef double m1 = p[2]
    cdef double m2 = p[3]
    cdef double lc1 = p[4]
    cdef double lc2 = p[5]
    cdef double L1 = p[0]
    cdef double s1 = sin(q1)
    cdef double s2 = sin(q2)
    cdef double c2 = cos(q2)
    cdef double s12 = sin(q1 + q2)
    cdef double M11 = m1 * lc1 * lc1 + p[6] + m2 * (L1 * L1 + lc2 * lc2 + 2.0 * L1 * lc2 * c2) + p[7]
    cdef double M12 = m2 * (lc2 * lc2 + L1 * lc2 * c2) + p[7]
    cdef double M22 = m2 * lc2 * lc2 + p[7]
    cdef double hh = m2 * L1 * lc2 * s2
    cdef double g = p[14]
    cdef double G1 = g * (m1 * lc1 * s1 + m2 * (L1 * s1 + lc2 * s12))
    cdef double G2 = g * m2 * lc2 * s12
    cdef double b1 = tau1 + hh * qd2 * (2.0 * qd1 + qd2) - G1 - p[8] * qd1
    cdef double b2 = tau2 - hh * qd1 * qd1 - G2 - p[9] * qd2
    cdef double det = M11 * M22 - M12 * M12
    qdd1[0] = (M22 * b1 - M12 * b2) / det
    qdd2[0] = (M11 * b2 - M12 * b1) / det


def limb_rollout(double q1, double q2, double qd1, double qd2,
                 const double[:, ::1] act, int n_sub, double h,
                 const double[::1] p, double[:, ::1] out):
    """See _fallback.limb_rollout."""
    cdef Py_ssize_t T = act.shape[0]
    cdef double qlo1 = p[10]
    cdef double qhi1 = p[11]
    cdef double qlo2 = p[12]
    cdef double qhi2 = p[13]
    cdef double qdd1 = 0.0
    cdef double qdd2 = 0.0
    cdef double a1, a2, a3, tau1, tau2
    cdef Py_ssize_t t
    cdef int s
    cdef Py_ssize_t bad = -1
    cdef bint blown = False
    with nogil:
        for t in range(T):
            a1 = act[t, 0]
            a2 = act[t, 1]
            a3 = act[t, 2]
            for s in range(n_sub):
                muscle_torques(q1, q2, qd1, qd2, a1, a2, a3, p, &tau1, &tau2)
                limb_acc(q1, q2, qd1, qd2, tau1, tau2, p, &qdd1, &qdd2)
                qd1 += h * qdd1
                qd2 += h * qdd2
                # blow-up check on the raw velocity, before limit clamping
                # can mask it
                if not (fabs(qd1) <= DIVERGENCE_BOUND and fabs(qd2) <= DIVERGENCE_BOUND):
                    blown = True
                q1 += h * qd1
                q2 += h * qd2
                if q1 < qlo1:
                    q1 = qlo1
                    if qd1 < 0.0:
                        qd1 = 0.0
                elif q1 > qhi1:
                    q1 = qhi1
                    if qd1 > 0.0:
                        qd1 = 0.0
                if q2 < qlo2:
                    q2 = qlo2
                    if qd2 < 0.0:
                        qd2 = 0.0
                elif q2 > qhi2:
                    q2 = qhi2
                    if qd2 > 0.0:
                        qd2 = 0.0
            out[t, 0] = q1
            out[t, 1] = q2
            out[t, 2] = qd1
            out[t, 3] = qd2
            out[t, 4] = qdd1
            out[t, 5] = qdd2
            if blown or not (isfinite(q1) and isfinite(q2) and isfinite(qd1) and isfinite(qd2)
                             and fabs(qd1) <= DIVERGENCE_BOUND and fabs(qd2) <= DIVERGENCE_BOUND):
                bad = t
                break
    return bad, q1, q2, qd1, qd2


def scene_rollout(double x, double y, double vx, double vy,
                  double q1, double q2, double qd1, double qd2,
                  const double[:, ::1] act, int n_sub, double h,
                  const double[::1] p, const double[::1] sc,
                  double[:, ::1] out):
    """See _fallback.scene_rollout."""
    cdef Py_ssize_t T = act.shape[0]
    cdef double L1 = p[0]
    cdef double L2 = p[1]
    cdef double m1 = p[2]
    cdef double m2 = p[3]
    cdef double lc1 = p[4]
    cdef double lc2 = p[5]
    cdef double qlo1 = p[10]
    cdef double qhi1 = p[11]
    cdef double qlo2 = p[12]
    cdef double qhi2 = p[13]
    cdef double g = p[14]
    cdef double mc = sc[0]
    cdef double mt = mc + m1 + m2
    cdef double qdd1 = 0.0
    cdef double qdd2 = 0.0
    cdef double fn = 0.0
    cdef double ft = 0.0
    cdef double a1, a2, a3, tau1, tau2
    cdef double s1, c1, s2, c2, s12, c12, w
    cdef double foot_y, foot_vx, foot_vy, pen
    cdef double Qx, Qy, Qq1, Qq2
    cdef double M13, M14, M23, M24, M33, M34, M44
    cdef double hh, w2, qd1sq, hx, hy, hq1, hq2, Gy, Gq1, Gq2
    cdef double b1, b2, b3, b4
    cdef double l11, l31, l41, l22, l32, l42, l33, l43, l44
    cdef double z1, z2, z3, z4, ay1, ay2, ay3, ay4
    cdef Py_ssize_t t
    cdef int s
    cdef Py_ssize_t bad = -1
    cdef bint ok
    cdef bint blown = False
    with nogil:
        for t in range(T):
            a1 = act[t, 0]
            a2 = act[t, 1]
            a3 = act[t, 2]
            for s in range(n_sub):
                muscle_torques(q1, q2, qd1, qd2, a1, a2, a3, p, &tau1, &tau2)

                s1 = sin(q1)
                c1 = cos(q1)
                s2 = sin(q2)
                c2 = cos(q2)
                s12 = sin(q1 + q2)
                c12 = cos(q1 + q2)
                w = qd1 + qd2

                foot_y = y - L1 * c1 - L2 * c12
                foot_vx = vx + L1 * c1 * qd1 + L2 * c12 * w
                foot_vy = vy + L1 * s1 * qd1 + L2 * s12 * w
                pen = sc[9] - foot_y
                if pen > 0.0:
                    fn = sc[6] * pen - sc[7] * foot_vy
                    if fn < 0.0:
                        fn = 0.0
                    ft = -sc[8] * fn * tanh(foot_vx / V_REG)
                else:
                    fn = 0.0
                    ft = 0.0

                Qx = -sc[1] * vx - sc[2] * tanh(vx / V_REG) + ft
                Qy = sc[3] * (sc[5] - y) - sc[4] * vy + fn
                Qq1 = tau1 - p[8] * qd1 + (L1 * c1 + L2 * c12) * ft + (L1 * s1 + L2 * s12) * fn
                Qq2 = tau2 - p[9] * qd2 + L2 * c12 * ft + L2 * s12 * fn

                M13 = m1 * lc1 * c1 + m2 * (L1 * c1 + lc2 * c12)
                M14 = m2 * lc2 * c12
                M23 = m1 * lc1 * s1 + m2 * (L1 * s1 + lc2 * s12)
                M24 = m2 * lc2 * s12
                M33 = m1 * lc1 * lc1 + p[6] + m2 * (L1 * L1 + lc2 * lc2 + 2.0 * L1 * lc2 * c2) + p[7]
                M34 = m2 * (lc2 * lc2 + L1 * lc2 * c2) + p[7]
                M44 = m2 * lc2 * lc2 + p[7]

                hh = m2 * L1 * lc2 * s2
                w2 = w * w
                qd1sq = qd1 * qd1
                hx = -(m1 * lc1 + m2 * L1) * s1 * qd1sq - m2 * lc2 * s12 * w2
                hy = (m1 * lc1 + m2 * L1) * c1 * qd1sq + m2 * lc2 * c12 * w2
                hq1 = -hh * qd2 * (2.0 * qd1 + qd2)
                hq2 = hh * qd1sq
                Gy = mt * g
                Gq1 = g * M23
                Gq2 = g * M24

                b1 = Qx - hx
                b2 = Qy - hy - Gy
                b3 = Qq1 - hq1 - Gq1
                b4 = Qq2 - hq2 - Gq2

                l11 = sqrt(mt)
                l31 = M13 / l11
                l41 = M14 / l11
                l22 = l11
                l32 = M23 / l22
                l42 = M24 / l22
                l33 = sqrt(M33 - l31 * l31 - l32 * l32)
                l43 = (M34 - l41 * l31 - l42 * l32) / l33
                l44 = sqrt(M44 - l41 * l41 - l42 * l42 - l43 * l43)
                z1 = b1 / l11
                z2 = b2 / l22
                z3 = (b3 - l31 * z1 - l32 * z2) / l33
                z4 = (b4 - l41 * z1 - l42 * z2 - l43 * z3) / l44
                ay4 = z4 / l44
                ay3 = (z3 - l43 * ay4) / l33
                ay2 = (z2 - l32 * ay3 - l42 * ay4) / l22
                ay1 = (z1 - l31 * ay3 - l41 * ay4) / l11

                vx += h * ay1
                vy += h * ay2
                qd1 += h * ay3
                qd2 += h * ay4
                qdd1 = ay3
                qdd2 = ay4
                if not (fabs(vx) <= DIVERGENCE_BOUND and fabs(vy) <= DIVERGENCE_BOUND
                        and fabs(qd1) <= DIVERGENCE_BOUND and fabs(qd2) <= DIVERGENCE_BOUND):
                    blown = True
                x += h * vx
                y += h * vy
                q1 += h * qd1
                q2 += h * qd2
                if q1 < qlo1:
                    q1 = qlo1
                    if qd1 < 0.0:
                        qd1 = 0.0
                elif q1 > qhi1:
                    q1 = qhi1
                    if qd1 > 0.0:
                        qd1 = 0.0
                if q2 < qlo2:
                    q2 = qlo2
                    if qd2 < 0.0:
                        qd2 = 0.0
                elif q2 > qhi2:
                    q2 = qhi2
                    if qd2 > 0.0:
                        qd2 = 0.0
            out[t, 0] = x
            out[t, 1] = y
            out[t, 2] = vx
            out[t, 3] = vy
            out[t, 4] = q1
            out[t, 5] = q2
            out[t, 6] = qd1
            out[t, 7] = qd2
            out[t, 8] = qdd1
            out[t, 9] = qdd2
            out[t, 10] = fn
            out[t, 11] = ft
            out[t, 12] = 1.0 if fn > 0.0 else 0.0
            ok = (not blown
                  and isfinite(x) and isfinite(y) and isfinite(q1) and isfinite(q2)
                  and isfinite(vx) and isfinite(vy) and isfinite(qd1) and isfinite(qd2)
                  and fabs(vx) <= DIVERGENCE_BOUND and fabs(vy) <= DIVERGENCE_BOUND
                  and fabs(qd1) <= DIVERGENCE_BOUND and fabs(qd2) <= DIVERGENCE_BOUND)
            if not ok:
                bad = t
                break
    return bad, (x, y, vx, vy, q1, q2, qd1, qd2)
