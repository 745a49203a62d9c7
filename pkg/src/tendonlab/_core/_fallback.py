"""Pure-Python simulation kernels (reference implementation).

`_kernels.pyx` mirrors this file expression for expression; keep the two in
lockstep so both backends produce bit-identical trajectories. All state is
scalar float64, all transcendentals come from libm via `math`.

Packed parameter layout (see params.pack_limb / pack_scene):

  limb[0:2]  L1, L2            limb[8:10]  joint damping d1, d2
  limb[2:4]  m1, m2            limb[10:14] qlo1, qhi1, qlo2, qhi2
  limb[4:6]  lc1, lc2          limb[14]    g
  limb[6:8]  I1, I2            limb[15+8i ...] per muscle i:
                                 f_max, l_opt, l_rest, k, b, v_max, r1, r2

  scene: chassis_mass, x_viscous, x_coulomb, gantry_k, gantry_c, gantry_rest,
         contact_k, contact_c, mu, ground_height
"""

from math import cos, exp, isfinite, sin, sqrt, tanh

# Eccentric plateau of the force-velocity hyperbola: (1-y)/(1+3y) reaches 1.5
# at y = -1/11; holding it there keeps fv continuous and non-increasing.
FV_PLATEAU_Y = -1.0 / 11.0
# The parallel damper ramps in over this much stretch so tension stays
# continuous across the spring's engagement boundary.
DAMP_RAMP = 1e-3
# Slip-velocity scale regularizing Coulomb friction (tanh profile).
V_REG = 1e-2

DIVERGENCE_BOUND = 1e3


def clamp01(a):
    if a < 0.0:
        return 0.0
    if a > 1.0:
        return 1.0
    return a


def tension(a, l, ld, f_max, l_opt, l_rest, k, b, v_max):
    """Tendon tension (N) of one musculotendon; never negative."""
    x = (l / l_opt - 1.0) / 0.45
    fl = exp(-x * x)
    y = -ld / v_max  # normalized velocity, positive when shortening
    if y <= FV_PLATEAU_Y:
        fv = 1.5
    elif y >= 1.0:
        fv = 0.0
    else:
        fv = (1.0 - y) / (1.0 + 3.0 * y)
    t = a * f_max * fl * fv
    stretch = l - l_rest
    if stretch > 0.0:
        ramp = stretch / DAMP_RAMP
        if ramp > 1.0:
            ramp = 1.0
        t += k * stretch + b * ld * ramp
    if t < 0.0:
        return 0.0
    return t


def joint_torques_from_muscles(q1, q2, qd1, qd2, a1, a2, a3, p):
    """Muscle tensions at the current state, mapped to the two joint torques."""
    tau1 = 0.0
    tau2 = 0.0
    acts = (a1, a2, a3)
    for i in range(3):
        o = 15 + 8 * i
        r1 = p[o + 6]
        r2 = p[o + 7]
        l = p[o + 1] - (r1 * q1 + r2 * q2)
        ld = -(r1 * qd1 + r2 * qd2)
        t = tension(clamp01(acts[i]), l, ld,
                    p[o], p[o + 1], p[o + 2], p[o + 3], p[o + 4], p[o + 5])
        tau1 += r1 * t
        tau2 += r2 * t
    return tau1, tau2


def limb_accel(q1, q2, qd1, qd2, tau1, tau2, p):
    """Joint accelerations from M qdd + C qd + G + D qd = tau."""
    m1 = p[2]
    m2 = p[3]
    lc1 = p[4]
    lc2 = p[5]
    L1 = p[0]
    s1 = sin(q1)
    s2 = sin(q2)
    c2 = cos(q2)
    s12 = sin(q1 + q2)
    M11 = m1 * lc1 * lc1 + p[6] + m2 * (L1 * L1 + lc2 * lc2 + 2.0 * L1 * lc2 * c2) + p[7]
    M12 = m2 * (lc2 * lc2 + L1 * lc2 * c2) + p[7]
    M22 = m2 * lc2 * lc2 + p[7]
    hh = m2 * L1 * lc2 * s2
    g = p[14]
    G1 = g * (m1 * lc1 * s1 + m2 * (L1 * s1 + lc2 * s12))
    G2 = g * m2 * lc2 * s12
    b1 = tau1 + hh * qd2 * (2.0 * qd1 + qd2) - G1 - p[8] * qd1
    b2 = tau2 - hh * qd1 * qd1 - G2 - p[9] * qd2
    det = M11 * M22 - M12 * M12
    qdd1 = (M22 * b1 - M12 * b2) / det
    qdd2 = (M11 * b2 - M12 * b1) / det
    return qdd1, qdd2


def limb_rollout(q1, q2, qd1, qd2, act, n_sub, h, p, out):
    """Simulate len(act) output samples, n_sub substeps of size h each.

    act: (T, 3) activations held constant within a sample; out: (T, 6)
    receiving q1, q2, qd1, qd2, qdd1, qdd2 at each sample boundary.
    Returns (first_diverged_sample or -1, q1, q2, qd1, qd2).
    """
    T = act.shape[0]
    qlo1 = p[10]
    qhi1 = p[11]
    qlo2 = p[12]
    qhi2 = p[13]
    qdd1 = 0.0
    qdd2 = 0.0
    blown = False
    for t in range(T):
        a1 = act[t, 0]
        a2 = act[t, 1]
        a3 = act[t, 2]
        for _ in range(n_sub):
            tau1, tau2 = joint_torques_from_muscles(q1, q2, qd1, qd2, a1, a2, a3, p)
            qdd1, qdd2 = limb_accel(q1, q2, qd1, qd2, tau1, tau2, p)
            qd1 += h * qdd1
            qd2 += h * qdd2
            # blow-up check on the raw velocity, before limit clamping can
            # mask it
            if not (abs(qd1) <= DIVERGENCE_BOUND and abs(qd2) <= DIVERGENCE_BOUND):
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
                         and abs(qd1) <= DIVERGENCE_BOUND and abs(qd2) <= DIVERGENCE_BOUND):
            return t, q1, q2, qd1, qd2
    return -1, q1, q2, qd1, qd2


def scene_rollout(x, y, vx, vy, q1, q2, qd1, qd2, act, n_sub, h, p, sc, out):
    """Locomotion scene: chassis (x, y) + limb, penalty ground contact.

    out: (T, 13) = x, y, vx, vy, q1, q2, qd1, qd2, qdd1, qdd2, fn, ft, contact.
    Returns (first_diverged_sample or -1, final 8-tuple of state).
    """
    T = act.shape[0]
    L1 = p[0]
    L2 = p[1]
    m1 = p[2]
    m2 = p[3]
    lc1 = p[4]
    lc2 = p[5]
    qlo1 = p[10]
    qhi1 = p[11]
    qlo2 = p[12]
    qhi2 = p[13]
    g = p[14]
    mc = sc[0]
    mt = mc + m1 + m2
    qdd1 = 0.0
    qdd2 = 0.0
    fn = 0.0
    ft = 0.0
    blown = False
    for t in range(T):
        a1 = act[t, 0]
        a2 = act[t, 1]
        a3 = act[t, 2]
        for _ in range(n_sub):
            tau1, tau2 = joint_torques_from_muscles(q1, q2, qd1, qd2, a1, a2, a3, p)

            s1 = sin(q1)
            c1 = cos(q1)
            s2 = sin(q2)
            c2 = cos(q2)
            s12 = sin(q1 + q2)
            c12 = cos(q1 + q2)
            w = qd1 + qd2

            # foot state and penalty contact
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

            # generalized forces (chassis friction, gantry, muscles, contact)
            Qx = -sc[1] * vx - sc[2] * tanh(vx / V_REG) + ft
            Qy = sc[3] * (sc[5] - y) - sc[4] * vy + fn
            Qq1 = tau1 - p[8] * qd1 + (L1 * c1 + L2 * c12) * ft + (L1 * s1 + L2 * s12) * fn
            Qq2 = tau2 - p[9] * qd2 + L2 * c12 * ft + L2 * s12 * fn

            # mass matrix (x, y, q1, q2), upper triangle
            M13 = m1 * lc1 * c1 + m2 * (L1 * c1 + lc2 * c12)
            M14 = m2 * lc2 * c12
            M23 = m1 * lc1 * s1 + m2 * (L1 * s1 + lc2 * s12)
            M24 = m2 * lc2 * s12
            M33 = m1 * lc1 * lc1 + p[6] + m2 * (L1 * L1 + lc2 * lc2 + 2.0 * L1 * lc2 * c2) + p[7]
            M34 = m2 * (lc2 * lc2 + L1 * lc2 * c2) + p[7]
            M44 = m2 * lc2 * lc2 + p[7]

            # velocity-product and gravity terms
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

            # Cholesky solve of the SPD 4x4 system (M12 = 0)
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
            if not (abs(vx) <= DIVERGENCE_BOUND and abs(vy) <= DIVERGENCE_BOUND
                    and abs(qd1) <= DIVERGENCE_BOUND and abs(qd2) <= DIVERGENCE_BOUND):
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
              and abs(vx) <= DIVERGENCE_BOUND and abs(vy) <= DIVERGENCE_BOUND
              and abs(qd1) <= DIVERGENCE_BOUND and abs(qd2) <= DIVERGENCE_BOUND)
        if not ok:
            return t, (x, y, vx, vy, q1, q2, qd1, qd2)
    return -1, (x, y, vx, vy, q1, q2, qd1, qd2)
