"""Hot integration loops.

Every kernel is written once as a plain Python function and compiled with
numba when it is available.  Set ``CHAOSCOMM_DISABLE_NUMBA=1`` to force the
pure-Python path (identical arithmetic, much slower); ``USING_NUMBA`` reports
which path is active.  ``benchmarks/bench_kernels.py`` compares the two.

Kernels return a status integer: -1 on success, otherwise the index of the
step at which a state component exceeded ``DIVERGENCE_LIMIT``.  Callers raise.

Decision-engine encoding shared by the TS-CSK kernels:
  engine id 0 = two-region        params (v1, v2, v3, unused)
  engine id 1 = even/odd lattice  params (v1, v2, v3, h)
  engine id 2 = eight-section     params (theta, x3_threshold, unused, unused)
"""

import math
import os

import numpy as np

DIVERGENCE_LIMIT = 1.0e6

_disable = os.environ.get("CHAOSCOMM_DISABLE_NUMBA", "").strip() not in ("", "0")
if not _disable:
    try:
        from numba import njit

        USING_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a hard dependency
        USING_NUMBA = False
else:
    USING_NUMBA = False

if USING_NUMBA:
    _jit = njit(cache=True, fastmath=False)
else:

    def _jit(fn):
        return fn


@_jit
def _fd(x, m0, m1, b):
    # piecewise-linear Chua diode
    return m1 * x + 0.5 * (m0 - m1) * (abs(x + b) - abs(x - b))


@_jit
def _delta(eid, e0, e1, e2, e3, x1, x2, x3):
    if eid == 0:
        return 0 if (e0 * x1 + e1 * x2 + e2 * x3) < 0.0 else 1
    elif eid == 1:
        q = math.floor((e0 * x1 + e1 * x2 + e2 * x3) / e3)
        return int(q) & 1
    else:
        dz = 1 if x3 >= e1 else 0
        if x2 < -e0:
            return dz
        elif x2 < 0.0:
            return 1 - dz
        elif x2 < e0:
            return dz
        else:
            return 1 - dz


@_jit
def _lam_sel(delta, mbit, lam0, lam1):
    idx = mbit if delta == 0 else 1 - mbit
    return lam0 if idx == 0 else lam1


@_jit
def rk4_chua(sig, bet, m0, m1, b, tsc, x, y, z, dt, n, out):
    """Fixed-step RK4 for the autonomous oscillator; fills out[(n+1),3]."""
    out[0, 0] = x
    out[0, 1] = y
    out[0, 2] = z
    for k in range(n):
        fx = _fd(x, m0, m1, b)
        k1x = tsc * (sig * (y - x - fx))
        k1y = tsc * (x - y + z)
        k1z = tsc * (-bet * y)
        ax = x + 0.5 * dt * k1x
        ay = y + 0.5 * dt * k1y
        az = z + 0.5 * dt * k1z
        fx = _fd(ax, m0, m1, b)
        k2x = tsc * (sig * (ay - ax - fx))
        k2y = tsc * (ax - ay + az)
        k2z = tsc * (-bet * ay)
        bx = x + 0.5 * dt * k2x
        by = y + 0.5 * dt * k2y
        bz = z + 0.5 * dt * k2z
        fx = _fd(bx, m0, m1, b)
        k3x = tsc * (sig * (by - bx - fx))
        k3y = tsc * (bx - by + bz)
        k3z = tsc * (-bet * by)
        cx = x + dt * k3x
        cy = y + dt * k3y
        cz = z + dt * k3z
        fx = _fd(cx, m0, m1, b)
        k4x = tsc * (sig * (cy - cx - fx))
        k4y = tsc * (cx - cy + cz)
        k4z = tsc * (-bet * cy)
        x += dt * (k1x + 2.0 * k2x + 2.0 * k3x + k4x) / 6.0
        y += dt * (k1y + 2.0 * k2y + 2.0 * k3y + k4y) / 6.0
        z += dt * (k1z + 2.0 * k2z + 2.0 * k3z + k4z) / 6.0
        out[k + 1, 0] = x
        out[k + 1, 1] = y
        out[k + 1, 2] = z
        if abs(x) > DIVERGENCE_LIMIT or abs(y) > DIVERGENCE_LIMIT or abs(z) > DIVERGENCE_LIMIT:
            return k
    return -1


@_jit
def rk4_csk(sig0, bet0, sig1, bet1, m0, m1, b, tsc, bits, steps_per_bit, x, y, z, dt, out):
    """Parameter-switching CSK transmitter; state continuous across switches."""
    n = bits.shape[0] * steps_per_bit
    out[0, 0] = x
    out[0, 1] = y
    out[0, 2] = z
    for k in range(n):
        if bits[k // steps_per_bit] == 0:
            sg = sig0
            bt = bet0
        else:
            sg = sig1
            bt = bet1
        fx = _fd(x, m0, m1, b)
        k1x = tsc * (sg * (y - x - fx))
        k1y = tsc * (x - y + z)
        k1z = tsc * (-bt * y)
        ax = x + 0.5 * dt * k1x
        ay = y + 0.5 * dt * k1y
        az = z + 0.5 * dt * k1z
        fx = _fd(ax, m0, m1, b)
        k2x = tsc * (sg * (ay - ax - fx))
        k2y = tsc * (ax - ay + az)
        k2z = tsc * (-bt * ay)
        bx = x + 0.5 * dt * k2x
        by = y + 0.5 * dt * k2y
        bz = z + 0.5 * dt * k2z
        fx = _fd(bx, m0, m1, b)
        k3x = tsc * (sg * (by - bx - fx))
        k3y = tsc * (bx - by + bz)
        k3z = tsc * (-bt * by)
        cx = x + dt * k3x
        cy = y + dt * k3y
        cz = z + dt * k3z
        fx = _fd(cx, m0, m1, b)
        k4x = tsc * (sg * (cy - cx - fx))
        k4y = tsc * (cx - cy + cz)
        k4z = tsc * (-bt * cy)
        x += dt * (k1x + 2.0 * k2x + 2.0 * k3x + k4x) / 6.0
        y += dt * (k1y + 2.0 * k2y + 2.0 * k3y + k4y) / 6.0
        z += dt * (k1z + 2.0 * k2z + 2.0 * k3z + k4z) / 6.0
        out[k + 1, 0] = x
        out[k + 1, 1] = y
        out[k + 1, 2] = z
        if abs(x) > DIVERGENCE_LIMIT or abs(y) > DIVERGENCE_LIMIT or abs(z) > DIVERGENCE_LIMIT:
            return k
    return -1


@_jit
def rk4_drive_substitution(sig, bet, m0, m1, b, tsc, u, dt, z1, z2, z3, out):
    """Drive-synchronized receiver with the transmitted sample substituted
    into both the diode argument and the second-state drive.  The drive is
    linearly interpolated at RK4 stage times."""
    L = u.shape[0]
    out[0, 0] = z1
    out[0, 1] = z2
    out[0, 2] = z3
    for k in range(L - 1):
        u0 = u[k]
        u1 = u[k + 1]
        um = 0.5 * (u0 + u1)
        fu = _fd(u0, m0, m1, b)
        k1x = tsc * (sig * (z2 - z1 - fu))
        k1y = tsc * (u0 - z2 + z3)
        k1z = tsc * (-bet * z2)
        a1 = z1 + 0.5 * dt * k1x
        a2 = z2 + 0.5 * dt * k1y
        a3 = z3 + 0.5 * dt * k1z
        fu = _fd(um, m0, m1, b)
        k2x = tsc * (sig * (a2 - a1 - fu))
        k2y = tsc * (um - a2 + a3)
        k2z = tsc * (-bet * a2)
        b1 = z1 + 0.5 * dt * k2x
        b2 = z2 + 0.5 * dt * k2y
        b3 = z3 + 0.5 * dt * k2z
        k3x = tsc * (sig * (b2 - b1 - fu))
        k3y = tsc * (um - b2 + b3)
        k3z = tsc * (-bet * b2)
        c1 = z1 + dt * k3x
        c2 = z2 + dt * k3y
        c3 = z3 + dt * k3z
        fu = _fd(u1, m0, m1, b)
        k4x = tsc * (sig * (c2 - c1 - fu))
        k4y = tsc * (u1 - c2 + c3)
        k4z = tsc * (-bet * c2)
        z1 += dt * (k1x + 2.0 * k2x + 2.0 * k3x + k4x) / 6.0
        z2 += dt * (k1y + 2.0 * k2y + 2.0 * k3y + k4y) / 6.0
        z3 += dt * (k1z + 2.0 * k2z + 2.0 * k3z + k4z) / 6.0
        out[k + 1, 0] = z1
        out[k + 1, 1] = z2
        out[k + 1, 2] = z3
        if abs(z1) > DIVERGENCE_LIMIT or abs(z2) > DIVERGENCE_LIMIT or abs(z3) > DIVERGENCE_LIMIT:
            return k
    return -1


@_jit
def rk4_drive_cascade(sig, bet, m0, m1, b, tsc, u, dt, w, z2, z3, out):
    """Cascade observer receiver: (z2, z3) are driven linearly by the
    received sample; w reconstructs the first state from z2 through the
    oscillator's own first-row dynamics.  State order: (w, z2, z3)."""
    L = u.shape[0]
    out[0, 0] = w
    out[0, 1] = z2
    out[0, 2] = z3
    for k in range(L - 1):
        u0 = u[k]
        u1 = u[k + 1]
        um = 0.5 * (u0 + u1)
        fw = _fd(w, m0, m1, b)
        k1x = tsc * (sig * (z2 - w - fw))
        k1y = tsc * (u0 - z2 + z3)
        k1z = tsc * (-bet * z2)
        a1 = w + 0.5 * dt * k1x
        a2 = z2 + 0.5 * dt * k1y
        a3 = z3 + 0.5 * dt * k1z
        fw = _fd(a1, m0, m1, b)
        k2x = tsc * (sig * (a2 - a1 - fw))
        k2y = tsc * (um - a2 + a3)
        k2z = tsc * (-bet * a2)
        b1 = w + 0.5 * dt * k2x
        b2 = z2 + 0.5 * dt * k2y
        b3 = z3 + 0.5 * dt * k2z
        fw = _fd(b1, m0, m1, b)
        k3x = tsc * (sig * (b2 - b1 - fw))
        k3y = tsc * (um - b2 + b3)
        k3z = tsc * (-bet * b2)
        c1 = w + dt * k3x
        c2 = z2 + dt * k3y
        c3 = z3 + dt * k3z
        fw = _fd(c1, m0, m1, b)
        k4x = tsc * (sig * (c2 - c1 - fw))
        k4y = tsc * (u1 - c2 + c3)
        k4z = tsc * (-bet * c2)
        w += dt * (k1x + 2.0 * k2x + 2.0 * k3x + k4x) / 6.0
        z2 += dt * (k1y + 2.0 * k2y + 2.0 * k3y + k4y) / 6.0
        z3 += dt * (k1z + 2.0 * k2z + 2.0 * k3z + k4z) / 6.0
        out[k + 1, 0] = w
        out[k + 1, 1] = z2
        out[k + 1, 2] = z3
        if abs(w) > DIVERGENCE_LIMIT or abs(z2) > DIVERGENCE_LIMIT or abs(z3) > DIVERGENCE_LIMIT:
            return k
    return -1


@_jit
def rk4_tscsk_tx(sig, bet, m0, m1, b, tsc, lam0, lam1, eid, e0, e1, e2, e3,
                 bits, bit_dur, x, y, z, dt_tau, n, out, tout):
    """Time-scaled transmitter: RK4 in tau on the augmented state (x, t)
    with d/dtau = lam(x, m(t)) * (F(x), 1).  The current bit is looked up
    from the accumulated physical time at every stage."""
    t = 0.0
    out[0, 0] = x
    out[0, 1] = y
    out[0, 2] = z
    tout[0] = t
    nbits = bits.shape[0]
    kx = np.empty(4)
    ky = np.empty(4)
    kz = np.empty(4)
    kt = np.empty(4)
    for k in range(n):
        xs = x
        ys = y
        zs = z
        ts = t
        for st in range(4):
            if st == 1:
                xs = x + 0.5 * dt_tau * kx[0]
                ys = y + 0.5 * dt_tau * ky[0]
                zs = z + 0.5 * dt_tau * kz[0]
                ts = t + 0.5 * dt_tau * kt[0]
            elif st == 2:
                xs = x + 0.5 * dt_tau * kx[1]
                ys = y + 0.5 * dt_tau * ky[1]
                zs = z + 0.5 * dt_tau * kz[1]
                ts = t + 0.5 * dt_tau * kt[1]
            elif st == 3:
                xs = x + dt_tau * kx[2]
                ys = y + dt_tau * ky[2]
                zs = z + dt_tau * kz[2]
                ts = t + dt_tau * kt[2]
            bidx = int(ts / bit_dur)
            if bidx >= nbits:
                bidx = nbits - 1
            if bidx < 0:
                bidx = 0
            d = _delta(eid, e0, e1, e2, e3, xs, ys, zs)
            lam = _lam_sel(d, bits[bidx], lam0, lam1)
            fx = _fd(xs, m0, m1, b)
            kx[st] = lam * tsc * (sig * (ys - xs - fx))
            ky[st] = lam * tsc * (xs - ys + zs)
            kz[st] = lam * tsc * (-bet * ys)
            kt[st] = lam
        x += dt_tau * (kx[0] + 2.0 * kx[1] + 2.0 * kx[2] + kx[3]) / 6.0
        y += dt_tau * (ky[0] + 2.0 * ky[1] + 2.0 * ky[2] + ky[3]) / 6.0
        z += dt_tau * (kz[0] + 2.0 * kz[1] + 2.0 * kz[2] + kz[3]) / 6.0
        t += dt_tau * (kt[0] + 2.0 * kt[1] + 2.0 * kt[2] + kt[3]) / 6.0
        out[k + 1, 0] = x
        out[k + 1, 1] = y
        out[k + 1, 2] = z
        tout[k + 1] = t
        if abs(x) > DIVERGENCE_LIMIT or abs(y) > DIVERGENCE_LIMIT or abs(z) > DIVERGENCE_LIMIT:
            return k
    return -1


@_jit
def rk4_tscsk_rx(sig, bet, m0, m1, b, tsc, lam0, lam1, eid, e0, e1, e2, e3,
                 u, z1, z2, z3, dt_tau, out):
    """Time-scaled receiver copy running lam(z, 0), driven by the received
    first-state samples on the transmitter's tau grid."""
    L = u.shape[0]
    out[0, 0] = z1
    out[0, 1] = z2
    out[0, 2] = z3
    kx = np.empty(4)
    ky = np.empty(4)
    kz = np.empty(4)
    for k in range(L - 1):
        u0 = u[k]
        u1 = u[k + 1]
        um = 0.5 * (u0 + u1)
        a1 = z1
        a2 = z2
        a3 = z3
        for st in range(4):
            if st == 1:
                a1 = z1 + 0.5 * dt_tau * kx[0]
                a2 = z2 + 0.5 * dt_tau * ky[0]
                a3 = z3 + 0.5 * dt_tau * kz[0]
            elif st == 2:
                a1 = z1 + 0.5 * dt_tau * kx[1]
                a2 = z2 + 0.5 * dt_tau * ky[1]
                a3 = z3 + 0.5 * dt_tau * kz[1]
            elif st == 3:
                a1 = z1 + dt_tau * kx[2]
                a2 = z2 + dt_tau * ky[2]
                a3 = z3 + dt_tau * kz[2]
            if st == 0:
                uu = u0
            elif st == 3:
                uu = u1
            else:
                uu = um
            d = _delta(eid, e0, e1, e2, e3, a1, a2, a3)
            lam = _lam_sel(d, 0, lam0, lam1)
            fu = _fd(uu, m0, m1, b)
            kx[st] = lam * tsc * (sig * (a2 - a1 - fu))
            ky[st] = lam * tsc * (uu - a2 + a3)
            kz[st] = lam * tsc * (-bet * a2)
        z1 += dt_tau * (kx[0] + 2.0 * kx[1] + 2.0 * kx[2] + kx[3]) / 6.0
        z2 += dt_tau * (ky[0] + 2.0 * ky[1] + 2.0 * ky[2] + ky[3]) / 6.0
        z3 += dt_tau * (kz[0] + 2.0 * kz[1] + 2.0 * kz[2] + kz[3]) / 6.0
        out[k + 1, 0] = z1
        out[k + 1, 1] = z2
        out[k + 1, 2] = z3
        if abs(z1) > DIVERGENCE_LIMIT or abs(z2) > DIVERGENCE_LIMIT or abs(z3) > DIVERGENCE_LIMIT:
            return k
    return -1


@_jit
def rk4_memristor(sig, bet, m0, m1, b, r_nom1, r_nom2,
                  w1, d1, ron1, roff1, uv1, p1,
                  w2, d2, ron2, roff2, uv2, p2,
                  evolve, x, y, z, dt, n, out, wout):
    """Memristor-keyed oscillator.  Element 1 scales sigma, element 2 scales
    beta, each by (nominal / memristance).  With evolve=0 the internal states
    are frozen (keys are stable during communication); with evolve=1 they
    follow the linear-drift law forced by per-element current proxies."""
    out[0, 0] = x
    out[0, 1] = y
    out[0, 2] = z
    wout[0, 0] = w1
    wout[0, 1] = w2
    for k in range(n):
        mem1 = ron1 * (w1 / d1) + roff1 * (1.0 - w1 / d1)
        mem2 = ron2 * (w2 / d2) + roff2 * (1.0 - w2 / d2)
        sg = sig * (r_nom1 / mem1)
        bt = bet * (r_nom2 / mem2)
        fx = _fd(x, m0, m1, b)
        k1x = sg * (y - x - fx)
        k1y = x - y + z
        k1z = -bt * y
        ax = x + 0.5 * dt * k1x
        ay = y + 0.5 * dt * k1y
        az = z + 0.5 * dt * k1z
        fx = _fd(ax, m0, m1, b)
        k2x = sg * (ay - ax - fx)
        k2y = ax - ay + az
        k2z = -bt * ay
        bx = x + 0.5 * dt * k2x
        by = y + 0.5 * dt * k2y
        bz = z + 0.5 * dt * k2z
        fx = _fd(bx, m0, m1, b)
        k3x = sg * (by - bx - fx)
        k3y = bx - by + bz
        k3z = -bt * by
        cx = x + dt * k3x
        cy = y + dt * k3y
        cz = z + dt * k3z
        fx = _fd(cx, m0, m1, b)
        k4x = sg * (cy - cx - fx)
        k4y = cx - cy + cz
        k4z = -bt * cy
        if evolve != 0:
            fx0 = _fd(x, m0, m1, b)
            i1 = abs(y - x - fx0)
            i2 = abs(y)
            win1 = 1.0 - (2.0 * w1 / d1 - 1.0) ** (2 * p1)
            win2 = 1.0 - (2.0 * w2 / d2 - 1.0) ** (2 * p2)
            w1 += dt * uv1 * ron1 / (d1 * d1) * i1 * win1
            w2 += dt * uv2 * ron2 / (d2 * d2) * i2 * win2
            if w1 < 0.0:
                w1 = 0.0
            elif w1 > d1:
                w1 = d1
            if w2 < 0.0:
                w2 = 0.0
            elif w2 > d2:
                w2 = d2
        x += dt * (k1x + 2.0 * k2x + 2.0 * k3x + k4x) / 6.0
        y += dt * (k1y + 2.0 * k2y + 2.0 * k3y + k4y) / 6.0
        z += dt * (k1z + 2.0 * k2z + 2.0 * k3z + k4z) / 6.0
        out[k + 1, 0] = x
        out[k + 1, 1] = y
        out[k + 1, 2] = z
        wout[k + 1, 0] = w1
        wout[k + 1, 1] = w2
        if abs(x) > DIVERGENCE_LIMIT or abs(y) > DIVERGENCE_LIMIT or abs(z) > DIVERGENCE_LIMIT:
            return k
    return -1


@_jit
def sosfilt_inplace(b0, b1, b2, a1, a2, x):
    """Single biquad section, direct form I, state initialized at x[0]."""
    x1 = x[0]
    x2 = x[0]
    y1 = x[0]
    y2 = x[0]
    for i in range(x.shape[0]):
        xi = x[i]
        yi = b0 * xi + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2
        x2 = x1
        x1 = xi
        y2 = y1
        y1 = yi
        x[i] = yi
    return 0
