"""Compiled macrospin stepping kernels.

Every trajectory in a batch carries a small table of per-segment coefficients
(one row per piecewise-constant drive segment).  Columns are indexed by the
``C_*`` constants below; all fields are in A/m.
"""

import math

import numba as nb
import numpy as np

C_HK = 0  # uniaxial anisotropy coefficient (PMA + VCMA), multiplies m_z
C_MS = 1  # thin-film demag coefficient, h_d = -Ms * m_z
C_HX = 2
C_HY = 3
C_HZ = 4
C_ASOT = 5  # damping-like SOT amplitude
C_ASTT = 6  # damping-like STT amplitude
C_SIGMA = 7  # thermal field standard deviation per component
N_COEF = 8

SCHEME_RK4 = 0
SCHEME_HEUN = 1

STATUS_OK = 0
STATUS_UNSTABLE = 1

MAX_NORM_DRIFT = 1e-3


@nb.njit(cache=True, nogil=True)
def rhs(mx, my, mz, c, tx, ty, tz, s, p, alpha, gamma):
    """dm/dt in explicit Landau-Lifshitz form for one coefficient row.

    ``(tx, ty, tz)`` is the thermal field held for the step, ``s`` the SOT
    polarization and ``p`` the reference layer direction.  Positive STT
    amplitude pushes m away from ``p`` (P -> AP).
    """
    hx = c[C_HX] + tx
    hy = c[C_HY] + ty
    hz = (c[C_HK] - c[C_MS]) * mz + c[C_HZ] + tz

    ax = -gamma * (my * hz - mz * hy)
    ay = -gamma * (mz * hx - mx * hz)
    az = -gamma * (mx * hy - my * hx)

    a_sot = gamma * c[C_ASOT]
    if a_sot != 0.0:
        ms = mx * s[0] + my * s[1] + mz * s[2]
        ax += a_sot * (s[0] - ms * mx)
        ay += a_sot * (s[1] - ms * my)
        az += a_sot * (s[2] - ms * mz)

    a_stt = gamma * c[C_ASTT]
    if a_stt != 0.0:
        mp = mx * p[0] + my * p[1] + mz * p[2]
        ax += a_stt * (mp * mx - p[0])
        ay += a_stt * (mp * my - p[1])
        az += a_stt * (mp * mz - p[2])

    k = 1.0 / (1.0 + alpha * alpha)
    fx = k * (ax + alpha * (my * az - mz * ay))
    fy = k * (ay + alpha * (mz * ax - mx * az))
    fz = k * (az + alpha * (mx * ay - my * ax))
    return fx, fy, fz


@nb.njit(cache=True, nogil=True)
def _rotate(mx, my, mz, wx, wy, wz, dt):
    # Rodrigues rotation of m about w by |w|*dt
    w = math.sqrt(wx * wx + wy * wy + wz * wz)
    if w == 0.0:
        return mx, my, mz
    th = w * dt
    kx = wx / w
    ky = wy / w
    kz = wz / w
    ct = math.cos(th)
    st = math.sin(th)
    kdm = kx * mx + ky * my + kz * mz
    cx = ky * mz - kz * my
    cy = kz * mx - kx * mz
    cz = kx * my - ky * mx
    return (
        mx * ct + cx * st + kx * kdm * (1.0 - ct),
        my * ct + cy * st + ky * kdm * (1.0 - ct),
        mz * ct + cz * st + kz * kdm * (1.0 - ct),
    )


@nb.njit(cache=True, nogil=True)
def integrate_batch(
    m0, coef, seg_of_step, t0, dt, noise, scheme, s, p, alpha, gamma,
    renormalize, stride, traj, final, last_cross, drift, status,
):
    """Advance every trajectory in the batch by ``len(seg_of_step)`` steps.

    Outputs are written in place: ``traj`` (N, n_rec, 3) when ``stride > 0``,
    ``final`` (N, 3), ``last_cross`` (N,) time of the last m_z sign change
    (NaN when none), ``drift`` (N,) largest pre-renormalization | |m| - 1 |,
    ``status`` (N, 2) = (code, step index).
    """
    n_traj = m0.shape[0]
    n_steps = seg_of_step.shape[0]
    use_noise = noise.shape[1] > 0
    for j in range(n_traj):
        mx = m0[j, 0]
        my = m0[j, 1]
        mz = m0[j, 2]
        a = alpha[j]
        cross = np.nan
        worst = 0.0
        status[j, 0] = STATUS_OK
        status[j, 1] = -1
        if stride > 0:
            traj[j, 0, 0] = mx
            traj[j, 0, 1] = my
            traj[j, 0, 2] = mz
        for i in range(n_steps):
            c = coef[j, seg_of_step[i]]
            tx = 0.0
            ty = 0.0
            tz = 0.0
            if use_noise:
                sig = c[C_SIGMA]
                tx = noise[j, i, 0] * sig
                ty = noise[j, i, 1] * sig
                tz = noise[j, i, 2] * sig
            if scheme == SCHEME_RK4:
                k1x, k1y, k1z = rhs(mx, my, mz, c, tx, ty, tz, s, p, a, gamma)
                h = 0.5 * dt
                k2x, k2y, k2z = rhs(mx + h * k1x, my + h * k1y, mz + h * k1z,
                                    c, tx, ty, tz, s, p, a, gamma)
                k3x, k3y, k3z = rhs(mx + h * k2x, my + h * k2y, mz + h * k2z,
                                    c, tx, ty, tz, s, p, a, gamma)
                k4x, k4y, k4z = rhs(mx + dt * k3x, my + dt * k3y, mz + dt * k3z,
                                    c, tx, ty, tz, s, p, a, gamma)
                w = dt / 6.0
                nx = mx + w * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
                ny = my + w * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
                nz = mz + w * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
            else:
                # Heun predictor/corrector on the rotation vector w = m x f,
                # which keeps m on the sphere to round-off.
                f1x, f1y, f1z = rhs(mx, my, mz, c, tx, ty, tz, s, p, a, gamma)
                w1x = my * f1z - mz * f1y
                w1y = mz * f1x - mx * f1z
                w1z = mx * f1y - my * f1x
                px_, py_, pz_ = _rotate(mx, my, mz, w1x, w1y, w1z, dt)
                f2x, f2y, f2z = rhs(px_, py_, pz_, c, tx, ty, tz, s, p, a, gamma)
                w2x = py_ * f2z - pz_ * f2y
                w2y = pz_ * f2x - px_ * f2z
                w2z = px_ * f2y - py_ * f2x
                nx, ny, nz = _rotate(mx, my, mz, 0.5 * (w1x + w2x),
                                     0.5 * (w1y + w2y), 0.5 * (w1z + w2z), dt)
            norm = math.sqrt(nx * nx + ny * ny + nz * nz)
            dev = abs(norm - 1.0)
            if dev > worst:
                worst = dev
            if dev > MAX_NORM_DRIFT or not math.isfinite(norm):
                status[j, 0] = STATUS_UNSTABLE
                status[j, 1] = i
                break
            if renormalize:
                nx /= norm
                ny /= norm
                nz /= norm
            if (mz < 0.0 and nz >= 0.0) or (mz > 0.0 and nz <= 0.0):
                if mz != nz:
                    cross = t0 + dt * (i + mz / (mz - nz))
            mx = nx
            my = ny
            mz = nz
            if stride > 0 and (i + 1) % stride == 0:
                r = (i + 1) // stride
                traj[j, r, 0] = mx
                traj[j, r, 1] = my
                traj[j, r, 2] = mz
        final[j, 0] = mx
        final[j, 1] = my
        final[j, 2] = mz
        last_cross[j] = cross
        drift[j] = worst
