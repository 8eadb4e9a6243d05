"""Optional compiled kernels for the hot face-sweep and source loops.

The reference implementations live in `semidiscrete` and `model`
as plain numpy; the kernels here reproduce them loop-by-loop so large
grids do not pay for the intermediate arrays.  Import of numba is
optional: when it is missing, or ``TCFV_NO_NUMBA`` is set, callers fall
back to the numpy path.  A parity test keeps the two in lockstep.
"""

from __future__ import annotations

import os

import numpy as np

try:
    if os.environ.get("TCFV_NO_NUMBA"):
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via TCFV_NO_NUMBA
    HAVE_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        def wrap(fn):
            return fn
        return wrap(args[0]) if args and callable(args[0]) else wrap


_ZERO_DEN = 1e-14
_DET_FLOOR = 1e-12
_INF_TAU = 1e19

# error flags reported by the kernels
ERR_RHO = 1
ERR_DUAL = 2
ERR_DET = 3


@njit(cache=True)
def _cell_quantities(q, axis3, g, cv, cs, ch, rho0, T0,
                     E, smax, un, T, r, pe, fgas, e3s, e4s,
                     alpha, beta, sig, bn, i):
    """Fill per-cell derived quantities for padded cell i.  Returns an
    error flag (0 ok)."""
    rho = q[i, 0]
    if not (rho > 0.0) or not np.isfinite(rho):
        return ERR_RHO
    S = q[i, 4] / rho
    v0 = q[i, 1] / rho
    v1 = q[i, 2] / rho
    v2 = q[i, 3] / rho
    e1 = rho ** g * np.exp(S / cv) / (g - 1.0)
    Ti = e1 / (rho * cv)
    p = (g - 1.0) * e1
    v2sum = v0 * v0 + v1 * v1 + v2 * v2
    rE = (e1 / rho) * (g - S / cv) - 0.5 * v2sum

    e3 = 0.0
    if cs > 0.0:
        # G = A^T A, devG, alpha = rho cs^2 A devG, sig = column axis3
        # of A^T alpha
        G00 = G01 = G02 = G11 = G12 = G22 = 0.0
        for mm in range(3):
            a0 = q[i, 5 + 3 * mm + 0]
            a1 = q[i, 5 + 3 * mm + 1]
            a2 = q[i, 5 + 3 * mm + 2]
            G00 += a0 * a0
            G01 += a0 * a1
            G02 += a0 * a2
            G11 += a1 * a1
            G12 += a1 * a2
            G22 += a2 * a2
        tr3 = (G00 + G11 + G22) / 3.0
        d00 = G00 - tr3
        d11 = G11 - tr3
        d22 = G22 - tr3
        e3 = 0.25 * cs * cs * (d00 * d00 + d11 * d11 + d22 * d22
                               + 2.0 * (G01 * G01 + G02 * G02 + G12 * G12))
        rc2 = rho * cs * cs
        for mm in range(3):
            a0 = q[i, 5 + 3 * mm + 0]
            a1 = q[i, 5 + 3 * mm + 1]
            a2 = q[i, 5 + 3 * mm + 2]
            alpha[i, mm, 0] = rc2 * (a0 * d00 + a1 * G01 + a2 * G02)
            alpha[i, mm, 1] = rc2 * (a0 * G01 + a1 * d11 + a2 * G12)
            alpha[i, mm, 2] = rc2 * (a0 * G02 + a1 * G12 + a2 * d22)
        for kk in range(3):
            acc = 0.0
            for mm in range(3):
                acc += q[i, 5 + 3 * mm + kk] * alpha[i, mm, axis3]
            sig[i, kk] = acc
    e4 = 0.0
    if ch > 0.0:
        J0 = q[i, 14]
        J1 = q[i, 15]
        J2 = q[i, 16]
        e4 = 0.5 * ch * ch * (J0 * J0 + J1 * J1 + J2 * J2)
        rh2 = rho * ch * ch
        beta[i, 0] = rh2 * J0
        beta[i, 1] = rh2 * J1
        beta[i, 2] = rh2 * J2
        bn[i] = beta[i, axis3]

    e3s[i] = e3
    e4s[i] = e4
    E[i] = e1 + 0.5 * rho * v2sum + rho * (e3 + e4)
    r[i] = rE + e3 + e4
    T[i] = Ti
    uni = v0 if axis3 == 0 else (v1 if axis3 == 1 else v2)
    un[i] = uni
    tcv = Ti / cv
    if tcv < 1.0:
        tcv = 1.0
    smax[i] = abs(uni) + np.sqrt(g * p / rho + (4.0 / 3.0) * cs * cs
                                 + ch * ch * tcv)
    pe[i, 0] = rE
    pe[i, 1] = v0
    pe[i, 2] = v1
    pe[i, 3] = v2
    pe[i, 4] = Ti
    fgas[i, 0] = rho * uni
    fgas[i, 1] = q[i, 1] * uni
    fgas[i, 2] = q[i, 2] * uni
    fgas[i, 3] = q[i, 3] * uni
    fgas[i, 1 + axis3] += p
    fgas[i, 4] = q[i, 4] * uni
    return 0


@njit(cache=True)
def face_sweep(q, axis3, delta, g, cv, cs, ch, rho0, T0,
               eps_const, limited, nodes, weights,
               CL, CR, smax_f, eps_f, pi_f):
    """Face contributions along axis 0 of the padded, flattened state.

    ``q`` has shape (npad, 17) holding one sweep line after flattening
    the non-sweep axes into the padded axis blocks; the caller passes
    each flattened column separately, see the wrapper.  Outputs are the
    per-face CL/CR (nf, 17) plus per-face signal, viscosity and
    production minima for the diagnostics.  Returns an error flag.
    """
    npad = q.shape[0]
    nf = npad - 3
    E = np.empty(npad)
    smax = np.empty(npad)
    un = np.empty(npad)
    T = np.empty(npad)
    r = np.empty(npad)
    e3s = np.empty(npad)
    e4s = np.empty(npad)
    pe = np.empty((npad, 5))
    fgas = np.empty((npad, 5))
    alpha = np.zeros((npad, 3, 3))
    beta = np.zeros((npad, 3))
    sig = np.zeros((npad, 3))
    bn = np.zeros(npad)

    for i in range(npad):
        err = _cell_quantities(q, axis3, g, cv, cs, ch, rho0, T0,
                               E, smax, un, T, r, pe, fgas, e3s, e4s,
                               alpha, beta, sig, bn, i)
        if err != 0:
            return err

    gm1 = g - 1.0
    inv_gm1 = 1.0 / gm1
    for f in range(nf):
        iL = f + 1
        iR = f + 2
        # compatible gasdynamic flux along the dual segment
        fhat0 = fhat1 = fhat2 = fhat3 = fhat4 = 0.0
        for nq in range(nodes.shape[0]):
            s = nodes[nq]
            w = weights[nq]
            rEn = pe[iL, 0] + s * (pe[iR, 0] - pe[iL, 0])
            vn0 = pe[iL, 1] + s * (pe[iR, 1] - pe[iL, 1])
            vn1 = pe[iL, 2] + s * (pe[iR, 2] - pe[iL, 2])
            vn2 = pe[iL, 3] + s * (pe[iR, 3] - pe[iL, 3])
            Tn = pe[iL, 4] + s * (pe[iR, 4] - pe[iL, 4])
            if not (Tn > 0.0) or not np.isfinite(Tn):
                return ERR_DUAL
            Sn = g * cv - (rEn + 0.5 * (vn0 * vn0 + vn1 * vn1 + vn2 * vn2)) / Tn
            rhon = (gm1 * cv * Tn * np.exp(-Sn / cv)) ** inv_gm1
            if not (rhon > 0.0) or not np.isfinite(rhon):
                return ERR_DUAL
            pn = gm1 * rhon * cv * Tn
            unn = vn0 if axis3 == 0 else (vn1 if axis3 == 1 else vn2)
            fhat0 += w * rhon * unn
            fhat1 += w * rhon * vn0 * unn
            fhat2 += w * rhon * vn1 * unn
            fhat3 += w * rhon * vn2 * unn
            fhat4 += w * rhon * Sn * unn
            if axis3 == 0:
                fhat1 += w * pn
            elif axis3 == 1:
                fhat2 += w * pn
            else:
                fhat3 += w * pn

        # face viscosity from the limiter on cell total energies
        sm = smax[iL] if smax[iL] > smax[iR] else smax[iR]
        smax_f[f] = sm
        if limited:
            dE = E[f + 2] - E[f + 1]
            num_m = E[f + 1] - E[f]
            num_p = E[f + 3] - E[f + 2]
            scale = abs(E[f + 1]) + abs(E[f + 2])
            if abs(dE) <= _ZERO_DEN * scale:
                if (abs(num_m) <= _ZERO_DEN * scale
                        and abs(num_p) <= _ZERO_DEN * scale):
                    phi = 1.0
                else:
                    phi = 0.0
            else:
                h_m = num_m / dE
                h_p = num_p / dE
                if h_m < 0.0:
                    h_m = 0.0
                elif h_m > 1.0:
                    h_m = 1.0
                if h_p < 0.0:
                    h_p = 0.0
                elif h_p > 1.0:
                    h_p = 1.0
                phi = h_m if h_m < h_p else h_p
            eps = 0.5 * (1.0 - phi) * delta * sm
        else:
            eps = eps_const
        eps_f[f] = eps

        # dissipative flux and exact-path entropy production
        piL = 0.0
        piR = 0.0
        if eps > 0.0:
            quadform = ((q[iR, 0] - q[iL, 0]) * (r[iR] - r[iL])
                        + (q[iR, 4] - q[iL, 4]) * (T[iR] - T[iL]))
            for kk in range(3):
                quadform += ((q[iR, 1 + kk] - q[iL, 1 + kk])
                             * (pe[iR, 1 + kk] - pe[iL, 1 + kk]))
            if cs > 0.0:
                for mm in range(3):
                    for kk in range(3):
                        quadform += ((q[iR, 5 + 3 * mm + kk]
                                      - q[iL, 5 + 3 * mm + kk])
                                     * (alpha[iR, mm, kk] - alpha[iL, mm, kk]))
            if ch > 0.0:
                for kk in range(3):
                    quadform += ((q[iR, 14 + kk] - q[iL, 14 + kk])
                                 * (beta[iR, kk] - beta[iL, kk]))
            piL = 0.5 * eps * quadform / (T[iL] * delta)
            piR = 0.5 * eps * quadform / (T[iR] * delta)
        pi_f[f] = piL if piL < piR else piR

        # gasdynamic slots plus scalar dissipation on every slot
        CL[f, 0] = -(fhat0 - fgas[iL, 0])
        CL[f, 1] = -(fhat1 - fgas[iL, 1])
        CL[f, 2] = -(fhat2 - fgas[iL, 2])
        CL[f, 3] = -(fhat3 - fgas[iL, 3])
        CL[f, 4] = -(fhat4 - fgas[iL, 4])
        CR[f, 0] = fhat0 - fgas[iR, 0]
        CR[f, 1] = fhat1 - fgas[iR, 1]
        CR[f, 2] = fhat2 - fgas[iR, 2]
        CR[f, 3] = fhat3 - fgas[iR, 3]
        CR[f, 4] = fhat4 - fgas[iR, 4]
        for c in range(5, 17):
            CL[f, c] = 0.0
            CR[f, c] = 0.0
        ed = eps / delta
        for c in range(17):
            gd = ed * (q[iR, c] - q[iL, c])
            CL[f, c] += gd
            CR[f, c] -= gd
        CL[f, 4] += piL
        CR[f, 4] += piR

        vbar_n = 0.5 * (un[iL] + un[iR])

        # elastic block: face shear stress and A advection speed
        uA = vbar_n
        if cs > 0.0:
            denA = 0.0
            for mm in range(3):
                for kk in range(3):
                    denA += (0.5 * (alpha[iL, mm, kk] + alpha[iR, mm, kk])
                             * (q[iR, 5 + 3 * mm + kk] - q[iL, 5 + 3 * mm + kk]))
            numA = fhat0 * (e3s[iR] - e3s[iL])
            if abs(denA) > _ZERO_DEN * (1.0 + abs(numA)):
                uA = numA / denA
            for kk in range(3):
                sf = 0.0
                for mm in range(3):
                    sf += (0.5 * (q[iL, 5 + 3 * mm + kk] + q[iR, 5 + 3 * mm + kk])
                           * 0.5 * (alpha[iL, mm, axis3] + alpha[iR, mm, axis3]))
                CL[f, 1 + kk] -= sf - sig[iL, kk]
                CR[f, 1 + kk] += sf - sig[iR, kk]

        # thermal-impulse block: thermal stress, heat flux, J advection
        uJ = vbar_n
        if ch > 0.0:
            denJ = 0.0
            for kk in range(3):
                denJ += (0.5 * (beta[iL, kk] + beta[iR, kk])
                         * (q[iR, 14 + kk] - q[iL, 14 + kk]))
            numJ = fhat0 * (e4s[iR] - e4s[iL])
            if abs(denJ) > _ZERO_DEN * (1.0 + abs(numJ)):
                uJ = numJ / denJ
            bnbar = 0.5 * (bn[iL] + bn[iR])
            for kk in range(3):
                Jbar = 0.5 * (q[iL, 14 + kk] + q[iR, 14 + kk])
                of = Jbar * bnbar
                CL[f, 1 + kk] -= of - q[iL, 14 + kk] * bn[iL]
                CR[f, 1 + kk] += of - q[iR, 14 + kk] * bn[iR]
            CL[f, 4] -= bnbar - bn[iL]
            CR[f, 4] += bnbar - bn[iR]

        # central nonconservative products, identical on both sides
        for mm in range(3):
            adv = 0.0
            for kk in range(3):
                adv += (0.5 * (q[iL, 5 + 3 * mm + kk] + q[iR, 5 + 3 * mm + kk])
                        * (pe[iR, 1 + kk] - pe[iL, 1 + kk]))
            for kk in range(3):
                cA = 0.5 * uA * (q[iR, 5 + 3 * mm + kk] - q[iL, 5 + 3 * mm + kk])
                if kk == axis3:
                    cA += 0.5 * adv
                CL[f, 5 + 3 * mm + kk] -= cA
                CR[f, 5 + 3 * mm + kk] -= cA
        jdv = 0.0
        for kk in range(3):
            Jbar = 0.5 * (q[iL, 14 + kk] + q[iR, 14 + kk])
            jdv += Jbar * (pe[iR, 1 + kk] - pe[iL, 1 + kk])
        for kk in range(3):
            cJ = 0.5 * uJ * (q[iR, 14 + kk] - q[iL, 14 + kk])
            if kk == axis3:
                cJ += 0.5 * (jdv + (T[iR] - T[iL]))
            CL[f, 14 + kk] -= cJ
            CR[f, 14 + kk] -= cJ
    return 0


@njit(cache=True)
def face_sweep_batch(q, axis3, delta, g, cv, cs, ch, rho0, T0,
                     eps_const, limited, nodes, weights,
                     CL, CR, smax_f, eps_f, pi_f):
    """Run `face_sweep` over every line of a (lines, npad, 17) batch."""
    for k in range(q.shape[0]):
        err = face_sweep(q[k], axis3, delta, g, cv, cs, ch, rho0, T0,
                         eps_const, limited, nodes, weights,
                         CL[k], CR[k], smax_f[k], eps_f[k], pi_f[k])
        if err != 0:
            return err
    return 0


@njit(cache=True)
def relax_sources(q, g, cv, cs, ch, rho0, T0, tau1, tau2, out):
    """Cellwise relaxation sources for a flattened (cells, 17) state.

    Mirrors `model.relaxation_sources`; returns an error flag.
    """
    M = q.shape[0]
    for i in range(M):
        rho = q[i, 0]
        if not (rho > 0.0) or not np.isfinite(rho):
            return ERR_RHO
        a00 = q[i, 5]
        a01 = q[i, 6]
        a02 = q[i, 7]
        a10 = q[i, 8]
        a11 = q[i, 9]
        a12 = q[i, 10]
        a20 = q[i, 11]
        a21 = q[i, 12]
        a22 = q[i, 13]
        S = q[i, 4] / rho
        T = rho ** (g - 1.0) * np.exp(S / cv) / ((g - 1.0) * cv)

        out[i, 0] = 0.0
        out[i, 1] = 0.0
        out[i, 2] = 0.0
        out[i, 3] = 0.0
        dS = 0.0
        if cs > 0.0 and tau1 < _INF_TAU:
            det = (a00 * (a11 * a22 - a12 * a21)
                   - a01 * (a10 * a22 - a12 * a20)
                   + a02 * (a10 * a21 - a11 * a20))
            if det <= _DET_FLOOR:
                return ERR_DET
            # G = A^T A, devG, AdevG
            G00 = a00 * a00 + a10 * a10 + a20 * a20
            G01 = a00 * a01 + a10 * a11 + a20 * a21
            G02 = a00 * a02 + a10 * a12 + a20 * a22
            G11 = a01 * a01 + a11 * a11 + a21 * a21
            G12 = a01 * a02 + a11 * a12 + a21 * a22
            G22 = a02 * a02 + a12 * a12 + a22 * a22
            tr3 = (G00 + G11 + G22) / 3.0
            d00 = G00 - tr3
            d11 = G11 - tr3
            d22 = G22 - tr3
            coef = -3.0 * rho * det ** (5.0 / 3.0) / (rho0 * tau1)
            acs = rho * cs * cs
            for mm in range(3):
                am0 = q[i, 5 + 3 * mm + 0]
                am1 = q[i, 5 + 3 * mm + 1]
                am2 = q[i, 5 + 3 * mm + 2]
                ad0 = am0 * d00 + am1 * G01 + am2 * G02
                ad1 = am0 * G01 + am1 * d11 + am2 * G12
                ad2 = am0 * G02 + am1 * G12 + am2 * d22
                out[i, 5 + 3 * mm + 0] = coef * ad0
                out[i, 5 + 3 * mm + 1] = coef * ad1
                out[i, 5 + 3 * mm + 2] = coef * ad2
                dS -= acs * (ad0 * coef * ad0 + ad1 * coef * ad1
                             + ad2 * coef * ad2)
        else:
            for c in range(5, 14):
                out[i, c] = 0.0
        if ch > 0.0 and tau2 < _INF_TAU:
            cj = -rho * T / (rho0 * T0 * tau2)
            bch = rho * ch * ch
            for kk in range(3):
                Jk = q[i, 14 + kk]
                dJ = cj * Jk
                out[i, 14 + kk] = dJ
                dS -= bch * Jk * dJ
        else:
            out[i, 14] = 0.0
            out[i, 15] = 0.0
            out[i, 16] = 0.0
        out[i, 4] = dS / T
    return 0


@njit(cache=True)
def _elastic_energy(a, cs):
    """Volumetric-density-free specific elastic energy 0.25 cs^2 devG:devG
    for a distortion matrix packed row-major in ``a`` (length 9)."""
    G00 = a[0] * a[0] + a[3] * a[3] + a[6] * a[6]
    G01 = a[0] * a[1] + a[3] * a[4] + a[6] * a[7]
    G02 = a[0] * a[2] + a[3] * a[5] + a[6] * a[8]
    G11 = a[1] * a[1] + a[4] * a[4] + a[7] * a[7]
    G12 = a[1] * a[2] + a[4] * a[5] + a[7] * a[8]
    G22 = a[2] * a[2] + a[5] * a[5] + a[8] * a[8]
    tr3 = (G00 + G11 + G22) / 3.0
    d00 = G00 - tr3
    d11 = G11 - tr3
    d22 = G22 - tr3
    frob = (d00 * d00 + d11 * d11 + d22 * d22
            + 2.0 * (G01 * G01 + G02 * G02 + G12 * G12))
    return 0.25 * cs * cs * frob


@njit(cache=True)
def _relax_eig_root(gh, t, c):
    """Root g of g (1 + c (g - t))^2 = gh on the branch with positive
    multiplier, via a bracketed Newton iteration."""
    lo = max(0.0, t - 1.0 / c) if c > 0.0 else 0.0
    hi = max(gh, lo + 1.0)
    while hi * (1.0 + c * (hi - t)) ** 2 < gh:
        hi *= 2.0
    gg = min(max(gh, lo), hi)
    for _ in range(100):
        mm = 1.0 + c * (gg - t)
        f = gg * mm * mm - gh
        if abs(f) <= 1e-15 * max(gh, 1e-300):
            break
        if f < 0.0:
            lo = gg
        else:
            hi = gg
        der = mm * (mm + 2.0 * gg * c)
        gn = gg - f / der if der > 0.0 else lo - 1.0
        gg = gn if lo < gn < hi else 0.5 * (lo + hi)
    return gg


@njit(cache=True)
def _relax_eigendecomp(ghat, c, mfac):
    """Fill ``mfac`` with the multipliers m_i = 1 + c (g_i - tr/3) of the
    implicit distortion relaxation solve; the scalar equation for
    t = tr(G')/3 is strictly monotone, so a bracketed Newton iteration
    always converges."""
    if c <= 0.0:
        mfac[0] = mfac[1] = mfac[2] = 1.0
        return
    tlo = 0.0
    thi = max(ghat[0], max(ghat[1], ghat[2])) + 1.0
    t = (ghat[0] + ghat[1] + ghat[2]) / 3.0
    g0 = g1 = g2 = 0.0
    for _ in range(100):
        g0 = _relax_eig_root(ghat[0], t, c)
        g1 = _relax_eig_root(ghat[1], t, c)
        g2 = _relax_eig_root(ghat[2], t, c)
        psi = (g0 + g1 + g2) / 3.0 - t
        if abs(psi) <= 1e-15 * max(thi, 1.0):
            break
        if psi > 0.0:
            tlo = t
        else:
            thi = t
        dpsi = -1.0
        dpsi += 2.0 * g0 * c / (3.0 * (1.0 + c * (g0 - t) + 2.0 * g0 * c))
        dpsi += 2.0 * g1 * c / (3.0 * (1.0 + c * (g1 - t) + 2.0 * g1 * c))
        dpsi += 2.0 * g2 * c / (3.0 * (1.0 + c * (g2 - t) + 2.0 * g2 * c))
        tn = t - psi / dpsi if dpsi < 0.0 else tlo - 1.0
        t = tn if tlo < tn < thi else 0.5 * (tlo + thi)
    mfac[0] = 1.0 + c * (g0 - t)
    mfac[1] = 1.0 + c * (g1 - t)
    mfac[2] = 1.0 + c * (g2 - t)


@njit(cache=True)
def relax_update(q, dt, g, cv, cs, ch, rho0, T0, tau1, tau2):
    """Backward-Euler solve of the cellwise relaxation ODE, in place.

    Solves A' = A - dt k(A') A' devG(A') and the analogous scalar
    equation for the thermal impulse, then re-reads the entropy slot so
    the cell total energy is held exactly.  The distortion equation is
    reduced in the eigenbasis of G = A^T A to three coupled scalar
    equations solved with a Newton iteration; the solve is
    unconditionally stable and lands on the quasi-equilibrium deviation
    even when dt is far larger than the relaxation times.  Returns an
    error flag (0 on success).
    """
    act1 = cs > 0.0 and tau1 < _INF_TAU
    act2 = ch > 0.0 and tau2 < _INF_TAU
    if not act1 and not act2:
        return 0
    M = q.shape[0]
    a = np.empty(9)
    J = np.empty(3)
    G = np.empty((3, 3))
    minv = np.empty((3, 3))
    mfac = np.empty(3)
    anew = np.empty(9)
    for i in range(M):
        rho = q[i, 0]
        if not (rho > 0.0) or not np.isfinite(rho):
            return ERR_RHO
        S = q[i, 4] / rho
        e1 = rho ** g * np.exp(S / cv) / (g - 1.0)
        for c in range(9):
            a[c] = q[i, 5 + c]
        for c in range(3):
            J[c] = q[i, 14 + c]
        e3 = rho * _elastic_energy(a, cs) if act1 else 0.0
        e4 = 0.5 * ch * ch * rho * (J[0] * J[0] + J[1] * J[1]
                                    + J[2] * J[2]) if act2 else 0.0
        eint = e1 + e3 + e4
        if not np.isfinite(eint) or eint <= 0.0:
            return ERR_DUAL

        if act1:
            det = (a[0] * (a[4] * a[8] - a[5] * a[7])
                   - a[1] * (a[3] * a[8] - a[5] * a[6])
                   + a[2] * (a[3] * a[7] - a[4] * a[6]))
            if det <= _DET_FLOOR:
                return ERR_DET
            G[0, 0] = a[0] * a[0] + a[3] * a[3] + a[6] * a[6]
            G[0, 1] = a[0] * a[1] + a[3] * a[4] + a[6] * a[7]
            G[0, 2] = a[0] * a[2] + a[3] * a[5] + a[6] * a[8]
            G[1, 1] = a[1] * a[1] + a[4] * a[4] + a[7] * a[7]
            G[1, 2] = a[1] * a[2] + a[4] * a[5] + a[7] * a[8]
            G[2, 2] = a[2] * a[2] + a[5] * a[5] + a[8] * a[8]
            G[1, 0] = G[0, 1]
            G[2, 0] = G[0, 2]
            G[2, 1] = G[1, 2]
            ghat, Q = np.linalg.eigh(G)
            cc = dt * 3.0 * rho * det ** (5.0 / 3.0) / (rho0 * tau1)
            # iterate cc to consistency with det(A') = det(A) / det(M)
            detm_old = 1.0
            for _pass in range(50):
                _relax_eigendecomp(ghat, cc, mfac)
                detm = mfac[0] * mfac[1] * mfac[2]
                if detm <= 0.0 or not np.isfinite(detm):
                    return ERR_DET
                cc = dt * 3.0 * rho * (det / detm) ** (5.0 / 3.0) \
                    / (rho0 * tau1)
                if abs(detm - detm_old) <= 1e-14 * detm:
                    break
                detm_old = detm
            # A' = A Q diag(1/m) Q^T
            for c in range(3):
                for d in range(3):
                    s = 0.0
                    for e in range(3):
                        s += Q[c, e] * Q[d, e] / mfac[e]
                    minv[c, d] = s
            for mm in range(3):
                for d in range(3):
                    s = 0.0
                    for e in range(3):
                        s += a[3 * mm + e] * minv[e, d]
                    anew[3 * mm + d] = s
            for c in range(9):
                a[c] = anew[c]
            e3 = rho * _elastic_energy(a, cs)

        if act2 and e4 > 0.0:
            # x (1 + b (estar - x))^2 = e4 for the relaxed impulse energy
            estar = eint - e3
            b = dt / (cv * rho0 * T0 * tau2)
            x = e4
            for _ in range(60):
                m2 = 1.0 + b * (estar - x)
                f = x * m2 * m2 - e4
                if abs(f) <= 1e-15 * e4:
                    break
                df = m2 * m2 - 2.0 * x * m2 * b
                if df == 0.0:
                    df = 1.0
                x = min(max(x - f / df, 0.0), e4)
            m2 = 1.0 + b * (estar - x)
            if m2 <= 0.0 or not np.isfinite(m2):
                return ERR_DUAL
            for c in range(3):
                J[c] /= m2
            e4 = 0.5 * ch * ch * rho * (J[0] * J[0] + J[1] * J[1]
                                        + J[2] * J[2])

        e1f = eint - e3 - e4
        if e1f <= 0.0:
            return ERR_DUAL
        Sf = cv * (np.log((g - 1.0) * e1f) - g * np.log(rho))
        q[i, 4] = rho * Sf
        for c in range(9):
            q[i, 5 + c] = a[c]
        for c in range(3):
            q[i, 14 + c] = J[c]
    return 0
