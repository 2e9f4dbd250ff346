# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled simulation kernel; statement-for-statement twin of ``_fallback.py``."""

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport log
from numpy.random cimport bitgen_t

import numpy as np

BACKEND = "cython"

cdef enum:
    OV = 0
    ONV = 1
    RF = 2
    NRF = 3
    CR = 4
    PM = 5

# label codes, see tables.LABELS
cdef enum:
    L_RF = 0
    L_NRF = 1
    L_R = 2
    L_PM = 3
    L_RF_CR = 4
    L_NRF_NU = 5
    L_R_CR = 6
    L_R_NU = 7
    L_R_PM = 8
    L_R_NVP = 9
    L_R_RF_CR = 10
    L_R_NRF_NU = 11


cdef inline double _u(bitgen_t *rng) noexcept nogil:
    return rng.next_double(rng.state)


cdef inline int _pick_row(const double[:, ::1] tab, int row, double u) noexcept nogil:
    cdef int n = tab.shape[1]
    cdef double x = u * tab[row, n - 1]
    cdef int k
    for k in range(n):
        if x < tab[row, k]:
            return k
    k = n - 1
    while k > 0 and tab[row, k] == tab[row, k - 1]:
        k -= 1
    return k


cdef inline int _pick_vec(const double[::1] cum, double u) noexcept nogil:
    cdef int n = cum.shape[0]
    cdef double x = u * cum[n - 1]
    cdef int k
    for k in range(n):
        if x < cum[k]:
            return k
    k = n - 1
    while k > 0 and cum[k] == cum[k - 1]:
        k -= 1
    return k


cdef void _run(
    bint discrete, int crit, double horizon, double warmup, double omega0, double rew_broken,
    const int[::1] level, const double[::1] stay_p,
    const double[:, ::1] T, const double[:, ::1] L, const double[:, ::1] Vt,
    const double[:, ::1] S1, const double[:, ::1] S2, const double[:, ::1] W, const double[:, ::1] Ct,
    const double[::1] alpha, const double[::1] gamma, const double[::1] clock0,
    const double[::1] omega, const double[::1] nu, const double[::1] beta1, const double[::1] beta2,
    const double[::1] rew_ov, const double[::1] rew_onv, const double[::1] rew_cr, const double[::1] rew_pm,
    bitgen_t *rng, double[::1] occ, long long[::1] counts, double *reward_out,
) noexcept nogil:
    cdef int m = T.shape[0], t = L.shape[0], d = Ct.shape[0], v = Vt.shape[0]
    cdef int z1 = S1.shape[0], z2 = S2.shape[0]
    cdef int i, j, u, vv, r, macro, label, out, k, kc, kd, kv, ks, lev
    cdef bint counting = False, op
    cdef double reward = 0.0, rate, now = 0.0, end, a, b, x
    cdef double t_tot, l_tot, x_tot, total
    cdef long long n = 0

    i = _pick_vec(alpha, _u(rng))
    j = _pick_vec(clock0, _u(rng))
    u = _pick_vec(omega, _u(rng))
    vv = _pick_vec(nu, _u(rng))
    r = 0
    macro = OV

    while True:
        if macro == OV:
            rate = rew_ov[i * d + u]
        elif macro == ONV:
            rate = rew_onv[i * d + u]
        elif macro == CR:
            rate = rew_cr[r]
        elif macro == PM:
            rate = rew_pm[r]
        else:
            rate = rew_broken
        label = -1
        out = -1

        if discrete:
            if n >= horizon:
                break
            counting = n >= warmup
            if counting:
                occ[macro] += 1.0
                reward += rate
            n += 1
            if macro <= ONV:
                k = _pick_row(T, i, _u(rng))
                kc = _pick_row(L, j, _u(rng))
                if kc < t:
                    j = kc
                    out = k
                else:
                    j = _pick_vec(gamma, _u(rng))
                    if _u(rng) < omega0:
                        out = m + 1
                    else:
                        kd = _pick_row(Ct, u, _u(rng))
                        if kd == d:
                            out = m + 1
                        else:
                            u = kd
                            out = k if k >= m else _pick_row(W, k, _u(rng))
                if macro == OV:
                    kv = _pick_row(Vt, vv, _u(rng))
                    if kv < v:
                        vv = kv
                        if out == m:
                            macro = RF
                            label = L_RF
                        elif out == m + 1:
                            macro = NRF
                            label = L_NRF
                        else:
                            i = out
                    elif out == m:
                        macro = CR
                        r = _pick_vec(beta1, _u(rng))
                        label = L_R_RF_CR
                    elif out == m + 1:
                        i = _pick_vec(alpha, _u(rng))
                        u = _pick_vec(omega, _u(rng))
                        vv = _pick_vec(nu, _u(rng))
                        label = L_R_NRF_NU
                    else:
                        i = out
                        lev = level[i]
                        if lev == crit:
                            macro = PM
                            r = _pick_vec(beta2, _u(rng))
                            label = L_R_PM
                        elif _u(rng) < stay_p[lev]:
                            vv = _pick_vec(nu, _u(rng))
                            label = L_R_NVP
                        else:
                            macro = ONV
                            label = L_R
                    out = -1
            else:
                kc = _pick_row(L, j, _u(rng))
                j = kc if kc < t else _pick_vec(gamma, _u(rng))
                if macro == RF or macro == NRF:
                    kv = _pick_row(Vt, vv, _u(rng))
                    if kv < v:
                        vv = kv
                    elif macro == RF:
                        macro = CR
                        r = _pick_vec(beta1, _u(rng))
                        label = L_R_CR
                    else:
                        i = _pick_vec(alpha, _u(rng))
                        u = _pick_vec(omega, _u(rng))
                        vv = _pick_vec(nu, _u(rng))
                        macro = OV
                        label = L_R_NU
                elif macro == CR:
                    ks = _pick_row(S1, r, _u(rng))
                    if ks < z1:
                        r = ks
                    else:
                        i = _pick_vec(alpha, _u(rng))
                        u = _pick_vec(omega, _u(rng))
                        vv = _pick_vec(nu, _u(rng))
                        macro = OV
                else:
                    ks = _pick_row(S2, r, _u(rng))
                    if ks < z2:
                        r = ks
                    else:
                        i = _pick_vec(alpha, _u(rng))
                        u = _pick_vec(omega, _u(rng))
                        vv = _pick_vec(nu, _u(rng))
                        macro = OV
        else:
            op = macro <= ONV
            t_tot = T[i, m + 1] if op else 0.0
            l_tot = L[j, t]
            if macro == OV or macro == RF or macro == NRF:
                x_tot = Vt[vv, v]
            elif macro == CR:
                x_tot = S1[r, z1]
            elif macro == PM:
                x_tot = S2[r, z2]
            else:
                x_tot = 0.0
            total = t_tot + l_tot + x_tot
            end = now - log(1.0 - _u(rng)) / total
            a = now if now > warmup else warmup
            b = end if end < horizon else horizon
            if b > a:
                occ[macro] += b - a
                reward += rate * (b - a)
            if end >= horizon:
                break
            now = end
            counting = now >= warmup
            x = _u(rng) * total
            if op and x < t_tot:
                out = _pick_row(T, i, _u(rng))
            elif x_tot == 0.0 or x - t_tot < l_tot:
                kc = _pick_row(L, j, _u(rng))
                if kc < t:
                    j = kc
                else:
                    j = _pick_vec(gamma, _u(rng))
                    if op:
                        if _u(rng) < omega0:
                            out = m + 1
                        else:
                            kd = _pick_row(Ct, u, _u(rng))
                            if kd == d:
                                out = m + 1
                            else:
                                u = kd
                                out = _pick_row(W, i, _u(rng))
            elif macro == OV or macro == RF or macro == NRF:
                kv = _pick_row(Vt, vv, _u(rng))
                if kv < v:
                    vv = kv
                elif macro == OV:
                    lev = level[i]
                    if lev == crit:
                        macro = PM
                        r = _pick_vec(beta2, _u(rng))
                        label = L_R_PM
                    elif _u(rng) < stay_p[lev]:
                        vv = _pick_vec(nu, _u(rng))
                        label = L_R_NVP
                    else:
                        macro = ONV
                        label = L_R
                elif macro == RF:
                    macro = CR
                    r = _pick_vec(beta1, _u(rng))
                    label = L_R_CR
                else:
                    i = _pick_vec(alpha, _u(rng))
                    u = _pick_vec(omega, _u(rng))
                    vv = _pick_vec(nu, _u(rng))
                    macro = OV
                    label = L_R_NU
            elif macro == CR:
                ks = _pick_row(S1, r, _u(rng))
                if ks < z1:
                    r = ks
                else:
                    i = _pick_vec(alpha, _u(rng))
                    u = _pick_vec(omega, _u(rng))
                    vv = _pick_vec(nu, _u(rng))
                    macro = OV
            else:
                ks = _pick_row(S2, r, _u(rng))
                if ks < z2:
                    r = ks
                else:
                    i = _pick_vec(alpha, _u(rng))
                    u = _pick_vec(omega, _u(rng))
                    vv = _pick_vec(nu, _u(rng))
                    macro = OV
            if op and out >= 0 and macro == OV:
                if out == m:
                    macro = RF
                    label = L_RF
                elif out == m + 1:
                    macro = NRF
                    label = L_NRF
                else:
                    i = out
                out = -1

        # operational outcome while the repairperson is on site
        if out >= 0 and macro == ONV:
            if out == m:
                macro = CR
                r = _pick_vec(beta1, _u(rng))
                label = L_RF_CR
            elif out == m + 1:
                i = _pick_vec(alpha, _u(rng))
                u = _pick_vec(omega, _u(rng))
                vv = _pick_vec(nu, _u(rng))
                macro = OV
                label = L_NRF_NU
            else:
                i = out
                if level[i] == crit:
                    macro = PM
                    r = _pick_vec(beta2, _u(rng))
                    label = L_PM
        if label >= 0 and counting:
            counts[label] += 1
    reward_out[0] = reward


def simulate_one(tab, double horizon, double warmup, bitgen):
    """One replication; returns (occupancy[6], label counts[12], accumulated reward)."""
    cdef bitgen_t *rng = <bitgen_t *> PyCapsule_GetPointer(bitgen.capsule, "BitGenerator")
    occ = np.zeros(6)
    counts = np.zeros(12, dtype=np.int64)
    cdef double[::1] occ_v = occ
    cdef long long[::1] counts_v = counts
    cdef double reward = 0.0
    cdef const int[::1] level = tab.level
    cdef const double[::1] stay_p = tab.stay_p
    cdef const double[:, ::1] T = tab.T_tab, L = tab.L_tab, Vt = tab.V_tab
    cdef const double[:, ::1] S1 = tab.S1_tab, S2 = tab.S2_tab, W = tab.W_tab, Ct = tab.C_tab
    cdef const double[::1] alpha = tab.alpha_cum, gamma = tab.gamma_cum, clock0 = tab.clock0_cum
    cdef const double[::1] omega = tab.omega_cum, nu = tab.nu_cum
    cdef const double[::1] beta1 = tab.beta1_cum, beta2 = tab.beta2_cum
    cdef const double[::1] rew_ov = tab.rew_ov, rew_onv = tab.rew_onv
    cdef const double[::1] rew_cr = tab.rew_cr, rew_pm = tab.rew_pm
    cdef bint discrete = tab.discrete
    cdef int crit = tab.K - 1
    cdef double omega0 = tab.omega0, rew_broken = tab.rew_broken
    with bitgen.lock:
        with nogil:
            _run(discrete, crit, horizon, warmup, omega0, rew_broken, level, stay_p,
                 T, L, Vt, S1, S2, W, Ct, alpha, gamma, clock0, omega, nu, beta1, beta2,
                 rew_ov, rew_onv, rew_cr, rew_pm, rng, occ_v, counts_v, &reward)
    return occ.tolist(), counts.tolist(), reward
