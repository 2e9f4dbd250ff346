"""Pure-Python simulation kernel.

Mirrors ``_kernel.pyx`` statement for statement and draws uniforms from the
same bit generator in the same order, so both produce identical trajectories.
"""

from __future__ import annotations

import math

import numpy as np

from .tables import CR, NRF, ONV, OV, PM, RF

BACKEND = "python"

_CHUNK = 4096
_SCALE = 1.0 / 9007199254740992.0

# label codes, see tables.LABELS
L_RF, L_NRF, L_R, L_PM, L_RF_CR, L_NRF_NU, L_R_CR, L_R_NU, L_R_PM, L_R_NVP, L_R_RF_CR, L_R_NRF_NU = range(12)


class _Uniforms:
    """Doubles in [0, 1) from the top 53 bits of each raw 64-bit draw."""

    def __init__(self, bitgen):
        self.bitgen = bitgen
        self.buf: list[float] = []
        self.pos = 0

    def __call__(self) -> float:
        if self.pos == len(self.buf):
            raw = self.bitgen.random_raw(_CHUNK)
            self.buf = ((raw >> np.uint64(11)).astype(np.float64) * _SCALE).tolist()
            self.pos = 0
        x = self.buf[self.pos]
        self.pos += 1
        return x


def _pick(row, u: float) -> int:
    n = len(row)
    x = u * row[n - 1]
    for k in range(n):
        if x < row[k]:
            return k
    k = n - 1
    while k > 0 and row[k] == row[k - 1]:
        k -= 1
    return k


def simulate_one(tab, horizon: float, warmup: float, bitgen):
    """One replication; returns (occupancy[6], label counts[12], accumulated reward)."""
    U = _Uniforms(bitgen)
    T = tab.T_tab.tolist()
    L = tab.L_tab.tolist()
    Vt = tab.V_tab.tolist()
    S1 = tab.S1_tab.tolist()
    S2 = tab.S2_tab.tolist()
    W = tab.W_tab.tolist()
    Ct = tab.C_tab.tolist()
    alpha, gamma, clock0 = tab.alpha_cum.tolist(), tab.gamma_cum.tolist(), tab.clock0_cum.tolist()
    omega, nu = tab.omega_cum.tolist(), tab.nu_cum.tolist()
    beta1, beta2 = tab.beta1_cum.tolist(), tab.beta2_cum.tolist()
    level, stay_p = tab.level.tolist(), tab.stay_p.tolist()
    rew_ov, rew_onv = tab.rew_ov.tolist(), tab.rew_onv.tolist()
    rew_cr, rew_pm = tab.rew_cr.tolist(), tab.rew_pm.tolist()
    rew_broken, omega0 = tab.rew_broken, tab.omega0
    m, t, d, v = len(T), len(L), len(Ct), len(Vt)
    z1, z2 = len(S1), len(S2)
    crit = tab.K - 1
    discrete = tab.discrete

    occ = [0.0] * 6
    counts = [0] * 12
    reward = 0.0

    i = _pick(alpha, U())
    j = _pick(clock0, U())
    u = _pick(omega, U())
    vv = _pick(nu, U())
    r = 0
    macro = OV

    now = 0.0
    n = 0
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
                k = _pick(T[i], U())
                kc = _pick(L[j], U())
                if kc < t:
                    j = kc
                    out = k
                else:
                    j = _pick(gamma, U())
                    if U() < omega0:
                        out = m + 1
                    else:
                        kd = _pick(Ct[u], U())
                        if kd == d:
                            out = m + 1
                        else:
                            u = kd
                            out = k if k >= m else _pick(W[k], U())
                if macro == OV:
                    kv = _pick(Vt[vv], U())
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
                        r = _pick(beta1, U())
                        label = L_R_RF_CR
                    elif out == m + 1:
                        i = _pick(alpha, U())
                        u = _pick(omega, U())
                        vv = _pick(nu, U())
                        label = L_R_NRF_NU
                    else:
                        i = out
                        lev = level[i]
                        if lev == crit:
                            macro = PM
                            r = _pick(beta2, U())
                            label = L_R_PM
                        elif U() < stay_p[lev]:
                            vv = _pick(nu, U())
                            label = L_R_NVP
                        else:
                            macro = ONV
                            label = L_R
                    out = -1
            else:
                kc = _pick(L[j], U())
                j = kc if kc < t else _pick(gamma, U())
                if macro == RF or macro == NRF:
                    kv = _pick(Vt[vv], U())
                    if kv < v:
                        vv = kv
                    elif macro == RF:
                        macro = CR
                        r = _pick(beta1, U())
                        label = L_R_CR
                    else:
                        i = _pick(alpha, U())
                        u = _pick(omega, U())
                        vv = _pick(nu, U())
                        macro = OV
                        label = L_R_NU
                elif macro == CR:
                    ks = _pick(S1[r], U())
                    if ks < z1:
                        r = ks
                    else:
                        i = _pick(alpha, U())
                        u = _pick(omega, U())
                        vv = _pick(nu, U())
                        macro = OV
                else:
                    ks = _pick(S2[r], U())
                    if ks < z2:
                        r = ks
                    else:
                        i = _pick(alpha, U())
                        u = _pick(omega, U())
                        vv = _pick(nu, U())
                        macro = OV
        else:
            op = macro <= ONV
            t_tot = T[i][m + 1] if op else 0.0
            l_tot = L[j][t]
            if macro == OV or macro == RF or macro == NRF:
                x_tot = Vt[vv][v]
            elif macro == CR:
                x_tot = S1[r][z1]
            elif macro == PM:
                x_tot = S2[r][z2]
            else:
                x_tot = 0.0
            total = t_tot + l_tot + x_tot
            end = now - math.log(1.0 - U()) / total
            a = now if now > warmup else warmup
            b = end if end < horizon else horizon
            if b > a:
                occ[macro] += b - a
                reward += rate * (b - a)
            if end >= horizon:
                break
            now = end
            counting = now >= warmup
            x = U() * total
            if op and x < t_tot:
                out = _pick(T[i], U())
            elif x_tot == 0.0 or x - t_tot < l_tot:
                kc = _pick(L[j], U())
                if kc < t:
                    j = kc
                else:
                    j = _pick(gamma, U())
                    if op:
                        if U() < omega0:
                            out = m + 1
                        else:
                            kd = _pick(Ct[u], U())
                            if kd == d:
                                out = m + 1
                            else:
                                u = kd
                                out = _pick(W[i], U())
            elif macro == OV or macro == RF or macro == NRF:
                kv = _pick(Vt[vv], U())
                if kv < v:
                    vv = kv
                elif macro == OV:
                    lev = level[i]
                    if lev == crit:
                        macro = PM
                        r = _pick(beta2, U())
                        label = L_R_PM
                    elif U() < stay_p[lev]:
                        vv = _pick(nu, U())
                        label = L_R_NVP
                    else:
                        macro = ONV
                        label = L_R
                elif macro == RF:
                    macro = CR
                    r = _pick(beta1, U())
                    label = L_R_CR
                else:
                    i = _pick(alpha, U())
                    u = _pick(omega, U())
                    vv = _pick(nu, U())
                    macro = OV
                    label = L_R_NU
            elif macro == CR:
                ks = _pick(S1[r], U())
                if ks < z1:
                    r = ks
                else:
                    i = _pick(alpha, U())
                    u = _pick(omega, U())
                    vv = _pick(nu, U())
                    macro = OV
            else:
                ks = _pick(S2[r], U())
                if ks < z2:
                    r = ks
                else:
                    i = _pick(alpha, U())
                    u = _pick(omega, U())
                    vv = _pick(nu, U())
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
                r = _pick(beta1, U())
                label = L_RF_CR
            elif out == m + 1:
                i = _pick(alpha, U())
                u = _pick(omega, U())
                vv = _pick(nu, U())
                macro = OV
                label = L_NRF_NU
            else:
                i = out
                if level[i] == crit:
                    macro = PM
                    r = _pick(beta2, U())
                    label = L_PM
        if label >= 0 and counting:
            counts[label] += 1
    return occ, counts, reward
