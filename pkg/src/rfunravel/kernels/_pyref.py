"""Pure-Python mirror of the compiled trajectory kernels.

Selected at import time when the extension is unavailable.  The
arithmetic (down to operation order) matches ``_sse.pyx`` so that both
backends produce bit-identical trajectories from the same random
numbers.  Expect roughly two orders of magnitude less throughput; the
benchmark in ``benchmarks/bench_kernels.py`` quantifies the gap.
"""

from math import sqrt


def sse_trajectory(gamma, omega, ur, ui, a, b, c2, s2, dt, noise,
                   gr, gi, er, ei, record_stride, record):
    n = noise.shape[0]
    j = 0
    sqdt = sqrt(dt)
    sg = sqrt(gamma)
    ho = 0.5 * omega
    hg = 0.5 * gamma
    for k in range(n):
        sr = gr * er + gi * ei
        si = gr * ei - gi * er
        ar_ = gamma * (ur * sr - ui * si + sr)
        ai_ = gamma * (ur * si + ui * sr - si)
        n1 = noise[k, 0]
        n2 = noise[k, 1]
        dwr = sqdt * (c2 * a * n1 - s2 * b * n2)
        dwi = sqdt * (s2 * a * n1 + c2 * b * n2)
        jr = ar_ * dt + sg * dwr
        ji = ai_ * dt + sg * dwi
        dgr = ho * ei * dt + jr * er - ji * ei
        dgi = -ho * er * dt + jr * ei + ji * er
        der = ho * gi * dt - hg * er * dt
        dei = -ho * gr * dt - hg * ei * dt
        gr += dgr
        gi += dgi
        er += der
        ei += dei
        nrm = sqrt(gr * gr + gi * gi + er * er + ei * ei)
        gr /= nrm
        gi /= nrm
        er /= nrm
        ei /= nrm
        if (k + 1) % record_stride == 0:
            sr = gr * er + gi * ei
            si = gr * ei - gi * er
            record[j, 0] = 2.0 * sr
            record[j, 1] = -2.0 * si
            record[j, 2] = er * er + ei * ei - gr * gr - gi * gi
            j += 1
    return gr, gi, er, ei


def adaptive_trajectory(gamma, omega, dt, uniforms, gr, gi, er, ei, mu,
                        record_stride, record, jump_steps):
    n = uniforms.shape[0]
    j = 0
    nj = 0
    ho = 0.5 * omega
    hg = 0.5 * gamma
    for k in range(n):
        pe = er * er + ei * ei
        sr = gr * er + gi * ei
        rate = gamma * (pe + 2.0 * mu * sr + mu * mu)
        if uniforms[k] < rate * dt:
            ngr = er + mu * gr
            ngi = ei + mu * gi
            ner = mu * er
            nei = mu * ei
            nrm = sqrt(ngr * ngr + ngi * ngi + ner * ner + nei * nei)
            gr = ngr / nrm
            gi = ngi / nrm
            er = ner / nrm
            ei = nei / nrm
            mu = -mu
            jump_steps[nj] = k
            nj += 1
        else:
            mu2g = hg * mu * mu
            ngr = gr + dt * (ho * ei - gamma * mu * er - mu2g * gr)
            ngi = gi + dt * (-ho * er - gamma * mu * ei - mu2g * gi)
            ner = er + dt * (ho * gi - hg * er - mu2g * er)
            nei = ei + dt * (-ho * gr - hg * ei - mu2g * ei)
            nrm = sqrt(ngr * ngr + ngi * ngi + ner * ner + nei * nei)
            gr = ngr / nrm
            gi = ngi / nrm
            er = ner / nrm
            ei = nei / nrm
        if (k + 1) % record_stride == 0:
            sr = gr * er + gi * ei
            si = gr * ei - gi * er
            record[j, 0] = 2.0 * sr
            record[j, 1] = -2.0 * si
            record[j, 2] = er * er + ei * ei - gr * gr - gi * gi
            record[j, 3] = mu
            j += 1
    return nj, gr, gi, er, ei, mu
