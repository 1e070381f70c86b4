# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled inner loops for the stochastic trajectory integrators.

Two kernels: the Euler-Maruyama step of the diffusive unraveling and the
first-order quantum-jump step of the adaptive interferometric scheme.
Both consume pregenerated random numbers so results are bit-identical to
the pure-Python mirror in ``_pyref``.  State amplitudes are carried as
explicit real/imaginary doubles to keep the arithmetic order fixed.
"""

from libc.math cimport sqrt


def sse_trajectory(double gamma, double omega, double ur, double ui,
                   double a, double b, double c2, double s2,
                   double dt, double[:, ::1] noise,
                   double gr, double gi, double er, double ei,
                   Py_ssize_t record_stride, double[:, ::1] record):
    """Advance the normalized amplitudes through len(noise) steps.

    noise[k] holds two standard normals per step.  After every
    ``record_stride``-th step the Bloch vector (u, v, w) is written into
    ``record``.  Returns the final amplitudes.
    """
    cdef Py_ssize_t n = noise.shape[0]
    cdef Py_ssize_t k, j = 0
    cdef double sqdt = sqrt(dt)
    cdef double sg = sqrt(gamma)
    cdef double ho = 0.5 * omega
    cdef double hg = 0.5 * gamma
    cdef double sr, si, ar_, ai_, dwr, dwi, jr, ji
    cdef double dgr, dgi, der, dei, nrm, n1, n2

    with nogil:
        for k in range(n):
            # <sigma> = conj(g) * e
            sr = gr * er + gi * ei
            si = gr * ei - gi * er
            # drift part of J: gamma * (upsilon <sigma> + <sigma^dagger>)
            ar_ = gamma * (ur * sr - ui * si + sr)
            ai_ = gamma * (ur * si + ui * sr - si)
            # correlated complex noise increment
            n1 = noise[k, 0]
            n2 = noise[k, 1]
            dwr = sqdt * (c2 * a * n1 - s2 * b * n2)
            dwi = sqdt * (s2 * a * n1 + c2 * b * n2)
            jr = ar_ * dt + sg * dwr
            ji = ai_ * dt + sg * dwi
            # dg = -i (omega/2) e dt + (J dt) e ;  de = -i (omega/2) g dt - (gamma/2) e dt
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


def adaptive_trajectory(double gamma, double omega, double dt,
                        double[::1] uniforms,
                        double gr, double gi, double er, double ei,
                        double mu,
                        Py_ssize_t record_stride, double[:, ::1] record,
                        long long[::1] jump_steps):
    """First-order quantum-jump integration with jump operator
    sqrt(gamma) (sigma + mu), flipping mu on every detection.

    Records (u, v, w, mu) every ``record_stride`` steps and the step
    indices of the jumps.  Returns (n_jumps, gr, gi, er, ei, mu).
    """
    cdef Py_ssize_t n = uniforms.shape[0]
    cdef Py_ssize_t k, j = 0, nj = 0
    cdef double ho = 0.5 * omega
    cdef double hg = 0.5 * gamma
    cdef double pe, sr, si, rate, mu2g
    cdef double ngr, ngi, ner, nei, nrm

    with nogil:
        for k in range(n):
            pe = er * er + ei * ei
            sr = gr * er + gi * ei        # Re<sigma>
            rate = gamma * (pe + 2.0 * mu * sr + mu * mu)
            if uniforms[k] < rate * dt:
                # apply (sigma + mu) and renormalize
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
                # no-jump drift: -iH - (gamma/2) n_e - gamma mu sigma - (gamma/2) mu^2
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
