"""Numba kernels for the built-in models.

Every kernel takes a ``numpy.random.Generator`` and consumes it exactly as
the equivalent per-step Python path would, so batched and step-by-step runs
are bit-identical under the same seed. The single-state step and the
multi-state step (one shared driver applied to several states) draw the same
variates in the same order.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

GARCH = 0
GTD1 = 1
MTGI1 = 2

NORMAL = 0
UNIFORM = 1
ONES = 2
RADEMACHER = 3

PARETO = 0
EXPONENTIAL = 1
DETERMINISTIC = 2

# offsets into the M_t/GI/1 parameter vector
MT_LAM_STAR = 0
MT_DELTA = 1
MT_SERVICE_KIND = 2
MT_SERVICE_PARAM = 3
MT_RATE = 4

_SQRT12 = math.sqrt(12.0)

_jit = njit(cache=True, nogil=True)


# ---------------------------------------------------------------- sums


@_jit
def component_draw(rng, kind):
    if kind == NORMAL:
        return rng.standard_normal()
    elif kind == UNIFORM:
        return _SQRT12 * (rng.random() - 0.5)
    elif kind == ONES:
        return 1.0
    else:
        return 1.0 if rng.random() < 0.5 else -1.0


@_jit
def sum_fresh(rng, kind, sigma, comps):
    s = 0.0
    for j in range(comps.size):
        comps[j] = sigma[j] * component_draw(rng, kind)
        s += comps[j]
    return s


@_jit
def sum_redraw(rng, kind, sigma, comps, i, s):
    for j in range(i):
        s -= comps[j]
        comps[j] = sigma[j] * component_draw(rng, kind)
        s += comps[j]
    return s


@_jit
def sum_run_schedule(rng, kind, sigma, comps, sizes, out):
    s = sum_fresh(rng, kind, sigma, comps)
    out[0] = s
    for k in range(sizes.size):
        s = sum_redraw(rng, kind, sigma, comps, sizes[k], s)
        out[k + 1] = s
    return s


@_jit
def sum_tails(rng, kind, sigma, i, size):
    out = np.empty(size)
    for r in range(size):
        s = 0.0
        for j in range(i, sigma.size):
            s += sigma[j] * component_draw(rng, kind)
        out[r] = s
    return out


@_jit
def sum_mixed(rng, kind, sigma, i, tails):
    out = np.empty_like(tails)
    for r in range(tails.shape[0]):
        s = 0.0
        for j in range(i):
            s += sigma[j] * component_draw(rng, kind)
        for c in range(tails.shape[1]):
            out[r, c] = s + tails[r, c]
    return out


@_jit
def sum_coupled(rng, kind, sigma, m_fine, m_coarse, size):
    fine = np.empty(size)
    coarse = np.empty(size)
    for r in range(size):
        s = 0.0
        sc = 0.0
        for j in range(m_fine):
            s += sigma[j] * component_draw(rng, kind)
            if j == m_coarse - 1:
                sc = s
        fine[r] = s
        coarse[r] = sc
    return fine, coarse


# ---------------------------------------------------------------- chains


@_jit
def cosine_rate(p, off, s):
    """Rate ``(base + sum a_k cos(pi s / h_k)) * (1 - 1/ln(s+2) if damped)``."""
    lam = p[off]
    n_terms = int(p[off + 2])
    for k in range(n_terms):
        lam += p[off + 3 + 2 * k] * math.cos(math.pi * s / p[off + 4 + 2 * k])
    if p[off + 1] != 0.0:
        lam *= 1.0 - 1.0 / math.log(s + 2.0)
    return lam


@_jit
def service_draw(rng, kind, param):
    if kind == PARETO:
        u = rng.random()
        return param * ((1.0 - u) ** (-1.0 / 3.0) - 1.0)
    elif kind == EXPONENTIAL:
        return param * rng.standard_exponential()
    else:
        return param


@_jit
def _mtgi1_step(rng, j, w, p):
    lam_star = p[MT_LAM_STAR]
    delta = p[MT_DELTA]
    start = j * delta
    pos = 0.0
    last = 0.0
    while True:
        pos += rng.standard_exponential() / lam_star
        if pos > delta:
            break
        if rng.random() * lam_star < cosine_rate(p, MT_RATE, start + pos):
            s = service_draw(rng, int(p[MT_SERVICE_KIND]), p[MT_SERVICE_PARAM])
            w = max(w - (pos - last), 0.0) + s
            last = pos
    return max(w - (delta - last), 0.0)


@_jit
def _mtgi1_step_multi(rng, j, ws, p):
    lam_star = p[MT_LAM_STAR]
    delta = p[MT_DELTA]
    start = j * delta
    pos = 0.0
    last = 0.0
    while True:
        pos += rng.standard_exponential() / lam_star
        if pos > delta:
            break
        if rng.random() * lam_star < cosine_rate(p, MT_RATE, start + pos):
            s = service_draw(rng, int(p[MT_SERVICE_KIND]), p[MT_SERVICE_PARAM])
            for k in range(ws.size):
                ws[k] = max(ws[k] - (pos - last), 0.0) + s
            last = pos
    for k in range(ws.size):
        ws[k] = max(ws[k] - (delta - last), 0.0)


@_jit
def chain_step(kind, rng, j, x, p):
    if kind == GARCH:
        y = rng.standard_normal()
        return p[0] + p[1] * x * y * y + p[2] * x
    elif kind == GTD1:
        a = rng.poisson(p[j])
        return max(x + a - 1.0, 0.0)
    else:
        return _mtgi1_step(rng, j, x, p)


@_jit
def chain_step_multi(kind, rng, j, xs, p):
    if kind == GARCH:
        y = rng.standard_normal()
        for k in range(xs.size):
            xs[k] = p[0] + p[1] * xs[k] * y * y + p[2] * xs[k]
    elif kind == GTD1:
        a = rng.poisson(p[j])
        for k in range(xs.size):
            xs[k] = max(xs[k] + a - 1.0, 0.0)
    else:
        _mtgi1_step_multi(rng, j, xs, p)


@_jit
def chain_draw(kind, rng, j, p):
    """Driver for step j as a flat array; M_t/GI/1 stores (offset, service) pairs."""
    if kind == GARCH:
        out = np.empty(1)
        out[0] = rng.standard_normal()
        return out
    elif kind == GTD1:
        out = np.empty(1)
        out[0] = rng.poisson(p[j]) - 1.0
        return out
    else:
        lam_star = p[MT_LAM_STAR]
        delta = p[MT_DELTA]
        start = j * delta
        pos = 0.0
        acc = []
        while True:
            pos += rng.standard_exponential() / lam_star
            if pos > delta:
                break
            if rng.random() * lam_star < cosine_rate(p, MT_RATE, start + pos):
                acc.append(pos)
                acc.append(service_draw(rng, int(p[MT_SERVICE_KIND]), p[MT_SERVICE_PARAM]))
        out = np.empty(len(acc))
        for k in range(len(acc)):
            out[k] = acc[k]
        return out


@_jit
def chain_transition(kind, j, x, y, p):
    if kind == GARCH:
        return p[0] + p[1] * x * y[0] * y[0] + p[2] * x
    elif kind == GTD1:
        return max(x + y[0], 0.0)
    else:
        delta = p[MT_DELTA]
        last = 0.0
        for k in range(y.size // 2):
            pos = y[2 * k]
            x = max(x - (pos - last), 0.0) + y[2 * k + 1]
            last = pos
        return max(x - (delta - last), 0.0)


@_jit
def chain_advance(kind, rng, p, states, j0, j1):
    for j in range(j0, j1):
        states[j + 1] = chain_step(kind, rng, j, states[j], p)


@_jit
def chain_run_schedule(kind, rng, p, states, sizes, out):
    d = states.size - 1
    chain_advance(kind, rng, p, states, 0, d)
    out[0] = states[d]
    for k in range(sizes.size):
        chain_advance(kind, rng, p, states, d - sizes[k], d)
        out[k + 1] = states[d]


@_jit
def chain_tails(kind, rng, p, x0, j_end, size):
    out = np.empty(size)
    for r in range(size):
        x = x0
        for j in range(j_end):
            x = chain_step(kind, rng, j, x, p)
        out[r] = x
    return out


@_jit
def chain_mixed(kind, rng, p, j_start, d, tails):
    out = tails.copy()
    for r in range(out.shape[0]):
        row = out[r]
        for j in range(j_start, d):
            chain_step_multi(kind, rng, j, row, p)
    return out


@_jit
def chain_coupled(kind, rng, p, x0, d, m_fine, m_coarse, size):
    fine = np.empty(size)
    coarse = np.empty(size)
    pair = np.empty(2)
    for r in range(size):
        x = x0
        for j in range(d - m_fine, d - m_coarse):
            x = chain_step(kind, rng, j, x, p)
        if m_coarse > 0:
            pair[0] = x
            pair[1] = x0
            for j in range(d - m_coarse, d):
                chain_step_multi(kind, rng, j, pair, p)
            fine[r] = pair[0]
            coarse[r] = pair[1]
        else:
            fine[r] = x
            coarse[r] = x0
    return fine, coarse
