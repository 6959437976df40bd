"""Compiled inner loops: Gray-code cost enumeration and in-place state updates."""

from __future__ import annotations

import numba
import numpy as np

from .model import IsingInstance


def term_incidence(instance: IsingInstance):
    """CSR incidence ``site -> term ids`` and the term values at z = all +1."""
    terms = instance.terms()
    coeff = np.array([c for _, c in terms], dtype=np.int64)
    per_site: list[list[int]] = [[] for _ in range(instance.n)]
    for t, (sites, _) in enumerate(terms):
        for s in sites:
            per_site[s].append(t)
    ptr = np.zeros(instance.n + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(x) for x in per_site])
    idx = np.array([t for x in per_site for t in x], dtype=np.int64)
    return ptr, idx, coeff


@numba.njit(cache=True)
def _trailing_zeros(i):
    k = 0
    while (i & 1) == 0:
        i >>= 1
        k += 1
    return k


@numba.njit(cache=True)
def gray_fill_table(n, ptr, idx, coeff, out):
    """Write C(z(index)) for every index by walking the reflected Gray code."""
    tv = coeff.copy()
    cost = tv.sum()
    out[0] = cost
    gray = 0
    for i in range(1, 1 << n):
        k = _trailing_zeros(i)
        gray ^= 1 << k
        for a in range(ptr[k], ptr[k + 1]):
            t = idx[a]
            cost -= 2 * tv[t]
            tv[t] = -tv[t]
        out[gray] = cost


@numba.njit(cache=True)
def gray_extrema(n, ptr, idx, coeff):
    """Return (min, argmin_index, max, argmax_index) over all 2**n spin vectors."""
    tv = coeff.copy()
    cost = tv.sum()
    lo = cost
    hi = cost
    arg_lo = 0
    arg_hi = 0
    gray = 0
    for i in range(1, 1 << n):
        k = _trailing_zeros(i)
        gray ^= 1 << k
        for a in range(ptr[k], ptr[k + 1]):
            t = idx[a]
            cost -= 2 * tv[t]
            tv[t] = -tv[t]
        if cost < lo:
            lo = cost
            arg_lo = gray
        elif cost > hi:
            hi = cost
            arg_hi = gray
    return lo, arg_lo, hi, arg_hi


@numba.njit(cache=True)
def apply_phase(psi, costs, lookup, cmin):
    for i in range(psi.shape[0]):
        psi[i] *= lookup[costs[i] - cmin]


@numba.njit(cache=True)
def apply_rx_all(psi, n, c, s):
    """Apply exp(-i beta X) to every qubit, with c = cos(beta), s = sin(beta)."""
    dim = psi.shape[0]
    for k in range(n):
        step = 1 << k
        for base in range(0, dim, 2 * step):
            for j in range(base, base + step):
                a = psi[j]
                b = psi[j + step]
                psi[j] = c * a - 1j * s * b
                psi[j + step] = c * b - 1j * s * a


@numba.njit(cache=True)
def apply_rx_all_batch(psi, n, c, s):
    """Row r of ``psi`` gets the mixer with (c[r], s[r])."""
    for r in range(psi.shape[0]):
        apply_rx_all(psi[r], n, c[r], s[r])


@numba.njit(cache=True)
def weighted_sum(psi, costs):
    acc = 0.0
    for i in range(psi.shape[0]):
        v = psi[i]
        acc += (v.real * v.real + v.imag * v.imag) * costs[i]
    return acc
