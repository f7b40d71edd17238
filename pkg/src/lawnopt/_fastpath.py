"""Compiled Metropolis inner loops.

One call runs a single temperature block over pre-drawn random pairs and
uniforms, mutating the bit vectors in place and tracking the best-ever
state.  Kernels are strict IEEE (no fastmath) so results are bit-identical
across processes and thread counts; nogil lets replicas run concurrently.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def row_sum_masked(indptr, indices, weights, bits, i):
    """sum_k w[i,k] * bits[k] over the stored neighbors of i."""
    acc = 0.0
    for k in range(indptr[i], indptr[i + 1]):
        acc += weights[k] * bits[indices[k]]
    return acc


@njit(cache=True, nogil=True)
def full_sum_one(indptr, indices, weights, bits):
    """sum_{i,j} s_i s_j w_ij over stored pairs (ordered)."""
    acc = 0.0
    for i in range(bits.shape[0]):
        if bits[i]:
            acc += row_sum_masked(indptr, indices, weights, bits, i)
    return acc


@njit(cache=True, nogil=True)
def full_sum_two(indptr, indices, weights, bits1, bits2):
    """sum_{i,j} s1_i (1 - s2_j) w_ij over stored pairs (ordered)."""
    acc = 0.0
    for i in range(bits1.shape[0]):
        if bits1[i]:
            for k in range(indptr[i], indptr[i + 1]):
                acc += weights[k] * (1.0 - bits2[indices[k]])
    return acc


@njit(cache=True, nogil=True)
def anneal_block_one(bits, best_bits, indptr, indices, weights, antipode,
                     pair_rep, prefactor, temperature, pairs, uniforms,
                     p_running, best_p):
    """One temperature block of single-pair-toggle Metropolis, one-lawn.

    Returns (p_running, best_p, n_accepted, sum_p) where sum_p accumulates
    p_running after every proposal (for the trace's mean P).
    """
    n_acc = 0
    sum_p = 0.0
    for t in range(pairs.shape[0]):
        i = pair_rep[pairs[t]]
        m = antipode[i]
        si = row_sum_masked(indptr, indices, weights, bits, i)
        sm = row_sum_masked(indptr, indices, weights, bits, m)
        delta = 2.0 * prefactor * (1.0 - 2.0 * bits[i]) * (si - sm)
        if delta >= 0.0 or uniforms[t] < math.exp(delta / temperature):
            bits[i] ^= 1
            bits[m] ^= 1
            p_running += delta
            n_acc += 1
            if p_running > best_p:
                best_p = p_running
                best_bits[:] = bits
        sum_p += p_running
    return p_running, best_p, n_acc, sum_p


@njit(cache=True, nogil=True)
def anneal_block_two(bits1, bits2, best1, best2, indptr, indices, weights,
                     antipode, pair_rep, prefactor, temperature, pairs,
                     lawn_choice, uniforms, p_running, best_p):
    """One temperature block for the two-lawn setup; moves toggle a random
    pair in a random lawn."""
    n_acc = 0
    sum_p = 0.0
    for t in range(pairs.shape[0]):
        i = pair_rep[pairs[t]]
        m = antipode[i]
        if lawn_choice[t] == 1:
            ti = 0.0
            for k in range(indptr[i], indptr[i + 1]):
                ti += weights[k] * (1.0 - bits2[indices[k]])
            tm = 0.0
            for k in range(indptr[m], indptr[m + 1]):
                tm += weights[k] * (1.0 - bits2[indices[k]])
            delta = prefactor * (1.0 - 2.0 * bits1[i]) * (ti - tm)
        else:
            ui = row_sum_masked(indptr, indices, weights, bits1, i)
            um = row_sum_masked(indptr, indices, weights, bits1, m)
            delta = -prefactor * (1.0 - 2.0 * bits2[i]) * (ui - um)
        if delta >= 0.0 or uniforms[t] < math.exp(delta / temperature):
            if lawn_choice[t] == 1:
                bits1[i] ^= 1
                bits1[m] ^= 1
            else:
                bits2[i] ^= 1
                bits2[m] ^= 1
            p_running += delta
            n_acc += 1
            if p_running > best_p:
                best_p = p_running
                best1[:] = bits1
                best2[:] = bits2
        sum_p += p_running
    return p_running, best_p, n_acc, sum_p


@njit(cache=True, nogil=True)
def probe_deltas_one(bits, indptr, indices, weights, antipode, pair_rep,
                     prefactor, pairs):
    """Non-mutating Metropolis deltas for temperature auto-scaling."""
    out = np.empty(pairs.shape[0], dtype=np.float64)
    for t in range(pairs.shape[0]):
        i = pair_rep[pairs[t]]
        m = antipode[i]
        si = row_sum_masked(indptr, indices, weights, bits, i)
        sm = row_sum_masked(indptr, indices, weights, bits, m)
        out[t] = 2.0 * prefactor * (1.0 - 2.0 * bits[i]) * (si - sm)
    return out


@njit(cache=True, nogil=True)
def probe_deltas_two(bits1, bits2, indptr, indices, weights, antipode,
                     pair_rep, prefactor, pairs, lawn_choice):
    out = np.empty(pairs.shape[0], dtype=np.float64)
    for t in range(pairs.shape[0]):
        i = pair_rep[pairs[t]]
        m = antipode[i]
        if lawn_choice[t] == 1:
            ti = 0.0
            for k in range(indptr[i], indptr[i + 1]):
                ti += weights[k] * (1.0 - bits2[indices[k]])
            tm = 0.0
            for k in range(indptr[m], indptr[m + 1]):
                tm += weights[k] * (1.0 - bits2[indices[k]])
            out[t] = prefactor * (1.0 - 2.0 * bits1[i]) * (ti - tm)
        else:
            ui = row_sum_masked(indptr, indices, weights, bits1, i)
            um = row_sum_masked(indptr, indices, weights, bits1, m)
            out[t] = -prefactor * (1.0 - 2.0 * bits2[i]) * (ui - um)
    return out
