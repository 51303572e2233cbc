"""Reference implementation of the Fock-space assembly kernels.

Used when the compiled ``_kernels`` extension is unavailable.  Ranking goes
through a dictionary here; the compiled version ranks combinatorially, so the
two implementations check each other.
"""
import math

import numpy as np


def _compositions(total, m):
    if m == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, m - 1):
            yield (first,) + rest


def enumerate_states(m, cutoff):
    """Occupations with at most ``cutoff`` quanta, graded then lexicographic."""
    states = [s for t in range(cutoff + 1) for s in _compositions(t, m)]
    return np.array(states, dtype=np.int64).reshape(len(states), m)


def _index(states):
    return {tuple(int(x) for x in s): k for k, s in enumerate(states)}


def rank_states(states, cutoff):
    index = _index(enumerate_states(states.shape[1], cutoff))
    return np.array([index[tuple(int(x) for x in s)] for s in states], dtype=np.int64)


def ladder_coo(states, cutoff, mode, create):
    index = _index(states)
    rows, cols, vals = [], [], []
    for col, s in enumerate(states):
        s = [int(x) for x in s]
        n = s[mode]
        if create:
            if sum(s) >= cutoff:
                continue
            s[mode] = n + 1
            amp = math.sqrt(n + 1)
        else:
            if n == 0:
                continue
            s[mode] = n - 1
            amp = math.sqrt(n)
        rows.append(index[tuple(s)])
        cols.append(col)
        vals.append(amp)
    return (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64),
            np.array(vals, dtype=float))


def quadratic_coo(states, cutoff, h, g):
    """Entries of ``Σ h_ij a_i* a_j + ½ Σ g_ij a_i* a_j* + ½ Σ ḡ_ij a_i a_j``."""
    index = _index(states)
    m = states.shape[1]
    h = np.asarray(h, dtype=complex)
    g = np.asarray(g, dtype=complex)
    rows, cols, vals = [], [], []
    for col, s0 in enumerate(states):
        s0 = [int(x) for x in s0]
        total = sum(s0)
        for i in range(m):
            for j in range(m):
                # a_i* a_j
                if h[i, j] != 0 and s0[j] > 0:
                    s = list(s0)
                    amp = math.sqrt(s[j])
                    s[j] -= 1
                    amp *= math.sqrt(s[i] + 1)
                    s[i] += 1
                    rows.append(index[tuple(s)])
                    cols.append(col)
                    vals.append(h[i, j] * amp)
                # a_i* a_j*
                if g[i, j] != 0 and total + 2 <= cutoff:
                    s = list(s0)
                    amp = math.sqrt(s[j] + 1)
                    s[j] += 1
                    amp *= math.sqrt(s[i] + 1)
                    s[i] += 1
                    rows.append(index[tuple(s)])
                    cols.append(col)
                    vals.append(0.5 * g[i, j] * amp)
                # a_i a_j
                if g[i, j] != 0 and s0[j] > 0 and s0[i] - (i == j) > 0:
                    s = list(s0)
                    amp = math.sqrt(s[j])
                    s[j] -= 1
                    amp *= math.sqrt(s[i])
                    s[i] -= 1
                    rows.append(index[tuple(s)])
                    cols.append(col)
                    vals.append(0.5 * np.conj(g[i, j]) * amp)
    return (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64),
            np.array(vals, dtype=complex))
