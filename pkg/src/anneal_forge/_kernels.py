"""Compiled inner loops for sampling and local search.

Every read derives its own RNG seed from (seed, read index), so outputs
are a pure function of the inputs no matter how work is scheduled.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True)
def _read_seed(seed, index):
    """splitmix64 of (seed, index), folded to 32 bits."""
    x = np.uint64(seed) + (np.uint64(index) + np.uint64(1)) * _GAMMA
    x = (x ^ (x >> np.uint64(30))) * _MIX1
    x = (x ^ (x >> np.uint64(27))) * _MIX2
    x = x ^ (x >> np.uint64(31))
    return np.uint32(x >> np.uint64(32))


@njit(cache=True)
def sa_kernel(n, h, nbr_ptr, nbr_idx, nbr_val, reads, sweeps,
              beta_min, beta_max, seed):
    """Single-spin-flip Metropolis over a geometric inverse-temperature ladder."""
    spins = np.empty((reads, n), np.int8)
    if sweeps > 1:
        log_ratio = np.log(beta_max / beta_min) / (sweeps - 1)
    else:
        log_ratio = 0.0
    for r in range(reads):
        np.random.seed(_read_seed(seed, r))
        s = spins[r]
        for i in range(n):
            s[i] = 1 if np.random.random() < 0.5 else -1
        for t in range(sweeps):
            beta = beta_max if sweeps == 1 else beta_min * np.exp(t * log_ratio)
            for i in range(n):
                field = h[i]
                for ptr in range(nbr_ptr[i], nbr_ptr[i + 1]):
                    field += nbr_val[ptr] * s[nbr_idx[ptr]]
                delta = -2.0 * s[i] * field
                if delta <= 0.0 or np.random.random() < np.exp(-beta * delta):
                    s[i] = -s[i]
    return spins


@njit(cache=True)
def greedy_kernel(spins, h, nbr_ptr, nbr_idx, nbr_val):
    """Refine each row in place to a 1-flip local minimum.

    Flips the single spin with the largest strict energy decrease; among
    equal decreases the lowest index wins.
    """
    reads, n = spins.shape
    for r in range(reads):
        s = spins[r]
        while True:
            best_delta = 0.0
            best_i = -1
            for i in range(n):
                field = h[i]
                for ptr in range(nbr_ptr[i], nbr_ptr[i + 1]):
                    field += nbr_val[ptr] * s[nbr_idx[ptr]]
                delta = -2.0 * s[i] * field
                if delta < best_delta:
                    best_delta = delta
                    best_i = i
            if best_i < 0:
                break
            s[best_i] = -s[best_i]
    return spins
