"""Shared test helpers: deterministic ARMA sample paths built on the
package's reference PRNG so frozen expectations never drift."""
import math

import numpy as np

from evmcast.rng import SplitMix64


def splitmix_normals(n: int, seed: int) -> np.ndarray:
    """Box-Muller standard normals from the SplitMix64 stream."""
    gen = SplitMix64(seed)
    out = np.empty(n)
    for i in range(n):
        u1 = 1.0 - gen.next_float()
        u2 = gen.next_float()
        out[i] = math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
    return out


def gen_arma(n: int, phi=(), theta=(), seed: int = 0, c: float = 0.0,
             sigma: float = 1.0, burn: int = 100) -> np.ndarray:
    """Simulate a stationary ARMA(p,q) path with N(0, sigma^2) innovations."""
    eps = sigma * splitmix_normals(n + burn, seed)
    p, q = len(phi), len(theta)
    z = np.zeros(n + burn)
    for t in range(n + burn):
        value = c + eps[t]
        for i in range(1, p + 1):
            if t - i >= 0:
                value += phi[i - 1] * z[t - i]
        for j in range(1, q + 1):
            if t - j >= 0:
                value += theta[j - 1] * eps[t - j]
        z[t] = value
    return z[burn:]
