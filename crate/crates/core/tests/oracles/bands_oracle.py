"""Plane-wave eigenpairs of -Δ + cos x1 cos x2 at k = (0.4, 0) with numpy,
and the cubic coefficient nu = -∫ σ |p|^4 for σ = cos x1 cos x2 - 2 on band 7.

The Hamiltonian in the basis e^{i(k+m)x}, |m_j| <= N, has diagonal |k+m|^2 and
1/4 couplings between m and m + (±1, ±1).
"""
import itertools

import numpy as np


def hamiltonian(k, n):
    modes = list(itertools.product(range(-n, n + 1), repeat=2))
    index = {m: i for i, m in enumerate(modes)}
    h = np.zeros((len(modes), len(modes)))
    for i, m in enumerate(modes):
        h[i, i] = (k[0] + m[0]) ** 2 + (k[1] + m[1]) ** 2
        for s in itertools.product((-1, 1), repeat=2):
            j = index.get((m[0] + s[0], m[1] + s[1]))
            if j is not None:
                h[i, j] = 0.25
    return modes, h


def bands(k, n=12, count=10):
    return np.linalg.eigvalsh(hamiltonian(k, n)[1])[:count]


def nu(k, band, n=12, q=128):
    modes, h = hamiltonian(k, n)
    _, vecs = np.linalg.eigh(h)
    c = vecs[:, band - 1]
    x = 2 * np.pi * np.arange(q) / q
    x1, x2 = np.meshgrid(x, x, indexing="ij")
    p = np.zeros((q, q), dtype=complex)
    for cm, m in zip(c, modes):
        p += cm * np.exp(1j * (m[0] * x1 + m[1] * x2))
    p /= 2 * np.pi
    sigma = np.cos(x1) * np.cos(x2) - 2.0
    w = (2 * np.pi / q) ** 2
    return -np.sum(sigma * np.abs(p) ** 4) * w


if __name__ == "__main__":
    for v in bands((0.4, 0.0)):
        print(repr(float(v)))
    print("nu", repr(float(nu((0.4, 0.0), 7))))
