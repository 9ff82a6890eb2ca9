"""Counter-based random streams.

Every stochastic routine draws from ``stream(seed, stream_id)``.  Work that
is split into chunks uses one stream per chunk, so results do not depend on
how chunks are scheduled across threads.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np


def stream(seed: int, stream_id: int = 0) -> np.random.Generator:
    """Philox generator keyed by ``(seed, stream_id)``."""
    seed = int(seed) % (1 << 64)
    stream_id = int(stream_id) % (1 << 64)
    return np.random.Generator(np.random.Philox(key=[seed, stream_id]))


def haar_vectors(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    """``n`` independent uniformly distributed unit vectors in C^dim, shape (n, dim)."""
    z = rng.standard_normal((n, dim)) + 1j * rng.standard_normal((n, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def haar_product_states(rng: np.random.Generator, n: int, dims: Sequence[int]):
    """One batch of Haar-random factors per tensor slot."""
    return [haar_vectors(rng, n, d) for d in dims]


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_complex(rng: np.random.Generator, dim: int) -> np.ndarray:
    return rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))


def random_hermitian(rng: np.random.Generator, dim: int, normalize: bool = False) -> np.ndarray:
    """GUE-like Hermitian matrix; with ``normalize`` it has spectral norm 1."""
    z = random_complex(rng, dim)
    h = (z + z.conj().T) / 2
    if normalize:
        h = h / np.max(np.abs(np.linalg.eigvalsh(h)))
    return h
