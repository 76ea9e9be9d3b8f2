"""Seeded generators for planted quasi-clique instances and the random test
matrices used by the solver and certificate suites.

All randomness flows through numpy's Philox counter-based bit generator so
that a given seed reproduces the same instance on every platform. Symmetric
matrices are built by sampling the upper triangle (diagonal included, row-major
order) and mirroring.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import SupportSet

__all__ = [
    "InstanceParams",
    "PlantedInstance",
    "gen_planted",
    "gen_bernoulli_support",
    "gen_random_sign_sparse",
    "gen_low_rank",
    "derive_seed",
]

_SEED_MAX = 2**64


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def derive_seed(base_seed: int, *indices: int) -> int:
    """Mix a base seed with trial indices into a fresh 64-bit seed.

    splitmix64 applied to each component in turn; bijective per step, so
    nearby (base, i, j, t) tuples land on well-separated seeds.
    """
    state = base_seed % _SEED_MAX
    for part in indices:
        state = (state + 0x9E3779B97F4A7C15 + (part % _SEED_MAX)) % _SEED_MAX
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) % _SEED_MAX
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) % _SEED_MAX
        state = z ^ (z >> 31)
    return state


@dataclass(frozen=True)
class InstanceParams:
    """Parameters of a planted instance: graph size n, planted block size n_c,
    in-block edge density gamma, background noise density rho, PRNG seed."""

    n: int
    n_c: int
    gamma: float
    rho: float
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if not (0 < self.n_c <= self.n):
            raise ValueError(f"n_c must satisfy 0 < n_c <= n, got n_c={self.n_c}, n={self.n}")
        if not (0.0 < self.gamma <= 1.0):
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma}")
        if not (0.0 <= self.rho < 1.0):
            raise ValueError(f"rho must lie in [0, 1), got {self.rho}")
        if not (0 <= self.seed < _SEED_MAX):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass(frozen=True, eq=False)
class PlantedInstance:
    """A planted instance: observed adjacency A split as A = B0 + C0, where B0
    is the sampled in-block adjacency and C0 the background noise.

    omega is the planted vertex-pair block {0..n_c-1}^2, gamma_support the
    realized nonzeros of B0, and noise_support the realized nonzeros of C0.
    block_pattern is the full 0/1 indicator of omega, the rank-1 matrix the
    convex program recovers in the success regime.
    """

    params: InstanceParams
    A: np.ndarray
    B0: np.ndarray
    C0: np.ndarray
    omega: SupportSet
    gamma_support: SupportSet
    noise_support: SupportSet

    @property
    def block_pattern(self) -> np.ndarray:
        return self.omega.mask.astype(float)


def gen_planted(params: InstanceParams) -> PlantedInstance:
    """Sample a planted quasi-clique instance.

    Each upper-triangle entry (diagonal included) inside the block
    {0..n_c-1}^2 is set to one with probability gamma, each entry outside
    with probability rho, then mirrored to make A symmetric.
    """
    n, n_c = params.n, params.n_c
    rng = _rng(params.seed)
    iu, ju = np.triu_indices(n)
    probs = np.where((iu < n_c) & (ju < n_c), params.gamma, params.rho)
    draws = rng.random(iu.size) < probs
    A = np.zeros((n, n))
    A[iu[draws], ju[draws]] = 1.0
    A = np.maximum(A, A.T)

    block = np.zeros((n, n), dtype=bool)
    block[:n_c, :n_c] = True
    B0 = np.where(block, A, 0.0)
    C0 = A - B0
    return PlantedInstance(
        params=params,
        A=A,
        B0=B0,
        C0=C0,
        omega=SupportSet(n, block),
        gamma_support=SupportSet.from_mask(B0 != 0),
        noise_support=SupportSet.from_mask(C0 != 0),
    )


def gen_bernoulli_support(n: int, p: float, seed: int, symmetric: bool = False) -> SupportSet:
    """Include each index pair independently with probability p. With
    symmetric=True the upper triangle is sampled and (i, j), (j, i) are
    included together."""
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must lie in [0, 1], got {p}")
    rng = _rng(seed)
    if symmetric:
        iu, ju = np.triu_indices(n)
        draws = rng.random(iu.size) < p
        mask = np.zeros((n, n), dtype=bool)
        mask[iu[draws], ju[draws]] = True
        mask |= mask.T
    else:
        mask = rng.random((n, n)) < p
    return SupportSet(n, mask)


def gen_random_sign_sparse(n: int, p: float, seed: int) -> np.ndarray:
    """Entries independently +1 with probability p/2, -1 with probability p/2,
    zero otherwise."""
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must lie in [0, 1], got {p}")
    rng = _rng(seed)
    u = rng.random((n, n))
    return np.where(u < p / 2, 1.0, np.where(u < p, -1.0, 0.0))


def gen_low_rank(n: int, r: int, seed: int) -> np.ndarray:
    """Random n x n matrix G @ H.T of rank r with standard-normal factors."""
    if not (1 <= r <= n):
        raise ValueError(f"r must satisfy 1 <= r <= n, got r={r}, n={n}")
    rng = _rng(seed)
    G = rng.standard_normal((n, r))
    H = rng.standard_normal((n, r))
    return G @ H.T
