"""Dense square-matrix kernels: SVD factors, matrix norms, proximal operators,
and the projection operators onto tangent spaces and support sets that the
solver and certificate modules compose."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SvdFactors",
    "SupportSet",
    "TangentSpace",
    "svd",
    "norm",
    "soft_threshold",
    "sv_threshold",
    "project_T",
    "project_T_perp",
    "project_support",
    "opnorm_PGammaPT",
]

NORM_KINDS = ("nuclear", "spectral", "frobenius", "l1", "linf", "linf2")

_ORTHO_TOL = 1e-10
_POWER_ITER_CAP = 10_000


def _as_matrix(M, name="M"):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"{name} must be a 2-d matrix, got ndim={M.ndim}")
    if not np.isfinite(M).all():
        raise ValueError(f"{name} contains non-finite entries")
    return M


def _as_square(M, name="M"):
    M = _as_matrix(M, name)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    return M


@dataclass(frozen=True, eq=False)
class SvdFactors:
    """Truncated SVD M ~ U @ diag(sigma) @ V.T with numerical rank r = len(sigma).

    Kept singular values satisfy sigma[i] > rank_tol * sigma[0]; sigma is
    nonincreasing and U, V are column-orthonormal.
    """

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray
    rank_tol: float

    def __post_init__(self):
        if self.U.shape != self.V.shape or self.U.shape[1] != self.sigma.shape[0]:
            raise ValueError("inconsistent factor shapes")
        if np.any(np.diff(self.sigma) > 0) or np.any(self.sigma < 0):
            raise ValueError("sigma must be nonincreasing and nonnegative")

    @property
    def n(self) -> int:
        return self.U.shape[0]

    @property
    def rank(self) -> int:
        return self.sigma.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.sigma) @ self.V.T


@dataclass(frozen=True, eq=False)
class SupportSet:
    """Index set over an n x n grid, stored as a boolean mask."""

    n: int
    mask: np.ndarray

    def __post_init__(self):
        if self.mask.shape != (self.n, self.n) or self.mask.dtype != np.bool_:
            raise ValueError("mask must be a boolean (n, n) array")
        self.mask.flags.writeable = False

    @classmethod
    def from_mask(cls, mask) -> "SupportSet":
        mask = np.ascontiguousarray(np.asarray(mask, dtype=bool))
        if mask.ndim != 2 or mask.shape[0] != mask.shape[1]:
            raise ValueError("mask must be square")
        return cls(mask.shape[0], mask)

    @classmethod
    def from_indices(cls, n: int, indices) -> "SupportSet":
        mask = np.zeros((n, n), dtype=bool)
        for i, j in indices:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"index ({i}, {j}) out of range for n={n}")
            mask[i, j] = True
        return cls(n, mask)

    @classmethod
    def empty(cls, n: int) -> "SupportSet":
        return cls(n, np.zeros((n, n), dtype=bool))

    @classmethod
    def full(cls, n: int) -> "SupportSet":
        return cls(n, np.ones((n, n), dtype=bool))

    @property
    def indices(self) -> list[tuple[int, int]]:
        ii, jj = np.nonzero(self.mask)
        return list(zip(ii.tolist(), jj.tolist()))

    def complement(self) -> "SupportSet":
        return SupportSet(self.n, ~self.mask)

    def intersect(self, other: "SupportSet") -> "SupportSet":
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        return SupportSet(self.n, self.mask & other.mask)

    def union(self, other: "SupportSet") -> "SupportSet":
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        return SupportSet(self.n, self.mask | other.mask)

    def __len__(self) -> int:
        return int(self.mask.sum())


@dataclass(frozen=True, eq=False)
class TangentSpace:
    """Tangent space {U @ X.T + Y @ V.T} of the rank-r matrix with factors U, V."""

    U: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        if self.U.ndim != 2 or self.U.shape != self.V.shape:
            raise ValueError("U and V must share shape (n, r)")
        r = self.r
        for name, W in (("U", self.U), ("V", self.V)):
            err = np.abs(W.T @ W - np.eye(r)).max() if r else 0.0
            if err > _ORTHO_TOL:
                raise ValueError(f"{name} not column-orthonormal (max deviation {err:.2e})")

    @classmethod
    def from_factors(cls, factors: SvdFactors) -> "TangentSpace":
        return cls(factors.U, factors.V)

    @property
    def n(self) -> int:
        return self.U.shape[0]

    @property
    def r(self) -> int:
        return self.U.shape[1]


def svd(M, rank_tol: float = 1e-8) -> SvdFactors:
    """Truncated SVD of a square matrix, keeping sigma_i > rank_tol * sigma_1."""
    M = _as_square(M)
    if not (0.0 < rank_tol < 1.0):
        raise ValueError(f"rank_tol must lie in (0, 1), got {rank_tol}")
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    r = int(np.count_nonzero(s > rank_tol * s[0])) if s.size else 0
    return SvdFactors(
        np.ascontiguousarray(U[:, :r]),
        np.ascontiguousarray(s[:r]),
        np.ascontiguousarray(Vt[:r].T),
        rank_tol,
    )


def norm(M, kind: str) -> float:
    """Matrix norm: nuclear, spectral, frobenius, entrywise l1/linf, or linf2
    (the max over all row and column Euclidean norms)."""
    M = _as_matrix(M)
    if kind in ("nuclear", "spectral", "linf2") and M.shape[0] != M.shape[1]:
        raise ValueError(f"{kind} norm requires a square matrix, got {M.shape}")
    if kind == "nuclear":
        return float(np.linalg.svd(M, compute_uv=False).sum())
    if kind == "spectral":
        return float(np.linalg.svd(M, compute_uv=False).max(initial=0.0))
    if kind == "frobenius":
        return float(np.linalg.norm(M))
    if kind == "l1":
        return float(np.abs(M).sum())
    if kind == "linf":
        return float(np.abs(M).max(initial=0.0))
    if kind == "linf2":
        rows = np.sqrt((M * M).sum(axis=1))
        cols = np.sqrt((M * M).sum(axis=0))
        return float(max(rows.max(initial=0.0), cols.max(initial=0.0)))
    raise ValueError(f"unknown norm kind {kind!r}; expected one of {NORM_KINDS}")


def soft_threshold(M, tau: float) -> np.ndarray:
    """Entrywise shrinkage sign(m) * max(|m| - tau, 0), the prox of tau*||.||_1."""
    M = _as_matrix(M)
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    return np.sign(M) * np.maximum(np.abs(M) - tau, 0.0)


def sv_threshold(M, tau: float) -> np.ndarray:
    """Singular-value shrinkage U @ diag(max(sigma - tau, 0)) @ V.T, the prox of
    tau*||.||_*."""
    M = _as_square(M)
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    s = np.maximum(s - tau, 0.0)
    return (U * s) @ Vt


def project_T(Z, T: TangentSpace) -> np.ndarray:
    """Orthogonal projection U@U.T@Z + Z@V@V.T - U@U.T@Z@V@V.T onto T."""
    Z = _as_matrix(Z, "Z")
    if Z.shape != (T.n, T.n):
        raise ValueError(f"Z shape {Z.shape} does not match tangent space n={T.n}")
    if T.r == 0:
        return np.zeros_like(Z)
    UtZ = T.U.T @ Z
    ZV = Z @ T.V
    return T.U @ UtZ + ZV @ T.V.T - T.U @ ((UtZ @ T.V) @ T.V.T)


def project_T_perp(Z, T: TangentSpace) -> np.ndarray:
    """Orthogonal projection (I - U@U.T) @ Z @ (I - V@V.T) onto the complement of T."""
    Z = _as_matrix(Z, "Z")
    if Z.shape != (T.n, T.n):
        raise ValueError(f"Z shape {Z.shape} does not match tangent space n={T.n}")
    if T.r == 0:
        return Z.copy()
    W = Z - T.U @ (T.U.T @ Z)
    return W - (W @ T.V) @ T.V.T


def project_support(Z, S: SupportSet) -> np.ndarray:
    """Zero out all entries outside the support set."""
    Z = _as_matrix(Z, "Z")
    if Z.shape != (S.n, S.n):
        raise ValueError(f"Z shape {Z.shape} does not match support n={S.n}")
    return np.where(S.mask, Z, 0.0)


def opnorm_PGammaPT(S: SupportSet, T: TangentSpace, tol: float = 1e-6) -> float:
    """Operator norm of P_Gamma composed with P_T over matrix space.

    Computed as sqrt of the top eigenvalue of the symmetric composition
    P_T P_Gamma P_T by power iteration with a deterministic random start.
    On hitting the iteration cap a warning is issued and the best estimate
    returned.
    """
    if not (0.0 < tol < 1.0):
        raise ValueError(f"tol must lie in (0, 1), got {tol}")
    if S.n != T.n:
        raise ValueError("support and tangent space dimensions differ")
    if len(S) == 0 or T.r == 0:
        return 0.0

    def apply(X):
        return project_T(project_support(project_T(X, T), S), T)

    rng = np.random.default_rng(0x9E3779B9)
    X = rng.standard_normal((S.n, S.n))
    X /= np.linalg.norm(X)
    lam_prev = np.inf
    lam = 0.0
    for _ in range(_POWER_ITER_CAP):
        FX = apply(X)
        lam = max(float(np.tensordot(X, FX)), 0.0)
        nrm = np.linalg.norm(FX)
        if nrm == 0.0:
            return 0.0
        X = FX / nrm
        if abs(lam - lam_prev) <= tol * max(lam, 1e-300):
            return float(np.sqrt(lam))
        lam_prev = lam
    warnings.warn(
        "power iteration for the support/tangent operator norm did not converge "
        f"within {_POWER_ITER_CAP} iterations; returning the last estimate",
        RuntimeWarning,
    )
    return float(np.sqrt(lam))
