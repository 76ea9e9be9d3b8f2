"""Dual-certificate construction and verification for the rank-sparsity
decomposition of a planted instance.

The low-rank half of the certificate comes from a golfing scheme over random
batches of the noise-free index set; the sparse half from a truncated Neumann
series. Verification measures the five sufficient conditions on those two
matrices together with the operator-norm and regularization gates, and also
reports the combined-dual diagnostics.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .instances import PlantedInstance, derive_seed
from .linalg import (
    SupportSet,
    TangentSpace,
    _as_matrix,
    norm,
    opnorm_PGammaPT,
    project_support,
    project_T,
    project_T_perp,
    svd,
)

__all__ = [
    "IncoherenceReport",
    "GolfingConfig",
    "CertificateReport",
    "ConcentrationReport",
    "NeumannDivergenceError",
    "incoherence",
    "partition_complement",
    "golfing_QB",
    "neumann_QC",
    "verify_certificate",
    "check_concentration",
    "DEFAULT_RANK_TOL",
]

# Rank cut used when factoring a planted block: the sampled block has one
# dominant singular value ~ gamma*n_c and a noise bulk ~ 2*sqrt(gamma*(1-gamma)*n_c),
# so a fixed relative cut of 0.25 isolates the planted direction for the sizes
# and densities of interest.
DEFAULT_RANK_TOL = 0.25

_CERT_SEED_TAG = 0xCE27


class NeumannDivergenceError(RuntimeError):
    """The Neumann series for the sparse dual half does not converge."""


@dataclass(frozen=True)
class IncoherenceReport:
    """Smallest incoherence parameters for which the row, column, and joint
    conditions hold with equality at the binding term."""

    mu_row: float
    mu_col: float
    mu_joint: float
    mu: float
    r: int
    n: int


@dataclass(frozen=True)
class GolfingConfig:
    """Golfing batch schedule: k0 batches, each sampled Bernoulli(q), with q
    derived from the overall probability p via q = 1 - p**(1/k0) so that
    (1 - q)**k0 = p."""

    k0: int
    q: float
    p: float
    seed: int

    def __post_init__(self):
        if self.k0 < 1:
            raise ValueError(f"k0 must be >= 1, got {self.k0}")
        # p = 0 (q = 1) is legal for partitioning alone; golfing_QB
        # separately requires a positive p for its 1/p scaling
        if not (0.0 <= self.p <= 1.0):
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if not (0.0 <= self.q <= 1.0):
            raise ValueError(f"q must lie in [0, 1], got {self.q}")
        if abs((1.0 - self.q) ** self.k0 - self.p) > 1e-12:
            raise ValueError("inconsistent config: (1 - q)**k0 must equal p to 1e-12")

    @classmethod
    def for_problem(cls, n: int, p: float, seed: int, k0: int | None = None) -> "GolfingConfig":
        if k0 is None:
            k0 = 20 * math.ceil(math.log(n))
        q = 1.0 - p ** (1.0 / k0)
        return cls(k0=k0, q=q, p=p, seed=seed)


@dataclass(frozen=True)
class ConcentrationReport:
    """Measured deviations of the sampled projections against the bounds they
    are expected to satisfy (bounds reported with unit leading constants)."""

    opnorm_deviation: float
    opnorm_bound: float
    linf_contraction: float
    linf_bound: float


@dataclass(frozen=True, eq=False)
class CertificateReport:
    """Certificate verification output.

    conditions holds the five flags, in order: spectral norm of the golfing
    half below 1/8; its residual on the noise support below lam/8; its
    entrywise norm off the noise support below lam/4; spectral norm of the
    Neumann half below 1/8; its entrywise norm off the noise support below
    1/4. overall additionally requires opnorm_PGPT <= 1/2 and lam < 1.
    joint_* fields report the same style of measurement on the summed dual.
    """

    Q_B: np.ndarray
    Q_C: np.ndarray
    norm_QB: float
    residual_golfing: float
    linf_complement_B: float
    norm_QC: float
    linf_complement_C: float
    opnorm_PGPT: float
    lam: float
    conditions: tuple[bool, bool, bool, bool, bool]
    overall: bool
    golfing_trace: tuple[float, ...]
    joint_norm_Q: float
    joint_residual: float
    joint_linf_complement: float
    incoherence: IncoherenceReport
    config: GolfingConfig
    regime_threshold: float
    regime_ok: bool


def incoherence(B0, rank_tol: float = 1e-8) -> IncoherenceReport:
    """Incoherence parameters of the numerical row/column spaces of B0."""
    factors = svd(B0, rank_tol)
    n, r = factors.n, factors.rank
    if r == 0:
        raise ValueError("incoherence is undefined for the zero matrix")
    mu_row = n / r * float((factors.U * factors.U).sum(axis=1).max())
    mu_col = n / r * float((factors.V * factors.V).sum(axis=1).max())
    E = factors.U @ factors.V.T
    mu_joint = n * n / r * float(np.abs(E).max()) ** 2
    return IncoherenceReport(
        mu_row=mu_row,
        mu_col=mu_col,
        mu_joint=mu_joint,
        mu=max(mu_row, mu_col, mu_joint),
        r=r,
        n=n,
    )


def partition_complement(Gamma: SupportSet, cfg: GolfingConfig) -> list[SupportSet]:
    """Draw k0 index batches, each Bernoulli(q) over the full grid intersected
    with the complement of Gamma. Deterministic given cfg.seed."""
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    comp = ~Gamma.mask
    batches = []
    for _ in range(cfg.k0):
        draw = rng.random((Gamma.n, Gamma.n)) < cfg.q
        batches.append(SupportSet(Gamma.n, draw & comp))
    return batches


def golfing_QB(T: TangentSpace, batches: list[SupportSet], p: float):
    """Golfing construction of the low-rank dual half.

    Iterates Y_k = Y_{k-1} + (1/p) * P_{batch_k} P_T (UV^T - Y_{k-1}) and
    returns (Q_B, trace) with Q_B the projection of the final Y onto the
    tangent complement and trace the Frobenius norms of the residuals
    Z_k = UV^T - P_T Y_k, starting from Z_0 = UV^T.
    """
    if not batches:
        raise ValueError("batches must be nonempty")
    if not (0.0 < p <= 1.0):
        raise ValueError(f"p must lie in (0, 1], got {p}")
    for S in batches:
        if S.n != T.n:
            raise ValueError("batch dimension does not match tangent space")
    E = T.U @ T.V.T
    Y = np.zeros_like(E)
    trace = [float(np.linalg.norm(E))]
    for S in batches:
        step = project_T(E - Y, T)
        Y = Y + project_support(step, S) / p
        trace.append(float(np.linalg.norm(E - project_T(Y, T))))
    return project_T_perp(Y, T), trace


def neumann_QC(
    Gamma: SupportSet,
    T: TangentSpace,
    sign_C0,
    lam: float,
    tol: float = 1e-10,
    max_terms: int = 200,
) -> np.ndarray:
    """Truncated Neumann series for the sparse dual half.

    Q_C = lam * P_Tperp sum_k (P_Gamma P_T P_Gamma)^k sign_C0, truncated once a
    term's Frobenius norm falls below tol * ||sign_C0||_F or max_terms terms
    have been accumulated. Raises NeumannDivergenceError when the composed
    operator norm makes the series divergent.
    """
    sign_C0 = _as_matrix(sign_C0, "sign_C0")
    if sign_C0.shape != (Gamma.n, Gamma.n):
        raise ValueError("sign_C0 shape does not match the support")
    if lam < 0:
        raise ValueError(f"lam must be nonnegative, got {lam}")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if max_terms < 1:
        raise ValueError(f"max_terms must be >= 1, got {max_terms}")
    if np.any(sign_C0[~Gamma.mask] != 0):
        raise ValueError("sign_C0 must be supported on Gamma")

    base = float(np.linalg.norm(sign_C0))
    if base == 0.0:
        return np.zeros_like(sign_C0)
    opn = opnorm_PGammaPT(Gamma, T)
    if opn >= 1.0 - 1e-6:
        raise NeumannDivergenceError(
            f"support/tangent operator norm {opn:.6f} is too close to 1; "
            "the series does not converge"
        )

    term = sign_C0
    acc = sign_C0.copy()
    for _ in range(1, max_terms):
        term = project_support(project_T(term, T), Gamma)
        acc += term
        if float(np.linalg.norm(term)) <= tol * base:
            break
    else:
        if max_terms > 1 and float(np.linalg.norm(term)) > tol * base:
            warnings.warn(
                f"Neumann series truncated at max_terms={max_terms} with last term "
                f"{float(np.linalg.norm(term)):.2e} above tolerance",
                RuntimeWarning,
            )
    return lam * project_T_perp(acc, T)


def verify_certificate(
    inst: PlantedInstance,
    lam: float | None = None,
    cfg: GolfingConfig | None = None,
    rank_tol: float = DEFAULT_RANK_TOL,
    regime_c0: float = 1.0,
    neumann_tol: float = 1e-10,
    neumann_max_terms: int = 200,
) -> CertificateReport:
    """Construct both dual halves for a planted instance and measure every
    sufficient condition.

    The tangent space comes from the truncated SVD of the planted block at
    rank_tol (defaulting to the spectral-gap cut that isolates the planted
    direction); the noise support of the instance plays Gamma; lam defaults to
    1/sqrt(n); cfg defaults to batches at overall probability p = gamma with a
    seed derived from the instance seed.
    """
    params = inst.params
    n = params.n
    if not np.any(inst.B0):
        raise ValueError("certificate verification requires a nonzero planted block")
    if lam is None:
        lam = 1.0 / math.sqrt(n)
    if cfg is None:
        cfg = GolfingConfig.for_problem(
            n, p=params.gamma, seed=derive_seed(params.seed, _CERT_SEED_TAG)
        )

    factors = svd(inst.B0, rank_tol)
    T = TangentSpace.from_factors(factors)
    Gamma = inst.noise_support
    E = factors.U @ factors.V.T
    sign_C0 = np.sign(inst.C0)

    batches = partition_complement(Gamma, cfg)
    Q_B, trace = golfing_QB(T, batches, cfg.p)
    opn = opnorm_PGammaPT(Gamma, T)
    Q_C = neumann_QC(Gamma, T, sign_C0, lam, tol=neumann_tol, max_terms=neumann_max_terms)

    on_gamma = Gamma.mask
    norm_QB = norm(Q_B, "spectral")
    residual_golfing = float(np.linalg.norm(np.where(on_gamma, E + Q_B, 0.0)))
    linf_complement_B = float(np.abs(np.where(on_gamma, 0.0, E + Q_B)).max(initial=0.0))
    norm_QC = norm(Q_C, "spectral")
    linf_complement_C = float(np.abs(np.where(on_gamma, 0.0, Q_C)).max(initial=0.0))

    conditions = (
        norm_QB < 1.0 / 8.0,
        residual_golfing < lam / 8.0,
        linf_complement_B < lam / 4.0,
        norm_QC < 1.0 / 8.0,
        linf_complement_C < 1.0 / 4.0,
    )
    overall = all(conditions) and opn <= 0.5 and lam < 1.0

    Q = Q_B + Q_C
    joint_norm_Q = norm(Q, "spectral")
    joint_residual = float(np.linalg.norm(np.where(on_gamma, E - lam * sign_C0 + Q, 0.0)))
    joint_linf_complement = float(np.abs(np.where(on_gamma, 0.0, E + Q)).max(initial=0.0))

    inc = incoherence(inst.B0, rank_tol)
    regime_threshold = regime_c0 * inc.mu * factors.rank * math.log(n) / n

    return CertificateReport(
        Q_B=Q_B,
        Q_C=Q_C,
        norm_QB=norm_QB,
        residual_golfing=residual_golfing,
        linf_complement_B=linf_complement_B,
        norm_QC=norm_QC,
        linf_complement_C=linf_complement_C,
        opnorm_PGPT=opn,
        lam=lam,
        conditions=conditions,
        overall=overall,
        golfing_trace=tuple(trace),
        joint_norm_Q=joint_norm_Q,
        joint_residual=joint_residual,
        joint_linf_complement=joint_linf_complement,
        incoherence=inc,
        config=cfg,
        regime_threshold=regime_threshold,
        regime_ok=cfg.p >= regime_threshold,
    )


def check_concentration(T: TangentSpace, Gamma_k: SupportSet, p: float, Z) -> ConcentrationReport:
    """Measure the two sampled-projection deviations against their expected
    bounds: the spectral deviation of the rescaled support projection from the
    identity, and the entrywise contraction of the rescaled tangent/support
    composition."""
    if not (0.0 < p <= 1.0):
        raise ValueError(f"p must lie in (0, 1], got {p}")
    Z = _as_matrix(Z, "Z")
    if Z.shape != (T.n, T.n) or Gamma_k.n != T.n:
        raise ValueError("dimension mismatch")
    n = T.n
    logn = math.log(n) if n > 1 else 1.0

    deviation = project_support(Z, Gamma_k) / p - Z
    opnorm_deviation = norm(deviation, "spectral")
    opnorm_bound = (logn / p) * norm(Z, "linf") + math.sqrt(logn / p) * norm(Z, "linf2")

    PtZ = project_T(Z, T)
    contraction = PtZ - project_T(project_support(PtZ, Gamma_k), T) / p
    linf_contraction = norm(contraction, "linf")
    linf_bound = 0.5 * norm(Z, "linf")

    return ConcentrationReport(
        opnorm_deviation=opnorm_deviation,
        opnorm_bound=opnorm_bound,
        linf_contraction=linf_contraction,
        linf_bound=linf_bound,
    )
