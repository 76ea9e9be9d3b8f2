"""Dual-certificate tests: incoherence, batch partitioning, golfing recursion,
Neumann series against a dense oracle, end-to-end verification."""

import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcr.certificate import (
    DEFAULT_RANK_TOL,
    GolfingConfig,
    NeumannDivergenceError,
    check_concentration,
    golfing_QB,
    incoherence,
    neumann_QC,
    partition_complement,
    verify_certificate,
)
from qcr.instances import (
    InstanceParams,
    gen_bernoulli_support,
    gen_low_rank,
    gen_planted,
)
from qcr.linalg import (
    SupportSet,
    TangentSpace,
    norm,
    project_support,
    project_T,
    project_T_perp,
    svd,
)

from conftest import rng


def random_tangent(n: int, r: int, seed: int) -> TangentSpace:
    g = rng(seed)
    U, _ = np.linalg.qr(g.standard_normal((n, r)))
    V, _ = np.linalg.qr(g.standard_normal((n, r)))
    return TangentSpace(U=U, V=V)


def block_tangent(n: int, n_c: int) -> TangentSpace:
    """Rank-1 tangent space of the ideal planted block."""
    pat = np.zeros((n, n))
    pat[:n_c, :n_c] = 1.0
    return TangentSpace.from_factors(svd(pat))


# ---------------------------------------------------------------- incoherence


def test_incoherence_ones_matrix():
    rep = incoherence(np.ones((10, 10)))
    assert rep.r == 1
    assert abs(rep.mu_row - 1.0) < 1e-12
    assert abs(rep.mu_col - 1.0) < 1e-12
    assert abs(rep.mu_joint - 1.0) < 1e-12
    assert abs(rep.mu - 1.0) < 1e-12


def test_incoherence_spike_is_maximally_coherent():
    n = 12
    M = np.zeros((n, n))
    M[0, 0] = 1.0
    rep = incoherence(M)
    assert rep.r == 1
    assert abs(rep.mu_row - n) < 1e-12
    assert abs(rep.mu_col - n) < 1e-12
    assert abs(rep.mu_joint - n * n) < 1e-12


def test_incoherence_identity():
    # full-rank identity: row and column conditions bind at 1; the joint
    # entrywise condition max|UV^T| = 1 forces n^2/r * 1 = n
    n = 9
    rep = incoherence(np.eye(n))
    assert rep.r == n
    assert abs(rep.mu_row - 1.0) < 1e-12
    assert abs(rep.mu_col - 1.0) < 1e-12
    assert abs(rep.mu_joint - n) < 1e-12


def test_incoherence_zero_matrix_rejected():
    with pytest.raises(ValueError):
        incoherence(np.zeros((4, 4)))


@pytest.mark.property
@given(st.integers(0, 2**32 - 1), st.integers(4, 16), st.integers(1, 3))
def test_incoherence_lower_bound(seed, n, r):
    rep = incoherence(gen_low_rank(n, min(r, n), seed=seed))
    assert rep.mu >= 1.0 - 1e-12
    # row/column parameters live in [1, n/r]
    assert 1.0 - 1e-12 <= rep.mu_row <= n / rep.r + 1e-9
    assert 1.0 - 1e-12 <= rep.mu_col <= n / rep.r + 1e-9


@pytest.mark.property
@given(st.integers(0, 2**32 - 1), st.integers(4, 16), st.integers(1, 3))
def test_incoherence_bounds_row_norms_of_E(seed, n, r):
    # the computed mu must make the row/column-norm consequence hold
    M = gen_low_rank(n, min(r, n), seed=seed)
    rep = incoherence(M)
    f = svd(M)
    E = f.U @ f.V.T
    assert norm(E, "linf2") <= math.sqrt(rep.mu * rep.r / n) + 1e-10


# ---------------------------------------------------------------- golfing config


def test_config_default_batch_count():
    cfg = GolfingConfig.for_problem(100, p=0.85, seed=0)
    assert cfg.k0 == 20 * math.ceil(math.log(100))
    assert cfg.k0 == 100


@pytest.mark.parametrize("p", [0.05, 0.3, 0.85, 1.0])
def test_config_q_consistent_with_p(p):
    cfg = GolfingConfig.for_problem(50, p=p, seed=1)
    assert abs((1.0 - cfg.q) ** cfg.k0 - p) <= 1e-12


def test_config_validation():
    with pytest.raises(ValueError):
        GolfingConfig(k0=0, q=0.5, p=0.5, seed=0)
    with pytest.raises(ValueError):
        GolfingConfig(k0=10, q=0.5, p=1.5, seed=0)
    with pytest.raises(ValueError):
        GolfingConfig(k0=10, q=0.2, p=0.85, seed=0)  # (1-q)^k0 != p


def test_config_extreme_q_values():
    # q = 1 forces p = 0; q = 0 forces p = 1
    GolfingConfig(k0=5, q=1.0, p=0.0, seed=0)
    GolfingConfig(k0=5, q=0.0, p=1.0, seed=0)


# ---------------------------------------------------------------- partitioning


def test_partition_batch_count_and_disjoint_from_gamma():
    G = gen_bernoulli_support(20, 0.3, seed=4)
    cfg = GolfingConfig.for_problem(20, p=0.7, seed=9)
    batches = partition_complement(G, cfg)
    assert len(batches) == cfg.k0
    for b in batches:
        assert not b.intersect(G).mask.any()


def test_partition_q_one_gives_full_complement():
    G = gen_bernoulli_support(15, 0.4, seed=2)
    cfg = GolfingConfig(k0=4, q=1.0, p=0.0, seed=3)
    for b in partition_complement(G, cfg):
        assert np.array_equal(b.mask, ~G.mask)


def test_partition_q_zero_gives_empty_batches():
    G = gen_bernoulli_support(15, 0.4, seed=2)
    cfg = GolfingConfig(k0=4, q=0.0, p=1.0, seed=3)
    for b in partition_complement(G, cfg):
        assert len(b) == 0


def test_partition_deterministic():
    G = gen_bernoulli_support(20, 0.3, seed=4)
    cfg = GolfingConfig.for_problem(20, p=0.7, seed=11)
    a = partition_complement(G, cfg)
    b = partition_complement(G, cfg)
    assert all(np.array_equal(x.mask, y.mask) for x, y in zip(a, b))


def test_partition_uncovered_fraction_matches_binomial_model():
    # each complement cell is missed by all k0 batches with probability
    # (1 - q)^k0 = p, so the uncovered fraction concentrates near p
    n, p = 40, 0.85
    G = gen_planted(InstanceParams(n=n, n_c=30, gamma=0.85, rho=0.1, seed=1)).noise_support
    comp = ~G.mask
    fracs = []
    for s in range(100):
        batches = partition_complement(G, GolfingConfig.for_problem(n, p=p, seed=s))
        union = np.zeros((n, n), dtype=bool)
        for b in batches:
            union |= b.mask
        fracs.append(1.0 - union[comp].sum() / comp.sum())
    assert abs(np.mean(fracs) - p) < 0.01


# ---------------------------------------------------------------- golfing


def test_golfing_single_full_batch_exact():
    T = random_tangent(10, 2, 5)
    Q_B, trace = golfing_QB(T, [SupportSet.full(10)], p=1.0)
    assert np.abs(Q_B).max() <= 1e-12
    assert trace[-1] <= 1e-12
    assert len(trace) == 2
    assert abs(trace[0] - np.linalg.norm(T.U @ T.V.T)) < 1e-12


def test_golfing_empty_batches_do_nothing():
    T = random_tangent(10, 2, 6)
    E_norm = float(np.linalg.norm(T.U @ T.V.T))
    Q_B, trace = golfing_QB(T, [SupportSet.empty(10)] * 3, p=0.5)
    assert np.abs(Q_B).max() == 0.0
    assert all(abs(t - E_norm) < 1e-12 for t in trace)


def test_golfing_output_in_tangent_complement():
    T = block_tangent(30, 20)
    g = rng(8)
    batches = [
        SupportSet(30, g.random((30, 30)) < 0.3) for _ in range(40)
    ]
    Q_B, _ = golfing_QB(T, batches, p=0.3)
    leak = np.linalg.norm(project_T(Q_B, T))
    assert leak <= 1e-10 * max(1.0, np.linalg.norm(Q_B))


def test_golfing_validation():
    T = random_tangent(6, 1, 0)
    with pytest.raises(ValueError):
        golfing_QB(T, [], p=0.5)
    with pytest.raises(ValueError):
        golfing_QB(T, [SupportSet.full(6)], p=0.0)
    with pytest.raises(ValueError):
        golfing_QB(T, [SupportSet.full(7)], p=0.5)


def median_decay_ratio(trace) -> float:
    """Median step ratio over the decaying segment of a golfing trace.

    Steps below 1e-12 of the initial residual are excluded: past that point
    the recursion has hit the floating-point floor and ratios are noise.
    """
    tr = np.asarray(trace, dtype=float)
    keep = (tr[:-1] > 1e-12 * tr[0]) & (tr[1:] > 0)
    return float(np.median(tr[1:][keep] / tr[:-1][keep]))


def test_golfing_trace_contracts_with_dense_batches():
    # per-batch sampling at q = 0.3 on a size-100 problem satisfies the
    # sampling regime, so every step contracts by a factor well below 1/2
    inst = gen_planted(InstanceParams(n=100, n_c=85, gamma=0.85, rho=0.10, seed=0))
    T = TangentSpace.from_factors(svd(inst.block_pattern))
    g = rng(123)
    batches = [
        SupportSet(100, (g.random((100, 100)) < 0.3) & ~inst.noise_support.mask)
        for _ in range(40)
    ]
    _, trace = golfing_QB(T, batches, 0.3)
    assert median_decay_ratio(trace) <= 0.5


# ---------------------------------------------------------------- neumann


def test_neumann_empty_support_is_zero():
    T = random_tangent(8, 2, 1)
    out = neumann_QC(SupportSet.empty(8), T, np.zeros((8, 8)), lam=0.3)
    assert np.array_equal(out, np.zeros((8, 8)))


def test_neumann_single_term():
    T = random_tangent(8, 2, 2)
    G = gen_bernoulli_support(8, 0.2, seed=3)
    sgn = project_support(np.ones((8, 8)), G)
    out = neumann_QC(G, T, sgn, lam=0.4, max_terms=1)
    assert np.allclose(out, 0.4 * project_T_perp(sgn, T), atol=1e-12)


def dense_neumann_oracle(G: SupportSet, T: TangentSpace, sgn, lam):
    """Solve the support-restricted system (I - P_G P_T P_G) w = sgn directly."""
    n = G.n
    idx = [i * n + j for (i, j) in G.indices]
    L = np.zeros((len(idx), len(idx)))
    for a, flat in enumerate(idx):
        E = np.zeros((n, n))
        E[flat // n, flat % n] = 1.0
        img = project_support(project_T(E, T), G)
        L[:, a] = [img[f // n, f % n] for f in idx]
    w = np.linalg.solve(np.eye(len(idx)) - L, [sgn[f // n, f % n] for f in idx])
    W = np.zeros((n, n))
    for val, f in zip(w, idx):
        W[f // n, f % n] = val
    return lam * project_T_perp(W, T)


def test_neumann_matches_dense_linear_system():
    g = rng(7)
    n = 8
    T = random_tangent(n, 2, 70)
    flat = g.choice(n * n, size=6, replace=False)
    G = SupportSet.from_indices(n, [(int(k) // n, int(k) % n) for k in flat])
    sgn = np.zeros((n, n))
    for i, j in G.indices:
        sgn[i, j] = g.choice([-1.0, 1.0])
    got = neumann_QC(G, T, sgn, lam=0.3, tol=1e-12, max_terms=500)
    ref = dense_neumann_oracle(G, T, sgn, 0.3)
    assert np.abs(got - ref).max() <= 1e-8


def test_neumann_fixed_point_identity():
    inst = gen_planted(InstanceParams(n=60, n_c=48, gamma=0.85, rho=0.1, seed=5))
    T = TangentSpace.from_factors(svd(inst.B0, DEFAULT_RANK_TOL))
    G = inst.noise_support
    sgn = np.sign(inst.C0)
    lam, tol = 0.1, 1e-10
    Q_C = neumann_QC(G, T, sgn, lam, tol=tol)
    resid = np.linalg.norm(project_support(Q_C, G) - lam * sgn)
    assert resid <= 10 * tol * lam * np.linalg.norm(sgn)


def test_neumann_output_in_tangent_complement():
    inst = gen_planted(InstanceParams(n=60, n_c=48, gamma=0.85, rho=0.1, seed=5))
    T = TangentSpace.from_factors(svd(inst.B0, DEFAULT_RANK_TOL))
    Q_C = neumann_QC(inst.noise_support, T, np.sign(inst.C0), 0.1)
    leak = np.linalg.norm(project_T(Q_C, T))
    assert leak <= 1e-10 * max(1.0, np.linalg.norm(Q_C))


def test_neumann_divergence_raises():
    # a tangent space spanning everything makes the composed operator norm 1
    T = random_tangent(6, 6, 9)
    G = gen_bernoulli_support(6, 0.5, seed=10)
    sgn = project_support(np.ones((6, 6)), G)
    with pytest.raises(NeumannDivergenceError):
        neumann_QC(G, T, sgn, lam=0.3)


def test_neumann_validation():
    T = random_tangent(6, 2, 11)
    G = gen_bernoulli_support(6, 0.3, seed=12)
    off_support = np.ones((6, 6))
    with pytest.raises(ValueError, match="supported"):
        neumann_QC(G, T, off_support, lam=0.3)
    sgn = project_support(np.ones((6, 6)), G)
    with pytest.raises(ValueError):
        neumann_QC(G, T, sgn, lam=-0.1)
    with pytest.raises(ValueError):
        neumann_QC(G, T, sgn, lam=0.3, tol=0.0)
    with pytest.raises(ValueError):
        neumann_QC(G, T, sgn, lam=0.3, max_terms=0)


def test_neumann_warns_when_truncated_early():
    inst = gen_planted(InstanceParams(n=40, n_c=32, gamma=0.85, rho=0.1, seed=6))
    T = TangentSpace.from_factors(svd(inst.B0, DEFAULT_RANK_TOL))
    sgn = np.sign(inst.C0)
    with pytest.warns(RuntimeWarning, match="truncated"):
        neumann_QC(inst.noise_support, T, sgn, 0.1, tol=1e-14, max_terms=3)


# ---------------------------------------------------------------- verification


def test_verify_report_self_consistent():
    inst = gen_planted(InstanceParams(n=60, n_c=48, gamma=0.85, rho=0.10, seed=3))
    rep = verify_certificate(inst)
    lam = rep.lam
    assert rep.conditions == (
        rep.norm_QB < 1 / 8,
        rep.residual_golfing < lam / 8,
        rep.linf_complement_B < lam / 4,
        rep.norm_QC < 1 / 8,
        rep.linf_complement_C < 1 / 4,
    )
    assert rep.overall == (all(rep.conditions) and rep.opnorm_PGPT <= 0.5 and lam < 1)
    assert abs(lam - 1 / math.sqrt(60)) < 1e-15
    assert len(rep.golfing_trace) == rep.config.k0 + 1
    assert rep.incoherence.r >= 1
    assert rep.regime_ok == (rep.config.p >= rep.regime_threshold)


def test_verify_duals_in_tangent_complement():
    inst = gen_planted(InstanceParams(n=60, n_c=48, gamma=0.85, rho=0.10, seed=4))
    rep = verify_certificate(inst)
    T = TangentSpace.from_factors(svd(inst.B0, DEFAULT_RANK_TOL))
    for Q in (rep.Q_B, rep.Q_C):
        leak = np.linalg.norm(project_T(Q, T))
        assert leak <= 1e-10 * max(1.0, np.linalg.norm(Q))


def test_verify_deterministic():
    inst = gen_planted(InstanceParams(n=50, n_c=40, gamma=0.85, rho=0.10, seed=12))
    a = verify_certificate(inst)
    b = verify_certificate(inst)
    assert np.array_equal(a.Q_B, b.Q_B)
    assert np.array_equal(a.Q_C, b.Q_C)
    assert a.conditions == b.conditions
    assert a.golfing_trace == b.golfing_trace


def test_verify_empty_noise_support():
    # no noise: the sparse dual is zero and its conditions hold trivially
    inst = gen_planted(InstanceParams(n=40, n_c=30, gamma=0.85, rho=0.0, seed=7))
    rep = verify_certificate(inst)
    assert np.array_equal(rep.Q_C, np.zeros((40, 40)))
    assert rep.conditions[3] and rep.conditions[4]
    assert rep.norm_QC == 0.0
    assert rep.opnorm_PGPT == 0.0


def test_verify_lambda_gate():
    inst = gen_planted(InstanceParams(n=40, n_c=30, gamma=0.85, rho=0.05, seed=8))
    rep = verify_certificate(inst, lam=1.0)
    assert not rep.overall


def test_verify_zero_block_rejected():
    # pick a seed whose single-vertex block draws no self-loop
    for seed in range(50):
        inst = gen_planted(InstanceParams(n=6, n_c=1, gamma=0.5, rho=0.2, seed=seed))
        if not np.any(inst.B0):
            with pytest.raises(ValueError, match="nonzero"):
                verify_certificate(inst)
            return
    pytest.fail("no seed produced an empty planted block")


def test_verify_custom_config_respected():
    inst = gen_planted(InstanceParams(n=40, n_c=32, gamma=0.85, rho=0.10, seed=9))
    cfg = GolfingConfig.for_problem(40, p=0.6, seed=5, k0=12)
    rep = verify_certificate(inst, cfg=cfg)
    assert rep.config == cfg
    assert len(rep.golfing_trace) == 13


# ---------------------------------------------------------------- concentration


def test_concentration_zero_matrix():
    T = block_tangent(20, 15)
    G = gen_bernoulli_support(20, 0.5, seed=1)
    rep = check_concentration(T, G, 0.5, np.zeros((20, 20)))
    assert rep.opnorm_deviation == 0.0
    assert rep.linf_contraction == 0.0
    assert rep.opnorm_bound == 0.0
    assert rep.linf_bound == 0.0


def test_concentration_exact_at_full_sampling():
    T = block_tangent(20, 15)
    Z = rng(2).standard_normal((20, 20))
    rep = check_concentration(T, SupportSet.full(20), 1.0, Z)
    assert rep.opnorm_deviation <= 1e-12
    assert rep.linf_contraction <= 1e-12


def test_concentration_validation():
    T = block_tangent(10, 5)
    with pytest.raises(ValueError):
        check_concentration(T, SupportSet.full(10), 0.0, np.zeros((10, 10)))
    with pytest.raises(ValueError):
        check_concentration(T, SupportSet.full(9), 0.5, np.zeros((10, 10)))


def test_concentration_tangent_contraction_high_probability():
    # the entrywise contraction bound holds on the vast majority of samples
    T = block_tangent(100, 85)
    E = T.U @ T.V.T
    hits = 0
    for s in range(200):
        G = gen_bernoulli_support(100, 0.85, seed=1000 + s)
        rep = check_concentration(T, G, 0.85, E)
        hits += rep.linf_contraction <= rep.linf_bound
    assert hits >= 190
