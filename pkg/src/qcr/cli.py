"""Command-line front end.

Subcommands: gen, solve, certify, grid, norms. Flags override values from an
optional flat key=value config file (--config); config keys match the long
flag names with dashes replaced by underscores. Exit codes: 0 success (for
certify: all conditions hold), 1 certificate conditions fail, 2 validation
error, 3 I/O error, 4 solver did not converge (result still written), 5 the
certificate series did not converge.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys

import numpy as np

from .certificate import GolfingConfig, NeumannDivergenceError, verify_certificate
from .experiments import GridSpec, export_grid, run_phase_grid, run_size_grid
from .fileio import (
    FileFormatError,
    parse_config_file,
    read_matrix_any,
    write_instance,
    write_report,
    write_result,
)
from .instances import InstanceParams, derive_seed, gen_planted
from .linalg import NORM_KINDS, norm
from .solver import (
    QuasiCliqueParams,
    SolverOptions,
    recovery_success,
    relative_error,
    solve_quasi_clique,
    solve_rpca,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_CERT_FAILED = 1
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_NONCONVERGED = 4
EXIT_NEUMANN = 5
EXIT_INTERRUPTED = 130


def _merged(args, cfg: dict, key: str, cast, default=None):
    """Flag value if given, else config-file value, else default."""
    val = getattr(args, key, None)
    if val is not None:
        return val
    if key in cfg:
        raw = cfg[key]
        return raw.lower() in ("1", "true", "yes") if cast is bool else cast(raw)
    return default


def _require(value, name: str):
    if value is None:
        raise ValueError(f"missing required parameter --{name.replace('_', '-')}")
    return value


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def cmd_gen(args, cfg) -> int:
    params = InstanceParams(
        n=_require(_merged(args, cfg, "n", int), "n"),
        n_c=_require(_merged(args, cfg, "nc", int), "nc"),
        gamma=_require(_merged(args, cfg, "gamma", float), "gamma"),
        rho=_require(_merged(args, cfg, "rho", float), "rho"),
        seed=_merged(args, cfg, "seed", int, 0),
    )
    out = _merged(args, cfg, "out", str, "instance.txt")
    inst = gen_planted(params)
    write_instance(inst, out)
    print(
        f"n={params.n} n_c={params.n_c} gamma={params.gamma} rho={params.rho} "
        f"seed={params.seed} |gamma_support|={len(inst.gamma_support)} "
        f"|noise_support|={len(inst.noise_support)} -> {out}"
    )
    return EXIT_OK


def cmd_solve(args, cfg) -> int:
    path = _require(_merged(args, cfg, "input", str), "input")
    M, inst = read_matrix_any(path)
    n = M.shape[0]
    mode = _merged(args, cfg, "mode", str, "plain")
    if mode not in ("plain", "quasi_clique"):
        raise ValueError(f"--mode must be 'plain' or 'quasi_clique', got {mode!r}")
    lam = _merged(args, cfg, "lam", float)
    opts = SolverOptions(
        lam=lam,
        mu0=_merged(args, cfg, "mu0", float),
        mu_growth=_merged(args, cfg, "mu_growth", float, 1.5),
        tol_primal=_merged(args, cfg, "tol", float, 1e-8),
        max_iters=_merged(args, cfg, "max_iters", int, 2000),
        mode="plain_decomposition" if mode == "plain" else "quasi_clique_constrained",
    )
    if mode == "quasi_clique":
        gamma = _merged(args, cfg, "gamma", float, inst.params.gamma if inst else None)
        eta = _merged(args, cfg, "eta", int, inst.params.n_c if inst else None)
        qc = QuasiCliqueParams(
            gamma=_require(gamma, "gamma"), eta=_require(eta, "eta")
        )
        result = solve_quasi_clique(M, qc, opts)
    else:
        result = solve_rpca(M, opts)

    lam_used = opts.resolve_lam(n)
    extras: dict = {}
    if inst is not None:
        rel = relative_error(result.B_star, inst.block_pattern)
        recovered = result.converged and recovery_success(result.B_star, inst.block_pattern)
        extras = {
            "recovery": bool(recovered),
            "relative_error": rel,
            "instance": {
                "n": inst.params.n,
                "n_c": inst.params.n_c,
                "gamma": inst.params.gamma,
                "rho": inst.params.rho,
                "seed": inst.params.seed,
            },
        }
    out = _merged(args, cfg, "out", str, "result.json")
    write_result(result, out, lam=lam_used, mode=opts.mode, extras=extras)
    print(
        f"mode={opts.mode} lambda={lam_used:.6g} iterations={result.iterations} "
        f"primal_residual={result.primal_residual:.3e} objective={result.objective:.8g} "
        f"converged={result.converged} -> {out}"
    )
    if inst is not None:
        verdict = "recovered" if extras["recovery"] else "not recovered"
        print(f"verdict: {verdict} (relative error {extras['relative_error']:.3e})")
    return EXIT_OK if result.converged else EXIT_NONCONVERGED


def cmd_certify(args, cfg) -> int:
    path = _require(_merged(args, cfg, "input", str), "input")
    _, inst = read_matrix_any(path)
    if inst is None:
        raise ValueError("certify requires an instance file with ground truth, not a bare matrix")
    n = inst.params.n
    lam = _merged(args, cfg, "lam", float, 1.0 / math.sqrt(n))
    p = _merged(args, cfg, "p", float)
    k0 = _merged(args, cfg, "k0", int)
    cert_seed = _merged(args, cfg, "cert_seed", int)
    golf_cfg = None
    if p is not None or k0 is not None or cert_seed is not None:
        golf_cfg = GolfingConfig.for_problem(
            n,
            p=p if p is not None else inst.params.gamma,
            seed=cert_seed if cert_seed is not None else derive_seed(inst.params.seed, 0xCE27),
            k0=k0,
        )
    report = verify_certificate(
        inst,
        lam=lam,
        cfg=golf_cfg,
        rank_tol=_merged(args, cfg, "rank_tol", float, 0.25),
        regime_c0=_merged(args, cfg, "c0", float, 1.0),
    )
    out = _merged(args, cfg, "out", str, "report.json")
    write_report(report, out, include_matrices=bool(getattr(args, "include_matrices", False)))

    checks = [
        ("spectral norm of golfing half", report.norm_QB, 1 / 8, "<"),
        ("on-support residual of golfing half", report.residual_golfing, report.lam / 8, "<"),
        ("off-support entry norm, golfing half", report.linf_complement_B, report.lam / 4, "<"),
        ("spectral norm of series half", report.norm_QC, 1 / 8, "<"),
        ("off-support entry norm, series half", report.linf_complement_C, 1 / 4, "<"),
    ]
    for (label, measured, threshold, rel), ok in zip(checks, report.conditions):
        mark = "PASS" if ok else "FAIL"
        print(f"[{mark}] {label}: {measured:.6f} {rel} {threshold:.6f}")
    gate1 = report.opnorm_PGPT <= 0.5
    gate2 = report.lam < 1.0
    print(f"[{'PASS' if gate1 else 'FAIL'}] support/tangent operator norm: {report.opnorm_PGPT:.6f} <= 0.5")
    print(f"[{'PASS' if gate2 else 'FAIL'}] lambda: {report.lam:.6f} < 1")
    print(f"overall: {report.overall} -> {out}")
    return EXIT_OK if report.overall else EXIT_CERT_FAILED


def _default_sizes(n_max: int) -> tuple[int, ...]:
    return tuple(range(25, n_max + 1, 25))


def cmd_grid(args, cfg) -> int:
    kind = _require(_merged(args, cfg, "kind", str), "kind")
    if kind not in ("size", "phase"):
        raise ValueError(f"--kind must be 'size' or 'phase', got {kind!r}")
    trials = _merged(args, cfg, "trials", int, 10)
    base_seed = _merged(args, cfg, "base_seed", int, 0)
    threads = _merged(args, cfg, "threads", int)
    if threads is None and "QCR_THREADS" in os.environ:
        threads = int(os.environ["QCR_THREADS"])

    if kind == "size":
        n_list = _merged(args, cfg, "n_list", _int_list)
        if n_list is None:
            n_list = _default_sizes(_merged(args, cfg, "n_max", int, 100))
        fractions = _merged(
            args, cfg, "fractions", _float_list, tuple(round(0.1 * k, 1) for k in range(1, 11))
        )
        spec = GridSpec(
            axis1_name="n",
            axis1_values=n_list,
            axis2_name="fraction",
            axis2_values=fractions,
            fixed={
                "gamma": _merged(args, cfg, "gamma", float, 0.85),
                "rho": _merged(args, cfg, "rho", float, 0.25),
            },
            trials=trials,
            base_seed=base_seed,
        )
        runner = run_size_grid
    else:
        spec = GridSpec(
            axis1_name="gamma",
            axis1_values=_merged(
                args, cfg, "gammas", _float_list, tuple(round(0.5 + 0.1 * k, 1) for k in range(6))
            ),
            axis2_name="rho",
            axis2_values=_merged(
                args, cfg, "rhos", _float_list, tuple(round(0.1 * k, 1) for k in range(8))
            ),
            fixed={
                "n": _merged(args, cfg, "n", int, 100),
                "n_c": _merged(args, cfg, "nc", int, 85),
            },
            trials=trials,
            base_seed=base_seed,
        )
        runner = run_phase_grid

    out_dir = _merged(args, cfg, "out_dir", str, ".")
    prefix = _merged(args, cfg, "prefix", str, f"{kind}_grid")
    os.makedirs(out_dir, exist_ok=True)
    path_prefix = os.path.join(out_dir, prefix)

    grid = runner(spec, threads=threads)
    export_grid(grid, path_prefix)
    print(
        f"{kind} grid {grid.success_rate.shape[0]}x{grid.success_rate.shape[1]} "
        f"trials={trials} total_time={grid.wall_times.sum():.1f}s -> "
        f"{path_prefix}.csv, {path_prefix}.pgm, {path_prefix}_manifest.json"
    )
    if not grid.complete:
        print("interrupted: partial results written, manifest marked incomplete", file=sys.stderr)
        return EXIT_INTERRUPTED
    return EXIT_OK


def cmd_norms(args, cfg) -> int:
    path = _require(_merged(args, cfg, "input", str), "input")
    M, _ = read_matrix_any(path)
    for kind in NORM_KINDS:
        print(f"{kind} = {norm(M, kind)!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcr",
        description="Planted quasi-clique recovery: generate instances, solve the convex "
        "decomposition, verify dual certificates, and run recovery grids.",
    )
    parser.add_argument("--config", help="flat key=value config file; flags override it")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a planted instance file")
    p.add_argument("--n", type=int)
    p.add_argument("--nc", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="solve the decomposition for an instance or matrix file")
    p.add_argument("--input")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--mode", choices=("plain", "quasi_clique"))
    p.add_argument("--eta", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--mu0", type=float)
    p.add_argument("--mu-growth", dest="mu_growth", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("certify", help="construct and verify the dual certificate")
    p.add_argument("--input")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--k0", type=int)
    p.add_argument("--cert-seed", dest="cert_seed", type=int)
    p.add_argument("--rank-tol", dest="rank_tol", type=float)
    p.add_argument("--c0", type=float)
    p.add_argument("--include-matrices", dest="include_matrices", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("grid", help="run a recovery grid and export CSV/PGM/manifest")
    p.add_argument("--kind", choices=("size", "phase"))
    p.add_argument("--trials", type=int)
    p.add_argument("--base-seed", dest="base_seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--n-list", dest="n_list", type=_int_list)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--fractions", type=_float_list)
    p.add_argument("--gammas", type=_float_list)
    p.add_argument("--rhos", type=_float_list)
    p.add_argument("--n", type=int)
    p.add_argument("--nc", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--prefix")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("norms", help="print all matrix norms of a matrix or instance file")
    p.add_argument("--input")
    p.set_defaults(func=cmd_norms)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = parse_config_file(args.config) if args.config else {}
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FileFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    try:
        return args.func(args, cfg)
    except NeumannDivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NEUMANN
    except (FileFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
