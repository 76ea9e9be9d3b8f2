"""Monte-Carlo recovery sweeps over (size x planted fraction) and
(density x noise) grids, with deterministic seeding, optional process
parallelism, and CSV/PGM/manifest export."""

from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .instances import InstanceParams, derive_seed, gen_planted
from .solver import (
    DecompositionResult,
    InfeasibleError,
    QuasiCliqueParams,
    SolverOptions,
    recovery_success,
    relative_error,
    solve_quasi_clique,
    solve_rpca,
)

__all__ = [
    "GridSpec",
    "RecoveryGrid",
    "EtaSweepEntry",
    "run_size_grid",
    "run_phase_grid",
    "run_eta_sweep",
    "export_grid",
    "planted_size",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridSpec:
    """Two named parameter axes, the fixed remaining instance parameters, the
    per-cell trial count, and the base seed every trial seed derives from."""

    axis1_name: str
    axis1_values: tuple
    axis2_name: str
    axis2_values: tuple
    fixed: dict
    trials: int = 10
    base_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "axis1_values", tuple(self.axis1_values))
        object.__setattr__(self, "axis2_values", tuple(self.axis2_values))
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not self.axis1_values or not self.axis2_values:
            raise ValueError("axes must be nonempty")
        names = {self.axis1_name, self.axis2_name} | set(self.fixed)
        if len(names) != 2 + len(self.fixed):
            raise ValueError("axis and fixed parameter names must be disjoint")


@dataclass(frozen=True, eq=False)
class RecoveryGrid:
    spec: GridSpec
    success_rate: np.ndarray
    mean_rel_error: np.ndarray
    wall_times: np.ndarray
    complete: bool = True


@dataclass(frozen=True, eq=False)
class EtaSweepEntry:
    eta: int
    result: DecompositionResult | None
    error: str | None


def planted_size(n: int, fraction: float) -> int:
    """Planted block size for a fractional specification: fraction*n rounded
    half-up, floored at 1."""
    return max(1, int(np.floor(fraction * n + 0.5)))


def _cell_params(kind: str, spec: GridSpec, i: int, j: int) -> tuple[int, int, float, float]:
    a1 = spec.axis1_values[i]
    a2 = spec.axis2_values[j]
    if kind == "size":
        n = int(a1)
        n_c = planted_size(n, float(a2))
        return n, n_c, float(spec.fixed["gamma"]), float(spec.fixed["rho"])
    n = int(spec.fixed["n"])
    return n, int(spec.fixed["n_c"]), float(a1), float(a2)


def _run_cell(args) -> tuple[int, int, int, float, float]:
    kind, spec, i, j = args
    n, n_c, gamma, rho = _cell_params(kind, spec, i, j)
    start = time.perf_counter()
    successes = 0
    rel_sum = 0.0
    for t in range(spec.trials):
        seed = derive_seed(spec.base_seed, i, j, t)
        try:
            inst = gen_planted(InstanceParams(n=n, n_c=n_c, gamma=gamma, rho=rho, seed=seed))
            res = solve_rpca(inst.A, SolverOptions())
            rel = relative_error(res.B_star, inst.block_pattern)
            if res.converged and recovery_success(res.B_star, inst.block_pattern):
                successes += 1
        except Exception:
            log.warning("trial (%d, %d, %d) failed", i, j, t, exc_info=True)
            rel = float("inf")
        rel_sum += rel
    return i, j, successes, rel_sum, time.perf_counter() - start


def _resolve_threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("QCR_THREADS", "1"))
    return max(1, threads)


def _run_grid(kind: str, spec: GridSpec, threads: int | None) -> RecoveryGrid:
    shape = (len(spec.axis1_values), len(spec.axis2_values))
    success = np.zeros(shape)
    mean_rel = np.zeros(shape)
    wall = np.zeros(shape)
    jobs = [(kind, spec, i, j) for i in range(shape[0]) for j in range(shape[1])]
    threads = _resolve_threads(threads)
    outcomes: list[tuple[int, int, int, float, float]] = []
    complete = True
    try:
        if threads > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                for out in pool.map(_run_cell, jobs):
                    outcomes.append(out)
        else:
            for job in jobs:
                outcomes.append(_run_cell(job))
    except KeyboardInterrupt:
        # keep whatever cells finished; the caller exports them flagged incomplete
        complete = False
    # aggregation in fixed (i, j) order regardless of completion order
    for i, j, successes, rel_sum, secs in sorted(outcomes, key=lambda o: (o[0], o[1])):
        success[i, j] = successes / spec.trials
        mean_rel[i, j] = rel_sum / spec.trials
        wall[i, j] = secs
    return RecoveryGrid(
        spec=spec,
        success_rate=success,
        mean_rel_error=mean_rel,
        wall_times=wall,
        complete=complete,
    )


def run_size_grid(spec: GridSpec, threads: int | None = None) -> RecoveryGrid:
    """Recovery rates over (graph size, planted fraction) cells at fixed
    gamma, rho. Each trial solves the plain decomposition at lam = 1/sqrt(n)
    and scores recovery of the planted block pattern."""
    if (spec.axis1_name, spec.axis2_name) != ("n", "fraction"):
        raise ValueError("size grid axes must be (n, fraction)")
    if not {"gamma", "rho"} <= set(spec.fixed):
        raise ValueError("size grid requires fixed gamma and rho")
    return _run_grid("size", spec, threads)


def run_phase_grid(spec: GridSpec, threads: int | None = None) -> RecoveryGrid:
    """Recovery rates over (gamma, rho) cells at fixed n, n_c."""
    if (spec.axis1_name, spec.axis2_name) != ("gamma", "rho"):
        raise ValueError("phase grid axes must be (gamma, rho)")
    if not {"n", "n_c"} <= set(spec.fixed):
        raise ValueError("phase grid requires fixed n and n_c")
    return _run_grid("phase", spec, threads)


def run_eta_sweep(A, gamma: float, eta_values, opts: SolverOptions | None = None) -> list[EtaSweepEntry]:
    """One constrained solve per target size eta, in order. Per-eta failures
    (infeasible targets included) are recorded and the sweep continues."""
    eta_values = list(eta_values)
    if not eta_values:
        raise ValueError("eta_values must be nonempty")
    for eta in eta_values:
        if int(eta) != eta or eta < 1:
            raise ValueError(f"eta values must be positive integers, got {eta}")
    entries = []
    for eta in eta_values:
        try:
            res = solve_quasi_clique(A, QuasiCliqueParams(gamma=gamma, eta=int(eta)), opts)
            entries.append(EtaSweepEntry(eta=int(eta), result=res, error=None))
        except InfeasibleError as exc:
            entries.append(EtaSweepEntry(eta=int(eta), result=None, error=str(exc)))
        except Exception as exc:
            log.warning("eta sweep failed at eta=%d", eta, exc_info=True)
            entries.append(EtaSweepEntry(eta=int(eta), result=None, error=str(exc)))
    return entries


def _write_text(path: str, text: str) -> None:
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc


def export_grid(grid: RecoveryGrid, path_prefix: str) -> None:
    """Write <prefix>.csv (header row/column = axis values, cells = success
    rates), <prefix>.pgm (8-bit grayscale, 255 = rate 1.0, axis1 on rows), and
    <prefix>_manifest.json (grid spec, code version, per-cell timings)."""
    from . import __version__

    spec = grid.spec
    lines = [",".join([f"{spec.axis1_name}/{spec.axis2_name}"] + [repr(v) for v in spec.axis2_values])]
    for i, v1 in enumerate(spec.axis1_values):
        cells = [repr(float(r)) for r in grid.success_rate[i]]
        lines.append(",".join([repr(v1)] + cells))
    _write_text(path_prefix + ".csv", "\n".join(lines) + "\n")

    pixels = np.rint(np.clip(grid.success_rate, 0.0, 1.0) * 255).astype(np.uint8)
    header = f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode("ascii")
    try:
        with open(path_prefix + ".pgm", "wb") as fh:
            fh.write(header + pixels.tobytes())
    except OSError as exc:
        raise OSError(f"failed writing {path_prefix}.pgm: {exc}") from exc

    manifest = {
        "spec": {
            "axis1_name": spec.axis1_name,
            "axis1_values": list(spec.axis1_values),
            "axis2_name": spec.axis2_name,
            "axis2_values": list(spec.axis2_values),
            "fixed": spec.fixed,
            "trials": spec.trials,
            "base_seed": spec.base_seed,
        },
        "version": __version__,
        "complete": grid.complete,
        "timings": [[float(t) for t in row] for row in grid.wall_times],
    }
    _write_text(path_prefix + "_manifest.json", json.dumps(manifest, indent=2) + "\n")
