"""File formats: plain-text instances, dense CSV matrices, JSON documents for
solver results and certificate reports, and flat key=value config files."""

from __future__ import annotations

import json

import numpy as np

from .certificate import CertificateReport
from .instances import InstanceParams, PlantedInstance, gen_planted
from .linalg import SupportSet
from .solver import DecompositionResult

__all__ = [
    "FileFormatError",
    "write_instance",
    "read_instance",
    "write_matrix_csv",
    "read_matrix_csv",
    "read_matrix_any",
    "write_result",
    "read_result",
    "write_report",
    "parse_config_file",
    "MATRIX_INLINE_LIMIT",
]

MATRIX_INLINE_LIMIT = 500


class FileFormatError(ValueError):
    """A file exists but does not parse as the expected format."""


def _fmt(x: float) -> str:
    return repr(int(x)) if float(x).is_integer() else repr(float(x))


def write_instance(inst: PlantedInstance, path: str) -> None:
    """Plain-text instance: header line `n n_c gamma rho seed`, then one
    `i j v` line per nonzero of A in row-major order."""
    p = inst.params
    lines = [f"{p.n} {p.n_c} {_fmt(p.gamma)} {_fmt(p.rho)} {p.seed}"]
    ii, jj = np.nonzero(inst.A)
    for i, j in zip(ii.tolist(), jj.tolist()):
        lines.append(f"{i} {j} {_fmt(inst.A[i, j])}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_instance(path: str) -> PlantedInstance:
    """Parse an instance file; the block/noise split is reconstructed from the
    header's n_c (nonzeros inside {0..n_c-1}^2 belong to the planted block)."""
    with open(path) as fh:
        raw = [ln.strip() for ln in fh]
    lines = [ln for ln in raw if ln and not ln.startswith("#")]
    if not lines:
        raise FileFormatError(f"{path}: empty instance file")
    head = lines[0].split()
    if len(head) != 5:
        raise FileFormatError(f"{path}: header must be 'n n_c gamma rho seed'")
    try:
        n, n_c = int(head[0]), int(head[1])
        gamma, rho = float(head[2]), float(head[3])
        seed = int(head[4])
        params = InstanceParams(n=n, n_c=n_c, gamma=gamma, rho=rho, seed=seed)
    except ValueError as exc:
        raise FileFormatError(f"{path}: bad header: {exc}") from exc

    A = np.zeros((n, n))
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 3:
            raise FileFormatError(f"{path}: bad triplet line {ln!r}")
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as exc:
            raise FileFormatError(f"{path}: bad triplet line {ln!r}") from exc
        if not (0 <= i < n and 0 <= j < n):
            raise FileFormatError(f"{path}: index ({i}, {j}) out of range for n={n}")
        A[i, j] = v

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


def regenerate(params: InstanceParams) -> PlantedInstance:
    return gen_planted(params)


def write_matrix_csv(M, path: str) -> None:
    M = np.asarray(M, dtype=float)
    with open(path, "w") as fh:
        for row in M:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def read_matrix_csv(path: str) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for ln in fh:
            ln = ln.strip()
            if not ln:
                continue
            try:
                rows.append([float(x) for x in ln.split(",")])
            except ValueError as exc:
                raise FileFormatError(f"{path}: bad CSV row {ln!r}") from exc
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise FileFormatError(f"{path}: empty or ragged CSV matrix")
    return np.asarray(rows)


def read_matrix_any(path: str):
    """Load either an instance file (returns (A, instance)) or a bare CSV
    matrix (returns (M, None)), dispatching on extension."""
    if path.endswith(".csv"):
        return read_matrix_csv(path), None
    inst = read_instance(path)
    return inst.A, inst


def _matrix_payload(M: np.ndarray, path_base: str, tag: str):
    if M.shape[0] <= MATRIX_INLINE_LIMIT:
        return {tag: M.tolist()}
    sidecar = f"{path_base}.{tag}.csv"
    write_matrix_csv(M, sidecar)
    return {f"{tag}_path": sidecar}


def write_result(
    result: DecompositionResult,
    path: str,
    lam: float,
    mode: str,
    extras: dict | None = None,
) -> None:
    doc = {
        "mode": mode,
        "lambda": lam,
        "n": int(result.B_star.shape[0]),
        "iterations": result.iterations,
        "primal_residual": result.primal_residual,
        "objective": result.objective,
        "converged": result.converged,
    }
    if extras:
        doc.update(extras)
    doc.update(_matrix_payload(np.asarray(result.B_star), path, "B_star"))
    doc.update(_matrix_payload(np.asarray(result.C_star), path, "C_star"))
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def read_result(path: str) -> dict:
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"{path}: bad JSON: {exc}") from exc


def write_report(report: CertificateReport, path: str, include_matrices: bool = False) -> None:
    doc = {
        "lambda": report.lam,
        "norm_QB": report.norm_QB,
        "residual_golfing": report.residual_golfing,
        "linf_complement_B": report.linf_complement_B,
        "norm_QC": report.norm_QC,
        "linf_complement_C": report.linf_complement_C,
        "opnorm_PGPT": report.opnorm_PGPT,
        "conditions": list(report.conditions),
        "overall": report.overall,
        "joint_norm_Q": report.joint_norm_Q,
        "joint_residual": report.joint_residual,
        "joint_linf_complement": report.joint_linf_complement,
        "golfing_trace": list(report.golfing_trace),
        "incoherence": {
            "mu_row": report.incoherence.mu_row,
            "mu_col": report.incoherence.mu_col,
            "mu_joint": report.incoherence.mu_joint,
            "mu": report.incoherence.mu,
            "r": report.incoherence.r,
            "n": report.incoherence.n,
        },
        "config": {
            "k0": report.config.k0,
            "q": report.config.q,
            "p": report.config.p,
            "seed": report.config.seed,
        },
        "regime_threshold": report.regime_threshold,
        "regime_ok": report.regime_ok,
    }
    if include_matrices:
        doc["Q_B"] = np.asarray(report.Q_B).tolist()
        doc["Q_C"] = np.asarray(report.Q_C).tolist()
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def parse_config_file(path: str) -> dict[str, str]:
    """Flat `key = value` config; blank lines and #-comments ignored."""
    out: dict[str, str] = {}
    with open(path) as fh:
        for lineno, ln in enumerate(fh, 1):
            ln = ln.strip()
            if not ln or ln.startswith("#"):
                continue
            if "=" not in ln:
                raise FileFormatError(f"{path}:{lineno}: expected 'key = value', got {ln!r}")
            key, _, value = ln.partition("=")
            out[key.strip()] = value.strip()
    return out
