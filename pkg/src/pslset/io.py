"""File formats: sequence JSON, trace/correlation/image CSVs, scene JSON.

Floats are written with ``repr`` so files round-trip exactly and repeated
runs produce byte-identical output.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .correlation import (CorrelationTable, LagConstraintSet, SequenceSet, correlate_all_fft,
                          isl, psl_argmax)


def _f(v: float) -> str:
    return repr(float(v))


def save_sequences(set_: SequenceSet, path) -> None:
    doc = {"L": set_.L, "M": set_.M, "phases": set_.phases.tolist()}
    Path(path).write_text(json.dumps(doc) + "\n")


def load_sequences(path) -> SequenceSet:
    """Read ``{"L", "M", "phases"}``; raises ValueError on malformed input."""
    try:
        doc = json.loads(Path(path).read_text())
        L, M = int(doc["L"]), int(doc["M"])
        phases = np.asarray(doc["phases"], dtype=float)
    except (OSError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read sequence file {path}: {exc}") from exc
    if phases.shape != (L, M):
        raise ValueError(f"phases have shape {phases.shape}, header says ({L}, {M})")
    return SequenceSet(phases)


def write_trace_csv(trace, path, timing: bool = True) -> None:
    """``iter,psl,isl,inner_iters,seconds``; ``timing=False`` writes 0 seconds
    so the file depends only on the numerical path."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter", "psl", "isl", "inner_iters", "seconds"])
        for r in trace.records:
            w.writerow([r.iter, _f(r.psl), _f(r.isl), r.inner_iters,
                        _f(r.seconds if timing else 0.0)])


def write_inner_trace_csv(history, path) -> None:
    """``outer_iter,inner_iter,g_value`` rows from ``SolverTrace.inner_history``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["outer_iter", "inner_iter", "g_value"])
        for t, m, g in history:
            w.writerow([t, m, _f(g)])


def read_trace_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [{"iter": int(r["iter"]), "psl": float(r["psl"]), "isl": float(r["isl"]),
             "inner_iters": int(r["inner_iters"]), "seconds": float(r["seconds"])}
            for r in rows]


def write_correlation_csv(table: CorrelationTable, path) -> None:
    """``pair_i,pair_j,lag,abs_value`` for every ordered pair and every lag."""
    lags = table.lags()
    mags = np.abs(table.values)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["pair_i", "pair_j", "lag", "abs_value"])
        for i in range(table.L):
            for j in range(table.L):
                for n, k in enumerate(lags):
                    w.writerow([i, j, int(k), _f(mags[i, j, n])])


def read_correlation_csv(path) -> dict:
    """Map ``(i, j) -> (lags, abs_values)`` arrays."""
    out: dict = {}
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            key = (int(r["pair_i"]), int(r["pair_j"]))
            out.setdefault(key, ([], []))
            out[key][0].append(int(r["lag"]))
            out[key][1].append(float(r["abs_value"]))
    return {k: (np.array(a), np.array(b)) for k, (a, b) in out.items()}


def metrics_summary(table: CorrelationTable, K: LagConstraintSet) -> dict:
    value, c = psl_argmax(table, K)
    return {"psl": value, "isl": isl(table, K),
            "argmax": {"i": c.i, "j": c.j, "k": c.k}}


def write_surrogate_debug_csv(sys, path) -> None:
    """Per-constraint ``i,j,k,abs_r,lambda_bound,p`` of a surrogate system."""
    r = np.abs(correlate_all_fft(sys.iterate).at(sys.K))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "k", "abs_r", "lambda_bound", "p"])
        for n, c in enumerate(sys.K):
            w.writerow([c.i, c.j, c.k, _f(r[n]), _f(sys.lam[n]), _f(sys.p[n])])


def write_matrix_csv(mat: np.ndarray, path, header: list[str] | None = None) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow(header)
        for row in np.asarray(mat):
            w.writerow([_f(v) for v in row])


def read_matrix_csv(path, header: bool = True) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if header:
        rows = rows[1:]
    return np.array([[float(v) for v in row] for row in rows])


def load_scene(path, seed: int = 0):
    """Scene JSON: either explicit ``beta`` as [re, im] pairs or an ASCII
    ``mask`` whose '#' cells get CN(0, 1) reflectivities drawn from ``seed``."""
    from .radar import RadarScene, scene_from_mask

    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read scene file {path}: {exc}") from exc
    sigma2 = float(doc.get("sigma2", 1e-3))
    if "mask" in doc:
        lo, hi = doc.get("theta_range_deg", [-40.0, 40.0])
        return scene_from_mask(doc["mask"], theta_range=(lo, hi), noise_variance=sigma2,
                               seed=int(doc.get("seed", seed)))
    try:
        beta = np.asarray(doc["beta"], dtype=float)
        Q, P = int(doc["Q"]), int(doc["P"])
        theta = np.asarray(doc["theta_deg"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed scene file {path}: {exc}") from exc
    if beta.shape != (Q, P, 2):
        raise ValueError(f"beta has shape {beta.shape}, expected ({Q}, {P}, 2)")
    return RadarScene(theta, beta[..., 0] + 1j * beta[..., 1], noise_variance=sigma2)


def save_scene(scene, path) -> None:
    beta = np.stack([scene.beta.real, scene.beta.imag], axis=-1)
    doc = {"Q": scene.Q, "P": scene.P, "theta_deg": scene.theta_deg.tolist(),
           "beta": beta.tolist(), "sigma2": scene.noise_variance}
    Path(path).write_text(json.dumps(doc) + "\n")
