"""Outer majorization-minimization loop for PSL minimization."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .correlation import LagConstraintSet, SequenceSet, correlate_all_fft, isl, psl
from .errors import NumericError
from .mda import MdaConfig, mda_solve
from .surrogate import build_surrogate, to_complex

log = logging.getLogger(__name__)

STATUSES = ("converged", "max_iters", "stalled")


@dataclass
class SolverConfig:
    L: int
    M: int
    max_outer_iters: int = 500
    eps: float = 1e-6
    seed: int = 0
    init: str = "random_phase"
    init_file: str | None = None
    mda: MdaConfig = field(default_factory=MdaConfig)
    eigen_mode: str = "spectral_bound_D"
    curvature: str = "direct"
    # absolute slack on the per-step PSL increase before a candidate is rejected
    descent_slack: float = 1e-9
    # keep every inner g(q) value as (outer_iter, inner_iter, g) in the trace
    record_inner: bool = False

    def __post_init__(self):
        if self.L < 1 or self.M < 2:
            raise ValueError(f"need L >= 1 and M >= 2, got L={self.L}, M={self.M}")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be at least 1")
        if self.init not in ("random_phase", "from_file"):
            raise ValueError(f"unknown init {self.init!r}")
        if self.init == "from_file" and not self.init_file:
            raise ValueError("init='from_file' needs init_file")


@dataclass
class IterationRecord:
    iter: int
    psl: float
    isl: float
    inner_iters: int
    seconds: float


@dataclass
class SolverTrace:
    records: list[IterationRecord]
    final: SequenceSet
    status: str
    inner_history: list[tuple[int, int, float]] = field(default_factory=list)

    @property
    def psl(self) -> np.ndarray:
        return np.array([r.psl for r in self.records])

    @property
    def final_psl(self) -> float:
        return self.records[-1].psl

    @property
    def initial_psl(self) -> float:
        return self.records[0].psl


def init_random(L: int, M: int, seed: int = 0) -> SequenceSet:
    """Phases 2*pi*theta with theta ~ U[0, 1), reproducible per seed."""
    if L < 1 or M < 2:
        raise ValueError(f"need L >= 1 and M >= 2, got L={L}, M={M}")
    rng = np.random.default_rng(seed)
    return SequenceSet(2.0 * np.pi * rng.random((L, M)))


def stopping_eps(psl_t: float, psl_prev: float) -> float:
    """Relative PSL change between consecutive outer iterations."""
    if not psl_prev > 0:
        raise ValueError(f"previous PSL must be positive, got {psl_prev}")
    return abs(psl_t - psl_prev) / psl_prev


def _candidate(x: np.ndarray, L: int, M: int) -> SequenceSet:
    return SequenceSet(np.angle(to_complex(x)).reshape(L, M))


def mm_step(current: SequenceSet, K: LagConstraintSet, cfg: SolverConfig,
            mda_cfg: MdaConfig | None = None, table=None):
    """One surrogate build + inner solve; returns (candidate, MdaResult)."""
    if table is None:
        table = correlate_all_fft(current)
    sys = build_surrogate(current, K, table, eigen_mode=cfg.eigen_mode,
                          curvature=cfg.curvature)
    res = mda_solve(sys, mda_cfg or cfg.mda, record=cfg.record_inner)
    return _candidate(res.x_primal, current.L, current.M), res


def design(cfg: SolverConfig, initial: SequenceSet | None = None,
           callback: Callable[[IterationRecord], None] | None = None) -> SolverTrace:
    """Run the MM iterations from ``initial`` (random phases by default).

    Stops after ``max_outer_iters`` accepted steps, when the relative PSL
    change drops below ``eps``, or when a candidate fails to descend twice in
    a row (status ``"stalled"``; the last accepted iterate is returned).
    """
    if initial is None:
        if cfg.init == "from_file":
            from .io import load_sequences

            initial = load_sequences(cfg.init_file)
        else:
            initial = init_random(cfg.L, cfg.M, cfg.seed)
    if (initial.L, initial.M) != (cfg.L, cfg.M):
        raise ValueError(f"initial set is {initial.L}x{initial.M}, config wants {cfg.L}x{cfg.M}")

    K = LagConstraintSet(cfg.L, cfg.M)
    current = initial
    table = correlate_all_fft(current)
    cur_psl = psl(table, K)
    records = [IterationRecord(0, cur_psl, isl(table, K), 0, 0.0)]
    if callback:
        callback(records[0])
    status = "max_iters"
    inner_history: list[tuple[int, int, float]] = []

    for t in range(1, cfg.max_outer_iters + 1):
        start = time.perf_counter()
        cand, res = mm_step(current, K, cfg, table=table)
        inner = res.iterations
        inner_history.extend((t, m, g) for m, g in enumerate(res.history))
        cand_table = correlate_all_fft(cand)
        cand_psl = psl(cand_table, K)
        if not np.isfinite(cand_psl):
            raise NumericError(f"non-finite PSL at outer iteration {t}")
        if cand_psl > cur_psl + cfg.descent_slack:
            retry = replace(cfg.mda, max_inner_iters=2 * cfg.mda.max_inner_iters)
            cand, res = mm_step(current, K, cfg, mda_cfg=retry, table=table)
            inner_history.extend((t, inner + m, g) for m, g in enumerate(res.history))
            inner += res.iterations
            cand_table = correlate_all_fft(cand)
            cand_psl = psl(cand_table, K)
            if cand_psl > cur_psl + cfg.descent_slack:
                log.info("outer iteration %d: no descent after retry, stopping", t)
                status = "stalled"
                break

        prev_psl = cur_psl
        current, table, cur_psl = cand, cand_table, cand_psl
        rec = IterationRecord(t, cur_psl, isl(table, K), inner, time.perf_counter() - start)
        records.append(rec)
        if callback:
            callback(rec)
        log.debug("iter %d psl %.6f inner %d", t, cur_psl, inner)
        if stopping_eps(cur_psl, prev_psl) <= cfg.eps:
            status = "converged"
            break

    return SolverTrace(records, current, status, inner_history)
