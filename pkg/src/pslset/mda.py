"""Mirror descent on the simplex for the inner max-min problem.

Given a surrogate system (Dtilde, p), the surrogate minimax

    min_x max_c 4 x^T d_c + p_c,    |x(i)|^2 + |x(i+ML)|^2 <= 1

is solved through its dual ``max_{q in simplex} g(q)`` with

    g(q) = min_x 4 x^T Dtilde q + q^T p = q^T p - 4 sum_i ||v_i(q)||,

where v_i pairs the real and imaginary entries of ``-Dtilde q``. The inner
minimizer sits on the unit circle for every element, which is what makes the
relaxation exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError
from .surrogate import SurrogateSystem

STEP_RULES = ("inv_sqrt", "constant")


@dataclass
class MdaConfig:
    """Inner-solver settings.

    ``normalize`` divides each subgradient by its spread (max - min) before
    the step, which makes ``gamma0`` scale free; surrogate values grow like
    M^2 and a raw step would collapse q onto a vertex in one update.
    """

    max_inner_iters: int = 200
    step_rule: str = "inv_sqrt"
    gamma0: float = 1.0
    tol: float = 1e-6
    stabilize: bool = True
    normalize: bool = True
    sparsify: bool = True

    def __post_init__(self):
        if self.max_inner_iters < 1:
            raise ValueError("max_inner_iters must be positive")
        if self.step_rule not in STEP_RULES:
            raise ValueError(f"step_rule must be one of {STEP_RULES}")
        if not self.gamma0 > 0:
            raise ValueError("gamma0 must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    def step(self, m: int) -> float:
        if self.step_rule == "inv_sqrt":
            return self.gamma0 / np.sqrt(m + 1)
        return self.gamma0


@dataclass
class MdaResult:
    """Outcome of one inner solve.

    ``q``/``x``/``value`` are the best dual point found, its recovered x and
    g(q). ``x_primal`` is the iterate x(q^m) with the smallest worst-case
    surrogate value ``primal_value``; it is the candidate the outer loop uses.
    """

    q: np.ndarray
    x: np.ndarray
    value: float
    x_primal: np.ndarray
    primal_value: float
    iterations: int
    history: list = field(default_factory=list)


def inner_minimize_x(sys: SurrogateSystem, q: np.ndarray) -> np.ndarray:
    """Minimizer of ``4 x^T Dtilde q`` over per-element unit disks."""
    return _unit_pairs(-(sys.Dtilde @ q))


def _unit_pairs(c: np.ndarray) -> np.ndarray:
    n = c.size // 2
    re, im = c[:n], c[n:]
    norm = np.hypot(re, im)
    degenerate = norm < 1e-14
    safe = np.where(degenerate, 1.0, norm)
    x = np.concatenate([np.where(degenerate, 1.0, re / safe),
                        np.where(degenerate, 0.0, im / safe)])
    return x


def dual_value(sys: SurrogateSystem, q: np.ndarray, x: np.ndarray | None = None) -> float:
    """g(q); pass the precomputed minimizer x to skip one product."""
    if x is None:
        x = inner_minimize_x(sys, q)
    return float(4.0 * (x @ (sys.Dtilde @ q)) + q @ sys.p)


def exponentiated_update(q: np.ndarray, grad: np.ndarray, gamma: float,
                         stabilize: bool = True) -> np.ndarray:
    """``q * exp(gamma * grad)`` renormalized onto the simplex."""
    e = gamma * grad
    if stabilize:
        e = e - e.max()
    with np.errstate(over="ignore", invalid="ignore"):
        w = q * np.exp(e)
        total = w.sum()
    if not np.isfinite(total) or total <= 0.0:
        raise NumericError("exponentiated update overflowed; enable stabilize")
    return w / total


def _check_finite(sys: SurrogateSystem):
    bad_cols = ~np.all(np.isfinite(sys.Dtilde), axis=0) | ~np.isfinite(sys.p)
    if bad_cols.any():
        idx = int(np.flatnonzero(bad_cols)[0])
        raise NumericError(f"non-finite surrogate data at constraint {idx} {sys.K[idx]}")


def mda_solve(sys: SurrogateSystem, cfg: MdaConfig | None = None,
              record: bool = False) -> MdaResult:
    """Maximize g(q) over the simplex by exponentiated-gradient steps.

    Each iteration recovers x(q^m), evaluates every surrogate at it (this
    vector is the subgradient of g at q^m), and moves q multiplicatively.
    """
    cfg = cfg or MdaConfig()
    nK = sys.p.size
    if nK < 1:
        raise ValueError("need at least one constraint")
    _check_finite(sys)

    q = np.full(nK, 1.0 / nK)
    best_q, best_x, best_val = q, None, -np.inf
    x_primal, primal_val = None, np.inf
    history = []
    prev_val = None
    m = 0
    for m in range(cfg.max_inner_iters):
        x = inner_minimize_x(sys, q)
        grad = sys.values(x)
        val = float(q @ grad)
        if record:
            history.append(val)
        if val > best_val:
            best_q, best_x, best_val = q, x, val
        worst = float(grad.max())
        if worst < primal_val:
            x_primal, primal_val = x, worst
        if prev_val is not None and abs(val - prev_val) / max(abs(prev_val), 1e-12) < cfg.tol:
            break
        prev_val = val

        if cfg.normalize:
            spread = float(grad.max() - grad.min())
            grad = (grad - grad.max()) / spread if spread > 0 else np.zeros_like(grad)
        q = exponentiated_update(q, grad, cfg.step(m), cfg.stabilize)

    if cfg.sparsify:
        q_final = np.where(best_q < 1e-12 / nK, 0.0, best_q)
        best_x = inner_minimize_x(sys, q_final)
    return MdaResult(best_q, best_x, best_val, x_primal, primal_val, m + 1, history)
