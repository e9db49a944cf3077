"""Linear majorizers of the squared correlation magnitudes.

For every lag constraint c = (i, j, k) the objective ``2|r_c(s)|^2`` is bounded
on the unimodular torus by an affine function of ``x = [Re(s); Im(s)]``::

    2|r_c(s)|^2 <= 4 x^T d_c + p_c,      with equality at s = s^t.

Two curvature constructions are provided.

``direct`` (default)
    ``2|r|^2 <= 2|r_t|^2 + 4 Re(conj(r_t) (r - r_t)) + 2|r - r_t|^2`` and
    ``|r - r_t|^2 <= 2 (M-k) (||delta_Ui||^2 + ||delta_Uj||^2)``, where
    ``delta = s - s^t`` and Ui, Uj are the rows of blocks i and j touched by
    the shift. The quadratic ``2 Re(conj(r_t) r) = s^H D s`` is then
    linearized after shifting D by ``lambda_D`` on its support.

``lifted``
    Majorize ``vec(ss^H)^H Phi vec(ss^H)`` with ``lambda_max(Phi) = M - k``
    and linearize the concave remainder. Valid, but the curvature term scales
    with ML, so steps are roughly ML/4 times shorter than ``direct``.

The shift matrices ``A_ij(k)`` are never formed; products with ``s`` are
index shifts inside blocks.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .correlation import CorrelationTable, LagConstraint, LagConstraintSet, SequenceSet

EIGEN_MODES = ("closed_form_phi", "spectral_bound_D", "power_iteration_D")
D_MODES = EIGEN_MODES[1:]
CURVATURES = ("direct", "lifted")


@dataclass(frozen=True)
class EigenBound:
    value: float
    mode: str


@dataclass(frozen=True)
class SurrogateSystem:
    """Surrogate data at one iterate.

    Attributes:
        Dtilde: (2ML, |K|) real matrix, column c is ``[Re(d_c); Im(d_c)]``.
        p: length-|K| offsets.
        K: the constraint set the columns refer to.
        iterate: the sequence set the surrogate was built at.
        lam: per-constraint bound on lambda_max(D_c) that was used.
    """

    Dtilde: np.ndarray
    p: np.ndarray
    K: LagConstraintSet
    iterate: SequenceSet
    lam: np.ndarray

    def values(self, x: np.ndarray) -> np.ndarray:
        """Surrogate value ``4 x^T d_c + p_c`` of every constraint at x."""
        return 4.0 * (self.Dtilde.T @ x) + self.p

    def restrict(self, indices) -> "SurrogateSystem":
        idx = np.asarray(indices, dtype=int)
        return SurrogateSystem(
            np.asfortranarray(self.Dtilde[:, idx]), self.p[idx],
            self.K.subset(idx), self.iterate, self.lam[idx],
        )


def to_real(s: np.ndarray) -> np.ndarray:
    return np.concatenate([s.real, s.imag])


def to_complex(x: np.ndarray) -> np.ndarray:
    n = x.size // 2
    return x[:n] + 1j * x[n:]


def objective_values(set_: SequenceSet, K: LagConstraintSet, table=None) -> np.ndarray:
    """``2|r_c|^2`` for every constraint, the quantity each surrogate bounds."""
    from .correlation import correlate_all_fft

    if table is None:
        table = correlate_all_fft(set_)
    return 2.0 * np.abs(table.at(K)) ** 2


def lambda_max_phi(M: int, k: int) -> float:
    """Largest eigenvalue of the lifted (ML)^2 x (ML)^2 matrix Phi_ij(k)."""
    if not 0 <= k <= M - 1:
        raise ValueError(f"lag {k} outside 0..{M - 1}")
    return float(M - k)


@lru_cache(maxsize=16)
def _shift_index(L: int, M: int):
    """Flattened index arrays of the nonzeros of all A_ij(k), k >= 0.

    For constraint c: rows ``a_rows`` of (A s) receive ``s[a_src]`` and rows
    ``ah_rows`` of (A^H s) receive ``s[ah_src]``; ``col`` gives c.
    """
    K = LagConstraintSet(L, M)
    lengths = M - K.k
    col = np.repeat(np.arange(len(K)), lengths)
    starts = np.cumsum(lengths) - lengths
    m = np.arange(lengths.sum()) - np.repeat(starts, lengths)
    i = K.i[col]
    j = K.j[col]
    k = K.k[col]
    a_rows = i * M + m
    a_src = j * M + m + k
    ah_rows = j * M + m + k
    ah_src = i * M + m
    arrays = (col, a_rows, a_src, ah_rows, ah_src)
    for a in arrays:
        a.setflags(write=False)
    return arrays


def _apply_shift(s: np.ndarray, M: int, c: LagConstraint, adjoint: bool = False) -> np.ndarray:
    """``A_ij(k) s`` (or its adjoint) for one constraint, by slicing."""
    out = np.zeros_like(s)
    i, j, k = c
    if adjoint:
        out[j * M + k:(j + 1) * M] = s[i * M:i * M + M - k]
    else:
        out[i * M:i * M + M - k] = s[j * M + k:(j + 1) * M]
    return out


def lambda_bound_D(
    set_: SequenceSet,
    c: LagConstraint,
    r: complex | None = None,
    mode: str = "spectral_bound_D",
    rtol: float = 1e-6,
    max_iter: int = 10_000,
) -> EigenBound:
    """Upper bound on lambda_max(D) with D = conj(r) A + r A^H.

    ``spectral_bound_D`` returns ``2|r|`` (||A||_2 = 1). ``power_iteration_D``
    runs power iteration on ``D + 2|r| I`` applied implicitly. It stops once the
    residual ``rho = ||B v - theta v||`` falls below ``rtol * theta`` and returns
    ``theta + rho`` (capped at ``2|r|``). A small change between successive
    Rayleigh quotients is not enough on its own: near-degenerate spectra make
    the quotient creep up long after it stops moving by 1e-6.
    """
    if r is None:
        from .correlation import correlate_brute

        r = correlate_brute(set_, *c)
    if mode not in D_MODES:
        raise ValueError(f"unknown eigen mode {mode!r}")
    spectral = 2.0 * abs(r)
    if mode == "spectral_bound_D" or spectral == 0.0:
        return EigenBound(spectral, mode)

    M = set_.M
    n = set_.L * M
    shift = spectral

    def apply(v):
        return (np.conj(r) * _apply_shift(v, M, c) + r * _apply_shift(v, M, c, adjoint=True)
                + shift * v)

    rng = np.random.default_rng(0)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    value = spectral
    for _ in range(max_iter):
        w = apply(v)
        theta = float(np.real(np.vdot(v, w)))
        rho = float(np.linalg.norm(w - theta * v))
        if rho <= rtol * theta:
            value = min(theta + rho - shift, spectral)
            break
        v = w / np.linalg.norm(w)
    return EigenBound(max(value, 0.0), mode)


def build_surrogate(
    set_: SequenceSet,
    K: LagConstraintSet,
    table: CorrelationTable,
    eigen_mode: str = "spectral_bound_D",
    curvature: str = "direct",
    bound_scale: float = 1.0,
) -> SurrogateSystem:
    """Assemble Dtilde and p at the iterate ``set_``.

    Args:
        set_: current iterate s^t.
        K: lag constraints; must be the full set for (L, M).
        table: correlation table of ``set_``.
        eigen_mode: how lambda_max(D_c) is bounded; see ``lambda_bound_D``.
        curvature: ``"direct"`` or ``"lifted"`` (see module docstring).
        bound_scale: multiplies every eigenvalue bound; values > 1 keep the
            majorization valid and loosen it.
    """
    L, M = set_.L, set_.M
    if (table.L, table.M) != (L, M) or (K.L, K.M) != (L, M):
        raise ValueError("set, constraint set and correlation table disagree on (L, M)")
    if len(K) != LagConstraintSet.expected_size(L, M):
        raise ValueError("build_surrogate needs the full constraint set; use restrict() after")
    if curvature not in CURVATURES:
        raise ValueError(f"unknown curvature {curvature!r}")
    if eigen_mode not in D_MODES:
        raise ValueError(f"eigen mode {eigen_mode!r} does not bound lambda_max(D)")

    ML = L * M
    nK = len(K)
    s = set_.stacked()
    r = table.at(K)
    r2 = np.abs(r) ** 2
    span = (M - K.k).astype(float)

    if eigen_mode == "power_iteration_D":
        lam = np.array([lambda_bound_D(set_, c, r=r[n], mode=eigen_mode).value
                        for n, c in enumerate(K)])
    else:
        lam = 2.0 * np.abs(r)
    lam = lam * bound_scale

    col, a_rows, a_src, ah_rows, ah_src = _shift_index(L, M)
    Dc = np.zeros((ML, nK), dtype=complex)
    Dc[a_rows, col] = np.conj(r)[col] * s[a_src]
    Dc[ah_rows, col] += r[col] * s[ah_src]

    if curvature == "direct":
        # support multiplicity: 1 on Ui or Uj, 2 where they overlap (i == j)
        W = np.zeros((ML, nK))
        W[a_rows, col] = 1.0
        W[ah_rows, col] += 1.0
        support = W > 0
        Dc -= (lam * support + 2.0 * span * W) * s[:, None]
        p = -6.0 * r2 + 4.0 * lam * support.sum(axis=0) + 16.0 * span**2
    else:
        Dc -= (lam + span * ML)[None, :] * s[:, None]
        p = -6.0 * r2 + 4.0 * lam * ML + 4.0 * span * ML**2

    Dtilde = np.asfortranarray(np.vstack([Dc.real, Dc.imag]))
    return SurrogateSystem(Dtilde, p, K, set_, lam)
