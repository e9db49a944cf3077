"""Aperiodic auto/cross-correlations of unimodular sequence sets.

Sequences are indexed from 0. For sequences ``s_i`` and ``s_j`` of length M the
aperiodic correlation at lag ``k`` is::

    r_ij(k) = sum_{m=0}^{M-1-k} conj(s_i[m]) * s_j[m + k],   k >= 0
    r_ij(k) = conj(r_ji(-k)),                               k < 0

The peak sidelobe level (PSL) of a set is the largest ``|r_ij(k)|`` over the
lag constraint set: lags ``1..M-1`` for auto-correlations and ``0..M-1`` for
cross-correlations (every ordered pair, so ``(i, j, 0)`` and ``(j, i, 0)`` both
appear).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterator, NamedTuple

import numpy as np


@dataclass(frozen=True)
class SequenceSet:
    """L unimodular sequences of length M, stored as phases in radians.

    Complex elements are derived on demand, so ``|s_i(m)| = 1`` holds exactly
    for any phase matrix.
    """

    phases: np.ndarray

    def __post_init__(self):
        phases = np.array(self.phases, dtype=float, copy=True)
        if phases.ndim == 1:
            phases = phases[None, :]
        if phases.ndim != 2:
            raise ValueError(f"phases must be an L x M matrix, got shape {phases.shape}")
        L, M = phases.shape
        if L < 1 or M < 2:
            raise ValueError(f"need L >= 1 and M >= 2, got L={L}, M={M}")
        if not np.all(np.isfinite(phases)):
            raise ValueError("phases must be finite")
        phases.setflags(write=False)
        object.__setattr__(self, "phases", phases)

    @classmethod
    def from_complex(cls, values) -> "SequenceSet":
        """Build a set from complex samples; only their phases are kept."""
        return cls(np.angle(np.asarray(values, dtype=complex)))

    @property
    def L(self) -> int:
        return self.phases.shape[0]

    @property
    def M(self) -> int:
        return self.phases.shape[1]

    @cached_property
    def elements(self) -> np.ndarray:
        """L x M complex matrix ``exp(1j * phases)``."""
        return np.exp(1j * self.phases)

    def stacked(self) -> np.ndarray:
        """The length-ML vector of all sequences stacked one after another."""
        return self.elements.reshape(-1)

    def __eq__(self, other):
        if not isinstance(other, SequenceSet):
            return NotImplemented
        return np.array_equal(self.phases, other.phases)

    def __hash__(self):
        return hash(self.phases.tobytes())


class LagConstraint(NamedTuple):
    i: int
    j: int
    k: int


class LagConstraintSet:
    """All (i, j, k) triples whose correlation magnitude enters the PSL.

    Ordering is (i, j) row-major with k ascending inside each pair. The index
    arrays ``i``, ``j``, ``k`` are the vectorized view used by the optimizer.
    """

    def __init__(self, L: int, M: int):
        if L < 1 or M < 2:
            raise ValueError(f"need L >= 1 and M >= 2, got L={L}, M={M}")
        self.L = L
        self.M = M
        i, j, k = _constraint_arrays(L, M)
        self.i, self.j, self.k = i, j, k

    def __len__(self) -> int:
        return self.k.size

    def __iter__(self) -> Iterator[LagConstraint]:
        for a, b, c in zip(self.i.tolist(), self.j.tolist(), self.k.tolist()):
            yield LagConstraint(a, b, c)

    def __getitem__(self, idx: int) -> LagConstraint:
        return LagConstraint(int(self.i[idx]), int(self.j[idx]), int(self.k[idx]))

    def subset(self, indices) -> "LagConstraintSet":
        """A view restricted to the given constraint positions (order kept)."""
        out = object.__new__(LagConstraintSet)
        out.L, out.M = self.L, self.M
        idx = np.asarray(indices, dtype=int)
        out.i, out.j, out.k = self.i[idx], self.j[idx], self.k[idx]
        for a in (out.i, out.j, out.k):
            a.setflags(write=False)
        return out

    @staticmethod
    def expected_size(L: int, M: int) -> int:
        return L * (M - 1) + L * (L - 1) * M


@lru_cache(maxsize=32)
def _constraint_arrays(L: int, M: int):
    ii, jj, kk = [], [], []
    for i in range(L):
        for j in range(L):
            ks = np.arange(1 if i == j else 0, M)
            ii.append(np.full(ks.size, i))
            jj.append(np.full(ks.size, j))
            kk.append(ks)
    arrays = tuple(np.concatenate(a).astype(np.intp) for a in (ii, jj, kk))
    for a in arrays:
        a.setflags(write=False)
    return arrays


class CorrelationTable:
    """All r_ij(k) for lags -(M-1)..M-1, stored as an L x L x (2M-1) array.

    ``values[i, j, k + M - 1]`` holds r_ij(k).
    """

    def __init__(self, values: np.ndarray, M: int):
        self.values = values
        self.M = M
        self.L = values.shape[0]

    def __call__(self, i: int, j: int, k: int) -> complex:
        if not (-(self.M - 1) <= k <= self.M - 1):
            raise IndexError(f"lag {k} outside +-{self.M - 1}")
        return complex(self.values[i, j, k + self.M - 1])

    def at(self, K: LagConstraintSet) -> np.ndarray:
        """Complex correlations for every constraint of K, in K's order."""
        return self.values[K.i, K.j, K.k + self.M - 1]

    def lags(self) -> np.ndarray:
        return np.arange(-(self.M - 1), self.M)


def _check_index(set_: SequenceSet, i: int, j: int, k: int):
    if not (0 <= i < set_.L and 0 <= j < set_.L):
        raise IndexError(f"sequence index out of range: i={i}, j={j}, L={set_.L}")
    if abs(k) > set_.M - 1:
        raise IndexError(f"lag {k} out of range for M={set_.M}")


def correlate_brute(set_: SequenceSet, i: int, j: int, k: int) -> complex:
    """Direct O(M) evaluation of r_ij(k)."""
    _check_index(set_, i, j, k)
    if k < 0:
        return complex(np.conj(correlate_brute(set_, j, i, -k)))
    s = set_.elements
    M = set_.M
    total = 0j
    for m in range(M - k):
        total += np.conj(s[i, m]) * s[j, m + k]
    return complex(total)


def fft_length(M: int) -> int:
    """Smallest power of two >= 2M - 1."""
    return 1 << (2 * M - 2).bit_length()


def correlate_all_fft(set_: SequenceSet) -> CorrelationTable:
    """All auto/cross-correlations via zero-padded FFTs.

    Only the L(L+1)/2 pairs with i <= j are transformed; the rest follow from
    r_ji(k) = conj(r_ij(-k)).
    """
    L, M = set_.L, set_.M
    n = fft_length(M)
    F = np.fft.fft(set_.elements, n, axis=1)
    out = np.empty((L, L, 2 * M - 1), dtype=complex)
    iu, ju = np.triu_indices(L)
    circ = np.fft.ifft(np.conj(F[iu]) * F[ju], axis=1)
    pos = circ[:, :M]
    # circular index -k lives at n - k
    neg = circ[:, n - (M - 1):]
    diag = iu == ju
    pos[diag, 0] = M
    neg[diag] = np.conj(pos[diag, :0:-1])
    lin = np.concatenate([neg, pos], axis=1)
    out[ju, iu] = np.conj(lin[:, ::-1])
    out[iu, ju] = lin
    return CorrelationTable(out, M)


def _check_K(table: CorrelationTable, K: LagConstraintSet):
    if len(K) == 0:
        raise ValueError("empty lag constraint set")
    if (table.L, table.M) != (K.L, K.M):
        raise ValueError(
            f"table is for (L, M)=({table.L}, {table.M}), constraints for ({K.L}, {K.M})"
        )


def psl(table: CorrelationTable, K: LagConstraintSet) -> float:
    """Peak sidelobe level: max |r_ij(k)| over K."""
    _check_K(table, K)
    return float(np.abs(table.at(K)).max())


def psl_argmax(table: CorrelationTable, K: LagConstraintSet) -> tuple[float, LagConstraint]:
    """PSL together with the first constraint (enumeration order) attaining it."""
    _check_K(table, K)
    mags = np.abs(table.at(K))
    idx = int(np.argmax(mags))
    return float(mags[idx]), K[idx]


def isl(table: CorrelationTable, K: LagConstraintSet) -> float:
    """Integrated sidelobe level: sum of |r_ij(k)|^2 over K."""
    _check_K(table, K)
    return float(np.sum(np.abs(table.at(K)) ** 2))


def metrics(set_: SequenceSet, K: LagConstraintSet | None = None) -> tuple[float, float]:
    """(PSL, ISL) of a set, building K when not supplied."""
    if K is None:
        K = LagConstraintSet(set_.L, set_.M)
    table = correlate_all_fft(set_)
    return psl(table, K), isl(table, K)
