"""Colocated MIMO radar angle-range imaging with a probing sequence set.

Received data (num_rx x (M+Q-1))::

    B^H = sum_r sum_p beta_rp c_p d_p^T S_hat^H J_r + N^H

with ``S_hat`` the M x L waveform matrix (one column per transmitter) padded
with Q-1 zero rows and ``J_r`` the delay-by-r shift. Range bin q is compressed
with ``J_q^H S_hat (S_hat^H S_hat)^-1`` and the reflectivity of every
(range, angle) cell is then estimated by least squares or Capon.

The estimators use ``conj(d_p)`` on the transmit side: with the ``d_p^T``
model above, ``c_p^H (c_p d_p^T) conj(d_p) = ||c_p||^2 ||d_p||^2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .correlation import SequenceSet
from .errors import NumericError


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear arrays; spacings in wavelengths."""

    num_tx: int = 4
    num_rx: int = 4
    tx_spacing: float = 2.0
    rx_spacing: float = 0.5

    def __post_init__(self):
        if self.num_tx < 1 or self.num_rx < 1:
            raise ValueError("element counts must be positive")
        if not (self.tx_spacing > 0 and self.rx_spacing > 0):
            raise ValueError("spacings must be positive")


@dataclass
class RadarScene:
    """Reflectivities on a Q x P (range bin, scan angle) grid."""

    theta_deg: np.ndarray
    beta: np.ndarray
    noise_variance: float = 1e-3

    def __post_init__(self):
        self.theta_deg = np.asarray(self.theta_deg, dtype=float).ravel()
        self.beta = np.atleast_2d(np.asarray(self.beta, dtype=complex))
        if self.beta.shape[1] != self.theta_deg.size:
            raise ValueError(f"beta has {self.beta.shape[1]} angle columns, "
                             f"grid has {self.theta_deg.size} angles")
        if not np.all(np.isfinite(self.beta)):
            raise ValueError("beta must be finite")
        if self.noise_variance < 0:
            raise ValueError("noise variance must be non-negative")

    @property
    def Q(self) -> int:
        return self.beta.shape[0]

    @property
    def P(self) -> int:
        return self.beta.shape[1]

    @property
    def snr_db(self) -> float:
        return float("inf") if self.noise_variance == 0 else -10.0 * np.log10(self.noise_variance)


@dataclass
class ReceivedData:
    B_H: np.ndarray
    M: int
    Q: int


def angle_grid(P: int, lo: float = -40.0, hi: float = 40.0) -> np.ndarray:
    return np.linspace(lo, hi, P)


def noise_variance_from_snr(snr_db: float) -> float:
    """Unit-power reflectivities, so sigma^2 = 10^(-SNR/10)."""
    return 10.0 ** (-snr_db / 10.0)


def random_scene(Q: int, P: int, density: float = 0.1, seed: int = 0,
                 theta_range=(-40.0, 40.0), noise_variance: float = 1e-3) -> RadarScene:
    """Sparse random support with i.i.d. CN(0, 1) reflectivities on it."""
    rng = np.random.default_rng(seed)
    support = rng.random((Q, P)) < density
    beta = (rng.standard_normal((Q, P)) + 1j * rng.standard_normal((Q, P))) / np.sqrt(2)
    return RadarScene(angle_grid(P, *theta_range), np.where(support, beta, 0.0),
                      noise_variance=noise_variance)


def scene_from_mask(mask: list[str], theta_range=(-40.0, 40.0), seed: int = 0,
                    noise_variance: float = 1e-3) -> RadarScene:
    """'#' marks a target cell; rows are range bins, columns scan angles."""
    if not mask or len({len(row) for row in mask}) != 1:
        raise ValueError("mask rows must be non-empty and of equal length")
    support = np.array([[ch == "#" for ch in row] for row in mask])
    Q, P = support.shape
    rng = np.random.default_rng(seed)
    beta = (rng.standard_normal((Q, P)) + 1j * rng.standard_normal((Q, P))) / np.sqrt(2)
    return RadarScene(angle_grid(P, *theta_range), np.where(support, beta, 0.0),
                      noise_variance=noise_variance)


def steering_vectors(geom: ArrayGeometry, theta_deg):
    """Transmit and receive steering vectors for one angle or an array of them.

    Element n gets phase ``-2 pi spacing n sin(theta)``. For a scalar angle the
    result is ``(d, c)`` with shapes (num_tx,), (num_rx,); for P angles they
    are (num_tx, P) and (num_rx, P).
    """
    theta = np.asarray(theta_deg, dtype=float)
    if np.any(np.abs(theta) >= 90.0):
        raise ValueError("angles must lie strictly inside (-90, 90) degrees")
    sin = np.sin(np.deg2rad(theta))
    n_tx = np.arange(geom.num_tx).reshape((-1,) + (1,) * theta.ndim)
    n_rx = np.arange(geom.num_rx).reshape((-1,) + (1,) * theta.ndim)
    d = np.exp(-2j * np.pi * geom.tx_spacing * n_tx * sin)
    c = np.exp(-2j * np.pi * geom.rx_spacing * n_rx * sin)
    return d, c


def padded_waveforms(set_: SequenceSet, Q: int) -> np.ndarray:
    """S_hat: (M+Q-1) x L, sequences as columns followed by Q-1 zero rows."""
    S = set_.elements.T
    return np.vstack([S, np.zeros((Q - 1, set_.L), dtype=complex)])


def simulate_received(scene: RadarScene, geom: ArrayGeometry, set_: SequenceSet,
                      seed: int = 0) -> ReceivedData:
    """Noisy received samples for every range bin and angle of the scene."""
    if set_.L != geom.num_tx:
        raise ValueError(f"set has L={set_.L} sequences but the array has {geom.num_tx} transmitters")
    M, Q = set_.M, scene.Q
    N = M + Q - 1
    d, c = steering_vectors(geom, scene.theta_deg)
    S_H = set_.elements.conj()  # L x M, rows of S_hat^H before padding
    B_H = np.zeros((geom.num_rx, N), dtype=complex)
    for r in range(Q):
        row = scene.beta[r]
        if not np.any(row):
            continue
        X = (c * row) @ d.T  # sum_p beta_rp c_p d_p^T
        B_H[:, r:r + M] += X @ S_H
    if scene.noise_variance > 0:
        rng = np.random.default_rng(seed)
        scale = np.sqrt(scene.noise_variance / 2.0)
        B_H += scale * (rng.standard_normal(B_H.shape) + 1j * rng.standard_normal(B_H.shape))
    return ReceivedData(B_H, M, Q)


def _gram_inverse(S_hat: np.ndarray, max_cond: float = 1e12) -> np.ndarray:
    G = S_hat.conj().T @ S_hat
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > max_cond:
        raise NumericError(f"waveform Gram matrix is singular (condition number {cond:.3g})")
    return np.linalg.inv(G)


def matched_filter(set_: SequenceSet, Q: int, q: int) -> np.ndarray:
    """Range-bin-q filter ``J_q^H S_hat (S_hat^H S_hat)^-1``, (M+Q-1) x L."""
    if not 0 <= q < Q:
        raise ValueError(f"range bin {q} outside 0..{Q - 1}")
    S_hat = padded_waveforms(set_, Q)
    filt = S_hat @ _gram_inverse(S_hat)
    out = np.zeros_like(filt)
    out[q:] = filt[:filt.shape[0] - q]
    return out


def compress(received: ReceivedData, set_: SequenceSet) -> np.ndarray:
    """Filter outputs ``B_H S_q^MF`` stacked as (Q, num_rx, L)."""
    M, Q = received.M, received.Q
    if set_.M != M:
        raise ValueError("sequence length does not match the received data")
    S_hat = padded_waveforms(set_, Q)
    filt = (S_hat @ _gram_inverse(S_hat))[:M]
    return np.stack([received.B_H[:, q:q + M] @ filt for q in range(Q)])


def estimate_ls(compressed: np.ndarray, geom: ArrayGeometry, theta_deg) -> np.ndarray:
    """Least-squares reflectivity image, Q x P."""
    d, c = steering_vectors(geom, theta_deg)
    num = np.einsum("rp,qrl,lp->qp", c.conj(), compressed, d.conj())
    den = np.sum(np.abs(c) ** 2, axis=0) * np.sum(np.abs(d) ** 2, axis=0)
    return num / den


def capon_covariance(Bq: np.ndarray, loading: float = 1e-6) -> np.ndarray:
    """``B~_q^H B~_q`` (num_rx x num_rx) plus diagonal loading
    ``loading * trace / num_rx``."""
    V = Bq @ Bq.conj().T
    n = V.shape[0]
    delta = loading * np.real(np.trace(V)) / n
    return V + delta * np.eye(n)


def estimate_capon(compressed: np.ndarray, geom: ArrayGeometry, theta_deg,
                   loading: float = 1e-6, covariance=None) -> np.ndarray:
    """Capon reflectivity image, Q x P.

    ``covariance`` overrides the per-bin matrices: a single num_rx x num_rx
    array is used for every bin, or pass a (Q, num_rx, num_rx) stack.
    """
    d, c = steering_vectors(geom, theta_deg)
    Q = compressed.shape[0]
    out = np.empty((Q, c.shape[1]), dtype=complex)
    dn2 = np.sum(np.abs(d) ** 2, axis=0)
    for q in range(Q):
        if covariance is None:
            V = capon_covariance(compressed[q], loading)
        else:
            cov = np.asarray(covariance)
            V = cov if cov.ndim == 2 else cov[q]
        cond = np.linalg.cond(V)
        if not np.isfinite(cond) or cond > 1e14:
            raise NumericError(f"Capon covariance of bin {q} is singular (cond {cond:.3g})")
        Vc = np.linalg.solve(V, c)  # V^-1 c_p for all p
        num = np.einsum("rp,rl,lp->p", Vc.conj(), compressed[q], d.conj())
        den = np.real(np.sum(c.conj() * Vc, axis=0)) * dn2
        out[q] = num / den
    return out


def image_mse(beta_hat: np.ndarray, beta: np.ndarray) -> float:
    return float(np.mean(np.abs(beta_hat - beta) ** 2))


def image(set_: SequenceSet, scene: RadarScene, geom: ArrayGeometry | None = None,
          seed: int = 0, estimators=("ls", "capon")) -> dict:
    """Simulate, compress and estimate; returns ``{name: beta_hat}``."""
    geom = geom or ArrayGeometry()
    rx = simulate_received(scene, geom, set_, seed=seed)
    comp = compress(rx, set_)
    out = {}
    for name in estimators:
        if name == "ls":
            out[name] = estimate_ls(comp, geom, scene.theta_deg)
        elif name == "capon":
            out[name] = estimate_capon(comp, geom, scene.theta_deg)
        else:
            raise ValueError(f"unknown estimator {name!r}")
    return out
