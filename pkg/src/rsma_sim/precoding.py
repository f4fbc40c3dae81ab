"""Per-subcarrier linear precoding and power split between streams.

All functions work on the stacked row form of the channel: an (N, K, N_t)
array whose [n, k, :] row is the receive row vector of user k at subcarrier n
(post-FFT observation = row @ x_n + noise). Precoders are unit-norm columns;
power is applied separately in the superposition step.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

# Relative floor under which a channel direction counts as degenerate.
_DEGENERATE_REL = 1e-12


class PrivatePrecoder(enum.Enum):
    RCI = "rci"
    ZFDPC = "zfdpc"


class CommonPrecoderStrategy(enum.Enum):
    DOMINANT_EIGENVECTOR = "dominant_eigenvector"
    MRT_TO_WEAKEST = "mrt_to_weakest"


@dataclass(frozen=True)
class PrecoderSet:
    """Unit-norm beamformers plus the stream power split.

    common: (N, N_t); private: (K, N, N_t); power_common + n_users *
    power_private equals the per-subcarrier budget.
    """

    common: np.ndarray
    private: np.ndarray
    power_common: float
    power_private: float

    def __post_init__(self):
        cn = np.linalg.norm(self.common, axis=-1)
        pn = np.linalg.norm(self.private, axis=-1)
        if self.power_common > 0 and np.any(np.abs(cn - 1.0) > 1e-9):
            raise ValueError("common precoder columns must be unit norm")
        if np.any(np.abs(pn - 1.0) > 1e-9):
            raise ValueError("private precoder columns must be unit norm")

    @property
    def n_users(self) -> int:
        return self.private.shape[0]


def rows_from(freq: np.ndarray) -> np.ndarray:
    """(K, N, N_t) response array -> stacked row form (N, K, N_t)."""
    return np.moveaxis(np.asarray(freq), 0, 1)


def allocate_power(
    total: float, common_fraction: float, n_users: int
) -> tuple[float, float]:
    """Split the per-subcarrier budget: returns (power_common, power_private_per_user)."""
    if total <= 0:
        raise ValueError("total power must be positive")
    if not 0.0 <= common_fraction < 1.0:
        raise ValueError("common_fraction must be in [0, 1)")
    if n_users < 1:
        raise ValueError("n_users must be >= 1")
    p_c = common_fraction * total
    p_k = (total - p_c) / n_users
    return p_c, p_k


def rci_private(
    rows: np.ndarray, noise_power: float, total_power: float = 1.0
) -> np.ndarray:
    """Regularized channel inversion, H^H (H H^H + K*sigma^2/P I)^-1, unit columns.

    rows: (N, K, N_t). Returns (K, N, N_t). noise_power=0 degenerates to plain
    inversion and a rank-deficient channel then raises LinAlgError.
    """
    rows = np.asarray(rows)
    n_sub, n_users, _ = rows.shape
    lam = n_users * noise_power / total_power
    gram = np.einsum("nka,nja->nkj", rows, np.conj(rows))
    gram = gram + lam * np.eye(n_users)
    raw = np.swapaxes(np.conj(rows), 1, 2) @ np.linalg.inv(gram)  # (N, N_t, K)
    norms = np.linalg.norm(raw, axis=1, keepdims=True)
    scale = np.linalg.norm(rows, axis=(1, 2)).max()
    if np.any(norms < _DEGENERATE_REL * max(scale, 1.0)):
        raise ValueError("degenerate channel: cannot normalize a precoder column")
    return np.ascontiguousarray(np.transpose(raw / norms, (2, 0, 1)))


def zfdpc_private(rows: np.ndarray, order: np.ndarray | None = None) -> np.ndarray:
    """Successive orthogonal-complement beams via QR of the stacked channel.

    Users are encoded in `order` (default ascending). The effective matrix
    G[i, j] = rows[n, order[i]] @ p[order[j]] is lower triangular with real
    positive diagonal, so earlier-encoded users see no later interference and
    known earlier interference can be pre-subtracted at the transmitter.
    """
    rows = np.asarray(rows)
    n_sub, n_users, n_tx = rows.shape
    if n_tx < n_users:
        raise ValueError("need at least as many antennas as users")
    if order is None:
        order = np.arange(n_users)
    else:
        order = np.asarray(order)
        if sorted(order.tolist()) != list(range(n_users)):
            raise ValueError("order must be a permutation of the users")
    stacked = np.conj(np.swapaxes(rows[:, order, :], 1, 2))  # (N, N_t, K)
    q, r = np.linalg.qr(stacked)
    diag = np.diagonal(r, axis1=1, axis2=2)  # (N, K)
    scale = np.linalg.norm(rows, axis=(1, 2), keepdims=False)
    if np.any(np.abs(diag) < _DEGENERATE_REL * np.maximum(scale, 1.0)[:, None]):
        raise ValueError("degenerate channel: users are linearly dependent")
    phase = diag / np.abs(diag)
    q = q * np.conj(phase)[:, None, :]
    out = np.empty((n_users, n_sub, n_tx), dtype=complex)
    out[order] = np.transpose(q, (2, 0, 1))
    return out


def common_precoder(
    rows: np.ndarray,
    strategy: CommonPrecoderStrategy = CommonPrecoderStrategy.DOMINANT_EIGENVECTOR,
) -> np.ndarray:
    """One shared beam per subcarrier for the common stream, (N, N_t)."""
    rows = np.asarray(rows)
    if strategy is CommonPrecoderStrategy.DOMINANT_EIGENVECTOR:
        cov = np.einsum("nka,nkb->nab", np.conj(rows), rows)
        trace = np.einsum("naa->n", cov).real
        if np.any(trace < _DEGENERATE_REL):
            raise ValueError("all-zero channel at some subcarrier")
        _, vecs = np.linalg.eigh(cov)
        return vecs[:, :, -1]
    norms = np.linalg.norm(rows, axis=-1)  # (N, K)
    weakest = np.argmin(norms, axis=1)
    picked = np.take_along_axis(rows, weakest[:, None, None], axis=1)[:, 0, :]
    pnorm = np.linalg.norm(picked, axis=-1, keepdims=True)
    if np.any(pnorm < _DEGENERATE_REL):
        raise ValueError("all-zero channel at some subcarrier")
    return np.conj(picked) / pnorm


def build_precoders(
    rows: np.ndarray,
    noise_power: float,
    total_power: float,
    common_fraction: float,
    private: PrivatePrecoder = PrivatePrecoder.RCI,
    common: CommonPrecoderStrategy = CommonPrecoderStrategy.DOMINANT_EIGENVECTOR,
) -> PrecoderSet:
    """Assemble the full precoder set for one realization from its CSIT rows."""
    n_users = rows.shape[1]
    p_c, p_k = allocate_power(total_power, common_fraction, n_users)
    if private is PrivatePrecoder.RCI:
        priv = rci_private(rows, noise_power, total_power)
    else:
        priv = zfdpc_private(rows)
    if p_c > 0:
        com = common_precoder(rows, common)
    else:
        com = np.zeros((rows.shape[0], rows.shape[2]), dtype=complex)
    return PrecoderSet(
        common=com, private=priv, power_common=p_c, power_private=p_k
    )
