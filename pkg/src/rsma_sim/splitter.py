"""Channel-aware stream splitter and receive-side diversity combiner.

Per user, the m weakest subcarriers (by estimated channel norm) are selected
and the private symbols on them are replicated into the shared common stream,
either as one contiguous block per user (localized) or interleaved round-robin
in chunks (distributed). The receiver decodes the common stream, extracts its
own replicas and combines them with the private-branch observations by maximum
ratio combining.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

# Effective gains with magnitude below this are treated as erased branches.
ERASURE_GAIN = 1e-12


class Arrangement(enum.Enum):
    LOCALIZED = "localized"
    DISTRIBUTED = "distributed"


@dataclass(frozen=True)
class SplitMap:
    """Replica bookkeeping for one channel realization.

    selected: (K, m) int, subcarrier indices chosen per user, ascending.
    position: (K, m) int, slot of each replica inside the common stream.
    arrangement, chunk: layout used to build position.

    position values form a bijection onto 0..K*m-1.
    """

    selected: np.ndarray
    position: np.ndarray
    arrangement: Arrangement
    chunk: int

    @property
    def n_users(self) -> int:
        return self.selected.shape[0]

    @property
    def replicas_per_user(self) -> int:
        return self.selected.shape[1]

    @property
    def common_len(self) -> int:
        return self.selected.size


def select_indices(gains: np.ndarray, m: int) -> np.ndarray:
    """Indices of the m smallest gains, ties to the lower index, sorted ascending."""
    gains = np.asarray(gains)
    if gains.ndim != 1:
        raise ValueError("gains must be a 1-D vector")
    if not 0 <= m <= gains.size:
        raise ValueError("m out of range")
    order = np.argsort(gains, kind="stable")
    return np.sort(order[:m])


def _distributed_positions(n_users: int, m: int, chunk: int) -> np.ndarray:
    """Slot positions for round-robin chunk interleaving, (K, m)."""
    pos = np.empty((n_users, m), dtype=np.int64)
    cursor = 0
    taken = [0] * n_users
    while any(t < m for t in taken):
        for k in range(n_users):
            take = min(chunk, m - taken[k])
            if take == 0:
                continue
            j = taken[k]
            pos[k, j : j + take] = np.arange(cursor, cursor + take)
            taken[k] += take
            cursor += take
    return pos


def build_split_map(
    gains: np.ndarray,
    m: int,
    arrangement: Arrangement = Arrangement.LOCALIZED,
    chunk: int = 2,
) -> SplitMap:
    """Select per-user weak subcarriers and lay their replicas out in the common stream.

    gains: (K, N) estimated channel norms. Requires K*m <= N so the common
    stream fits in one OFDM symbol.
    """
    gains = np.asarray(gains)
    if gains.ndim != 2:
        raise ValueError("gains must be (K, N)")
    n_users, n_sub = gains.shape
    if m * n_users > n_sub:
        raise ValueError("K*m must not exceed the number of subcarriers")
    if chunk < 1:
        raise ValueError("chunk must be >= 1")
    selected = np.stack([select_indices(gains[k], m) for k in range(n_users)])
    if arrangement is Arrangement.LOCALIZED:
        position = (np.arange(n_users)[:, None] * m + np.arange(m)[None, :]).astype(
            np.int64
        )
    else:
        position = _distributed_positions(n_users, m, chunk)
    return SplitMap(
        selected=selected, position=position, arrangement=arrangement, chunk=chunk
    )


def compose_common(symbols: np.ndarray, split: SplitMap) -> np.ndarray:
    """Fill the common stream with replicas of the selected private symbols.

    symbols: (K, ..., N) private symbols per user (extra axes broadcast, e.g.
    a block axis). Returns (..., K*m) with out[..., position[k, j]] equal to
    symbols[k, ..., selected[k, j]].
    """
    symbols = np.asarray(symbols)
    k, m = split.selected.shape
    if symbols.shape[0] != k:
        raise ValueError("symbols first axis must be the user axis")
    picked = np.take_along_axis(
        symbols, split.selected.reshape(k, *([1] * (symbols.ndim - 2)), m), axis=-1
    )
    out = np.empty(symbols.shape[1:-1] + (k * m,), dtype=symbols.dtype)
    out[..., split.position.reshape(-1)] = np.moveaxis(picked, 0, -2).reshape(
        *symbols.shape[1:-1], k * m
    )
    return out


def extract_user_portion(
    common: np.ndarray, split: SplitMap, user: int
) -> tuple[np.ndarray, np.ndarray]:
    """User's own replicas out of a decoded common stream.

    common: (..., K*m). Returns (indices, values): the user's selected
    subcarrier indices (m,) and the matching common-stream entries (..., m).
    """
    common = np.asarray(common)
    if common.shape[-1] != split.common_len:
        raise ValueError("common stream length does not match the split map")
    return split.selected[user], common[..., split.position[user]]


@dataclass(frozen=True)
class CombinerWeights:
    """Branch models for the combiner: obs = gain * symbol + noise(power)."""

    private_gain: np.ndarray
    private_noise_power: np.ndarray
    common_gain: np.ndarray
    common_noise_power: np.ndarray


def combine_mrc(
    private_obs: np.ndarray, common_obs: np.ndarray, w: CombinerWeights
) -> np.ndarray:
    """Maximum ratio combination of the private and common observations.

    Branches with |gain| below ERASURE_GAIN contribute nothing. Raises if both
    branches of any entry are erased (the symbol is unobservable).
    """
    gp = np.asarray(w.private_gain, dtype=complex)
    gc = np.asarray(w.common_gain, dtype=complex)
    sp = np.asarray(w.private_noise_power, dtype=float)
    sc = np.asarray(w.common_noise_power, dtype=float)
    if np.any(sp <= 0) or np.any(sc <= 0):
        raise ValueError("branch noise powers must be positive")
    gp = np.where(np.abs(gp) < ERASURE_GAIN, 0.0, gp)
    gc = np.where(np.abs(gc) < ERASURE_GAIN, 0.0, gc)
    denom = np.abs(gp) ** 2 / sp + np.abs(gc) ** 2 / sc
    if np.any(denom == 0):
        raise ValueError("both branches erased; symbol unobservable")
    num = np.conj(gp) / sp * private_obs + np.conj(gc) / sc * common_obs
    return num / denom
