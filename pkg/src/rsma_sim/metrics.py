"""Link metrics: rate tables, error counting, confidence bounds, packet delay."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass
class TrialRecord:
    """Outcome of one channel realization (or one delay packet).

    Error counts are per user; rate tables are per user and subcarrier.
    delay_slots is filled only by delay-phase records, the rest only by
    BER/rate-phase records.
    """

    bit_errors_private: np.ndarray = None
    bits_sent: np.ndarray = None
    bit_errors_combined: np.ndarray = None
    rate_private: np.ndarray = None
    rate_common: np.ndarray = None
    delay_slots: np.ndarray = None


def count_bit_errors(sent: np.ndarray, decoded: np.ndarray) -> int:
    """Hamming distance between two equal-shape bit arrays."""
    sent = np.asarray(sent)
    decoded = np.asarray(decoded)
    if sent.shape != decoded.shape:
        raise ValueError("bit arrays must have the same shape")
    return int(np.count_nonzero(sent != decoded))


def binomial_ci95(errors: int, total: int) -> float:
    """Normal-approximation 95% half-width for an error-rate estimate."""
    if total <= 0:
        raise ValueError("total must be positive")
    p = errors / total
    return 1.96 * np.sqrt(p * (1.0 - p) / total)


def private_sinr(
    own_gain_sq: np.ndarray, power_private: float, noise_power: float
) -> np.ndarray:
    """Per-stream SINR table with every other stream's own effective gain as
    the interference term.

    own_gain_sq: (..., K, N) squared magnitudes |h_k^H p_k|^2. Returns the
    same shape.
    """
    own = np.asarray(own_gain_sq)
    total = own.sum(axis=-2, keepdims=True)
    interference = total - own
    return power_private * own / (power_private * interference + noise_power)


def private_rate(
    own_gain_sq: np.ndarray, power_private: float, noise_power: float
) -> np.ndarray:
    """Ensemble-averaged private rates, (K, N).

    own_gain_sq: (Z, K, N) over a realization set (Z >= 1).
    """
    own = np.asarray(own_gain_sq)
    if own.ndim != 3:
        raise ValueError("own_gain_sq must be (Z, K, N)")
    sinr = private_sinr(own, power_private, noise_power)
    return np.log2(1.0 + sinr).mean(axis=0)


def common_sinr(
    common_gain_sq: np.ndarray,
    cross_gain_sq: np.ndarray,
    power_common: float,
    power_private: float,
    noise_power: float,
) -> np.ndarray:
    """Per-user common-stream SINR with all private streams as noise.

    common_gain_sq: (..., K, N) squared |h_k^H p_c|^2; cross_gain_sq:
    (..., K, K, N) squared |h_k^H p_j|^2 with the victim axis first.
    """
    gc = np.asarray(common_gain_sq)
    cross = np.asarray(cross_gain_sq)
    interference = power_private * cross.sum(axis=-2)
    return power_common * gc / (interference + noise_power)


def common_rate(
    common_gain_sq: np.ndarray,
    cross_gain_sq: np.ndarray,
    power_common: float,
    power_private: float,
    noise_power: float,
) -> np.ndarray:
    """Ensemble-averaged common rate, (N,): the worst user limits every subcarrier.

    Inputs as in common_sinr with a leading realization axis (Z >= 1).
    """
    gc = np.asarray(common_gain_sq)
    if gc.ndim != 3:
        raise ValueError("common_gain_sq must be (Z, K, N)")
    sinr = common_sinr(gc, cross_gain_sq, power_common, power_private, noise_power)
    return np.log2(1.0 + sinr).min(axis=1).mean(axis=0)


def sum_rate(
    rate_common: np.ndarray, rate_private: np.ndarray
) -> tuple[np.ndarray, float]:
    """Per-subcarrier totals and their mean.

    rate_common: (N,); rate_private: (K, N). Returns (W_n, mean over n).
    """
    rc = np.asarray(rate_common, dtype=float)
    rp = np.asarray(rate_private, dtype=float)
    if rp.ndim != 2 or rc.shape != rp.shape[1:]:
        raise ValueError("rate tables disagree on the subcarrier axis")
    per_n = rc + rp.sum(axis=0)
    return per_n, float(per_n.mean())


def simulate_packet_delay(success: Callable[[int], bool], max_slots: int) -> int:
    """Slots consumed retransmitting one packet until its slot succeeds.

    success(slot) is evaluated for slot = 1, 2, ... and must report whether
    that transmission decoded cleanly. Returns max_slots if none did.
    """
    if max_slots < 1:
        raise ValueError("max_slots must be >= 1")
    for slot in range(1, max_slots + 1):
        if success(slot):
            return slot
    return max_slots
