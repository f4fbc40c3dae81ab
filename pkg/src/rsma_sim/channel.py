"""Multipath Rayleigh channel model and transmitter-side channel knowledge.

Each user/antenna link is an L-tap FIR filter with exponentially decaying tap
powers normalized to unit total energy. The per-subcarrier response is the
N-point DFT of the taps, so a cyclic-prefixed OFDM frame sees one complex
coefficient per antenna per subcarrier.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TapProfile:
    """Power-delay profile: tap l carries power proportional to exp(-decay_rate * l)."""

    num_taps: int
    decay_rate: float = 0.5
    tap_powers: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.num_taps < 1:
            raise ValueError("num_taps must be >= 1")
        if self.decay_rate < 0:
            raise ValueError("decay_rate must be >= 0")
        if self.tap_powers is None:
            p = np.exp(-self.decay_rate * np.arange(self.num_taps))
            object.__setattr__(self, "tap_powers", p / p.sum())
        else:
            p = np.asarray(self.tap_powers, dtype=float)
            if p.shape != (self.num_taps,):
                raise ValueError("tap_powers length must equal num_taps")
            if abs(p.sum() - 1.0) > 1e-12:
                raise ValueError("tap_powers must sum to 1")
            object.__setattr__(self, "tap_powers", p)


@dataclass(frozen=True)
class ChannelRealization:
    """One block-fading draw.

    taps: (K, N_t, L) complex tap gains.
    freq: (K, N, N_t) per-subcarrier response, the N-point DFT of the taps.
    subcarrier_gain: (K, N) Euclidean norm of freq across antennas.

    Row k of freq[:, n, :] is the receive equation's row vector at subcarrier n:
    the post-FFT observation of user k is freq[k, n, :] @ x_n plus noise.
    """

    taps: np.ndarray
    freq: np.ndarray
    subcarrier_gain: np.ndarray

    @property
    def n_users(self) -> int:
        return self.taps.shape[0]

    @property
    def n_tx(self) -> int:
        return self.taps.shape[1]

    @property
    def n_subcarriers(self) -> int:
        return self.freq.shape[1]


@dataclass(frozen=True)
class CsitView:
    """Transmitter-side estimate of the per-subcarrier response.

    freq_hat has the same layout as ChannelRealization.freq; error_coeff is the
    Gauss-Markov mixing weight tau (0 = perfect knowledge).
    """

    freq_hat: np.ndarray
    error_coeff: float

    def gains(self) -> np.ndarray:
        """Estimated per-subcarrier channel norms, (K, N)."""
        return np.linalg.norm(self.freq_hat, axis=-1)


def frequency_response(taps: np.ndarray, n_subcarriers: int) -> np.ndarray:
    """DFT of the tap vectors at every subcarrier bin.

    taps: (K, N_t, L). Returns (K, N, N_t) with
    out[k, n, a] = sum_l taps[k, a, l] * exp(-2j*pi*n*l / N).
    """
    taps = np.asarray(taps)
    if taps.ndim != 3:
        raise ValueError("taps must be (K, N_t, L)")
    if n_subcarriers < taps.shape[-1]:
        raise ValueError("need at least as many subcarriers as taps")
    resp = np.fft.fft(taps, n=n_subcarriers, axis=-1)
    return np.moveaxis(resp, -1, 1)


def generate_channel(
    rng: np.random.Generator,
    n_users: int,
    n_tx: int,
    profile: TapProfile,
    n_subcarriers: int,
) -> ChannelRealization:
    """Draw one block-fading realization.

    Taps are independent circularly symmetric complex Gaussians with variances
    given by the profile, so every user/antenna link has unit average energy.
    """
    if n_users < 1 or n_tx < 1:
        raise ValueError("n_users and n_tx must be >= 1")
    shape = (n_users, n_tx, profile.num_taps)
    scale = np.sqrt(profile.tap_powers / 2.0)
    taps = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    freq = frequency_response(taps, n_subcarriers)
    gain = np.linalg.norm(freq, axis=-1)
    return ChannelRealization(taps=taps, freq=freq, subcarrier_gain=gain)


def degrade_csit(
    channel: ChannelRealization, tau: float, rng: np.random.Generator
) -> CsitView:
    """Gauss-Markov CSIT error: sqrt(1-tau^2) * H + tau * E.

    E is unit-variance CSCG per entry, matching the per-entry variance of the
    response (tap powers sum to 1). tau=0 copies the true response exactly and
    draws nothing from rng.
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must be in [0, 1]")
    if tau == 0.0:
        return CsitView(freq_hat=channel.freq.copy(), error_coeff=0.0)
    shape = channel.freq.shape
    err = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    freq_hat = np.sqrt(1.0 - tau**2) * channel.freq + tau * err
    return CsitView(freq_hat=freq_hat, error_coeff=tau)
