"""BPSK modem, OFDM framing, propagation, and the downlink transceiver.

The end-to-end path: modulate per-user bits, replicate the weak-subcarrier
symbols into the common stream, superpose precoded streams, OFDM-modulate with
a cyclic prefix, convolve with the multipath taps, then at each receiver
FFT back, decode the common stream treating privates as noise, subtract it,
decode the private stream and combine replicated symbols by MRC.

Orthonormal FFTs are used in both directions, so a cyclic-prefixed frame sees
exactly one complex coefficient per subcarrier and per-sample time noise of
variance sigma^2 stays variance sigma^2 per subcarrier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .channel import ChannelRealization, CsitView, TapProfile, degrade_csit, generate_channel
from .metrics import (
    TrialRecord,
    common_rate,
    common_sinr,
    count_bit_errors,
    private_rate,
    private_sinr,
)
from .precoding import (
    CommonPrecoderStrategy,
    PrecoderSet,
    PrivatePrecoder,
    build_precoders,
    rows_from,
)
from .splitter import (
    ERASURE_GAIN,
    Arrangement,
    CombinerWeights,
    SplitMap,
    build_split_map,
    combine_mrc,
    compose_common,
    extract_user_portion,
)


def modulate_bpsk(bits: np.ndarray) -> np.ndarray:
    """Bit 0 -> +1, bit 1 -> -1."""
    bits = np.asarray(bits)
    if bits.size and (bits.min() < 0 or bits.max() > 1):
        raise ValueError("bits must be 0 or 1")
    return (1.0 - 2.0 * bits).astype(complex)


def demodulate_bpsk(soft: np.ndarray) -> np.ndarray:
    """Hard decision on the real part; the boundary Re=0 maps to bit 0."""
    return (np.real(np.asarray(soft)) < 0).astype(np.int8)


def superpose(
    common_syms: np.ndarray, private_syms: np.ndarray, pre: PrecoderSet
) -> np.ndarray:
    """Per-subcarrier transmit vectors, sqrt(P_c) p_c d_c + sum_k sqrt(P_k) p_k d_k.

    common_syms: (..., N); private_syms: (K, ..., N). Returns (..., N_t, N).
    """
    x = np.sqrt(pre.power_common) * np.einsum(
        "na,...n->...an", pre.common, np.asarray(common_syms)
    )
    x += np.sqrt(pre.power_private) * np.einsum(
        "kna,k...n->...an", pre.private, np.asarray(private_syms)
    )
    return x


def ofdm_modulate(grid: np.ndarray, cp_len: int) -> np.ndarray:
    """Orthonormal IFFT along the subcarrier axis plus cyclic prefix."""
    grid = np.asarray(grid)
    n = grid.shape[-1]
    if not 0 <= cp_len < n:
        raise ValueError("cp_len must be in [0, N)")
    time = np.fft.ifft(grid, axis=-1, norm="ortho")
    return np.concatenate([time[..., n - cp_len :], time], axis=-1)


def ofdm_demodulate(frame: np.ndarray, cp_len: int) -> np.ndarray:
    """Strip the cyclic prefix and FFT back to subcarriers."""
    frame = np.asarray(frame)
    if cp_len < 0 or frame.shape[-1] <= cp_len:
        raise ValueError("frame shorter than the cyclic prefix")
    return np.fft.fft(frame[..., cp_len:], axis=-1, norm="ortho")


def apply_channel(
    frames: np.ndarray,
    channel: ChannelRealization,
    noise_power: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Propagate antenna frames to every user: tap convolution plus CSCG noise.

    frames: (..., N_t, T). Returns (K, ..., T), the linear convolution of each
    antenna stream with that user's taps, summed over antennas, truncated to
    the frame length, plus iid complex Gaussian noise of variance noise_power
    per sample.
    """
    frames = np.asarray(frames)
    if noise_power < 0:
        raise ValueError("noise_power must be >= 0")
    n_tx = frames.shape[-2]
    length = frames.shape[-1]
    if channel.n_tx != n_tx:
        raise ValueError("frame antenna axis does not match the channel")
    out_shape = (channel.n_users,) + frames.shape[:-2] + (length,)
    received = np.empty(out_shape, dtype=complex)
    for k in range(channel.n_users):
        taps_k = channel.taps[k].reshape((1,) * (frames.ndim - 2) + channel.taps[k].shape)
        full = fftconvolve(frames, taps_k, axes=-1)
        received[k] = full.sum(axis=-2)[..., :length]
    if noise_power > 0:
        noise = rng.standard_normal(out_shape) + 1j * rng.standard_normal(out_shape)
        received += np.sqrt(noise_power / 2.0) * noise
    return received


def branch_gains(rows_true: np.ndarray, pre: PrecoderSet) -> tuple[np.ndarray, np.ndarray]:
    """Power-scaled effective gains at every user.

    Returns (g_common (K, N), g_private (K, K, N)) where g_private[k, j, n] is
    the gain of stream j observed by user k.
    """
    gc = np.sqrt(pre.power_common) * np.einsum("nka,na->kn", rows_true, pre.common)
    gp = np.sqrt(pre.power_private) * np.einsum(
        "nka,jna->kjn", rows_true, pre.private
    )
    return gc, gp


def _safe_divide(obs: np.ndarray, gain: np.ndarray) -> np.ndarray:
    """Equalize, zeroing entries whose gain is below the erasure floor."""
    erased = np.abs(gain) < ERASURE_GAIN
    safe = np.where(erased, 1.0, gain)
    return np.where(erased, 0.0, obs / safe)


def decode_common(
    y: np.ndarray, rows_true: np.ndarray, pre: PrecoderSet, noise_power: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Equalized common-stream symbols at every user, privates treated as noise.

    y: (K, ..., N). Returns (soft (K, ..., N), gain (K, N), disturbance power
    (K, N)); entries with |gain| below the erasure floor are zeroed.
    """
    y = np.asarray(y)
    gc, gp = branch_gains(rows_true, pre)
    disturbance = (np.abs(gp) ** 2).sum(axis=1) + noise_power
    gain_b = gc.reshape(gc.shape[0], *([1] * (y.ndim - 2)), gc.shape[1])
    soft = _safe_divide(y, gain_b)
    return soft, gc, disturbance


def sic_and_decode_private(
    y: np.ndarray,
    common_symbol_estimates: np.ndarray,
    rows_true: np.ndarray,
    pre: PrecoderSet,
    noise_power: float,
    presubtracted: bool = False,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Subtract the remodulated common stream, then equalize the own private stream.

    presubtracted marks transmit-side interference cancellation of
    earlier-encoded streams (successive encoding), which removes lower-index
    streams from each user's residual disturbance. Returns (soft private
    symbols, own gain (K, N), disturbance power (K, N), post-subtraction
    observations).
    """
    y = np.asarray(y)
    gc, gp = branch_gains(rows_true, pre)
    gain_b = gc.reshape(gc.shape[0], *([1] * (y.ndim - 2)), gc.shape[1])
    y_after = y - gain_b * np.asarray(common_symbol_estimates)
    n_users = gp.shape[0]
    own = gp[np.arange(n_users), np.arange(n_users), :]  # (K, N)
    cross_sq = np.abs(gp) ** 2
    if presubtracted:
        mask = np.triu(np.ones((n_users, n_users)), k=1)
    else:
        mask = 1.0 - np.eye(n_users)
    disturbance = np.einsum("kjn,kj->kn", cross_sq, mask) + noise_power
    own_b = own.reshape(n_users, *([1] * (y.ndim - 2)), own.shape[1])
    soft = _safe_divide(y_after, own_b)
    return soft, own, disturbance, y_after


def presubtract_known_interference(
    private_syms: np.ndarray, gains_hat: np.ndarray
) -> np.ndarray:
    """Successive transmit-side cancellation for lower-triangular effective channels.

    private_syms: (K, ..., N); gains_hat: (K, K, N) transmitter-side effective
    gains (victim axis first). Stream k is adjusted so that, through a lower
    triangular channel, earlier streams cancel: out_k = d_k -
    sum_{j<k} (G[k,j]/G[k,k]) out_j. Equal per-stream powers are assumed.
    """
    d = np.asarray(private_syms).astype(complex)
    out = d.copy()
    n_users = d.shape[0]
    for k in range(1, n_users):
        acc = np.zeros_like(d[0])
        for j in range(k):
            ratio = _safe_divide(gains_hat[k, j], gains_hat[k, k])
            acc = acc + ratio.reshape(*([1] * (d.ndim - 2)), -1) * out[j]
        out[k] = d[k] - acc
    return out


def rate_tables(
    rows_true: np.ndarray, pre: PrecoderSet, noise_power: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Ensemble tables for one realization.

    Returns (rate_private (K, N), rate_common (N,), sinr_private (K, N),
    per-user common sinr (K, N)).
    """
    n_users = rows_true.shape[1]
    gc_unit = np.einsum("nka,na->kn", rows_true, pre.common)
    gp_unit = np.einsum("nka,jna->kjn", rows_true, pre.private)
    own_sq = np.abs(gp_unit[np.arange(n_users), np.arange(n_users), :]) ** 2
    gc_sq = np.abs(gc_unit) ** 2
    cross_sq = np.abs(gp_unit) ** 2
    rate_p = private_rate(own_sq[None], pre.power_private, noise_power)
    rate_c = common_rate(
        gc_sq[None], cross_sq[None], pre.power_common, pre.power_private, noise_power
    )
    sinr_p = private_sinr(own_sq, pre.power_private, noise_power)
    sinr_c = common_sinr(
        gc_sq, cross_sq, pre.power_common, pre.power_private, noise_power
    )
    return rate_p, rate_c, sinr_p, sinr_c


@dataclass(frozen=True)
class LinkParams:
    """Resolved numeric parameters for one link simulation."""

    n_users: int
    n_tx: int
    n_subcarriers: int
    profile: TapProfile
    cp_len: int
    replicas: int
    arrangement: Arrangement
    chunk: int
    common_fraction: float
    tau: float
    private_precoder: PrivatePrecoder
    common_strategy: CommonPrecoderStrategy
    total_power: float
    noise_power: float
    block_bits: int


@dataclass
class LinkOutput:
    """Decoded bits and rate tables from one realization."""

    decided_bits: np.ndarray  # (K, B, N) after combining
    private_bits: np.ndarray  # (K, B, N) before combining
    rate_private: np.ndarray  # (K, N)
    rate_common: np.ndarray  # (N,)


def rsma_link(
    p: LinkParams,
    channel: ChannelRealization,
    csit: CsitView,
    bits: np.ndarray,
    rng_noise: np.random.Generator,
    combine: bool = True,
    want_rates: bool = True,
) -> LinkOutput:
    """One full downlink transmission of the given bits over one realization.

    bits: (K, B, N). The common stream carries replicas of each user's
    weak-subcarrier symbols per the split map built from the CSIT gains;
    replicas=0 (with common_fraction=0) degenerates to plain multi-user MIMO.
    """
    bits = np.asarray(bits)
    n_users, _, n_sub = bits.shape
    rows_hat = rows_from(csit.freq_hat)
    rows_true = rows_from(channel.freq)
    pre = build_precoders(
        rows_hat,
        p.noise_power,
        p.total_power,
        p.common_fraction,
        p.private_precoder,
        p.common_strategy,
    )
    split: SplitMap | None = None
    if p.replicas > 0:
        split = build_split_map(csit.gains(), p.replicas, p.arrangement, p.chunk)

    d = modulate_bpsk(bits)
    d_c = np.zeros(bits.shape[1:], dtype=complex)
    if split is not None:
        d_c[..., : split.common_len] = compose_common(d, split)

    if p.private_precoder is PrivatePrecoder.ZFDPC:
        gains_hat = np.einsum("nka,jna->kjn", rows_hat, pre.private)
        d_tx = presubtract_known_interference(d, gains_hat)
    else:
        d_tx = d

    x = superpose(d_c, d_tx, pre)
    frame = ofdm_modulate(x, p.cp_len)
    rx_time = apply_channel(frame, channel, p.noise_power, rng_noise)
    y = ofdm_demodulate(rx_time, p.cp_len)  # (K, B, N)

    soft_c, g_c, npow_c = decode_common(y, rows_true, pre, p.noise_power)
    d_c_hat = modulate_bpsk(demodulate_bpsk(soft_c)).astype(complex)
    active = split.common_len if split is not None else 0
    d_c_hat[..., active:] = 0.0

    presub = p.private_precoder is PrivatePrecoder.ZFDPC
    soft_p, g_p, npow_p, y_after = sic_and_decode_private(
        y, d_c_hat, rows_true, pre, p.noise_power, presubtracted=presub
    )
    private_bits = demodulate_bpsk(soft_p)
    decided = private_bits.copy()

    if combine and split is not None:
        for k in range(n_users):
            idx, common_obs = extract_user_portion(
                y[k][..., : split.common_len], split, k
            )
            pos = split.position[k]
            w = CombinerWeights(
                private_gain=g_p[k, idx],
                private_noise_power=npow_p[k, idx],
                common_gain=g_c[k, pos],
                common_noise_power=npow_c[k, pos],
            )
            merged = combine_mrc(y_after[k][..., idx], common_obs, w)
            decided[k][..., idx] = demodulate_bpsk(merged)

    rate_p = rate_c = None
    if want_rates:
        rate_p, rate_c, sinr_p, sinr_c = rate_tables(rows_true, pre, p.noise_power)
        if combine and split is not None:
            # replicated symbols are decoded from two branches; credit the
            # combined SINR on those subcarriers
            for k in range(n_users):
                idx = split.selected[k]
                pos = split.position[k]
                rate_p[k, idx] = np.log2(1.0 + sinr_p[k, idx] + sinr_c[k, pos])

    return LinkOutput(
        decided_bits=decided,
        private_bits=private_bits,
        rate_private=rate_p,
        rate_common=rate_c,
    )


def blocks_for(bits_per_user: int, n_subcarriers: int) -> int:
    return math.ceil(bits_per_user / n_subcarriers)


def simulate_rsma_trial(
    p: LinkParams,
    rng_data: np.random.Generator,
    rng_noise: np.random.Generator,
) -> TrialRecord:
    """One channel realization: draw channel, CSIT, data; transmit; count."""
    channel = generate_channel(rng_data, p.n_users, p.n_tx, p.profile, p.n_subcarriers)
    csit = degrade_csit(channel, p.tau, rng_data)
    n_blocks = blocks_for(p.block_bits, p.n_subcarriers)
    bits = rng_data.integers(
        0, 2, size=(p.n_users, n_blocks, p.n_subcarriers), dtype=np.int8
    )
    out = rsma_link(p, channel, csit, bits, rng_noise)
    s = p.block_bits
    err_comb = np.array(
        [
            count_bit_errors(bits[k].ravel()[:s], out.decided_bits[k].ravel()[:s])
            for k in range(p.n_users)
        ]
    )
    err_priv = np.array(
        [
            count_bit_errors(bits[k].ravel()[:s], out.private_bits[k].ravel()[:s])
            for k in range(p.n_users)
        ]
    )
    return TrialRecord(
        bit_errors_private=err_priv,
        bits_sent=np.full(p.n_users, s),
        bit_errors_combined=err_comb,
        rate_private=out.rate_private,
        rate_common=out.rate_common,
    )
