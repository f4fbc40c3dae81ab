"""Reference schemes: conventional RSMA, MU-MIMO/SDMA, power-domain NOMA, and
type-1 retransmission on top of any of them.

Every baseline occupies the same resources as the splitter-based scheme: N
subcarriers, total per-subcarrier power P, BPSK. They differ only in how the
streams are formed and decoded.
"""

from __future__ import annotations

import dataclasses
import enum
import math

import numpy as np

from .channel import degrade_csit, generate_channel
from .metrics import TrialRecord, count_bit_errors, private_sinr
from .phy import (
    LinkParams,
    _safe_divide,
    apply_channel,
    blocks_for,
    demodulate_bpsk,
    modulate_bpsk,
    ofdm_demodulate,
    ofdm_modulate,
    presubtract_known_interference,
    rate_tables,
    rsma_link,
    sic_and_decode_private,
    decode_common,
    simulate_rsma_trial,
    superpose,
)
from .precoding import PrivatePrecoder, build_precoders, rci_private, rows_from


class SchemeId(enum.Enum):
    PROPOSED_LOCALIZED = "proposed_localized"
    PROPOSED_DISTRIBUTED = "proposed_distributed"
    CONVENTIONAL_RSMA = "conventional_rsma"
    MU_MIMO = "mu_mimo"
    MIMO_SDMA = "mimo_sdma"
    MIMO_NOMA = "mimo_noma"
    HARQ_RSMA = "harq_rsma"


def conventional_rsma_split(
    message_bits: np.ndarray, common_fraction: float
) -> tuple[np.ndarray, np.ndarray]:
    """Message split with no channel dependence.

    The first ceil(common_fraction * len) bits ride the common stream, the
    rest stay private. Reassembly is plain concatenation.
    """
    message_bits = np.asarray(message_bits)
    if message_bits.ndim != 1:
        raise ValueError("message_bits must be a vector")
    if not 0.0 <= common_fraction <= 1.0:
        raise ValueError("common_fraction must be in [0, 1]")
    n_common = math.ceil(common_fraction * message_bits.size)
    return message_bits[:n_common], message_bits[n_common:]


def conventional_link(
    p: LinkParams,
    channel,
    csit,
    common_bits: np.ndarray,
    private_bits: np.ndarray,
    rng_noise: np.random.Generator,
    want_rates: bool = True,
):
    """Transmit distinct data on the common stream (concatenated user payloads).

    common_bits: (K, B, m); private_bits: (K, B, N). Returns (decoded common
    part per user (K, B, m), decoded private part (K, B, N), rate_private,
    rate_common).
    """
    n_users, n_blocks, m = common_bits.shape
    n_sub = private_bits.shape[-1]
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
    d = modulate_bpsk(private_bits)
    d_c = np.zeros((n_blocks, n_sub), dtype=complex)
    for k in range(n_users):
        d_c[:, k * m : (k + 1) * m] = modulate_bpsk(common_bits[k])

    if p.private_precoder is PrivatePrecoder.ZFDPC:
        gains_hat = np.einsum("nka,jna->kjn", rows_hat, pre.private)
        d_tx = presubtract_known_interference(d, gains_hat)
    else:
        d_tx = d

    x = superpose(d_c, d_tx, pre)
    y = ofdm_demodulate(
        apply_channel(ofdm_modulate(x, p.cp_len), channel, p.noise_power, rng_noise),
        p.cp_len,
    )

    soft_c, _, _ = decode_common(y, rows_true, pre, p.noise_power)
    bits_c = demodulate_bpsk(soft_c)  # (K, B, N): every user decodes all slots
    d_c_hat = modulate_bpsk(bits_c).astype(complex)
    d_c_hat[..., n_users * m :] = 0.0
    presub = p.private_precoder is PrivatePrecoder.ZFDPC
    soft_p, _, _, _ = sic_and_decode_private(
        y, d_c_hat, rows_true, pre, p.noise_power, presubtracted=presub
    )
    decoded_private = demodulate_bpsk(soft_p)
    decoded_common = np.stack(
        [bits_c[k][..., k * m : (k + 1) * m] for k in range(n_users)]
    )
    rate_p = rate_c = None
    if want_rates:
        rate_p, rate_c, _, _ = rate_tables(rows_true, pre, p.noise_power)
    return decoded_common, decoded_private, rate_p, rate_c


def conventional_trial(
    p: LinkParams, rng_data: np.random.Generator, rng_noise: np.random.Generator
) -> TrialRecord:
    """Conventional RSMA over one realization; errors counted on both parts."""
    m = p.replicas
    msg_len = p.n_subcarriers + m
    n_blocks = blocks_for(p.block_bits, msg_len)
    channel = generate_channel(rng_data, p.n_users, p.n_tx, p.profile, p.n_subcarriers)
    csit = degrade_csit(channel, p.tau, rng_data)
    msg = rng_data.integers(0, 2, size=(p.n_users, n_blocks, msg_len), dtype=np.int8)
    common_bits = msg[..., :m]
    private_bits = msg[..., m:]
    dec_c, dec_p, rate_p, rate_c = conventional_link(
        p, channel, csit, common_bits, private_bits, rng_noise
    )
    decoded = np.concatenate([dec_c, dec_p], axis=-1)
    s = p.block_bits
    errs = np.array(
        [
            count_bit_errors(msg[k].ravel()[:s], decoded[k].ravel()[:s])
            for k in range(p.n_users)
        ]
    )
    return TrialRecord(
        bit_errors_private=errs,
        bits_sent=np.full(p.n_users, s),
        bit_errors_combined=errs,
        rate_private=rate_p,
        rate_common=rate_c,
    )


def mu_mimo_params(p: LinkParams) -> LinkParams:
    """Strip the common stream: full power to private beams, no replicas."""
    return dataclasses.replace(p, replicas=0, common_fraction=0.0)


def mu_mimo_trial(
    p: LinkParams, rng_data: np.random.Generator, rng_noise: np.random.Generator
) -> TrialRecord:
    return simulate_rsma_trial(mu_mimo_params(p), rng_data, rng_noise)


def _noma_pairs(mean_gains: np.ndarray) -> list[tuple[int, int]]:
    """Pair strongest with weakest by mean estimated gain."""
    order = np.argsort(-mean_gains, kind="stable")
    n = order.size
    return [(int(order[i]), int(order[n - 1 - i])) for i in range(n // 2)]


def noma_link(
    p: LinkParams,
    channel,
    csit,
    bits: np.ndarray,
    rng_noise: np.random.Generator,
    weak_share: float = 0.8,
    want_rates: bool = True,
):
    """Power-domain superposition of paired users on their individual beams.

    Per subcarrier the pair member with the lower estimated norm is the weak
    user and receives weak_share of the pair budget; the strong user detects
    and subtracts the weak stream before decoding its own. Returns (decoded
    bits (K, B, N), rate table (K, N)).
    """
    if not 0.5 <= weak_share < 1.0:
        raise ValueError("weak_share must be in [0.5, 1)")
    n_users = bits.shape[0]
    if n_users % 2:
        raise ValueError("pairing needs an even number of users")
    rows_hat = rows_from(csit.freq_hat)
    rows_true = rows_from(channel.freq)
    beams = rci_private(rows_hat, p.noise_power, p.total_power)  # (K, N, N_t)
    gains_hat = csit.gains()  # (K, N)
    pairs = _noma_pairs(gains_hat.mean(axis=1))
    pair_budget = p.total_power / len(pairs)

    power = np.empty((n_users, p.n_subcarriers))
    partner = np.empty(n_users, dtype=int)
    for u, v in pairs:
        partner[u], partner[v] = v, u
        u_weak = gains_hat[u] <= gains_hat[v]  # ties: lower index is weak
        power[u] = np.where(u_weak, weak_share, 1.0 - weak_share) * pair_budget
        power[v] = pair_budget - power[u]

    amp = np.sqrt(power)  # (K, N)
    d = modulate_bpsk(bits)
    x = np.einsum("kn,kna,kbn->ban", amp, beams, d)
    y = ofdm_demodulate(
        apply_channel(ofdm_modulate(x, p.cp_len), channel, p.noise_power, rng_noise),
        p.cp_len,
    )

    g_unit = np.einsum("nka,jna->kjn", rows_true, beams)  # victim k, stream j
    g = amp[None, :, :] * g_unit  # (K, K, N) scaled
    decoded = np.empty_like(bits)
    for k in range(n_users):
        q = partner[k]
        own = g[k, k].reshape(1, -1)
        cross = g[k, q].reshape(1, -1)
        direct = demodulate_bpsk(_safe_divide(y[k], own))
        partner_hat = modulate_bpsk(demodulate_bpsk(_safe_divide(y[k], cross)))
        after = y[k] - cross * partner_hat
        with_sic = demodulate_bpsk(_safe_divide(after, own))
        strong_here = power[k] < power[q]  # strong user holds the smaller share
        decoded[k] = np.where(strong_here.reshape(1, -1), with_sic, direct)

    rate = None
    if want_rates:
        # Same rate convention as every other scheme: signal terms are each
        # stream's gain on its own user's channel, pre-scaled by its power.
        sig = power * np.abs(g_unit[np.arange(n_users), np.arange(n_users)]) ** 2
        sinr = private_sinr(sig, 1.0, p.noise_power)
        rate = np.log2(1.0 + sinr)
    return decoded, rate


def noma_trial(
    p: LinkParams,
    rng_data: np.random.Generator,
    rng_noise: np.random.Generator,
    weak_share: float = 0.8,
) -> TrialRecord:
    channel = generate_channel(rng_data, p.n_users, p.n_tx, p.profile, p.n_subcarriers)
    csit = degrade_csit(channel, p.tau, rng_data)
    n_blocks = blocks_for(p.block_bits, p.n_subcarriers)
    bits = rng_data.integers(
        0, 2, size=(p.n_users, n_blocks, p.n_subcarriers), dtype=np.int8
    )
    decoded, rate = noma_link(p, channel, csit, bits, rng_noise, weak_share)
    s = p.block_bits
    errs = np.array(
        [
            count_bit_errors(bits[k].ravel()[:s], decoded[k].ravel()[:s])
            for k in range(p.n_users)
        ]
    )
    return TrialRecord(
        bit_errors_private=errs,
        bits_sent=np.full(p.n_users, s),
        bit_errors_combined=errs,
        rate_private=rate,
        rate_common=np.zeros(p.n_subcarriers),
    )


def simulate_trial(
    scheme: SchemeId,
    p: LinkParams,
    rng_data: np.random.Generator,
    rng_noise: np.random.Generator,
    noma_weak_share: float = 0.8,
) -> TrialRecord:
    """Dispatch one BER/rate trial for any scheme."""
    if scheme in (SchemeId.PROPOSED_LOCALIZED, SchemeId.PROPOSED_DISTRIBUTED):
        return simulate_rsma_trial(p, rng_data, rng_noise)
    if scheme in (SchemeId.CONVENTIONAL_RSMA, SchemeId.HARQ_RSMA):
        return conventional_trial(p, rng_data, rng_noise)
    if scheme in (SchemeId.MU_MIMO, SchemeId.MIMO_SDMA):
        return mu_mimo_trial(p, rng_data, rng_noise)
    if scheme is SchemeId.MIMO_NOMA:
        return noma_trial(p, rng_data, rng_noise, noma_weak_share)
    raise ValueError(f"unknown scheme: {scheme}")


def _block_success(
    scheme: SchemeId,
    p: LinkParams,
    bits: dict,
    rng_data: np.random.Generator,
    rng_noise: np.random.Generator,
    noma_weak_share: float,
) -> np.ndarray:
    """One slot: fresh realization, fixed payload; per-user all-bits-correct."""
    channel = generate_channel(rng_data, p.n_users, p.n_tx, p.profile, p.n_subcarriers)
    csit = degrade_csit(channel, p.tau, rng_data)
    if scheme in (SchemeId.PROPOSED_LOCALIZED, SchemeId.PROPOSED_DISTRIBUTED):
        out = rsma_link(p, channel, csit, bits["private"], rng_noise, want_rates=False)
        ok = (out.decided_bits == bits["private"]).all(axis=(1, 2))
    elif scheme in (SchemeId.CONVENTIONAL_RSMA, SchemeId.HARQ_RSMA):
        dec_c, dec_p, _, _ = conventional_link(
            p, channel, csit, bits["common"], bits["private"], rng_noise, want_rates=False
        )
        ok = (dec_c == bits["common"]).all(axis=(1, 2)) & (
            dec_p == bits["private"]
        ).all(axis=(1, 2))
    elif scheme in (SchemeId.MU_MIMO, SchemeId.MIMO_SDMA):
        q = mu_mimo_params(p)
        out = rsma_link(q, channel, csit, bits["private"], rng_noise, want_rates=False)
        ok = (out.decided_bits == bits["private"]).all(axis=(1, 2))
    elif scheme is SchemeId.MIMO_NOMA:
        decoded, _ = noma_link(
            p, channel, csit, bits["private"], rng_noise, noma_weak_share, want_rates=False
        )
        ok = (decoded == bits["private"]).all(axis=(1, 2))
    else:
        raise ValueError(f"unknown scheme: {scheme}")
    return ok


def packet_delays(
    scheme: SchemeId,
    p: LinkParams,
    rng_data: np.random.Generator,
    rng_noise: np.random.Generator,
    max_slots: int,
    noma_weak_share: float = 0.8,
) -> np.ndarray:
    """Slots each user's packet needs: one OFDM block retransmitted over fresh
    realizations until it decodes cleanly, capped at max_slots."""
    if max_slots < 1:
        raise ValueError("max_slots must be >= 1")
    bits = {
        "private": rng_data.integers(
            0, 2, size=(p.n_users, 1, p.n_subcarriers), dtype=np.int8
        )
    }
    if scheme in (SchemeId.CONVENTIONAL_RSMA, SchemeId.HARQ_RSMA):
        bits["common"] = rng_data.integers(
            0, 2, size=(p.n_users, 1, p.replicas), dtype=np.int8
        )
    slots = np.full(p.n_users, max_slots, dtype=np.int64)
    pending = np.ones(p.n_users, dtype=bool)
    for slot in range(1, max_slots + 1):
        ok = _block_success(scheme, p, bits, rng_data, rng_noise, noma_weak_share)
        newly = pending & ok
        slots[newly] = slot
        pending &= ~ok
        if not pending.any():
            break
    return slots


def harq_rsma_delay(
    p: LinkParams,
    rng_data: np.random.Generator,
    rng_noise: np.random.Generator,
    max_slots: int,
) -> np.ndarray:
    """Type-1 retransmission of conventional RSMA blocks (no combining)."""
    return packet_delays(SchemeId.HARQ_RSMA, p, rng_data, rng_noise, max_slots)
