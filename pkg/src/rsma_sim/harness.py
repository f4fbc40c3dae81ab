"""Monte Carlo sweep driver.

Determinism contract: every trial derives its own seeds from
(master seed, scheme, SNR index, trial index), workers return per-trial
records, and the reduction always walks them in trial order. The CSV is
therefore byte-identical for any worker count.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import math
import time
from dataclasses import dataclass

import numpy as np

from . import baselines, metrics
from .baselines import SchemeId
from .config import SimConfig, validate, with_overrides

# Channel and payload draws share one stream across the SNR axis so curves
# are monotone realization by realization; this index is reserved for it.
CHANNEL_STREAM = -1

# Delay packets live in their own trial-index range, clear of BER trials.
DELAY_BASE = 2**32

BER_CHUNK = 25
DELAY_CHUNK = 50

CSV_COLUMNS = (
    "scheme",
    "snr_db",
    "ber",
    "ber_ci95",
    "sum_rate_bps_hz",
    "delay_slots",
    "trials",
    "seed",
)


def derive_trial_seed(master_seed: int, scheme: str | SchemeId, snr_index: int, trial_index: int) -> int:
    """Collision-resistant 64-bit seed for one trial's generator."""
    token = scheme.value if isinstance(scheme, SchemeId) else str(scheme)
    msg = f"{master_seed}|{token}|{snr_index}|{trial_index}".encode()
    digest = hashlib.blake2b(msg, digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass
class ReportRow:
    scheme: str
    snr_db: float
    ber: float
    ber_ci95: float
    sum_rate_bps_hz: float
    delay_slots: float
    trials: int
    seed: int
    wall_time_s: float = 0.0


@dataclass
class MetricsReport:
    rows: list
    config: SimConfig


def _chunk_ranges(total: int, size: int):
    return [(lo, min(lo + size, total)) for lo in range(0, total, size)]


def _ber_task(cfg: SimConfig, scheme: SchemeId, snr_index: int, lo: int, hi: int):
    snr_db = cfg.snr_db[snr_index]
    params = cfg.link_params(scheme, snr_db)
    out = []
    for z in range(lo, hi):
        rng_data = np.random.default_rng(
            derive_trial_seed(cfg.seed, scheme, CHANNEL_STREAM, z)
        )
        rng_noise = np.random.default_rng(
            derive_trial_seed(cfg.seed, scheme, snr_index, z)
        )
        rec = baselines.simulate_trial(
            scheme, params, rng_data, rng_noise, noma_weak_share=cfg.noma_weak_share
        )
        errors = int(np.sum(rec.bit_errors_combined))
        bits = int(np.sum(rec.bits_sent))
        rate = metrics.sum_rate(rec.rate_common, rec.rate_private)[1]
        out.append((z, errors, bits, float(rate)))
    return out


def _delay_task(cfg: SimConfig, scheme: SchemeId, snr_index: int, lo: int, hi: int):
    snr_db = cfg.snr_db[snr_index]
    params = cfg.link_params(scheme, snr_db)
    out = []
    for d in range(lo, hi):
        rng_data = np.random.default_rng(
            derive_trial_seed(cfg.seed, scheme, snr_index, DELAY_BASE + 2 * d)
        )
        rng_noise = np.random.default_rng(
            derive_trial_seed(cfg.seed, scheme, snr_index, DELAY_BASE + 2 * d + 1)
        )
        slots = baselines.packet_delays(
            scheme,
            params,
            rng_data,
            rng_noise,
            max_slots=cfg.max_slots,
            noma_weak_share=cfg.noma_weak_share,
        )
        out.append((d, [int(s) for s in slots]))
    return out


def _run_chunk(task):
    cfg, scheme, snr_index, kind, lo, hi = task
    if kind == "ber":
        return _ber_task(cfg, scheme, snr_index, lo, hi)
    return _delay_task(cfg, scheme, snr_index, lo, hi)


def run_sweep(cfg: SimConfig, progress=None) -> MetricsReport:
    validate(cfg)
    tasks = []
    task_keys = []
    for scheme in cfg.schemes:
        for si in range(len(cfg.snr_db)):
            for lo, hi in _chunk_ranges(cfg.trials, BER_CHUNK):
                tasks.append((cfg, scheme, si, "ber", lo, hi))
                task_keys.append((scheme, si, "ber"))
            for lo, hi in _chunk_ranges(cfg.delay_packets, DELAY_CHUNK):
                tasks.append((cfg, scheme, si, "delay", lo, hi))
                task_keys.append((scheme, si, "delay"))

    workers = cfg.resolved_workers()
    if workers > 1 and len(tasks) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_chunk, tasks, chunksize=1))
    else:
        results = [_run_chunk(t) for t in tasks]

    grouped: dict = {}
    for key, payload in zip(task_keys, results):
        grouped.setdefault(key, []).extend(payload)

    debug_lines = []
    rows = []
    for scheme in cfg.schemes:
        for si, snr_db in enumerate(cfg.snr_db):
            start = time.perf_counter()
            trials = sorted(grouped.get((scheme, si, "ber"), []))
            errors = 0
            bits = 0
            rate_sum = 0.0
            for z, err, nbits, rate in trials:
                errors += err
                bits += nbits
                rate_sum += rate
                if cfg.debug_trials:
                    debug_lines.append(
                        {
                            "kind": "ber",
                            "scheme": scheme.value,
                            "snr_db": snr_db,
                            "trial": z,
                            "bit_errors": err,
                            "bits": nbits,
                            "sum_rate": rate,
                        }
                    )
            ber = errors / bits if bits else math.nan
            ci = metrics.binomial_ci95(errors, bits) if bits else math.nan
            mean_rate = rate_sum / len(trials) if trials else math.nan

            packets = sorted(grouped.get((scheme, si, "delay"), []))
            slot_sum = 0
            slot_count = 0
            for d, slots in packets:
                slot_sum += sum(slots)
                slot_count += len(slots)
                if cfg.debug_trials:
                    debug_lines.append(
                        {
                            "kind": "delay",
                            "scheme": scheme.value,
                            "snr_db": snr_db,
                            "packet": d,
                            "slots": slots,
                        }
                    )
            delay = slot_sum / slot_count if slot_count else math.nan

            rows.append(
                ReportRow(
                    scheme=scheme.value,
                    snr_db=snr_db,
                    ber=ber,
                    ber_ci95=ci,
                    sum_rate_bps_hz=mean_rate,
                    delay_slots=delay,
                    trials=cfg.trials,
                    seed=cfg.seed,
                    wall_time_s=time.perf_counter() - start,
                )
            )
            if progress is not None:
                progress(
                    f"{scheme.value} @ {snr_db:g} dB: ber={ber:.3e} "
                    f"rate={mean_rate:.3f} delay={delay:g}"
                )

    if cfg.debug_trials:
        with open(cfg.debug_trials, "w", encoding="utf-8") as fh:
            for line in debug_lines:
                fh.write(json.dumps(line) + "\n")

    return MetricsReport(rows=rows, config=cfg)


def _fmt(value: float) -> str:
    return format(float(value), ".10g")


def emit_csv(report: MetricsReport) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in report.rows:
        lines.append(
            ",".join(
                (
                    row.scheme,
                    _fmt(row.snr_db),
                    _fmt(row.ber),
                    _fmt(row.ber_ci95),
                    _fmt(row.sum_rate_bps_hz),
                    _fmt(row.delay_slots),
                    str(row.trials),
                    str(row.seed),
                )
            )
        )
    return "\n".join(lines) + "\n"


def write_csv(report: MetricsReport, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(emit_csv(report))


# Reproduction presets for the headline result figures. Each entry lists
# (file tag, config overrides); trial counts are sized for desk runtimes.
FIGURE_PRESETS = {
    "2a": [
        (
            "rci",
            dict(
                schemes=(
                    SchemeId.PROPOSED_LOCALIZED,
                    SchemeId.PROPOSED_DISTRIBUTED,
                    SchemeId.CONVENTIONAL_RSMA,
                    SchemeId.MU_MIMO,
                ),
                precoder="rci",
                trials=200,
                block_bits=5000,
                delay_packets=0,
            ),
        ),
        (
            "zfdpc",
            dict(
                schemes=(
                    SchemeId.PROPOSED_LOCALIZED,
                    SchemeId.PROPOSED_DISTRIBUTED,
                    SchemeId.CONVENTIONAL_RSMA,
                    SchemeId.MU_MIMO,
                ),
                precoder="zfdpc",
                trials=200,
                block_bits=5000,
                delay_packets=0,
            ),
        ),
    ],
    "2b": [
        (
            "tau00",
            dict(
                schemes=(
                    SchemeId.PROPOSED_LOCALIZED,
                    SchemeId.PROPOSED_DISTRIBUTED,
                    SchemeId.CONVENTIONAL_RSMA,
                    SchemeId.MU_MIMO,
                ),
                csit_error=0.0,
                trials=200,
                block_bits=5000,
                delay_packets=0,
            ),
        ),
        (
            "tau01",
            dict(
                schemes=(
                    SchemeId.PROPOSED_LOCALIZED,
                    SchemeId.PROPOSED_DISTRIBUTED,
                    SchemeId.CONVENTIONAL_RSMA,
                    SchemeId.MU_MIMO,
                ),
                csit_error=0.1,
                trials=200,
                block_bits=5000,
                delay_packets=0,
            ),
        ),
    ],
    "3a": [
        (
            "n64",
            dict(
                schemes=(
                    SchemeId.PROPOSED_DISTRIBUTED,
                    SchemeId.CONVENTIONAL_RSMA,
                    SchemeId.MIMO_SDMA,
                    SchemeId.MIMO_NOMA,
                ),
                subcarriers=64,
                trials=200,
                block_bits=2000,
                delay_packets=0,
            ),
        ),
        (
            "n128",
            dict(
                schemes=(SchemeId.PROPOSED_DISTRIBUTED,),
                subcarriers=128,
                trials=200,
                block_bits=2000,
                delay_packets=0,
            ),
        ),
    ],
    "3b": [
        (
            "delay",
            dict(
                schemes=(
                    SchemeId.PROPOSED_DISTRIBUTED,
                    SchemeId.HARQ_RSMA,
                    SchemeId.MIMO_SDMA,
                    SchemeId.MIMO_NOMA,
                ),
                snr_db=tuple(float(x) for x in range(-10, 5, 2)),
                trials=20,
                block_bits=1000,
                delay_packets=400,
                max_slots=16,
            ),
        ),
    ],
}


def figure_configs(name: str, base: SimConfig | None = None):
    """Expand one figure preset into (tag, config) pairs."""
    if name not in FIGURE_PRESETS:
        valid = ", ".join(sorted(FIGURE_PRESETS))
        raise ValueError(f"unknown figure '{name}' (valid: {valid})")
    base = base if base is not None else SimConfig()
    out = []
    for tag, overrides in FIGURE_PRESETS[name]:
        fixed = dict(overrides)
        if "precoder" in fixed and isinstance(fixed["precoder"], str):
            from .precoding import PrivatePrecoder

            fixed["precoder"] = PrivatePrecoder(fixed["precoder"])
        out.append((tag, with_overrides(base, **fixed)))
    return out


def run_figure(name: str, base: SimConfig | None = None, progress=None):
    """Run every sweep behind one figure; returns (tag, report) pairs."""
    return [
        (tag, run_sweep(cfg, progress=progress))
        for tag, cfg in figure_configs(name, base)
    ]
