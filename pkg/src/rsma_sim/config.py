"""Simulation configuration: typed container, flat key=value files, validation."""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass

from .baselines import SchemeId
from .channel import TapProfile
from .phy import LinkParams
from .precoding import CommonPrecoderStrategy, PrivatePrecoder
from .splitter import Arrangement

ENV_WORKERS = "RSMA_SIM_WORKERS"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    """Everything a sweep needs. Defaults follow the reference setup:
    2 users, 2 antennas, 64 subcarriers, 8-tap channel, BPSK."""

    schemes: tuple[SchemeId, ...] = (SchemeId.PROPOSED_DISTRIBUTED,)
    users: int = 2
    tx_antennas: int = 2
    subcarriers: int = 64
    taps: int = 8
    tap_decay: float = 0.5
    cp_len: int = 16
    snr_db: tuple[float, ...] = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0)
    total_power: float = 1.0
    noise_mode: str = "snr"  # "snr": sigma^2 from the SNR grid; "absolute": from density
    noise_density_dbm_hz: float = -80.0
    subcarrier_bandwidth_hz: float = 15000.0
    precoder: PrivatePrecoder = PrivatePrecoder.RCI
    common_precoder: CommonPrecoderStrategy = CommonPrecoderStrategy.DOMINANT_EIGENVECTOR
    common_power_fraction: float = 0.5
    csit_error: float = 0.0
    replicas: int | None = None  # default floor(N/K)
    chunk: int = 2
    trials: int = 1000
    block_bits: int = 20000
    max_slots: int = 16
    delay_packets: int = 100
    noma_weak_share: float = 0.8
    seed: int = 12345
    workers: int | None = None
    out: str | None = None
    debug_trials: str | None = None

    def resolved_replicas(self) -> int:
        if self.replicas is not None:
            return self.replicas
        return self.subcarriers // self.users

    def resolved_workers(self) -> int:
        if self.workers is not None:
            return self.workers
        env = os.environ.get(ENV_WORKERS)
        if env:
            try:
                return max(1, int(env))
            except ValueError as exc:
                raise ConfigError(f"{ENV_WORKERS} must be an integer") from exc
        return 1

    def noise_power(self, snr_db: float) -> float:
        """Per-subcarrier noise variance at one sweep point."""
        if self.noise_mode == "snr":
            return self.total_power * 10.0 ** (-snr_db / 10.0)
        density_w = 10.0 ** ((self.noise_density_dbm_hz - 30.0) / 10.0)
        return density_w * self.subcarrier_bandwidth_hz

    def point_power(self, snr_db: float) -> float:
        """Per-subcarrier transmit power at one sweep point."""
        if self.noise_mode == "snr":
            return self.total_power
        return self.noise_power(snr_db) * 10.0 ** (snr_db / 10.0)

    def arrangement_for(self, scheme: SchemeId) -> Arrangement:
        if scheme is SchemeId.PROPOSED_DISTRIBUTED:
            return Arrangement.DISTRIBUTED
        return Arrangement.LOCALIZED

    def link_params(self, scheme: SchemeId, snr_db: float) -> LinkParams:
        return LinkParams(
            n_users=self.users,
            n_tx=self.tx_antennas,
            n_subcarriers=self.subcarriers,
            profile=TapProfile(self.taps, self.tap_decay),
            cp_len=self.cp_len,
            replicas=self.resolved_replicas(),
            arrangement=self.arrangement_for(scheme),
            chunk=self.chunk,
            common_fraction=self.common_power_fraction,
            tau=self.csit_error,
            private_precoder=self.precoder,
            common_strategy=self.common_precoder,
            total_power=self.point_power(snr_db),
            noise_power=self.noise_power(snr_db),
            block_bits=self.block_bits,
        )


def validate(cfg: SimConfig) -> None:
    if not cfg.schemes:
        raise ConfigError("at least one scheme is required")
    if cfg.users < 1:
        raise ConfigError("users must be >= 1")
    if cfg.tx_antennas < cfg.users:
        raise ConfigError("tx_antennas must be >= users")
    if cfg.taps < 1:
        raise ConfigError("taps must be >= 1")
    if cfg.subcarriers < cfg.taps:
        raise ConfigError("subcarriers must be >= taps")
    if not cfg.taps - 1 <= cfg.cp_len < cfg.subcarriers:
        raise ConfigError("cp_len must satisfy taps-1 <= cp_len < subcarriers")
    if not cfg.snr_db:
        raise ConfigError("snr_db grid is empty")
    if cfg.total_power <= 0:
        raise ConfigError("total_power must be positive")
    if cfg.noise_mode not in ("snr", "absolute"):
        raise ConfigError("noise_mode must be 'snr' or 'absolute'")
    if not 0.0 <= cfg.common_power_fraction < 1.0:
        raise ConfigError("common_power_fraction must be in [0, 1)")
    if not 0.0 <= cfg.csit_error <= 1.0:
        raise ConfigError("csit_error must be in [0, 1]")
    m = cfg.resolved_replicas()
    if m < 0 or m * cfg.users > cfg.subcarriers:
        raise ConfigError("replicas per user must satisfy 0 <= users*m <= subcarriers")
    if cfg.chunk < 1:
        raise ConfigError("chunk must be >= 1")
    if cfg.trials < 1:
        raise ConfigError("trials must be >= 1")
    if cfg.block_bits < 1:
        raise ConfigError("block_bits must be >= 1")
    if cfg.max_slots < 1:
        raise ConfigError("max_slots must be >= 1")
    if cfg.delay_packets < 0:
        raise ConfigError("delay_packets must be >= 0")
    if not 0.5 <= cfg.noma_weak_share < 1.0:
        raise ConfigError("noma_weak_share must be in [0.5, 1)")
    if cfg.workers is not None and cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    if SchemeId.MIMO_NOMA in cfg.schemes and cfg.users % 2:
        raise ConfigError("the pairing baseline needs an even number of users")


def parse_snr_spec(spec: str) -> tuple[float, ...]:
    """Grid syntax: 'a:b:step' (inclusive), a comma list, or one value."""
    spec = spec.strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError("range syntax is start:stop:step")
        start, stop, step = (float(x) for x in parts)
        if step <= 0:
            raise ConfigError("step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        if count < 1:
            raise ConfigError("empty SNR range")
        return tuple(start + i * step for i in range(count))
    if "," in spec:
        return tuple(float(x) for x in spec.split(","))
    return (float(spec),)


def _parse_schemes(raw: str) -> tuple[SchemeId, ...]:
    out = []
    for token in raw.split(","):
        token = token.strip().lower()
        if not token:
            continue
        try:
            out.append(SchemeId(token))
        except ValueError as exc:
            valid = ", ".join(s.value for s in SchemeId)
            raise ConfigError(f"unknown scheme '{token}' (valid: {valid})") from exc
    return tuple(out)


def _parse_path_or_none(raw: str):
    raw = raw.strip()
    return None if raw.lower() in ("", "none") else raw


_CASTERS = {
    "scheme": ("schemes", _parse_schemes),
    "schemes": ("schemes", _parse_schemes),
    "users": ("users", int),
    "tx_antennas": ("tx_antennas", int),
    "subcarriers": ("subcarriers", int),
    "taps": ("taps", int),
    "tap_decay": ("tap_decay", float),
    "cp_len": ("cp_len", int),
    "snr_db": ("snr_db", parse_snr_spec),
    "total_power": ("total_power", float),
    "noise_mode": ("noise_mode", lambda s: s.strip().lower()),
    "noise_density_dbm_hz": ("noise_density_dbm_hz", float),
    "subcarrier_bandwidth_hz": ("subcarrier_bandwidth_hz", float),
    "precoder": ("precoder", lambda s: PrivatePrecoder(s.strip().lower())),
    "common_precoder": (
        "common_precoder",
        lambda s: CommonPrecoderStrategy(s.strip().lower()),
    ),
    "common_power_fraction": ("common_power_fraction", float),
    "csit_error": ("csit_error", float),
    "replicas": ("replicas", lambda s: None if s.strip().lower() == "auto" else int(s)),
    "chunk": ("chunk", int),
    "trials": ("trials", int),
    "block_bits": ("block_bits", int),
    "max_slots": ("max_slots", int),
    "delay_packets": ("delay_packets", int),
    "noma_weak_share": ("noma_weak_share", float),
    "seed": ("seed", int),
    "workers": ("workers", int),
    "out": ("out", _parse_path_or_none),
    "debug_trials": ("debug_trials", _parse_path_or_none),
}


def parse_config_text(text: str) -> dict:
    """Flat key=value lines; '#' starts a comment; blank lines ignored."""
    fields = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key not in _CASTERS:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        field, caster = _CASTERS[key]
        try:
            fields[field] = caster(value)
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"line {lineno}: bad value for '{key}': {value}") from exc
    return fields


def load_config(path: str, **overrides) -> SimConfig:
    """Read a config file and apply keyword overrides (None values skipped)."""
    with open(path, "r", encoding="utf-8") as fh:
        fields = parse_config_text(fh.read())
    for key, value in overrides.items():
        if value is not None:
            fields[key] = value
    cfg = SimConfig(**fields)
    validate(cfg)
    return cfg


def with_overrides(cfg: SimConfig, **overrides) -> SimConfig:
    clean = {k: v for k, v in overrides.items() if v is not None}
    out = dataclasses.replace(cfg, **clean)
    validate(out)
    return out
