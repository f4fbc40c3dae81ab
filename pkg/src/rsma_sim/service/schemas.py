"""Request and response models for the HTTP API."""

from __future__ import annotations

import math

from pydantic import BaseModel, ConfigDict

from ..config import SimConfig, parse_config_text, parse_snr_spec, validate
from ..harness import CSV_COLUMNS, MetricsReport


class SimulateRequest(BaseModel):
    """Sweep parameters. `config_text` carries a key=value config body;
    explicit fields override it. Everything left unset uses the defaults."""

    model_config = ConfigDict(extra="forbid")

    config_text: str | None = None
    schemes: list[str] | None = None
    users: int | None = None
    tx_antennas: int | None = None
    subcarriers: int | None = None
    taps: int | None = None
    tap_decay: float | None = None
    cp_len: int | None = None
    snr_db: str | list[float] | None = None
    total_power: float | None = None
    noise_mode: str | None = None
    noise_density_dbm_hz: float | None = None
    subcarrier_bandwidth_hz: float | None = None
    precoder: str | None = None
    common_precoder: str | None = None
    common_power_fraction: float | None = None
    csit_error: float | None = None
    replicas: int | None = None
    chunk: int | None = None
    trials: int | None = None
    block_bits: int | None = None
    max_slots: int | None = None
    delay_packets: int | None = None
    noma_weak_share: float | None = None
    seed: int | None = None
    workers: int | None = None

    def to_config(self) -> SimConfig:
        from ..baselines import SchemeId
        from ..precoding import CommonPrecoderStrategy, PrivatePrecoder

        fields = parse_config_text(self.config_text) if self.config_text else {}
        data = self.model_dump(exclude_none=True)
        data.pop("config_text", None)
        if "schemes" in data:
            data["schemes"] = tuple(SchemeId(s.strip().lower()) for s in data["schemes"])
        if "snr_db" in data:
            raw = data["snr_db"]
            data["snr_db"] = (
                parse_snr_spec(raw) if isinstance(raw, str) else tuple(float(x) for x in raw)
            )
        if "precoder" in data:
            data["precoder"] = PrivatePrecoder(data["precoder"].strip().lower())
        if "common_precoder" in data:
            data["common_precoder"] = CommonPrecoderStrategy(
                data["common_precoder"].strip().lower()
            )
        fields.update(data)
        cfg = SimConfig(**fields)
        validate(cfg)
        return cfg


def _clean(value: float) -> float | None:
    return None if value is None or math.isnan(value) else float(value)


class RowOut(BaseModel):
    scheme: str
    snr_db: float
    ber: float | None
    ber_ci95: float | None
    sum_rate_bps_hz: float | None
    delay_slots: float | None
    trials: int
    seed: int
    wall_time_s: float


class SimulateResponse(BaseModel):
    columns: list[str]
    rows: list[RowOut]
    csv: str


class JobCreated(BaseModel):
    id: str
    state: str


class JobOut(BaseModel):
    id: str
    state: str
    error: str | None = None
    created_at: float
    finished_at: float | None = None
    rows: list[RowOut] | None = None


class FigureJobOut(BaseModel):
    figure: str
    jobs: list[JobCreated]
    tags: list[str]


class HealthOut(BaseModel):
    status: str
    version: str


def rows_out(report: MetricsReport) -> list[RowOut]:
    return [
        RowOut(
            scheme=row.scheme,
            snr_db=row.snr_db,
            ber=_clean(row.ber),
            ber_ci95=_clean(row.ber_ci95),
            sum_rate_bps_hz=_clean(row.sum_rate_bps_hz),
            delay_slots=_clean(row.delay_slots),
            trials=row.trials,
            seed=row.seed,
            wall_time_s=row.wall_time_s,
        )
        for row in report.rows
    ]


def csv_columns() -> list[str]:
    return list(CSV_COLUMNS)
