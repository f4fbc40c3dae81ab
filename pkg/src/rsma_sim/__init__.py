"""Link-level simulator for downlink multicarrier rate-splitting with a
channel-aware splitter that replicates deep-faded private symbols into the
common stream, plus the baseline schemes it is measured against."""

from .baselines import SchemeId
from .channel import ChannelRealization, CsitView, TapProfile, degrade_csit, generate_channel
from .config import ConfigError, SimConfig, load_config, parse_snr_spec, validate
from .harness import (
    MetricsReport,
    ReportRow,
    derive_trial_seed,
    emit_csv,
    run_figure,
    run_sweep,
    write_csv,
)
from .phy import LinkParams, rsma_link, simulate_rsma_trial
from .precoding import CommonPrecoderStrategy, PrivatePrecoder
from .splitter import Arrangement, SplitMap, build_split_map, select_indices

__version__ = "0.1.0"

__all__ = [
    "Arrangement",
    "ChannelRealization",
    "CommonPrecoderStrategy",
    "ConfigError",
    "CsitView",
    "LinkParams",
    "MetricsReport",
    "PrivatePrecoder",
    "ReportRow",
    "SchemeId",
    "SimConfig",
    "SplitMap",
    "TapProfile",
    "build_split_map",
    "degrade_csit",
    "derive_trial_seed",
    "emit_csv",
    "generate_channel",
    "load_config",
    "parse_snr_spec",
    "rsma_link",
    "run_figure",
    "run_sweep",
    "select_indices",
    "simulate_rsma_trial",
    "validate",
    "write_csv",
    "__version__",
]
