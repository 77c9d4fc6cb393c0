"""Full counting statistics of identical particles scattered as wave packets."""

from .config import ExperimentConfig, load_config, dump_config
from .counting import (
    CountingDistribution,
    dft_coefficient_oracle,
    dp_weights,
    full_distribution,
    inequality_audit,
    joint_probability,
    mean_numbers,
    mean_numbers_direct,
    outcome_count,
    single_channel_marginal,
)
from .linalg import StatisticsKind, determinant, is_psd, permanent, s_pm
from .overlap import OverlapSet, QuadratureSettings, compute_overlaps, overlap_set
from .physics import (
    EPS0,
    BreitWigner,
    ChannelSpec,
    ConstantUnitary,
    Diagonal,
    WavePacketMode,
    resonance_energy,
    s_matrix,
)

__version__ = "0.1.0"
