"""Optimality of treating interference as noise: GDoF regions, gap certificates and
deterministic-model checks."""

from .errors import (
    ConsistencyError,
    InfeasibleError,
    InvalidInstanceError,
    ResourceLimitError,
    ShapeError,
    TinOptError,
)
from .model import (
    GaussianSpec,
    Matching,
    StrengthMatrix,
    TinConditionReport,
    check_tin_condition,
    find_tin_matching,
    normalize_strengths,
    reduce_to_ic,
)
from .region import (
    DirectedCycle,
    Region,
    RegionConstraint,
    SumGdof,
    build_region,
    contains,
    enumerate_cycles,
    lp_max_sum,
    oracle_sum_gdof,
    sum_gdof,
    x_sum_gdof,
)
from .tin import PowerExponents, achievable_sum, gdof_slope, power_control_feasible, tin_rates
from .converse import GapCertificate, gap_certificate, outer_sum
from .detmodel import (
    DetChannelSpec,
    FixedPointSample,
    det_output,
    lemma2_bijectivity,
    split_output,
    tail_bound_check,
)

__version__ = "0.1.0"
