"""Coupling coordination, grey relational and capital-rotation analysis of index GMV panels."""

from .coupling import (
    CoordinationPoint,
    StageLabel,
    Weights,
    classify_stage,
    composite_level,
    coordination_degree,
    coordination_series,
    coupling_degree,
)
from .errors import RotorkitError
from .grey import GraConfig, GraResult, gra_coefficients, gra_grades
from .level_index import LevelIndexVector, NormalizationConfig, compute_level_indices, minmax_normalize
from .panel import (
    IndexSeries,
    Panel,
    PanelSchema,
    compute_aggregate,
    dedupe_stale_dates,
    load_fixture,
    parse_panel,
    validate_panel,
)
from .rotation import (
    RegimeConfig,
    RegimeWindow,
    RotationEpisode,
    change_comovement,
    detect_rotation_episodes,
    detect_stock_fund_regime,
    market_shares,
    window_return,
)

__version__ = "0.1.0"
