from gmfilter.scenarios.base import ScenarioModel
from gmfilter.scenarios.grid import OccupancyGrid, grid_los, load_grid
from gmfilter.scenarios.radio import (
    RadioSourceModel,
    SnrContext,
    adaptive_measurement_noise,
    bimodal_likelihood,
    los_mode_probabilities,
    snr_predict,
)
from gmfilter.scenarios.tricyclist import TricyclistConfig, TricyclistModel

__all__ = [
    "ScenarioModel",
    "OccupancyGrid",
    "grid_los",
    "load_grid",
    "RadioSourceModel",
    "SnrContext",
    "adaptive_measurement_noise",
    "bimodal_likelihood",
    "los_mode_probabilities",
    "snr_predict",
    "TricyclistConfig",
    "TricyclistModel",
]
