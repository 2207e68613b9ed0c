from gmfilter.filters.base import BayesFilter, make_filter, systematic_resample
from gmfilter.filters.gmf import GmfConfig, GmfFilter
from gmfilter.filters.pf import ParticleFilter, ParticleSet, PfConfig
from gmfilter.filters.pgm import PgmConfig, PgmFilter, dbscan, fit_cluster_gaussians
from gmfilter.filters.unscented import UtParams, ut_sigma_points

__all__ = [
    "BayesFilter",
    "make_filter",
    "systematic_resample",
    "GmfConfig",
    "GmfFilter",
    "ParticleFilter",
    "ParticleSet",
    "PfConfig",
    "PgmConfig",
    "PgmFilter",
    "dbscan",
    "fit_cluster_gaussians",
    "UtParams",
    "ut_sigma_points",
]
