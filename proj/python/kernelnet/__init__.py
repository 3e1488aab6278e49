"""Clustering and separation analytics for distance-kernel random networks.

Angles (phi, b) are in radians; radii are in units of the node spacing.
Analytic functions return (value, error_estimate); Monte Carlo functions
return (mean, std_error, trials).
"""

from ._kernelnet import (
    ConfigError,
    DimensionError,
    Kernel,
    NumericalError,
    clustering_closed,
    clustering_quad,
    clustering_series,
    coeffs_numeric,
    coeffs_uniform,
    discrete_chain_count,
    discrete_clustering,
    discrete_mean_degree,
    mc_clustering,
    mc_mean_degree,
    mc_separation_histogram,
    mean_degree,
    p_chain_quad,
    p_k_pi,
    p_sep_leading,
    run_cli,
    sample_graph,
)

__version__ = "1.0.0"

__all__ = [name for name in dir() if not name.startswith("_")]
