"""Ergodic capacity of MIMO free-space optical links over gamma-gamma turbulence."""

__version__ = "0.1.0"

from fsocap.approx_iid import AlphaMuFit, fit_alpha_mu, fit_iid_sum, snr_pdf_iid
from fsocap.approx_inid import (
    InidChannelSet,
    WeightTable,
    adapt_shapes,
    beta_omegas,
    compute_weights,
    quantile_omegas,
    snr_pdf_inid,
)
from fsocap.capacity import (
    CapacityPoint,
    SnrContext,
    awgn_capacity,
    capacity_iid_closed,
    capacity_iid_highsnr,
    capacity_iid_quadrature,
    capacity_inid_closed,
    capacity_inid_highsnr,
    capacity_inid_quadrature,
)
from fsocap.channel import AtmosphericLink, GammaGammaParams, gg_pdf, gg_shape_params
from fsocap.errors import ComputationError, ConfigurationError, DomainError, FsoCapError
from fsocap.montecarlo import McConfig, mc_capacity, mc_capacity_sweep

__all__ = [
    "AlphaMuFit",
    "AtmosphericLink",
    "CapacityPoint",
    "ComputationError",
    "ConfigurationError",
    "DomainError",
    "FsoCapError",
    "GammaGammaParams",
    "InidChannelSet",
    "McConfig",
    "SnrContext",
    "WeightTable",
    "adapt_shapes",
    "awgn_capacity",
    "beta_omegas",
    "capacity_iid_closed",
    "capacity_iid_highsnr",
    "capacity_iid_quadrature",
    "capacity_inid_closed",
    "capacity_inid_highsnr",
    "capacity_inid_quadrature",
    "compute_weights",
    "fit_alpha_mu",
    "fit_iid_sum",
    "gg_pdf",
    "gg_shape_params",
    "mc_capacity",
    "mc_capacity_sweep",
    "quantile_omegas",
    "snr_pdf_iid",
    "snr_pdf_inid",
]
