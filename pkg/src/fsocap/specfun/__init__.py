"""Special functions used by the capacity formulas."""

from fsocap.specfun.bessel import (
    BesselUnderflowWarning,
    bessel_k,
    bessel_k_scaled,
    log_bessel_k,
)
from fsocap.specfun.gamma import EULER_GAMMA, digamma, ln_gamma, ln_gamma_complex, ln_gamma_shift
from fsocap.specfun.mellin import (
    ContourConfig,
    MellinBarnesResult,
    MellinBarnesSpec,
    fox_h,
    fox_h_spec,
    meijer_g,
    meijer_g_spec,
    mellin_barnes,
    mellin_barnes_eval,
)

__all__ = [
    "BesselUnderflowWarning",
    "ContourConfig",
    "EULER_GAMMA",
    "MellinBarnesResult",
    "MellinBarnesSpec",
    "bessel_k",
    "bessel_k_scaled",
    "digamma",
    "fox_h",
    "fox_h_spec",
    "ln_gamma",
    "ln_gamma_complex",
    "ln_gamma_shift",
    "log_bessel_k",
    "meijer_g",
    "meijer_g_spec",
    "mellin_barnes",
    "mellin_barnes_eval",
]
