"""Gamma-gamma turbulence channel: shape parameters, density, moments."""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from fsocap.errors import ComputationError, DomainError
from fsocap.specfun import ln_gamma, ln_gamma_shift, log_bessel_k

CN2_RANGE = (1e-17, 1e-13)


class TurbulenceRangeWarning(UserWarning):
    """Structure constant outside the usual weak-to-strong span."""


@dataclass(frozen=True)
class AtmosphericLink:
    """Physical description of one optical path.

    cn2         refractive-index structure constant, m^(-2/3)
    wavelength  m
    distance    m (the link length L)
    aperture    receiver aperture diameter D, m
    """

    cn2: float
    wavelength: float
    distance: float
    aperture: float

    def __post_init__(self):
        for name in ("cn2", "wavelength", "distance", "aperture"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be finite and strictly positive, got {value!r}")
        if not CN2_RANGE[0] <= self.cn2 <= CN2_RANGE[1]:
            warnings.warn(
                f"cn2={self.cn2:g} is outside [{CN2_RANGE[0]:g}, {CN2_RANGE[1]:g}] m^-2/3",
                TurbulenceRangeWarning,
                stacklevel=3,
            )

    @property
    def wavenumber(self):
        return 2.0 * math.pi / self.wavelength

    @property
    def aperture_parameter(self):
        """d = sqrt(k D^2 / (4 L))."""
        return math.sqrt(self.wavenumber * self.aperture**2 / (4.0 * self.distance))


@dataclass(frozen=True)
class GammaGammaParams:
    a: float
    b: float
    omega: float = 1.0

    def __post_init__(self):
        for name in ("a", "b", "omega"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be finite and strictly positive, got {value!r}")

    @classmethod
    def from_link(cls, link, omega=1.0):
        a, b = gg_shape_params(link)
        return cls(a, b, omega)


def rytov_variance(link):
    """0.492 Cn^2 k^(7/6) L^(11/6)."""
    return 0.492 * link.cn2 * link.wavenumber ** (7.0 / 6.0) * link.distance ** (11.0 / 6.0)


def _inverse_expm1(exponent, name):
    # 1 / (exp(e) - 1), accurate as e -> 0
    if exponent > 700.0:
        raise ComputationError(f"exponent of the {name} shape term overflows ({exponent:g})")
    if not exponent > 0:
        raise ComputationError(f"{name} shape exponent is not positive ({exponent:g})")
    return 1.0 / math.expm1(exponent)


def gg_shape_params(link):
    """Spherical-wave (a, b) from the Rytov variance and aperture parameter."""
    s2 = rytov_variance(link)
    d2 = link.aperture_parameter**2
    s125 = s2 ** (6.0 / 5.0)  # sigma_2^(12/5) with sigma_2^2 = s2
    exp_a = 0.49 * s2 / (1.0 + 0.18 * d2 + 0.56 * s125) ** (7.0 / 6.0)
    exp_b = 0.51 * s2 * (1.0 + 0.69 * s125) ** (-5.0 / 6.0) / (1.0 + 0.9 * d2 + 0.62 * d2 * s125) ** (5.0 / 6.0)
    return _inverse_expm1(exp_a, "small-scale"), _inverse_expm1(exp_b, "large-scale")


def scintillation_index(a, b):
    return 1.0 / a + 1.0 / b + 1.0 / (a * b)


def gg_log_pdf(x, p):
    """log of the gamma-gamma density; -inf for x <= 0."""
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, -np.inf)
    pos = x > 0
    if np.any(pos):
        xp = x[pos]
        ab = p.a * p.b
        half = 0.5 * (p.a + p.b)
        out[pos] = (
            math.log(2.0)
            + half * math.log(ab)
            - ln_gamma(p.a)
            - ln_gamma(p.b)
            - math.log(p.omega)
            + (half - 1.0) * np.log(xp / p.omega)
            + log_bessel_k(p.a - p.b, 2.0 * np.sqrt(ab * xp / p.omega))
        )
    return out if out.ndim else float(out)


def gg_pdf(x, p):
    """Gamma-gamma density with shapes (a, b) and mean omega; 0 off the support."""
    out = np.exp(gg_log_pdf(x, p))
    return out if np.ndim(out) else float(out)


def gg_moment(q, p):
    """E[I^q] = Γ(a+q)Γ(b+q) / (Γ(a)Γ(b)) (ab/Ω)^(-q)."""
    if q <= -min(p.a, p.b):
        raise DomainError(f"moment of order {q} does not exist for a={p.a}, b={p.b}")
    # the q ln(ab) part of the Gamma ratios cancels against the scale factor
    log_m = ln_gamma_shift(p.a, q) + ln_gamma_shift(p.b, q) - 2.0 * q + q * math.log(p.omega)
    return math.exp(log_m)
