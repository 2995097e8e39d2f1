"""Ergodic capacity E[log2(1 + gamma)] by quadrature, contour closed forms,
high-SNR asymptotes and the AWGN benchmark."""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from fsocap.approx_iid import snr_pdf_iid
from fsocap.approx_inid import snr_pdf_inid
from fsocap.errors import ComputationError, DomainError, QuadratureError
from fsocap.specfun import ContourConfig, digamma, fox_h_spec, ln_gamma, mellin_barnes, meijer_g_spec

LN2 = math.log(2.0)
METHODS = ("quadrature", "closed_form", "high_snr", "monte_carlo", "awgn")
MASS_TOL = 1e-3
AUDIT_FACTOR = 10.0


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def linear_to_db(x):
    return 10.0 * math.log10(x)


def gamma0(M, N, eta, rho):
    """gamma0 = eta^2 rho / (M N)^2."""
    if M < 1 or N < 1 or int(M) != M or int(N) != N:
        raise DomainError("M and N must be positive integers")
    if not (eta > 0 and rho > 0):
        raise DomainError("eta and rho must be positive")
    return eta * eta * rho / float(M * N) ** 2


@dataclass(frozen=True)
class SnrContext:
    """Aperture counts, conversion efficiency and transmit SNR (linear)."""

    M: int
    N: int
    eta: float
    rho: float

    def __post_init__(self):
        gamma0(self.M, self.N, self.eta, self.rho)

    @property
    def L(self):
        return self.M * self.N

    @property
    def gamma0(self):
        return gamma0(self.M, self.N, self.eta, self.rho)

    @property
    def rho_db(self):
        return linear_to_db(self.rho)

    @classmethod
    def from_gamma_bar_db(cls, M, N, eta, gamma_bar_db, mean_sum=None):
        """Context whose average SNR gamma0 * Ibar^2 equals the given value.

        Ibar defaults to M*N (unit mean per branch).
        """
        ibar = float(M * N) if mean_sum is None else float(mean_sum)
        g0 = db_to_linear(gamma_bar_db) / ibar**2
        rho = g0 * float(M * N) ** 2 / (eta * eta)
        return cls(M, N, eta, rho)


@dataclass(frozen=True)
class CapacityPoint:
    """One capacity value in bits/s/Hz.

    ``rho_db`` is the label on the sweep's SNR axis (NaN when the caller
    did not supply one).  The high-SNR asymptote is allowed to go negative
    at low SNR; every other method must return a nonnegative value.
    """

    rho_db: float
    capacity_bits: float
    method: str
    err_estimate: float
    status: str = "ok"

    def __post_init__(self):
        object.__setattr__(self, "rho_db", float(self.rho_db))
        object.__setattr__(self, "capacity_bits", float(self.capacity_bits))
        object.__setattr__(self, "err_estimate", float(self.err_estimate))
        if self.method not in METHODS:
            raise DomainError(f"unknown method {self.method!r}")
        if not (self.err_estimate >= 0 and math.isfinite(self.err_estimate)):
            raise DomainError("err_estimate must be finite and nonnegative")
        if not math.isfinite(self.capacity_bits):
            raise ComputationError(f"{self.method} capacity is not finite")
        if self.method != "high_snr" and self.capacity_bits < -max(self.err_estimate, 1e-12):
            raise ComputationError(
                f"{self.method} capacity {self.capacity_bits:.3g} is negative beyond its error estimate"
            )


def awgn_capacity(snr):
    if snr < 0:
        raise DomainError("snr must be nonnegative")
    return math.log1p(snr) / LN2


def _tail_end(func, t0, tiny):
    # first t past t0 (in steps of 2) where func has decayed below tiny
    t = t0
    for _ in range(400):
        t += 2.0
        if abs(func(t)) < tiny:
            return t
    raise QuadratureError(f"integrand has not decayed by t = {t:g}")


def _split_integral(func, scale, tolerance, limit):
    """∫_0^∞ func(γ) dγ: plain on [0, 1], γ = e^t on [1, ∞)."""
    head_points = [scale] if 0 < scale < 1 else None
    with warnings.catch_warnings():
        # QUADPACK's roundoff notices are reflected in the returned error estimate
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        head, head_err = integrate.quad(
            func, 0.0, 1.0, points=head_points, epsabs=tolerance / 4, epsrel=0.0, limit=limit
        )

    def tail_fn(t):
        g = math.exp(t)
        return func(g) * g

    t_peak = max(math.log(scale), 0.0) if scale > 0 else 0.0
    t_end = _tail_end(tail_fn, t_peak, 1e-300)
    pts = [t_peak] if 0 < t_peak < t_end else None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        tail, tail_err = integrate.quad(
            tail_fn, 0.0, t_end, points=pts, epsabs=tolerance / 4, epsrel=0.0, limit=limit
        )
    return head + tail, head_err + tail_err


def capacity_quadrature(pdf, tolerance=1e-9, scale=1.0, rho_db=math.nan, limit=400):
    """Ergodic capacity ∫ log2(1+γ) f(γ) dγ by adaptive Gauss–Kronrod.

    ``pdf`` is a scalar SNR density; ``scale`` is a typical SNR value
    (e.g. the average SNR) used as a break point.  The density's total mass
    is audited first.
    """
    if not tolerance > 0:
        raise DomainError("tolerance must be positive")
    mass, mass_err = _split_integral(pdf, scale, max(tolerance, 1e-8), limit)
    if abs(mass - 1.0) > MASS_TOL:
        raise QuadratureError(f"SNR density integrates to {mass:.6g}, not 1", partial=mass)
    value, err = _split_integral(lambda g: math.log1p(g) * pdf(g), scale, tolerance * LN2, limit)
    value /= LN2
    err /= LN2
    if not math.isfinite(value) or err > tolerance:
        raise QuadratureError(
            f"capacity quadrature error {err:.3g} exceeds tolerance {tolerance:.3g}", partial=value
        )
    return CapacityPoint(rho_db, max(value, 0.0), "quadrature", max(err, tolerance))


def iid_snr_scale(fit, g0):
    """Average SNR gamma0 E[R^2] of the alpha-mu approximation."""
    return g0 * fit.moment(2)


def inid_snr_scale(wt, g0):
    return g0 * math.fsum(wt.context.omega) ** 2


def capacity_iid_quadrature(fit, g0, tolerance=1e-9, rho_db=math.nan):
    return capacity_quadrature(
        lambda g: snr_pdf_iid(g, fit, g0), tolerance, iid_snr_scale(fit, g0), rho_db
    )


def mixture_noise_floor(wt, g0):
    """Absolute capacity resolution left after the signed weights cancel in double precision."""
    scale = inid_snr_scale(wt, g0)
    return 32.0 * np.finfo(float).eps * wt.condition * max(1.0, math.log2(1.0 + scale))


def capacity_inid_quadrature(wt, g0, tolerance=1e-9, rho_db=math.nan):
    """Quadrature over the mixture SNR density; the tolerance is raised to the cancellation floor."""
    tol = max(tolerance, mixture_noise_floor(wt, g0))
    return capacity_quadrature(lambda g: snr_pdf_inid(g, wt, g0), tol, inid_snr_scale(wt, g0), rho_db)


def iid_capacity_spec(fit):
    """Fox-H kernel of the alpha-mu capacity (argument r_hat^2 gamma0 / mu^(2/alpha))."""
    return fox_h_spec(
        1,
        3,
        [(1.0, 1.0), (1.0, 1.0), (1.0 - fit.mu, 2.0 / fit.alpha)],
        [(1.0, 1.0), (0.0, 1.0)],
    )


def capacity_iid_closed(fit, g0, cfg=None, rho_db=math.nan):
    """Closed-form alpha-mu capacity: a single Fox H-function by contour quadrature."""
    if not g0 > 0:
        raise DomainError("gamma0 must be positive")
    cfg = cfg or ContourConfig()
    x = fit.r_hat**2 * g0 / fit.mu ** (2.0 / fit.alpha)
    res = mellin_barnes(iid_capacity_spec(fit), x, cfg, log_prefactor=-ln_gamma(fit.mu) - math.log(LN2))
    return CapacityPoint(rho_db, max(res.value, 0.0), "closed_form", max(res.error_estimate, cfg.tolerance))


def inid_term_spec(A, j):
    u = 0.25 * (A + j)
    v = A - j
    return meijer_g_spec(
        6,
        1,
        [-u, 1.0 - u],
        [0.25 * v, 0.25 * (v + 2.0), -0.25 * v, -0.25 * (v - 2.0), -u, -u],
    )


def capacity_inid_closed(wt, g0, cfg=None, rho_db=math.nan):
    """Closed-form mixture capacity: one Meijer G^{6,1}_{2,6} per weight term.

    Each term is evaluated in log scale with its weight folded into the
    prefactor, then the signed terms are summed with fsum.
    """
    if not g0 > 0:
        raise DomainError("gamma0 must be positive")
    cfg = cfg or ContourConfig()
    ch = wt.context
    A = ch.L * ch.k
    lg_a = ln_gamma(A)
    terms, errs = [], []
    for (i, j), w in wt.w.items():
        if w == 0.0:
            continue
        u = 0.25 * (A + j)
        z = A * ch.m[i] / (ch.omega[i] * math.sqrt(g0))
        log_pref = (
            math.log(abs(w))
            + 2.0 * u * math.log(z)
            - lg_a
            - math.lgamma(j)
            - math.log(LN2)
            - math.log(4.0 * math.pi)
        )
        if log_pref > 700.0:
            raise ComputationError(f"capacity term ({i + 1}, {j}) overflows (log prefactor {log_pref:.1f})")
        res = mellin_barnes(inid_term_spec(A, j), z * z / 16.0, cfg, log_prefactor=log_pref)
        terms.append(math.copysign(res.value, w))
        errs.append(res.error_estimate)
    value = math.fsum(terms)
    err = math.fsum(errs) + 4.0 * np.finfo(float).eps * math.fsum(abs(t) for t in terms)
    status = "ok" if wt.status in ("ok", "unaudited") else wt.status
    return CapacityPoint(rho_db, max(value, 0.0), "closed_form", max(err, cfg.tolerance), status)


def capacity_iid_highsnr(fit, g0, rho_db=math.nan):
    """(2/(alpha ln2)) [psi(mu) - ln mu + alpha ln r_hat + (alpha/2) ln gamma0]."""
    if not g0 > 0:
        raise DomainError("gamma0 must be positive")
    a = fit.alpha
    val = (2.0 / (a * LN2)) * (digamma(fit.mu) - math.log(fit.mu) + a * math.log(fit.r_hat)) + math.log(g0) / LN2
    return CapacityPoint(rho_db, val, "high_snr", 0.0)


def capacity_inid_highsnr(wt, g0, rho_db=math.nan):
    """(2/ln2) sum w(i,j) [psi(Lk) + psi(j) - ln(Lk m_i) + ln(Omega_i sqrt(gamma0))].

    The weights sum to one, so the ln sqrt(gamma0) part is taken outside
    the weighted sum; the slope in gamma0 is then exact regardless of the
    rounding left in the weights.
    """
    if not g0 > 0:
        raise DomainError("gamma0 must be positive")
    ch = wt.context
    A = ch.L * ch.k
    psi_a = digamma(A)
    inner = math.fsum(
        w * (psi_a + digamma(j) - math.log(A * ch.m[i]) + math.log(ch.omega[i]))
        for (i, j), w in wt.w.items()
    )
    val = 2.0 * inner / LN2 + math.log(g0) / LN2
    return CapacityPoint(rho_db, val, "high_snr", 0.0, wt.status if wt.status != "unaudited" else "ok")


def audit_closed_form(closed, reference, tolerance):
    """True when a closed-form value agrees with a quadrature reference within 10x tolerance."""
    return abs(closed.capacity_bits - reference.capacity_bits) <= AUDIT_FACTOR * max(
        tolerance, closed.err_estimate, reference.err_estimate
    )
