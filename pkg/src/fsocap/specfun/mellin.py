"""Mellin–Barnes contour integrals (Fox H / Meijer G) by quadrature.

The integrand is a ratio of gamma products times ``x**(-s)``, integrated
along the vertical line ``Re s = omega`` that separates the left pole
family (poles of Gamma(c + C s)) from the right one (poles of
Gamma(c - C s)).  Quadrature on the line, rather than residue summation,
handles repeated parameters (double poles) without special cases.

Convention (Mathai–Saxena):

    H^{m,n}_{p,q}[x | (a_j, A_j); (b_j, B_j)]
        = 1/(2 pi i) ∫ prod_{j<=m} Γ(b_j + B_j s) prod_{j<=n} Γ(1 - a_j - A_j s)
                     / (prod_{j>m} Γ(1 - b_j - B_j s) prod_{j>n} Γ(a_j + A_j s))
                     x^{-s} ds
"""

import math
from dataclasses import dataclass, field

import numpy as np

from fsocap.errors import ConfigurationError, ConvergenceError, DomainError
from fsocap.specfun.gamma import ln_gamma_complex

# 16-point Gauss–Legendre rule on [-1, 1]
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
_PANEL = len(_GL_X)


def _pairs(terms):
    out = []
    for t in terms:
        c, scale = (float(v) for v in t)
        if not (math.isfinite(c) and math.isfinite(scale)):
            raise ConfigurationError(f"non-finite gamma parameter {t!r}")
        out.append((c, scale))
    return tuple(out)


@dataclass(frozen=True)
class MellinBarnesSpec:
    """Gamma-ratio kernel of a Mellin–Barnes integral.

    numerator_terms    (c, C), C > 0: Γ(c + C s) upstairs, poles on the left
    sign_terms         (c, C), C > 0: Γ(c - C s) upstairs, poles on the right
    denominator_terms  (c, C), C != 0: Γ(c + C s) downstairs
    argument_exponent  -1 for x^(-s) (Fox/Mathai convention), +1 for x^(+s)
    """

    numerator_terms: tuple = ()
    denominator_terms: tuple = ()
    sign_terms: tuple = ()
    argument_exponent: int = -1

    def __post_init__(self):
        num = _pairs(self.numerator_terms)
        sgn = _pairs(self.sign_terms)
        den = _pairs(self.denominator_terms)
        for c, scale in num + sgn:
            if not scale > 0:
                raise ConfigurationError(f"pole-family scale must be positive, got {scale}")
        for c, scale in den:
            if scale == 0:
                raise ConfigurationError("denominator scale must be nonzero")
        if self.argument_exponent not in (-1, 1):
            raise ConfigurationError("argument_exponent must be +1 or -1")
        object.__setattr__(self, "numerator_terms", num)
        object.__setattr__(self, "sign_terms", sgn)
        object.__setattr__(self, "denominator_terms", den)

    def canonical(self):
        """Equivalent spec using x^(-s); substitutes s -> -s when needed."""
        if self.argument_exponent == -1:
            return self
        return MellinBarnesSpec(
            numerator_terms=self.sign_terms,
            sign_terms=self.numerator_terms,
            denominator_terms=tuple((c, -scale) for c, scale in self.denominator_terms),
            argument_exponent=-1,
        )

    def pole_bounds(self):
        """(rightmost left-family pole, leftmost right-family pole); ±inf if a family is empty."""
        spec = self.canonical()
        lo = max((-c / scale for c, scale in spec.numerator_terms), default=-math.inf)
        hi = min((c / scale for c, scale in spec.sign_terms), default=math.inf)
        return lo, hi

    def decay_rate(self):
        """kappa such that |kernel(omega + i t)| ~ |t|^P exp(-kappa |t|)."""
        spec = self.canonical()
        up = sum(s for _, s in spec.numerator_terms) + sum(s for _, s in spec.sign_terms)
        down = sum(abs(s) for _, s in spec.denominator_terms)
        return 0.5 * math.pi * (up - down)

    def log_kernel(self, s):
        """log of the gamma ratio at complex points ``s`` (x^(-s) not included)."""
        spec = self.canonical()
        s = np.asarray(s, dtype=complex)
        out = np.zeros(s.shape, dtype=complex)
        for c, scale in spec.numerator_terms:
            out += ln_gamma_complex(c + scale * s)
        for c, scale in spec.sign_terms:
            out += ln_gamma_complex(c - scale * s)
        for c, scale in spec.denominator_terms:
            z = c + scale * s
            at_pole = (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))
            if at_pole.any():
                # 1/Γ vanishes at its poles
                safe = np.where(at_pole, 0.5, z)
                val = ln_gamma_complex(safe)
                out -= np.where(at_pole, -np.inf, val)
            else:
                out -= ln_gamma_complex(z)
        return out


def fox_h_spec(m, n, a, b):
    """Spec for H^{m,n}_{p,q} with ``a`` = [(a_j, A_j)]*p and ``b`` = [(b_j, B_j)]*q."""
    a = _pairs(a)
    b = _pairs(b)
    if not (0 <= m <= len(b) and 0 <= n <= len(a)):
        raise ConfigurationError("need 0 <= m <= q and 0 <= n <= p")
    return MellinBarnesSpec(
        numerator_terms=b[:m],
        sign_terms=tuple((1.0 - aj, Aj) for aj, Aj in a[:n]),
        denominator_terms=tuple((1.0 - bj, -Bj) for bj, Bj in b[m:]) + a[n:],
    )


def meijer_g_spec(m, n, a, b):
    """Spec for G^{m,n}_{p,q}[x | a; b] (all scales 1)."""
    return fox_h_spec(m, n, [(v, 1.0) for v in a], [(v, 1.0) for v in b])


@dataclass(frozen=True)
class ContourConfig:
    """Contour placement and quadrature controls.

    ``omega=None`` picks the midpoint of the gap between the two pole
    families.  ``half_height`` and ``nodes`` are starting values; the
    evaluator enlarges them when the tail or the oscillation demands it.
    """

    omega: float | None = None
    half_height: float = 8.0
    nodes: int = 256
    tolerance: float = 1e-11
    max_refinements: int = 6

    def __post_init__(self):
        if not self.half_height > 0:
            raise ConfigurationError("half_height must be positive")
        if self.nodes < 64:
            raise ConfigurationError("nodes must be at least 64")
        if not self.tolerance > 0:
            raise ConfigurationError("tolerance must be positive")


@dataclass(frozen=True)
class MellinBarnesResult:
    value: float
    error_estimate: float
    omega: float
    half_height: float
    nodes: int
    refinements: int
    imag_residue: float = field(default=0.0)


def _choose_omega(spec, cfg):
    lo, hi = spec.pole_bounds()
    if not lo < hi:
        raise ConfigurationError(
            f"pole families overlap: rightmost left pole {lo:g} >= leftmost right pole {hi:g}"
        )
    if cfg.omega is not None:
        if not lo < cfg.omega < hi:
            raise ConfigurationError(f"omega={cfg.omega:g} does not separate poles ({lo:g}, {hi:g})")
        omega = float(cfg.omega)
    elif math.isfinite(lo) and math.isfinite(hi):
        omega = 0.5 * (lo + hi)
    elif math.isfinite(lo):
        omega = lo + 0.5
    elif math.isfinite(hi):
        omega = hi - 0.5
    else:
        omega = 0.0
    gap = min(omega - lo, hi - omega)
    return omega, gap


def _log_integrand(spec, omega, t, logx, log_prefactor):
    s = omega + 1j * t
    return spec.log_kernel(s) - s * logx + log_prefactor


def _quadrature(spec, omega, logx, log_prefactor, half_height, width):
    panels = max(1, math.ceil(2.0 * half_height / width))
    if panels % 2:
        panels += 1  # keep t = 0 on a panel edge, never on a node
    h = 2.0 * half_height / panels
    left = -half_height + h * np.arange(panels)
    t = (left[:, None] + 0.5 * h * (_GL_X[None, :] + 1.0)).ravel()
    w = np.tile(0.5 * h * _GL_W, panels)
    vals = np.exp(_log_integrand(spec, omega, t, logx, log_prefactor))
    total = np.sum(w * vals) / (2.0 * math.pi)
    roundoff = 64.0 * np.finfo(float).eps * np.sum(w * np.abs(vals)) / (2.0 * math.pi)
    return total, roundoff, panels * _PANEL


def _tail_height(spec, omega, logx, log_prefactor, start, kappa, tol):
    # grow T until the integrand (and hence the neglected tail) is below tol
    target = math.log(tol * min(kappa, 1.0)) - 3.0
    height = start
    for _ in range(200):
        edge = _log_integrand(spec, omega, np.array([height]), logx, log_prefactor)[0].real
        if edge < target:
            return height
        height *= 1.25
    raise ConvergenceError(f"integrand does not decay below tolerance by |Im s| = {height:g}")


def mellin_barnes(spec, x, cfg=None, log_prefactor=0.0):
    """Evaluate exp(log_prefactor) * (1/2πi) ∫ kernel(s) x^(-s) ds with diagnostics.

    Raises ConfigurationError when no vertical line separates the pole
    families or the kernel does not decay, ConvergenceError when successive
    refinements keep disagreeing (the exception carries both estimates).
    """
    cfg = cfg or ContourConfig()
    if not x > 0:
        raise DomainError("Mellin–Barnes argument must be positive")
    spec = spec.canonical()
    omega, gap = _choose_omega(spec, cfg)
    kappa = spec.decay_rate()
    if not kappa > 0:
        raise ConfigurationError("kernel does not decay along the contour (divergent integral)")
    logx = math.log(x)

    height = _tail_height(spec, omega, logx, log_prefactor, cfg.half_height, kappa, cfg.tolerance)
    # phase of the kernel changes at roughly |log x| + sum(C log(C t)) per unit t
    scales = [abs(sc) for _, sc in spec.numerator_terms + spec.sign_terms + spec.denominator_terms]
    phase_rate = abs(logx) + sum(sc * math.log(2.0 + sc * height) for sc in scales)
    width = min(1.0, gap, 6.0 / max(phase_rate, 1e-12))
    width = min(width, 2.0 * height * _PANEL / cfg.nodes)

    prev, roundoff, nodes = _quadrature(spec, omega, logx, log_prefactor, height, width)
    history = [prev]
    for refinement in range(1, cfg.max_refinements + 1):
        height *= 2.0
        width *= 0.5
        cur, roundoff, nodes = _quadrature(spec, omega, logx, log_prefactor, height, width)
        history.append(cur)
        diff = abs(cur.real - prev.real)
        if diff <= max(cfg.tolerance, roundoff):
            imag = abs(cur.imag)
            if imag > max(cfg.tolerance, roundoff) * max(1.0, abs(cur.real)):
                raise ConvergenceError(
                    f"imaginary residue {imag:.3g} exceeds tolerance; kernel is not real-symmetric",
                    estimates=[h.real for h in history[-2:]],
                )
            return MellinBarnesResult(
                value=float(cur.real),
                error_estimate=float(max(diff, roundoff)),
                omega=omega,
                half_height=height,
                nodes=nodes,
                refinements=refinement,
                imag_residue=float(imag),
            )
        prev = cur
    raise ConvergenceError(
        f"contour quadrature did not converge after {cfg.max_refinements} refinements",
        estimates=[h.real for h in history[-2:]],
    )


def mellin_barnes_eval(spec, x, cfg=None, log_prefactor=0.0):
    """Real value of the Mellin–Barnes integral; see :func:`mellin_barnes`."""
    return mellin_barnes(spec, x, cfg, log_prefactor).value


def fox_h(x, m, n, a, b, cfg=None):
    """Fox H-function H^{m,n}_{p,q}[x | a; b] for x > 0."""
    return mellin_barnes_eval(fox_h_spec(m, n, a, b), x, cfg)


def meijer_g(x, m, n, a, b, cfg=None):
    """Meijer G-function G^{m,n}_{p,q}[x | a; b] for x > 0."""
    return mellin_barnes_eval(meijer_g_spec(m, n, a, b), x, cfg)
