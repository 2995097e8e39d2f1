"""Nested weighted gamma-gamma mixture for sums of i.n.i.d. gamma-gamma variates.

With every link written as I_l = x_l y_l (x_l ~ Gamma(k, 1/k) sharing one
shape k, y_l ~ Gamma(m_l, Omega_l/m_l)), dropping the cross terms gives
S ~ (sum x)(sum y)/L.  The density of sum y is a finite partial-fraction
mixture of Gamma(j, Omega_i/m_i) laws, so S becomes a weighted sum of
gamma-gamma densities with shapes (Lk, j).  The weights alternate in sign
and can be large when the Omega_i/m_i are close; the normalization audit
reports how much of that cancellation survived in double precision.
"""

import math
import warnings
from statistics import NormalDist
from dataclasses import dataclass, field

import numpy as np

from fsocap.channel import GammaGammaParams
from fsocap.errors import ComputationError, ConfigurationError, DomainError
from fsocap.specfun import ln_gamma, log_bessel_k

JITTER_EPS = 1e-6
NORMALIZATION_TOL = 1e-4
_LOG_MAX = math.log(np.finfo(float).max)


class JitterWarning(UserWarning):
    """Mean powers were perturbed to separate coincident mixture poles."""


def _coincident(m, omega):
    L = len(m)
    for i in range(L):
        for q in range(i + 1, L):
            if omega[i] * m[q] == omega[q] * m[i]:
                return (i, q)
    return None


@dataclass(frozen=True)
class InidChannelSet:
    """Common shape ``k``, integer per-link shapes ``m`` and mean powers ``omega``.

    ``adaptation`` records how physical shapes were turned into this set
    (which shape was rounded, by how much, and any jitter applied).
    """

    k: float
    m: tuple
    omega: tuple
    adaptation: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        m = tuple(int(v) for v in self.m)
        omega = tuple(float(v) for v in self.omega)
        if len(m) != len(self.m) or any(mv != v for mv, v in zip(m, self.m)):
            raise DomainError("m must be integers")
        if len(m) == 0 or len(m) != len(omega):
            raise DomainError("m and omega must have the same nonzero length")
        if not (self.k > 0 and all(v >= 1 for v in m) and all(v > 0 for v in omega)):
            raise DomainError("k, m and omega must be positive")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "omega", omega)

    @property
    def L(self):
        return len(self.m)


def adapt_shapes(a, b, omega, integer_shape="auto", jitter=JITTER_EPS):
    """Build an InidChannelSet from physical gamma-gamma shapes (a, b) shared by all links.

    The gamma-gamma law is symmetric in its two shapes, so either may play
    the integer role.  ``integer_shape="auto"`` rounds whichever of a, b is
    closer to an integer and keeps the other exactly as the common k.
    Coincident Omega_i/m_i ratios get the multiplicative jitter
    Omega_l <- Omega_l (1 + l*eps).
    """
    if integer_shape == "auto":
        integer_shape = "a" if abs(a - round(a)) < abs(b - round(b)) else "b"
    if integer_shape == "a":
        k, raw = b, a
    elif integer_shape == "b":
        k, raw = a, b
    else:
        raise ConfigurationError("integer_shape must be 'auto', 'a' or 'b'")
    m_int = max(1, int(round(raw)))
    omega = [float(v) for v in omega]
    m = [m_int] * len(omega)
    info = {
        "integer_shape": integer_shape,
        "shape_raw": raw,
        "shape_rounded": m_int,
        "k": k,
        "jitter": 0.0,
    }
    if _coincident(m, omega) is not None:
        warnings.warn(
            f"coincident mixture poles; applying jitter eps={jitter:g} to the mean powers",
            JitterWarning,
            stacklevel=2,
        )
        omega = [w * (1.0 + (l + 1) * jitter) for l, w in enumerate(omega)]
        info["jitter"] = jitter
    return InidChannelSet(k, tuple(m), tuple(omega), info)


@dataclass(frozen=True)
class WeightTable:
    """Mixture weights w(i, j), i = 0..L-1, j = 1..m_i, with their channel set.

    ``terms`` lists (i, j, weight) in construction order.  ``normalization``
    is the numerically integrated mass of the mixture and ``status`` is
    "ok" or "unreliable" depending on the audit.
    """

    w: dict
    context: InidChannelSet
    normalization: float = float("nan")
    status: str = "unaudited"

    @property
    def terms(self):
        return [(i, j, v) for (i, j), v in self.w.items()]

    @property
    def condition(self):
        """sum |w|: amplification of per-term errors in any weighted sum."""
        return math.fsum(abs(v) for v in self.w.values())

    def components(self):
        """(weight, GammaGammaParams) for every term of the mixture."""
        ch = self.context
        A = ch.L * ch.k
        out = []
        for (i, j), v in self.w.items():
            out.append((v, GammaGammaParams(A, j, j * ch.omega[i] / ch.m[i])))
        return out

    def digest(self):
        import hashlib

        h = hashlib.sha256()
        for (i, j), v in sorted(self.w.items()):
            h.update(f"{i},{j},{v!r};".encode())
        return h.hexdigest()[:16]


def compute_weights(ch, audit=True):
    """Partial-fraction weights of the mixture; base case in log domain with sign tracking."""
    hit = _coincident(ch.m, ch.omega)
    if hit is not None:
        raise ConfigurationError(
            f"links {hit[0]} and {hit[1]} have equal Omega/m; apply jitter (see adapt_shapes)"
        )
    L = ch.L
    m, om = ch.m, ch.omega
    w = {}
    for i in range(L):
        log_mag = 0.0
        negative = False
        for j in range(L):
            if j == i:
                continue
            base = 1.0 - om[j] * m[i] / (om[i] * m[j])
            log_mag -= m[j] * math.log(abs(base))
            if base < 0 and m[j] % 2:
                negative = not negative
        if log_mag > _LOG_MAX:
            raise ComputationError(f"weight w({i + 1}, {m[i]}) overflows (log|w| = {log_mag:.1f})")
        w[(i, m[i])] = -math.exp(log_mag) if negative else math.exp(log_mag)
        for t in range(1, m[i]):
            acc = []
            for q in range(L):
                if q == i:
                    continue
                ratio = 1.0 - om[i] * m[q] / (om[q] * m[i])
                for jj in range(1, t + 1):
                    acc.append(m[q] * ratio ** (-jj) * w[(i, m[i] - t + jj)])
            value = math.fsum(acc) / t
            if not math.isfinite(value):
                raise ComputationError(f"weight w({i + 1}, {m[i] - t}) overflows")
            w[(i, m[i] - t)] = value
    table = WeightTable(w, ch)
    if audit:
        table = audit_weights(table)
    return table


_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def log_grid_mass(pdf, center, below=40.0, above=9.0, width=0.25):
    """∫ pdf(s) ds over (0, inf) as ∫ s pdf(s) dt with s = center * e^t.

    Composite 16-point Gauss–Legendre panels on t in [-below, above]; a
    single vectorised call of ``pdf``.  Suited to densities with power-law
    behaviour at 0 and (stretched) exponential tails.
    """
    panels = int(math.ceil((below + above) / width))
    h = (below + above) / panels
    left = -below + h * np.arange(panels)
    t = (left[:, None] + 0.5 * h * (_GL_X[None, :] + 1.0)).ravel()
    w = np.tile(0.5 * h * _GL_W, panels)
    s = center * np.exp(t)
    return float(np.sum(w * s * pdf(s)))


def audit_weights(table, tol=NORMALIZATION_TOL):
    """Integrate the mixture numerically and mark the table unreliable if the mass is off."""
    total = log_grid_mass(lambda s: sum_pdf_inid(s, table), inid_mean(table))
    status = "ok" if abs(total - 1.0) <= tol else "unreliable"
    if status != "ok":
        warnings.warn(
            f"mixture mass {total:.6g} deviates from 1 by more than {tol:g}; "
            f"weight condition number {table.condition:.3g}",
            RuntimeWarning,
            stacklevel=2,
        )
    return WeightTable(table.w, table.context, total, status)


def _term_constants(wt):
    # per term: (weight, order A - j, c_i = A m_i / Omega_i, exponent (A+j)/2, log normaliser)
    ch = wt.context
    A = ch.L * ch.k
    lg_a = ln_gamma(A)
    out = []
    for (i, j), v in wt.w.items():
        c = A * ch.m[i] / ch.omega[i]
        half = 0.5 * (A + j)
        out.append((v, A - j, c, half, math.log(2.0) + half * math.log(c) - lg_a - math.lgamma(j)))
    return out


def sum_pdf_inid(s, wt):
    """Mixture density of the sum S."""
    terms = _term_constants(wt)
    if np.ndim(s) == 0:
        s = float(s)
        if not s > 0:
            return 0.0
        ls = math.log(s)
        return math.fsum(
            v * math.exp(lc + (half - 1.0) * ls + log_bessel_k(order, 2.0 * math.sqrt(c * s)))
            for v, order, c, half, lc in terms
        )
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape)
    pos = s > 0
    if pos.any():
        sp = s[pos]
        ls = np.log(sp)
        acc = np.zeros(sp.shape)
        for v, order, c, half, lc in terms:
            acc += v * np.exp(lc + (half - 1.0) * ls + log_bessel_k(order, 2.0 * np.sqrt(c * sp)))
        out[pos] = acc
    return out


def sum_cdf_inid(s, wt):
    """Mixture CDF of S, closed form per component.

    Component (i, j) is the law of X*Y with X ~ Gamma(Lk, 1/(Lk)) and
    Y ~ Gamma(j, Omega_i/m_i); integrating the Erlang CDF of Y against X
    leaves a finite sum of K-Bessel terms.
    """
    s = np.asarray(s, dtype=float)
    flat = np.atleast_1d(s)
    out = np.zeros(flat.shape)
    pos = flat > 0
    if not pos.any():
        return out if s.ndim else float(out[0])
    sp = flat[pos]
    ch = wt.context
    A = ch.L * ch.k
    log_norm = math.log(2.0) + A * math.log(A) - ln_gamma(A)
    acc = np.zeros(sp.shape)
    for (i, j), v in wt.w.items():
        c = sp * ch.m[i] / ch.omega[i]
        logc = np.log(c)
        arg = 2.0 * np.sqrt(c * A)
        tail = np.zeros(sp.shape)
        for n in range(j):
            tail += np.exp(
                n * logc
                - math.lgamma(n + 1)
                + log_norm
                + 0.5 * (A - n) * (logc - math.log(A))
                + log_bessel_k(A - n, arg)
            )
        acc += v * (1.0 - tail)
    out[pos] = acc
    return out if s.ndim else float(out[0])


def snr_pdf_inid(gamma, wt, gamma0):
    """Density of gamma = gamma0 S^2 under the mixture (change of variables from S)."""
    if not gamma0 > 0:
        raise DomainError("gamma0 must be positive")
    if np.ndim(gamma) == 0:
        g = float(gamma)
        if not g > 0:
            return 0.0
        return sum_pdf_inid(math.sqrt(g / gamma0), wt) / (2.0 * math.sqrt(g * gamma0))
    g = np.asarray(gamma, dtype=float)
    flat = np.atleast_1d(g)
    out = np.zeros(flat.shape)
    pos = flat > 0
    if pos.any():
        gp = flat[pos]
        s = np.sqrt(gp / gamma0)
        out[pos] = sum_pdf_inid(s, wt) / (2.0 * np.sqrt(gp * gamma0))
    return out if g.ndim else float(out[0])


def inid_mean(wt):
    """E[S] under the mixture (exact): sum of Omega_l."""
    return math.fsum(wt.context.omega)


def beta_omegas(L, beta):
    """Geometric mean powers Omega_l = beta * Omega_{l-1}, normalized so they sum to L."""
    if L < 1 or not beta >= 1:
        raise DomainError("need L >= 1 and beta >= 1")
    raw = [beta**l for l in range(L)]
    total = math.fsum(raw)
    return tuple(L * r / total for r in raw)


def quantile_omegas(L, spread, mean=1.0):
    """Deterministic stand-in for L draws from N(mean, spread^2): the (l - 1/2)/L quantiles."""
    if L < 1 or not spread >= 0:
        raise DomainError("need L >= 1 and spread >= 0")
    dist = NormalDist(mean, spread) if spread > 0 else None
    vals = tuple(dist.inv_cdf((l + 0.5) / L) if dist else mean for l in range(L))
    if min(vals) <= 0:
        raise DomainError("spread too large: a mean power is not positive")
    return vals
