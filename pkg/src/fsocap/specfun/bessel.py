"""Modified Bessel function of the second kind, real order, real argument.

Temme's series for x < 2 and Steed's continued fraction (CF2) for x >= 2
give K_mu and K_{mu+1} at the reduced order |mu| <= 1/2; forward
recurrence then climbs to the requested order.  Everything is vectorised
over ``x`` and carried as (mantissa, log-scale) pairs so that large orders
at small arguments, and large arguments, never overflow or underflow
before the caller asks for the final value.
"""

import math
import warnings

import numpy as np

from fsocap.errors import DomainError

_EPS = 1e-16
_MAXIT = 10_000
_RESCALE = 1e250
_LOG_TINY = math.log(np.finfo(float).tiny)

# Power-series coefficients of 1/Gamma(z) = sum_{k>=1} c_k z^k (A&S 6.1.34);
# equivalently 1/Gamma(1+z) = sum_{k>=0} c_{k+1} z^k.
_RGAMMA_SERIES = (
    1.0,
    0.5772156649015329,
    -0.6558780715202538,
    -0.0420026350340952,
    0.1665386113822915,
    -0.0421977345555443,
    -0.0096219715278770,
    0.0072189432466630,
    -0.0011651675918591,
    -0.0002152416741149,
    0.0001280502823882,
    -0.0000201348547807,
    -0.0000012504934821,
    0.0000011330272320,
    -0.0000002056338417,
    0.0000000061160950,
    0.0000000050020075,
    -0.0000000011812746,
    0.0000000001043427,
    0.0000000000077823,
    -0.0000000000036968,
    0.0000000000005100,
    -0.0000000000000206,
    -0.0000000000000054,
    0.0000000000000014,
    0.0000000000000001,
)


class BesselUnderflowWarning(RuntimeWarning):
    """K_nu(x) is below the smallest positive double and was returned as 0."""


def _temme_gammas(mu):
    """gam1, gam2, 1/Gamma(1+mu), 1/Gamma(1-mu) for |mu| <= 1/2.

    gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu) is formed from the odd
    series terms directly, which avoids the cancellation at small mu.
    """
    # 1/Gamma(1+z) = sum_{k>=0} c[k] z^k
    even = 0.0
    odd = 0.0
    for power in range(len(_RGAMMA_SERIES) - 1, -1, -1):
        coef = _RGAMMA_SERIES[power]
        if power % 2 == 0:
            even += coef * mu**power
        else:
            odd += coef * mu ** (power - 1)
    gam1 = -odd
    gam2 = even
    gampl = even + mu * odd
    gammi = even - mu * odd
    return gam1, gam2, gampl, gammi


def _series_small_x(mu, x):
    # Temme; returns K_mu(x), K_{mu+1}(x)
    x2 = 0.5 * x
    pimu = math.pi * mu
    fact = 1.0 if abs(pimu) < _EPS else pimu / math.sin(pimu)
    d = -np.log(x2)
    e = mu * d
    with np.errstate(invalid="ignore", divide="ignore"):
        fact2 = np.where(np.abs(e) < _EPS, 1.0, np.sinh(e) / e)
    gam1, gam2, gampl, gammi = _temme_gammas(mu)
    ff = fact * (gam1 * np.cosh(e) + gam2 * fact2 * d)
    total = ff.copy()
    e = np.exp(e)
    p = 0.5 * e / gampl
    q = 0.5 / (e * gammi)
    c = np.ones_like(x)
    dd = x2 * x2
    total1 = p.copy()
    mu2 = mu * mu
    active = np.ones(x.shape, dtype=bool)
    for i in range(1, _MAXIT):
        ff = np.where(active, (i * ff + p + q) / (i * i - mu2), ff)
        c = np.where(active, c * dd / i, c)
        p = np.where(active, p / (i - mu), p)
        q = np.where(active, q / (i + mu), q)
        delta = c * ff
        total = np.where(active, total + delta, total)
        delta1 = c * (p - i * ff)
        total1 = np.where(active, total1 + delta1, total1)
        active &= np.abs(delta) >= np.abs(total) * _EPS
        if not active.any():
            break
    return total, total1 * 2.0 / x


def _cf2_large_x(mu, x):
    # Steed's CF2; returns exp(x)-scaled K_mu(x), K_{mu+1}(x)
    mu2 = mu * mu
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25 - mu2
    q = np.full_like(x, a1)
    c = np.full_like(x, a1)
    a = -a1
    s = 1.0 + q * delh
    active = np.ones(x.shape, dtype=bool)
    for i in range(2, _MAXIT):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = np.where(active, (b * d - 1.0) * delh, 0.0)
        h = h + delh
        dels = q * delh
        s = s + dels
        active &= np.abs(dels / s) >= _EPS
        if not active.any():
            break
    h = a1 * h
    kmu = np.sqrt(np.pi / (2.0 * x)) / s
    k1 = kmu * (mu + x + 0.5 - h) / x
    return kmu, k1


def _log_bessel_k_array(nu, x):
    nu = abs(float(nu))
    nl = int(nu + 0.5)
    mu = nu - nl
    kmu = np.empty_like(x)
    k1 = np.empty_like(x)
    logscale = np.zeros_like(x)
    small = x < 2.0
    if small.any():
        kmu[small], k1[small] = _series_small_x(mu, x[small])
    big = ~small
    if big.any():
        kmu[big], k1[big] = _cf2_large_x(mu, x[big])
        logscale[big] = -x[big]
    twox = 2.0 / x
    for i in range(1, nl + 1):
        knext = (mu + i) * twox * k1 + kmu
        kmu = k1
        k1 = knext
        over = k1 > _RESCALE
        if over.any():
            kmu = np.where(over, kmu / _RESCALE, kmu)
            k1 = np.where(over, k1 / _RESCALE, k1)
            logscale = np.where(over, logscale + math.log(_RESCALE), logscale)
    return np.log(kmu) + logscale


def _log_bessel_k_scalar(nu, x):
    # same algorithm as the array path, in plain floats (quadrature callers
    # evaluate one point at a time and numpy overhead dominates there)
    nu = abs(float(nu))
    nl = int(nu + 0.5)
    mu = nu - nl
    logscale = 0.0
    if x < 2.0:
        x2 = 0.5 * x
        pimu = math.pi * mu
        fact = 1.0 if abs(pimu) < _EPS else pimu / math.sin(pimu)
        d = -math.log(x2)
        e = mu * d
        fact2 = 1.0 if abs(e) < _EPS else math.sinh(e) / e
        gam1, gam2, gampl, gammi = _temme_gammas(mu)
        ff = fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
        total = ff
        e = math.exp(e)
        p = 0.5 * e / gampl
        q = 0.5 / (e * gammi)
        c = 1.0
        dd = x2 * x2
        total1 = p
        mu2 = mu * mu
        for i in range(1, _MAXIT):
            ff = (i * ff + p + q) / (i * i - mu2)
            c *= dd / i
            p /= i - mu
            q /= i + mu
            delta = c * ff
            total += delta
            total1 += c * (p - i * ff)
            if abs(delta) < abs(total) * _EPS:
                break
        kmu, k1 = total, total1 * 2.0 / x
    else:
        mu2 = mu * mu
        b = 2.0 * (1.0 + x)
        d = 1.0 / b
        h = delh = d
        q1, q2 = 0.0, 1.0
        a1 = 0.25 - mu2
        q = c = a1
        a = -a1
        s = 1.0 + q * delh
        for i in range(2, _MAXIT):
            a -= 2 * (i - 1)
            c = -a * c / i
            qnew = (q1 - b * q2) / a
            q1, q2 = q2, qnew
            q += c * qnew
            b += 2.0
            d = 1.0 / (b + a * d)
            delh = (b * d - 1.0) * delh
            h += delh
            dels = q * delh
            s += dels
            if abs(dels / s) < _EPS:
                break
        h = a1 * h
        kmu = math.sqrt(math.pi / (2.0 * x)) / s
        k1 = kmu * (mu + x + 0.5 - h) / x
        logscale = -x
    twox = 2.0 / x
    for i in range(1, nl + 1):
        kmu, k1 = k1, (mu + i) * twox * k1 + kmu
        if k1 > _RESCALE:
            kmu /= _RESCALE
            k1 /= _RESCALE
            logscale += math.log(_RESCALE)
    return math.log(kmu) + logscale


def log_bessel_k(nu, x):
    """log K_nu(x) for x > 0; finite wherever K_nu(x) itself would over/underflow."""
    scalar = np.ndim(x) == 0
    if scalar:
        xf = float(x)
        if not xf > 0:
            raise DomainError("bessel_k requires x > 0")
        return _log_bessel_k_scalar(nu, xf)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~(x > 0)):
        raise DomainError("bessel_k requires x > 0")
    return _log_bessel_k_array(nu, x)


def bessel_k(nu, x):
    """K_nu(x) for real order nu and x > 0.

    Symmetric in nu.  Values below the double range come back as 0.0 and a
    BesselUnderflowWarning is issued; values above it come back as inf.
    """
    logk = log_bessel_k(nu, x)
    under = np.asarray(logk) < _LOG_TINY
    if np.any(under):
        warnings.warn(
            f"K_{nu}(x) underflows for {int(np.count_nonzero(under))} argument(s)",
            BesselUnderflowWarning,
            stacklevel=2,
        )
    with np.errstate(over="ignore"):
        out = np.exp(logk)
    return float(out) if np.ndim(out) == 0 else out


def bessel_k_scaled(nu, x):
    """exp(x) * K_nu(x)."""
    x_arr = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        out = np.exp(log_bessel_k(nu, x_arr) + x_arr)
    return float(out) if np.ndim(out) == 0 else out
