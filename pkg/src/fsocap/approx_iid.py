"""alpha-mu approximation to the sum of i.i.d. gamma-gamma irradiances.

The sum S = I_1 + ... + I_L is replaced by an alpha-mu variate R whose
first, second and fourth moments match those of S.  The two scale-free
moment ratios fix (alpha, mu); the alpha-root mean r_hat then follows in
closed form.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc

from fsocap.channel import gg_moment
from fsocap.errors import DomainError, FitError
from fsocap.specfun import ln_gamma, ln_gamma_shift

FEASIBILITY_MARGIN = 1e-14
RESIDUAL_TOL = 1e-10
RESTART_ALPHAS = (0.5, 1.0, 1.5, 2.0, 3.0, 4.0)


@dataclass(frozen=True)
class AlphaMuFit:
    alpha: float
    mu: float
    r_hat: float
    residual: float = 0.0
    target_moments: tuple = ()

    def moment(self, n):
        """E[R^n] of the fitted law."""
        return alpha_mu_moment(n, self.alpha, self.mu, self.r_hat)

    def scaled(self, c):
        """Fit of c*S: alpha and mu are scale-free, r_hat scales with c."""
        return AlphaMuFit(
            self.alpha,
            self.mu,
            self.r_hat * c,
            self.residual,
            tuple(m * c**q for m, q in zip(self.target_moments, (1, 2, 4))),
        )


def alpha_mu_moment(n, alpha, mu, r_hat):
    return math.exp(
        n * math.log(r_hat) + ln_gamma_shift(mu, n / alpha) - n / alpha
    )


def sum_moments(orders, link_moments):
    """Raw moments of a sum of independent variates.

    ``link_moments[l][k]`` is E[I_l^k] for k = 0..max(orders).  Moments of
    the partial sums are built by repeated binomial convolution, which is
    the multinomial expansion evaluated one link at a time.
    """
    qmax = max(orders)
    acc = np.asarray(link_moments[0][: qmax + 1], dtype=float)
    for lm in link_moments[1:]:
        lm = np.asarray(lm[: qmax + 1], dtype=float)
        nxt = np.zeros(qmax + 1)
        for n in range(qmax + 1):
            nxt[n] = math.fsum(math.comb(n, k) * acc[k] * lm[n - k] for k in range(n + 1))
        acc = nxt
    return tuple(float(acc[q]) for q in orders)


def sum_moments_iid(L, p, orders=(1, 2, 4)):
    """(E[S], E[S^2], E[S^4]) for S the sum of L i.i.d. gamma-gamma irradiances."""
    if L < 1 or int(L) != L:
        raise DomainError("L must be a positive integer")
    qmax = max(orders)
    single = [gg_moment(k, p) for k in range(qmax + 1)]
    return sum_moments(orders, [single] * int(L))


def _ratio_terms(alpha, mu):
    # rho_n = Γ(mu+n/α)^2 / (Γ(mu) Γ(mu+2n/α)); the target ratio is rho/(1-rho)
    out = []
    for n in (1, 2):
        d = n / alpha
        log_rho = 2.0 * ln_gamma_shift(mu, d) - ln_gamma_shift(mu, 2.0 * d)
        out.append(math.exp(log_rho) / -math.expm1(log_rho))
    return out


def _residual(logp, targets):
    alpha, mu = math.exp(logp[0]), math.exp(logp[1])
    model = _ratio_terms(alpha, mu)
    return np.array([(m - t) / t for m, t in zip(model, targets)])


def _newton(x0, targets, maxiter=100):
    x = np.array(x0, dtype=float)
    f = _residual(x, targets)
    for _ in range(maxiter):
        norm = np.max(np.abs(f))
        if norm <= RESIDUAL_TOL * 1e-2:
            break
        jac = np.empty((2, 2))
        # the two residuals share a leading term, so the Jacobian is nearly
        # singular for concentrated laws; a coarse central step keeps
        # rounding noise well below the row difference that pins alpha
        for j in range(2):
            h = 1e-4
            xp = x.copy()
            xp[j] += h
            xm = x.copy()
            xm[j] -= h
            jac[:, j] = (_residual(xp, targets) - _residual(xm, targets)) / (2.0 * h)
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            break
        # cap steps in log space, then backtrack on the max-norm
        big = np.max(np.abs(step))
        if big > 2.0:
            step *= 2.0 / big
        lam = 1.0
        while lam > 1e-6:
            trial = x + lam * step
            try:
                ft = _residual(trial, targets)
            except (OverflowError, ValueError, ZeroDivisionError):
                ft = None
            if ft is not None and np.all(np.isfinite(ft)) and np.max(np.abs(ft)) < norm:
                x, f = trial, ft
                break
            lam *= 0.5
        else:
            break
    return x, float(np.max(np.abs(f)))


def fit_alpha_mu(E1, E2, E4):
    """Moment-matched alpha-mu law for the target moments E[S], E[S^2], E[S^4].

    Damped Newton on (log alpha, log mu) from the Gamma start alpha = 1,
    mu = E1^2 / (E2 - E1^2); restarts over a small alpha grid on failure.
    """
    if not (E1 > 0 and E2 - E1 * E1 > FEASIBILITY_MARGIN * E1 * E1 and E4 > E2 * E2):
        raise DomainError("moments are infeasible (need E2 > E1^2 and E4 > E2^2)")
    targets = (E1 * E1 / (E2 - E1 * E1), E2 * E2 / (E4 - E2 * E2))
    gamma_mu = targets[0]
    starts = [(0.0, math.log(gamma_mu))]
    starts += [(math.log(a0), math.log(gamma_mu)) for a0 in RESTART_ALPHAS if a0 != 1.0]
    best = None
    for x0 in starts:
        try:
            x, res = _newton(x0, targets)
        except (OverflowError, ValueError, ZeroDivisionError):
            continue
        if best is None or res < best[1]:
            best = (x, res)
        if res <= RESIDUAL_TOL:
            break
    if best is None or best[1] > RESIDUAL_TOL:
        raise FitError("alpha-mu moment matching did not converge", best=best)
    x, res = best
    alpha, mu = math.exp(x[0]), math.exp(x[1])
    r_hat = math.exp(
        math.log(E1) - ln_gamma_shift(mu, 1.0 / alpha) + 1.0 / alpha
    )
    return AlphaMuFit(alpha, mu, r_hat, res, (E1, E2, E4))


def fit_iid_sum(L, p):
    """alpha-mu fit to the sum of L i.i.d. gamma-gamma irradiances with params ``p``."""
    return fit_alpha_mu(*sum_moments_iid(L, p))


def alpha_mu_log_pdf(r, fit):
    r = np.asarray(r, dtype=float)
    out = np.full(r.shape, -np.inf)
    pos = r > 0
    a, mu, rh = fit.alpha, fit.mu, fit.r_hat
    rp = r[pos]
    out[pos] = (
        math.log(a)
        + mu * math.log(mu)
        + (a * mu - 1.0) * np.log(rp)
        - a * mu * math.log(rh)
        - ln_gamma(mu)
        - mu * (rp / rh) ** a
    )
    return out if out.ndim else float(out)


def alpha_mu_pdf(r, fit):
    out = np.exp(alpha_mu_log_pdf(r, fit))
    return out if np.ndim(out) else float(out)


def alpha_mu_cdf(r, fit):
    """P(R <= r) = P(mu, mu (r/r_hat)^alpha) (regularized lower incomplete gamma)."""
    r = np.asarray(r, dtype=float)
    arg = fit.mu * (np.clip(r, 0.0, None) / fit.r_hat) ** fit.alpha
    out = gammainc(fit.mu, arg)
    return out if out.ndim else float(out)


def snr_log_pdf_iid(gamma, fit, gamma0):
    """log density of gamma = gamma0 R^2 for R alpha-mu distributed."""
    g = np.asarray(gamma, dtype=float)
    out = np.full(g.shape, -np.inf)
    pos = g > 0
    a, mu, rh = fit.alpha, fit.mu, fit.r_hat
    gp = g[pos]
    out[pos] = (
        math.log(a)
        + mu * math.log(mu)
        + (0.5 * a * mu - 1.0) * np.log(gp)
        - math.log(2.0)
        - 0.5 * a * mu * math.log(gamma0)
        - a * mu * math.log(rh)
        - ln_gamma(mu)
        - mu * np.exp(0.5 * a * (np.log(gp) - math.log(gamma0)) - a * math.log(rh))
    )
    return out if out.ndim else float(out)


def snr_pdf_iid(gamma, fit, gamma0):
    """Density of the electrical SNR gamma = gamma0 * S^2 under the alpha-mu fit."""
    if not gamma0 > 0:
        raise DomainError("gamma0 must be positive")
    out = np.exp(snr_log_pdf_iid(gamma, fit, gamma0))
    return out if np.ndim(out) else float(out)
