"""Limiting objects: the q-vector, the structured covariance of the
normalized frequency spectrum, and the four joint limit densities.

For the power-growth models the species count K_n, normalized by
n^alpha, converges to a continuous law, and the spectrum proportions
M_jn / K_n, centred at

    q_j = alpha Gamma(j - alpha) / (j! Gamma(1 - alpha))

and scaled by n^{alpha/2}, are conditionally Gaussian given the
normalized K with covariance Q / x, where Q has the closed inverse

    Q^{-1} = [diag entries Q_j, off-diagonal Q] / ((1 - sum q) prod q),
    Q_j = (1 - sum_{i != j} q_i) prod_{i != j} q_i,  Q = prod_i q_i,

and determinant det Q = (1 - sum q_j) prod q_j.

Joint limit densities in (x, y):

* stable:   cond. Gaussian x^{J/2} G(x,y) times the Mittag-Leffler
            marginal written as (1/(alpha x)) e^{-x/Gamma(1-alpha)}
            f_{Y_x(1)}(1);
* trimmed:  x^{r+J/2-1}/(Gamma(r) Gamma(1-alpha)^r) G(x,y) times the
            lambda-integral, evaluated by splitting at lambda = 1: the
            (1, inf) part collapses to x f_L(x) / r in closed form and
            the (0, 1) part is quadrature over the truncated-subordinator
            density;
* Pitman-Yor: a x^{theta/alpha} tilt of the stable case;
* Ewens:    product of Poisson(theta/j) masses times the standard normal
            CDF (spectrum and species count asymptotically independent).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.linalg import lu_factor
from scipy.special import gammaln
from scipy.special import gamma as _gamma
from scipy.stats import norm

from .errors import DomainError, NumericalError
from .samplers import RngSeed, _philox
from .special import (
    mittag_leffler_density,
    trunc_core_clamped,
    _trunc_core,
)


def q_vector(alpha: float, J: int) -> np.ndarray:
    """Limiting spectrum proportions q_j, j = 1..J."""
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0,1), got {alpha}")
    if J < 1:
        raise DomainError(f"J must be >= 1, got {J}")
    js = np.arange(1, J + 1, dtype=float)
    return np.exp(
        math.log(alpha) + gammaln(js - alpha) - gammaln(js + 1.0)
        - math.lgamma(1.0 - alpha)
    )


@dataclass(frozen=True)
class LimitLawQ:
    """The J-dimensional q-vector with its covariance structure."""

    J: int
    alpha: float
    q: np.ndarray
    Qinv: np.ndarray
    Q: np.ndarray
    detQ: float

    @property
    def q_plus(self) -> float:
        return float(self.q.sum())


def build_q_law(alpha: float, J: int) -> LimitLawQ:
    """Construct the limit covariance from its closed-form inverse.

    The inverse is assembled entrywise (diagonal Q_j, off-diagonal
    prod q, shared prefactor), inverted numerically, and the determinant
    is computed both by LU factorization and by the closed form
    (1 - sum q) prod q; disagreement or a bad Q Qinv product raises.
    """
    q = q_vector(alpha, J)
    q_plus = float(q.sum())
    if not q_plus < 1.0:
        raise NumericalError(f"sum of q exceeds 1 at alpha={alpha}, J={J}")
    prod_q = float(np.prod(q))
    pref = 1.0 / ((1.0 - q_plus) * prod_q)
    qinv = np.empty((J, J))
    for i in range(J):
        others = np.delete(q, i)
        qinv[i, :] = pref * prod_q
        qinv[i, i] = pref * (1.0 - others.sum()) * float(np.prod(others))
    Q = np.linalg.inv(qinv)
    ident = qinv @ Q
    if np.max(np.abs(ident - np.eye(J))) > 1e-8:
        raise NumericalError(
            f"Q Qinv deviates from identity beyond 1e-8 at alpha={alpha}, J={J}"
        )
    lu, piv = lu_factor(Q)
    det_lu = float(np.prod(np.diag(lu)))
    sign = 1.0
    for i, p in enumerate(piv):
        if p != i:
            sign = -sign
    det_lu *= sign
    det_closed = (1.0 - q_plus) * prod_q
    if abs(det_lu - det_closed) > 1e-10 * abs(det_closed):
        raise NumericalError(
            f"LU determinant {det_lu:.15e} disagrees with closed form "
            f"{det_closed:.15e}"
        )
    return LimitLawQ(J=J, alpha=alpha, q=q, Qinv=qinv, Q=Q, detQ=det_closed)


def conditional_normal_density(law: LimitLawQ, x: float, y: np.ndarray) -> float:
    """Density of N(0, Q/x) at y: the limiting conditional law of the
    centred, n^{alpha/2}-scaled spectrum given the normalized species
    count equals x."""
    if x <= 0:
        raise DomainError(f"x must be > 0, got {x}")
    y = np.asarray(y, float)
    quad_form = float(y @ law.Qinv @ y)
    return (
        x ** (law.J / 2.0)
        * math.exp(-0.5 * x * quad_form)
        / math.sqrt((2.0 * math.pi) ** law.J * law.detQ)
    )


def _gauss_factor(law: LimitLawQ, x: float, y: np.ndarray) -> float:
    y = np.asarray(y, float)
    quad_form = float(y @ law.Qinv @ y)
    return math.exp(-0.5 * x * quad_form) / math.sqrt(
        (2.0 * math.pi) ** law.J * law.detQ
    )


def stable_k_marginal(alpha: float, x: float) -> float:
    """Limiting density of K_n / n^alpha under the stable model,
    (1/(alpha x)) e^{-x/Gamma(1-alpha)} f_{Y_x(1)}(1); identical to the
    Mittag-Leffler density."""
    if x <= 0:
        raise DomainError(f"x must be > 0, got {x}")
    g1 = _gamma(1.0 - alpha)
    return math.exp(-x / g1) * _trunc_core(alpha, x, 1.0) / (alpha * x)


def limit_density_stable(
    alpha: float, law: LimitLawQ, x: float, y: np.ndarray
) -> float:
    """Joint limit density of the stable model at (x, y)."""
    if x <= 0:
        raise DomainError(f"x must be > 0, got {x}")
    g1 = _gamma(1.0 - alpha)
    return (
        x ** (law.J / 2.0 - 1.0)
        / alpha
        * _gauss_factor(law, x, y)
        * math.exp(-x / g1)
        * _trunc_core(alpha, x, 1.0)
    )


_GL12 = np.polynomial.legendre.leggauss(12)


@lru_cache(maxsize=100_000)
def trimmed_lambda_integral(alpha: float, r: float, x: float) -> float:
    """I(x) = int_0^inf e^{-x (lam^-a v 1)/Gamma(1-a)} f_{Y_x(lam)}(1)
    d lam / lam^{alpha r + 1}, via the split at lam = 1.

    The (1, inf) part is x f_L(x) / r exactly.  Under y = lam^-alpha the
    (0, 1) part becomes
    (1/alpha) int_1^inf e^{-x y/Gamma(1-a)} y^{r-1+1/alpha}
    G(x y, y^{1/alpha}) dy with G the unit-cutoff subordinator density,
    truncated where the exponential weight is below 1e-19.  The integral
    is taken in s = log y over fixed Gauss-Legendre panels, doubling the
    panel count until two sweeps agree.
    """
    g1 = _gamma(1.0 - alpha)
    closed = x * mittag_leffler_density(alpha, x) / r

    y_hi = g1 * (45.0 + math.log1p(1.0 / x)) / x
    if y_hi <= 1.0:
        return closed
    s_hi = math.log(y_hi)

    def integrand(s: float) -> float:
        yv = math.exp(s)
        gval = trunc_core_clamped(alpha, x * yv, yv ** (1.0 / alpha))
        if gval == 0.0:
            return 0.0
        lg = -x * yv / g1 + (r + 1.0 / alpha) * s + math.log(gval)
        return math.exp(lg) if lg > -745.0 else 0.0

    def sweep(npan: int) -> float:
        xs, ws = _GL12
        edges = np.linspace(0.0, s_hi, npan + 1)
        tot = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
            tot += half * sum(
                wt * integrand(mid + half * xx) for xx, wt in zip(xs, ws)
            )
        return tot

    prev = sweep(6)
    for npan in (12, 24, 48):
        cur = sweep(npan)
        if abs(cur - prev) <= max(1e-10, 2e-7 * abs(cur + closed)):
            return closed + cur / alpha
        prev = cur
    raise NumericalError(
        f"lambda-integral failed to settle at alpha={alpha}, r={r}, x={x}"
    )


def limit_density_trimmed(
    alpha: float, r: float, law: LimitLawQ, x: float, y: np.ndarray
) -> float:
    """Joint limit density of the trimmed model at (x, y)."""
    if x <= 0:
        raise DomainError(f"x must be > 0, got {x}")
    if r <= 0:
        raise DomainError(f"r must be > 0, got {r}")
    g1 = _gamma(1.0 - alpha)
    pref = math.exp(
        (r + law.J / 2.0 - 1.0) * math.log(x) - gammaln(r) - r * math.log(g1)
    )
    return pref * _gauss_factor(law, x, y) * trimmed_lambda_integral(alpha, r, x)


def trimmed_k_marginal(alpha: float, r: float, x: float) -> float:
    """Limiting density of K_n / n^alpha under the trimmed model."""
    if x <= 0:
        raise DomainError(f"x must be > 0, got {x}")
    g1 = _gamma(1.0 - alpha)
    pref = math.exp((r - 1.0) * math.log(x) - gammaln(r) - r * math.log(g1))
    return pref * trimmed_lambda_integral(alpha, r, x)


def pitman_k_marginal(alpha: float, theta: float, x: float) -> float:
    """Limiting density of K_n / n^alpha under the two-parameter model:
    the theta/alpha-moment tilt of the Mittag-Leffler density."""
    if x <= 0:
        raise DomainError(f"x must be > 0, got {x}")
    ta = theta / alpha
    tilt = math.exp(gammaln(theta + 1.0) - gammaln(ta + 1.0) + ta * math.log(x))
    return tilt * mittag_leffler_density(alpha, x)


def limit_density_pitman(
    alpha: float, theta: float, law: LimitLawQ, x: float, y: np.ndarray
) -> float:
    """Joint limit density of the two-parameter model at (x, y)."""
    if x <= 0:
        raise DomainError(f"x must be > 0, got {x}")
    if theta <= -alpha:
        raise DomainError(f"theta must exceed -alpha, got {theta}")
    ta = theta / alpha
    tilt = math.exp(gammaln(theta + 1.0) - gammaln(ta + 1.0))
    return (
        tilt
        * x ** (law.J / 2.0 + ta)
        * _gauss_factor(law, x, y)
        * mittag_leffler_density(alpha, x)
    )


def limit_density_ewens(
    theta: float, J: int, m: np.ndarray, c: float
) -> float:
    """Ewens joint limit: product over j <= J of Poisson(theta/j) masses
    at m_j, times the standard normal CDF at c (asymptotic independence
    of the spectrum and the normalized species count)."""
    if theta <= 0:
        raise DomainError(f"theta must be > 0, got {theta}")
    m = np.asarray(m)
    if len(m) != J or (m < 0).any():
        raise DomainError("m must be a length-J vector of nonnegative integers")
    lp = 0.0
    for j in range(1, J + 1):
        lam = theta / j
        mj = int(m[j - 1])
        lp += mj * math.log(lam) - lam - gammaln(mj + 1.0)
    return math.exp(lp) * float(norm.cdf(c))


def sample_joint_stable(
    alpha: float, law: LimitLawQ, count: int, seed: RngSeed
) -> tuple[np.ndarray, np.ndarray]:
    """Draws (x, y) from the stable joint limit by inverse-CDF on the
    Mittag-Leffler marginal and an exact Gaussian conditional."""
    from scipy.interpolate import PchipInterpolator

    x_hi = _ml_hi(alpha)
    grid = np.linspace(1e-6, x_hi, 1501)
    dens = np.array([mittag_leffler_density(alpha, g) for g in grid])
    cdf = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) / 2.0 * np.diff(grid))])
    cdf /= cdf[-1]
    keep = np.concatenate([[True], np.diff(cdf) > 1e-15])
    inv = PchipInterpolator(cdf[keep], grid[keep])
    g = _philox(seed, 3, 0)
    xs = np.asarray(inv(g.random(count)))
    chol = np.linalg.cholesky(law.Q)
    z = g.standard_normal((count, law.J))
    ys = (z @ chol.T) / np.sqrt(xs)[:, None]
    return xs, ys


def _ml_hi(alpha: float) -> float:
    x = 2.0
    while mittag_leffler_density(alpha, x) > 1e-14 and x < 1e4:
        x *= 1.25
    return x


def corollary_transform_check(
    law: LimitLawQ, xs: np.ndarray, ys: np.ndarray
) -> dict:
    """Test that sqrt(x) y has the fixed N(0, Q) law independent of x.

    Reports the empirical covariance of sqrt(x) y against Q (in sampling
    standard errors) and the correlations of each component with x.
    """
    xs = np.asarray(xs, float)
    ys = np.asarray(ys, float)
    count, J = ys.shape
    z = ys * np.sqrt(xs)[:, None]
    cov = np.cov(z.T).reshape(J, J)
    # moment-based standard error of each covariance entry
    se = np.empty((J, J))
    for i in range(J):
        for j in range(J):
            prod = (z[:, i] - z[:, i].mean()) * (z[:, j] - z[:, j].mean())
            se[i, j] = prod.std(ddof=1) / math.sqrt(count)
    dev_sigmas = np.abs(cov - law.Q) / se
    corrs = np.array(
        [float(np.corrcoef(z[:, j], xs)[0, 1]) for j in range(J)]
    )
    return {
        "count": count,
        "cov": cov.tolist(),
        "cov_dev_sigmas": dev_sigmas.tolist(),
        "max_cov_dev_sigmas": float(dev_sigmas.max()),
        "corr_with_x": corrs.tolist(),
        "max_abs_corr_with_x": float(np.abs(corrs).max()),
    }
