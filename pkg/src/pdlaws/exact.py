"""Exact finite-n joint laws of the frequency spectrum and species count.

Closed-form sampling formulas for the Ewens, stable and Pitman-Yor models,
and the two equivalent integral representations of the trimmed-stable
model: the direct weight form

    P(m, k) = n * int_0^inf  Gamma(r+k) lam^{alpha k}
              / (Gamma(r) Psi(lam)^{r+k})
              * prod_j F_j(lam)^{m_j} / m_j!   d lam / lam

and the mixed multinomial / negative-binomial form

    P(m, k) = n * int_0^inf  ell_n(lam)^k
              * P(Mult(k, p_n(lam)) = m)
              * P(NegBin(r, 1/Psi(lam)) = k)   d lam / lam.

The two are algebraically identical, but are evaluated here through
deliberately different numerical paths (closed incomplete-gamma forms
versus direct quadrature of ell_n's defining integrals), so their
agreement is a genuine end-to-end check of the quadrature machinery.

All spectrum weights are assembled in log space.  The lam-integral is
split at 1: the left part is integrated in log(lam) over (-inf, 0], and
the right part under u = lam^(-alpha r), which absorbs the power tail
exactly and keeps the integrand bounded for every r > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad
from scipy.special import gammainc, gammaln
from scipy.special import gamma as _gamma

from .errors import DomainError, QuadratureError
from .models import Ewens, ModelSpec, PitmanYor, StablePD, TrimmedStable
from .spectra import FrequencySpectrum, PartitionTable, enumerate_spectra


@dataclass(frozen=True)
class QuadratureControl:
    """Error budget for the trimmed-model quadratures."""

    abs_tol: float = 1e-12
    rel_tol: float = 1e-9
    max_subdivisions: int = 200

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 10:
            raise DomainError("max_subdivisions must be >= 10")


DEFAULT_QUAD = QuadratureControl()

_LOG_HUGE = 700.0


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0,1), got {alpha}")


def psi(alpha: float, lam: float) -> float:
    """Laplace-exponent normalisation Psi(lam) of the trimmed model.

    Psi(lam) = 1 + alpha * int_0^1 (1 - e^{-lam z}) z^{-alpha-1} dz,
    reduced by parts to the incomplete-gamma form
    e^{-lam} + lam^alpha Gamma(1-alpha) P(1-alpha, lam), which also makes
    the sandwich  1 v lam^a int_0^lam e^-z z^-a dz <= Psi <= 1 + lam^a
    Gamma(1-a)  immediate.
    """
    _check_alpha(alpha)
    if not lam > 0:
        raise DomainError(f"lam must be > 0, got {lam}")
    return math.exp(-lam) + lam**alpha * _gamma(1.0 - alpha) * float(
        gammainc(1.0 - alpha, lam)
    )


def psi_bounds(alpha: float, lam: float) -> tuple[float, float]:
    """(lower, upper) sandwich for Psi(lam)."""
    g1 = _gamma(1.0 - alpha)
    lower = max(1.0, lam**alpha * g1 * float(gammainc(1.0 - alpha, lam)))
    upper = 1.0 + lam**alpha * g1
    return lower, upper


def _psi_logs(alpha: float, log_lam: float) -> tuple[float, float]:
    """(log Psi, log(Psi - 1)) at lam = exp(log_lam), safe for any log_lam."""
    g1 = _gamma(1.0 - alpha)
    if log_lam > _LOG_HUGE:
        v = alpha * log_lam + math.log(g1)
        return v, v
    if log_lam < -34.0:
        # Psi - 1 ~ alpha lam / (1 - alpha), relative error O(lam)
        lpm1 = math.log(alpha / (1.0 - alpha)) + log_lam
        return math.log1p(math.exp(lpm1)), lpm1
    lam = math.exp(log_lam)
    a_part = lam**alpha * g1 * float(gammainc(1.0 - alpha, lam))
    pm1 = math.expm1(-lam) + a_part
    return math.log1p(pm1), math.log(pm1)


def big_f(alpha: float, j: int, lam: float) -> float:
    """F_j(lam) = (alpha/j!) * int_0^lam e^{-z} z^{j-alpha-1} dz.

    Monotone increasing in lam with F_j(inf) = alpha Gamma(j-alpha) / j!.
    """
    _check_alpha(alpha)
    if j < 1:
        raise DomainError(f"j must be >= 1, got {j}")
    if not lam > 0:
        raise DomainError(f"lam must be > 0, got {lam}")
    a = j - alpha
    return float(
        math.exp(math.log(alpha) + gammaln(a) - gammaln(j + 1.0)) * gammainc(a, lam)
    )


def _log_big_f_vec(alpha: float, n: int, log_lam: float) -> np.ndarray:
    """log F_j(lam) for j = 1..n at lam = exp(log_lam), underflow-safe."""
    js = np.arange(1, n + 1, dtype=float)
    a = js - alpha
    base = math.log(alpha) + gammaln(a) - gammaln(js + 1.0)
    if log_lam > _LOG_HUGE:
        return base
    lam = math.exp(log_lam)
    if log_lam >= math.log(0.5):
        p = gammainc(a, lam)
        with np.errstate(divide="ignore"):
            return base + np.log(p)
    # small-lam series: gamma(a, lam) = lam^a sum_i (-lam)^i / (i! (a+i))
    acc = np.zeros(n)
    term = np.ones(n)
    for i in range(0, 80):
        acc += term / (a + i)
        term *= -lam / (i + 1.0)
        if np.max(np.abs(term)) < 1e-20:
            break
    return math.log(alpha) - gammaln(js + 1.0) + a * log_lam + np.log(acc)


def ewens_log_pmf(theta: float, spec: FrequencySpectrum) -> float:
    """log of the Ewens sampling-formula probability of a spectrum."""
    if not theta > 0:
        raise DomainError(f"theta must be > 0, got {theta}")
    n, k = spec.n, spec.k
    val = (
        gammaln(n + 1.0)
        + gammaln(theta)
        + k * math.log(theta)
        - gammaln(n + theta)
    )
    for j, mj in enumerate(spec.m, start=1):
        if mj:
            val -= gammaln(mj + 1.0) + mj * math.log(j)
    return float(val)


def ewens_pmf(theta: float, spec: FrequencySpectrum) -> float:
    """P(M_n = m, K_n = k) under the Ewens model:
    n! Gamma(theta) theta^k / Gamma(n+theta) * prod_j (1/m_j!) (1/j)^{m_j}."""
    return math.exp(ewens_log_pmf(theta, spec))


def stable_pd_log_pmf(alpha: float, spec: FrequencySpectrum) -> float:
    _check_alpha(alpha)
    n, k = spec.n, spec.k
    g1 = math.lgamma(1.0 - alpha)
    val = (
        math.log(n)
        + gammaln(float(k))
        - math.log(alpha)
        + k * (math.log(alpha) - g1)
    )
    for j, mj in enumerate(spec.m, start=1):
        if mj:
            val += mj * (gammaln(j - alpha) - gammaln(j + 1.0)) - gammaln(mj + 1.0)
    return float(val)


def stable_pd_pmf(alpha: float, spec: FrequencySpectrum) -> float:
    """P(M_n = m, K_n = k) under the one-parameter stable model:
    n (k-1)!/alpha * (alpha/Gamma(1-alpha))^k
    * prod_j (1/m_j!) (Gamma(j-alpha)/j!)^{m_j}."""
    return math.exp(stable_pd_log_pmf(alpha, spec))


def pitman_log_pmf(alpha: float, theta: float, spec: FrequencySpectrum) -> float:
    _check_alpha(alpha)
    if not theta > -alpha:
        raise DomainError(f"theta must exceed -alpha, got {theta}")
    n, k = spec.n, spec.k
    g1 = math.lgamma(1.0 - alpha)
    ta = theta / alpha
    val = (
        gammaln(n + 1.0)
        - math.log(alpha)
        + k * (math.log(alpha) - g1)
        + gammaln(ta + k)
        - gammaln(ta + 1.0)
        + gammaln(theta + 1.0)
        - gammaln(n + theta)
    )
    for j, mj in enumerate(spec.m, start=1):
        if mj:
            val += mj * (gammaln(j - alpha) - gammaln(j + 1.0)) - gammaln(mj + 1.0)
    return float(val)


def pitman_pmf(alpha: float, theta: float, spec: FrequencySpectrum) -> float:
    """P(M_n = m, K_n = k) under the two-parameter model."""
    return math.exp(pitman_log_pmf(alpha, theta, spec))


# ---------------------------------------------------------------------------
# Trimmed model, route A: direct weight form
# ---------------------------------------------------------------------------


def _trimmed_log_integrand(
    alpha: float, r: float, spec: FrequencySpectrum, log_lam: float
) -> float:
    k = spec.k
    log_psi, _ = _psi_logs(alpha, log_lam)
    lfs = _log_big_f_vec(alpha, spec.n, log_lam)
    val = (
        gammaln(r + k)
        - gammaln(r)
        + alpha * k * log_lam
        - (r + k) * log_psi
    )
    for j, mj in enumerate(spec.m, start=1):
        if mj:
            val += mj * lfs[j - 1] - gammaln(mj + 1.0)
    return float(val)


def _split_quadrature(log_integrand, alpha: float, r: float, ctl: QuadratureControl):
    """n-free part of both trimmed representations:
    int_0^inf h(lam) dlam/lam with h = exp(log_integrand(log lam)).

    Left of lam = 1 in t = log lam; right of 1 under u = lam^{-alpha r},
    which maps the power tail h ~ lam^{-alpha r} to a bounded integrand.
    """
    ar = alpha * r

    def left(t):
        v = log_integrand(t)
        return math.exp(v) if v > -745.0 else 0.0

    def right(u):
        log_lam = -math.log(u) / ar
        v = log_integrand(log_lam) + ar * log_lam
        return math.exp(v) if v > -745.0 else 0.0

    import warnings
    from scipy.integrate import IntegrationWarning

    with warnings.catch_warnings():
        # roundoff warnings are expected at these tolerances; the returned
        # error estimates are checked explicitly below
        warnings.simplefilter("ignore", IntegrationWarning)
        i1, e1 = quad(
            left, -np.inf, 0.0, epsabs=0.05 * ctl.abs_tol,
            epsrel=0.1 * ctl.rel_tol, limit=ctl.max_subdivisions,
        )
        i2, e2 = quad(
            right, 0.0, 1.0, epsabs=0.05 * ctl.abs_tol,
            epsrel=0.1 * ctl.rel_tol, limit=ctl.max_subdivisions,
        )
    i2 /= ar
    e2 /= ar
    total, err = i1 + i2, e1 + e2
    if err > max(ctl.abs_tol, ctl.rel_tol * abs(total)):
        raise QuadratureError(
            f"trimmed-model quadrature error {err:.2e} exceeds tolerance "
            f"(value {total:.3e})"
        )
    return total


def trimmed_pmf_integral(
    alpha: float,
    r: float,
    spec: FrequencySpectrum,
    ctl: QuadratureControl = DEFAULT_QUAD,
) -> float:
    """Trimmed-model P(M_n = m, K_n = k) through the direct weight form."""
    _check_alpha(alpha)
    if not r > 0:
        raise DomainError(f"r must be > 0, got {r}")
    val = _split_quadrature(
        lambda t: _trimmed_log_integrand(alpha, r, spec, t), alpha, r, ctl
    )
    return spec.n * val


# ---------------------------------------------------------------------------
# Trimmed model, route B: multinomial / negative-binomial form
# ---------------------------------------------------------------------------

_GL24 = leggauss(24)


def _num_z_cap(n: int) -> float:
    # beyond this, sum_{j<=n} z^{j-1-alpha} e^-z / j! is below 1e-18
    return n + 45.0 + 10.0 * math.sqrt(n + 1.0)


@lru_cache(maxsize=200_000)
def _ell_log(alpha: float, n: int, log_lam: float) -> float:
    """log ell_n(lam), with

    ell_n(lam) = int_0^lam sum_{j<=n} (z^j/j!) z^{-alpha-1} e^{-z} dz
               / int_0^lam (1 - e^{-z}) z^{-alpha-1} dz  (<= 1).

    Both integrals are evaluated directly: term-by-term power series over
    [0, min(lam,1)] and Gauss-Legendre panels beyond, with the
    denominator's z^{-alpha-1} tail beyond z = 50 added in closed form.
    Near lam = 0 the ratio approaches 1 and is computed as
    log1p(-tail/denominator) from the j > n tail series, avoiding
    cancellation.
    """
    if log_lam <= 0.0:  # lam <= 1: pure series zone
        lam = math.exp(log_lam)
        # denominator series: sum_{k>=1} (-1)^{k+1} lam^{k-alpha}/(k! (k-alpha))
        # and the j>n tail of the numerator; scale both by lam^{alpha-1}
        # so everything is finite for tiny lam.
        den_s = 0.0
        c = 1.0  # (-1)^{k-1} lam^{k-1} / k!
        for k in range(1, 200):
            den_s += c / (k - alpha)
            c *= -lam / (k + 1.0)
            if abs(c) < 1e-20 * abs(den_s):
                break
        # tail (scaled by lam^{alpha-1}): sum_{j>n} (lam^{j-1}/j!)
        #   * sum_i (-lam)^i / (i! (j-alpha+i))
        tail_s = 0.0
        lead = math.exp((n) * log_lam - gammaln(n + 2.0))  # lam^n/(n+1)!
        for j in range(n + 1, n + 120):
            inner = 0.0
            t = 1.0
            for i in range(0, 80):
                inner += t / (j - alpha + i)
                t *= -lam / (i + 1.0)
                if abs(t) < 1e-20:
                    break
            tail_s += lead * inner
            lead *= lam / (j + 1.0)
            if lead < 1e-22 * max(tail_s, 1e-300):
                break
        return math.log1p(-tail_s / den_s)

    # lam > 1: series over [0,1] plus panel quadrature
    lam = math.exp(min(log_lam, _LOG_HUGE))
    den1 = 0.0
    c = 1.0
    for k in range(1, 200):
        den1 += c / (k - alpha)
        c *= -1.0 / (k + 1.0)
        if abs(c) < 1e-20 * abs(den1):
            break
    num1 = 0.0
    for j in range(1, n + 1):
        inner = 0.0
        t = 1.0
        for i in range(0, 120):
            inner += t / (j - alpha + i)
            t *= -1.0 / (i + 1.0)
            if abs(t) < 1e-22:
                break
        num1 += math.exp(-gammaln(j + 1.0)) * inner

    xs, ws = _GL24
    js = np.arange(1, n + 1, dtype=float)
    jfac = np.exp(-gammaln(js + 1.0))

    def num_integrand(z):
        zz = z[:, None]
        return (np.power(zz, js[None, :] - 1.0 - alpha) * jfac[None, :]).sum(
            axis=1
        ) * np.exp(-z)

    z_hi_num = min(lam, _num_z_cap(n))
    num2 = 0.0
    if z_hi_num > 1.0:
        edges = np.linspace(1.0, z_hi_num, max(3, int(z_hi_num)) + 1)
        a_, b_ = edges[:-1, None], edges[1:, None]
        nodes = 0.5 * (a_ + b_) + 0.5 * (b_ - a_) * xs[None, :]
        wts = 0.5 * (b_ - a_) * ws[None, :]
        num2 = float(np.sum(num_integrand(nodes.ravel()) * wts.ravel()))

    z_hi_den = min(lam, 50.0)
    den2 = 0.0
    if z_hi_den > 1.0:
        edges = np.linspace(1.0, z_hi_den, max(3, int(z_hi_den)) + 1)
        a_, b_ = edges[:-1, None], edges[1:, None]
        nodes = 0.5 * (a_ + b_) + 0.5 * (b_ - a_) * xs[None, :]
        wts = 0.5 * (b_ - a_) * ws[None, :]
        vals = (1.0 - np.exp(-nodes.ravel())) * nodes.ravel() ** (-1.0 - alpha)
        den2 = float(np.sum(vals * wts.ravel()))
    den3 = 0.0
    if log_lam > math.log(50.0):
        # int_50^lam z^{-1-alpha} dz, the e^{-z} part being < 1e-21
        den3 = (50.0 ** (-alpha) - math.exp(-alpha * log_lam)) / alpha
    return math.log(num1 + num2) - math.log(den1 + den2 + den3)


def _trimmed_log_integrand_negbin(
    alpha: float, r: float, spec: FrequencySpectrum, log_lam: float
) -> float:
    n, k = spec.n, spec.k
    log_psi, log_psi_m1 = _psi_logs(alpha, log_lam)
    lfs = _log_big_f_vec(alpha, n, log_lam)
    log_sum_f = float(np.logaddexp.reduce(lfs))
    val = k * _ell_log(alpha, n, log_lam)
    # multinomial weight
    val += gammaln(k + 1.0)
    for j, mj in enumerate(spec.m, start=1):
        if mj:
            val += mj * (lfs[j - 1] - log_sum_f) - gammaln(mj + 1.0)
    # negative binomial weight
    val += (
        gammaln(r + k)
        - gammaln(r)
        - gammaln(k + 1.0)
        + k * (log_psi_m1 - log_psi)
        - r * log_psi
    )
    return float(val)


def trimmed_pmf_negbin(
    alpha: float,
    r: float,
    spec: FrequencySpectrum,
    ctl: QuadratureControl = DEFAULT_QUAD,
) -> float:
    """Trimmed-model P(M_n = m, K_n = k) through the mixed
    multinomial / negative-binomial representation."""
    _check_alpha(alpha)
    if not r > 0:
        raise DomainError(f"r must be > 0, got {r}")
    val = _split_quadrature(
        lambda t: _trimmed_log_integrand_negbin(alpha, r, spec, t), alpha, r, ctl
    )
    return spec.n * val


def ell_n(alpha: float, n: int, lam: float) -> float:
    """The tilt factor ell_n(lam) <= 1 of the mixed representation."""
    _check_alpha(alpha)
    if not lam > 0:
        raise DomainError(f"lam must be > 0, got {lam}")
    return math.exp(_ell_log(alpha, n, math.log(lam)))


# ---------------------------------------------------------------------------
# Finite-n spectrum proportions and tables
# ---------------------------------------------------------------------------


def gamma_ratio_terms(alpha: float, n: int) -> np.ndarray:
    """Gamma(j - alpha) / j! for j = 1..n, by the stable ratio recurrence
    t_{j+1} = t_j (j - alpha) / (j + 1)."""
    _check_alpha(alpha)
    js = np.arange(1, n, dtype=float)
    ratios = (js - alpha) / (js + 1.0)
    out = np.empty(n)
    out[0] = _gamma(1.0 - alpha)
    if n > 1:
        out[1:] = out[0] * np.cumprod(ratios)
    return out


def q_jn_diag(
    alpha: float, n: int, J: int, lam: float | None = None
) -> np.ndarray:
    """Finite-n spectrum proportions q_{jn}, j = 1..J.

    With ``lam`` given: q_{jn} = F_j(lam n) / sum_{l<=n} F_l(lam n).
    Without: the gamma-ratio version
    q_{jn} = (Gamma(j-alpha)/j!) / sum_{l<=n} Gamma(l-alpha)/l!,
    which converges to q_j = alpha Gamma(j-alpha)/(j! Gamma(1-alpha)).
    """
    _check_alpha(alpha)
    if J > n:
        raise DomainError(f"J={J} must not exceed n={n}")
    if lam is None:
        terms = gamma_ratio_terms(alpha, n)
        return terms[:J] / terms.sum()
    if not lam > 0:
        raise DomainError(f"lam must be > 0, got {lam}")
    js = np.arange(1, n + 1, dtype=float)
    a = js - alpha
    log_f = math.log(alpha) + gammaln(a) - gammaln(js + 1.0)
    with np.errstate(divide="ignore"):
        log_f = log_f + np.log(gammainc(a, lam * n))
    log_f -= log_f.max()
    f = np.exp(log_f)
    return f[:J] / f.sum()


def spectrum_pmf(model: ModelSpec, spec: FrequencySpectrum,
                 ctl: QuadratureControl = DEFAULT_QUAD) -> float:
    """Model-dispatching pmf of one spectrum."""
    if isinstance(model, Ewens):
        return ewens_pmf(model.theta, spec)
    if isinstance(model, StablePD):
        return stable_pd_pmf(model.alpha, spec)
    if isinstance(model, PitmanYor):
        return pitman_pmf(model.alpha, model.theta, spec)
    if isinstance(model, TrimmedStable):
        return trimmed_pmf_integral(model.alpha, model.r, spec, ctl)
    raise DomainError(f"unknown model {model!r}")


def build_partition_table(
    model: ModelSpec,
    n: int,
    ctl: QuadratureControl = DEFAULT_QUAD,
    use_negbin: bool = False,
) -> PartitionTable:
    """Exhaustive pmf table for one model at sample size n.

    For the trimmed model ``use_negbin`` selects the mixed representation
    instead of the direct weight form.
    """
    rows = enumerate_spectra(n)
    if isinstance(model, TrimmedStable) and use_negbin:
        pmf = np.array(
            [trimmed_pmf_negbin(model.alpha, model.r, s, ctl) for s in rows]
        )
    else:
        pmf = np.array([spectrum_pmf(model, s, ctl) for s in rows])
    return PartitionTable(n=n, model_label=model.label, rows=rows, pmf=pmf)
