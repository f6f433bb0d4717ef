"""Reproducible samplers of (M_n, K_n) for all four models.

Randomness contract: every draw d of a batch is a pure function of
(seed, stream, d).  Draw keys and per-draw generators come from
counter-based Philox blocks indexed by d, so a batch is byte-identical
however it is sharded across workers, and any slice can be regenerated
in isolation.

Samplers:

* ``crp_sample``             -- sequential prediction rule covering the
                                Ewens (alpha = 0), stable (theta = 0) and
                                Pitman-Yor laws.
* ``trimmed_stable_sample``  -- ordered-jump construction of the trimmed
                                model for integer r: simulate the largest
                                jumps of the stable subordinator, delete
                                the first r, renormalise, and sample the
                                individuals multinomially.
* ``trimmed_exact_sample``   -- inverse-CDF draw from the exact partition
                                table; works for any real r > 0 at small n.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gamma as _gamma

from ._crp import crp_batch
from .errors import AtomBudgetError, DomainError, EnumerationCapError
from .exact import QuadratureControl, build_partition_table
from .models import Ewens, ModelSpec, PitmanYor, StablePD, TrimmedStable
from .spectra import ENUMERATION_CAP, FrequencySpectrum, spectrum_from_counts

GENERATOR_ID = "philox4x64+splitmix64/v1"

#: default number of explicit jump atoms in the trimmed-stable sampler
DEFAULT_ATOM_BUDGET = 100_000

#: per-draw probability bound on two individuals sharing one unmodelled
#: dust atom; the budget escalates until the a-priori bound is below this
DUST_COLLISION_TOL = 1e-10

_BUDGET_CAP = 1 << 22


@dataclass(frozen=True)
class RngSeed:
    """(seed, stream) pair that fully determines all draws."""

    seed: int
    stream: int = 0

    def __post_init__(self) -> None:
        for name in ("seed", "stream"):
            v = getattr(self, name)
            if not 0 <= v < 2**64:
                raise DomainError(f"{name} must be a 64-bit unsigned integer")


def _philox(seed: RngSeed, block: int, draw: int) -> np.random.Generator:
    """Generator for one (draw, purpose-block); counter-indexed, so draws
    never share Philox output whatever order they are produced in."""
    bg = np.random.Philox(
        counter=np.array([0, 0, block, draw], dtype=np.uint64),
        key=np.array([seed.seed, seed.stream], dtype=np.uint64),
    )
    return np.random.Generator(bg)


def draw_keys(seed: RngSeed, count: int, block: int = 0) -> np.ndarray:
    """64-bit splitmix keys for draws 0..count-1; keys[d] depends only on
    (seed, stream, block, d)."""
    out = np.empty(count, dtype=np.uint64)
    chunk = 1 << 16
    for lo in range(0, count, chunk):
        hi = min(count, lo + chunk)
        # one Philox block per chunk keyed by the chunk index keeps key
        # generation O(count) while preserving per-draw addressability
        g = _philox(seed, block, lo // chunk + (1 << 32))
        out[lo:hi] = g.integers(0, 2**64, size=hi - lo, dtype=np.uint64)
    return out


@dataclass
class SampleBatch:
    """Batch of draws with J-truncated sufficient statistics.

    ``ms[d, j-1]`` counts species with exactly j representatives in draw
    d (j <= J); ``ks[d]`` is the total species count of draw d.
    """

    model: ModelSpec
    n: int
    count: int
    J: int
    ms: np.ndarray
    ks: np.ndarray
    seed: RngSeed
    generator: str = GENERATOR_ID
    meta: dict = field(default_factory=dict)

    def header(self) -> dict:
        return {
            "model": self.model.label,
            "n": self.n,
            "count": self.count,
            "J": self.J,
            "seed": self.seed.seed,
            "stream": self.seed.stream,
            "generator": self.generator,
            "meta": self.meta,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"m_{j}" for j in range(1, self.J + 1)] + ["k"])
        for d in range(self.count):
            w.writerow(list(self.ms[d]) + [self.ks[d]])
        return buf.getvalue()

    def header_json(self) -> str:
        return json.dumps(self.header(), sort_keys=True, indent=2)


def crp_sample(alpha: float, theta: float, n: int, seed: RngSeed) -> FrequencySpectrum:
    """One draw of the species partition of n individuals grown by the
    sequential prediction rule: individual i+1 joins an existing species
    of size s with probability (s - alpha)/(i + theta) and founds a new
    one with probability (theta + k alpha)/(i + theta)."""
    _check_crp_params(alpha, theta, n)
    keys = draw_keys(seed, 1)
    m, _ = crp_batch(n, float(alpha), float(theta), keys, n)
    return FrequencySpectrum(n, tuple(int(v) for v in m[0]))


def _check_crp_params(alpha: float, theta: float, n: int) -> None:
    if not 0.0 <= alpha < 1.0:
        raise DomainError(f"alpha must lie in [0,1), got {alpha}")
    if not theta > -alpha:
        raise DomainError(f"theta must exceed -alpha, got {theta}")
    if alpha == 0.0 and theta == 0.0 and n > 1:
        raise DomainError("(alpha, theta) = (0, 0) only admits n = 1")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")


def _dust_stats(alpha: float, atom_budget: int, r: int) -> tuple[float, float]:
    """A-priori scale of the smallest kept jump and expected dust mass."""
    g1 = _gamma(1.0 - alpha)
    gam_last = r + atom_budget  # E Gamma_{r+B}
    x_b = (gam_last * g1) ** (-1.0 / alpha)
    mu = alpha * x_b ** (1.0 - alpha) / ((1.0 - alpha) * g1)
    return x_b, mu


def dust_collision_bound(alpha: float, n: int, r: int, atom_budget: int) -> float:
    """A-priori bound on two individuals sharing one unmodelled dust atom.

    The unsampled jumps below the last explicit atom are modelled as
    singleton dust (each hit founds its own species), which assigns all
    mass; the only model error is a within-dust collision, bounded by
    n^2 x_B mu / (2 S^2) with a conservative total-mass floor S = 0.1.
    """
    x_b, mu = _dust_stats(alpha, atom_budget, r)
    return n * n * x_b * mu / (2.0 * 0.1 * 0.1)


def resolve_atom_budget(
    alpha: float,
    n: int,
    r: int,
    atom_budget: int,
    collision_tol: float = DUST_COLLISION_TOL,
) -> int:
    """Escalate the atom budget until the dust-collision bound holds."""
    budget = atom_budget
    while budget <= _BUDGET_CAP:
        if dust_collision_bound(alpha, n, r, budget) <= collision_tol:
            return budget
        budget *= 4
    raise AtomBudgetError(
        f"atom budget beyond {_BUDGET_CAP} needed for alpha={alpha}, n={n}; "
        "use the exact-table sampler at small n instead"
    )


def trimmed_stable_sample(
    alpha: float,
    r: int,
    n: int,
    atom_budget: int = DEFAULT_ATOM_BUDGET,
    seed: RngSeed = RngSeed(0),
    _draw: int = 0,
) -> FrequencySpectrum:
    """One draw from the trimmed-stable model by jump simulation.

    Ordered jumps are (Gamma_i * Gamma(1-alpha))^{-1/alpha} for standard
    Poisson arrival times Gamma_i (the jump-intensity tail is
    x^{-alpha}/Gamma(1-alpha)); the r largest are deleted, the next
    ``atom_budget`` jumps are kept explicitly, and the remaining dust is
    carried as its expected mass with every dust hit founding a new
    singleton species.
    """
    _check_alpha_r(alpha, r)
    budget = resolve_atom_budget(alpha, n, r, atom_budget)
    g = _philox(seed, 1, _draw)
    m, _k = _trimmed_draw(alpha, r, n, budget, g)
    return spectrum_from_counts(m)


def _check_alpha_r(alpha: float, r: int) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0,1), got {alpha}")
    if not (isinstance(r, (int, np.integer)) and r >= 1):
        raise DomainError(
            f"jump construction needs integer r >= 1, got {r!r}; "
            "r = 0 is the untrimmed model (use crp_sample(alpha, 0))"
        )


def _jump_sizes(alpha: float, arrivals: np.ndarray, g1: float) -> np.ndarray:
    ag = arrivals * g1
    if alpha == 0.5:
        return 1.0 / (ag * ag)
    return ag ** (-1.0 / alpha)


def _trimmed_draw(alpha, r, n, budget, g) -> tuple[list[int], int]:
    g1 = _gamma(1.0 - alpha)
    arrivals = np.cumsum(g.standard_exponential(r + budget))
    kept = _jump_sizes(alpha, arrivals[r:], g1)
    x_b = kept[-1]
    mu = alpha * x_b ** (1.0 - alpha) / ((1.0 - alpha) * g1)
    total = kept.sum() + mu
    cdf = np.cumsum(kept) / total
    u = g.random(n)
    idx = np.searchsorted(cdf, u)
    counts = np.bincount(idx[idx < budget], minlength=0)
    dust_hits = int((idx >= budget).sum())
    species = [int(c) for c in counts if c > 0] + [1] * dust_hits
    return species, len(species)


#: draws per vectorized chunk of the jump sampler; each chunk is one
#: Philox block, so the sharding unit is a chunk
_JUMP_CHUNK = 256


def trimmed_exact_sample(
    alpha: float,
    r: float,
    n: int,
    seed: RngSeed = RngSeed(0),
    _draw: int = 0,
) -> FrequencySpectrum:
    """One exact inverse-CDF draw from the trimmed model's partition
    table (any real r > 0; n within the enumeration cap)."""
    if n > ENUMERATION_CAP:
        raise EnumerationCapError(
            f"n={n} exceeds the enumeration cap {ENUMERATION_CAP}"
        )
    ms, ks, cdf = _cached_trimmed_table(float(alpha), float(r), n)
    g = _philox(seed, 2, _draw)
    i = min(int(np.searchsorted(cdf, g.random())), len(ks) - 1)
    return FrequencySpectrum(n, tuple(int(v) for v in ms[i]))


@lru_cache(maxsize=64)
def _cached_trimmed_table(alpha: float, r: float, n: int):
    table = build_partition_table(
        TrimmedStable(alpha, r), n, QuadratureControl(abs_tol=1e-10, rel_tol=1e-8),
        use_negbin=True,
    )
    cdf = np.cumsum(table.pmf)
    cdf[-1] = max(cdf[-1], 1.0)
    ms = np.array([s.m for s in table.rows], dtype=np.int64)
    ks = table.ks
    return ms, ks, cdf


def sample_batch(
    model: ModelSpec,
    n: int,
    count: int,
    J: int = 0,
    seed: RngSeed = RngSeed(0),
    workers: int = 1,
    atom_budget: int = DEFAULT_ATOM_BUDGET,
    trimmed_sampler: str = "auto",
    collision_tol: float = DUST_COLLISION_TOL,
) -> SampleBatch:
    """``count`` independent draws of (m_1..m_J, k) under ``model``.

    J = 0 keeps the full spectrum.  Results are identical for any
    ``workers`` (draw d is a pure function of (seed, stream, d)).  For
    the trimmed model ``trimmed_sampler`` picks the route: "jumps"
    (integer r, any n), "table" (any r, n within the enumeration cap) or
    "auto" (jumps when r is a positive integer, table otherwise).
    """
    if count < 0:
        raise DomainError("count must be >= 0")
    if n < 1:
        raise DomainError("n must be >= 1")
    J_eff = n if J == 0 else min(J, n)
    meta: dict = {}
    ms = np.zeros((count, J_eff), dtype=np.int64)
    ks = np.zeros(count, dtype=np.int64)

    if isinstance(model, (Ewens, StablePD, PitmanYor)):
        alpha = 0.0 if isinstance(model, Ewens) else model.alpha
        theta = model.theta if not isinstance(model, StablePD) else 0.0
        _check_crp_params(alpha, theta, max(n, 1))
        keys = draw_keys(seed, count)

        def run_crp(lo: int, hi: int) -> None:
            m, k = crp_batch(n, float(alpha), float(theta), keys[lo:hi], J_eff)
            ms[lo:hi] = m
            ks[lo:hi] = k

        _run_sharded(run_crp, count, workers)

    elif isinstance(model, TrimmedStable):
        r = model.r
        if trimmed_sampler == "auto":
            trimmed_sampler = (
                "jumps" if float(r).is_integer() and r >= 1 else "table"
            )
        if trimmed_sampler == "jumps":
            if not (float(r).is_integer() and r >= 1):
                raise DomainError("jump sampler needs integer r >= 1")
            r_int = int(r)
            budget = resolve_atom_budget(
                model.alpha, n, r_int, atom_budget, collision_tol
            )
            meta["sampler"] = "jumps"
            meta["atom_budget"] = budget
            meta["dust_collision_bound"] = dust_collision_bound(
                model.alpha, n, r_int, budget
            )
            g1 = _gamma(1.0 - model.alpha)
            alpha_t = model.alpha
            nchunks = (count + _JUMP_CHUNK - 1) // _JUMP_CHUNK

            def run_jump_chunks(clo: int, chi: int) -> None:
                for c in range(clo, chi):
                    g = _philox(seed, 1, c)
                    ex = g.standard_exponential((_JUMP_CHUNK, r_int + budget))
                    u = g.random((_JUMP_CHUNK, n))
                    arrivals = np.cumsum(ex, axis=1)
                    kept = _jump_sizes(alpha_t, arrivals[:, r_int:], g1)
                    x_b = kept[:, -1]
                    mu = alpha_t * x_b ** (1.0 - alpha_t) / ((1.0 - alpha_t) * g1)
                    cdf = np.cumsum(kept, axis=1)
                    total = cdf[:, -1] + mu
                    cdf /= total[:, None]
                    d0 = c * _JUMP_CHUNK
                    rows = min(_JUMP_CHUNK, count - d0)
                    for i in range(rows):
                        idx = np.searchsorted(cdf[i], u[i])
                        d = d0 + i
                        hits = idx[idx < budget]
                        dust = n - hits.size
                        k = dust
                        if hits.size:
                            _, cnts = np.unique(hits, return_counts=True)
                            k += cnts.size
                            small = cnts[cnts <= J_eff]
                            if small.size:
                                mm = np.bincount(small, minlength=J_eff + 1)
                                ms[d] += mm[1 : J_eff + 1]
                        ms[d, 0] += dust
                        ks[d] = k

            _run_sharded(run_jump_chunks, nchunks, workers)
        elif trimmed_sampler == "table":
            if n > ENUMERATION_CAP:
                raise EnumerationCapError(
                    "table sampling requires n within the enumeration cap"
                )
            t_ms, t_ks, cdf = _cached_trimmed_table(model.alpha, float(r), n)
            meta["sampler"] = "exact-table"

            def run_table(lo: int, hi: int) -> None:
                for d in range(lo, hi):
                    g = _philox(seed, 2, d)
                    i = int(np.searchsorted(cdf, g.random()))
                    i = min(i, len(t_ks) - 1)
                    ms[d] = t_ms[i, :J_eff]
                    ks[d] = t_ks[i]

            _run_sharded(run_table, count, workers)
        else:
            raise DomainError(f"unknown trimmed_sampler {trimmed_sampler!r}")
    else:
        raise DomainError(f"unknown model {model!r}")

    return SampleBatch(
        model=model, n=n, count=count, J=J_eff, ms=ms, ks=ks, seed=seed, meta=meta
    )


def _run_sharded(fn, count: int, workers: int) -> None:
    if count == 0:
        return
    if workers <= 1:
        fn(0, count)
        return
    bounds = np.linspace(0, count, workers + 1).astype(int)
    with ThreadPoolExecutor(max_workers=workers) as ex:
        futs = [
            ex.submit(fn, int(lo), int(hi))
            for lo, hi in zip(bounds[:-1], bounds[1:])
            if hi > lo
        ]
        for f in futs:
            f.result()
