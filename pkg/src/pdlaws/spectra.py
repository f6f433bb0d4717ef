"""Species frequency spectra and their exhaustive enumeration.

A sample of ``n`` individuals classified into species is summarised by the
frequency-of-frequencies vector ``m = (m_1, ..., m_n)``, where ``m_j``
counts the species represented exactly ``j`` times.  Valid spectra satisfy
``sum(j * m_j) == n``; the number of distinct species is ``k = sum(m_j)``.
For fixed ``n`` the spectra are exactly the integer partitions of ``n``
(written in multiplicity notation), so exhaustive enumeration is feasible
for small ``n`` and serves as the brute-force oracle for every exact law
in this package.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import DomainError, EnumerationCapError

#: Largest n for which exact tables are built.  p(30) = 5604 rows keeps the
#: oracle exhaustive yet fast; larger n is the samplers' job.
ENUMERATION_CAP = 30


@dataclass(frozen=True)
class FrequencySpectrum:
    """Frequency-of-frequencies vector ``m`` for a sample of size ``n``.

    ``m[j-1]`` is the number of species with exactly ``j`` representatives.
    """

    n: int
    m: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DomainError(f"sample size must be >= 1, got {self.n}")
        if len(self.m) != self.n:
            raise DomainError(
                f"spectrum length {len(self.m)} does not match n={self.n}"
            )
        if any(mj < 0 for mj in self.m):
            raise DomainError("spectrum entries must be nonnegative")
        if sum(j * mj for j, mj in enumerate(self.m, start=1)) != self.n:
            raise DomainError(f"sum of j*m_j must equal n={self.n}, got {self.m}")

    @property
    def k(self) -> int:
        """Number of distinct species, ``sum(m_j)``."""
        return sum(self.m)

    def truncated(self, J: int) -> tuple[int, ...]:
        """First ``J`` entries ``(m_1, ..., m_J)``."""
        return self.m[:J]


def spectrum_from_counts(counts: Sequence[int]) -> FrequencySpectrum:
    """Build the spectrum of a list of per-species abundance counts."""
    counts = [c for c in counts if c > 0]
    n = sum(counts)
    m = [0] * n
    for c in counts:
        m[c - 1] += 1
    return FrequencySpectrum(n, tuple(m))


def _partitions_desc(n: int, largest: int) -> Iterator[list[int]]:
    # partitions of n into parts <= largest, parts nonincreasing
    if n == 0:
        yield []
        return
    for part in range(min(n, largest), 0, -1):
        for rest in _partitions_desc(n - part, part):
            yield [part] + rest


def enumerate_spectra(n: int) -> list[FrequencySpectrum]:
    """All frequency spectra of a sample of size ``n``.

    Returns exactly p(n) spectra (the integer-partition count), each
    appearing once, in lexicographic order of the m-vector.  Raises
    :class:`EnumerationCapError` beyond :data:`ENUMERATION_CAP`.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if n > ENUMERATION_CAP:
        raise EnumerationCapError(
            f"n={n} exceeds the enumeration cap {ENUMERATION_CAP}"
        )
    out = []
    for parts in _partitions_desc(n, n):
        m = [0] * n
        for p in parts:
            m[p - 1] += 1
        out.append(FrequencySpectrum(n, tuple(m)))
    out.sort(key=lambda s: s.m)
    return out


@dataclass
class PartitionTable:
    """Exhaustive pmf table of (m, k) for one model at one sample size.

    Rows enumerate every spectrum of size ``n`` exactly once, in the
    deterministic order of :func:`enumerate_spectra`; ``pmf[i]`` is the
    model probability of ``rows[i]``.
    """

    n: int
    model_label: str
    rows: list[FrequencySpectrum]
    pmf: np.ndarray

    @property
    def ks(self) -> np.ndarray:
        return np.array([s.k for s in self.rows])

    def normalization_residual(self) -> float:
        """``sum(pmf) - 1``; should vanish up to quadrature tolerance."""
        return float(self.pmf.sum() - 1.0)

    def total_variation(self, other: "PartitionTable") -> float:
        """TV distance to another table on the same partition space."""
        if self.n != other.n:
            raise DomainError("tables have different n")
        return 0.5 * float(np.abs(self.pmf - other.pmf).sum())

    def k_marginal(self) -> np.ndarray:
        """P(K_n = k) for k = 1..n."""
        out = np.zeros(self.n)
        for s, p in zip(self.rows, self.pmf):
            out[s.k - 1] += p
        return out

    def to_csv(self) -> str:
        """CSV with columns m_1..m_n, k, pmf (17 significant digits)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"m_{j}" for j in range(1, self.n + 1)] + ["k", "pmf"])
        for s, p in zip(self.rows, self.pmf):
            w.writerow(list(s.m) + [s.k, format(p, ".17g")])
        return buf.getvalue()

    def to_json(self) -> str:
        obj = {
            "n": self.n,
            "model": self.model_label,
            "rows": [
                {"m": list(s.m), "k": s.k, "pmf": p}
                for s, p in zip(self.rows, self.pmf)
            ],
            "normalization_residual": self.normalization_residual(),
        }
        return json.dumps(obj, sort_keys=True, indent=2)
