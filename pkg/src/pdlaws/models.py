"""Model specifications for the four species-sampling families.

A :class:`ModelSpec` is a tagged union over

* ``Ewens(theta)``             -- gamma-subordinator construction,
* ``StablePD(alpha)``          -- ranked jumps of an alpha-stable subordinator,
* ``PitmanYor(alpha, theta)``  -- two-parameter extension,
* ``TrimmedStable(alpha, r)``  -- alpha-stable jumps with the r largest removed.

The variants are kept explicit: ``PitmanYor(alpha -> 0)`` is not collapsed
to ``Ewens`` and ``TrimmedStable(r -> 0)`` is not collapsed to ``StablePD``;
those limits are verified numerically, not assumed structurally.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class Ewens:
    theta: float

    def __post_init__(self) -> None:
        if not self.theta > 0:
            raise DomainError(f"Ewens requires theta > 0, got {self.theta}")

    @property
    def label(self) -> str:
        return f"ewens(theta={self.theta:g})"


@dataclass(frozen=True)
class StablePD:
    alpha: float

    def __post_init__(self) -> None:
        if not 0 < self.alpha < 1:
            raise DomainError(f"StablePD requires alpha in (0,1), got {self.alpha}")

    @property
    def label(self) -> str:
        return f"stable(alpha={self.alpha:g})"


@dataclass(frozen=True)
class PitmanYor:
    alpha: float
    theta: float

    def __post_init__(self) -> None:
        if not 0 < self.alpha < 1:
            raise DomainError(f"PitmanYor requires alpha in (0,1), got {self.alpha}")
        if not self.theta > -self.alpha:
            raise DomainError(
                f"PitmanYor requires theta > -alpha, got theta={self.theta}"
            )

    @property
    def label(self) -> str:
        return f"pitman(alpha={self.alpha:g},theta={self.theta:g})"


@dataclass(frozen=True)
class TrimmedStable:
    alpha: float
    r: float

    def __post_init__(self) -> None:
        if not 0 < self.alpha < 1:
            raise DomainError(
                f"TrimmedStable requires alpha in (0,1), got {self.alpha}"
            )
        if not self.r > 0:
            raise DomainError(f"TrimmedStable requires r > 0, got {self.r}")

    @property
    def label(self) -> str:
        return f"trimmed(alpha={self.alpha:g},r={self.r:g})"


ModelSpec = Ewens | StablePD | PitmanYor | TrimmedStable


def model_from_args(
    model: str,
    theta: float | None = None,
    alpha: float | None = None,
    r: float | None = None,
) -> ModelSpec:
    """Build a ModelSpec from CLI-style string + parameters."""
    name = model.lower()
    if name == "ewens":
        if theta is None:
            raise DomainError("ewens requires --theta")
        return Ewens(theta)
    if name == "stable":
        if alpha is None:
            raise DomainError("stable requires --alpha")
        return StablePD(alpha)
    if name in ("pitman", "pitman-yor"):
        if alpha is None or theta is None:
            raise DomainError("pitman requires --alpha and --theta")
        return PitmanYor(alpha, theta)
    if name == "trimmed":
        if alpha is None or r is None:
            raise DomainError("trimmed requires --alpha and --r")
        return TrimmedStable(alpha, r)
    raise DomainError(f"unknown model {model!r}")
