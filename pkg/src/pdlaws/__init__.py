"""Exact laws, samplers and limit distributions for Poisson-Dirichlet
species-sampling models (Ewens, stable, Pitman-Yor, trimmed stable)."""

__version__ = "0.1.0"

from .errors import (
    AtomBudgetError,
    DomainError,
    EmptyBinError,
    EnumerationCapError,
    InversionError,
    NumericalError,
    PdLawsError,
    QuadratureError,
    SeriesDivergenceError,
)
from .models import Ewens, ModelSpec, PitmanYor, StablePD, TrimmedStable, model_from_args
from .spectra import (
    ENUMERATION_CAP,
    FrequencySpectrum,
    PartitionTable,
    enumerate_spectra,
    spectrum_from_counts,
)

__all__ = [
    "AtomBudgetError",
    "DomainError",
    "EmptyBinError",
    "ENUMERATION_CAP",
    "EnumerationCapError",
    "Ewens",
    "FrequencySpectrum",
    "InversionError",
    "ModelSpec",
    "NumericalError",
    "PartitionTable",
    "PdLawsError",
    "PitmanYor",
    "QuadratureError",
    "SeriesDivergenceError",
    "StablePD",
    "TrimmedStable",
    "enumerate_spectra",
    "model_from_args",
    "spectrum_from_counts",
]
