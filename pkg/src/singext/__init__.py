"""Self-adjoint extensions of singularly perturbed operators in Pontryagin-space
and linear-relation models, with numerical verification of their identities."""

__version__ = "0.1.0"

from .amodel import AModel, DomainElementA, ThetaRelation, WeylSample
from .bmodel import BModel, BmaxGraphElement, DeltaPair, build_delta, eval_rhat
from .errors import (
    ConditionError,
    ConfigurationError,
    ConsistencyError,
    DomainError,
    ExtensionSpectrumError,
    InvariantFailure,
    NumericalError,
    PoleError,
    SingExtError,
    SpectralPointError,
    TruncationError,
)
from .gram import GramSpec, antitriangular_gram, check_a2, check_bmodel, check_gacomm
from .model_space import ModelVector, SingularFamily, krein_q, metric
from .nevanlinna import build_pick, check_symmetry_and_strictness, count_negative_squares
from .spectral import ScaleVector, SpectralOperator, pair

__all__ = [
    "AModel",
    "BModel",
    "BmaxGraphElement",
    "ConditionError",
    "ConfigurationError",
    "ConsistencyError",
    "DeltaPair",
    "DomainElementA",
    "DomainError",
    "ExtensionSpectrumError",
    "GramSpec",
    "InvariantFailure",
    "ModelVector",
    "NumericalError",
    "PoleError",
    "ScaleVector",
    "SingExtError",
    "SingularFamily",
    "SpectralOperator",
    "SpectralPointError",
    "ThetaRelation",
    "TruncationError",
    "WeylSample",
    "antitriangular_gram",
    "build_delta",
    "build_pick",
    "check_a2",
    "check_bmodel",
    "check_gacomm",
    "check_symmetry_and_strictness",
    "count_negative_squares",
    "eval_rhat",
    "krein_q",
    "metric",
    "pair",
]
