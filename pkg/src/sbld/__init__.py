"""Spectrum-based log diagnosis.

Score the events of failing CI logs with fault-localization measures computed
from corpora of failing and passing logs, cluster similarly scored events and
present the clusters most likely to explain the failure.
"""

from .abstraction import (
    AbstractedLog,
    AbstractionConfig,
    EventVocabulary,
    MaskingRule,
    RawLog,
    Verdict,
    abstract_log,
    delineate,
    mask,
)
from .clustering import ScoredCluster, ScoredEvent, hac_complete, rank_clusters, threshold
from .diagnosis import DiagnosisReport, diagnose
from .errors import ConfigError, SBLDError, UsageError
from .kernels import BACKEND as KERNEL_BACKEND
from .spectrum import CoverageMatrix, Measure, SpectrumPrimitives, build_matrix, score, score_all

__all__ = [
    "AbstractedLog",
    "AbstractionConfig",
    "ConfigError",
    "CoverageMatrix",
    "DiagnosisReport",
    "EventVocabulary",
    "KERNEL_BACKEND",
    "MaskingRule",
    "Measure",
    "RawLog",
    "SBLDError",
    "ScoredCluster",
    "ScoredEvent",
    "SpectrumPrimitives",
    "UsageError",
    "Verdict",
    "abstract_log",
    "build_matrix",
    "delineate",
    "diagnose",
    "hac_complete",
    "mask",
    "rank_clusters",
    "score",
    "score_all",
    "threshold",
]
