"""Partition-function and matching decoders for the toric and surface codes."""

from .codes import CodeKind, CodeSpec, build_code, class_representative, logical_effect, syndrome
from .decoders import EnsembleMWPMDecoder, MWPMDecoder, PartitionFunctionDecoder
from .noise import RateVector, sample_error, sample_rates, uniform_rates
from .pfaffian import class_log_partitions, torus_log_partition
from .statmech import build_rbim, nishimori_temperature

__version__ = "0.1.0"

__all__ = [
    "CodeKind", "CodeSpec", "build_code", "class_representative", "logical_effect", "syndrome",
    "EnsembleMWPMDecoder", "MWPMDecoder", "PartitionFunctionDecoder",
    "RateVector", "sample_error", "sample_rates", "uniform_rates",
    "class_log_partitions", "torus_log_partition", "build_rbim", "nishimori_temperature",
]
