"""creatorsim: a discrete-time content-platform simulator with strategic
creator agents, parametric user agents, and swappable two-stage recommenders.
"""

from .core import SimConfig
from .harness import RunArtifacts, compare, report, run_simulation
from .ingest import Dataset, SynthParams, load_dataset, synth_dataset

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "RunArtifacts",
    "SimConfig",
    "SynthParams",
    "compare",
    "load_dataset",
    "report",
    "run_simulation",
    "synth_dataset",
    "__version__",
]
