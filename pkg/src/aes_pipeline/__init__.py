"""AES-128 cipher, analytical pipeline cost model, and task-level simulator
for an eleven-stage parallel-pipelined AES architecture."""

from .aes_core import decrypt_block, encrypt_block, key_expand
from .cost_model import (
    DECRYPT, ENCRYPT, PipelineConfig, flowshop_makespan, metrics,
    paper_pipeline_time, sequential_time, stage_times,
)
from .sched_sim import build_stage_graph, simulate, simulate_functional
from .timing import CostParams, TimeQuantum

__version__ = "0.1.0"

__all__ = [
    "CostParams", "TimeQuantum", "PipelineConfig",
    "ENCRYPT", "DECRYPT",
    "encrypt_block", "decrypt_block", "key_expand",
    "sequential_time", "stage_times", "paper_pipeline_time",
    "flowshop_makespan", "metrics",
    "build_stage_graph", "simulate", "simulate_functional",
    "__version__",
]
