"""Analytical timing model for the eleven-stage pipelined AES design.

Stage times are assembled from the primitive operation counts of each
transformation (never from pre-summed totals), so the headline constants
(880 XOR-units per encrypted block, 1984 per decrypted block) fall out of
the component formulas.

Two pipeline completion times are provided:

* paper_pipeline_time -- L*t_initial + 9*t_standard + t_final, the
  published closed form, reproduced as-is;
* flowshop_makespan -- the completion time of a physical linear pipeline
  with unbounded inter-stage buffers, where the bottleneck stage gates
  throughput. The two agree for a single block and diverge for L > 1
  whenever the standard-round time exceeds the initial-round time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .timing import CostParams, DEFAULT_PARAMS, TimeQuantum, as_fraction

NUM_STAGES = 11
STANDARD_ROUNDS = 9

ENCRYPT = "encrypt"
DECRYPT = "decrypt"
MODES = (ENCRYPT, DECRYPT)

# Inner-parallel group sizes: pairs cooperate on an encryption column
# element, quads on a decryption one.
GROUP_SIZE = {ENCRYPT: 2, DECRYPT: 4}

# PE counts per stage the published formulas are stated for.
PAPER_PE_RANGE = {ENCRYPT: (2, 32), DECRYPT: (4, 64)}


class ConfigError(ValueError):
    """Invalid experiment-point parameters."""


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class PipelineConfig:
    """One experiment point: mode, block count, PEs per stage, flags."""

    mode: str
    num_blocks: int
    pe_per_stage: int = 1
    inner_parallel: bool = False
    params: CostParams = field(default_factory=CostParams)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not isinstance(self.num_blocks, int) or self.num_blocks < 1:
            raise ConfigError(f"block count must be a positive integer, got {self.num_blocks!r}")
        if not isinstance(self.pe_per_stage, int) or self.pe_per_stage < 1:
            raise ConfigError(f"PEs per stage must be a positive integer, got {self.pe_per_stage!r}")
        if self.inner_parallel:
            if not _is_pow2(self.pe_per_stage):
                raise ConfigError("inner parallelism requires a power-of-two PE count per stage")
            if self.pe_per_stage > PAPER_PE_RANGE[self.mode][1]:
                raise ConfigError(
                    f"inner parallelism supports at most {PAPER_PE_RANGE[self.mode][1]} "
                    f"PEs per stage for {self.mode}")

    @property
    def total_pes(self) -> int:
        return NUM_STAGES * self.pe_per_stage

    @property
    def outside_published_range(self) -> bool:
        """True when inner parallelism is requested with a PE count the
        published formulas were not stated for (still evaluated literally)."""
        if not self.inner_parallel:
            return False
        lo, hi = PAPER_PE_RANGE[self.mode]
        return not lo <= self.pe_per_stage <= hi


@dataclass(frozen=True)
class StageTimes:
    """Per-stage service times: initial key addition, standard round, final round."""

    t_initial: TimeQuantum
    t_standard: TimeQuantum
    t_final: TimeQuantum

    def as_list(self) -> list[TimeQuantum]:
        return ([self.t_initial] + [self.t_standard] * STANDARD_ROUNDS
                + [self.t_final])


@dataclass(frozen=True)
class MetricRow:
    exec_time: TimeQuantum
    speedup: Fraction
    efficiency: Fraction
    improvement: Fraction


# --- transformation costs (shift units) ---------------------------------

def add_round_key_cost(params: CostParams, pes: int = 1) -> Fraction:
    """16 XORs; distributed over PEs each one carries ceil(16/PEs) of them."""
    if pes <= 1:
        return 16 * params.t_xor
    return math.ceil(Fraction(16, pes)) * params.t_xor


def shift_row_cost(params: CostParams) -> Fraction:
    # Row shifting stays sequential: 48 shift operations.
    return 48 * params.t_shift


def mix_column_cost(params: CostParams, pes: int = 1, parallel: bool = False) -> Fraction:
    if not parallel or pes <= 1:
        # 16 column elements, each two shifts and four XORs.
        return 16 * (2 * params.t_shift + 4 * params.t_xor)
    # Two cooperating PEs per element: the slower partner shifts once and
    # XORs three times; the combine overhead is charged once per element.
    slow = params.t_shift + 3 * params.t_xor
    fast = params.t_shift + params.t_xor
    return Fraction(32, pes) * (max(slow, fast) + params.t_ov)


def inv_mix_column_cost(params: CostParams, pes: int = 1, parallel: bool = False) -> Fraction:
    if not parallel or pes <= 1:
        # 16 column elements, each twelve shifts and ten XORs.
        return 16 * (12 * params.t_shift + 10 * params.t_xor)
    # Four cooperating PEs per element; the slowest carries 3 shifts + 4 XORs.
    loads = (3 * params.t_shift + 4 * params.t_xor,
             3 * params.t_shift + 2 * params.t_xor,
             3 * params.t_shift + 3 * params.t_xor,
             3 * params.t_shift + 1 * params.t_xor)
    return Fraction(64, pes) * (max(loads) + params.t_ov)


# --- per-block and per-stage times ---------------------------------------

def sequential_time(mode: str, num_blocks: int,
                    params: CostParams = DEFAULT_PARAMS) -> TimeQuantum:
    """Single-processor time for the whole workload, built from the
    per-transformation costs."""
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    if not isinstance(num_blocks, int) or num_blocks < 1:
        raise ConfigError("block count must be a positive integer")
    ark = add_round_key_cost(params)
    sr = shift_row_cost(params)
    mix = mix_column_cost(params) if mode == ENCRYPT else inv_mix_column_cost(params)
    standard = params.t_byte_sub + sr + mix + ark
    final = params.t_byte_sub + sr + ark
    per_block = ark + STANDARD_ROUNDS * standard + final
    return TimeQuantum(num_blocks * per_block)


def stage_times(mode: str, pe_per_stage: int, inner_parallel: bool,
                params: CostParams = DEFAULT_PARAMS) -> StageTimes:
    """Service time of the initial, standard and final pipeline stages.

    With one PE per stage the inner-parallel decomposition has no partner
    to hand work to, so it degrades to the sequential stage times.
    """
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    if pe_per_stage < 1:
        raise ConfigError("PEs per stage must be positive")
    parallel = inner_parallel and pe_per_stage > 1
    pes = pe_per_stage if parallel else 1
    ark = add_round_key_cost(params, pes)
    sr = shift_row_cost(params)
    if mode == ENCRYPT:
        mix = mix_column_cost(params, pes, parallel)
    else:
        mix = inv_mix_column_cost(params, pes, parallel)
    return StageTimes(
        t_initial=TimeQuantum(ark),
        t_standard=TimeQuantum(params.t_byte_sub + sr + mix + ark),
        t_final=TimeQuantum(params.t_byte_sub + sr + ark),
    )


def paper_pipeline_time(config: PipelineConfig) -> TimeQuantum:
    """The published closed form: L*t_initial + 9*t_standard + t_final."""
    st = stage_times(config.mode, config.pe_per_stage, config.inner_parallel,
                     config.params)
    return TimeQuantum(config.num_blocks * st.t_initial.ticks
                       + STANDARD_ROUNDS * st.t_standard.ticks
                       + st.t_final.ticks)


def flowshop_makespan(config: PipelineConfig) -> TimeQuantum:
    """Completion time of the physical linear pipeline: one full traversal
    plus (L-1) cycles of the bottleneck stage."""
    st = stage_times(config.mode, config.pe_per_stage, config.inner_parallel,
                     config.params)
    traversal = (st.t_initial.ticks + STANDARD_ROUNDS * st.t_standard.ticks
                 + st.t_final.ticks)
    bottleneck = max(st.t_initial.ticks, st.t_standard.ticks, st.t_final.ticks)
    return TimeQuantum(traversal + (config.num_blocks - 1) * bottleneck)


def metrics(seq: TimeQuantum, par: TimeQuantum, pe_per_stage: int) -> MetricRow:
    """Speedup, efficiency (speedup per PE within a stage) and degree of
    improvement for a parallel time against a baseline."""
    if par.ticks <= 0:
        raise ConfigError("parallel time must be positive")
    if seq.ticks <= 0:
        raise ConfigError("baseline time must be positive")
    speedup = seq.ticks / par.ticks
    return MetricRow(
        exec_time=par,
        speedup=speedup,
        efficiency=speedup / pe_per_stage,
        improvement=(seq.ticks - par.ticks) / seq.ticks,
    )
