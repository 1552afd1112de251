"""Deterministic discrete-event simulation of the eleven-stage pipeline.

Each stage is a task graph over its processing elements: byte substitution
and row shifting run sequentially on PE 0, column mixing is split across
cooperating PE groups (pairs for encryption, quads for decryption), and
round-key addition is spread over all PEs. Tasks are list-scheduled in
construction (topological) order, which is the deterministic tie-break.

The same graphs can carry real byte semantics: shift tasks then perform
a reducing doubling in GF(2^8), XOR tasks XOR bytes, substitution tasks
apply the S-box. Functional runs are checked stage by stage against the
reference cipher in aes_core.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from . import aes_core
from .cost_model import (
    DECRYPT, ENCRYPT, GROUP_SIZE, NUM_STAGES, STANDARD_ROUNDS,
    ConfigError, PipelineConfig, stage_times,
)
from .timing import CostParams, TimeQuantum

INITIAL = "initial"
STANDARD = "standard"
FINAL = "final"
STAGE_KINDS = (INITIAL, STANDARD, FINAL)

XOR = "XOR"
SHIFT = "SHIFT"
SBOX = "SBOX"
NOP = "NOP"


class CrossCheckError(RuntimeError):
    """Functional simulation disagreed with the reference cipher."""

    def __init__(self, block_index: int, stage: int, byte_index: int,
                 got: int, expected: int):
        self.block_index = block_index
        self.stage = stage
        self.byte_index = byte_index
        super().__init__(
            f"functional mismatch: block {block_index}, stage {stage}, "
            f"byte {byte_index}: got {got:#04x}, expected {expected:#04x}")


@dataclass(frozen=True)
class Task:
    id: int
    kind: str
    cost: Fraction
    pe: int
    deps: tuple[int, ...] = ()
    # Byte-level effect for functional mode; None for timing-only tasks.
    action: Optional[tuple] = None


@dataclass
class TaskGraph:
    stage_kind: str
    mode: str
    n_pes: int
    params: CostParams
    tasks: list[Task] = field(default_factory=list)

    def add(self, kind: str, pe: int, deps: Sequence[int] = (),
            action: Optional[tuple] = None) -> int:
        cost = {
            XOR: self.params.t_xor,
            SHIFT: self.params.t_shift,
            # 16 substitution tasks share the transformation budget.
            SBOX: self.params.t_byte_sub / 16,
            NOP: self.params.t_ov,
        }[kind]
        task = Task(len(self.tasks), kind, cost, pe, tuple(deps), action)
        self.tasks.append(task)
        return task.id

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(d, t.id) for t in self.tasks for d in t.deps]

    def work(self) -> Fraction:
        """Total task cost excluding combine overhead."""
        return sum((t.cost for t in self.tasks if t.kind != NOP), Fraction(0))


@dataclass(frozen=True)
class StageSchedule:
    graph: TaskGraph
    span: Fraction
    # (start, finish, task) in task-id order.
    entries: tuple[tuple[Fraction, Fraction, Task], ...]
    pe_busy: tuple[Fraction, ...]


@dataclass
class SimResult:
    makespan: TimeQuantum
    stage_spans: list[TimeQuantum]
    per_stage_busy: list[TimeQuantum]
    pe_utilization: list[list[Fraction]]
    trace: tuple[tuple[Fraction, int, int, str, int], ...] = ()
    outputs: Optional[list[bytes]] = None


# --- graph construction ---------------------------------------------------

def _element_terms(mode: str) -> list[int]:
    # Cyclic first row of the mixing matrix: output element (r, c) combines
    # multiples of input rows r, r+1, r+2, r+3 of the same column.
    return [0x02, 0x03, 0x01, 0x01] if mode == ENCRYPT else [0x0E, 0x0B, 0x0D, 0x09]


def _add_enc_element(g: TaskGraph, elem: int, srcs: list[int], pes: tuple[int, ...],
                     after: Sequence[int]) -> int:
    """2*b ^ 3*b' ^ b'' ^ b''' on one PE (serial) or a PE pair.

    Returns the id of the task producing the element value; the result is
    left in temp register ("u", elem).
    """
    f1, f2, f3, f4 = srcs
    u = ("u", elem)
    v = ("v", elem)
    if len(pes) == 1:
        pe = pes[0]
        g.add(SHIFT, pe, after, ("xt_s", u, f1))
        g.add(SHIFT, pe, (), ("xt_s", v, f2))
        g.add(XOR, pe, (), ("xor_ts", v, f2))
        g.add(XOR, pe, (), ("xor_tt", u, v))
        g.add(XOR, pe, (), ("xor_ts", u, f3))
        return g.add(XOR, pe, (), ("xor_ts", u, f4))
    pk, pk1 = pes
    # Partner computes 3*b' (shift then XOR) and hands the result over;
    # the lead PE shifts 2*b and folds the remaining terms, consuming the
    # cross-PE operand last so its own chain never stalls.
    t_v = g.add(SHIFT, pk1, after, ("xt_s", v, f2))
    t_v = g.add(XOR, pk1, (t_v,), ("xor_ts", v, f2))
    g.add(SHIFT, pk, after, ("xt_s", u, f1))
    g.add(XOR, pk, (), ("xor_ts", u, f3))
    g.add(XOR, pk, (), ("xor_ts", u, f4))
    last = g.add(XOR, pk, (t_v,), ("xor_tt", u, v))
    if g.params.t_ov:
        last = g.add(NOP, pk, (last,))
    return last


def _add_dec_element(g: TaskGraph, elem: int, srcs: list[int], pes: tuple[int, ...],
                     after: Sequence[int]) -> int:
    """0E*c ^ 0B*c' ^ 0D*c'' ^ 09*c''' on one PE (serial) or a PE quad.

    Each multiplier is evaluated as a doubling chain; result lands in
    temp register ("a", elem).
    """
    f1, f2, f3, f4 = srcs
    a = ("a", elem)
    b = ("b", elem)
    d = ("d", elem)
    n = ("n", elem)
    if len(pes) == 1:
        pes = (pes[0],) * 4
    pa, pb, pd, pn = pes
    # 0E: x(x(x(c) ^ c) ^ c)
    g.add(SHIFT, pa, after, ("xt_s", a, f1))
    g.add(XOR, pa, (), ("xor_ts", a, f1))
    g.add(SHIFT, pa, (), ("xt_t", a))
    g.add(XOR, pa, (), ("xor_ts", a, f1))
    t_a = g.add(SHIFT, pa, (), ("xt_t", a))
    # 0B: x(x(x(c)) ^ c) ^ c
    g.add(SHIFT, pb, after, ("xt_s", b, f2))
    g.add(SHIFT, pb, (), ("xt_t", b))
    g.add(XOR, pb, (), ("xor_ts", b, f2))
    g.add(SHIFT, pb, (), ("xt_t", b))
    t_b = g.add(XOR, pb, (), ("xor_ts", b, f2))
    # 0D: x(x(x(c) ^ c)) ^ c
    g.add(SHIFT, pd, after, ("xt_s", d, f3))
    g.add(XOR, pd, (), ("xor_ts", d, f3))
    g.add(SHIFT, pd, (), ("xt_t", d))
    g.add(SHIFT, pd, (), ("xt_t", d))
    t_d = g.add(XOR, pd, (), ("xor_ts", d, f3))
    # 09: x(x(x(c))) ^ c
    g.add(SHIFT, pn, after, ("xt_s", n, f4))
    g.add(SHIFT, pn, (), ("xt_t", n))
    g.add(SHIFT, pn, (), ("xt_t", n))
    t_n = g.add(XOR, pn, (), ("xor_ts", n, f4))
    # Combine tree: lead PE folds the 0B term, the third PE merges 0D and
    # 09, then the lead PE folds that merge.
    t1 = g.add(XOR, pa, (t_a, t_b), ("xor_tt", a, b))
    t2 = g.add(XOR, pd, (t_d, t_n), ("xor_tt", d, n))
    last = g.add(XOR, pa, (t1, t2), ("xor_tt", a, d))
    if g.params.t_ov and pa != pb:
        last = g.add(NOP, pa, (last,))
    return last


def build_stage_graph(mode: str, stage_kind: str, pe_per_stage: int,
                      inner_parallel: bool,
                      params: CostParams = CostParams()) -> TaskGraph:
    """Task graph for one pipeline stage.

    Serial mode (or a single PE) places every task on PE 0 in dataflow
    order. Inner-parallel mode distributes key addition over all PEs and
    column mixing over PE pairs/quads, elements assigned round-robin by
    column-major index.
    """
    if mode not in (ENCRYPT, DECRYPT):
        raise ConfigError(f"unknown mode {mode!r}")
    if stage_kind not in STAGE_KINDS:
        raise ConfigError(f"unknown stage kind {stage_kind!r}")
    if pe_per_stage < 1:
        raise ConfigError("PEs per stage must be positive")
    parallel = inner_parallel and pe_per_stage > 1
    group = GROUP_SIZE[mode]
    if parallel:
        if pe_per_stage % group:
            raise ConfigError(
                f"{mode} needs groups of {group} cooperating PEs; "
                f"{pe_per_stage} PEs per stage cannot be grouped")
        if pe_per_stage > 16 * group:
            raise ConfigError(
                f"at most {16 * group} PEs per stage are usable for {mode}")

    g = TaskGraph(stage_kind=stage_kind, mode=mode, n_pes=pe_per_stage,
                  params=params)

    if stage_kind == INITIAL:
        for f in range(16):
            pe = f % pe_per_stage if parallel else 0
            g.add(XOR, pe, (), ("ark_s", f))
        return g

    # Byte substitution and row shifting are sequential on PE 0.
    for f in range(16):
        g.add(SBOX, 0, (), ("sbox", f))
    for i in range(47):
        g.add(SHIFT, 0, ())
    last_shift = g.add(SHIFT, 0, (), ("shiftrow",))

    if stage_kind == FINAL:
        for f in range(16):
            pe = f % pe_per_stage if parallel else 0
            g.add(XOR, pe, (last_shift,), ("ark_s", f))
        return g

    # Column mixing: 16 elements in column-major order.
    n_groups = pe_per_stage // group if parallel else 1
    add_element = _add_enc_element if mode == ENCRYPT else _add_dec_element
    elem_done = []
    acc_reg = {}
    for idx in range(16):
        c, r = divmod(idx, 4)
        srcs = [((r + j) % 4) * 4 + c for j in range(4)]
        if parallel:
            grp = idx % n_groups
            pes = tuple(group * grp + j for j in range(group))
        else:
            pes = (0,)
        elem_done.append(add_element(g, idx, srcs, pes, (last_shift,)))
        acc_reg[r * 4 + c] = ("u", idx) if mode == ENCRYPT else ("a", idx)

    # Key addition reads the mixed elements; barrier on the whole phase.
    barrier = tuple(elem_done)
    for f in range(16):
        pe = f % pe_per_stage if parallel else 0
        g.add(XOR, pe, barrier, ("ark_acc", f, acc_reg[f]))
    return g


# --- scheduling -----------------------------------------------------------

def schedule_stage(graph: TaskGraph) -> StageSchedule:
    """List-schedule the graph: each task starts as soon as its inputs and
    its PE are free, in task-id order."""
    pe_free = [Fraction(0)] * graph.n_pes
    finish: list[Fraction] = [Fraction(0)] * len(graph.tasks)
    entries = []
    span = Fraction(0)
    busy = [Fraction(0)] * graph.n_pes
    for t in graph.tasks:
        start = pe_free[t.pe]
        for d in t.deps:
            if finish[d] > start:
                start = finish[d]
        end = start + t.cost
        finish[t.id] = end
        pe_free[t.pe] = end
        if t.kind != NOP:
            busy[t.pe] += t.cost
        if end > span:
            span = end
        entries.append((start, end, t))
    return StageSchedule(graph=graph, span=span, entries=tuple(entries),
                         pe_busy=tuple(busy))


def _stage_kind_sequence() -> list[str]:
    return [INITIAL] + [STANDARD] * STANDARD_ROUNDS + [FINAL]


def _build_schedules(config: PipelineConfig) -> dict[str, StageSchedule]:
    return {kind: schedule_stage(build_stage_graph(
        config.mode, kind, config.pe_per_stage, config.inner_parallel,
        config.params)) for kind in STAGE_KINDS}


def simulate(config: PipelineConfig, collect_trace: bool = False) -> SimResult:
    """Run the pipeline: block i enters stage s once stage s is idle and
    block i has left stage s-1 (unbounded inter-stage buffers)."""
    scheds = _build_schedules(config)
    kinds = _stage_kind_sequence()
    spans = [scheds[k].span for k in kinds]

    stage_free = [Fraction(0)] * NUM_STAGES
    entry_times: list[list[Fraction]] = []
    done = Fraction(0)
    for _ in range(config.num_blocks):
        t = Fraction(0)
        entries = []
        for s in range(NUM_STAGES):
            start = max(t, stage_free[s])
            t = start + spans[s]
            stage_free[s] = t
            entries.append(start)
        entry_times.append(entries)
        done = t
    makespan = done

    per_stage_busy = []
    pe_util = []
    for s, kind in enumerate(kinds):
        busy = scheds[kind].pe_busy
        per_stage_busy.append(TimeQuantum(config.num_blocks * sum(busy)))
        denom = makespan if makespan else Fraction(1)
        pe_util.append([config.num_blocks * b / denom for b in busy])

    trace: tuple = ()
    if collect_trace:
        events = []
        for i, entries in enumerate(entry_times):
            for s, kind in enumerate(kinds):
                base = entries[s]
                for start, _end, task in scheds[kind].entries:
                    events.append((base + start, s, task.pe, task.kind, i))
        events.sort(key=lambda e: (e[0], e[1], e[2], e[4]))
        trace = tuple(events)

    return SimResult(
        makespan=TimeQuantum(makespan),
        stage_spans=[TimeQuantum(sp) for sp in spans],
        per_stage_busy=per_stage_busy,
        pe_utilization=pe_util,
        trace=trace,
    )


# --- functional execution -------------------------------------------------

def _key_byte(key: bytes, f: int) -> int:
    # Flat state index f = row*4 + col; round keys are in wire order
    # (column-major), so the matching key byte sits at row + 4*col.
    return key[(f // 4) + 4 * (f % 4)]


def _apply_shiftrow(state: list[int], inverse: bool) -> None:
    old = state[:]
    for r in range(4):
        for c in range(4):
            src = (c + r) % 4 if not inverse else (c - r) % 4
            state[r * 4 + c] = old[r * 4 + src]


def _run_stage_values(graph: TaskGraph, state: list[int], key: bytes,
                      mode: str) -> None:
    """Execute the graph's byte actions in schedule order, in place."""
    box = aes_core.SBOX if mode == ENCRYPT else aes_core.INV_SBOX
    inverse_rows = mode == DECRYPT
    tmp: dict = {}
    for t in graph.tasks:
        a = t.action
        if a is None:
            continue
        op = a[0]
        if op == "xt_s":
            tmp[a[1]] = aes_core.xtime(state[a[2]])
        elif op == "xt_t":
            tmp[a[1]] = aes_core.xtime(tmp[a[1]])
        elif op == "xor_ts":
            tmp[a[1]] ^= state[a[2]]
        elif op == "xor_tt":
            tmp[a[1]] ^= tmp[a[2]]
        elif op == "sbox":
            state[a[1]] = box[state[a[1]]]
        elif op == "shiftrow":
            _apply_shiftrow(state, inverse_rows)
        elif op == "ark_s":
            f = a[1]
            state[f] ^= _key_byte(key, f)
        elif op == "ark_acc":
            f = a[1]
            state[f] = tmp[a[2]] ^ _key_byte(key, f)
        else:
            raise AssertionError(f"unknown action {op!r}")


def _state_to_flat(s: aes_core.State) -> list[int]:
    return [s.rows[r][c] for r in range(4) for c in range(4)]


def simulate_functional(config: PipelineConfig, blocks: Sequence[bytes],
                        key: bytes,
                        collect_trace: bool = False) -> tuple[SimResult, list[bytes]]:
    """Timing simulation plus real byte semantics; every stage output is
    cross-checked against the reference cipher."""
    if len(blocks) != config.num_blocks:
        raise ConfigError(
            f"expected {config.num_blocks} blocks, got {len(blocks)}")
    round_keys = aes_core.key_expand(key)
    if config.mode == ENCRYPT:
        stage_keys = round_keys
        reference = [aes_core.encrypt_stage_states(b, round_keys) for b in blocks]
    else:
        stage_keys = aes_core.equivalent_decrypt_schedule(round_keys)
        reference = [aes_core.decrypt_stage_states(b, stage_keys) for b in blocks]

    graphs = {kind: build_stage_graph(config.mode, kind, config.pe_per_stage,
                                      config.inner_parallel, config.params)
              for kind in STAGE_KINDS}
    kinds = _stage_kind_sequence()

    outputs = []
    for i, block in enumerate(blocks):
        if len(block) != 16:
            raise ConfigError(f"block {i} must be 16 bytes")
        state = _state_to_flat(aes_core.State.from_block(bytes(block)))
        for s, kind in enumerate(kinds):
            _run_stage_values(graphs[kind], state, stage_keys[s], config.mode)
            expected = _state_to_flat(reference[i][s])
            if state != expected:
                for j, (got, want) in enumerate(zip(state, expected)):
                    if got != want:
                        raise CrossCheckError(i, s, j, got, want)
        out = aes_core.State([state[r * 4:r * 4 + 4] for r in range(4)]).to_block()
        outputs.append(out)

    result = simulate(config, collect_trace=collect_trace)
    result.outputs = outputs
    return result, outputs


def format_trace(result: SimResult) -> str:
    """Line-delimited trace records: time stage pe kind block."""
    lines = [f"{ev[0]}\t{ev[1]}\t{ev[2]}\t{ev[3]}\t{ev[4]}" for ev in result.trace]
    return "\n".join(lines) + ("\n" if lines else "")


def cross_validate(config: PipelineConfig) -> tuple[bool, TimeQuantum, TimeQuantum]:
    """Compare simulated makespan with the analytical flow-shop makespan."""
    from .cost_model import flowshop_makespan
    sim = simulate(config)
    analytic = flowshop_makespan(config)
    return sim.makespan == analytic, sim.makespan, analytic
