"""Simulator tests: graph structure, schedule spans, determinism,
work conservation, and functional byte-level equivalence."""

import random
from fractions import Fraction

import pytest

from aes_pipeline import aes_core, sched_sim
from aes_pipeline.cost_model import (
    DECRYPT, ENCRYPT, ConfigError, PipelineConfig, flowshop_makespan,
    stage_times,
)
from aes_pipeline.sched_sim import (
    FINAL, INITIAL, NOP, SBOX, SHIFT, STANDARD, XOR, CrossCheckError,
    build_stage_graph, cross_validate, format_trace, schedule_stage,
    simulate, simulate_functional,
)
from aes_pipeline.timing import CostParams

P = CostParams()

FIPS_KEY = bytes.fromhex("000102030405060708090a0b0c0d0e0f")
FIPS_PLAIN = bytes.fromhex("00112233445566778899aabbccddeeff")
FIPS_CIPHER = bytes.fromhex("69c4e0d86a7b0430d8cdb78070b4c55a")


def kind_counts(graph):
    counts = {}
    for t in graph.tasks:
        counts[t.kind] = counts.get(t.kind, 0) + 1
    return counts


# --- graph structure ----------------------------------------------------------

def test_initial_stage_is_sixteen_xors():
    g = build_stage_graph(ENCRYPT, INITIAL, 1, False)
    assert kind_counts(g) == {XOR: 16}
    g = build_stage_graph(ENCRYPT, INITIAL, 8, True)
    assert kind_counts(g) == {XOR: 16}
    assert {t.pe for t in g.tasks} == set(range(8))


def test_standard_stage_operation_counts():
    # Encryption: 16 substitutions, 48 row shifts + 32 mixing shifts,
    # 64 mixing XORs + 16 key XORs.
    g = build_stage_graph(ENCRYPT, STANDARD, 1, False)
    assert kind_counts(g) == {SBOX: 16, SHIFT: 48 + 32, XOR: 64 + 16}
    # Decryption: 192 mixing shifts, 112 chain XORs + 48 combine XORs.
    g = build_stage_graph(DECRYPT, STANDARD, 1, False)
    assert kind_counts(g) == {SBOX: 16, SHIFT: 48 + 192, XOR: 112 + 48 + 16}


def test_final_stage_operation_counts():
    g = build_stage_graph(ENCRYPT, FINAL, 4, True)
    assert kind_counts(g) == {SBOX: 16, SHIFT: 48, XOR: 16}


def test_work_is_conserved_across_pe_counts():
    # Distributing a stage over PEs never changes the total operation cost.
    for mode, pes in ((ENCRYPT, (1, 2, 8, 32)), (DECRYPT, (1, 4, 16, 64))):
        for kind in (INITIAL, STANDARD, FINAL):
            works = {build_stage_graph(mode, kind, m, m > 1, P).work()
                     for m in pes}
            assert len(works) == 1
    # And it equals the serial stage service time.
    st = stage_times(ENCRYPT, 1, False, P)
    assert build_stage_graph(ENCRYPT, STANDARD, 8, True, P).work() == \
        st.t_standard.ticks


def test_overhead_tasks_only_when_configured():
    params = CostParams(t_ov=Fraction(3))
    g = build_stage_graph(ENCRYPT, STANDARD, 4, True, params)
    assert kind_counts(g)[NOP] == 16      # one combine per element
    g = build_stage_graph(ENCRYPT, STANDARD, 4, True, P)
    assert NOP not in kind_counts(g)
    g = build_stage_graph(ENCRYPT, STANDARD, 1, False, params)
    assert NOP not in kind_counts(g)      # no cross-PE combine when serial


def test_graph_rejects_impossible_groupings():
    with pytest.raises(ConfigError):
        build_stage_graph(DECRYPT, STANDARD, 2, True)   # quads need 4 PEs
    with pytest.raises(ConfigError):
        build_stage_graph(DECRYPT, STANDARD, 6, True)
    with pytest.raises(ConfigError):
        build_stage_graph(ENCRYPT, STANDARD, 64, True)  # > 16 pairs
    with pytest.raises(ConfigError):
        build_stage_graph("xts", STANDARD, 1, False)
    with pytest.raises(ConfigError):
        build_stage_graph(ENCRYPT, "middle", 1, False)


def test_edges_reference_earlier_tasks_only():
    g = build_stage_graph(DECRYPT, STANDARD, 16, True)
    assert all(d < t for d, t in g.edges)


# --- schedule spans vs the analytical stage times --------------------------------

@pytest.mark.parametrize("mode,pes", [(ENCRYPT, (1, 2, 4, 8, 16, 32)),
                                      (DECRYPT, (1, 4, 8, 16, 32, 64))])
def test_stage_spans_match_stage_times(mode, pes):
    for m_r in pes:
        for inner in (False, True):
            st = stage_times(mode, m_r, inner, P)
            expected = {INITIAL: st.t_initial.ticks,
                        STANDARD: st.t_standard.ticks,
                        FINAL: st.t_final.ticks}
            for kind, want in expected.items():
                sched = schedule_stage(build_stage_graph(mode, kind, m_r,
                                                         inner, P))
                assert sched.span == want, (mode, kind, m_r, inner)


def test_stage_spans_match_with_overhead_and_byte_sub():
    params = CostParams(t_ov=Fraction(5, 2), t_byte_sub=Fraction(8))
    for mode, m_r in ((ENCRYPT, 8), (DECRYPT, 16)):
        st = stage_times(mode, m_r, True, params)
        for kind, want in ((INITIAL, st.t_initial.ticks),
                           (STANDARD, st.t_standard.ticks),
                           (FINAL, st.t_final.ticks)):
            sched = schedule_stage(build_stage_graph(mode, kind, m_r, True,
                                                     params))
            assert sched.span == want


# --- pipeline simulation -----------------------------------------------------------

def test_simulate_matches_flowshop():
    for mode, m_r in ((ENCRYPT, 1), (ENCRYPT, 4), (DECRYPT, 16)):
        for L in (1, 3, 10):
            cfg = PipelineConfig(mode, L, m_r, m_r > 1, P)
            result = simulate(cfg)
            assert result.makespan == flowshop_makespan(cfg)
            ok, sim_t, analytic = cross_validate(cfg)
            assert ok and sim_t == analytic


def test_simulate_reports_spans_and_busy():
    cfg = PipelineConfig(ENCRYPT, 10, 2, True, P)
    result = simulate(cfg)
    st = stage_times(ENCRYPT, 2, True, P)
    assert [s.ticks for s in result.stage_spans] == \
        [t.ticks for t in st.as_list()]
    assert len(result.per_stage_busy) == 11
    # Utilization is a fraction of the makespan, never above one.
    for stage in result.pe_utilization:
        for u in stage:
            assert 0 <= u <= 1


def test_simulator_is_deterministic():
    cfg = PipelineConfig(DECRYPT, 5, 8, True, P)
    a = simulate(cfg, collect_trace=True)
    b = simulate(cfg, collect_trace=True)
    assert a.trace == b.trace
    assert format_trace(a) == format_trace(b)
    assert a.makespan == b.makespan
    assert len(a.trace) > 0


# --- functional mode -----------------------------------------------------------------

def test_functional_reproduces_published_vector():
    cfg = PipelineConfig(ENCRYPT, 1, 8, True, P)
    _, outputs = simulate_functional(cfg, [FIPS_PLAIN], FIPS_KEY)
    assert outputs == [FIPS_CIPHER]
    cfg = PipelineConfig(DECRYPT, 1, 16, True, P)
    _, outputs = simulate_functional(cfg, [FIPS_CIPHER], FIPS_KEY)
    assert outputs == [FIPS_PLAIN]


def test_functional_serial_and_parallel_agree():
    rng = random.Random(33)
    key = bytes(rng.randrange(256) for _ in range(16))
    blocks = [bytes(rng.randrange(256) for _ in range(16)) for _ in range(4)]
    keys = aes_core.key_expand(key)
    expected = [aes_core.encrypt_block(b, keys) for b in blocks]
    for m_r, inner in ((1, False), (2, True), (32, True)):
        cfg = PipelineConfig(ENCRYPT, 4, m_r, inner, P)
        _, outputs = simulate_functional(cfg, blocks, key)
        assert outputs == expected


def test_functional_rejects_wrong_block_count():
    cfg = PipelineConfig(ENCRYPT, 2, 1, False, P)
    with pytest.raises(ConfigError):
        simulate_functional(cfg, [FIPS_PLAIN], FIPS_KEY)


def test_functional_cross_check_catches_divergence(monkeypatch):
    # Break the simulator's row-shift semantics; the stage-by-stage check
    # against the reference cipher must notice.
    monkeypatch.setattr(sched_sim, "_apply_shiftrow", lambda state, inv: None)
    cfg = PipelineConfig(ENCRYPT, 1, 1, False, P)
    with pytest.raises(CrossCheckError) as err:
        simulate_functional(cfg, [FIPS_PLAIN], FIPS_KEY)
    assert err.value.block_index == 0
    assert err.value.stage == 1
