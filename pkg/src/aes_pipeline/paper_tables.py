"""Published performance tables, their regeneration, and the errata audit.

The four published result tables are embedded verbatim (as printed,
including their typos). ``build_audit`` pairs every printed cell with a
recomputed value:

* execution/sequential times are recomputed from the analytical model and
  must match exactly;
* derived metrics (speedup, efficiency, improvement) are recomputed from
  the tables' *own printed* times and baselines, i.e. they audit the
  published arithmetic at its printed precision.

Cells that cannot be reconciled form the errata catalog, a fixed set the
audit must reproduce exactly: new mismatches or vanished ones are both
failures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .cost_model import (
    DECRYPT, ENCRYPT, PipelineConfig, paper_pipeline_time, sequential_time,
)
from .timing import CostParams, DEFAULT_PARAMS

EXACT = "EXACT"
ROUNDING = "ROUNDING"
ERRATA = "ERRATA"

# Tolerances for auditing the published arithmetic: two-decimal ratio
# cells may be off by up to 0.03 before being treated as typos; percent
# cells must round or truncate to the printed figure, or sit within half
# a percentage point of it.
RATIO_TOLERANCE = Fraction(3, 100)
PERCENT_TOLERANCE = Fraction(1, 2)


def _decimals(text: str) -> int:
    return len(text.split(".")[1]) if "." in text else 0


def _parse(text: str) -> Fraction:
    return Fraction(text)


def _round_half_up(x: Fraction, decimals: int) -> Fraction:
    scale = 10 ** decimals
    return Fraction(math.floor(x * scale + Fraction(1, 2)), scale)


def _truncate(x: Fraction, decimals: int) -> Fraction:
    scale = 10 ** decimals
    return Fraction(math.floor(x * scale), scale)


@dataclass(frozen=True)
class ComparisonCell:
    table: str
    row: str
    column: str
    paper_text: str
    model_value: Fraction
    status: str
    note: str = ""

    @property
    def paper_value(self) -> Fraction:
        return _parse(self.paper_text)

    @property
    def key(self) -> str:
        return f"{self.table}:{self.row}:{self.column}"

    @property
    def row_key(self) -> str:
        return f"{self.table}:{self.row}"


# --- published values, as printed ----------------------------------------
# Row tuples: (L, sequential, pipeline, improvement %).
PIPELINE_TABLES = {
    "1a": (ENCRYPT, [(10, "8800", "1024", "88"),
                     (25, "22000", "1262.5", "94.2"),
                     (40, "35200", "1556", "95.5")]),
    "3a": (DECRYPT, [(10, "19840", "1984", "90"),
                     (25, "49600", "2224", "95.5"),
                     (40, "79360", "2464", "96.8")]),
}

# Improvement-only grids: {M_r: {L: improvement %}}.
IMPROVEMENT_TABLES = {
    "1b": (ENCRYPT, {2: {10: "92", 25: "96", 40: "97"},
                     4: {10: "95", 25: "97", 40: "98.5"},
                     8: {10: "97.3", 25: "98.8", 40: "98.9"}}),
    "3b": (DECRYPT, {2: {10: "93.7", 25: "97.2", 40: "98"},
                     4: {10: "95.9", 25: "98.2", 40: "98.8"},
                     8: {10: "97.7", 25: "98.9", 40: "99"}}),
}

# Row tuples: (M_r, execution time, speedup, efficiency, improvement %).
EXECUTION_TABLES = {
    "2a": (ENCRYPT, 10, [(1, "1022", "1", "1", None),
                         (2, "696", "1.47", "0.73", "32"),
                         (4, "388", "2.63", "0.65", "62"),
                         (8, "234", "4.34", "0.53", "77")]),
    "2b": (ENCRYPT, 25, [(1, "1264", "1", "1", None),
                         (2, "815", "1.55", "0.77", "35"),
                         (4, "447.5", "2.88", "0.705", "65"),
                         (8, "264", "4.78", "0.59", "79")]),
    "2c": (ENCRYPT, 40, [(1, "1556", "1", "1", None),
                         (2, "936", "1.66", "0.89", "39.8"),
                         (4, "508", "3.06", "0.76", "67.2"),
                         (8, "292", "5.3", "0.66", "81.2")]),
    "4a": (DECRYPT, 10, [(1, "1984", "1", "1", None),
                         (2, "1248", "1.59", "0.79", "37.1"),
                         (4, "804", "2.46", "0.61", "59.5"),
                         (8, "444", "4.46", "0.56", "77.6"),
                         (16, "262", "7.57", "0.47", "86.7")]),
    "4b": (DECRYPT, 25, [(1, "2224", "1", "1", None),
                         (2, "1368", "1.62", "0.81", "38.5"),
                         (4, "864", "2.57", "0.64", "61.2"),
                         (8, "474", "4.71", "0.59", "78.7"),
                         (16, "277", "8.02", "0.50", "87.5")]),
    "4c": (DECRYPT, 40, [(1, "2464", "1", "1", None),
                         (2, "1488", "1.66", "0.81", "39.6"),
                         (4, "924", "2.67", "0.67", "62.5"),
                         (8, "504", "4.88", "0.61", "79.5"),
                         (16, "292", "8.43", "0.51", "88.1")]),
}

TABLE_ORDER = ("1a", "1b", "2a", "2b", "2c", "3a", "3b", "4a", "4b", "4c")

# The fixed errata catalog: published cells that cannot be reproduced from
# the model's equations (rows flagged by their execution/pipeline time)
# plus published derived values that disagree with the tables' own
# arithmetic.
ERRATA_CATALOG = frozenset({
    "1a:L=25", "1a:L=40",
    "2a:M_r=1",
    "2b:M_r=2", "2b:M_r=4",
    "2c:M_r=1", "2c:M_r=8",
    "3a:L=10", "3a:L=25", "3a:L=40",
    "4a:M_r=1", "4a:M_r=2", "4a:M_r=4",
    "4b:M_r=1", "4b:M_r=2", "4b:M_r=4",
    "4c:M_r=1", "4c:M_r=2", "4c:M_r=4",
    "2c:M_r=2:efficiency",
})

ERRATA_NOTES = {
    "1a:L=25": "published 1262.5 vs recomputed 1264",
    "1a:L=40": "published 1556 vs recomputed 1504",
    "2a:M_r=1": "published 1022 vs recomputed single-PE pipeline time 1024",
    "2b:M_r=2": "published 815 vs recomputed 816",
    "2b:M_r=4": "published 447.5 vs recomputed 448",
    "2c:M_r=1": "published 1556 vs recomputed 1504",
    "2c:M_r=8": "published 292 vs recomputed 294",
    "3a:L=10": "recomputed time exceeds published value by exactly 144 XOR-units",
    "3a:L=25": "recomputed time exceeds published value by exactly 144 XOR-units",
    "3a:L=40": "recomputed time exceeds published value by exactly 144 XOR-units",
    "4a:M_r=1": "published value repeats the single-block time; recomputed 2128",
    "4a:M_r=2": "two PEs cannot form a decryption quad; literal formula gives 1536",
    "4a:M_r=4": "published 804 vs recomputed 808",
    "4b:M_r=1": "published value repeats the single-block time; recomputed 2368",
    "4b:M_r=2": "two PEs cannot form a decryption quad; literal formula gives 1656",
    "4b:M_r=4": "published 864 vs recomputed 868",
    "4c:M_r=1": "published value repeats the single-block time; recomputed 2608",
    "4c:M_r=2": "two PEs cannot form a decryption quad; literal formula gives 1776",
    "4c:M_r=4": "published 924 vs recomputed 928",
    "2c:M_r=2:efficiency":
        "published 0.89; the table's own speedup over two PEs gives 0.83",
}


# --- model regeneration ----------------------------------------------------

def model_pipeline_xor(mode: str, num_blocks: int, pe_per_stage: int,
                       params: CostParams = DEFAULT_PARAMS) -> Fraction:
    """Pipeline completion time in XOR units; one PE per stage means the
    serial per-round decomposition."""
    cfg = PipelineConfig(mode=mode, num_blocks=num_blocks,
                         pe_per_stage=pe_per_stage,
                         inner_parallel=pe_per_stage > 1, params=params)
    return params.xor_units(paper_pipeline_time(cfg))


def model_sequential_xor(mode: str, num_blocks: int,
                         params: CostParams = DEFAULT_PARAMS) -> Fraction:
    return params.xor_units(sequential_time(mode, num_blocks, params))


def regenerate_tables(params: CostParams = DEFAULT_PARAMS) -> dict:
    """All four tables recomputed purely from the model; derived metrics
    use the regenerated times (baseline: same table's single-PE row)."""
    out: dict = {}
    for tid, (mode, rows) in PIPELINE_TABLES.items():
        out[tid] = []
        for L, _seq, _pipe, _imp in rows:
            seq = model_sequential_xor(mode, L, params)
            pipe = model_pipeline_xor(mode, L, 1, params)
            out[tid].append({"L": L, "seq": seq, "pipeline": pipe,
                             "improvement": (seq - pipe) / seq * 100})
    for tid, (mode, grid) in IMPROVEMENT_TABLES.items():
        out[tid] = []
        for m_r, cols in grid.items():
            row = {"M_r": m_r}
            for L in cols:
                seq = model_sequential_xor(mode, L, params)
                t = model_pipeline_xor(mode, L, m_r, params)
                row[L] = (seq - t) / seq * 100
            out[tid].append(row)
    for tid, (mode, L, rows) in EXECUTION_TABLES.items():
        base = model_pipeline_xor(mode, L, 1, params)
        out[tid] = []
        for m_r, *_ in rows:
            t = model_pipeline_xor(mode, L, m_r, params)
            speedup = base / t
            out[tid].append({"M_r": m_r, "time": t, "speedup": speedup,
                             "efficiency": speedup / m_r,
                             "improvement": (base - t) / base * 100})
    return out


# --- audit -----------------------------------------------------------------

def _time_status(paper: Fraction, model: Fraction) -> str:
    return EXACT if paper == model else ERRATA


def _derived_status(paper_text: str, value: Fraction,
                    tolerance: Fraction) -> str:
    paper = _parse(paper_text)
    if value == paper:
        return EXACT
    d = _decimals(paper_text)
    if (_round_half_up(value, d) == paper or _truncate(value, d) == paper
            or abs(value - paper) <= tolerance):
        return ROUNDING
    return ERRATA


def _cell(table: str, row: str, column: str, paper_text: str,
          model_value: Fraction, status: str) -> ComparisonCell:
    note = ""
    if status == ERRATA:
        key = f"{table}:{row}:{column}"
        note = ERRATA_NOTES.get(key) or ERRATA_NOTES.get(f"{table}:{row}", "")
    return ComparisonCell(table, row, column, paper_text, model_value,
                          status, note)


def build_audit(params: CostParams = DEFAULT_PARAMS) -> list[ComparisonCell]:
    cells: list[ComparisonCell] = []

    for tid, (mode, rows) in PIPELINE_TABLES.items():
        for L, seq_text, pipe_text, imp_text in rows:
            row = f"L={L}"
            seq_model = model_sequential_xor(mode, L, params)
            cells.append(_cell(tid, row, "sequential", seq_text, seq_model,
                               _time_status(_parse(seq_text), seq_model)))
            pipe_model = model_pipeline_xor(mode, L, 1, params)
            cells.append(_cell(tid, row, "time", pipe_text, pipe_model,
                               _time_status(_parse(pipe_text), pipe_model)))
            # Improvement audited against the table's own printed times.
            imp = (_parse(seq_text) - _parse(pipe_text)) / _parse(seq_text) * 100
            cells.append(_cell(tid, row, "improvement", imp_text, imp,
                               _derived_status(imp_text, imp, PERCENT_TOLERANCE)))

    for tid, (mode, grid) in IMPROVEMENT_TABLES.items():
        exec_id = ("2" if mode == ENCRYPT else "4")
        by_L = {10: "a", 25: "b", 40: "c"}
        for m_r, cols in grid.items():
            row = f"M_r={m_r}"
            for L, imp_text in cols.items():
                # Printed grids derive from the matching execution tables.
                _, _, exec_rows = EXECUTION_TABLES[exec_id + by_L[L]]
                time_text = next(r[1] for r in exec_rows if r[0] == m_r)
                seq = model_sequential_xor(mode, L, params)
                imp = (seq - _parse(time_text)) / seq * 100
                cells.append(_cell(tid, row, f"L={L}", imp_text, imp,
                                   _derived_status(imp_text, imp,
                                                   PERCENT_TOLERANCE)))

    for tid, (mode, L, rows) in EXECUTION_TABLES.items():
        base_text = next(r[1] for r in rows if r[0] == 1)
        base = _parse(base_text)
        for m_r, time_text, sp_text, eff_text, imp_text in rows:
            row = f"M_r={m_r}"
            t_model = model_pipeline_xor(mode, L, m_r, params)
            cells.append(_cell(tid, row, "time", time_text, t_model,
                               _time_status(_parse(time_text), t_model)))
            # Derived columns audited against the printed times/baseline.
            sp = base / _parse(time_text)
            cells.append(_cell(tid, row, "speedup", sp_text, sp,
                               _derived_status(sp_text, sp, RATIO_TOLERANCE)))
            eff = sp / m_r
            cells.append(_cell(tid, row, "efficiency", eff_text, eff,
                               _derived_status(eff_text, eff, RATIO_TOLERANCE)))
            if imp_text is not None:
                imp = (base - _parse(time_text)) / base * 100
                cells.append(_cell(tid, row, "improvement", imp_text, imp,
                                   _derived_status(imp_text, imp,
                                                   PERCENT_TOLERANCE)))
    return cells


def flagged_entries(cells: list[ComparisonCell]) -> set[str]:
    """Errata entries: a row key when its (sequential or execution) time
    is wrong, a cell key for a bad derived value in an otherwise clean row."""
    bad_rows = {c.row_key for c in cells
                if c.status == ERRATA and c.column in ("time", "sequential")}
    flagged = set(bad_rows)
    for c in cells:
        if c.status == ERRATA and c.row_key not in bad_rows:
            flagged.add(c.key)
    return flagged


def audit_closure(cells: Optional[list[ComparisonCell]] = None,
                  params: CostParams = DEFAULT_PARAMS
                  ) -> tuple[bool, set[str], set[str]]:
    """Compare the flagged set against the documented catalog.

    Returns (ok, unexpected, missing).
    """
    if cells is None:
        cells = build_audit(params)
    flagged = flagged_entries(cells)
    unexpected = flagged - ERRATA_CATALOG
    missing = ERRATA_CATALOG - flagged
    return not unexpected and not missing, unexpected, missing
