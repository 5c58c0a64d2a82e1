"""Consistency checker: recompute every derived quantity and compare it with
reference values from the config's ``[paper_values]`` section.

Reference keys are either global (``q_unloaded``, ``kappa_c``,
``overlap_ratio``) or per mode, ``<label>.<quantity>``::

    A_5_0_0.g0 = 2.38e-6 Hz
    A_5_0_0.c0 = 1.96e-18
    A_3_0_0.g0_abstract = 0.014 mHz

A discrepancy is a finding, not an error: checking never raises because
numbers disagree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from . import coupling
from .effmass import ModeShapeSpec, QuadratureSpec, effective_mass
from .model import ModeEntry, SystemConfig

OK, WARN, DISCREPANT, INFO = "OK", "WARN", "DISCREPANT", "INFO"
OK_BELOW = 0.05
WARN_UP_TO = 0.5

MACHINE_HEADER = ("quantity", "computed", "unit", "reference", "deviation", "status")


def relative_deviation(computed: float, reference: float) -> float:
    if reference == 0:
        return 0.0 if computed == 0 else math.inf
    return abs(computed - reference) / abs(reference)


def classify(deviation: float | None) -> str:
    if deviation is None:
        return INFO
    if deviation < OK_BELOW:
        return OK
    if deviation <= WARN_UP_TO:
        return WARN
    return DISCREPANT


@dataclass(frozen=True)
class ReportRow:
    quantity: str
    computed: float
    unit: str = ""
    reference: float | None = None
    deviation: float | None = None
    status: str = INFO

    @classmethod
    def make(cls, quantity: str, computed: float, unit: str = "", reference: float | None = None):
        dev = None if reference is None else relative_deviation(computed, reference)
        return cls(quantity, computed, unit, reference, dev, classify(dev))


@dataclass
class ConsistencyReport:
    rows: list[ReportRow] = field(default_factory=list)

    def add(self, quantity: str, computed: float, unit: str = "", reference: float | None = None):
        self.rows.append(ReportRow.make(quantity, computed, unit, reference))

    def row(self, quantity: str) -> ReportRow:
        for r in self.rows:
            if r.quantity == quantity:
                return r
        raise KeyError(quantity)

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)


def _mode_pull_factor(entry: ModeEntry) -> float | None:
    if entry.pull_samples:
        return coupling.pull_factor(entry.pull_samples)
    return entry.pull_factor_g


def cmd_check(config: SystemConfig, quad: QuadratureSpec = QuadratureSpec()) -> ConsistencyReport:
    report = ConsistencyReport()
    ref = config.reference
    cav = config.cavity

    report.add("cavity.q_unloaded", cav.q_unloaded, "", ref("q_unloaded"))
    report.add("cavity.kappa_c", cav.kappa_c, "Hz", ref("kappa_c"))

    for entry in config.modes:
        mode = entry.mode
        label = mode.label
        x_zpf = coupling.zero_point_fluctuation(mode.f_m, mode.m_eff, config.constants)
        report.add(f"{label}.x_zpf", x_zpf, "m", ref(f"{label}.x_zpf"))
        report.add(f"{label}.x_zpf_conventional", x_zpf / 2, "m", ref(f"{label}.x_zpf_conventional"))

        if entry.bvd is not None and entry.bvd.k_m is not None:
            report.add(f"{label}.k_m", entry.bvd.k_m, "C/m", ref(f"{label}.k_m"))

        g_measured = _mode_pull_factor(entry)
        g0_table = ref(f"{label}.g0")
        c0_table = ref(f"{label}.c0")

        if g_measured is not None:
            report.add(f"{label}.pull_factor_g", g_measured, "Hz/m", ref(f"{label}.pull_factor_g"))
            g0_measured = coupling.coupling_rate(g_measured, x_zpf)
            report.add(f"{label}.g0", g0_measured, "Hz", g0_table)
            if g0_table:
                report.add(f"{label}.g0_ratio_measured_to_table", g0_measured / g0_table)
        else:
            g0_measured = None

        if g0_table is not None:
            report.add(f"{label}.pull_factor_g_implied_by_table", g0_table / x_zpf, "Hz/m")
            abstract = ref(f"{label}.g0_abstract")
            if abstract is not None:
                report.add(f"{label}.g0_table", g0_table, "Hz", abstract)

        g0_for_c0 = g0_table if g0_table is not None else g0_measured
        if g0_for_c0 is not None:
            c0 = coupling.cooperativity(g0_for_c0, mode.gamma_m, cav.kappa_c)
            report.add(f"{label}.c0", c0, "", c0_table)

        if g0_table is not None and c0_table:
            gamma = coupling.implied_linewidth(g0_table, c0_table, cav.kappa_c)
            report.add(f"{label}.gamma_m_implied", gamma, "Hz")
            report.add(f"{label}.q_m_implied", mode.f_m / gamma, "")

        if entry.envelope_waist_r0 is not None:
            spec = ModeShapeSpec(entry.overtone_n or mode.indices[0] or 1, entry.envelope_waist_r0)
            m_model = effective_mass(spec, config.geometry, config.material, quad)
            report.add(f"{label}.m_eff_model", m_model, "kg", mode.m_eff)

    if config.overlap is not None:
        ratio = coupling.overlap_ratio(*config.overlap)
        report.add("overlap_ratio", ratio, "", ref("overlap_ratio"))
    return report


def _sci(value: float | None) -> str:
    return "-" if value is None else f"{value:.5e}"


def format_text(report: ConsistencyReport) -> str:
    header = ("quantity", "computed", "unit", "reference", "deviation", "status")
    cells = [header] + [
        (r.quantity, _sci(r.computed), r.unit or "-", _sci(r.reference), _sci(r.deviation), r.status)
        for r in report.rows
    ]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    return "\n".join(lines) + "\n"


def _full(value: float | None) -> str:
    return "-" if value is None else f"{value:.17g}"


def format_machine(report: ConsistencyReport) -> str:
    lines = ["\t".join(MACHINE_HEADER)]
    for r in report.rows:
        lines.append("\t".join((r.quantity, _full(r.computed), r.unit or "-", _full(r.reference),
                                _full(r.deviation), r.status)))
    return "\n".join(lines) + "\n"


def parse_machine(text: str) -> ConsistencyReport:
    lines = text.splitlines()
    if not lines or tuple(lines[0].split("\t")) != MACHINE_HEADER:
        raise ValueError("not a machine-format report (bad header)")
    report = ConsistencyReport()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != len(MACHINE_HEADER):
            raise ValueError(f"line {lineno}: expected {len(MACHINE_HEADER)} fields")
        qty, comp, unit, refv, dev, status = parts
        opt = lambda s: None if s == "-" else float(s)  # noqa: E731
        report.rows.append(ReportRow(qty, float(comp), "" if unit == "-" else unit, opt(refv), opt(dev), status))
    return report


def write_report(report: ConsistencyReport, path, format: str = "text") -> None:
    if format == "text":
        text = format_text(report)
    elif format == "machine":
        text = format_machine(report)
    else:
        raise ValueError(f"format must be 'text' or 'machine', not {format!r}")
    Path(path).write_text(text, encoding="utf-8")


def read_report(path) -> ConsistencyReport:
    return parse_machine(Path(path).read_text(encoding="utf-8"))
