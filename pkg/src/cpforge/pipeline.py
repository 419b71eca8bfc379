"""End-to-end chain runner and report writer.

A pipeline run is parse -> inject -> check (abort on errors) -> pass
chain -> backend -> write, with per-stage wall-clock timings collected
into a StageReport. Reports project onto two fixed CSV layouts: the
default one (composition/enum columns) and the loop-unrolling one (a
Forall column plus the Total/Lines ratio); passes without a column of
their own still count toward Total.
"""

from __future__ import annotations

import csv
import os
import tempfile
import time
from dataclasses import dataclass, field

from . import eclipse, frontend, oracle
from .checker import Problem, check
from .frontend import InjectError, ParseError, extract_source
from .ir import PivotModel
from .passes import PASSES, ChainResult, PassError, run_chain

TARGETS = ("eclipse", "pivot")


class UsageError(Exception):
    """Bad invocation: unknown option value or unreadable input."""


class ModelError(Exception):
    """The model was rejected (syntax, resolution or checker errors)."""

    def __init__(self, problems: list[Problem]):
        self.problems = problems
        super().__init__("; ".join(p.line() for p in problems))


@dataclass
class PipelineConfig:
    model: str
    data: str | None = None
    source: str = "scomma"
    target: str = "eclipse"
    chain: list[str] = field(default_factory=list)
    out: str | None = None
    report: str | None = None


@dataclass
class StageReport:
    problem: str
    input_lines: int = 0
    output_lines: int = 0
    inject_s: float = 0.0
    s_to_p: float = 0.0
    pass_s: list[tuple[str, float]] = field(default_factory=list)
    p_to_e: float = 0.0
    extract_s: float = 0.0
    problems: list[Problem] = field(default_factory=list)

    @property
    def total(self) -> float:
        return (self.inject_s + self.s_to_p + self.p_to_e + self.extract_s
                + sum(t for _, t in self.pass_s))

    def _pass_time(self, tokens: tuple[str, ...]) -> str:
        vals = [t for name, t in self.pass_s if name in tokens]
        return f"{sum(vals):.3f}" if vals else "-"

    def uses_unrolling(self) -> bool:
        return any(name == "unroll-loops" for name, _ in self.pass_s)

    def row(self) -> list[str]:
        comp = self._pass_time(("flatten-classes", "flatten-records"))
        if self.uses_unrolling():
            ratio = self.total / self.output_lines if self.output_lines \
                else 0.0
            return [self.problem, f"{self.inject_s:.3f}",
                    f"{self.s_to_p:.3f}", comp,
                    self._pass_time(("unroll-loops",)),
                    f"{self.p_to_e:.3f}", f"{self.extract_s:.3f}",
                    f"{self.total:.3f}", str(self.output_lines),
                    f"{ratio:.4f}"]
        return [self.problem, str(self.input_lines), f"{self.inject_s:.3f}",
                f"{self.s_to_p:.3f}", comp,
                self._pass_time(("remove-enums",)),
                f"{self.p_to_e:.3f}", f"{self.extract_s:.3f}",
                f"{self.total:.3f}", str(self.output_lines)]

    def header(self) -> list[str]:
        if self.uses_unrolling():
            return ["Problems", "Inject", "s-to-P", "Comp", "Forall",
                    "P-to-E", "Extract", "Total", "Lines", "Total/Lines"]
        return ["Problems", "Lines", "Inject", "s-to-P", "Comp", "Enum",
                "P-to-E", "Extract", "Total", "Lines"]


def _read(path: str) -> str:
    if not os.path.isfile(path):
        raise UsageError(f"no such file: {path}")
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _count_lines(text: str) -> int:
    return len(text.splitlines())


def _problem_of(exc: Exception) -> Problem:
    loc = getattr(exc, "loc", None)
    message = getattr(exc, "message", str(exc))
    return Problem("error", str(loc) if loc else "<unknown>", message)


def load_model(model_path: str, data_path: str | None) -> PivotModel:
    """Parse + inject, mapping frontend failures to ModelError."""
    try:
        model_ast = frontend.parse_model(_read(model_path),
                                         file=model_path)
        data_ast = None
        if data_path:
            data_ast = frontend.parse_data(_read(data_path), file=data_path)
        return frontend.inject(model_ast, data_ast)
    except (ParseError, InjectError) as exc:
        raise ModelError([_problem_of(exc)])


def validate_config(config: PipelineConfig) -> None:
    if config.source != "scomma":
        raise UsageError(f"unknown source language '{config.source}'")
    if config.target not in TARGETS:
        raise UsageError(f"unknown target '{config.target}'")
    for token in config.chain:
        if token not in PASSES:
            raise UsageError(f"unknown pass '{token}'")


def run(config: PipelineConfig) -> StageReport:
    """Execute one transformation pipeline.

    Raises UsageError for bad configuration, ModelError when the model
    is rejected before transformation, PassError (including chain-order
    and unsupported-construct failures) from the chain or backend.
    """
    validate_config(config)
    model_text = _read(config.model)
    data_text = _read(config.data) if config.data else ""

    report = StageReport(problem=os.path.splitext(
        os.path.basename(config.model))[0])
    report.input_lines = _count_lines(model_text) + _count_lines(data_text)

    start = time.perf_counter()
    try:
        model_ast = frontend.parse_model(model_text, file=config.model)
        data_ast = frontend.parse_data(data_text, file=config.data) \
            if config.data else None
    except ParseError as exc:
        raise ModelError([_problem_of(exc)])
    report.inject_s = time.perf_counter() - start

    start = time.perf_counter()
    try:
        pivot = frontend.inject(model_ast, data_ast)
    except InjectError as exc:
        raise ModelError([_problem_of(exc)])
    report.s_to_p = time.perf_counter() - start

    problems = check(pivot)
    report.problems.extend(problems)
    if any(p.severity == "error" for p in problems):
        raise ModelError(problems)

    chained: ChainResult = run_chain(pivot, list(config.chain))
    report.pass_s = list(chained.timings)
    report.problems.extend(chained.problems)

    if config.target == "eclipse":
        start = time.perf_counter()
        target_model = eclipse.to_eclipse(chained.model)
        report.p_to_e = time.perf_counter() - start
        start = time.perf_counter()
        out_text = eclipse.emit(target_model)
        report.extract_s = time.perf_counter() - start
    else:
        start = time.perf_counter()
        out_text = extract_source(chained.model)
        report.extract_s = time.perf_counter() - start

    report.output_lines = _count_lines(out_text)
    if config.out:
        with open(config.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(out_text)
    if config.report:
        write_report([report], config.report)
    return report


def write_report(reports: list[StageReport], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        if reports:
            writer.writerow(reports[0].header())
        for rep in reports:
            writer.writerow(rep.row())


# --------------------------------------------------------------------------
# Instance generators and bench
# --------------------------------------------------------------------------

_QUEENS_MODEL = """\
main class Queens {
 int q[n] in [1, n];
 constraint noAttack {
  forall(i in 1..n) {
   forall(j in i+1..n) {
    q[i] != q[j];
    q[i] + i != q[j] + j;
    q[i] - i != q[j] - j;
   }
  }
 }
}
"""

_GOLFERS_MODEL = """\
main class SocialGolfers {
 Week weeks[w];
 constraint differentGroups {
  forall(w1 in 1..w) {
   forall(w2 in w1+1..w) {
    forall(g1 in 1..g) {
     forall(g2 in 1..g) {
      card(weeks[w1].groups[g1].players intersect weeks[w2].groups[g2].players) <= 1;
     }
    }
   }
  }
 }
}
class Week {
 Group groups[g];
 constraint playOncePerWeek {
  forall(g1 in 1..g) {
   forall(g2 in g1+1..g) {
    card(groups[g1].players intersect groups[g2].players) = 0;
   }
  }
 }
}
class Group {
 Name set players;
 constraint groupSize {
  card(players) = s;
 }
}
"""


def nqueens_source(n: int) -> tuple[str, str]:
    """Pairwise N-Queens model and data texts."""
    return _QUEENS_MODEL, f"int n := {n};\n"


def golfers_source(weeks: int) -> tuple[str, str]:
    """Social-golfers model and data texts with a scalable week count."""
    data = ("enum Name := {a,b,c,d,e,f,g,h,i};\n"
            "int s := 3;\n"
            f"int w := {weeks};\n"
            "int g := 3;\n")
    return _GOLFERS_MODEL, data

GENERATORS = {"nqueens": nqueens_source, "golfers": golfers_source}

_DEFAULT_CHAINS = {
    "nqueens": ["flatten-classes", "remove-if", "unroll-loops", "simplify"],
    "golfers": ["flatten-classes", "flatten-records", "remove-enums"],
}


def bench(family: str, sizes: list[int], chain: list[str] | None = None,
          target: str = "eclipse",
          workdir: str | None = None) -> list[StageReport]:
    """Synthesize instances, run the pipeline per size, tabulate rows."""
    if family not in GENERATORS:
        raise UsageError(f"unknown bench family '{family}'")
    chain = list(chain) if chain else list(_DEFAULT_CHAINS[family])
    workdir = workdir or tempfile.mkdtemp(prefix="cpforge-bench-")
    os.makedirs(workdir, exist_ok=True)

    rows = []
    for size in sizes:
        model_text, data_text = GENERATORS[family](size)
        base = os.path.join(workdir, f"{family}-{size}")
        with open(base + ".scm", "w", encoding="utf-8") as fh:
            fh.write(model_text)
        with open(base + ".scd", "w", encoding="utf-8") as fh:
            fh.write(data_text)
        suffix = ".ecl" if target == "eclipse" else ".scm.out"
        config = PipelineConfig(model=base + ".scm", data=base + ".scd",
                                target=target, chain=list(chain),
                                out=base + suffix)
        report = run(config)
        label = f"{size}-Queens" if family == "nqueens" \
            else f"golfers-w{size}"
        report.problem = label
        rows.append(report)
    return rows


# --------------------------------------------------------------------------
# check / solve entry points
# --------------------------------------------------------------------------


def check_paths(model_path: str, data_path: str | None):
    """Parse, inject and check; (problems, exit_code)."""
    try:
        pivot = load_model(model_path, data_path)
    except ModelError as exc:
        return exc.problems, 1
    problems = check(pivot)
    code = 1 if any(p.severity == "error" for p in problems) else 0
    return problems, code


def solve_paths(model_path: str, data_path: str | None,
                cap: int | None = None) -> list[str]:
    """Brute-force solutions of a checked model, one line per assignment."""
    pivot = load_model(model_path, data_path)
    problems = check(pivot)
    if any(p.severity == "error" for p in problems):
        raise ModelError(problems)
    inst = oracle.Instance()
    if cap is not None:
        inst.max_space = cap
    return oracle.solutions(pivot, inst).lines()
