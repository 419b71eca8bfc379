"""Defect detection: typing, domain and cycle rules."""

import pathlib

import pytest

from conftest import CORPUS, inject_text
from cpforge.checker import (check, check_cycles, check_domains, check_types,
                             problems_to_text)
from cpforge import frontend

DEFECTS = CORPUS / "defects"


def inject_defect(name: str):
    text = (DEFECTS / name).read_text()
    return frontend.inject(frontend.parse_model(text, file=name))


def test_clean_golfers_has_no_problems(golfers):
    assert check(golfers) == []


def test_clean_small_golfers(golfers_small):
    assert check(golfers_small) == []


def test_card_equality_against_constant_is_accepted():
    p = inject_text("main class M { Name set players;"
                    " constraint z { card(players) = s; } }",
                    "enum Name := {a,b};\nint s := 1;")
    assert check_types(p) == []


def test_operator_operand_mismatch():
    p = inject_defect("op_mismatch.scm")
    problems = check_types(p)
    assert len(problems) == 1
    assert problems[0].severity == "error"
    assert "op_mismatch.scm:4" in problems[0].location
    assert "'+'" in problems[0].description


def test_chained_equality_flagged():
    p = inject_defect("chained_eq.scm")
    problems = check_types(p)
    assert len(problems) == 1
    assert "equality" in problems[0].description
    assert "chained_eq.scm:4" in problems[0].location


def test_boolean_and_over_numbers_flagged():
    p = inject_text("main class M { int x in [1,2];"
                    " constraint c { x and true; } }")
    problems = check_types(p)
    assert problems and all(p.severity == "error" for p in problems)


def test_constraint_must_be_boolean():
    p = inject_text("main class M { int x in [1,2];"
                    " constraint c { x + 1; } }")
    problems = check_types(p)
    assert len(problems) == 1
    assert "boolean" in problems[0].description


def test_nonconstant_domain_bound():
    p = inject_defect("nonconst_domain.scm")
    problems = check_domains(p)
    assert len(problems) == 1
    assert problems[0].severity == "error"
    assert "constant" in problems[0].description
    assert "nonconst_domain.scm:3" in problems[0].location


def test_inverted_interval_is_error():
    p = inject_defect("inverted_interval.scm")
    problems = check_domains(p)
    assert len(problems) == 1
    assert problems[0].severity == "error"
    assert "lower bound" in problems[0].description


def test_singleton_domain_is_one_warning():
    p = inject_defect("singleton_domain.scm")
    problems = check_domains(p)
    assert [p.severity for p in problems] == ["warning"]
    assert "singleton" in problems[0].description


def test_constant_domain_bounds_accepted():
    p = inject_text("main class M { int x in [1, 3*3]; }")
    assert check_domains(p) == []


def test_empty_explicit_set_rejected():
    from cpforge.ir import (ConstraintZone, ExplicitSet, PivotModel,
                            Variable)
    var = Variable("x", "int", domain=ExplicitSet([]))
    assert check_domains(PivotModel("m", [var]))[0].severity == "error"


def test_inheritance_cycle():
    p = inject_defect("inherit_cycle.scm")
    problems = check_cycles(p)
    assert len(problems) == 1
    assert "inheritance cycle" in problems[0].description
    assert "A -> B -> A" in problems[0].description


def test_self_inheritance_cycle():
    p = inject_text("main class M {} class A extends A {}")
    problems = check_cycles(p)
    assert len(problems) == 1
    assert "A -> A" in problems[0].description


def test_composition_cycle():
    p = inject_defect("compose_cycle.scm")
    problems = check_cycles(p)
    assert len(problems) == 1
    assert "composition cycle" in problems[0].description


def test_golfers_composition_is_acyclic(golfers):
    assert check_cycles(golfers) == []


def test_check_concatenates_in_order():
    text = ("main class M {\n"
            " int x in [5, 2];\n"
            " constraint c { x + true > 1; }\n"
            "}\n"
            "class A extends A {}\n")
    p = frontend.inject(frontend.parse_model(text, file="multi.scm"))
    problems = check(p)
    kinds = [pr.description for pr in problems]
    assert "'+'" in kinds[0]            # types first
    assert "lower bound" in kinds[1]    # then domains
    assert "cycle" in kinds[2]          # then cycles


def test_check_is_deterministic(golfers):
    text = ("main class M { int x in [3,3]; int y in [9,1]; }")
    p = inject_text(text)
    first = check(p)
    second = check(p)
    assert first == second
    assert check(golfers) == check(golfers)


def test_problem_line_format():
    p = inject_defect("inverted_interval.scm")
    line = problems_to_text(check(p))
    severity, location, rest = line.split(" ", 2)
    assert severity == "error"
    assert location.startswith("inverted_interval.scm:2:")
    assert rest


@pytest.mark.parametrize("name", [
    "op_mismatch.scm", "chained_eq.scm", "nonconst_domain.scm",
    "inverted_interval.scm", "inherit_cycle.scm", "compose_cycle.scm",
])
def test_every_defect_fixture_yields_an_error(name):
    problems = check(inject_defect(name))
    assert any(p.severity == "error" for p in problems)
    assert all(p.location.startswith(name) for p in problems)
