"""Seeded random model generator for the pass-equivalence suite.

Each family produces small, checker-clean models (domains at most 4
wide, set universes at most 4, at most 4 variables) that exercise one
pass. Models come back as injected pivot trees; the same seed always
yields the same model.
"""

import random

from cpforge import checker, frontend, passes
from cpforge.ir import (AccessStep, ArrayDims, BinOp, BoolLit, Card,
                        Constant, Constraint, ConstraintZone, EnumLit,
                        Forall, IfStmt, IntLit, Intersect, Interval,
                        PivotModel, Record, UnOp, Variable, VarRef,
                        simple_ref)

CMP = ["=", "!=", "<", "<=", ">", ">="]


def _checked(model: PivotModel) -> PivotModel:
    problems = [p for p in checker.check(model) if p.severity == "error"]
    assert not problems, f"generator produced invalid model: {problems}"
    return model


def _inject(model_text: str, data_text: str | None = None) -> PivotModel:
    ast = frontend.parse_model(model_text)
    data = frontend.parse_data(data_text) if data_text else None
    return _checked(frontend.inject(ast, data))


def classes_model(rng: random.Random) -> PivotModel:
    """Object composition: a component class used behind a scalar or
    array object variable, optionally through inheritance."""
    lo = rng.randint(0, 1)
    hi = lo + rng.randint(1, 3)
    op1, op2 = rng.choice(CMP), rng.choice(CMP)
    k = rng.randint(lo, hi)
    use_super = rng.random() < 0.5
    array = rng.random() < 0.5

    if use_super:
        comp = ("class Base {\n"
                f" int x in [{lo}, {hi}];\n"
                "}\n"
                "class Comp extends Base {\n"
                f" constraint local {{ x {op1} {k}; }}\n"
                "}\n")
    else:
        comp = ("class Comp {\n"
                f" int x in [{lo}, {hi}];\n"
                f" constraint local {{ x {op1} {k}; }}\n"
                "}\n")
    if array:
        main = ("main class M {\n"
                " Comp cs[2];\n"
                f" constraint together {{ cs[1].x {op2} cs[2].x; }}\n"
                "}\n")
    else:
        main = ("main class M {\n"
                " Comp one;\n"
                " Comp other;\n"
                f" constraint together {{ one.x {op2} other.x; }}\n"
                "}\n")
    return _inject(main + comp)


def records_model(rng: random.Random) -> PivotModel:
    """Class-free record models, produced by flattening a composition
    model (the pass under test runs on its output)."""
    return _checked(passes.flatten_classes(classes_model(rng)).model)


def enums_model(rng: random.Random) -> PivotModel:
    literals = ["red", "green", "blue", "grey"][:rng.randint(2, 4)]
    lit1, lit2 = rng.choice(literals), rng.choice(literals)
    op = rng.choice(["=", "!="])
    k = rng.randint(0, 2)
    body = f"enum Col := {{{','.join(literals)}}};\n"
    if rng.random() < 0.5:
        model = ("main class M {\n"
                 " Col first;\n"
                 " Col second;\n"
                 f" constraint c {{ first {op} {lit1}; "
                 f"second != first; }}\n"
                 "}\n")
    else:
        model = ("main class M {\n"
                 " Col set chosen;\n"
                 " Col set others;\n"
                 f" constraint c {{ card(chosen) {rng.choice(CMP)} {k}; "
                 f"card(chosen intersect others) = 0; }}\n"
                 "}\n")
    return _inject(model, body)


def ifs_model(rng: random.Random) -> PivotModel:
    op1, op2, op3 = (rng.choice(CMP) for _ in range(3))
    k1, k2 = rng.randint(0, 2), rng.randint(0, 2)
    with_else = rng.random() < 0.7
    nested = rng.random() < 0.3
    then_body = f"   y {op2} {k2};\n"
    if nested:
        then_body += f"   if (y {op3} 1) {{ x != y; }}\n"
    text = ("main class M {\n"
            " int x in [0, 2];\n"
            " int y in [0, 2];\n"
            " constraint c {\n"
            f"  if (x {op1} {k1}) {{\n"
            f"{then_body}"
            "  }" + (f" else {{ y {op3} {k1}; }}\n" if with_else else "\n")
            + " }\n}\n")
    return _inject(text)


def loops_model(rng: random.Random) -> PivotModel:
    n = rng.randint(2, 3)
    op = rng.choice(["!=", "<=", ">=", "<", ">"])
    dependent = rng.random() < 0.5
    if dependent:
        body = (f"  forall(i in 1..{n - 1}) {{\n"
                f"   forall(j in i+1..{n}) {{\n"
                f"    q[i] {op} q[j];\n"
                "   }\n"
                "  }\n")
    else:
        body = (f"  forall(i in 1..{n}) {{\n"
                f"   q[i] {op} {rng.randint(1, 3)};\n"
                "  }\n")
    text = ("main class M {\n"
            f" int q[{n}] in [1, 3];\n"
            " constraint c {\n"
            f"{body}"
            " }\n}\n")
    return _inject(text)


def simplify_model(rng: random.Random) -> PivotModel:
    k1, k2 = rng.randint(1, 3), rng.randint(1, 3)
    op = rng.choice(CMP)
    flavor = rng.randrange(4)
    if flavor == 0:  # constant arithmetic folds
        stmt = f"x {op} {k1} + {k2};"
    elif flavor == 1:  # tautology over an atomic boolean
        stmt = "b or not b;"
    elif flavor == 2:  # boolean absorption
        stmt = f"(x > {k1}) and true;"
    else:  # literal-false constraint survives with a warning
        stmt = f"{k1} > {k1 + k2}; x >= 0;"
    text = ("main class M {\n"
            " int x in [0, 4];\n"
            " bool b;\n"
            f" constraint c {{ {stmt} }}\n"
            "}\n")
    return _inject(text)


def matrices_model(rng: random.Random) -> PivotModel:
    rows, cols = rng.randint(2, 3), 2
    i1, j1 = rng.randint(1, rows), rng.randint(1, cols)
    i2, j2 = rng.randint(1, rows), rng.randint(1, cols)
    op = rng.choice(CMP)
    loop = rng.random() < 0.5
    if loop:
        body = (f"  forall(i in 1..{rows}) {{\n"
                f"   m[i,1] {op} m[i,2];\n"
                "  }\n")
    else:
        body = f"  m[{i1},{j1}] {op} m[{i2},{j2}];\n"
    text = ("main class M {\n"
            f" int m[{rows},{cols}] in [0, 1];\n"
            " constraint c {\n"
            f"{body}"
            " }\n}\n")
    return _inject(text)


GENERATORS = {
    "flatten-classes": classes_model,
    "flatten-records": records_model,
    "remove-enums": enums_model,
    "remove-if": ifs_model,
    "unroll-loops": loops_model,
    "simplify": simplify_model,
    "flatten-matrices": matrices_model,
}


def generate(pass_token: str, seed: int) -> PivotModel:
    return GENERATORS[pass_token](random.Random(seed))
