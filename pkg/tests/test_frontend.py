"""Lexer, parser, injector and extractor behaviour."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import inject_corpus, inject_text, read_corpus
from cpforge import frontend
from cpforge.frontend import (ClassDecl, ConstDecl, DuplicateName, EnumDecl,
                              ParseError, UnresolvedName, extract_source,
                              inject, parse_data, parse_expression,
                              parse_model)
from cpforge.ir import (BinOp, Card, ClassType, Constant, EnumLit, EnumType,
                        IntLit, Intersect, RealLit, UnOp, Variable,
                        iter_nodes)


# -- data file parsing -------------------------------------------------------


def test_parse_const_decl():
    sf = parse_data("int s := 3;")
    assert sf.items == [ConstDecl("s", "int", IntLit(3))]


def test_parse_two_literal_enum():
    sf = parse_data("enum Name := {a,b};")
    assert sf.items == [EnumDecl("Name", ["a", "b"])]


def test_parse_data_error_location_and_expected_set():
    with pytest.raises(ParseError) as err:
        parse_data("int s := ;", file="bad.scd")
    assert err.value.loc.file == "bad.scd"
    assert err.value.loc.line == 1
    assert err.value.loc.col == 10
    assert "number" in err.value.expected


def test_parse_data_rejects_classes():
    with pytest.raises(ParseError):
        parse_data("class A {}")


def test_parse_real_constant_and_comments():
    sf = parse_data("// comment\nreal pi := 3.5; // trailing\n")
    assert sf.items == [ConstDecl("pi", "real", RealLit(3.5))]


def test_parse_negative_literal():
    sf = parse_data("int low := -2;")
    assert sf.items[0].value == IntLit(-2)


# -- model file parsing ------------------------------------------------------


def test_parse_golfers_model_classes():
    sf = parse_model(read_corpus("golfers.scm"))
    classes = sf.classes()
    assert [c.name for c in classes] == ["SocialGolfers", "Week", "Group"]
    assert [c.is_main for c in classes] == [True, False, False]


def test_parse_set_variable():
    sf = parse_model("class Group { Name set players; }")
    feat = sf.classes()[0].features[0]
    assert feat.name == "players" and feat.type == "Name" and feat.is_set


def test_parse_extends_clause():
    sf = parse_model("class A extends B {}")
    assert sf.classes()[0] == ClassDecl("A", super_types=["B"])


def test_parse_both_forall_forms_agree():
    paren = parse_model("main class M { int x[3] in [1,2];"
                        " constraint c { forall(i in 1..3) { x[i] = 1; } } }")
    bracket = parse_model("main class M { int x[3] in [1,2];"
                          " constraint c { forall i in [1,3] { x[i] = 1; } } }")
    assert inject(paren) == inject(bracket)


def test_expression_precedence():
    expr = parse_expression("a implies b or not c and d = 1 + 2 * e")
    # implies is loosest and right-leaning; * binds tighter than +
    assert expr.op == "implies"
    assert expr.rhs.op == "or"
    assert expr.rhs.rhs.op == "and"
    assert isinstance(expr.rhs.rhs.lhs, UnOp)


def test_card_and_intersect_parse():
    expr = parse_expression("card(a intersect b) <= 1")
    assert isinstance(expr.lhs, Card)
    assert isinstance(expr.lhs.arg, Intersect)


def test_dotted_access_with_indices():
    expr = parse_expression("weeks[w1].groups[g1].players")
    assert [s.name for s in expr.path] == ["weeks", "groups", "players"]
    assert [len(s.indices) for s in expr.path] == [1, 1, 0]


def test_matrix_access_two_indices():
    expr = parse_expression("m[2,3]")
    assert len(expr.path[0].indices) == 2


# -- injection ---------------------------------------------------------------


def test_inject_golfers_elements(golfers):
    kinds = [type(e).__name__ for e in golfers.elements]
    assert kinds == ["EnumType", "Constant", "Constant", "Constant",
                     "ClassType", "ClassType", "ClassType"]
    assert golfers.name == "SocialGolfers"
    enum = golfers.elements[0]
    assert enum.literals == list("abcdefghi")


def test_inject_resolves_enum_literals(golfers_small):
    lits = [n for n in iter_nodes(golfers_small) if isinstance(n, EnumLit)]
    assert not lits  # golfers never names a literal in a constraint
    p = inject_text("main class M { Name set s; constraint c {"
                    " card(s intersect s) = 1; } }",
                    "enum Name := {a,b};")
    assert isinstance(p.elements[0], EnumType)


def test_inject_literal_reference_becomes_enumlit():
    p = inject_text("main class M { Col c1; constraint z { c1 = red; } }",
                    "enum Col := {red,blue};")
    lits = [n for n in iter_nodes(p) if isinstance(n, EnumLit)]
    assert lits == [EnumLit("Col", "red")]


def test_inject_declaration_shadows_literal():
    # a constant may reuse a literal name; the constant wins in expressions
    p = inject_text("main class M { int x in [1, 9];"
                    " constraint z { x >= g; } }",
                    "enum Name := {a,g};\nint g := 3;")
    refs = [n for n in iter_nodes(p) if isinstance(n, EnumLit)]
    assert refs == []


def test_inject_unresolved_name():
    with pytest.raises(UnresolvedName) as err:
        inject_text("main class M { int x in [1, q]; }")
    assert err.value.name == "q"


def test_inject_duplicate_constant():
    with pytest.raises(DuplicateName) as err:
        inject_text("main class M {}", "int s := 1;\nint s := 2;")
    assert err.value.name == "s"


def test_inject_requires_exactly_one_main():
    with pytest.raises(frontend.InjectError):
        inject_text("class A {}")
    with pytest.raises(frontend.InjectError):
        inject_text("main class A {} main class B {}")


def test_inject_member_resolution_through_classes(golfers):
    zone = golfers.elements[4].features[1]
    assert zone.name == "differentGroups"


def test_inject_rejects_unknown_member():
    with pytest.raises(UnresolvedName):
        inject_text("main class M { W w1; constraint c { w1.missing = 1; } }"
                    "class W { int x in [1,2]; }")


def test_scope_inherited_feature_visible_in_subclass():
    p = inject_text("main class M { A a; constraint c { a.x = 1; } }"
                    "class B { int x in [0, 2]; }"
                    "class A extends B {}")
    assert p.name == "M"


def test_scope_class_feature_invisible_outside():
    with pytest.raises(UnresolvedName):
        inject_text("main class M { constraint c { x = 1; } }"
                    "class B { int x in [0, 2]; }")


# -- locations ---------------------------------------------------------------


def test_locations_point_into_source(golfers):
    path = None
    for node in iter_nodes(golfers):
        loc = getattr(node, "loc", None)
        if loc is not None:
            assert loc.line >= 1 and loc.col >= 1
            assert loc.file.endswith((".scm", ".scd"))
            path = path or loc.file
    assert path is not None


# -- extraction and round trips ----------------------------------------------


def _roundtrip(p):
    text = extract_source(p)
    return inject(parse_model(text, file="<extracted>"))


def test_extract_empty_model():
    from cpforge.ir import PivotModel
    assert extract_source(PivotModel("empty", [])) == ""


@pytest.mark.parametrize("model,data", [
    ("golfers.scm", "golfers.scd"),
    ("golfers.scm", "golfers_small.scd"),
])
def test_roundtrip_is_structurally_idempotent(model, data):
    p = inject_corpus(model, data)
    once = _roundtrip(p)
    assert once == p
    assert _roundtrip(once) == once


def test_roundtrip_flattened_dump(golfers):
    from cpforge import passes
    flat = passes.run_chain(
        golfers, ["flatten-classes", "flatten-records", "remove-enums"]
    ).model
    again = _roundtrip(flat)
    # classless dumps lose only the model name
    assert again.elements == flat.elements


# -- renderer/parser agreement -----------------------------------------------

_names = st.sampled_from(["a", "b", "c"])


@st.composite
def rt_expressions(draw, depth=0):
    from cpforge.ir import AccessStep, BoolLit, VarRef, simple_ref
    if depth >= 3 or draw(st.booleans()):
        pick = draw(st.integers(0, 3))
        if pick == 0:
            return IntLit(draw(st.integers(0, 20)))
        if pick == 1:
            return BoolLit(draw(st.booleans()))
        if pick == 2:
            return simple_ref(draw(_names))
        return VarRef([AccessStep(draw(_names),
                                  [draw(rt_expressions(depth=depth + 1))])])
    pick = draw(st.integers(0, 3))
    if pick == 0:
        return UnOp(draw(st.sampled_from(["-", "not"])),
                    draw(rt_expressions(depth=depth + 1)))
    if pick == 1:
        return Card(draw(rt_expressions(depth=depth + 1)))
    if pick == 2:
        return Intersect(draw(rt_expressions(depth=depth + 1)),
                         draw(rt_expressions(depth=depth + 1)))
    op = draw(st.sampled_from(["+", "-", "*", "/", "=", "!=", "<", "<=",
                               ">", ">=", "and", "or", "implies"]))
    return BinOp(op, draw(rt_expressions(depth=depth + 1)),
                 draw(rt_expressions(depth=depth + 1)))


@given(rt_expressions())
def test_render_parse_roundtrip(expr):
    text = frontend.render_expr(expr)
    assert parse_expression(text) == expr
