"""Tree utilities: duplication, substitution, free names, fresh names."""

from hypothesis import given
from hypothesis import strategies as st

from cpforge.frontend import parse_expression, parse_statement
from cpforge.ir import (AccessStep, BinOp, Constraint, Forall, IntLit, Loc,
                        VarRef, duplicate, free_names, fresh_name,
                        simple_ref, substitute)


def test_duplicate_int_literal_identity():
    lit = IntLit(5)
    copy = duplicate(lit)
    assert copy == lit
    assert copy is not lit


def test_duplicate_forall_structurally_equal():
    stmt = parse_statement("forall(i in 1..w) { c > 0; }")
    copy = duplicate(stmt)
    assert copy == stmt
    assert copy is not stmt
    assert copy.body[0] is not stmt.body[0]


def test_duplicate_twice_yields_independent_copies():
    var = parse_expression("players")
    first, second = duplicate(var), duplicate(var)
    assert first == second
    first.path[0].name = "mutated"
    assert first != second


def test_duplicate_preserves_locations():
    ref = VarRef([AccessStep("x")], loc=Loc("f.scm", 3, 7))
    assert duplicate(ref).loc == Loc("f.scm", 3, 7)


def test_substitute_index_in_access():
    expr = parse_expression("x[i] > 0")
    out = substitute(expr, "i", IntLit(2))
    assert out == parse_expression("x[2] > 0")


def test_substitute_respects_shadowing():
    stmt = parse_statement("forall(i in 1..3) { x[i] > 0; }")
    assert substitute(stmt, "i", IntLit(1)) == stmt


def test_substitute_rewrites_outer_bounds_only():
    stmt = parse_statement("forall(i in k..3) { x[i] > 0; }")
    out = substitute(stmt, "k", IntLit(2))
    assert out == parse_statement("forall(i in 2..3) { x[i] > 0; }")


def test_substitute_derived_intersection_case():
    # expected form computed independently by re-parsing its text
    expr = parse_expression("card(g[i] intersect g[j]) = 0")
    out = substitute(expr, "j", parse_expression("i+1"))
    assert out == parse_expression("card(g[i] intersect g[i+1]) = 0")


def test_free_names_plain_sum():
    assert free_names(parse_expression("x + y")) == {"x", "y"}


def test_free_names_forall_binds_index():
    stmt = parse_statement("forall(i in 1..n) { x[i] > k; }")
    assert free_names(stmt) == {"n", "x", "k"}


def test_free_names_golfers_zone_body():
    # manual scope walk over the corrected four-loop body: w1, w2, g1, g2
    # are bound; the access root and the two bound constants remain
    stmt = parse_statement(
        "forall(w1 in 1..w) { forall(w2 in w1+1..w) {"
        " forall(g1 in 1..g) { forall(g2 in 1..g) {"
        " card(weeks[w1].groups[g1].players intersect"
        " weeks[w2].groups[g2].players) <= 1; } } } }")
    assert free_names(stmt) == {"weeks", "w", "g"}


def test_fresh_name_first_is_v1():
    assert fresh_name("V", set()) == "V1"


def test_fresh_name_skips_taken():
    assert fresh_name("V", {"V1"}) == "V2"
    assert fresh_name("V", {f"V{i}" for i in range(1, 13)}) == "V13"


# -- property tests ---------------------------------------------------------

_names = st.sampled_from(["a", "b", "c", "x", "y"])


@st.composite
def expressions(draw, depth=0):
    if depth >= 3 or draw(st.booleans()):
        choice = draw(st.integers(0, 2))
        if choice == 0:
            return IntLit(draw(st.integers(0, 9)))
        if choice == 1:
            return simple_ref(draw(_names))
        return VarRef([AccessStep(draw(_names),
                                  [draw(expressions(depth=depth + 1))])])
    op = draw(st.sampled_from(["+", "-", "*", "<", "="]))
    return BinOp(op, draw(expressions(depth=depth + 1)),
                 draw(expressions(depth=depth + 1)))


@given(expressions(), _names)
def test_substitute_with_same_name_is_identity(expr, name):
    assert substitute(expr, name, simple_ref(name)) == expr


def _non_simple_bases(expr) -> set:
    """Names used as array/member bases; substituting a literal for
    those is ill-formed, so the removal property excludes them."""
    from cpforge.ir import iter_nodes
    out = set()
    for node in iter_nodes(expr):
        if isinstance(node, VarRef) and not node.is_simple():
            out.add(node.base_name)
    return out


@given(expressions(), _names, st.integers(0, 9))
def test_substitute_removes_name_from_free_names(expr, name, value):
    if name in free_names(expr) and name not in _non_simple_bases(expr):
        out = substitute(expr, name, IntLit(value))
        assert free_names(out) == free_names(expr) - {name}


@given(expressions())
def test_duplicate_is_structurally_equal(expr):
    assert duplicate(expr) == expr
