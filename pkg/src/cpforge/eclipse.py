"""Constraint-logic-programming backend.

Translates a fully flattened pivot model (no classes, records, enums,
conditionals or matrices) into a one-predicate target AST and prints it.
The shape follows the usual CLP encoding: dimension bindings, variable
declarations, a list alias, nested for-loops with explicit ``param``
lists, ``nth``-bound locals for array accesses, cardinality bindings,
and a terminal labeling call.

Lists cannot be subscripted in the target language, so every indexed
access inside a constraint is routed through a pair of fresh locals:
``V1 is <index>`` then ``nth(V2, V1, L)``; a cardinality becomes
``#(Set, V)`` followed by a relational atom over the bound local. Fresh
locals count up from V1 per translation run, which keeps output
byte-identical across runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .frontend import render_expr
from .ir import (BinOp, BoolLit, Card, ClassType, Constant, Constraint,
                 ConstraintZone, EnumLit, EnumType, Expression, Forall,
                 IfStmt, IntLit, Intersect, Interval, Loc, PivotModel,
                 RealLit, Record, Statement, UnOp, Variable, VarRef,
                 const_eval, free_names, iter_nodes, simple_ref)
from .passes import PassError


class UnsupportedConstruct(PassError):
    """A construct the target cannot express survived the chain."""

    def __init__(self, construct: str, loc: Loc | None = None):
        super().__init__("unsupported",
                         f"unsupported construct for target: {construct}",
                         loc)
        self.construct = construct


# --------------------------------------------------------------------------
# Target AST
# --------------------------------------------------------------------------


@dataclass
class ConstBind:
    name: str
    value: Expression


@dataclass
class IntsetsDecl:
    list_var: str
    count: int
    lo: int
    hi: int


@dataclass
class IntArrayDecl:
    list_var: str
    count: int
    lo: int
    hi: int


@dataclass
class ScalarDecl:
    name: str
    lo: int
    hi: int


@dataclass
class ScalarSetDecl:
    name: str
    lo: int
    hi: int


@dataclass
class ListAlias:
    name: str
    target: object  # str or list[str]


@dataclass
class ForLoop:
    iter: str
    from_expr: Expression
    to_expr: Expression
    params: list[str] = field(default_factory=list)
    body: list = field(default_factory=list)


@dataclass
class IsBind:
    var: str
    expr: Expression


@dataclass
class NthCall:
    out_var: str
    index_var: str
    list_var: str


@dataclass
class CardBind:
    set_expr: Expression
    out_var: str


@dataclass
class EclConstraint:
    expr: Expression


@dataclass
class LabelSets:
    list_var: str


@dataclass
class EclPredicate:
    name: str
    params: list[str] = field(default_factory=list)
    body: list = field(default_factory=list)


@dataclass
class EclModel:
    predicates: list[EclPredicate] = field(default_factory=list)


# --------------------------------------------------------------------------
# Structure translation
# --------------------------------------------------------------------------


class _Namer:
    """Deterministic pivot-name to target-variable mapping (upper case,
    numeric suffix on collision)."""

    def __init__(self):
        self.map: dict[str, str] = {}
        self.taken: set[str] = set()

    def get(self, name: str) -> str:
        if name not in self.map:
            upper = name.upper()
            if upper in self.taken:
                i = 2
                while f"{upper}{i}" in self.taken:
                    i += 1
                upper = f"{upper}{i}"
            self.map[name] = upper
            self.taken.add(upper)
        return self.map[name]


def _gate(p: PivotModel) -> None:
    for node in iter_nodes(p):
        if isinstance(node, ClassType):
            raise UnsupportedConstruct("class", node.loc)
        if isinstance(node, Record):
            raise UnsupportedConstruct("record", node.loc)
        if isinstance(node, EnumType):
            raise UnsupportedConstruct("enum", node.loc)
        if isinstance(node, IfStmt):
            raise UnsupportedConstruct("if", node.loc)
        if isinstance(node, EnumLit):
            raise UnsupportedConstruct("enum literal", node.loc)
        if isinstance(node, Variable):
            if node.array is not None and node.array.m is not None:
                raise UnsupportedConstruct("matrix", node.loc)
            if node.type == "real":
                raise UnsupportedConstruct("real variable", node.loc)


def _fold_int(expr: Expression, env: dict, what: str,
              loc: Loc | None) -> int:
    v = const_eval(expr, env)
    if not isinstance(v, int) or isinstance(v, bool):
        raise UnsupportedConstruct(f"non-constant {what}", loc)
    return v


def _domain_bounds(var: Variable, env: dict) -> tuple[int, int]:
    if var.type == "bool":
        return 0, 1
    if not isinstance(var.domain, Interval):
        raise UnsupportedConstruct(
            f"variable '{var.name}' without an interval domain", var.loc)
    lo = _fold_int(var.domain.lower, env, "domain bound", var.loc)
    hi = _fold_int(var.domain.upper, env, "domain bound", var.loc)
    return lo, hi


def translate(p: PivotModel) -> EclModel:
    """Pivot structure to target AST; params and locals are filled by
    introduce_locals/fill_params (to_eclipse runs all three)."""
    _gate(p)
    namer = _Namer()
    namer.taken.add("L")
    env = {}
    for el in p.elements:
        if isinstance(el, Constant):
            env[el.name] = const_eval(el.value)

    body: list = []
    array_vars: list[str] = []
    for el in p.elements:
        if isinstance(el, Constant):
            body.append(ConstBind(namer.get(el.name), el.value))
    for el in p.elements:
        if not isinstance(el, Variable):
            continue
        target = namer.get(el.name)
        if el.array is not None:
            count = _fold_int(el.array.n, env, "array size", el.loc)
            lo, hi = _domain_bounds(el, env)
            decl = IntsetsDecl if el.is_set else IntArrayDecl
            body.append(decl(target, count, lo, hi))
            array_vars.append(target)
        else:
            lo, hi = _domain_bounds(el, env)
            body.append(ScalarSetDecl(target, lo, hi) if el.is_set
                        else ScalarDecl(target, lo, hi))

    if len(array_vars) == 1:
        body.append(ListAlias("L", array_vars[0]))
        list_map = {array_vars[0]: "L"}
    else:
        body.append(ListAlias("L", list(array_vars)))
        list_map = {name: name for name in array_vars}

    def tr_expr(expr: Expression) -> Expression:
        if isinstance(expr, (IntLit, RealLit, BoolLit)):
            return expr
        if isinstance(expr, VarRef):
            if len(expr.path) > 1:
                raise UnsupportedConstruct("member access", expr.loc)
            step = expr.path[0]
            ref = simple_ref(namer.get(step.name), loc=expr.loc)
            ref.path[0].indices = [tr_expr(i) for i in step.indices]
            return ref
        if isinstance(expr, BinOp):
            return BinOp(expr.op, tr_expr(expr.lhs), tr_expr(expr.rhs),
                         loc=expr.loc)
        if isinstance(expr, UnOp):
            return UnOp(expr.op, tr_expr(expr.arg), loc=expr.loc)
        if isinstance(expr, Card):
            return Card(tr_expr(expr.arg), loc=expr.loc)
        if isinstance(expr, Intersect):
            return Intersect(tr_expr(expr.lhs), tr_expr(expr.rhs),
                             loc=expr.loc)
        raise UnsupportedConstruct(type(expr).__name__, expr.loc)

    def tr_stmt(stmt: Statement):
        if isinstance(stmt, Constraint):
            return EclConstraint(tr_expr(stmt.expr))
        if isinstance(stmt, Forall):
            return ForLoop(namer.get(stmt.index), tr_expr(stmt.lower),
                           tr_expr(stmt.upper), [],
                           [tr_stmt(s) for s in stmt.body])
        raise UnsupportedConstruct(type(stmt).__name__, stmt.loc)

    for el in p.elements:
        if isinstance(el, ConstraintZone):
            body.extend(tr_stmt(s) for s in el.statements)
        elif isinstance(el, Statement):
            body.append(tr_stmt(el))

    body.append(LabelSets("L"))
    pred_name = p.name[0].lower() + p.name[1:] if p.name else "model"
    model = EclModel([EclPredicate(pred_name, ["L"], body)])
    model._list_map = list_map  # consumed by introduce_locals
    return model


# --------------------------------------------------------------------------
# Local-variable introduction (nth / cardinality lowering)
# --------------------------------------------------------------------------


def introduce_locals(m: EclModel) -> EclModel:
    """Split indexed accesses and cardinalities out of constraints.

    Within one constraint an index expression is bound once and its
    element local reused; the V-counter is shared across the predicate
    and starts at 1.
    """
    list_map = getattr(m, "_list_map", {})
    counter = [0]

    def fresh() -> str:
        counter[0] += 1
        return f"V{counter[0]}"

    def lower_atoms(atoms: list) -> list:
        out = []
        for atom in atoms:
            if isinstance(atom, ForLoop):
                out.append(ForLoop(atom.iter, atom.from_expr, atom.to_expr,
                                   list(atom.params),
                                   lower_atoms(atom.body)))
            elif isinstance(atom, EclConstraint):
                emitted: list = []
                cache: dict = {}
                expr = lower_expr(atom.expr, emitted, cache)
                out.extend(emitted)
                out.append(EclConstraint(expr))
            else:
                out.append(atom)
        return out

    def lower_expr(expr: Expression, emitted: list, cache: dict):
        if isinstance(expr, VarRef):
            step = expr.path[0]
            if not step.indices:
                return expr
            index = lower_expr(step.indices[0], emitted, cache)
            list_var = list_map.get(step.name, step.name)
            key = (list_var, render_expr(index))
            if key not in cache:
                idx_var = fresh()
                emitted.append(IsBind(idx_var, index))
                elem_var = fresh()
                emitted.append(NthCall(elem_var, idx_var, list_var))
                cache[key] = elem_var
            return simple_ref(cache[key])
        if isinstance(expr, Card):
            inner = lower_expr(expr.arg, emitted, cache)
            out_var = fresh()
            emitted.append(CardBind(inner, out_var))
            return simple_ref(out_var)
        if isinstance(expr, BinOp):
            return BinOp(expr.op, lower_expr(expr.lhs, emitted, cache),
                         lower_expr(expr.rhs, emitted, cache), loc=expr.loc)
        if isinstance(expr, UnOp):
            return UnOp(expr.op, lower_expr(expr.arg, emitted, cache),
                        loc=expr.loc)
        if isinstance(expr, Intersect):
            return Intersect(lower_expr(expr.lhs, emitted, cache),
                             lower_expr(expr.rhs, emitted, cache),
                             loc=expr.loc)
        return expr

    out = EclModel([EclPredicate(pr.name, list(pr.params),
                                 lower_atoms(pr.body))
                    for pr in m.predicates])
    return out


# --------------------------------------------------------------------------
# Param lists
# --------------------------------------------------------------------------


def fill_params(m: EclModel) -> EclModel:
    """Compute every loop's param list: the free names of its body that
    are bound outside it, ordered alias first, then declaration order,
    then enclosing iterators outermost-first."""
    for pred in m.predicates:
        rank: dict[str, int] = {"L": 0}
        next_decl = 1
        for atom in pred.body:
            for name in _binds(atom):
                if name not in rank:
                    rank[name] = next_decl
                    next_decl += 1

        def order(names: set[str]) -> list[str]:
            return sorted(names, key=lambda n: (rank.get(n, 10_000), n))

        def fill(atoms: list, depth: int) -> set[str]:
            bound: set[str] = set()
            free: set[str] = set()
            for atom in atoms:
                if isinstance(atom, ForLoop):
                    rank.setdefault(atom.iter, 1000 + depth)
                    child_free = fill(atom.body, depth + 1)
                    child_free.discard(atom.iter)
                    atom.params = order(child_free)
                    refs = free_names(atom.from_expr) \
                        | free_names(atom.to_expr) | set(atom.params)
                else:
                    refs = _refs(atom)
                free |= refs - bound
                bound |= _binds(atom)
            return free

        fill(pred.body, 1)
    return m


def _binds(atom) -> set[str]:
    if isinstance(atom, ConstBind):
        return {atom.name}
    if isinstance(atom, (IntsetsDecl, IntArrayDecl)):
        return {atom.list_var}
    if isinstance(atom, (ScalarDecl, ScalarSetDecl)):
        return {atom.name}
    if isinstance(atom, ListAlias):
        return {atom.name}
    if isinstance(atom, IsBind):
        return {atom.var}
    if isinstance(atom, NthCall):
        return {atom.out_var}
    if isinstance(atom, CardBind):
        return {atom.out_var}
    return set()


def _refs(atom) -> set[str]:
    if isinstance(atom, ListAlias):
        if isinstance(atom.target, str):
            return {atom.target}
        return set(atom.target)
    if isinstance(atom, IsBind):
        return free_names(atom.expr)
    if isinstance(atom, NthCall):
        return {atom.index_var, atom.list_var}
    if isinstance(atom, CardBind):
        return free_names(atom.set_expr)
    if isinstance(atom, EclConstraint):
        return free_names(atom.expr)
    if isinstance(atom, LabelSets):
        return {atom.list_var}
    return set()


def to_eclipse(p: PivotModel) -> EclModel:
    """Full pivot-to-target translation: structure, locals, params."""
    return fill_params(introduce_locals(translate(p)))


# --------------------------------------------------------------------------
# Emission
# --------------------------------------------------------------------------

_CMP = {"=": "#=", "!=": "#\\=", "<": "#<", "<=": "#=<",
        ">": "#>", ">=": "#>="}
_LOGIC = {"and": "#/\\", "or": "#\\/", "implies": "#=>"}


def _arith(expr: Expression) -> str:
    return render_expr(expr)


def _set_text(expr: Expression) -> str:
    if isinstance(expr, Intersect):
        return f"{_set_text(expr.lhs)} /\\ {_set_text(expr.rhs)}"
    return _arith(expr)


def _constraint_text(expr: Expression) -> str:
    if isinstance(expr, BinOp) and expr.op in _CMP:
        return f"{_arith(expr.lhs)} {_CMP[expr.op]} {_arith(expr.rhs)}"
    if isinstance(expr, BinOp) and expr.op in _LOGIC:
        return f"({_constraint_text(expr.lhs)}) {_LOGIC[expr.op]} " \
               f"({_constraint_text(expr.rhs)})"
    if isinstance(expr, UnOp) and expr.op == "not":
        return f"neg({_constraint_text(expr.arg)})"
    if isinstance(expr, BoolLit):
        return "true" if expr.value else "fail"
    return _arith(expr)


def _atom_text(atom) -> str:
    if isinstance(atom, ConstBind):
        return f"{atom.name} is {_arith(atom.value)}"
    if isinstance(atom, IntsetsDecl):
        return f"intsets({atom.list_var},{atom.count},{atom.lo},{atom.hi})"
    if isinstance(atom, IntArrayDecl):
        return (f"length({atom.list_var},{atom.count}), "
                f"{atom.list_var} :: {atom.lo}..{atom.hi}")
    if isinstance(atom, ScalarDecl):
        return f"{atom.name} :: {atom.lo}..{atom.hi}"
    if isinstance(atom, ScalarSetDecl):
        return f"intset({atom.name},{atom.lo},{atom.hi})"
    if isinstance(atom, ListAlias):
        if isinstance(atom.target, str):
            return f"{atom.name} = {atom.target}"
        return f"{atom.name} = [{', '.join(atom.target)}]"
    if isinstance(atom, IsBind):
        return f"{atom.var} is {_arith(atom.expr)}"
    if isinstance(atom, NthCall):
        return f"nth({atom.out_var},{atom.index_var},{atom.list_var})"
    if isinstance(atom, CardBind):
        return f"#({_set_text(atom.set_expr)}, {atom.out_var})"
    if isinstance(atom, EclConstraint):
        return _constraint_text(atom.expr)
    if isinstance(atom, LabelSets):
        return f"label_sets({atom.list_var})"
    raise TypeError(f"cannot emit {type(atom).__name__}")


def emit(m: EclModel) -> str:
    """Deterministic text: one atom per line, one space of indent per
    for-loop level, LF line endings, terminal period."""
    lines: list[str] = []
    for pred in m.predicates:
        lines.append(f"{pred.name}({','.join(pred.params)}):-")
        _emit_atoms(pred.body, 1, lines, final=".")
    return "\n".join(lines) + "\n"


def _emit_atoms(atoms: list, depth: int, lines: list[str],
                final: str) -> None:
    indent = " " * depth
    for i, atom in enumerate(atoms):
        suffix = final if i == len(atoms) - 1 else ","
        if isinstance(atom, ForLoop):
            param = ""
            if atom.params:
                param = f", param({','.join(atom.params)})"
            lines.append(f"{indent}(for({atom.iter},{_arith(atom.from_expr)},"
                         f"{_arith(atom.to_expr)}){param} do")
            _emit_atoms(atom.body, depth + 1, lines, final="")
            lines.append(f"{indent}){suffix}")
        else:
            lines.append(f"{indent}{_atom_text(atom)}{suffix}")
