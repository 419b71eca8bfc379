"""Model validation: typing, domain and cycle rules over injected models.

Checks never raise; defects come back as :class:`Problem` records with a
severity, a source location and a description. An empty result means the
model is accepted for transformation. Severity policy: type defects,
non-constant or inverted domains and inheritance/composition cycles are
errors; singleton domains are warnings; ``critic`` is reserved for
internal invariant violations detected mid-pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .ir import (ArrayDims, BinOp, BoolLit, Card, ClassType, Constant,
                 Constraint, ConstraintZone, ConstEvalError, EnumLit,
                 EnumType, ExplicitSet, Expression, Forall, IfStmt, IntLit,
                 Intersect, Interval, Loc, PivotModel, RealLit, Record,
                 Statement, UnOp, Variable, VarRef, const_eval)

SEVERITIES = ("error", "warning", "critic")


@dataclass
class Problem:
    """One diagnostic: severity is exactly error, warning or critic."""

    severity: str
    location: str
    description: str

    def line(self) -> str:
        return f"{self.severity} {self.location} {self.description}"


def _loc_text(loc: Optional[Loc]) -> str:
    return str(loc) if loc is not None else "<unknown>"


def problems_to_text(problems: list[Problem]) -> str:
    return "\n".join(p.line() for p in problems)


# type tags: ('int',) ('real',) ('bool',) ('enum', name) ('class', name)
# ('set', base-tag)
_INT = ("int",)
_REAL = ("real",)
_BOOL = ("bool",)


def _is_num(t) -> bool:
    return t in (_INT, _REAL)


def _type_name(t) -> str:
    if t[0] == "set":
        return f"set of {_type_name(t[1])}"
    if t[0] in ("enum", "class"):
        return f"{t[0]} {t[1]}"
    return t[0]


@dataclass
class _VarInfo:
    name: str
    base: tuple
    is_set: bool
    dims: Optional[ArrayDims]


class _ModelInfo:
    """Symbol tables derived from an injected model."""

    def __init__(self, model: PivotModel):
        self.model = model
        self.enums = {e.name: e for e in model.enum_types()}
        self.classes = {c.name: c for c in model.class_types()}
        self.globals: dict[str, object] = {}
        for el in model.elements:
            if isinstance(el, Constant):
                self.globals[el.name] = el
            elif isinstance(el, Variable):
                self.globals[el.name] = self._var_info(el)
        self._feature_cache: dict[str, dict[str, object]] = {}

    def _var_info(self, var: Variable) -> _VarInfo:
        if var.type in ("int", "real", "bool"):
            base = (var.type,)
        elif var.type in self.enums:
            base = ("enum", var.type)
        elif var.type in self.classes:
            base = ("class", var.type)
        else:
            base = ("class", var.type)  # unresolved; inject prevents this
        return _VarInfo(var.name, base, var.is_set, var.array)

    def class_scope(self, cls: ClassType) -> dict[str, object]:
        """Feature table including inherited features (cycle tolerant)."""
        if cls.name in self._feature_cache:
            return self._feature_cache[cls.name]
        table: dict[str, object] = {}
        self._feature_cache[cls.name] = table

        def collect(name: str, visited: set[str]) -> None:
            if name in visited or name not in self.classes:
                return
            visited.add(name)
            c = self.classes[name]
            for sup in c.super_types:
                collect(sup, visited)
            for feat in c.features:
                if isinstance(feat, Variable):
                    table[feat.name] = self._var_info(feat)
                elif isinstance(feat, Constant):
                    table[feat.name] = feat

        collect(cls.name, set())
        return table


class _TypeChecker:
    def __init__(self, info: _ModelInfo):
        self.info = info
        self.problems: list[Problem] = []
        self.scopes: list[dict[str, object]] = [info.globals]

    def error(self, loc: Optional[Loc], text: str) -> None:
        self.problems.append(Problem("error", _loc_text(loc), text))

    def lookup(self, name: str):
        for table in reversed(self.scopes):
            if name in table:
                return table[name]
        return None

    # -- drivers -----------------------------------------------------------

    def run(self) -> list[Problem]:
        for el in self.info.model.elements:
            if isinstance(el, ClassType):
                self.scopes.append(self.info.class_scope(el))
                for feat in el.features:
                    if isinstance(feat, ConstraintZone):
                        self.check_stmts(feat.statements)
                self.scopes.pop()
            elif isinstance(el, ConstraintZone):
                self.check_stmts(el.statements)
            elif isinstance(el, Statement):
                self.check_stmts([el])
        return self.problems

    def check_stmts(self, stmts: list[Statement]) -> None:
        for stmt in stmts:
            if isinstance(stmt, Constraint):
                t = self.infer(stmt.expr)
                if t is not None and t != _BOOL:
                    self.error(stmt.loc, "constraint expression must be "
                               f"boolean, found {_type_name(t)}")
            elif isinstance(stmt, Forall):
                for bound in (stmt.lower, stmt.upper):
                    t = self.infer(bound)
                    if t is not None and t != _INT:
                        self.error(stmt.loc, "loop bound must be an integer "
                                   f"expression, found {_type_name(t)}")
                self.scopes.append({stmt.index: "index"})
                self.check_stmts(stmt.body)
                self.scopes.pop()
            elif isinstance(stmt, IfStmt):
                t = self.infer(stmt.cond)
                if t is not None and t != _BOOL:
                    self.error(stmt.loc, "if condition must be boolean, "
                               f"found {_type_name(t)}")
                self.check_stmts(stmt.then_body)
                if stmt.else_body is not None:
                    self.check_stmts(stmt.else_body)

    # -- expression typing -------------------------------------------------

    def infer(self, expr: Expression):
        """Type tag of ``expr`` or None once an error was reported."""
        if isinstance(expr, IntLit):
            return _INT
        if isinstance(expr, RealLit):
            return _REAL
        if isinstance(expr, BoolLit):
            return _BOOL
        if isinstance(expr, EnumLit):
            return ("enum", expr.enum)
        if isinstance(expr, VarRef):
            return self._infer_ref(expr)
        if isinstance(expr, Card):
            t = self.infer(expr.arg)
            if t is None:
                return None
            if t[0] != "set":
                self.error(expr.loc,
                           f"card expects a set, found {_type_name(t)}")
                return None
            return _INT
        if isinstance(expr, Intersect):
            lt, rt = self.infer(expr.lhs), self.infer(expr.rhs)
            if lt is None or rt is None:
                return None
            if lt[0] != "set" or rt[0] != "set" or lt != rt:
                self.error(expr.loc, "intersect expects two sets of the same "
                           f"element type, found {_type_name(lt)} and "
                           f"{_type_name(rt)}")
                return None
            return lt
        if isinstance(expr, UnOp):
            t = self.infer(expr.arg)
            if t is None:
                return None
            if expr.op == "-":
                if not _is_num(t):
                    self.error(expr.loc, "unary minus expects a numeric "
                               f"operand, found {_type_name(t)}")
                    return None
                return t
            if t != _BOOL:
                self.error(expr.loc, "not expects a boolean operand, found "
                           f"{_type_name(t)}")
                return None
            return _BOOL
        if isinstance(expr, BinOp):
            return self._infer_binop(expr)
        return None

    def _infer_binop(self, expr: BinOp):
        lt, rt = self.infer(expr.lhs), self.infer(expr.rhs)
        if lt is None or rt is None:
            return None
        op = expr.op
        if op in ("+", "-", "*", "/"):
            if not (_is_num(lt) and _is_num(rt)):
                self.error(expr.loc, f"operator '{op}' expects numeric "
                           f"operands, found {_type_name(lt)} and "
                           f"{_type_name(rt)}")
                return None
            return _REAL if _REAL in (lt, rt) else _INT
        if op in ("<", "<=", ">", ">="):
            if not (_is_num(lt) and _is_num(rt)):
                self.error(expr.loc, f"operator '{op}' expects numeric "
                           f"operands, found {_type_name(lt)} and "
                           f"{_type_name(rt)}")
                return None
            return _BOOL
        if op in ("=", "!="):
            if lt == _BOOL or rt == _BOOL:
                side = expr.lhs if lt == _BOOL else expr.rhs
                if isinstance(side, BinOp) and side.op in ("=", "!="):
                    self.error(expr.loc, "equality nested inside an equality "
                               "constraint")
                else:
                    self.error(expr.loc, f"operator '{op}' cannot take a "
                               "boolean operand")
                return _BOOL
            if _is_num(lt) and _is_num(rt):
                return _BOOL
            if lt == rt and lt[0] in ("enum", "set"):
                return _BOOL
            self.error(expr.loc, f"operator '{op}' expects operands of a "
                       f"common type, found {_type_name(lt)} and "
                       f"{_type_name(rt)}")
            return _BOOL
        if op in ("and", "or", "implies"):
            ok = True
            for t, side in ((lt, "left"), (rt, "right")):
                if t != _BOOL:
                    self.error(expr.loc, f"operator '{op}' expects boolean "
                               f"operands, {side} operand is {_type_name(t)}")
                    ok = False
            return _BOOL if ok else None
        return None

    def _infer_ref(self, ref: VarRef):
        entry = self.lookup(ref.path[0].name)
        if entry is None:
            self.error(ref.loc, f"unresolved name '{ref.path[0].name}'")
            return None
        for step in ref.path:
            for idx in step.indices:
                t = self.infer(idx)
                if t is not None and t != _INT:
                    self.error(ref.loc, "array index must be an integer "
                               f"expression, found {_type_name(t)}")
        for pos, step in enumerate(ref.path):
            last = pos == len(ref.path) - 1
            if entry == "index":
                if not last or step.indices:
                    self.error(ref.loc, f"loop index '{step.name}' is not an "
                               "array or object")
                    return None
                return _INT
            if isinstance(entry, Constant):
                if not last or step.indices:
                    self.error(ref.loc, f"constant '{step.name}' is not an "
                               "array or object")
                    return None
                return (entry.type,)
            if not isinstance(entry, _VarInfo):
                self.error(ref.loc, f"'{step.name}' is not a value")
                return None
            expected = entry.dims.count() if entry.dims else 0
            if len(step.indices) != expected:
                self.error(ref.loc, f"'{step.name}' expects {expected} "
                           f"index(es), found {len(step.indices)}")
                return None
            if last:
                if entry.base[0] == "class":
                    self.error(ref.loc, f"object '{step.name}' cannot be "
                               "used as a value")
                    return None
                return ("set", entry.base) if entry.is_set else entry.base
            if entry.base[0] != "class":
                self.error(ref.loc, f"'{step.name}' has no member "
                           f"'{ref.path[pos + 1].name}'")
                return None
            cls = self.info.classes.get(entry.base[1])
            if cls is None:
                self.error(ref.loc, f"unknown class '{entry.base[1]}'")
                return None
            members = self.info.class_scope(cls)
            nxt = ref.path[pos + 1].name
            if nxt not in members:
                self.error(ref.loc, f"'{entry.base[1]}' has no member "
                           f"'{nxt}'")
                return None
            entry = members[nxt]
        return None


def check_types(p: PivotModel) -> list[Problem]:
    """Flag operator/operand mismatches and chained equalities."""
    return _TypeChecker(_ModelInfo(p)).run()


def _const_env(model: PivotModel, cls: Optional[ClassType],
               info: _ModelInfo) -> dict:
    env = {}
    for el in model.elements:
        if isinstance(el, Constant):
            env[el.name] = const_eval(el.value)
    if cls is not None:
        for feat in info.class_scope(cls).values():
            if isinstance(feat, Constant):
                env[feat.name] = const_eval(feat.value)
    return env


def check_domains(p: PivotModel) -> list[Problem]:
    """Domain bounds must be constant; intervals non-empty (singleton is
    a warning); explicit sets non-empty; array dimensions constant and
    positive."""
    info = _ModelInfo(p)
    problems: list[Problem] = []

    def eval_const(expr: Expression, env: dict):
        try:
            return const_eval(expr, env)
        except ConstEvalError:
            return None

    def check_var(var: Variable, env: dict) -> None:
        if var.array is not None:
            dims = [var.array.n]
            if var.array.m is not None:
                dims.append(var.array.m)
            for d in dims:
                v = eval_const(d, env)
                if v is None or isinstance(v, (bool, float)):
                    problems.append(Problem(
                        "error", _loc_text(var.loc),
                        f"array dimension of '{var.name}' must be a constant "
                        "integer expression"))
                elif v < 1:
                    problems.append(Problem(
                        "error", _loc_text(var.loc),
                        f"array dimension of '{var.name}' must be positive"))
        dom = var.domain
        if dom is None:
            return
        if isinstance(dom, Interval):
            lo = eval_const(dom.lower, env)
            hi = eval_const(dom.upper, env)
            if lo is None or hi is None or isinstance(lo, bool) \
                    or isinstance(hi, bool):
                problems.append(Problem(
                    "error", _loc_text(var.loc),
                    f"domain bound of '{var.name}' must be a constant "
                    "expression"))
                return
            if lo > hi:
                problems.append(Problem(
                    "error", _loc_text(var.loc),
                    f"empty domain of '{var.name}': lower bound must be "
                    "smaller than the upper bound"))
            elif lo == hi:
                problems.append(Problem(
                    "warning", _loc_text(var.loc),
                    f"singleton domain of '{var.name}': both bounds equal "
                    f"{lo}"))
        elif isinstance(dom, ExplicitSet):
            if not dom.values:
                problems.append(Problem(
                    "error", _loc_text(var.loc),
                    f"empty explicit domain of '{var.name}'"))
            for v in dom.values:
                if isinstance(v, EnumLit):
                    continue
                if eval_const(v, env) is None:
                    problems.append(Problem(
                        "error", _loc_text(var.loc),
                        f"domain value of '{var.name}' must be a constant "
                        "expression"))

    for el in p.elements:
        if isinstance(el, Variable):
            check_var(el, _const_env(p, None, info))
        elif isinstance(el, ClassType):
            env = _const_env(p, el, info)
            for feat in el.features:
                if isinstance(feat, Variable):
                    check_var(feat, env)
    return problems


def _cycles(nodes: list[str], edges: dict[str, list[str]]) -> list[list[str]]:
    """Directed cycles, each reported once, deterministic order."""
    found: list[list[str]] = []
    seen: set[tuple] = set()
    node_set = set(nodes)

    for start in nodes:
        def walk(u: str, path: list[str]) -> None:
            for v in edges.get(u, ()):  # noqa: B023
                if v == start:
                    cycle = path[:]
                    pivot = cycle.index(min(cycle))
                    key = tuple(cycle[pivot:] + cycle[:pivot])
                    if key not in seen:
                        seen.add(key)
                        found.append(cycle)
                elif v in node_set and v not in path:
                    walk(v, path + [v])

        walk(start, [start])
    return found


def check_cycles(p: PivotModel) -> list[Problem]:
    """No inheritance or composition loops among classes."""
    classes = p.class_types()
    names = [c.name for c in classes]
    by_name = {c.name: c for c in classes}
    class_set = set(names)

    inherit = {c.name: [s for s in c.super_types if s in class_set]
               for c in classes}
    compose = {}
    for c in classes:
        targets = []
        for feat in c.features:
            if isinstance(feat, Variable) and feat.type in class_set:
                targets.append(feat.type)
        compose[c.name] = targets

    problems: list[Problem] = []
    for kind, edges in (("inheritance", inherit), ("composition", compose)):
        for cycle in _cycles(names, edges):
            loc = by_name[cycle[0]].loc
            path = " -> ".join(cycle + [cycle[0]])
            problems.append(Problem("error", _loc_text(loc),
                                    f"{kind} cycle: {path}"))
    return problems


def check(p: PivotModel) -> list[Problem]:
    """All checks, in a deterministic order; [] means accepted."""
    return check_types(p) + check_domains(p) + check_cycles(p)
