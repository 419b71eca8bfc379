"""Exhaustive interpreter over pivot models.

Enumerates every assignment of the model's variables at desk scale and
returns the exact solution set. This is the semantic-equivalence oracle
used to certify that refactoring passes preserve meaning: two models are
equivalent when their solution sets coincide under the name map emitted
by the pass that separates them.

Semantics: statements are a conjunction; ``forall`` is conjunction over
its inclusive range; ``if`` is conditional satisfaction; sets are finite
subsets of their declared universe; enum values evaluate to their
1-based position (solution text renders the literal). Integer division
truncates toward zero and division by zero makes a candidate infeasible.
Real-typed variables are rejected: they cannot be enumerated.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .ir import (BinOp, BoolLit, Card, ClassType, Constant, Constraint,
                 ConstraintZone, ConstEvalError, EnumLit, EnumType,
                 ExplicitSet, Expression, Forall, IfStmt, IntLit, Intersect,
                 Interval, PivotModel, Predicate, RealLit, Record, Statement,
                 UnOp, Variable, VarRef, const_eval, int_div)

Key = tuple  # ((name, (i, ...)), ...) — instance path of one variable


class OracleError(Exception):
    pass


class SearchSpaceExceeded(OracleError):
    pass


class UnboundedDomain(OracleError):
    pass


class _Infeasible(Exception):
    """Candidate-local failure (division by zero during evaluation)."""


@dataclass
class Instance:
    """Concrete problem instance: constant overrides plus universe caps."""

    consts: dict[str, int] = field(default_factory=dict)
    max_set_universe: int = 6
    max_domain_width: int = 32
    max_space: int = 10_000_000


def key_text(key: Key) -> str:
    parts = []
    for name, idx in key:
        if idx:
            parts.append(f"{name}[{','.join(str(i) for i in idx)}]")
        else:
            parts.append(name)
    return ".".join(parts)


def value_text(value, literals=None) -> str:
    def one(v):
        if literals is not None:
            return literals[v - 1]
        if isinstance(v, bool):
            return "true" if v else "false"
        return str(v)

    if isinstance(value, frozenset):
        return "{" + ",".join(one(v) for v in sorted(value)) + "}"
    return one(value)


@dataclass
class SolutionSet:
    """Canonicalized solutions: duplicate-free, sorted lexicographically
    by their rendered text."""

    keys: tuple[Key, ...]
    rows: tuple[tuple, ...]
    enum_literals: dict[Key, list[str]] = field(default_factory=dict,
                                                compare=False)

    def __len__(self) -> int:
        return len(self.rows)

    def assignments(self) -> list[dict]:
        return [dict(zip(self.keys, row)) for row in self.rows]

    def as_set(self) -> set[frozenset]:
        return {frozenset(zip(self.keys, row)) for row in self.rows}

    def lines(self) -> list[str]:
        out = []
        for row in self.rows:
            parts = []
            for key, val in zip(self.keys, row):
                lits = self.enum_literals.get(key)
                parts.append(f"{key_text(key)}={value_text(val, lits)}")
            out.append(" ".join(parts))
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, SolutionSet):
            return NotImplemented
        return self.keys == other.keys and set(self.rows) == set(other.rows)


# --------------------------------------------------------------------------
# Instance-space construction
# --------------------------------------------------------------------------


class _Group:
    """Resolution node for one composite scope (class body or record)."""

    __slots__ = ("children", "statements")

    def __init__(self):
        self.children: dict[str, tuple] = {}  # name -> tagged entry
        self.statements: list[Statement] = []


class _Space:
    def __init__(self, model: PivotModel, inst: Instance):
        self.model = model
        self.inst = inst
        self.enums = {e.name: e for e in model.enum_types()}
        self.classes = {c.name: c for c in model.class_types()}
        self.consts: dict[str, object] = {}
        for el in model.elements:
            if isinstance(el, Constant):
                self.consts[el.name] = const_eval(el.value)
        self.consts.update(inst.consts)

        self.var_keys: list[Key] = []
        self.var_domains: list[list] = []
        self.enum_literals: dict[Key, list[str]] = {}
        # (statement, scopes) where scopes is innermost-first
        self.stmts: list[tuple[Statement, list]] = []
        self._group_cache: dict[int, _Group] = {}

        root_features = self._root_features()
        root = self._build_group(root_features)
        self._instantiate(root, (), [])
        self._check_space()

    def _root_features(self) -> list:
        main = self.model.main_class()
        if main is not None:
            feats = list(self._class_features(main.name, set()))
            extra = [el for el in self.model.elements
                     if isinstance(el, (ConstraintZone, Statement))]
            return feats + extra
        return [el for el in self.model.elements
                if not isinstance(el, (EnumType, ClassType, Constant,
                                       Predicate))]

    def _class_features(self, name: str, visited: set[str]):
        if name in visited or name not in self.classes:
            return
        visited.add(name)
        cls = self.classes[name]
        for sup in cls.super_types:
            yield from self._class_features(sup, visited)
        yield from cls.features

    def _build_group(self, features) -> _Group:
        group = _Group()
        for feat in features:
            if isinstance(feat, Variable):
                if feat.type in self.classes:
                    sub = self._build_group(
                        list(self._class_features(feat.type, set())))
                    group.children[feat.name] = ("sub", sub, feat.array)
                else:
                    group.children[feat.name] = ("var", feat)
            elif isinstance(feat, Record):
                sub_feats = [e for e in feat.elements
                             if not isinstance(e, Statement)]
                sub = self._build_group(sub_feats)
                sub.statements.extend(
                    e for e in feat.elements if isinstance(e, Statement))
                group.children[feat.name] = ("sub", sub, feat.array)
            elif isinstance(feat, Constant):
                group.children[feat.name] = ("const", const_eval(feat.value))
            elif isinstance(feat, ConstraintZone):
                group.statements.extend(feat.statements)
            elif isinstance(feat, Statement):
                group.statements.append(feat)
        return group

    def _dim_values(self, dims) -> list[tuple[int, ...]]:
        if dims is None:
            return [()]
        sizes = []
        for d in (dims.n, dims.m):
            if d is None:
                continue
            v = const_eval(d, self.consts)
            if not isinstance(v, int) or isinstance(v, bool):
                raise UnboundedDomain("array dimension does not evaluate "
                                      "to an integer constant")
            sizes.append(v)
        ranges = [range(1, s + 1) for s in sizes]
        return [tuple(c) for c in itertools.product(*ranges)]

    def _instantiate(self, group: _Group, prefix: Key, outer_scopes) -> None:
        scopes = [(group, prefix)] + outer_scopes
        for name, entry in group.children.items():
            if entry[0] == "var":
                var = entry[1]
                for idx in self._dim_values(var.array):
                    key = prefix + ((name, idx),)
                    values, literals = self._domain_values(var)
                    self.var_keys.append(key)
                    self.var_domains.append(values)
                    if literals is not None:
                        self.enum_literals[key] = literals
            elif entry[0] == "sub":
                _, sub, dims = entry
                for idx in self._dim_values(dims):
                    self._instantiate(sub, prefix + ((name, idx),), scopes)
        for stmt in group.statements:
            self.stmts.append((stmt, scopes))

    def _domain_values(self, var: Variable):
        inst = self.inst
        if var.type == "real":
            raise UnboundedDomain(f"real variable '{var.name}' cannot be "
                                  "enumerated")
        if var.type == "bool":
            if var.is_set:
                raise UnboundedDomain(f"set of bool '{var.name}' is not "
                                      "supported")
            return [False, True], None

        if var.type in self.enums:
            literals = self.enums[var.type].literals
            universe = list(range(1, len(literals) + 1))
        else:
            universe = self._interval_universe(var)
            literals = None

        if var.is_set:
            if len(universe) > inst.max_set_universe:
                raise SearchSpaceExceeded(
                    f"set universe of '{var.name}' has {len(universe)} "
                    f"elements (cap {inst.max_set_universe})")
            subsets = []
            for mask in range(1 << len(universe)):
                subsets.append(frozenset(
                    universe[i] for i in range(len(universe))
                    if mask >> i & 1))
            return subsets, literals
        if len(universe) > inst.max_domain_width:
            raise SearchSpaceExceeded(
                f"domain of '{var.name}' has {len(universe)} values "
                f"(cap {inst.max_domain_width})")
        return universe, literals

    def _interval_universe(self, var: Variable) -> list[int]:
        dom = var.domain
        if dom is None:
            raise UnboundedDomain(f"variable '{var.name}' has no domain")
        if isinstance(dom, Interval):
            lo = const_eval(dom.lower, self.consts)
            hi = const_eval(dom.upper, self.consts)
            if not isinstance(lo, int) or not isinstance(hi, int) \
                    or isinstance(lo, bool) or isinstance(hi, bool):
                raise UnboundedDomain(f"domain bounds of '{var.name}' do "
                                      "not evaluate to integer constants")
            return list(range(lo, hi + 1))
        if isinstance(dom, ExplicitSet):
            values = []
            for v in dom.values:
                if isinstance(v, EnumLit):
                    values.append(self._enum_position(v))
                    continue
                c = const_eval(v, self.consts)
                if not isinstance(c, int) or isinstance(c, bool):
                    raise UnboundedDomain(f"domain value of '{var.name}' is "
                                          "not an integer constant")
                values.append(c)
            return values
        raise UnboundedDomain(f"unsupported domain on '{var.name}'")

    def _enum_position(self, lit: EnumLit) -> int:
        literals = self.enums[lit.enum].literals
        return literals.index(lit.literal) + 1

    def _check_space(self) -> None:
        space = 1
        for dom in self.var_domains:
            space *= len(dom)
            if space > self.inst.max_space:
                raise SearchSpaceExceeded(
                    f"search space exceeds cap of {self.inst.max_space} "
                    "candidate assignments")


# --------------------------------------------------------------------------
# Evaluation
# --------------------------------------------------------------------------


class _Evaluator:
    def __init__(self, space: _Space):
        self.space = space
        self.assign: dict[Key, object] = {}
        self.locals: dict[str, int] = {}

    def satisfied(self, candidate: dict[Key, object]) -> bool:
        self.assign = candidate
        try:
            return all(self._stmt(stmt, scopes)
                       for stmt, scopes in self.space.stmts)
        except _Infeasible:
            return False

    def _stmt(self, stmt: Statement, scopes) -> bool:
        if isinstance(stmt, Constraint):
            return bool(self._eval(stmt.expr, scopes))
        if isinstance(stmt, Forall):
            lo = self._int(self._eval(stmt.lower, scopes))
            hi = self._int(self._eval(stmt.upper, scopes))
            shadow = self.locals.get(stmt.index)
            had = stmt.index in self.locals
            try:
                for k in range(lo, hi + 1):
                    self.locals[stmt.index] = k
                    if not all(self._stmt(s, scopes) for s in stmt.body):
                        return False
            finally:
                if had:
                    self.locals[stmt.index] = shadow
                else:
                    self.locals.pop(stmt.index, None)
            return True
        if isinstance(stmt, IfStmt):
            if bool(self._eval(stmt.cond, scopes)):
                return all(self._stmt(s, scopes) for s in stmt.then_body)
            if stmt.else_body is not None:
                return all(self._stmt(s, scopes) for s in stmt.else_body)
            return True
        raise OracleError(f"cannot interpret {type(stmt).__name__}")

    @staticmethod
    def _int(v) -> int:
        if isinstance(v, bool) or not isinstance(v, int):
            raise OracleError("loop bound is not an integer")
        return v

    def _eval(self, expr: Expression, scopes):
        if isinstance(expr, IntLit):
            return expr.value
        if isinstance(expr, RealLit):
            return expr.value
        if isinstance(expr, BoolLit):
            return expr.value
        if isinstance(expr, EnumLit):
            return self.space._enum_position(expr)
        if isinstance(expr, VarRef):
            return self._ref(expr, scopes)
        if isinstance(expr, Card):
            return len(self._set(self._eval(expr.arg, scopes)))
        if isinstance(expr, Intersect):
            return self._set(self._eval(expr.lhs, scopes)) & \
                self._set(self._eval(expr.rhs, scopes))
        if isinstance(expr, UnOp):
            v = self._eval(expr.arg, scopes)
            return (not v) if expr.op == "not" else -v
        if isinstance(expr, BinOp):
            a = self._eval(expr.lhs, scopes)
            b = self._eval(expr.rhs, scopes)
            op = expr.op
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if op == "/":
                try:
                    if isinstance(a, int) and isinstance(b, int):
                        return int_div(a, b)
                    return a / b
                except ZeroDivisionError:
                    raise _Infeasible()
            if op == "=":
                return a == b
            if op == "!=":
                return a != b
            if op == "<":
                return a < b
            if op == "<=":
                return a <= b
            if op == ">":
                return a > b
            if op == ">=":
                return a >= b
            if op == "and":
                return bool(a) and bool(b)
            if op == "or":
                return bool(a) or bool(b)
            if op == "implies":
                return (not a) or bool(b)
        raise OracleError(f"cannot evaluate {type(expr).__name__}")

    @staticmethod
    def _set(v) -> frozenset:
        if not isinstance(v, frozenset):
            raise OracleError("set operation on a non-set value")
        return v

    def _ref(self, ref: VarRef, scopes):
        base = ref.path[0]
        if base.name in self.locals and not base.indices \
                and len(ref.path) == 1:
            return self.locals[base.name]
        for group, prefix in scopes:
            if base.name in group.children:
                return self._navigate(ref, group, prefix, scopes)
        if base.name in self.space.consts:
            return self.space.consts[base.name]
        raise OracleError(f"unresolved name '{base.name}' during evaluation")

    def _navigate(self, ref: VarRef, group: _Group, prefix: Key, scopes):
        entry = group.children[ref.path[0].name]
        key = prefix
        for pos, step in enumerate(ref.path):
            idx = tuple(self._int(self._eval(i, scopes))
                        for i in step.indices)
            kind = entry[0]
            if kind == "const":
                return entry[1]
            key = key + ((step.name, idx),)
            if kind == "var":
                if key not in self.assign:
                    raise OracleError(f"no variable instance {key_text(key)}")
                return self.assign[key]
            sub = entry[1]
            if pos + 1 >= len(ref.path):
                raise OracleError(f"'{step.name}' is not a leaf variable")
            nxt = ref.path[pos + 1].name
            if nxt not in sub.children:
                raise OracleError(f"no member '{nxt}' under '{step.name}'")
            entry = sub.children[nxt]
        raise OracleError("invalid access path")


# --------------------------------------------------------------------------
# Public API
# --------------------------------------------------------------------------


def solutions(p: PivotModel, inst: Instance | None = None,
              strategy: str = "filter") -> SolutionSet:
    """Exact solution set of the model under an instance.

    ``strategy`` selects between the default filter-during-enumeration
    walk and a naive materialize-then-filter sweep; both must agree and
    the second exists as an internal cross-check.
    """
    inst = inst or Instance()
    space = _Space(p, inst)
    ev = _Evaluator(space)
    keys = list(space.var_keys)

    rows = []
    if strategy == "filter":
        for combo in itertools.product(*space.var_domains):
            if ev.satisfied(dict(zip(keys, combo))):
                rows.append(tuple(combo))
    elif strategy == "materialize":
        candidates = list(itertools.product(*space.var_domains))
        verdicts = [ev.satisfied(dict(zip(keys, combo)))
                    for combo in candidates]
        rows = [tuple(c) for c, ok in zip(candidates, verdicts) if ok]
    else:
        raise ValueError(f"unknown strategy {strategy!r}")

    order = sorted(range(len(keys)), key=lambda i: key_text(keys[i]))
    sorted_keys = tuple(keys[i] for i in order)
    reordered = [tuple(row[i] for i in order) for row in rows]
    lits = {keys[i]: space.enum_literals[keys[i]]
            for i in order if keys[i] in space.enum_literals}

    def row_sort(row):
        return tuple(value_text(v) for v in row)

    return SolutionSet(sorted_keys, tuple(sorted(reordered, key=row_sort)),
                       lits)


def _const_env_of(model: PivotModel, inst: Instance) -> dict:
    env = {}
    for el in model.elements:
        if isinstance(el, Constant):
            env[el.name] = const_eval(el.value)
    env.update(inst.consts)
    return env


def equivalent(a: PivotModel, b: PivotModel, name_maps=None,
               inst: Instance | None = None):
    """True iff map-translated solutions(a) equals solutions(b).

    ``name_maps`` is one name map or a sequence applied left to right
    (None entries are identity). On mismatch the second result is one
    witness assignment from the symmetric difference, rendered as text.
    """
    inst = inst or Instance()
    sols_a = solutions(a, inst)
    sols_b = solutions(b, inst)
    env = _const_env_of(a, inst)

    if name_maps is None:
        maps = []
    elif isinstance(name_maps, (list, tuple)):
        maps = [m for m in name_maps if m is not None]
    else:
        maps = [name_maps]

    translated = set()
    for asg in sols_a.assignments():
        for m in maps:
            asg = m.translate_assignment(asg, env)
        translated.add(frozenset(asg.items()))

    target = sols_b.as_set()
    if translated == target:
        return True, None

    diff = sorted(translated.symmetric_difference(target),
                  key=lambda s: sorted(key_text(k) for k, _ in s))
    witness = {key_text(k): value_text(v) for k, v in sorted(
        diff[0], key=lambda kv: key_text(kv[0]))}
    return False, witness
