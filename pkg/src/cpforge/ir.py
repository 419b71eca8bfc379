"""Pivot representation of constraint models.

The pivot is the language-neutral middle stage of the transpiler: source
models are injected into it, refactoring passes rewrite it, and backends
read it out. Everything here is a plain dataclass tree; structural
equality ignores source locations but nothing else. Models are treated
as immutable values: passes build new trees via :func:`duplicate` and
never mutate their input.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field, fields, is_dataclass
from typing import Iterator, Optional, Union


@dataclass
class Loc:
    """Source position, kept for diagnostics only (never compared)."""

    file: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


def _loc():
    return field(default=None, compare=False, repr=False)


# --------------------------------------------------------------------------
# Expressions
# --------------------------------------------------------------------------


@dataclass
class Expression:
    pass


@dataclass
class IntLit(Expression):
    value: int
    loc: Optional[Loc] = _loc()


@dataclass
class RealLit(Expression):
    value: float
    loc: Optional[Loc] = _loc()


@dataclass
class BoolLit(Expression):
    value: bool
    loc: Optional[Loc] = _loc()


@dataclass
class EnumLit(Expression):
    """A resolved reference to one literal of a declared enumeration."""

    enum: str
    literal: str
    loc: Optional[Loc] = _loc()


@dataclass
class AccessStep:
    """One segment of an access path: a name plus optional index expressions.

    Index lists hold one entry for vectors and two for matrices.
    """

    name: str
    indices: list[Expression] = field(default_factory=list)


@dataclass
class VarRef(Expression):
    """Reference to a variable, constant or loop index.

    Paths longer than one step (``weeks[w1].groups[g1].players``) only
    occur before composition flattening.
    """

    path: list[AccessStep]
    loc: Optional[Loc] = _loc()

    @property
    def base_name(self) -> str:
        return self.path[0].name

    def is_simple(self) -> bool:
        """True for a bare, index-free, single-step name."""
        return len(self.path) == 1 and not self.path[0].indices


def simple_ref(name: str, loc: Optional[Loc] = None) -> VarRef:
    return VarRef([AccessStep(name)], loc=loc)


ARITH_OPS = ("+", "-", "*", "/")
CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")
LOGIC_OPS = ("and", "or", "implies")


@dataclass
class BinOp(Expression):
    op: str
    lhs: Expression
    rhs: Expression
    loc: Optional[Loc] = _loc()


@dataclass
class UnOp(Expression):
    op: str  # "-" or "not"
    arg: Expression
    loc: Optional[Loc] = _loc()


@dataclass
class Card(Expression):
    arg: Expression
    loc: Optional[Loc] = _loc()


@dataclass
class Intersect(Expression):
    lhs: Expression
    rhs: Expression
    loc: Optional[Loc] = _loc()


# --------------------------------------------------------------------------
# Domains and array shapes
# --------------------------------------------------------------------------


@dataclass
class Domain:
    pass


@dataclass
class Interval(Domain):
    lower: Expression
    upper: Expression
    loc: Optional[Loc] = _loc()


@dataclass
class ExplicitSet(Domain):
    values: list[Expression] = field(default_factory=list)
    loc: Optional[Loc] = _loc()


@dataclass
class ArrayDims:
    """Array shape: one dimension for vectors, two for matrices."""

    n: Expression
    m: Optional[Expression] = None

    def count(self) -> int:
        return 2 if self.m is not None else 1


# --------------------------------------------------------------------------
# Statements
# --------------------------------------------------------------------------


@dataclass
class Statement:
    pass


@dataclass
class Constraint(Statement):
    expr: Expression
    loc: Optional[Loc] = _loc()


@dataclass
class Forall(Statement):
    """Conjunction of the body over an inclusive 1-based integer range.

    The index name shadows outer names inside ``body`` only; the range
    bounds are evaluated in the enclosing scope.
    """

    index: str
    lower: Expression
    upper: Expression
    body: list[Statement] = field(default_factory=list)
    loc: Optional[Loc] = _loc()


@dataclass
class IfStmt(Statement):
    cond: Expression
    then_body: list[Statement] = field(default_factory=list)
    else_body: Optional[list[Statement]] = None
    loc: Optional[Loc] = _loc()


# --------------------------------------------------------------------------
# Features and model elements
# --------------------------------------------------------------------------


@dataclass
class Variable:
    """A decision variable. ``type`` names a builtin ('int', 'real',
    'bool'), an EnumType or a ClassType; class-typed variables are
    "object variables" and carry no domain."""

    name: str
    type: str
    is_set: bool = False
    array: Optional[ArrayDims] = None
    domain: Optional[Domain] = None
    loc: Optional[Loc] = _loc()


@dataclass
class Constant:
    name: str
    type: str  # "int" or "real"
    value: Expression = None
    loc: Optional[Loc] = _loc()


@dataclass
class ConstraintZone:
    name: str
    statements: list[Statement] = field(default_factory=list)
    loc: Optional[Loc] = _loc()


@dataclass
class Record:
    """Untyped bundle of features, the intermediate stage of composition
    flattening. Elements may be features or bare statements."""

    name: str
    array: Optional[ArrayDims] = None
    elements: list = field(default_factory=list)
    loc: Optional[Loc] = _loc()


@dataclass
class EnumType:
    name: str
    literals: list[str] = field(default_factory=list)
    loc: Optional[Loc] = _loc()


@dataclass
class ClassType:
    name: str
    super_types: list[str] = field(default_factory=list)
    features: list = field(default_factory=list)
    is_main: bool = False
    is_abstract: bool = False
    loc: Optional[Loc] = _loc()


@dataclass
class Predicate:
    """Present for completeness of the element hierarchy; no pass
    produces or consumes predicates."""

    name: str
    statements: list[Statement] = field(default_factory=list)
    loc: Optional[Loc] = _loc()


Feature = Union[Variable, Constant, ConstraintZone, Record]
ModelElement = Union[EnumType, ClassType, Predicate, Variable, Constant,
                     ConstraintZone, Record, Statement]


@dataclass
class PivotModel:
    name: str
    elements: list = field(default_factory=list)

    def enum_types(self) -> list[EnumType]:
        return [e for e in self.elements if isinstance(e, EnumType)]

    def class_types(self) -> list[ClassType]:
        return [e for e in self.elements if isinstance(e, ClassType)]

    def constants(self) -> list[Constant]:
        return [e for e in self.elements if isinstance(e, Constant)]

    def main_class(self) -> Optional[ClassType]:
        for e in self.elements:
            if isinstance(e, ClassType) and e.is_main:
                return e
        return None


# --------------------------------------------------------------------------
# Generic tree utilities
# --------------------------------------------------------------------------


def duplicate(node):
    """Deep copy sharing no mutable state with the input.

    Repeated calls yield independent copies; source locations survive.
    """
    return copy.deepcopy(node)


def iter_nodes(node) -> Iterator:
    """Yield ``node`` and every dataclass node reachable below it."""
    if is_dataclass(node):
        yield node
        for f in fields(node):
            yield from iter_nodes(getattr(node, f.name))
    elif isinstance(node, (list, tuple)):
        for item in node:
            yield from iter_nodes(item)


def count_kind(node, kind) -> int:
    """Census of nodes of one dataclass kind under ``node``."""
    return sum(1 for n in iter_nodes(node) if isinstance(n, kind))


def substitute(node, name: str, replacement: Expression):
    """Replace every free occurrence of ``name`` by ``replacement``.

    Occurrences bound by an inner Forall index of the same name are left
    alone; Forall bounds are part of the enclosing scope and are always
    rewritten. Index expressions inside access paths are rewritten too.
    """
    if isinstance(node, VarRef):
        if node.is_simple() and node.base_name == name:
            return duplicate(replacement)
        steps = [AccessStep(s.name, [substitute(i, name, replacement)
                                     for i in s.indices])
                 for s in node.path]
        return VarRef(steps, loc=node.loc)
    if isinstance(node, BinOp):
        return BinOp(node.op, substitute(node.lhs, name, replacement),
                     substitute(node.rhs, name, replacement), loc=node.loc)
    if isinstance(node, UnOp):
        return UnOp(node.op, substitute(node.arg, name, replacement),
                    loc=node.loc)
    if isinstance(node, Card):
        return Card(substitute(node.arg, name, replacement), loc=node.loc)
    if isinstance(node, Intersect):
        return Intersect(substitute(node.lhs, name, replacement),
                         substitute(node.rhs, name, replacement),
                         loc=node.loc)
    if isinstance(node, (IntLit, RealLit, BoolLit, EnumLit)):
        return duplicate(node)
    if isinstance(node, Constraint):
        return Constraint(substitute(node.expr, name, replacement),
                          loc=node.loc)
    if isinstance(node, Forall):
        lower = substitute(node.lower, name, replacement)
        upper = substitute(node.upper, name, replacement)
        if node.index == name:
            body = [duplicate(s) for s in node.body]
        else:
            body = [substitute(s, name, replacement) for s in node.body]
        return Forall(node.index, lower, upper, body, loc=node.loc)
    if isinstance(node, IfStmt):
        els = None
        if node.else_body is not None:
            els = [substitute(s, name, replacement) for s in node.else_body]
        return IfStmt(substitute(node.cond, name, replacement),
                      [substitute(s, name, replacement)
                       for s in node.then_body],
                      els, loc=node.loc)
    raise TypeError(f"cannot substitute inside {type(node).__name__}")


def free_names(node) -> set[str]:
    """Names occurring free in a statement or expression.

    Only the first step of an access path is a name use; later steps are
    member selections. Index expressions at every step contribute their
    own free names. Forall indices are bound within the loop body.
    """
    if isinstance(node, VarRef):
        out = {node.path[0].name}
        for step in node.path:
            for idx in step.indices:
                out |= free_names(idx)
        return out
    if isinstance(node, BinOp):
        return free_names(node.lhs) | free_names(node.rhs)
    if isinstance(node, UnOp):
        return free_names(node.arg)
    if isinstance(node, Card):
        return free_names(node.arg)
    if isinstance(node, Intersect):
        return free_names(node.lhs) | free_names(node.rhs)
    if isinstance(node, (IntLit, RealLit, BoolLit, EnumLit)):
        return set()
    if isinstance(node, Constraint):
        return free_names(node.expr)
    if isinstance(node, Forall):
        inner = set()
        for s in node.body:
            inner |= free_names(s)
        inner.discard(node.index)
        return free_names(node.lower) | free_names(node.upper) | inner
    if isinstance(node, IfStmt):
        out = free_names(node.cond)
        for s in node.then_body:
            out |= free_names(s)
        for s in (node.else_body or []):
            out |= free_names(s)
        return out
    if isinstance(node, Interval):
        return free_names(node.lower) | free_names(node.upper)
    if isinstance(node, ExplicitSet):
        out = set()
        for v in node.values:
            out |= free_names(v)
        return out
    raise TypeError(f"cannot take free names of {type(node).__name__}")


def fresh_name(prefix: str, taken) -> str:
    """``prefix`` + smallest positive integer not in ``taken``."""
    taken = set(taken)
    i = 1
    while f"{prefix}{i}" in taken:
        i += 1
    return f"{prefix}{i}"


class ConstEvalError(Exception):
    """Raised when constant evaluation hits integer division by zero."""

    def __init__(self, message: str, loc: Optional[Loc] = None):
        super().__init__(message)
        self.loc = loc


def int_div(a: int, b: int) -> int:
    """Integer division truncating toward zero (matches the evaluator)."""
    if b == 0:
        raise ZeroDivisionError
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def const_eval(expr: Expression, env: dict | None = None):
    """Evaluate an expression over constants; None when not constant.

    ``env`` maps names to numeric values (model constants). Division by
    zero on a fully constant integer expression raises ConstEvalError.
    """
    env = env or {}
    if isinstance(expr, IntLit):
        return expr.value
    if isinstance(expr, RealLit):
        return expr.value
    if isinstance(expr, BoolLit):
        return expr.value
    if isinstance(expr, VarRef):
        if expr.is_simple():
            return env.get(expr.base_name)
        return None
    if isinstance(expr, UnOp):
        v = const_eval(expr.arg, env)
        if v is None:
            return None
        if expr.op == "-":
            return -v if not isinstance(v, bool) else None
        if expr.op == "not":
            return (not v) if isinstance(v, bool) else None
        return None
    if isinstance(expr, BinOp):
        a = const_eval(expr.lhs, env)
        b = const_eval(expr.rhs, env)
        if a is None or b is None:
            return None
        op = expr.op
        if op in ARITH_OPS:
            if isinstance(a, bool) or isinstance(b, bool):
                return None
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if isinstance(a, int) and isinstance(b, int):
                try:
                    return int_div(a, b)
                except ZeroDivisionError:
                    raise ConstEvalError("division by zero in constant "
                                         "expression", expr.loc)
            return a / b if b != 0 else None
        if op in CMP_OPS:
            if isinstance(a, bool) or isinstance(b, bool):
                return None
            return {"=": a == b, "!=": a != b, "<": a < b, "<=": a <= b,
                    ">": a > b, ">=": a >= b}[op]
        if op in LOGIC_OPS:
            if not (isinstance(a, bool) and isinstance(b, bool)):
                return None
            if op == "and":
                return a and b
            if op == "or":
                return a or b
            return (not a) or b
    return None
