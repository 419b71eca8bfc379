"""Chainable pivot-to-pivot refactoring passes.

Each pass is a pure function from one pivot model to a PassResult holding
the rewritten model, a NameMap describing how variable instances were
renamed (consumed by the oracle for equivalence checks) and any warnings.
Passes are independent and composed by :func:`run_chain`, which also
enforces the two ordering constraints: composition flattening before
record flattening, and conditional removal before loop unrolling.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, fields, is_dataclass

from .checker import Problem
from .ir import (AccessStep, ArrayDims, BinOp, BoolLit, ClassType, Constant,
                 Constraint, ConstraintZone, ConstEvalError, EnumLit,
                 EnumType, Expression, Forall, IfStmt, IntLit, Interval, Loc,
                 PivotModel, Predicate, Record, Statement, UnOp, Variable,
                 VarRef, const_eval, duplicate, fresh_name, iter_nodes,
                 simple_ref, substitute)

BUILTIN_TYPES = ("int", "real", "bool")


class PassError(Exception):
    """Failure inside a transformation; ``kind`` is one of unsupported,
    non-constant-bound, division-by-zero, chain-order, internal."""

    def __init__(self, kind: str, message: str, loc: Loc | None = None):
        self.kind = kind
        self.loc = loc
        where = f"{loc}: " if loc else ""
        super().__init__(f"{where}{message}")
        self.message = message


@dataclass
class PathRename:
    """One flattened variable: the old access path, the size expression
    of every index position, the flat name, and whether the positions
    were linearized into a single 1-based row-major index."""

    old_path: tuple[str, ...]
    sizes: tuple[Expression, ...]
    new_name: str
    linearize: bool = True

    def apply(self, key, env) -> tuple:
        idxs = tuple(i for _, idx in key for i in idx)
        if not self.linearize:
            return ((self.new_name, idxs),)
        if not idxs:
            return ((self.new_name, ()),)
        sizes = [const_eval(s, env) for s in self.sizes]
        linear = idxs[0]
        for i, size in zip(idxs[1:], sizes[1:]):
            linear = (linear - 1) * size + i
        return ((self.new_name, (linear,)),)


@dataclass
class NameMap:
    """Variable-instance correspondence induced by one pass.

    An empty map is the identity. ``renames`` covers record/composition
    flattening, ``matrix`` maps a matrix variable to its column-count
    expression, ``enum_values`` records literal positions per variable
    (solution values are positions internally, so it documents rather
    than drives the translation).
    """

    renames: list[PathRename] = field(default_factory=list)
    matrix: dict[str, Expression] = field(default_factory=dict)
    enum_values: dict[str, dict[str, int]] = field(default_factory=dict)

    def translate_assignment(self, assignment: dict, env: dict) -> dict:
        by_path = {r.old_path: r for r in self.renames}
        out = {}
        for key, value in assignment.items():
            names = tuple(name for name, _ in key)
            rule = by_path.get(names)
            if rule is not None:
                key = rule.apply(key, env)
            elif len(key) == 1 and key[0][0] in self.matrix \
                    and len(key[0][1]) == 2:
                name, (i, j) = key[0]
                ncols = const_eval(self.matrix[name], env)
                key = ((name, ((i - 1) * ncols + j,)),)
            out[key] = value
        return out


@dataclass
class PassResult:
    model: PivotModel
    name_map: NameMap = field(default_factory=NameMap)
    problems: list[Problem] = field(default_factory=list)


@dataclass
class ChainResult:
    model: PivotModel
    name_maps: list[NameMap] = field(default_factory=list)
    problems: list[Problem] = field(default_factory=list)
    timings: list[tuple[str, float]] = field(default_factory=list)


# --------------------------------------------------------------------------
# Generic rewriting machinery
# --------------------------------------------------------------------------


def rewrite_expressions(obj, fn):
    """Bottom-up, in-place rewrite of every expression under ``obj``.

    ``fn`` receives each Expression after its children were rewritten and
    returns the node or a replacement. Returns the (possibly replaced)
    object when ``obj`` is itself an expression.
    """
    if isinstance(obj, Expression):
        _rewrite_children(obj, fn)
        return fn(obj)
    if is_dataclass(obj) and not isinstance(obj, Loc):
        _rewrite_children(obj, fn)
        return obj
    if isinstance(obj, list):
        _rewrite_list(obj, fn)
    return obj


def _rewrite_children(obj, fn) -> None:
    for f in fields(obj):
        value = getattr(obj, f.name)
        if isinstance(value, Expression):
            setattr(obj, f.name, rewrite_expressions(value, fn))
        elif is_dataclass(value) and not isinstance(value, Loc):
            rewrite_expressions(value, fn)
        elif isinstance(value, list):
            _rewrite_list(value, fn)


def _rewrite_list(items: list, fn) -> None:
    for i, item in enumerate(items):
        if isinstance(item, Expression):
            items[i] = rewrite_expressions(item, fn)
        elif is_dataclass(item) or isinstance(item, list):
            rewrite_expressions(item, fn)


def _global_const_env(model: PivotModel) -> dict:
    env = {}
    for el in model.elements:
        if isinstance(el, Constant):
            env[el.name] = const_eval(el.value)
    return env


def _transform_statement_lists(model: PivotModel, fn) -> None:
    """In place, replace every statement list by ``fn(stmts, env)``.

    ``env`` carries the constants visible at that point (globals plus
    class or record locals). Top-level and record-level bare statements
    are passed one at a time; the returned list splices in.
    """
    classes = {c.name: c for c in model.class_types()}

    def class_consts(name: str, visited: set[str]) -> dict:
        if name in visited or name not in classes:
            return {}
        visited.add(name)
        env = {}
        for sup in classes[name].super_types:
            env.update(class_consts(sup, visited))
        for feat in classes[name].features:
            if isinstance(feat, Constant):
                env[feat.name] = const_eval(feat.value)
        return env

    def handle(items: list, env: dict) -> list:
        out = []
        for item in items:
            if isinstance(item, Statement):
                out.extend(fn([item], env))
            elif isinstance(item, ConstraintZone):
                item.statements = fn(item.statements, env)
                out.append(item)
            elif isinstance(item, Predicate):
                item.statements = fn(item.statements, env)
                out.append(item)
            elif isinstance(item, ClassType):
                cenv = dict(env)
                cenv.update(class_consts(item.name, set()))
                item.features = handle(item.features, cenv)
                out.append(item)
            elif isinstance(item, Record):
                renv = dict(env)
                for sub in item.elements:
                    if isinstance(sub, Constant):
                        renv[sub.name] = const_eval(sub.value)
                item.elements = handle(item.elements, renv)
                out.append(item)
            else:
                out.append(item)
        return out

    model.elements = handle(model.elements, _global_const_env(model))


# --------------------------------------------------------------------------
# Composition flattening, step 1: classes -> records
# --------------------------------------------------------------------------


def flatten_classes(p: PivotModel) -> PassResult:
    """Remove classes and object variables.

    Each object variable becomes a record named after the variable and
    holding duplicated copies of its class's features (inherited ones
    included, collected supertype-first); the main class's features are
    hoisted to the top level; class declarations disappear.
    """
    classes = {c.name: c for c in p.class_types()}
    enums = {e.name for e in p.enum_types()}
    main = p.main_class()

    def features_of(name: str, visited: set[str]) -> list:
        if name in visited or name not in classes:
            return []
        visited.add(name)
        feats = []
        for sup in classes[name].super_types:
            feats.extend(features_of(sup, visited))
        feats.extend(classes[name].features)
        return feats

    def convert(feat):
        if isinstance(feat, Variable) and feat.type not in BUILTIN_TYPES \
                and feat.type not in enums:
            cls = classes.get(feat.type)
            if cls is None:
                raise PassError("internal", f"object variable '{feat.name}' "
                                f"has undeclared class '{feat.type}'",
                                feat.loc)
            return Record(feat.name, duplicate(feat.array),
                          [convert(f) for f in features_of(cls.name, set())],
                          loc=feat.loc)
        return duplicate(feat)

    elements = []
    for el in p.elements:
        if isinstance(el, ClassType):
            if main is not None and el.name == main.name:
                for feat in features_of(main.name, set()):
                    elements.append(convert(feat))
        else:
            elements.append(duplicate(el))

    names = [e.name for e in elements if hasattr(e, "name")]
    clashes = {n for n in names if names.count(n) > 1}
    if clashes:
        raise PassError("internal", "hoisting the main class collides on "
                        f"name(s) {', '.join(sorted(clashes))}")
    return PassResult(PivotModel(p.name, elements))


# --------------------------------------------------------------------------
# Composition flattening, step 2: records -> flat variables
# --------------------------------------------------------------------------


def flatten_records(p: PivotModel, max_index_positions: int = 2) -> PassResult:
    """Dissolve records into prefixed flat variables.

    Scalar records hoist their features under ``container_feature``
    names. Array records additionally wrap their statements in a new
    loop indexed by the record's name over [1, n], and every access
    through the record is rewritten to the flat array with a 1-based
    row-major index ((i-1)*n_inner + j). Flat variables replace their
    record in place; derived statements are appended after the other
    elements. Nesting deeper than ``max_index_positions`` index
    positions is not supported.
    """
    if any(isinstance(el, ClassType) for el in p.elements):
        raise PassError("unsupported",
                        "record flattening requires a class-free model")
    m = duplicate(p)
    problems: list[Problem] = []
    renames: list[PathRename] = []
    expr_rules: dict[tuple, tuple] = {}
    taken = {el.name for el in m.elements if hasattr(el, "name")}

    new_elements: list = []
    appended: list[Statement] = []

    for el in m.elements:
        if not isinstance(el, Record):
            new_elements.append(el)
            continue
        flat_vars, stmts = _flatten_one_record(
            el, taken, expr_rules, renames, problems, max_index_positions)
        new_elements.extend(flat_vars)
        appended.extend(stmts)

    def rule_fn(e):
        if not isinstance(e, VarRef):
            return e
        rule = expr_rules.get(tuple(s.name for s in e.path))
        if rule is None:
            return e
        kind, flat, sizes, linearize = rule
        if kind == "const":
            return simple_ref(flat, loc=e.loc)
        idxs = [i for step in e.path for i in step.indices]
        if not linearize:
            return VarRef([AccessStep(flat, idxs)], loc=e.loc)
        if len(idxs) != len(sizes):
            raise PassError("internal", "access through a record array "
                            "misses an index", e.loc)
        linear = idxs[0]
        for idx, size in zip(idxs[1:], sizes[1:]):
            linear = BinOp("+", BinOp("*", BinOp("-", linear, IntLit(1)),
                                      duplicate(size)), idx)
        return VarRef([AccessStep(flat, [linear] if idxs else [])], loc=e.loc)

    result = PivotModel(m.name, new_elements + appended)
    rewrite_expressions(result.elements, rule_fn)
    return PassResult(result, NameMap(renames=renames), problems)


def _flatten_one_record(rec: Record, taken: set, expr_rules: dict,
                        renames: list, problems: list,
                        max_positions: int):
    used_indices = {f.index for f in iter_nodes(rec) if isinstance(f, Forall)}

    def members_of(r: Record) -> set[str]:
        return {e.name for e in r.elements
                if isinstance(e, (Variable, Constant, Record))}

    wrap_names: dict[int, str] = {}

    def wrap_name(r: Record) -> str | None:
        if r.array is None:
            return None
        if id(r) not in wrap_names:
            name = r.name
            if name in used_indices:
                name = fresh_name(name + "_", used_indices | taken)
            wrap_names[id(r)] = name
        return wrap_names[id(r)]

    # Pass 1: rewrite record-internal references to full access paths
    # rooted at the top-level record, indexing array levels with the
    # wrap-loop variable that pass 2 introduces.

    def canon(r: Record, chain: list) -> None:
        if r.array is not None and r.array.m is not None:
            raise PassError("unsupported",
                            f"record '{r.name}' has matrix dimensions", r.loc)
        level = (r.name, wrap_name(r), members_of(r))
        chain2 = chain + [level]
        for e in r.elements:
            if isinstance(e, ConstraintZone):
                e.statements = [_prefix_stmt(s, chain2, set())
                                for s in e.statements]
            elif isinstance(e, Statement):
                pass  # handled below to keep list identity
            elif isinstance(e, Record):
                canon(e, chain2)
        r.elements = [
            _prefix_stmt(e, chain2, set()) if isinstance(e, Statement) else e
            for e in r.elements]

    canon(rec, [])

    # Pass 2: hoist variables and wrap statements, inner records first.

    def collect(r: Record, path_names: list[str], sizes: list[Expression]):
        stmts: list[Statement] = []
        flat_vars: list = []
        for e in r.elements:
            if isinstance(e, Variable):
                own_sizes = []
                if e.array is not None:
                    own_sizes.append(e.array.n)
                    if e.array.m is not None:
                        own_sizes.append(e.array.m)
                all_sizes = sizes + own_sizes
                if sizes and len(all_sizes) > max_positions:
                    raise PassError(
                        "unsupported",
                        f"flattening '{'.'.join(path_names + [e.name])}' "
                        f"needs {len(all_sizes)} index positions "
                        f"(limit {max_positions})", e.loc)
                flat = _mangle(path_names + [e.name], taken, problems, e.loc)
                linearize = bool(sizes)
                if linearize:
                    dims = ArrayDims(_product(all_sizes))
                elif e.array is not None:
                    dims = duplicate(e.array)
                else:
                    dims = None
                flat_vars.append(Variable(flat, e.type, e.is_set, dims,
                                          duplicate(e.domain), loc=e.loc))
                names = tuple(path_names + [e.name])
                expr_rules[names] = ("var", flat, tuple(all_sizes), linearize)
                renames.append(PathRename(names, tuple(all_sizes), flat,
                                          linearize))
            elif isinstance(e, Constant):
                flat = _mangle(path_names + [e.name], taken, problems, e.loc)
                flat_vars.append(Constant(flat, e.type, duplicate(e.value),
                                          loc=e.loc))
                expr_rules[tuple(path_names + [e.name])] = \
                    ("const", flat, (), False)
            elif isinstance(e, Record):
                sub_sizes = sizes + ([e.array.n] if e.array is not None
                                     else [])
                sub_vars, sub_stmts = collect(e, path_names + [e.name],
                                              sub_sizes)
                flat_vars.extend(sub_vars)
                stmts.extend(sub_stmts)
            elif isinstance(e, ConstraintZone):
                stmts.extend(e.statements)
            elif isinstance(e, Statement):
                stmts.append(e)
        if r.array is not None and stmts:
            loop = Forall(wrap_name(r), IntLit(1), duplicate(r.array.n),
                          stmts, loc=r.loc)
            return flat_vars, [loop]
        return flat_vars, stmts

    sizes0 = [rec.array.n] if rec.array is not None else []
    return collect(rec, [rec.name], sizes0)


def _mangle(names: list[str], taken: set, problems: list,
            loc: Loc | None) -> str:
    flat = "_".join(names)
    if flat in taken:
        renamed = fresh_name(flat, taken)
        problems.append(Problem(
            "warning", str(loc) if loc else "<unknown>",
            f"flattened name '{flat}' collides with an existing name, "
            f"renamed to '{renamed}'"))
        flat = renamed
    taken.add(flat)
    return flat


def _product(exprs: list[Expression]) -> Expression:
    out = duplicate(exprs[0])
    for e in exprs[1:]:
        out = BinOp("*", out, duplicate(e))
    value = const_eval(out)
    if isinstance(value, int) and not isinstance(value, bool):
        return IntLit(value)
    return out


def _prefix_stmt(stmt: Statement, chain: list, shadow: set) -> Statement:
    if isinstance(stmt, Constraint):
        return Constraint(_prefix_expr(stmt.expr, chain, shadow),
                          loc=stmt.loc)
    if isinstance(stmt, Forall):
        lower = _prefix_expr(stmt.lower, chain, shadow)
        upper = _prefix_expr(stmt.upper, chain, shadow)
        inner = shadow | {stmt.index}
        return Forall(stmt.index, lower, upper,
                      [_prefix_stmt(s, chain, inner) for s in stmt.body],
                      loc=stmt.loc)
    if isinstance(stmt, IfStmt):
        els = None
        if stmt.else_body is not None:
            els = [_prefix_stmt(s, chain, shadow) for s in stmt.else_body]
        return IfStmt(_prefix_expr(stmt.cond, chain, shadow),
                      [_prefix_stmt(s, chain, shadow)
                       for s in stmt.then_body], els, loc=stmt.loc)
    raise PassError("internal", f"unexpected statement "
                    f"{type(stmt).__name__} in record")


def _prefix_expr(expr: Expression, chain: list, shadow: set) -> Expression:
    def fn(e):
        if not isinstance(e, VarRef):
            return e
        base = e.path[0].name
        if base in shadow:
            return e
        for depth in range(len(chain) - 1, -1, -1):
            if base in chain[depth][2]:
                prefix = []
                for name, index_name, _ in chain[:depth + 1]:
                    idx = [simple_ref(index_name)] if index_name else []
                    prefix.append(AccessStep(name, idx))
                return VarRef(prefix + e.path, loc=e.loc)
        return e

    return rewrite_expressions(duplicate(expr), fn)


# --------------------------------------------------------------------------
# Enumeration removal
# --------------------------------------------------------------------------


def remove_enums(p: PivotModel) -> PassResult:
    """Turn enum variables into int variables over [1, N] and literals
    into their 1-based declaration position; drop enum declarations."""
    enums = {e.name: e.literals for e in p.enum_types()}
    m = duplicate(p)
    if not enums:
        return PassResult(m)

    value_maps: dict[str, dict[str, int]] = {}
    for node in iter_nodes(m):
        if isinstance(node, Variable) and node.type in enums:
            literals = enums[node.type]
            value_maps[node.name] = {lit: i + 1
                                     for i, lit in enumerate(literals)}
            node.type = "int"
            node.domain = Interval(IntLit(1), IntLit(len(literals)))

    def fn(e):
        if isinstance(e, EnumLit):
            return IntLit(enums[e.enum].index(e.literal) + 1, loc=e.loc)
        return e

    rewrite_expressions(m.elements, fn)
    m.elements = [el for el in m.elements if not isinstance(el, EnumType)]
    return PassResult(m, NameMap(enum_values=value_maps))


# --------------------------------------------------------------------------
# Conditional removal
# --------------------------------------------------------------------------


def remove_if(p: PivotModel) -> PassResult:
    """Rewrite ``if a then b else c`` into ``(a implies b) and
    (not a implies c)``; branches must contain only constraints."""
    m = duplicate(p)

    def conv(stmt: Statement) -> Statement:
        if isinstance(stmt, Forall):
            stmt.body = [conv(s) for s in stmt.body]
            return stmt
        if isinstance(stmt, IfStmt):
            return to_constraint(stmt)
        return stmt

    def branch_expr(stmts: list[Statement], loc) -> Expression:
        exprs = []
        for s in stmts:
            s = conv(s)
            if not isinstance(s, Constraint):
                raise PassError("unsupported", "cannot rewrite a loop "
                                "inside an if branch", loc)
            exprs.append(s.expr)
        if not exprs:
            return BoolLit(True)
        out = exprs[0]
        for e in exprs[1:]:
            out = BinOp("and", out, e)
        return out

    def to_constraint(stmt: IfStmt) -> Constraint:
        then_part = BinOp("implies", stmt.cond,
                          branch_expr(stmt.then_body, stmt.loc))
        if stmt.else_body is None:
            return Constraint(then_part, loc=stmt.loc)
        else_part = BinOp("implies", UnOp("not", duplicate(stmt.cond)),
                          branch_expr(stmt.else_body, stmt.loc))
        return Constraint(BinOp("and", then_part, else_part), loc=stmt.loc)

    _transform_statement_lists(m, lambda stmts, env: [conv(s) for s in stmts])
    return PassResult(m)


# --------------------------------------------------------------------------
# Loop unrolling
# --------------------------------------------------------------------------


def unroll_loops(p: PivotModel) -> PassResult:
    """Replace every loop by substituted copies of its body.

    Outer indices are substituted before inner bounds are evaluated, so
    ranges like ``j in i+1..n`` fold once their turn comes. Bounds must
    fold to integers over the model's constants; an empty range yields
    nothing. If branches are not entered (remove-if must run first when
    conditionals contain loops)."""
    m = duplicate(p)

    def fold_bound(expr: Expression, env: dict, loc) -> int:
        try:
            v = const_eval(expr, env)
        except ConstEvalError as exc:
            raise PassError("non-constant-bound", str(exc), loc)
        if not isinstance(v, int) or isinstance(v, bool):
            raise PassError("non-constant-bound",
                            "loop bound does not fold to an integer "
                            "constant", loc)
        return v

    def expand(stmts: list[Statement], env: dict) -> list[Statement]:
        out: list[Statement] = []
        for s in stmts:
            if isinstance(s, Forall):
                lo = fold_bound(s.lower, env, s.loc)
                hi = fold_bound(s.upper, env, s.loc)
                for k in range(lo, hi + 1):
                    copies = [substitute(b, s.index, IntLit(k))
                              for b in s.body]
                    out.extend(expand(copies, env))
            else:
                out.append(s)
        return out

    _transform_statement_lists(m, expand)
    return PassResult(m)


# --------------------------------------------------------------------------
# Constant simplification
# --------------------------------------------------------------------------


def simplify_constants(p: PivotModel) -> PassResult:
    """Fold constant boolean/integer subexpressions; real expressions are
    left untouched. Tautologies over atomic boolean operands simplify;
    constraints reduced to true disappear, literal-false constraints stay
    and are reported as warnings."""
    m = duplicate(p)
    problems: list[Problem] = []

    def is_atomic(e: Expression) -> bool:
        return isinstance(e, VarRef)

    def negation_pair(a: Expression, b: Expression) -> bool:
        if isinstance(b, UnOp) and b.op == "not" and is_atomic(a):
            return a == b.arg
        return False

    def fold(e: Expression) -> Expression:
        if isinstance(e, UnOp):
            if e.op == "not" and isinstance(e.arg, BoolLit):
                return BoolLit(not e.arg.value, loc=e.loc)
            if e.op == "-" and isinstance(e.arg, IntLit):
                return IntLit(-e.arg.value, loc=e.loc)
            return e
        if not isinstance(e, BinOp):
            return e
        a, b = e.lhs, e.rhs
        ints = isinstance(a, IntLit) and isinstance(b, IntLit)
        bools = isinstance(a, BoolLit) and isinstance(b, BoolLit)
        if e.op in ("+", "-", "*", "/") and ints:
            try:
                v = const_eval(e)
            except ConstEvalError as exc:
                raise PassError("division-by-zero", str(exc), e.loc)
            return IntLit(v, loc=e.loc)
        if e.op in ("=", "!=", "<", "<=", ">", ">=") and ints:
            return BoolLit(const_eval(e), loc=e.loc)
        if e.op in ("and", "or", "implies") and bools:
            return BoolLit(const_eval(e), loc=e.loc)
        if e.op == "and":
            for lit, other in ((a, b), (b, a)):
                if isinstance(lit, BoolLit):
                    return other if lit.value else BoolLit(False, loc=e.loc)
            if negation_pair(a, b) or negation_pair(b, a):
                return BoolLit(False, loc=e.loc)
        if e.op == "or":
            for lit, other in ((a, b), (b, a)):
                if isinstance(lit, BoolLit):
                    return BoolLit(True, loc=e.loc) if lit.value else other
            if negation_pair(a, b) or negation_pair(b, a):
                return BoolLit(True, loc=e.loc)
        return e

    rewrite_expressions(m.elements, fold)

    def cleanup(stmts: list[Statement], env: dict) -> list[Statement]:
        out = []
        for s in stmts:
            if isinstance(s, Forall):
                s.body = cleanup(s.body, env)
                out.append(s)
            elif isinstance(s, IfStmt):
                s.then_body = cleanup(s.then_body, env)
                if s.else_body is not None:
                    s.else_body = cleanup(s.else_body, env)
                out.append(s)
            elif isinstance(s, Constraint) and isinstance(s.expr, BoolLit):
                if s.expr.value:
                    continue
                problems.append(Problem(
                    "warning",
                    str(s.loc) if s.loc else "<unknown>",
                    "constraint simplifies to false"))
                out.append(s)
            else:
                out.append(s)
        return out

    _transform_statement_lists(m, cleanup)
    return PassResult(m, NameMap(), problems)


# --------------------------------------------------------------------------
# Matrix flattening
# --------------------------------------------------------------------------


def flatten_matrices(p: PivotModel) -> PassResult:
    """Turn every 2-D variable m[r,c] into a 1-D variable of size r*c and
    rewrite accesses m[i,j] to m[(i-1)*c + j] (1-based row-major)."""
    m = duplicate(p)
    ncols: dict[str, Expression] = {}
    for node in iter_nodes(m):
        if isinstance(node, Variable) and node.array is not None \
                and node.array.m is not None:
            ncols[node.name] = duplicate(node.array.m)
            node.array = ArrayDims(_product([node.array.n, node.array.m]))
    if not ncols:
        return PassResult(m)

    def fn(e):
        if isinstance(e, VarRef):
            for step in e.path:
                if step.name in ncols and len(step.indices) == 2:
                    i, j = step.indices
                    step.indices = [BinOp(
                        "+", BinOp("*", BinOp("-", i, IntLit(1)),
                                   duplicate(ncols[step.name])), j)]
        return e

    rewrite_expressions(m.elements, fn)
    return PassResult(m, NameMap(matrix=ncols))


# --------------------------------------------------------------------------
# Chaining
# --------------------------------------------------------------------------

PASSES = {
    "flatten-classes": flatten_classes,
    "flatten-records": flatten_records,
    "remove-enums": remove_enums,
    "remove-if": remove_if,
    "unroll-loops": unroll_loops,
    "simplify": simplify_constants,
    "flatten-matrices": flatten_matrices,
}


def run_chain(p: PivotModel, chain: list[str]) -> ChainResult:
    """Apply passes left to right, timing each one.

    Raises ValueError on an unknown pass token and PassError(chain-order)
    when record flattening would run on a model that still has classes or
    unrolling precedes conditional removal.
    """
    for token in chain:
        if token not in PASSES:
            raise ValueError(f"unknown pass '{token}'")

    if "flatten-records" in chain:
        pos = chain.index("flatten-records")
        has_classes = any(isinstance(el, ClassType) for el in p.elements)
        if has_classes and "flatten-classes" not in chain[:pos]:
            raise PassError("chain-order", "flatten-records requires "
                            "flatten-classes earlier in the chain")
    if "remove-if" in chain and "unroll-loops" in chain \
            and chain.index("remove-if") > chain.index("unroll-loops"):
        raise PassError("chain-order", "remove-if must run before "
                        "unroll-loops")

    model = p
    result = ChainResult(model)
    for token in chain:
        start = time.perf_counter()
        out = PASSES[token](model)
        elapsed = time.perf_counter() - start
        model = out.model
        result.name_maps.append(out.name_map)
        result.problems.extend(out.problems)
        result.timings.append((token, elapsed))
    result.model = model
    return result
