"""Source-language frontend: lexer, parser, injector and extractor.

The source dialect is an object-oriented constraint modeling language
split over a data file (enums and constants, ``.scd``) and a model file
(classes, ``.scm``). Parsing produces a thin source AST whose statement
and expression trees already use the pivot node classes; injection
resolves every name through scoped symbol tables and yields a checked-
ready :class:`~cpforge.ir.PivotModel`. Extraction renders a pivot model
back to concrete syntax; the same renderer doubles as the canonical
pivot dump used by golden tests.

Grammar sketch (statement separator is ``;``, comments ``//`` to EOL)::

    data      := { enumDecl | constDecl }
    enumDecl  := "enum" ID ":=" "{" ID {"," ID} "}" ";"
    constDecl := ("int"|"real") ID ":=" literal ";"
    model     := { classDecl | enumDecl | constDecl | feature | stmt }
    classDecl := ["main"] ["abstract"] "class" ID ["extends" ID {"," ID}]
                 "{" {feature} "}"
    feature   := varDecl | constDecl | zone
    varDecl   := typeRef ["set"] ID [dims] ["in" domain] ";"
    dims      := "[" expr ["," expr] "]"
    domain    := "[" expr "," expr "]" | "{" expr {"," expr} "}"
    zone      := "constraint" ID "{" {stmt} "}"
    stmt      := forall | ifStmt | expr ";"
    forall    := "forall" "(" ID "in" expr ".." expr ")" "{" {stmt} "}"
               | "forall" ID "in" "[" expr "," expr "]" "{" {stmt} "}"
    ifStmt    := "if" "(" expr ")" "{" {stmt} "}" ["else" "{" {stmt} "}"]

Top-level features, statements and data declarations inside a model file
are an extension over the class-only model grammar so that flattened
pivot dumps re-parse; conforming files are unaffected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .ir import (AccessStep, ArrayDims, BinOp, BoolLit, Card, ClassType,
                 Constant, Constraint, ConstraintZone, Domain, EnumLit,
                 EnumType, ExplicitSet, Expression, Forall, IfStmt, IntLit,
                 Intersect, Interval, Loc, PivotModel, Predicate, RealLit,
                 Record, Statement, UnOp, Variable, VarRef, simple_ref)

KEYWORDS = frozenset({
    "main", "abstract", "class", "extends", "enum", "constraint", "forall",
    "if", "else", "in", "set", "int", "real", "bool", "card", "intersect",
    "not", "and", "or", "implies", "true", "false",
})

_SYMBOLS = (":=", "..", "<=", ">=", "!=", "{", "}", "[", "]", "(", ")",
            ";", ",", ".", "=", "<", ">", "+", "-", "*", "/")

BUILTIN_TYPES = ("int", "real", "bool")


class ParseError(Exception):
    """Syntax error with location and the set of expected tokens."""

    def __init__(self, message: str, loc: Loc, expected=()):
        self.loc = loc
        self.expected = frozenset(expected)
        hint = ""
        if self.expected:
            hint = " (expected " + ", ".join(sorted(self.expected)) + ")"
        super().__init__(f"{loc}: {message}{hint}")
        self.message = message


class InjectError(Exception):
    """Name-resolution failure while building the pivot model."""

    def __init__(self, message: str, loc: Optional[Loc] = None):
        self.loc = loc
        where = f"{loc}: " if loc else ""
        super().__init__(f"{where}{message}")
        self.message = message


class UnresolvedName(InjectError):
    def __init__(self, name: str, loc: Optional[Loc] = None):
        super().__init__(f"unresolved name '{name}'", loc)
        self.name = name


class DuplicateName(InjectError):
    def __init__(self, name: str, loc: Optional[Loc] = None):
        super().__init__(f"duplicate name '{name}'", loc)
        self.name = name


# --------------------------------------------------------------------------
# Lexer
# --------------------------------------------------------------------------


@dataclass
class Token:
    kind: str  # IDENT, INT, REAL, KW, SYM, EOF
    value: str
    line: int
    col: int

    def loc(self, file: str) -> Loc:
        return Loc(file, self.line, self.col)


def tokenize(text: str, file: str = "<input>") -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_col = col
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "KW" if word in KEYWORDS else "IDENT"
            toks.append(Token(kind, word, line, start_col))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
                toks.append(Token("REAL", text[i:j], line, start_col))
            else:
                toks.append(Token("INT", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                toks.append(Token("SYM", sym, line, start_col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {c!r}",
                             Loc(file, line, col))
    toks.append(Token("EOF", "", line, col))
    return toks


# --------------------------------------------------------------------------
# Source AST
# --------------------------------------------------------------------------


@dataclass
class EnumDecl:
    name: str
    literals: list[str]
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass
class ConstDecl:
    name: str
    type: str
    value: Expression = None
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass
class VarDecl:
    name: str
    type: str
    is_set: bool = False
    dims: Optional[ArrayDims] = None
    domain: Optional[Domain] = None
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass
class ZoneDecl:
    name: str
    statements: list[Statement] = field(default_factory=list)
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass
class ClassDecl:
    name: str
    is_main: bool = False
    is_abstract: bool = False
    super_types: list[str] = field(default_factory=list)
    features: list = field(default_factory=list)
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass
class SourceFile:
    """Parsed file content: declarations (and statements) in source order."""

    items: list = field(default_factory=list)
    file: str = "<input>"

    def classes(self) -> list[ClassDecl]:
        return [it for it in self.items if isinstance(it, ClassDecl)]


@dataclass
class SourceAst:
    """Pair of parsed data and model files, ready for injection."""

    data_decls: list = field(default_factory=list)
    model_decls: list = field(default_factory=list)


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

# precedence levels, loosest first
_PREC_IMPLIES, _PREC_OR, _PREC_AND, _PREC_NOT = 1, 2, 3, 4
_PREC_CMP, _PREC_INTERSECT, _PREC_ADD, _PREC_MUL, _PREC_UNARY = 5, 6, 7, 8, 9

_CMP_TOKENS = ("=", "!=", "<", "<=", ">", ">=")


class _Parser:
    def __init__(self, text: str, file: str):
        self.file = file
        self.toks = tokenize(text, file)
        self.pos = 0

    # -- token plumbing ----------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def at(self, value: str) -> bool:
        t = self.peek()
        return t.kind in ("SYM", "KW") and t.value == value

    def accept(self, value: str) -> Optional[Token]:
        if self.at(value):
            t = self.peek()
            self.pos += 1
            return t
        return None

    def expect(self, value: str) -> Token:
        t = self.accept(value)
        if t is None:
            cur = self.peek()
            raise ParseError(f"unexpected {cur.value or 'end of input'!r}",
                             cur.loc(self.file), expected={value})
        return t

    def ident(self, what: str = "identifier") -> Token:
        t = self.peek()
        if t.kind != "IDENT":
            raise ParseError(f"unexpected {t.value or 'end of input'!r}",
                             t.loc(self.file), expected={what})
        self.pos += 1
        return t

    def loc(self) -> Loc:
        return self.peek().loc(self.file)

    # -- declarations ------------------------------------------------------

    def parse_file(self, data_only: bool) -> SourceFile:
        items = []
        while self.peek().kind != "EOF":
            items.append(self.top_item(data_only))
        return SourceFile(items, self.file)

    def top_item(self, data_only: bool):
        t = self.peek()
        if self.at("enum"):
            return self.enum_decl()
        if t.kind == "KW" and t.value in ("int", "real") and \
                self.peek(2).kind == "SYM" and self.peek(2).value == ":=":
            return self.const_decl()
        if data_only:
            raise ParseError(f"unexpected {t.value!r} in data file",
                             t.loc(self.file),
                             expected={"enum", "int", "real"})
        if self.at("main") or self.at("abstract") or self.at("class"):
            return self.class_decl()
        if self.at("constraint"):
            return self.zone_decl()
        if self.at("forall") or self.at("if"):
            return self.statement()
        if (t.kind == "IDENT" or (t.kind == "KW" and t.value in BUILTIN_TYPES)) \
                and (self.peek(1).kind == "IDENT" or
                     (self.peek(1).kind == "KW" and self.peek(1).value == "set")):
            return self.feature_decl()
        return self.statement()

    def enum_decl(self) -> EnumDecl:
        loc = self.loc()
        self.expect("enum")
        name = self.ident().value
        self.expect(":=")
        self.expect("{")
        literals = [self.ident().value]
        while self.accept(","):
            literals.append(self.ident().value)
        self.expect("}")
        self.expect(";")
        return EnumDecl(name, literals, loc=loc)

    def const_decl(self) -> ConstDecl:
        loc = self.loc()
        type_name = self.peek().value
        self.pos += 1
        name = self.ident().value
        self.expect(":=")
        value = self.literal()
        self.expect(";")
        return ConstDecl(name, type_name, value, loc=loc)

    def literal(self) -> Expression:
        loc = self.loc()
        neg = self.accept("-") is not None
        t = self.peek()
        if t.kind == "INT":
            self.pos += 1
            v = int(t.value)
            return IntLit(-v if neg else v, loc=loc)
        if t.kind == "REAL":
            self.pos += 1
            v = float(t.value)
            return RealLit(-v if neg else v, loc=loc)
        raise ParseError(f"unexpected {t.value or 'end of input'!r}",
                         t.loc(self.file), expected={"number"})

    def class_decl(self) -> ClassDecl:
        loc = self.loc()
        is_main = self.accept("main") is not None
        is_abstract = self.accept("abstract") is not None
        self.expect("class")
        name = self.ident().value
        supers = []
        if self.accept("extends"):
            supers.append(self.ident().value)
            while self.accept(","):
                supers.append(self.ident().value)
        self.expect("{")
        features = []
        while not self.at("}"):
            features.append(self.feature())
        self.expect("}")
        return ClassDecl(name, is_main, is_abstract, supers, features, loc=loc)

    def feature(self):
        if self.at("constraint"):
            return self.zone_decl()
        t = self.peek()
        if t.kind == "KW" and t.value in ("int", "real") and \
                self.peek(2).kind == "SYM" and self.peek(2).value == ":=":
            return self.const_decl()
        return self.feature_decl()

    def feature_decl(self) -> VarDecl:
        loc = self.loc()
        t = self.peek()
        if not (t.kind == "IDENT" or (t.kind == "KW" and t.value in BUILTIN_TYPES)):
            raise ParseError(f"unexpected {t.value or 'end of input'!r}",
                             t.loc(self.file), expected={"type name"})
        type_name = t.value
        self.pos += 1
        is_set = self.accept("set") is not None
        name = self.ident().value
        dims = None
        if self.at("["):
            dims = self.dims()
        domain = None
        if self.accept("in"):
            domain = self.domain()
        self.expect(";")
        return VarDecl(name, type_name, is_set, dims, domain, loc=loc)

    def dims(self) -> ArrayDims:
        self.expect("[")
        n = self.expression()
        m = None
        if self.accept(","):
            m = self.expression()
        self.expect("]")
        return ArrayDims(n, m)

    def domain(self) -> Domain:
        loc = self.loc()
        if self.accept("["):
            lo = self.expression()
            self.expect(",")
            hi = self.expression()
            self.expect("]")
            return Interval(lo, hi, loc=loc)
        self.expect("{")
        values = [self.expression()]
        while self.accept(","):
            values.append(self.expression())
        self.expect("}")
        return ExplicitSet(values, loc=loc)

    def zone_decl(self) -> ZoneDecl:
        loc = self.loc()
        self.expect("constraint")
        name = self.ident().value
        self.expect("{")
        stmts = []
        while not self.at("}"):
            stmts.append(self.statement())
        self.expect("}")
        return ZoneDecl(name, stmts, loc=loc)

    # -- statements ----------------------------------------------------------

    def statement(self) -> Statement:
        if self.at("forall"):
            return self.forall()
        if self.at("if"):
            return self.if_stmt()
        loc = self.loc()
        expr = self.expression()
        self.expect(";")
        return Constraint(expr, loc=loc)

    def forall(self) -> Forall:
        loc = self.loc()
        self.expect("forall")
        if self.accept("("):
            index = self.ident().value
            self.expect("in")
            lo = self.expression()
            self.expect("..")
            hi = self.expression()
            self.expect(")")
        else:
            index = self.ident().value
            self.expect("in")
            self.expect("[")
            lo = self.expression()
            self.expect(",")
            hi = self.expression()
            self.expect("]")
        self.expect("{")
        body = []
        while not self.at("}"):
            body.append(self.statement())
        self.expect("}")
        return Forall(index, lo, hi, body, loc=loc)

    def if_stmt(self) -> IfStmt:
        loc = self.loc()
        self.expect("if")
        self.expect("(")
        cond = self.expression()
        self.expect(")")
        self.expect("{")
        then_body = []
        while not self.at("}"):
            then_body.append(self.statement())
        self.expect("}")
        else_body = None
        if self.accept("else"):
            self.expect("{")
            else_body = []
            while not self.at("}"):
                else_body.append(self.statement())
            self.expect("}")
        return IfStmt(cond, then_body, else_body, loc=loc)

    # -- expressions -----------------------------------------------------
    # unary > * / > + - > intersect > comparisons > not > and > or > implies

    def expression(self) -> Expression:
        return self.implies_expr()

    def implies_expr(self) -> Expression:
        loc = self.loc()
        left = self.or_expr()
        if self.accept("implies"):
            return BinOp("implies", left, self.implies_expr(), loc=loc)
        return left

    def or_expr(self) -> Expression:
        loc = self.loc()
        left = self.and_expr()
        while self.accept("or"):
            left = BinOp("or", left, self.and_expr(), loc=loc)
        return left

    def and_expr(self) -> Expression:
        loc = self.loc()
        left = self.not_expr()
        while self.accept("and"):
            left = BinOp("and", left, self.not_expr(), loc=loc)
        return left

    def not_expr(self) -> Expression:
        loc = self.loc()
        if self.accept("not"):
            return UnOp("not", self.not_expr(), loc=loc)
        return self.cmp_expr()

    def cmp_expr(self) -> Expression:
        loc = self.loc()
        left = self.intersect_expr()
        while self.peek().kind == "SYM" and self.peek().value in _CMP_TOKENS:
            op = self.peek().value
            self.pos += 1
            left = BinOp(op, left, self.intersect_expr(), loc=loc)
        return left

    def intersect_expr(self) -> Expression:
        loc = self.loc()
        left = self.add_expr()
        while self.accept("intersect"):
            left = Intersect(left, self.add_expr(), loc=loc)
        return left

    def add_expr(self) -> Expression:
        loc = self.loc()
        left = self.mul_expr()
        while self.peek().kind == "SYM" and self.peek().value in ("+", "-"):
            op = self.peek().value
            self.pos += 1
            left = BinOp(op, left, self.mul_expr(), loc=loc)
        return left

    def mul_expr(self) -> Expression:
        loc = self.loc()
        left = self.unary_expr()
        while self.peek().kind == "SYM" and self.peek().value in ("*", "/"):
            op = self.peek().value
            self.pos += 1
            left = BinOp(op, left, self.unary_expr(), loc=loc)
        return left

    def unary_expr(self) -> Expression:
        loc = self.loc()
        if self.accept("-"):
            return UnOp("-", self.unary_expr(), loc=loc)
        return self.primary()

    def primary(self) -> Expression:
        t = self.peek()
        loc = t.loc(self.file)
        if t.kind == "INT":
            self.pos += 1
            return IntLit(int(t.value), loc=loc)
        if t.kind == "REAL":
            self.pos += 1
            return RealLit(float(t.value), loc=loc)
        if self.accept("true"):
            return BoolLit(True, loc=loc)
        if self.accept("false"):
            return BoolLit(False, loc=loc)
        if self.accept("card"):
            self.expect("(")
            arg = self.expression()
            self.expect(")")
            return Card(arg, loc=loc)
        if self.accept("("):
            expr = self.expression()
            self.expect(")")
            return expr
        if t.kind == "IDENT":
            return self.access()
        raise ParseError(f"unexpected {t.value or 'end of input'!r}", loc,
                         expected={"expression"})

    def access(self) -> VarRef:
        loc = self.loc()
        steps = [self.access_step()]
        while self.accept("."):
            steps.append(self.access_step())
        return VarRef(steps, loc=loc)

    def access_step(self) -> AccessStep:
        name = self.ident().value
        indices: list[Expression] = []
        if self.accept("["):
            indices.append(self.expression())
            if self.accept(","):
                indices.append(self.expression())
            self.expect("]")
        return AccessStep(name, indices)


def parse_data(text: str, file: str = "<data>") -> SourceFile:
    """Parse a data file: enum and constant declarations in source order."""
    return _Parser(text, file).parse_file(data_only=True)


def parse_model(text: str, file: str = "<model>") -> SourceFile:
    """Parse a model file: class declarations, plus the top-level
    extension used by flattened pivot dumps."""
    return _Parser(text, file).parse_file(data_only=False)


def parse_expression(text: str, file: str = "<expr>") -> Expression:
    p = _Parser(text, file)
    expr = p.expression()
    if p.peek().kind != "EOF":
        t = p.peek()
        raise ParseError(f"trailing input {t.value!r}", t.loc(file),
                         expected={"end of input"})
    return expr


def parse_statement(text: str, file: str = "<stmt>") -> Statement:
    p = _Parser(text, file)
    stmt = p.statement()
    if p.peek().kind != "EOF":
        t = p.peek()
        raise ParseError(f"trailing input {t.value!r}", t.loc(file),
                         expected={"end of input"})
    return stmt


# --------------------------------------------------------------------------
# Injection: source AST -> pivot model
# --------------------------------------------------------------------------


class _Entry:
    __slots__ = ("kind", "payload")

    def __init__(self, kind: str, payload=None):
        self.kind = kind  # const, var, enum, literal, class, zone, index
        self.payload = payload


class ScopeContext:
    """Stack of symbol tables; lookup is innermost-out, insertion targets
    the innermost table."""

    def __init__(self):
        self.tables: list[dict[str, _Entry]] = [{}]

    def push(self) -> None:
        self.tables.append({})

    def pop(self) -> None:
        self.tables.pop()

    def add(self, name: str, entry: _Entry, loc: Optional[Loc]) -> None:
        table = self.tables[-1]
        if name in table:
            raise DuplicateName(name, loc)
        table[name] = entry

    def lookup(self, name: str) -> Optional[_Entry]:
        for table in reversed(self.tables):
            if name in table:
                return table[name]
        return None


class _Injector:
    def __init__(self, model_sf: SourceFile, data_sf: Optional[SourceFile]):
        self.items = list(data_sf.items if data_sf else []) + list(model_sf.items)
        self.scope = ScopeContext()
        self.literals: dict[str, tuple[str, str]] = {}
        self.class_decls: dict[str, ClassDecl] = {}
        self.class_features: dict[str, dict[str, object]] = {}

    def run(self) -> PivotModel:
        classes = [it for it in self.items if isinstance(it, ClassDecl)]
        if classes:
            mains = [c for c in classes if c.is_main]
            if not mains:
                raise InjectError("no class is marked main", classes[0].loc)
            if len(mains) > 1:
                raise InjectError("more than one class is marked main",
                                  mains[1].loc)
            name = mains[0].name
        else:
            name = "model"

        self._declare_globals()
        elements = [self._build(it) for it in self.items]
        return PivotModel(name, elements)

    # -- global symbol table -------------------------------------------------

    def _declare_globals(self) -> None:
        # enum literals live in a fallback namespace: an explicit
        # declaration of the same name shadows the literal
        for it in self.items:
            if isinstance(it, EnumDecl):
                self.scope.add(it.name, _Entry("enum", it), it.loc)
                seen = set()
                for lit in it.literals:
                    if lit in seen:
                        raise DuplicateName(lit, it.loc)
                    seen.add(lit)
                    if lit in self.literals:
                        raise DuplicateName(lit, it.loc)
                    self.literals[lit] = (it.name, lit)
            elif isinstance(it, ConstDecl):
                self.scope.add(it.name, _Entry("const", it), it.loc)
            elif isinstance(it, ClassDecl):
                self.scope.add(it.name, _Entry("class", it), it.loc)
                self.class_decls[it.name] = it
            elif isinstance(it, VarDecl):
                self.scope.add(it.name, _Entry("var", it), it.loc)
            elif isinstance(it, ZoneDecl):
                self.scope.add(it.name, _Entry("zone", it), it.loc)

    def _features_of(self, class_name: str) -> dict[str, object]:
        """Feature table of a class including inherited features,
        collected supertype-first. Tolerates inheritance cycles (the
        checker reports them); duplicate feature names are rejected."""
        if class_name in self.class_features:
            return self.class_features[class_name]
        table: dict[str, object] = {}
        self.class_features[class_name] = table

        def collect(name: str, visited: set[str]) -> None:
            if name in visited or name not in self.class_decls:
                return
            visited.add(name)
            decl = self.class_decls[name]
            for sup in decl.super_types:
                collect(sup, visited)
            for feat in decl.features:
                if isinstance(feat, ZoneDecl):
                    continue
                if feat.name in table and name == class_name:
                    raise DuplicateName(feat.name, feat.loc)
                table[feat.name] = feat

        def collect_zones(name: str, visited: set[str]) -> None:
            if name in visited or name not in self.class_decls:
                return
            visited.add(name)
            decl = self.class_decls[name]
            for sup in decl.super_types:
                collect_zones(sup, visited)
            for feat in decl.features:
                if isinstance(feat, ZoneDecl):
                    if feat.name in table:
                        raise DuplicateName(feat.name, feat.loc)
                    table[feat.name] = feat

        collect(class_name, set())
        collect_zones(class_name, set())
        return table

    # -- element building ------------------------------------------------

    def _build(self, item):
        if isinstance(item, EnumDecl):
            return EnumType(item.name, list(item.literals), loc=item.loc)
        if isinstance(item, ConstDecl):
            return Constant(item.name, item.type, item.value, loc=item.loc)
        if isinstance(item, ClassDecl):
            return self._build_class(item)
        if isinstance(item, VarDecl):
            return self._build_variable(item)
        if isinstance(item, ZoneDecl):
            return ConstraintZone(item.name,
                                  [self._resolve_stmt(s)
                                   for s in item.statements], loc=item.loc)
        if isinstance(item, Statement):
            return self._resolve_stmt(item)
        raise TypeError(f"unexpected source item {type(item).__name__}")

    def _build_class(self, decl: ClassDecl) -> ClassType:
        for sup in decl.super_types:
            entry = self.scope.lookup(sup)
            if entry is None:
                raise UnresolvedName(sup, decl.loc)
            if entry.kind != "class":
                raise InjectError(f"'{sup}' is not a class", decl.loc)

        self.scope.push()
        for fname, feat in self._features_of(decl.name).items():
            kind = "zone" if isinstance(feat, ZoneDecl) else (
                "const" if isinstance(feat, ConstDecl) else "var")
            self.scope.add(fname, _Entry(kind, feat), getattr(feat, "loc", None))

        features = []
        for feat in decl.features:
            if isinstance(feat, VarDecl):
                features.append(self._build_variable(feat))
            elif isinstance(feat, ConstDecl):
                features.append(Constant(feat.name, feat.type, feat.value,
                                         loc=feat.loc))
            elif isinstance(feat, ZoneDecl):
                features.append(ConstraintZone(
                    feat.name, [self._resolve_stmt(s) for s in feat.statements],
                    loc=feat.loc))
        self.scope.pop()
        return ClassType(decl.name, list(decl.super_types), features,
                         is_main=decl.is_main, is_abstract=decl.is_abstract,
                         loc=decl.loc)

    def _build_variable(self, decl: VarDecl) -> Variable:
        if decl.type not in BUILTIN_TYPES:
            entry = self.scope.lookup(decl.type)
            if entry is None:
                raise UnresolvedName(decl.type, decl.loc)
            if entry.kind not in ("enum", "class"):
                raise InjectError(f"'{decl.type}' is not a type", decl.loc)
            if entry.kind == "class" and decl.domain is not None:
                raise InjectError(f"object variable '{decl.name}' cannot "
                                  "carry a domain", decl.loc)
        dims = None
        if decl.dims is not None:
            dims = ArrayDims(self._resolve_expr(decl.dims.n),
                             self._resolve_expr(decl.dims.m)
                             if decl.dims.m is not None else None)
        domain = None
        if decl.domain is not None:
            domain = self._resolve_domain(decl.domain)
        return Variable(decl.name, decl.type, decl.is_set, dims, domain,
                        loc=decl.loc)

    # -- statement / expression resolution --------------------------------

    def _resolve_stmt(self, stmt: Statement) -> Statement:
        if isinstance(stmt, Constraint):
            return Constraint(self._resolve_expr(stmt.expr), loc=stmt.loc)
        if isinstance(stmt, Forall):
            lower = self._resolve_expr(stmt.lower)
            upper = self._resolve_expr(stmt.upper)
            self.scope.push()
            self.scope.add(stmt.index, _Entry("index", stmt.index), stmt.loc)
            body = [self._resolve_stmt(s) for s in stmt.body]
            self.scope.pop()
            return Forall(stmt.index, lower, upper, body, loc=stmt.loc)
        if isinstance(stmt, IfStmt):
            els = None
            if stmt.else_body is not None:
                els = [self._resolve_stmt(s) for s in stmt.else_body]
            return IfStmt(self._resolve_expr(stmt.cond),
                          [self._resolve_stmt(s) for s in stmt.then_body],
                          els, loc=stmt.loc)
        raise TypeError(f"unexpected statement {type(stmt).__name__}")

    def _resolve_domain(self, dom: Domain) -> Domain:
        if isinstance(dom, Interval):
            return Interval(self._resolve_expr(dom.lower),
                            self._resolve_expr(dom.upper), loc=dom.loc)
        return ExplicitSet([self._resolve_expr(v) for v in dom.values],
                           loc=dom.loc)

    def _resolve_expr(self, expr: Expression) -> Expression:
        if isinstance(expr, (IntLit, RealLit, BoolLit, EnumLit)):
            return expr
        if isinstance(expr, BinOp):
            return BinOp(expr.op, self._resolve_expr(expr.lhs),
                         self._resolve_expr(expr.rhs), loc=expr.loc)
        if isinstance(expr, UnOp):
            return UnOp(expr.op, self._resolve_expr(expr.arg), loc=expr.loc)
        if isinstance(expr, Card):
            return Card(self._resolve_expr(expr.arg), loc=expr.loc)
        if isinstance(expr, Intersect):
            return Intersect(self._resolve_expr(expr.lhs),
                             self._resolve_expr(expr.rhs), loc=expr.loc)
        if isinstance(expr, VarRef):
            return self._resolve_ref(expr)
        raise TypeError(f"unexpected expression {type(expr).__name__}")

    def _resolve_ref(self, ref: VarRef) -> Expression:
        base = ref.path[0]
        entry = self.scope.lookup(base.name)
        if entry is None:
            if base.name in self.literals:
                if not ref.is_simple():
                    raise InjectError(f"enum literal '{base.name}' is not "
                                      "indexable", ref.loc)
                enum_name, lit = self.literals[base.name]
                return EnumLit(enum_name, lit, loc=ref.loc)
            raise UnresolvedName(base.name, ref.loc)
        if entry.kind in ("enum", "class", "zone"):
            raise InjectError(f"'{base.name}' is not a value", ref.loc)
        if entry.kind in ("const", "index") and (len(ref.path) > 1
                                                 or base.indices):
            raise InjectError(f"'{base.name}' is not an array or object",
                              ref.loc)

        steps = [AccessStep(base.name,
                            [self._resolve_expr(i) for i in base.indices])]
        current = entry.payload if entry.kind == "var" else None
        for step in ref.path[1:]:
            type_name = getattr(current, "type", None)
            if type_name is None or type_name not in self.class_decls:
                raise InjectError(
                    f"'{steps[-1].name}' has no member '{step.name}'", ref.loc)
            members = self._features_of(type_name)
            if step.name not in members or isinstance(members[step.name],
                                                      ZoneDecl):
                raise UnresolvedName(step.name, ref.loc)
            current = members[step.name]
            steps.append(AccessStep(
                step.name, [self._resolve_expr(i) for i in step.indices]))
        return VarRef(steps, loc=ref.loc)


def inject(model_ast: SourceFile, data_ast: Optional[SourceFile] = None) -> PivotModel:
    """Resolve both parse trees into a pivot model.

    Elements are the data declarations followed by the model
    declarations; every name reference is resolved through the scope
    stack, bare identifiers naming enum literals become EnumLit nodes.
    Raises UnresolvedName or DuplicateName on resolution failure.
    """
    return _Injector(model_ast, data_ast).run()


# --------------------------------------------------------------------------
# Extraction: pivot model -> concrete syntax
# --------------------------------------------------------------------------

_PRECEDENCE = {"implies": _PREC_IMPLIES, "or": _PREC_OR, "and": _PREC_AND,
               "=": _PREC_CMP, "!=": _PREC_CMP, "<": _PREC_CMP,
               "<=": _PREC_CMP, ">": _PREC_CMP, ">=": _PREC_CMP,
               "+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL}

_TIGHT_OPS = ("+", "-", "*", "/")


def _expr_prec(expr: Expression) -> int:
    if isinstance(expr, BinOp):
        return _PRECEDENCE[expr.op]
    if isinstance(expr, Intersect):
        return _PREC_INTERSECT
    if isinstance(expr, UnOp):
        return _PREC_NOT if expr.op == "not" else _PREC_UNARY
    return 10


def render_expr(expr: Expression) -> str:
    """Render an expression with minimal parentheses.

    Arithmetic operators print tight (``w*g``, ``w1+1``); comparisons and
    word operators are spaced. Re-parsing the output reproduces the tree.
    """
    if isinstance(expr, IntLit):
        return str(expr.value)
    if isinstance(expr, RealLit):
        return repr(expr.value)
    if isinstance(expr, BoolLit):
        return "true" if expr.value else "false"
    if isinstance(expr, EnumLit):
        return expr.literal
    if isinstance(expr, VarRef):
        return ".".join(_render_step(s) for s in expr.path)
    if isinstance(expr, Card):
        return f"card({render_expr(expr.arg)})"
    if isinstance(expr, UnOp):
        me = _expr_prec(expr)
        arg = _wrap(expr.arg, me, tie_ok=True)
        return f"-{arg}" if expr.op == "-" else f"not {arg}"
    if isinstance(expr, Intersect):
        me = _PREC_INTERSECT
        return f"{_wrap(expr.lhs, me, tie_ok=True)} intersect " \
               f"{_wrap(expr.rhs, me, tie_ok=False)}"
    if isinstance(expr, BinOp):
        me = _PRECEDENCE[expr.op]
        if expr.op == "implies":  # right-associative
            lhs = _wrap(expr.lhs, me, tie_ok=False)
            rhs = _wrap(expr.rhs, me, tie_ok=True)
        else:
            lhs = _wrap(expr.lhs, me, tie_ok=True)
            rhs = _wrap(expr.rhs, me, tie_ok=False)
        sep = expr.op if expr.op in _TIGHT_OPS else f" {expr.op} "
        return f"{lhs}{sep}{rhs}"
    raise TypeError(f"cannot render {type(expr).__name__}")


def _wrap(expr: Expression, parent_prec: int, tie_ok: bool) -> str:
    text = render_expr(expr)
    prec = _expr_prec(expr)
    if prec < parent_prec or (prec == parent_prec and not tie_ok):
        return f"({text})"
    return text


def _render_step(step: AccessStep) -> str:
    if not step.indices:
        return step.name
    inner = ",".join(render_expr(i) for i in step.indices)
    return f"{step.name}[{inner}]"


def _render_domain(dom: Domain) -> str:
    if isinstance(dom, Interval):
        return f"[{render_expr(dom.lower)}, {render_expr(dom.upper)}]"
    return "{" + ",".join(render_expr(v) for v in dom.values) + "}"


class _Renderer:
    def __init__(self):
        self.lines: list[str] = []

    def emit(self, depth: int, text: str) -> None:
        self.lines.append(" " * depth + text)

    def element(self, el, depth: int = 0) -> None:
        if isinstance(el, EnumType):
            lits = ",".join(el.literals)
            self.emit(depth, f"enum {el.name} := {{{lits}}};")
        elif isinstance(el, Constant):
            self.emit(depth, f"{el.type} {el.name} := {render_expr(el.value)};")
        elif isinstance(el, Variable):
            set_part = " set" if el.is_set else ""
            dims = ""
            if el.array is not None:
                inner = render_expr(el.array.n)
                if el.array.m is not None:
                    inner += "," + render_expr(el.array.m)
                dims = f"[{inner}]"
            dom = f" in {_render_domain(el.domain)}" if el.domain else ""
            self.emit(depth, f"{el.type}{set_part} {el.name}{dims}{dom};")
        elif isinstance(el, ClassType):
            head = ""
            if el.is_main:
                head += "main "
            if el.is_abstract:
                head += "abstract "
            ext = ""
            if el.super_types:
                ext = " extends " + ",".join(el.super_types)
            self.emit(depth, f"{head}class {el.name}{ext} {{")
            for feat in el.features:
                self.element(feat, depth + 1)
            self.emit(depth, "}")
        elif isinstance(el, ConstraintZone):
            self.emit(depth, f"constraint {el.name} {{")
            for s in el.statements:
                self.statement(s, depth + 1)
            self.emit(depth, "}")
        elif isinstance(el, Record):
            dims = f"[{render_expr(el.array.n)}]" if el.array else ""
            self.emit(depth, f"record {el.name}{dims} {{")
            for sub in el.elements:
                if isinstance(sub, Statement):
                    self.statement(sub, depth + 1)
                else:
                    self.element(sub, depth + 1)
            self.emit(depth, "}")
        elif isinstance(el, Predicate):
            self.emit(depth, f"predicate {el.name} {{")
            for s in el.statements:
                self.statement(s, depth + 1)
            self.emit(depth, "}")
        elif isinstance(el, Statement):
            self.statement(el, depth)
        else:
            raise TypeError(f"cannot render element {type(el).__name__}")

    def statement(self, stmt: Statement, depth: int) -> None:
        if isinstance(stmt, Constraint):
            self.emit(depth, f"{render_expr(stmt.expr)};")
        elif isinstance(stmt, Forall):
            lo, hi = render_expr(stmt.lower), render_expr(stmt.upper)
            self.emit(depth, f"forall {stmt.index} in [{lo},{hi}] {{")
            for s in stmt.body:
                self.statement(s, depth + 1)
            self.emit(depth, "}")
        elif isinstance(stmt, IfStmt):
            self.emit(depth, f"if ({render_expr(stmt.cond)}) {{")
            for s in stmt.then_body:
                self.statement(s, depth + 1)
            if stmt.else_body is not None:
                self.emit(depth, "} else {")
                for s in stmt.else_body:
                    self.statement(s, depth + 1)
            self.emit(depth, "}")
        else:
            raise TypeError(f"cannot render statement {type(stmt).__name__}")


def extract_source(p: PivotModel) -> str:
    """Render a pivot model in concrete syntax.

    For injected or flattened models the output re-parses (via
    parse_model + inject) to a structurally equal model. Records and
    predicates render in a debug-only form that is not re-parseable.
    """
    r = _Renderer()
    for el in p.elements:
        r.element(el, 0)
    return "\n".join(r.lines) + ("\n" if r.lines else "")
