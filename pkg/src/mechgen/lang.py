"""AST, type checker, pretty-printer, and parser for the generated language.

The language is a loop-free imperative subset: four statement kinds plus a
terminal return. Operators do not exist at the syntax level; arithmetic and
comparison are ordinary registry methods, so every computation is a call.

Surface grammar (``pretty`` emits exactly this shape, one statement header per
line with 4-space indentation; ``parse`` accepts arbitrary whitespace)::

    block    := line*
    line     := vardecl | assign | callstmt | ifelse | return
    vardecl  := type ident "=" expr ";"
    assign   := lvalue "=" expr ";"
    callstmt := ident "(" [expr ("," expr)*] ")" ";"
    ifelse   := "if" "(" expr ")" "{" block "}" ["else" "{" block "}"]
    return   := "return" [expr] ";"
    expr     := intlit | "true" | "false" | ident "." ident | ident
              | ident "(" [expr ("," expr)*] ")"
    type     := "int" | "bool" | ident

Surface syntax spells both locals and fields as bare identifiers, so the
parser classifies a name as a local reference when it is a parameter or was
declared by an earlier ``vardecl`` in a visible frame, and as a field
reference otherwise. Round-tripping therefore requires parameter names to be
supplied (``parse(text, params=...)``) and assumes field names do not collide
with visible local names; generated code guarantees both.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .registry import (
    BOOL,
    INT,
    VOID,
    Registry,
    TypeId,
    TypeKind,
    enum_type,
)

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


# --------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Expression:
    pass


@dataclass(frozen=True)
class IntLit(Expression):
    value: int


@dataclass(frozen=True)
class BoolLit(Expression):
    value: bool


@dataclass(frozen=True)
class EnumLit(Expression):
    enum: str
    variant: str


@dataclass(frozen=True)
class LocalRef(Expression):
    name: str


@dataclass(frozen=True)
class FieldRef(Expression):
    name: str


@dataclass(frozen=True)
class Call(Expression):
    method: str
    args: Tuple[Expression, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class LValue:
    name: str


@dataclass(frozen=True)
class LocalTarget(LValue):
    pass


@dataclass(frozen=True)
class FieldTarget(LValue):
    pass


@dataclass(frozen=True)
class Statement:
    pass


@dataclass(frozen=True)
class VarDecl(Statement):
    type: TypeId
    name: str
    init: Expression


@dataclass(frozen=True)
class Assign(Statement):
    target: LValue
    value: Expression


@dataclass(frozen=True)
class ExprStmt(Statement):
    call: Call


@dataclass(frozen=True)
class Return(Statement):
    value: Optional[Expression] = None


@dataclass(frozen=True)
class CodeBlock:
    statements: Tuple[Statement, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "statements", tuple(self.statements))


@dataclass(frozen=True)
class IfElse(Statement):
    cond: Expression
    then_block: CodeBlock
    else_block: Optional[CodeBlock] = None


@dataclass(frozen=True)
class Signature:
    """Name, parameters, and return type of a hook or delegate."""

    name: str
    params: Tuple[Tuple[str, TypeId], ...]
    return_type: TypeId

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", tuple(tuple(p) for p in self.params))
        names = [n for n, _ in self.params]
        if len(set(names)) != len(names):
            raise ValueError(f"signature '{self.name}' repeats a parameter name")
        for _, t in self.params:
            if t.is_void:
                raise ValueError(f"signature '{self.name}' has a void parameter")

    def format(self) -> str:
        params = ", ".join(f"{n}:{t.display()}" for n, t in self.params)
        return f"{self.name}({params}) -> {self.return_type.display()}"


# --------------------------------------------------------------------------
# Type checking


class TypeCheckError(Exception):
    """A static check failure, with enough context to locate it."""

    def __init__(
        self,
        message: str,
        stmt_index: Optional[int] = None,
        path: str = "",
        expected: Optional[TypeId] = None,
        found: Optional[TypeId] = None,
    ):
        where = f"stmt {stmt_index}" if stmt_index is not None else "block"
        if path:
            where += f": {path}"
        super().__init__(f"{where}: {message}")
        self.stmt_index = stmt_index
        self.path = path
        self.expected = expected
        self.found = found


def typecheck(block: CodeBlock, sig: Signature, registry: Registry) -> None:
    """Raise TypeCheckError unless ``block`` is a valid body for ``sig``.

    Checks: every expression's type matches its context, every local is a
    parameter or declared earlier in a visible frame (no redeclaration of a
    visible name), field/method references are usable and type-correct,
    assignment targets are writable, branch-local declarations do not escape,
    and a final ``return`` of the right type closes non-void bodies.
    """
    frames: List[Dict[str, TypeId]] = [dict(sig.params)]
    n = len(block.statements)
    for i, st in enumerate(block.statements):
        _check_stmt(st, i, frames, registry, sig, top=True, last=(i == n - 1))
    if sig.return_type != VOID:
        if n == 0 or not isinstance(block.statements[-1], Return):
            raise TypeCheckError(
                f"missing final return of type {sig.return_type.display()}",
                stmt_index=max(n - 1, 0),
                expected=sig.return_type,
            )


def _lookup_local(frames: List[Dict[str, TypeId]], name: str) -> Optional[TypeId]:
    for frame in reversed(frames):
        if name in frame:
            return frame[name]
    return None


def _valid_decl_type(t: TypeId, registry: Registry) -> bool:
    if t.kind is TypeKind.ENUM:
        return t.enum_name in registry.enums
    return t in (INT, BOOL)


def _check_stmt(
    st: Statement,
    i: int,
    frames: List[Dict[str, TypeId]],
    registry: Registry,
    sig: Signature,
    top: bool,
    last: bool,
) -> None:
    if isinstance(st, Return):
        if not (top and last):
            raise TypeCheckError("return is only allowed as the final top-level statement", i)
        if sig.return_type == VOID:
            if st.value is not None:
                raise TypeCheckError("void body cannot return a value", i, expected=VOID)
        else:
            if st.value is None:
                raise TypeCheckError(
                    f"return needs a value of type {sig.return_type.display()}",
                    i,
                    expected=sig.return_type,
                )
            found = _infer(st.value, i, frames, registry, "return value")
            if found != sig.return_type:
                raise TypeCheckError(
                    f"expected {sig.return_type.display()}, found {found.display()}",
                    i,
                    path="return value",
                    expected=sig.return_type,
                    found=found,
                )
    elif isinstance(st, VarDecl):
        if not _valid_decl_type(st.type, registry):
            raise TypeCheckError(f"unknown type '{st.type.display()}'", i)
        if _lookup_local(frames, st.name) is not None:
            raise TypeCheckError(f"redeclaration of visible local '{st.name}'", i)
        found = _infer(st.init, i, frames, registry, f"initializer of {st.name}")
        if found != st.type:
            raise TypeCheckError(
                f"expected {st.type.display()}, found {found.display()}",
                i,
                path=f"initializer of {st.name}",
                expected=st.type,
                found=found,
            )
        frames[-1][st.name] = st.type
    elif isinstance(st, Assign):
        if isinstance(st.target, LocalTarget):
            target_type = _lookup_local(frames, st.target.name)
            if target_type is None:
                raise TypeCheckError(f"unknown local '{st.target.name}'", i)
        else:
            fd = registry.field_named(st.target.name)
            if fd is None:
                raise TypeCheckError(f"unknown field '{st.target.name}'", i)
            if not fd.usable:
                raise TypeCheckError(f"field '{st.target.name}' is not usable", i)
            if not fd.writable:
                raise TypeCheckError(f"field '{st.target.name}' is read-only", i)
            target_type = fd.type
        found = _infer(st.value, i, frames, registry, f"value assigned to {st.target.name}")
        if found != target_type:
            raise TypeCheckError(
                f"expected {target_type.display()}, found {found.display()}",
                i,
                path=f"value assigned to {st.target.name}",
                expected=target_type,
                found=found,
            )
    elif isinstance(st, ExprStmt):
        if not isinstance(st.call, Call):
            raise TypeCheckError("statement expression must be a call", i)
        _infer_call(st.call, i, frames, registry, "statement call", allow_void=True)
    elif isinstance(st, IfElse):
        found = _infer(st.cond, i, frames, registry, "if condition")
        if found != BOOL:
            raise TypeCheckError(
                f"expected bool, found {found.display()}",
                i,
                path="if condition",
                expected=BOOL,
                found=found,
            )
        for branch in (st.then_block, st.else_block):
            if branch is None:
                continue
            frames.append({})
            for bst in branch.statements:
                _check_stmt(bst, i, frames, registry, sig, top=False, last=False)
            frames.pop()
    else:
        raise TypeCheckError(f"unknown statement kind {type(st).__name__}", i)


def _infer(
    expr: Expression,
    i: int,
    frames: List[Dict[str, TypeId]],
    registry: Registry,
    path: str,
) -> TypeId:
    if isinstance(expr, IntLit):
        return INT
    if isinstance(expr, BoolLit):
        return BOOL
    if isinstance(expr, EnumLit):
        e = registry.enum(expr.enum)
        if e is None:
            raise TypeCheckError(f"unknown enum '{expr.enum}'", i, path)
        if expr.variant not in e.variants:
            raise TypeCheckError(
                f"enum '{expr.enum}' has no variant '{expr.variant}'", i, path
            )
        return enum_type(expr.enum)
    if isinstance(expr, LocalRef):
        t = _lookup_local(frames, expr.name)
        if t is None:
            raise TypeCheckError(f"unknown local '{expr.name}'", i, path)
        return t
    if isinstance(expr, FieldRef):
        fd = registry.field_named(expr.name)
        if fd is None:
            raise TypeCheckError(f"unknown field '{expr.name}'", i, path)
        if not fd.usable:
            raise TypeCheckError(f"field '{expr.name}' is not usable", i, path)
        return fd.type
    if isinstance(expr, Call):
        return _infer_call(expr, i, frames, registry, path, allow_void=False)
    raise TypeCheckError(f"unknown expression kind {type(expr).__name__}", i, path)


def _infer_call(
    call: Call,
    i: int,
    frames: List[Dict[str, TypeId]],
    registry: Registry,
    path: str,
    allow_void: bool,
) -> TypeId:
    md = registry.method_named(call.method)
    if md is None:
        raise TypeCheckError(f"unknown method '{call.method}'", i, path)
    if not md.usable:
        raise TypeCheckError(f"method '{call.method}' is not usable", i, path)
    if len(call.args) != md.arity:
        raise TypeCheckError(
            f"method '{call.method}' takes {md.arity} argument(s), got {len(call.args)}",
            i,
            path,
        )
    for k, (arg, (pname, ptype)) in enumerate(zip(call.args, md.params)):
        sub_path = f"arg {k} of {call.method}"
        found = _infer(arg, i, frames, registry, sub_path)
        if found != ptype:
            raise TypeCheckError(
                f"expected {ptype.display()}, found {found.display()}",
                i,
                path=sub_path,
                expected=ptype,
                found=found,
            )
    if md.return_type == VOID and not allow_void:
        raise TypeCheckError(f"void call '{call.method}' used as a value", i, path)
    return md.return_type


# --------------------------------------------------------------------------
# Pretty-printing


def pretty(block: CodeBlock) -> str:
    """Render a block in the canonical surface form, one newline per line."""
    return "".join(line + "\n" for line in _stmt_lines(block, 0))


def pretty_expr(expr: Expression) -> str:
    if isinstance(expr, IntLit):
        return str(expr.value)
    if isinstance(expr, BoolLit):
        return "true" if expr.value else "false"
    if isinstance(expr, EnumLit):
        return f"{expr.enum}.{expr.variant}"
    if isinstance(expr, (LocalRef, FieldRef)):
        return expr.name
    if isinstance(expr, Call):
        return f"{expr.method}({', '.join(pretty_expr(a) for a in expr.args)})"
    raise ValueError(f"cannot print expression {expr!r}")


def _stmt_lines(block: CodeBlock, depth: int) -> List[str]:
    pad = "    " * depth
    out: List[str] = []
    for st in block.statements:
        if isinstance(st, VarDecl):
            out.append(f"{pad}{st.type.display()} {st.name} = {pretty_expr(st.init)};")
        elif isinstance(st, Assign):
            out.append(f"{pad}{st.target.name} = {pretty_expr(st.value)};")
        elif isinstance(st, ExprStmt):
            out.append(f"{pad}{pretty_expr(st.call)};")
        elif isinstance(st, Return):
            if st.value is None:
                out.append(f"{pad}return;")
            else:
                out.append(f"{pad}return {pretty_expr(st.value)};")
        elif isinstance(st, IfElse):
            out.append(f"{pad}if ({pretty_expr(st.cond)}) {{")
            out.extend(_stmt_lines(st.then_block, depth + 1))
            if st.else_block is None:
                out.append(f"{pad}}}")
            else:
                out.append(f"{pad}}} else {{")
                out.extend(_stmt_lines(st.else_block, depth + 1))
                out.append(f"{pad}}}")
        else:
            raise ValueError(f"cannot print statement {st!r}")
    return out


# --------------------------------------------------------------------------
# Parsing


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int, expected: Sequence[str] = ()):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col
        self.expected = tuple(expected)


_KEYWORDS = frozenset({"if", "else", "return", "true", "false", "int", "bool"})

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+)"
    r"|(?P<int>-?[0-9]+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<punct>[(){};,.=])"
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "int", "ident", a keyword, a punctuation char, or "eof"
    text: str
    line: int
    col: int


def _tokenize(text: str, first_line: int = 1) -> List[_Token]:
    tokens: List[_Token] = []
    line = first_line
    col = 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        lexeme = m.group(0)
        kind = m.lastgroup or ""
        if kind != "ws":
            if kind == "ident" and lexeme in _KEYWORDS:
                kind = lexeme
            elif kind == "punct":
                kind = lexeme
            tokens.append(_Token(kind, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    if tokens:
        # position end-of-input at the end of the last real token, so errors
        # about unfinished statements point at their own line
        last = tokens[-1]
        tokens.append(_Token("eof", "", last.line, last.col + len(last.text)))
    else:
        tokens.append(_Token("eof", "", line, col))
    return tokens


class _BlockParser:
    def __init__(self, tokens: List[_Token], params: Sequence[str]):
        self.tokens = tokens
        self.pos = 0
        self.frames: List[set] = [set(params)]

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(
                f"expected {kind!r}, found {tok.text or 'end of input'!r}",
                tok.line,
                tok.col,
                expected=(kind,),
            )
        return self.advance()

    def _is_local(self, name: str) -> bool:
        return any(name in frame for frame in self.frames)

    def parse_block(self, nested: bool) -> CodeBlock:
        stmts: List[Statement] = []
        while True:
            tok = self.peek()
            if tok.kind == "eof" and not nested:
                break
            if tok.kind == "}" and nested:
                break
            stmts.append(self.parse_statement())
        return CodeBlock(tuple(stmts))

    def parse_statement(self) -> Statement:
        tok = self.peek()
        if tok.kind == "return":
            self.advance()
            if self.peek().kind == ";":
                self.advance()
                return Return(None)
            value = self.parse_expr()
            self.expect(";")
            return Return(value)
        if tok.kind == "if":
            return self.parse_ifelse()
        if tok.kind in ("int", "bool"):
            decl_type = INT if tok.kind == "int" else BOOL
            self.advance()
            return self.finish_vardecl(decl_type)
        if tok.kind == "ident":
            nxt = self.peek(1)
            if nxt.kind == "ident":
                self.advance()
                return self.finish_vardecl(enum_type(tok.text))
            if nxt.kind == "=":
                self.advance()
                self.advance()
                value = self.parse_expr()
                self.expect(";")
                target: LValue
                if self._is_local(tok.text):
                    target = LocalTarget(tok.text)
                else:
                    target = FieldTarget(tok.text)
                return Assign(target, value)
            if nxt.kind == "(":
                call = self.parse_call(self.advance())
                self.expect(";")
                return ExprStmt(call)
            raise ParseError(
                f"expected a statement, found {tok.text!r}",
                tok.line,
                tok.col,
                expected=("=", "(", "ident"),
            )
        raise ParseError(
            f"expected a statement, found {tok.text or 'end of input'!r}",
            tok.line,
            tok.col,
            expected=("ident", "if", "return", "int", "bool"),
        )

    def finish_vardecl(self, decl_type: TypeId) -> VarDecl:
        name_tok = self.expect("ident")
        self.expect("=")
        init = self.parse_expr()
        self.expect(";")
        self.frames[-1].add(name_tok.text)
        return VarDecl(decl_type, name_tok.text, init)

    def parse_ifelse(self) -> IfElse:
        self.expect("if")
        self.expect("(")
        cond = self.parse_expr()
        self.expect(")")
        self.expect("{")
        self.frames.append(set())
        then_block = self.parse_block(nested=True)
        self.frames.pop()
        self.expect("}")
        else_block: Optional[CodeBlock] = None
        if self.peek().kind == "else":
            self.advance()
            self.expect("{")
            self.frames.append(set())
            else_block = self.parse_block(nested=True)
            self.frames.pop()
            self.expect("}")
        return IfElse(cond, then_block, else_block)

    def parse_call(self, name_tok: _Token) -> Call:
        self.expect("(")
        args: List[Expression] = []
        if self.peek().kind != ")":
            args.append(self.parse_expr())
            while self.peek().kind == ",":
                self.advance()
                args.append(self.parse_expr())
        self.expect(")")
        return Call(name_tok.text, tuple(args))

    def parse_expr(self) -> Expression:
        tok = self.peek()
        if tok.kind == "int":
            self.advance()
            value = int(tok.text)
            if not (INT64_MIN <= value <= INT64_MAX):
                raise ParseError(
                    f"integer literal {tok.text} outside the 64-bit signed range",
                    tok.line,
                    tok.col,
                )
            return IntLit(value)
        if tok.kind in ("true", "false"):
            self.advance()
            return BoolLit(tok.kind == "true")
        if tok.kind == "ident":
            self.advance()
            nxt = self.peek()
            if nxt.kind == ".":
                self.advance()
                variant = self.expect("ident")
                return EnumLit(tok.text, variant.text)
            if nxt.kind == "(":
                return self.parse_call(tok)
            if self._is_local(tok.text):
                return LocalRef(tok.text)
            return FieldRef(tok.text)
        raise ParseError(
            f"expected an expression, found {tok.text or 'end of input'!r}",
            tok.line,
            tok.col,
            expected=("int", "ident", "true", "false"),
        )


def parse(text: str, params: Sequence[str] = (), first_line: int = 1) -> CodeBlock:
    """Parse a block body; ``params`` are the names bound by the signature."""
    parser = _BlockParser(_tokenize(text, first_line), params)
    block = parser.parse_block(nested=False)
    tok = parser.peek()
    if tok.kind != "eof":
        raise ParseError(f"unexpected {tok.text!r} after block", tok.line, tok.col)
    return block


# --------------------------------------------------------------------------
# Mechanic files: a signature header line followed by the block body.

_SIG_RE = re.compile(
    r"^\s*(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*"
    r"\((?P<params>[^)]*)\)\s*->\s*(?P<ret>[A-Za-z_][A-Za-z0-9_]*)\s*$"
)


def _parse_type_name(name: str, line: int, allow_void: bool) -> TypeId:
    if name == "int":
        return INT
    if name == "bool":
        return BOOL
    if name == "void":
        if allow_void:
            return VOID
        raise ParseError("void is not a value type", line, 1)
    return enum_type(name)


def parse_signature(text: str, line: int = 1) -> Signature:
    """Parse ``name(p1:t1, ...) -> ret``."""
    m = _SIG_RE.match(text)
    if m is None:
        raise ParseError(f"malformed signature {text.strip()!r}", line, 1)
    params: List[Tuple[str, TypeId]] = []
    raw = m.group("params").strip()
    if raw:
        for part in raw.split(","):
            if ":" not in part:
                raise ParseError(f"malformed parameter {part.strip()!r}", line, 1)
            pname, ptype = (s.strip() for s in part.split(":", 1))
            params.append((pname, _parse_type_name(ptype, line, allow_void=False)))
    ret = _parse_type_name(m.group("ret"), line, allow_void=True)
    return Signature(m.group("name"), tuple(params), ret)


def parse_mechanic(text: str) -> Tuple[Signature, CodeBlock]:
    """Load a mechanic file: ``signature: ...`` header, then the body."""
    lines = text.split("\n")
    header_index = None
    for idx, line in enumerate(lines):
        if line.strip() == "":
            continue
        header_index = idx
        break
    if header_index is None:
        raise ParseError("expected a 'signature:' header line", 1, 1)
    if not lines[header_index].lstrip().startswith("signature:"):
        raise ParseError("expected a 'signature:' header line", header_index + 1, 1)
    header = lines[header_index].lstrip()[len("signature:"):]
    sig = parse_signature(header, line=header_index + 1)
    body = "\n".join(lines[header_index + 1:])
    block = parse(body, params=[n for n, _ in sig.params], first_line=header_index + 2)
    return sig, block


def format_mechanic(sig: Signature, block: CodeBlock) -> str:
    return f"signature: {sig.format()}\n{pretty(block)}"
