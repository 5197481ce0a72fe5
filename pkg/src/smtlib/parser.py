from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

from ..constants import IGNORED_COMMANDS, REJECTED_COMMANDS, SMT_COMMANDS, THEORY_CONSTANTS
from ..errors import HarnessError
from .ast import (
    ANY,
    BOOL,
    FALSE,
    INT,
    TRUE,
    App,
    Const,
    Declaration,
    Op,
    Quantifier,
    Script,
    Sort,
    SortKind,
    Term,
    Uninterpreted,
    Var,
    bitvec,
    compatible,
    opaque,
    substitute,
)
from .lexer import Token, TokenKind, tokenize


LOGGER = logging.getLogger(__name__)


class ParseError(HarnessError):
    code = 202

    def __init__(self, line: int, column: int, expected: str, found: str = "") -> None:
        message = f"{line}:{column}: expected {expected}"
        if found:
            message += f", found {found}"
        super().__init__(message)
        self.line = line
        self.column = column
        self.expected = expected


class SortError(HarnessError):
    code = 203

    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class SList:
    items: List["SExpr"]
    line: int
    column: int


SExpr = Union[Token, SList]


# ------------------------------------------------------------------ s-expressions
def read_sexprs(tokens: Sequence[Token]) -> List[SExpr]:
    stack: List[SList] = []
    top: List[SExpr] = []
    for tok in tokens:
        if tok.kind is TokenKind.LPAREN:
            stack.append(SList([], tok.line, tok.column))
        elif tok.kind is TokenKind.RPAREN:
            if not stack:
                raise ParseError(tok.line, tok.column, "'(' or end of input", "')'")
            done = stack.pop()
            (stack[-1].items if stack else top).append(done)
        else:
            (stack[-1].items if stack else top).append(tok)
    if stack:
        open_list = stack[-1]
        raise ParseError(open_list.line, open_list.column, "')' closing this '('", "end of input")
    return top


def render_sexpr(sx: SExpr) -> str:
    if isinstance(sx, Token):
        return sx.raw
    return "(" + " ".join(render_sexpr(item) for item in sx.items) + ")"


def _pos(sx: SExpr) -> Tuple[int, int]:
    return sx.line, sx.column


def _describe(sx: SExpr) -> str:
    if isinstance(sx, Token):
        return f"'{sx.raw}'"
    return "a list"


def _symbol(sx: SExpr, expected: str) -> str:
    if isinstance(sx, Token) and sx.kind is TokenKind.SYMBOL:
        return sx.value
    line, column = _pos(sx)
    raise ParseError(line, column, expected, _describe(sx))


def _list(sx: SExpr, expected: str) -> SList:
    if isinstance(sx, SList):
        return sx
    line, column = _pos(sx)
    raise ParseError(line, column, expected, _describe(sx))


def _arity(lst: SList, count: int, what: str) -> None:
    if len(lst.items) != count:
        raise ParseError(lst.line, lst.column, f"{what} with {count - 1} argument(s)", f"{len(lst.items) - 1}")


# ------------------------------------------------------------------ sorts
def parse_sort(sx: SExpr) -> Sort:
    if isinstance(sx, Token):
        name = _symbol(sx, "a sort")
        if name == "Bool":
            return BOOL
        if name == "Int":
            return INT
        return opaque(name)
    items = sx.items
    if (
        len(items) == 3
        and isinstance(items[0], Token)
        and items[0].value == "_"
        and isinstance(items[1], Token)
        and items[1].value == "BitVec"
    ):
        width_tok = items[2]
        if not isinstance(width_tok, Token) or width_tok.kind is not TokenKind.NUMERAL:
            raise ParseError(sx.line, sx.column, "a numeral bit-vector width", _describe(width_tok))
        width = int(width_tok.value)
        if width < 1:
            raise SortError(f"{sx.line}:{sx.column}", "bit-vector width must be >= 1")
        return bitvec(width)
    return opaque(render_sexpr(sx))


# ------------------------------------------------------------------ terms
_BOOL_NARY = {"and": Op.AND, "or": Op.OR, "xor": Op.XOR, "=>": Op.IMPLIES}
_ARITH_CMP = {"<": Op.LT, "<=": Op.LE, ">": Op.GT, ">=": Op.GE}
_ARITH = {"+": Op.ADD, "-": Op.SUB, "*": Op.MUL}
_BV_NARY = {"bvand": Op.BVAND, "bvor": Op.BVOR, "bvxor": Op.BVXOR, "bvadd": Op.BVADD, "bvmul": Op.BVMUL}
_BV_BINARY = {"bvsub": Op.BVSUB, "bvshl": Op.BVSHL, "bvlshr": Op.BVLSHR}
_BV_UNARY = {"bvnot": Op.BVNOT, "bvneg": Op.BVNEG}
_BV_CMP = {"bvult": Op.BVULT, "bvule": Op.BVULE, "bvugt": Op.BVUGT, "bvuge": Op.BVUGE}


@dataclass
class _Macro:
    params: Tuple[Tuple[str, Sort], ...]
    body: Term


class _ScriptParser:
    def __init__(self) -> None:
        self.logic: Optional[str] = None
        self.declarations: Dict[str, Declaration] = {}
        self.macros: Dict[str, _Macro] = {}
        self.assertions: List[Term] = []
        self.has_check_sat = False

    # .................................................................. commands
    def command(self, sx: SExpr, index: int) -> None:
        lst = _list(sx, "'(' starting a command")
        if not lst.items:
            raise ParseError(lst.line, lst.column, "a command name", "'()'")
        name = _symbol(lst.items[0], "a command name")
        args = lst.items[1:]
        if name not in SMT_COMMANDS:
            raise ParseError(lst.line, lst.column, "a known SMT-LIB command", f"'{name}'")
        if name in REJECTED_COMMANDS:
            raise ParseError(lst.line, lst.column, "a single-check command", f"unsupported '{name}'")
        if name in IGNORED_COMMANDS:
            LOGGER.debug("Ignoring SMT-LIB command %s at line %d", name, lst.line)
            return
        path = f"command[{index}]"
        if name == "set-logic":
            _arity(lst, 2, "set-logic")
            self.logic = _symbol(args[0], "a logic name")
        elif name == "declare-const":
            _arity(lst, 3, "declare-const")
            self._declare(_symbol(args[0], "a constant name"), (), parse_sort(args[1]), path)
        elif name == "declare-fun":
            _arity(lst, 4, "declare-fun")
            arg_sorts = tuple(parse_sort(s) for s in _list(args[1], "a parameter sort list").items)
            self._declare(_symbol(args[0], "a function name"), arg_sorts, parse_sort(args[2]), path)
        elif name == "define-fun":
            _arity(lst, 5, "define-fun")
            self._define(args, path)
        elif name == "assert":
            _arity(lst, 2, "assert")
            term = self.term(args[0], {}, f"assert[{len(self.assertions)}]")
            if not compatible(term.sort, BOOL):
                raise SortError(f"assert[{len(self.assertions)}]", f"assertion has sort {term.sort}, expected Bool")
            self.assertions.append(term)
        elif name == "check-sat":
            _arity(lst, 1, "check-sat")
            self.has_check_sat = True

    def _declare(self, name: str, arg_sorts: Tuple[Sort, ...], sort: Sort, path: str) -> None:
        if name in self.declarations or name in self.macros:
            raise SortError(path, f"symbol '{name}' already declared")
        self.declarations[name] = Declaration(name, sort, arg_sorts)

    def _define(self, args: List[SExpr], path: str) -> None:
        name = _symbol(args[0], "a function name")
        params: List[Tuple[str, Sort]] = []
        for param in _list(args[1], "a parameter list").items:
            pair = _list(param, "a (name sort) parameter")
            _arity(pair, 2, "parameter")
            params.append((_symbol(pair.items[0], "a parameter name"), parse_sort(pair.items[1])))
        sort = parse_sort(args[2])
        scope: Dict[str, Term] = {p: Var(p, s) for p, s in params}
        body = self.term(args[3], scope, f"{path}/{name}")
        if not compatible(body.sort, sort):
            raise SortError(path, f"body of '{name}' has sort {body.sort}, declared {sort}")
        if name in self.declarations or name in self.macros:
            raise SortError(path, f"symbol '{name}' already declared")
        self.macros[name] = _Macro(tuple(params), body)

    # .................................................................. terms
    def term(self, sx: SExpr, scope: Dict[str, Term], path: str) -> Term:
        if isinstance(sx, Token):
            return self._atom(sx, scope, path)
        if not sx.items:
            raise ParseError(sx.line, sx.column, "a term", "'()'")
        head = sx.items[0]
        rest = sx.items[1:]
        if isinstance(head, SList):
            args = tuple(self.term(a, scope, f"{path}/{i}") for i, a in enumerate(rest))
            return Uninterpreted(render_sexpr(head), args, ANY)
        name = _symbol(head, "an operator symbol")
        here = f"{path}/{name}"

        if name == "let":
            return self._let(sx, scope, here)
        if name in ("forall", "exists"):
            return self._quantifier(sx, name, scope, here)
        if name == "!":
            if not rest:
                raise ParseError(sx.line, sx.column, "an annotated term")
            return self.term(rest[0], scope, here)
        if name in ("_", "as"):
            if name == "_" and len(rest) == 2 and isinstance(rest[0], Token) and rest[0].value.startswith("bv"):
                digits = rest[0].value[2:]
                if digits.isdigit() and isinstance(rest[1], Token) and rest[1].kind is TokenKind.NUMERAL:
                    width = int(rest[1].value)
                    if width < 1:
                        raise SortError(here, "bit-vector width must be >= 1")
                    return Const(int(digits) % (1 << width), bitvec(width))
            return Uninterpreted(render_sexpr(sx), (), ANY)
        if name == "-" and len(rest) == 1 and isinstance(rest[0], Token) and rest[0].kind is TokenKind.NUMERAL:
            return Const(-int(rest[0].value), INT)

        args = tuple(self.term(a, scope, f"{here}[{i}]") for i, a in enumerate(rest))
        if name in self.macros:
            return self._expand(name, args, here)
        if name in self.declarations and name not in scope:
            decl = self.declarations[name]
            if decl.arity != len(args):
                raise SortError(here, f"'{name}' expects {decl.arity} argument(s), got {len(args)}")
            for i, (arg, expected) in enumerate(zip(args, decl.arg_sorts)):
                if not compatible(arg.sort, expected):
                    raise SortError(f"{here}[{i}]", f"expected {expected}, got {arg.sort}")
            return Uninterpreted(name, args, decl.sort)
        built = build_app(name, args, here)
        if built is not None:
            return built
        return Uninterpreted(name, args, ANY)

    def _atom(self, tok: Token, scope: Dict[str, Term], path: str) -> Term:
        if tok.kind is TokenKind.NUMERAL:
            return Const(int(tok.value), INT)
        if tok.kind is TokenKind.HEX:
            return Const(int(tok.value, 16), bitvec(4 * len(tok.value)))
        if tok.kind is TokenKind.BINARY:
            return Const(int(tok.value, 2), bitvec(len(tok.value)))
        if tok.kind is TokenKind.DECIMAL:
            return Uninterpreted(tok.raw, (), opaque("Real"))
        if tok.kind is TokenKind.STRING:
            return Uninterpreted(tok.raw, (), opaque("String"))
        if tok.kind is TokenKind.KEYWORD:
            raise ParseError(tok.line, tok.column, "a term", f"keyword '{tok.raw}'")
        name = tok.value
        if name in scope:
            return scope[name]
        if name == "true":
            return TRUE
        if name == "false":
            return FALSE
        if name in self.macros:
            return self._expand(name, (), path)
        if name in self.declarations:
            decl = self.declarations[name]
            if decl.arity:
                raise SortError(path, f"function '{name}' used without arguments")
            return Var(name, decl.sort)
        if name in THEORY_CONSTANTS:
            return Uninterpreted(name, (), ANY)
        raise SortError(path, f"undeclared symbol '{name}'")

    def _expand(self, name: str, args: Tuple[Term, ...], path: str) -> Term:
        macro = self.macros[name]
        if len(args) != len(macro.params):
            raise SortError(path, f"'{name}' expects {len(macro.params)} argument(s), got {len(args)}")
        for i, ((_, sort), arg) in enumerate(zip(macro.params, args)):
            if not compatible(arg.sort, sort):
                raise SortError(f"{path}[{i}]", f"expected {sort}, got {arg.sort}")
        return substitute(macro.body, {p: a for (p, _), a in zip(macro.params, args)})

    def _let(self, sx: SList, scope: Dict[str, Term], path: str) -> Term:
        _arity(sx, 3, "let")
        bindings = _list(sx.items[1], "a let binding list")
        inner = dict(scope)
        for binding in bindings.items:
            pair = _list(binding, "a (name term) binding")
            _arity(pair, 2, "binding")
            var = _symbol(pair.items[0], "a bound name")
            inner[var] = self.term(pair.items[1], scope, f"{path}/{var}")
        return self.term(sx.items[2], inner, path)

    def _quantifier(self, sx: SList, kind: str, scope: Dict[str, Term], path: str) -> Term:
        _arity(sx, 3, kind)
        bound: List[Tuple[str, Sort]] = []
        inner = dict(scope)
        for item in _list(sx.items[1], "a sorted variable list").items:
            pair = _list(item, "a (name sort) variable")
            _arity(pair, 2, "sorted variable")
            var = _symbol(pair.items[0], "a variable name")
            sort = parse_sort(pair.items[1])
            bound.append((var, sort))
            inner[var] = Var(var, sort)
        if not bound:
            raise ParseError(sx.line, sx.column, "at least one bound variable")
        body = self.term(sx.items[2], inner, path)
        if not compatible(body.sort, BOOL):
            raise SortError(path, f"quantifier body has sort {body.sort}, expected Bool")
        return Quantifier(kind, tuple(bound), body)


def _first_concrete(args: Sequence[Term]) -> Sort:
    for arg in args:
        if not arg.sort.is_opaque:
            return arg.sort
    return ANY


def _require(args: Sequence[Term], path: str, low: int, high: Optional[int] = None) -> None:
    if len(args) < low or (high is not None and len(args) > high):
        expected = str(low) if high == low else f"at least {low}" if high is None else f"{low}..{high}"
        raise SortError(path, f"expected {expected} argument(s), got {len(args)}")


def _check_all(args: Sequence[Term], path: str, predicate, label: str) -> None:
    for i, arg in enumerate(args):
        if not arg.sort.is_opaque and not predicate(arg.sort):
            raise SortError(f"{path}[{i}]", f"expected {label}, got {arg.sort}")


def _same_sort(args: Sequence[Term], path: str) -> Sort:
    sort = _first_concrete(args)
    for i, arg in enumerate(args):
        if not compatible(arg.sort, sort):
            raise SortError(f"{path}[{i}]", f"expected {sort}, got {arg.sort}")
    return sort


def build_app(name: str, args: Tuple[Term, ...], path: str) -> Optional[Term]:
    """Sort-check a core/Int/BitVec application; None for operators outside the subset."""
    is_bool = lambda s: s.kind is SortKind.BOOL  # noqa: E731
    is_int = lambda s: s.kind is SortKind.INT  # noqa: E731
    is_bv = lambda s: s.kind is SortKind.BITVEC  # noqa: E731

    if name == "not":
        _require(args, path, 1, 1)
        _check_all(args, path, is_bool, "Bool")
        return App(Op.NOT, args, BOOL)
    if name in _BOOL_NARY:
        _require(args, path, 2 if name in ("xor", "=>") else 1)
        _check_all(args, path, is_bool, "Bool")
        return App(_BOOL_NARY[name], args, BOOL)
    if name in ("=", "distinct"):
        _require(args, path, 2)
        sort = _same_sort(args, path)
        if name == "distinct":
            return App(Op.DISTINCT, args, BOOL)
        return App(Op.IFF if sort.kind is SortKind.BOOL else Op.EQ, args, BOOL)
    if name == "ite":
        _require(args, path, 3, 3)
        _check_all(args[:1], path, is_bool, "Bool")
        sort = _same_sort(args[1:], path)
        return App(Op.ITE, args, sort)
    if name in _ARITH_CMP:
        _require(args, path, 2)
        _check_all(args, path, is_int, "Int")
        return App(_ARITH_CMP[name], args, BOOL)
    if name in _ARITH:
        _require(args, path, 1)
        _check_all(args, path, is_int, "Int")
        sort = INT if all(not a.sort.is_opaque for a in args) else ANY
        return App(_ARITH[name], args, sort)
    if name in _BV_NARY or name in _BV_BINARY or name in _BV_UNARY or name in _BV_CMP:
        if name in _BV_UNARY:
            _require(args, path, 1, 1)
        elif name in _BV_NARY:
            _require(args, path, 2)
        else:
            _require(args, path, 2, 2)
        _check_all(args, path, is_bv, "a bit-vector")
        sort = _same_sort(args, path)
        if name in _BV_CMP:
            return App(_BV_CMP[name], args, BOOL)
        op = _BV_NARY.get(name) or _BV_BINARY.get(name) or _BV_UNARY[name]
        return App(op, args, sort)
    return None


def parse(src: str) -> Script:
    """Parse SMT-LIB v2 text into a well-sorted Script.

    ``let`` and ``define-fun`` are expanded in place, ``!`` annotations are
    dropped and informational commands are skipped. Terms outside the
    Bool/Int/BitVec subset are kept as opaque ``Uninterpreted`` nodes.
    """
    parser = _ScriptParser()
    for index, sx in enumerate(read_sexprs(tokenize(src))):
        parser.command(sx, index)
    return Script(
        logic=parser.logic,
        declarations=tuple(parser.declarations.values()),
        assertions=tuple(parser.assertions),
        has_check_sat=parser.has_check_sat,
    )
