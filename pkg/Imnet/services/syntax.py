"""ImNet abstract syntax, parser and canonical printer.

The grammar lives in ``imnet.lark``. Parsing goes through Lark's LALR
parser and a Transformer that builds the frozen dataclasses below, so two
programs compare equal exactly when their syntax trees do.

``print_program`` emits canonical text: ``parse_program(print_program(p))``
equals ``p`` and printing canonical text reproduces it byte for byte.
"""
import dataclasses
import functools
import logging
import re
from pathlib import Path
from typing import Iterable, List, Tuple, Union

import lark

from .errors import ImNetError, ParseError
from .values import (
    HEADER_FIELDS,
    WILDCARD,
    Action,
    ActionKind,
    Bool,
    IpAddr,
    Nat,
    Pattern,
    Port,
    SetValue,
    SwitchId,
    TupleValue,
    Value,
    Wildcard,
)

logger = logging.getLogger(__name__)

GRAMMAR = Path(__file__).with_name('imnet.lark')
SEPARATOR = '>>'
BUILTINS = frozenset({'port', 'switch', *HEADER_FIELDS})
QUERY_NAMES = ('SwitchIds', 'SourceIps', 'ArrivedPackets')
_SWITCH_NAME = re.compile(r'[A-Za-z0-9_]+\Z')


### Expressions

@dataclasses.dataclass(frozen=True)
class Var:
    name: str


@dataclasses.dataclass(frozen=True)
class ConstVal:
    value: Value


@dataclasses.dataclass(frozen=True)
class TupleExpr:
    items: Tuple['Expr', ...]


@dataclasses.dataclass(frozen=True)
class Proj:
    index: int
    of: 'Expr'


@dataclasses.dataclass(frozen=True)
class Builtin:
    name: str
    args: Tuple['Expr', ...]


@dataclasses.dataclass(frozen=True)
class Cmp:
    op: str
    lhs: 'Expr'
    rhs: 'Expr'


@dataclasses.dataclass(frozen=True)
class Arith:
    op: str
    lhs: 'Expr'
    rhs: 'Expr'


@dataclasses.dataclass(frozen=True)
class BoolOp:
    op: str
    lhs: 'Expr'
    rhs: 'Expr'


@dataclasses.dataclass(frozen=True)
class Not:
    operand: 'Expr'


Expr = Union[Var, ConstVal, TupleExpr, Proj, Builtin, Cmp, Arith, BoolOp, Not]


@dataclasses.dataclass(frozen=True)
class Lambda:
    param: str
    body: Expr


### Event transformers

@dataclasses.dataclass(frozen=True)
class Lift:
    var: str
    fn: Lambda


@dataclasses.dataclass(frozen=True)
class ApplyLft:
    var: str
    fn: Lambda


@dataclasses.dataclass(frozen=True)
class ApplyRit:
    var: str
    fn: Lambda


@dataclasses.dataclass(frozen=True)
class Filter:
    var: str
    fn: Lambda


@dataclasses.dataclass(frozen=True)
class Merge:
    left: str
    right: str


@dataclasses.dataclass(frozen=True)
class MixFst:
    initial: SetValue
    left: str
    right: str


@dataclasses.dataclass(frozen=True)
class MixSnd:
    initial: SetValue
    left: str
    right: str


@dataclasses.dataclass(frozen=True)
class Once:
    operand: Union[Var, ConstVal]
    count: int


@dataclasses.dataclass(frozen=True)
class MakForwRule:
    var: str


@dataclasses.dataclass(frozen=True)
class MakeRule:
    var: str


EventTransformer = Union[Lift, ApplyLft, ApplyRit, Filter, Merge, MixFst, MixSnd,
                         Once, MakForwRule, MakeRule]


### Statements and programs

@dataclasses.dataclass(frozen=True)
class Assign:
    var: str
    transformer: EventTransformer


@dataclasses.dataclass(frozen=True)
class Seq:
    first: 'Stmt'
    second: 'Stmt'


@dataclasses.dataclass(frozen=True)
class AddRules:
    var: str


@dataclasses.dataclass(frozen=True)
class Register:
    pass


@dataclasses.dataclass(frozen=True)
class Send:
    var: str


Stmt = Union[Assign, Seq, AddRules, Register, Send]


@dataclasses.dataclass(frozen=True)
class Def:
    var: str
    query: str
    # source position, for diagnostics only
    line: int = dataclasses.field(default=0, compare=False)
    column: int = dataclasses.field(default=0, compare=False)


@dataclasses.dataclass(frozen=True)
class Program:
    defs: Tuple[Def, ...]
    body: Stmt


@dataclasses.dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    message: str

    def __str__(self):
        return f'{self.line}:{self.column}: {self.message}'


def sequence(statements: Iterable[Stmt]) -> Stmt:
    """Right-nested Seq of one or more statements"""
    items = list(statements)
    if not items:
        raise ValueError('a statement sequence needs at least one statement')
    body = items[-1]
    for statement in reversed(items[:-1]):
        body = Seq(statement, body)
    return body


def atomic_statements(statement: Stmt) -> List[Stmt]:
    """Statements in execution order with every Seq dissolved"""
    if isinstance(statement, Seq):
        return atomic_statements(statement.first) + atomic_statements(statement.second)
    return [statement]


### Parsing

@functools.cache
def _parser() -> lark.Lark:
    return lark.Lark.open(
        str(GRAMMAR), parser='lalr', lexer='basic', start=['program', 'literal'],
        propagate_positions=True, maybe_placeholders=True)


def parse_program(text: str) -> Program:
    """Parse ImNet source into a Program; raises ParseError"""
    program = _parse(text, 'program')
    logger.debug('parsed program with %d definitions', len(program.defs))
    return program


def parse_literal(text: str) -> Value:
    """Parse a single literal such as ``(match(srcport=80), sendall, _)``"""
    return _parse(text, 'literal')


def _parse(text: str, start: str):
    try:
        tree = _parser().parse(text, start=start)
    except lark.exceptions.UnexpectedInput as exc:
        raise _parse_error(text, exc, start) from None
    try:
        return _Transformer().transform(tree)
    except lark.exceptions.VisitError as exc:
        line, column = _position(exc.obj)
        cause = exc.orig_exc
        message = cause.message if isinstance(cause, ImNetError) else str(cause)
        raise ParseError(message, line, column) from cause


def _position(obj) -> Tuple[int, int]:
    if isinstance(obj, lark.Token):
        return obj.line or 1, obj.column or 1
    meta = getattr(obj, 'meta', None)
    if meta is not None and not meta.empty:
        return meta.line, meta.column
    return 1, 1


def _display(name: str) -> str:
    if name == '$END':
        return 'end of input'
    try:
        pattern = _parser().get_terminal(name).pattern
    except KeyError:
        return name
    if isinstance(pattern, lark.lexer.PatternStr):
        return pattern.value
    return name


def _parse_error(text: str, exc: lark.exceptions.UnexpectedInput, start: str) -> ParseError:
    line, column = getattr(exc, 'line', -1), getattr(exc, 'column', -1)
    if not line or line < 1:
        lines = text.split('\n')
        line, column = len(lines), len(lines[-1]) + 1
    if isinstance(exc, lark.exceptions.UnexpectedCharacters):
        expected = {_display(name) for name in exc.allowed or ()}
        message = f'unexpected character {text[exc.pos_in_stream]!r}'
    else:
        expected = {_display(name) for name in getattr(exc, 'expected', None) or ()}
        token = getattr(exc, 'token', None)
        if token is None or token.type == '$END':
            message = 'unexpected end of input'
        else:
            message = f'unexpected {token.value!r}'
    if start == 'program' and SEPARATOR not in text:
        # definitions and statements are only told apart by the separator
        expected.add(SEPARATOR)
    return ParseError(message, line, column, frozenset(expected))


class _Transformer(lark.Transformer):
    """Turns Lark parse trees into the dataclasses above"""

    # programs and statements

    def program(self, items):
        *defs, _separator, body = items
        return Program(tuple(defs), body)

    @lark.v_args(inline=True, meta=True)
    def definition(self, meta, var, query):
        return Def(str(var), str(query), meta.line, meta.column)

    def statement_list(self, statements):
        return sequence(statements)

    @lark.v_args(inline=True)
    def assign(self, var, transformer):
        return Assign(str(var), transformer)

    @lark.v_args(inline=True)
    def add_rules(self, var):
        return AddRules(str(var))

    def register(self, _):
        return Register()

    @lark.v_args(inline=True)
    def send(self, var):
        return Send(str(var))

    @lark.v_args(inline=True)
    def block(self, body):
        return body

    # transformers

    @lark.v_args(inline=True)
    def lift(self, var, fn):
        return Lift(str(var), fn)

    @lark.v_args(inline=True)
    def apply_lft(self, var, fn):
        return ApplyLft(str(var), fn)

    @lark.v_args(inline=True)
    def apply_rit(self, var, fn):
        return ApplyRit(str(var), fn)

    @lark.v_args(inline=True)
    def filter(self, var, fn):
        return Filter(str(var), fn)

    @lark.v_args(inline=True)
    def merge(self, left, right):
        return Merge(str(left), str(right))

    @lark.v_args(inline=True)
    def mix_args(self, initial, left, right):
        return (initial if initial is not None else SetValue(), str(left), str(right))

    @lark.v_args(inline=True)
    def mix_fst(self, args):
        return MixFst(*args)

    @lark.v_args(inline=True)
    def mix_snd(self, args):
        return MixSnd(*args)

    @lark.v_args(inline=True)
    def once(self, operand, count):
        return Once(operand, int(count))

    @lark.v_args(inline=True)
    def once_var(self, name):
        return Var(str(name))

    @lark.v_args(inline=True)
    def once_const(self, value):
        return ConstVal(value)

    @lark.v_args(inline=True)
    def mak_forw_rule(self, var):
        return MakForwRule(str(var))

    @lark.v_args(inline=True)
    def make_rule(self, var):
        return MakeRule(str(var))

    @lark.v_args(inline=True)
    def lambda_(self, param, body):
        return Lambda(str(param), body)

    # expressions

    @lark.v_args(inline=True)
    def or_(self, lhs, rhs):
        return BoolOp('or', lhs, rhs)

    @lark.v_args(inline=True)
    def and_(self, lhs, rhs):
        return BoolOp('and', lhs, rhs)

    @lark.v_args(inline=True)
    def not_(self, operand):
        return Not(operand)

    @lark.v_args(inline=True)
    def cmp(self, lhs, op, rhs):
        return Cmp(str(op), lhs, rhs)

    @lark.v_args(inline=True)
    def arith(self, lhs, op, rhs):
        return Arith(str(op), lhs, rhs)

    @lark.v_args(inline=True)
    def proj(self, of, index):
        return Proj(int(index), of)

    @lark.v_args(inline=True)
    def var(self, name):
        return Var(str(name))

    @lark.v_args(inline=True)
    def const(self, value):
        return ConstVal(value)

    def paren(self, items):
        if len(items) == 1:
            return items[0]
        return TupleExpr(tuple(items))

    @lark.v_args(inline=True)
    def port_of(self, arg):
        return Builtin('port', (arg,))

    @lark.v_args(inline=True)
    def switch_of(self, arg, switches):
        return Builtin('switch', (arg, switches))

    @lark.v_args(inline=True)
    def header_of(self, field, arg):
        return Builtin(field, (arg,))

    # literals

    @lark.v_args(inline=True)
    def literal(self, value):
        return value

    def tuple_literal(self, items):
        return TupleValue(tuple(items))

    def set_literal(self, items):
        return SetValue(item for item in items if item is not None)

    @lark.v_args(inline=True)
    def nat(self, token):
        return Nat(int(token))

    def true(self, _):
        return Bool(True)

    def false(self, _):
        return Bool(False)

    @lark.v_args(inline=True)
    def switch_id(self, token):
        return SwitchId(str(token)[1:])

    @lark.v_args(inline=True)
    def port_number(self, token):
        return Port(int(token))

    @lark.v_args(inline=True)
    def ip(self, token):
        return IpAddr.parse(str(token))

    def wildcard(self, _):
        return WILDCARD

    def pattern(self, constraints):
        return Pattern(tuple(c for c in constraints if c is not None))

    @lark.v_args(inline=True)
    def constraint(self, field, value):
        return (field, value.address if isinstance(value, IpAddr) else value.value)

    def sendall(self, _):
        return Action.send_all()

    def sendcontroller(self, _):
        return Action.send_controller()

    @lark.v_args(inline=True)
    def sendout(self, port=None):
        return Action.send_out(None if port is None else int(port))

    @lark.v_args(inline=True)
    def change(self, field, value=None):
        return Action.change(field, value)

    @lark.v_args(inline=True)
    def header_field(self, token):
        return str(token)


### Static checks

def check_program(program: Program, known_queries: Iterable[str] = QUERY_NAMES) -> List[Diagnostic]:
    """Well-formedness beyond the grammar: distinct definitions, known queries"""
    known = set(known_queries)
    diagnostics = []
    seen = set()
    for definition in program.defs:
        line, column = definition.line or 1, definition.column or 1
        if definition.var in seen:
            diagnostics.append(Diagnostic(
                line, column, f'variable {definition.var!r} is defined more than once'))
        seen.add(definition.var)
        if definition.query not in known:
            diagnostics.append(Diagnostic(line, column, f'unknown query {definition.query!r}'))
    return diagnostics


### Printing

_INDENT = '  '

# Binding strength of each expression form; higher binds tighter.
_OR, _AND, _NOT, _CMP, _SUM, _MOD, _POSTFIX, _ATOM = range(1, 9)


def print_program(program: Program) -> str:
    lines = [f'{d.var} := {d.query};' for d in program.defs]
    lines.append(SEPARATOR)
    lines.extend(_statement_lines(program.body, ''))
    return '\n'.join(lines)


def print_statement(statement: Stmt) -> str:
    """Single-line text of an atomic statement, used as trace label"""
    match statement:
        case Assign(var, transformer):
            return f'{var} := {print_transformer(transformer)}'
        case AddRules(var):
            return f'AddRules({var})'
        case Register():
            return 'Register'
        case Send(var):
            return f'Send({var})'
        case Seq():
            return '; '.join(print_statement(s) for s in atomic_statements(statement))
    raise TypeError(f'not a statement: {statement!r}')


def _statement_lines(statement: Stmt, indent: str) -> List[str]:
    lines = []
    while isinstance(statement, Seq):
        lines.extend(_item_lines(statement.first, indent))
        statement = statement.second
    lines.extend(_item_lines(statement, indent))
    return lines


def _item_lines(statement: Stmt, indent: str) -> List[str]:
    if isinstance(statement, Seq):
        return [f'{indent}{{', *_statement_lines(statement, indent + _INDENT), f'{indent}}};']
    return [f'{indent}{print_statement(statement)};']


def print_transformer(transformer: EventTransformer) -> str:
    match transformer:
        case Lift(var, fn):
            return f'Lift({var}, {print_lambda(fn)})'
        case ApplyLft(var, fn):
            return f'ApplyLft({var}, {print_lambda(fn)})'
        case ApplyRit(var, fn):
            return f'ApplyRit({var}, {print_lambda(fn)})'
        case Filter(var, fn):
            return f'Filter({var}, {print_lambda(fn)})'
        case Merge(left, right):
            return f'Merge({left}, {right})'
        case MixFst(initial, left, right):
            return f'MixFst({_mix_args(initial, left, right)})'
        case MixSnd(initial, left, right):
            return f'MixSnd({_mix_args(initial, left, right)})'
        case Once(operand, count):
            return f'Once({print_expr(operand)}, {count})'
        case MakForwRule(var):
            return f'MakForwRule({var})'
        case MakeRule(var):
            return f'MakeRule({var})'
    raise TypeError(f'not an event transformer: {transformer!r}')


def _mix_args(initial: SetValue, left: str, right: str) -> str:
    if len(initial):
        return f'{to_source(initial)}, {left}, {right}'
    return f'{left}, {right}'


def print_lambda(fn: Lambda) -> str:
    return f'\\{fn.param} -> {print_expr(fn.body)}'


def print_expr(expr: Expr, context: int = _OR) -> str:
    strength, text = _expr(expr)
    return f'({text})' if strength < context else text


def _expr(expr: Expr) -> Tuple[int, str]:
    match expr:
        case Var(name):
            return _ATOM, name
        case ConstVal(value):
            return _ATOM, to_source(value)
        case TupleExpr(items):
            return _ATOM, f"({', '.join(print_expr(item) for item in items)})"
        case Proj(index, of):
            return _POSTFIX, f'{print_expr(of, _POSTFIX)}.{index}'
        case Builtin(name, args):
            return _ATOM, f"{name}({', '.join(print_expr(arg) for arg in args)})"
        case Cmp(op, lhs, rhs):
            return _CMP, f'{print_expr(lhs, _SUM)} {op} {print_expr(rhs, _SUM)}'
        case Arith(op, lhs, rhs):
            level = _MOD if op == '%' else _SUM
            return level, f'{print_expr(lhs, level)} {op} {print_expr(rhs, level + 1)}'
        case BoolOp(op, lhs, rhs):
            level = _OR if op == 'or' else _AND
            return level, f'{print_expr(lhs, level)} {op} {print_expr(rhs, level + 1)}'
        case Not(operand):
            return _NOT, f'not {print_expr(operand, _NOT)}'
    raise TypeError(f'not an expression: {expr!r}')


def to_source(value: Value) -> str:
    """Literal syntax of a value; packets and rule lists have none"""
    match value:
        case Wildcard():
            return '_'
        case Nat(number):
            return str(number)
        case Bool(flag):
            return 'true' if flag else 'false'
        case SwitchId(name):
            if not _SWITCH_NAME.match(name):
                raise ValueError(f'switch id {name!r} has no literal form')
            return f'@{name}'
        case Port(number):
            return f'port:{number}'
        case IpAddr(address):
            return str(address)
        case Pattern(constraints):
            return f"match({', '.join(f'{field}={raw}' for field, raw in constraints)})"
        case Action(kind=ActionKind.SENDOUT, port=port):
            return 'sendout' if port is None else f'sendout({port})'
        case Action(kind=ActionKind.CHANGE, field=field, value=changed):
            if changed is None:
                return f'change({field})'
            return f'change({field}, {to_source(changed)})'
        case Action(kind=kind):
            return kind.value
        case TupleValue(items):
            return f"({', '.join(to_source(item) for item in items)})"
        case SetValue():
            return f"{{{', '.join(to_source(item) for item in value)}}}"
    raise ValueError(f'{value} has no literal form')
