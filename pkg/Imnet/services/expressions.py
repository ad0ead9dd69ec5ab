"""Call-by-value evaluation of lambda bodies and predicates."""
from typing import Tuple

from .errors import ShapeError, TypeMismatch
from .syntax import Arith, Builtin, BoolOp, Cmp, ConstVal, Expr, Not, Proj, TupleExpr, Var
from .values import (
    HEADER_FIELDS,
    Bool,
    Event,
    InitialRuleAssignment,
    IpAddr,
    Nat,
    Packet,
    Port,
    SetValue,
    TupleValue,
    Value,
    VariableState,
    header_value,
)

Bound = Tuple[str, Value]

_ORDERED = (Nat, Port, IpAddr)


def eval_expr(expr: Expr, bound: Bound, gamma: VariableState, env) -> Value:
    """Evaluate ``expr`` with the lambda parameter ``bound`` and program variables ``gamma``.

    ``env`` is the fabric view answering ``port`` and ``switch``. Neither
    ``gamma`` nor ``env`` is ever modified.
    """
    match expr:
        case Var(name):
            return _variable(name, bound, gamma)
        case ConstVal(value):
            return value
        case TupleExpr(items):
            return make_tuple([eval_expr(item, bound, gamma, env) for item in items])
        case Proj(index, of):
            value = eval_expr(of, bound, gamma, env)
            if not isinstance(value, TupleValue):
                raise ShapeError(f'cannot project component {index} of {value}')
            if index >= len(value):
                raise ShapeError(f'{value} has no component {index}')
            return value[index]
        case Builtin('port', (arg,)):
            return env.builtin_port(eval_expr(arg, bound, gamma, env))
        case Builtin('switch', (arg, switches)):
            return env.builtin_switch(eval_expr(arg, bound, gamma, env),
                                      _switch_event(switches, bound, gamma, env))
        case Builtin(field, (arg,)) if field in HEADER_FIELDS:
            value = eval_expr(arg, bound, gamma, env)
            if not isinstance(value, Packet):
                raise TypeMismatch(f'{field} needs a packet, got {value}')
            return header_value(field, value.headers.get(field))
        case Builtin(name, args):
            raise TypeMismatch(f'{name} does not take {len(args)} arguments')
        case Cmp(op, lhs, rhs):
            return _compare(op, eval_expr(lhs, bound, gamma, env), eval_expr(rhs, bound, gamma, env))
        case Arith(op, lhs, rhs):
            return _arith(op, eval_expr(lhs, bound, gamma, env), eval_expr(rhs, bound, gamma, env))
        case BoolOp(op, lhs, rhs):
            left = _truth(eval_expr(lhs, bound, gamma, env), op)
            if left == (op == 'or'):
                return Bool(left)
            return Bool(_truth(eval_expr(rhs, bound, gamma, env), op))
        case Not(operand):
            return Bool(not _truth(eval_expr(operand, bound, gamma, env), 'not'))
    raise TypeMismatch(f'cannot evaluate {expr!r}')


def make_tuple(items) -> TupleValue:
    """Build a tuple; a pair with exactly one tuple component becomes ``(v, *tuple)``

    The scalar leads whichever side it was written on, so ``(t, switch(t, z))``
    over ``(port, packet)`` yields ``(switch, port, packet)``.
    """
    if len(items) == 2:
        first, second = items
        if isinstance(second, TupleValue) and not isinstance(first, TupleValue):
            return TupleValue((first, *second.items))
        if isinstance(first, TupleValue) and not isinstance(second, TupleValue):
            return TupleValue((second, *first.items))
    return TupleValue(tuple(items))


def _variable(name: str, bound: Bound, gamma: VariableState) -> Value:
    if bound is not None and name == bound[0]:
        return bound[1]
    binding = gamma.lookup(name)
    if isinstance(binding, Event):
        raise TypeMismatch(f'event variable {name!r} can only be passed to switch')
    if isinstance(binding, InitialRuleAssignment):
        raise TypeMismatch(f'variable {name!r} holds a rule assignment, not a value')
    return binding


def _switch_event(expr: Expr, bound: Bound, gamma: VariableState, env) -> Event:
    if isinstance(expr, Var) and (bound is None or expr.name != bound[0]):
        binding = gamma.lookup(expr.name)
        if isinstance(binding, Event):
            return binding
    value = eval_expr(expr, bound, gamma, env)
    if isinstance(value, SetValue):
        return Event(tuple(value))
    raise TypeMismatch(f'switch needs an event of switch ids, got {value}')


def _compare(op: str, left: Value, right: Value) -> Bool:
    if op == '==':
        return Bool(left == right)
    if op == '!=':
        return Bool(left != right)
    if type(left) is not type(right) or not isinstance(left, _ORDERED):
        raise TypeMismatch(f'cannot order {left} and {right}')
    key = _order_key(left), _order_key(right)
    return Bool(key[0] < key[1] if op == '<' else key[0] <= key[1])


def _order_key(value: Value):
    match value:
        case Nat(number) | Port(number):
            return number
        case IpAddr(address):
            return int(address)


def _arith(op: str, left: Value, right: Value) -> Nat:
    if not isinstance(left, Nat) or not isinstance(right, Nat):
        raise TypeMismatch(f'{op} needs natural numbers, got {left} and {right}')
    if op == '+':
        return Nat(left.value + right.value)
    if op == '-':
        if right.value > left.value:
            raise TypeMismatch(f'{left} - {right} is not a natural number')
        return Nat(left.value - right.value)
    if right.value == 0:
        raise TypeMismatch(f'{left} % 0 is undefined')
    return Nat(left.value % right.value)


def _truth(value: Value, op: str) -> bool:
    if not isinstance(value, Bool):
        raise TypeMismatch(f'{op} needs booleans, got {value}')
    return value.value
