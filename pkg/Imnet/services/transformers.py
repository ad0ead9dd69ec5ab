"""Event transformers: ``et: gamma -> u``.

Each ``eval_*`` function implements one inference rule. They are pure: the
variable state is read, never written, and a failing element aborts the
whole transformer with the element index recorded on the error.
"""
import logging
from typing import Callable, List, Union

from .errors import (
    ImNetError,
    LengthMismatch,
    OnceOperandError,
    PredicateTypeError,
    ShapeError,
    TypeMismatch,
)
from .expressions import eval_expr
from .syntax import (
    ApplyLft,
    ApplyRit,
    ConstVal,
    EventTransformer,
    Filter,
    Lambda,
    Lift,
    MakeRule,
    MakForwRule,
    Merge,
    MixFst,
    MixSnd,
    Once,
    Var,
)
from .values import (
    Action,
    Bool,
    Event,
    InitialRuleAssignment,
    Nat,
    Packet,
    Pattern,
    Port,
    Rule,
    RuleList,
    SetValue,
    SwitchId,
    TupleValue,
    Value,
    VariableState,
)

logger = logging.getLogger(__name__)

TransformerResult = Union[Event, RuleList, InitialRuleAssignment]


def event_of(gamma: VariableState, name: str) -> Event:
    binding = gamma.lookup(name)
    if not isinstance(binding, Event):
        raise TypeMismatch(f'variable {name!r} does not hold an event')
    return binding


def _elementwise(event: Event, step: Callable[[Value], Value]) -> List[Value]:
    results = []
    for index, value in enumerate(event):
        try:
            results.append(step(value))
        except ImNetError as exc:
            raise exc.at_index(index)
    return results


def _pair(value: Value) -> TupleValue:
    if not isinstance(value, TupleValue) or len(value) != 2:
        raise ShapeError(f'expected a pair, got {value}')
    return value


def _apply(fn: Lambda, value: Value, gamma: VariableState, env) -> Value:
    return eval_expr(fn.body, (fn.param, value), gamma, env)


def eval_lift(var: str, fn: Lambda, gamma: VariableState, env) -> Event:
    event = event_of(gamma, var)
    return Event.checked(_elementwise(event, lambda v: _apply(fn, v, gamma, env)))


def eval_apply_left(var: str, fn: Lambda, gamma: VariableState, env) -> Event:
    def step(value):
        first, second = _pair(value).items
        return TupleValue((_apply(fn, first, gamma, env), second))

    return Event.checked(_elementwise(event_of(gamma, var), step))


def eval_apply_right(var: str, fn: Lambda, gamma: VariableState, env) -> Event:
    def step(value):
        first, second = _pair(value).items
        return TupleValue((first, _apply(fn, second, gamma, env)))

    return Event.checked(_elementwise(event_of(gamma, var), step))


def _aligned(gamma: VariableState, left: str, right: str):
    first, second = event_of(gamma, left), event_of(gamma, right)
    if len(first) != len(second):
        raise LengthMismatch(len(first), len(second))
    return first, second


def eval_merge(left: str, right: str, gamma: VariableState) -> Event:
    first, second = _aligned(gamma, left, right)
    return Event.checked(TupleValue((v, w)) for v, w in zip(first, second))


def eval_filter(var: str, fn: Lambda, gamma: VariableState, env) -> Event:
    event = event_of(gamma, var)

    def keep(value):
        verdict = _apply(fn, value, gamma, env)
        if not isinstance(verdict, Bool):
            raise PredicateTypeError(f'predicate returned {verdict}, not a boolean')
        return verdict.value

    flags = _elementwise(event, keep)
    return Event(tuple(value for value, flag in zip(event, flags) if flag))


def eval_once(operand: Union[Var, ConstVal], count: int, gamma: VariableState) -> Event:
    """``count`` copies of a single value"""
    if isinstance(operand, ConstVal):
        value = operand.value
    else:
        binding = gamma.lookup(operand.name)
        if isinstance(binding, RuleList):
            value = binding
        elif isinstance(binding, Event) and len(binding) == 1:
            value = binding[0]
        else:
            raise OnceOperandError(
                f'Once needs a single value; {operand.name!r} holds {binding}')
    return Event.checked((value,) * count)


def _mix(initial: SetValue, accumulate: Event, other: Event, first: bool) -> Event:
    union = initial
    results = []
    for grown, kept in zip(accumulate, other):
        union = union.union(grown)
        results.append(TupleValue((union, kept) if first else (kept, union)))
    return Event.checked(results)


def eval_mix_fst(initial: SetValue, left: str, right: str, gamma: VariableState) -> Event:
    """Prefix unions of ``left`` paired with the elements of ``right``"""
    first, second = _aligned(gamma, left, right)
    return _mix(initial, first, second, first=True)


def eval_mix_snd(initial: SetValue, left: str, right: str, gamma: VariableState) -> Event:
    """Elements of ``left`` paired with prefix unions of ``right``"""
    first, second = _aligned(gamma, left, right)
    return _mix(initial, second, first, first=False)


def _triple(value: Value, *kinds) -> tuple:
    if not isinstance(value, TupleValue) or len(value) != 3:
        raise ShapeError(f'expected a triple, got {value}')
    for position, (item, kind) in enumerate(zip(value.items, kinds)):
        if kind is not None and not isinstance(item, kind):
            raise ShapeError(f'component {position} of {value} has the wrong type')
    return value.items


def eval_mak_forw_rule(var: str, gamma: VariableState) -> InitialRuleAssignment:
    """One exact-match forwarding rule per (switch, port, packet) triple"""
    def binding(value):
        switch, port, packet = _triple(value, SwitchId, (Port, Nat), Packet)
        number = port.number if isinstance(port, Port) else port.value
        rule = Rule(Pattern.exact(packet), (Action.send_out(number),))
        return (switch, RuleList((rule,)))

    return InitialRuleAssignment(tuple(_elementwise(event_of(gamma, var), binding)))


def eval_make_rule(var: str, gamma: VariableState) -> RuleList:
    """One rule per (pattern, action, argument) triple, in input order"""
    def rule(value):
        pattern, action, argument = _triple(value, Pattern, Action, None)
        return Rule(pattern, (action.apply(argument),))

    return RuleList(tuple(_elementwise(event_of(gamma, var), rule)))


def eval_transformer(transformer: EventTransformer, gamma: VariableState, env) -> TransformerResult:
    logger.debug('evaluating %s', type(transformer).__name__)
    match transformer:
        case Lift(var, fn):
            return eval_lift(var, fn, gamma, env)
        case ApplyLft(var, fn):
            return eval_apply_left(var, fn, gamma, env)
        case ApplyRit(var, fn):
            return eval_apply_right(var, fn, gamma, env)
        case Filter(var, fn):
            return eval_filter(var, fn, gamma, env)
        case Merge(left, right):
            return eval_merge(left, right, gamma)
        case MixFst(initial, left, right):
            return eval_mix_fst(initial, left, right, gamma)
        case MixSnd(initial, left, right):
            return eval_mix_snd(initial, left, right, gamma)
        case Once(operand, count):
            return eval_once(operand, count, gamma)
        case MakForwRule(var):
            return eval_mak_forw_rule(var, gamma)
        case MakeRule(var):
            return eval_make_rule(var, gamma)
    raise TypeError(f'not an event transformer: {transformer!r}')
