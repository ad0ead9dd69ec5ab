"""Statement execution: ``S: (sigma, gamma, ir) -> (sigma', gamma', ir')``.

Statements run big-step, strictly left to right. A failing statement leaves
the state triple and the fabric as they were before it.
"""
import dataclasses
import logging
from typing import Callable, List, Optional, Sequence, Tuple

from .errors import AddRulesTypeError, ImNetError, ExecutionError, ShapeError
from .fabric import Fabric
from .syntax import AddRules, Assign, Def, EventTransformer, Program, Register, Send, Seq, Stmt, print_statement
from .transformers import eval_transformer, event_of
from .values import (
    Action,
    Event,
    InitialRuleAssignment,
    MachineState,
    Packet,
    RuleList,
    SwitchId,
    SwitchState,
    TupleValue,
    VariableState,
)

logger = logging.getLogger(__name__)

INITIAL_LABEL = 'initial'

Snapshot = Tuple[str, MachineState]
StepHook = Callable[[str, MachineState], None]


@dataclasses.dataclass(frozen=True)
class ExecOutcome:
    final: MachineState
    trace: Tuple[Snapshot, ...]


def exec_assign(var: str, transformer: EventTransformer, state: MachineState, env) -> MachineState:
    result = eval_transformer(transformer, state.gamma, env)
    return dataclasses.replace(state, gamma=state.gamma.bind(var, result))


def exec_seq(first: Stmt, second: Stmt, state: MachineState, fabric: Fabric,
             on_step: Optional[StepHook] = None) -> MachineState:
    state = exec_statement(first, state, fabric, on_step)
    return exec_statement(second, state, fabric, on_step)


def as_assignment(binding) -> InitialRuleAssignment:
    """Read a binding as switch rule assignments; events of (switch, rules) pairs qualify"""
    if isinstance(binding, InitialRuleAssignment):
        return binding
    if not isinstance(binding, Event):
        raise AddRulesTypeError(f'{binding} is not a rule assignment')
    pairs = []
    for index, value in enumerate(binding):
        if (not isinstance(value, TupleValue) or len(value) != 2
                or not isinstance(value[0], SwitchId) or not isinstance(value[1], RuleList)):
            raise AddRulesTypeError(f'{value} is not a (switch, rule list) pair', index=index)
        pairs.append(value.items)
    return InitialRuleAssignment(tuple(pairs))


def exec_add_rules(var: str, state: MachineState) -> MachineState:
    staged = as_assignment(state.gamma.lookup(var))
    return dataclasses.replace(state, ir=state.ir.union(staged))


def _install(sigma: SwitchState, ir: InitialRuleAssignment) -> SwitchState:
    # Register appends; earlier-installed rules keep priority
    for switch, rules in ir:
        sigma = sigma.with_table(switch, sigma.table(switch) + rules)
    return sigma


def exec_register(state: MachineState, fabric: Fabric) -> MachineState:
    for switch in state.ir.switches:
        fabric.topology.require_switch(switch)
    sigma = _install(state.sigma, state.ir)
    fabric.sync_tables(sigma)
    return MachineState(sigma, state.gamma, InitialRuleAssignment())


def _send_triple(value) -> Tuple[SwitchId, Packet, Action]:
    if (not isinstance(value, TupleValue) or len(value) != 3
            or not isinstance(value[0], SwitchId) or not isinstance(value[1], Packet)
            or not isinstance(value[2], Action)):
        raise ShapeError(f'{value} is not a (switch, packet, action) triple')
    return value.items


def exec_send(var: str, state: MachineState, fabric: Fabric) -> MachineState:
    """Run each (switch, packet, action) directly; the state triple is unchanged"""
    triples = []
    for index, value in enumerate(event_of(state.gamma, var)):
        try:
            switch, packet, action = _send_triple(value)
            fabric.check_action(action, switch, packet)
        except ImNetError as exc:
            raise exc.at_index(index)
        triples.append((switch, packet, action))
    for switch, packet, action in triples:
        fabric.apply_action(action, packet, switch)
    return state


def exec_defs(defs: Sequence[Def], gamma: VariableState, fabric: Fabric) -> VariableState:
    """Bind every query result, left to right, against one fabric snapshot"""
    view = fabric.view()
    for definition in defs:
        gamma = gamma.bind(definition.var, view.query(definition.query))
    return gamma


def exec_statement(statement: Stmt, state: MachineState, fabric: Fabric,
                   on_step: Optional[StepHook] = None) -> MachineState:
    """Execute one statement; ``on_step`` sees every atomic statement's result"""
    if isinstance(statement, Seq):
        return exec_seq(statement.first, statement.second, state, fabric, on_step)
    label = print_statement(statement)
    logger.debug('executing %s', label)
    try:
        match statement:
            case Assign(var, transformer):
                state = exec_assign(var, transformer, state, fabric.view())
            case AddRules(var):
                state = exec_add_rules(var, state)
            case Register():
                state = exec_register(state, fabric)
            case Send(var):
                state = exec_send(var, state, fabric)
            case _:
                raise TypeError(f'not a statement: {statement!r}')
    except ImNetError as exc:
        raise ExecutionError(label, state, exc) from exc
    if on_step is not None:
        on_step(label, state)
    return state


def run_program(program: Program, fabric: Fabric,
                initial: Optional[MachineState] = None) -> ExecOutcome:
    """Run ``defs >> body`` and collect one snapshot per definition and statement"""
    state = initial if initial is not None else MachineState()
    trace: List[Snapshot] = [(INITIAL_LABEL, state)]

    def record(label, snapshot):
        trace.append((label, snapshot))

    # definitions are applied one at a time so each contributes a snapshot
    for definition in program.defs:
        label = f'{definition.var} := {definition.query}'
        try:
            gamma = exec_defs((definition,), state.gamma, fabric)
        except ImNetError as exc:
            raise ExecutionError(label, state, exc, trace) from exc
        state = dataclasses.replace(state, gamma=gamma)
        record(label, state)
    try:
        state = exec_statement(program.body, state, fabric, record)
    except ExecutionError as exc:
        exc.trace = list(trace)
        raise
    logger.info('program finished after %d steps', len(trace) - 1)
    return ExecOutcome(state, tuple(trace))
