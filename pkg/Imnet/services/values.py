"""Value universe, events, rules and the semantic state triple.

Everything here is immutable. ``str()`` of any value gives its canonical
trace form, e.g. ``(srcport(80), [sendall])``.
"""
import dataclasses
import enum
import ipaddress
from types import MappingProxyType
from typing import Iterator, Mapping, Optional, Tuple, Union

from .errors import (
    ArityMismatch,
    HeterogeneousEvent,
    ShapeError,
    TypeMismatch,
    UnboundVariable,
    UntypeableValue,
)

# Header fields in canonical order; patterns and printing follow it.
HEADER_FIELDS = ('srcip', 'dstip', 'srcport', 'dstport', 'inport', 'ethsrc', 'ethdst')
IP_FIELDS = frozenset({'srcip', 'dstip'})
ETH_LIMIT = 1 << 48


### Types

class Kind(enum.Enum):
    NAT = 'Nat'
    BOOL = 'Bool'
    SWITCH_ID = 'SwitchId'
    PORT = 'Port'
    IP_ADDR = 'IpAddr'
    PACKET = 'Packet'
    PATTERN = 'Pattern'
    ACTION = 'Action'
    RULE_LIST = 'RuleList'
    TUPLE = 'Tuple'
    SET = 'Set'
    ANY = 'Any'


@dataclasses.dataclass(frozen=True)
class Type:
    kind: Kind
    components: Tuple['Type', ...] = ()

    def __post_init__(self):
        if self.kind is Kind.TUPLE and len(self.components) < 2:
            raise ValueError('tuple types need at least two components')
        if self.kind is Kind.SET and len(self.components) != 1:
            raise ValueError('set types have exactly one element type')

    def __str__(self):
        if self.components:
            return f"{self.kind.value}({', '.join(str(c) for c in self.components)})"
        return self.kind.value


NAT = Type(Kind.NAT)
BOOL = Type(Kind.BOOL)
SWITCH_ID = Type(Kind.SWITCH_ID)
PORT = Type(Kind.PORT)
IP_ADDR = Type(Kind.IP_ADDR)
PACKET = Type(Kind.PACKET)
PATTERN = Type(Kind.PATTERN)
ACTION = Type(Kind.ACTION)
RULE_LIST = Type(Kind.RULE_LIST)
# Type of the empty event; unifies with everything.
ANY = Type(Kind.ANY)


def tuple_type(*components: Type) -> Type:
    return Type(Kind.TUPLE, tuple(components))


def set_type(element: Type) -> Type:
    return Type(Kind.SET, (element,))


def unify(left: Type, right: Type) -> Optional[Type]:
    """Most specific type both sides agree on, or None"""
    if left.kind is Kind.ANY:
        return right
    if right.kind is Kind.ANY:
        return left
    if left.kind is not right.kind or len(left.components) != len(right.components):
        return None
    components = []
    for a, b in zip(left.components, right.components):
        joined = unify(a, b)
        if joined is None:
            return None
        components.append(joined)
    return Type(left.kind, tuple(components))


### Scalar values

@dataclasses.dataclass(frozen=True)
class Nat:
    value: int

    def __post_init__(self):
        if isinstance(self.value, bool) or not isinstance(self.value, int) or self.value < 0:
            raise TypeMismatch(f'{self.value!r} is not a natural number')

    def __str__(self):
        return str(self.value)


@dataclasses.dataclass(frozen=True)
class Bool:
    value: bool

    def __str__(self):
        return 'true' if self.value else 'false'


@dataclasses.dataclass(frozen=True)
class SwitchId:
    name: str

    def __str__(self):
        return self.name


@dataclasses.dataclass(frozen=True)
class Port:
    number: int

    def __post_init__(self):
        if isinstance(self.number, bool) or not isinstance(self.number, int) or self.number < 0:
            raise TypeMismatch(f'{self.number!r} is not a port number')

    def __str__(self):
        return f'port:{self.number}'


@dataclasses.dataclass(frozen=True)
class IpAddr:
    address: ipaddress.IPv4Address

    @classmethod
    def parse(cls, text: str) -> 'IpAddr':
        try:
            return cls(ipaddress.IPv4Address(text))
        except ipaddress.AddressValueError as exc:
            raise TypeMismatch(f'{text!r} is not an IPv4 address') from exc

    def __str__(self):
        return str(self.address)


class Wildcard:
    """The ``_`` placeholder of rule-construction triples"""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return 'Wildcard()'

    def __str__(self):
        return '_'


WILDCARD = Wildcard()


### Packets and patterns

@dataclasses.dataclass(frozen=True)
class Headers:
    srcip: ipaddress.IPv4Address
    dstip: ipaddress.IPv4Address
    srcport: int = 0
    dstport: int = 0
    inport: int = 0
    ethsrc: int = 0
    ethdst: int = 0

    def __post_init__(self):
        for name in IP_FIELDS:
            raw = getattr(self, name)
            if not isinstance(raw, ipaddress.IPv4Address):
                object.__setattr__(self, name, ipaddress.IPv4Address(raw))
        for name in ('srcport', 'dstport', 'inport', 'ethsrc', 'ethdst'):
            raw = getattr(self, name)
            if isinstance(raw, bool) or not isinstance(raw, int) or raw < 0:
                raise TypeMismatch(f'header {name} must be a natural number, got {raw!r}')
        if self.ethsrc >= ETH_LIMIT or self.ethdst >= ETH_LIMIT:
            raise TypeMismatch('ethernet addresses are 48-bit')

    def get(self, field: str):
        if field not in HEADER_FIELDS:
            raise TypeMismatch(f'unknown header field {field!r}')
        return getattr(self, field)


@dataclasses.dataclass(frozen=True)
class Packet:
    headers: Headers
    payload: bytes = b''
    uid: int = 0

    def with_header(self, field: str, raw) -> 'Packet':
        return dataclasses.replace(self, headers=dataclasses.replace(self.headers, **{field: raw}))

    def __str__(self):
        return f'pk{self.uid}'


def header_value(field: str, raw) -> 'Value':
    """Lift a raw header field to its Value"""
    if field in IP_FIELDS:
        return IpAddr(raw)
    return Nat(raw)


def header_raw(field: str, value: 'Value'):
    """Lower a Value to the raw form stored in headers; checks compatibility"""
    if field not in HEADER_FIELDS:
        raise TypeMismatch(f'unknown header field {field!r}')
    if field in IP_FIELDS:
        if isinstance(value, IpAddr):
            return value.address
        raise TypeMismatch(f'header {field} needs an IpAddr, got {value}')
    if isinstance(value, Nat):
        return value.value
    raise TypeMismatch(f'header {field} needs a Nat, got {value}')


@dataclasses.dataclass(frozen=True)
class Pattern:
    """Conjunction of exact header constraints; no constraints matches all"""
    constraints: Tuple[Tuple[str, object], ...] = ()

    def __post_init__(self):
        seen = {}
        for field, raw in self.constraints:
            if field not in HEADER_FIELDS:
                raise TypeMismatch(f'unknown header field {field!r}')
            if field in seen:
                raise TypeMismatch(f'pattern constrains {field} twice')
            if field in IP_FIELDS and not isinstance(raw, ipaddress.IPv4Address):
                raw = ipaddress.IPv4Address(raw)
            elif field not in IP_FIELDS and (isinstance(raw, bool) or not isinstance(raw, int)):
                raise TypeMismatch(f'pattern field {field} needs a natural number, got {raw!r}')
            seen[field] = raw
        ordered = tuple((field, seen[field]) for field in HEADER_FIELDS if field in seen)
        object.__setattr__(self, 'constraints', ordered)

    @classmethod
    def of(cls, **constraints) -> 'Pattern':
        return cls(tuple(constraints.items()))

    @classmethod
    def exact(cls, packet: Packet) -> 'Pattern':
        """Exact-match pattern over every header field of ``packet``"""
        return cls(tuple((field, packet.headers.get(field)) for field in HEADER_FIELDS))

    def matches(self, packet: Packet) -> bool:
        return all(packet.headers.get(field) == raw for field, raw in self.constraints)

    def __str__(self):
        if not self.constraints:
            return '*'
        return ' & '.join(f'{field}({raw})' for field, raw in self.constraints)


### Actions and rules

class ActionKind(str, enum.Enum):
    SENDCONTROLLER = 'sendcontroller'
    SENDALL = 'sendall'
    SENDOUT = 'sendout'
    CHANGE = 'change'


NULLARY_ACTIONS = frozenset({ActionKind.SENDCONTROLLER, ActionKind.SENDALL})


@dataclasses.dataclass(frozen=True)
class Action:
    """An action, or an action constructor still waiting for its argument"""
    kind: ActionKind
    port: Optional[int] = None
    field: Optional[str] = None
    value: Optional['Value'] = None

    def __post_init__(self):
        if self.kind is ActionKind.CHANGE:
            if self.field not in HEADER_FIELDS:
                raise TypeMismatch(f'change needs a header field, got {self.field!r}')
            if self.value is not None:
                header_raw(self.field, self.value)

    @classmethod
    def send_controller(cls) -> 'Action':
        return cls(ActionKind.SENDCONTROLLER)

    @classmethod
    def send_all(cls) -> 'Action':
        return cls(ActionKind.SENDALL)

    @classmethod
    def send_out(cls, port: Optional[int] = None) -> 'Action':
        return cls(ActionKind.SENDOUT, port=port)

    @classmethod
    def change(cls, field: str, value: Optional['Value'] = None) -> 'Action':
        return cls(ActionKind.CHANGE, field=field, value=value)

    @property
    def is_applied(self) -> bool:
        if self.kind is ActionKind.SENDOUT:
            return self.port is not None
        if self.kind is ActionKind.CHANGE:
            return self.value is not None
        return True

    def apply(self, argument: 'Value') -> 'Action':
        """Complete a constructor with the third component of a rule triple"""
        if argument is WILDCARD:
            if self.is_applied:
                return self
            raise ArityMismatch(f'{self} needs an argument, got _')
        if self.kind in NULLARY_ACTIONS or self.is_applied:
            raise ArityMismatch(f'{self} takes no argument, got {argument}')
        if self.kind is ActionKind.SENDOUT:
            if isinstance(argument, (Port, Nat)):
                number = argument.number if isinstance(argument, Port) else argument.value
                return Action.send_out(number)
            raise ArityMismatch(f'sendout needs a port, got {argument}')
        return Action.change(self.field, argument)

    def __str__(self):
        if self.kind is ActionKind.SENDOUT and self.port is not None:
            return f'sendout({self.port})'
        if self.kind is ActionKind.CHANGE:
            if self.value is None:
                return f'change({self.field})'
            return f'change({self.field}, {self.value})'
        return self.kind.value


@dataclasses.dataclass(frozen=True)
class Rule:
    pattern: Pattern
    actions: Tuple[Action, ...]

    def __post_init__(self):
        object.__setattr__(self, 'actions', tuple(self.actions))
        if not self.actions:
            raise ShapeError('a rule needs at least one action')
        for action in self.actions:
            if not action.is_applied:
                raise ArityMismatch(f'rule action {action} is missing its argument')

    def __str__(self):
        return f"({self.pattern}, [{', '.join(str(a) for a in self.actions)}])"


@dataclasses.dataclass(frozen=True)
class RuleList:
    """Flow-table contents; earlier rules shadow later ones"""
    rules: Tuple[Rule, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'rules', tuple(self.rules))

    def __len__(self):
        return len(self.rules)

    def __iter__(self) -> Iterator[Rule]:
        return iter(self.rules)

    def __add__(self, other: 'RuleList') -> 'RuleList':
        return RuleList(self.rules + other.rules)

    def __str__(self):
        return f"[{', '.join(str(r) for r in self.rules)}]"


### Compound values

@dataclasses.dataclass(frozen=True)
class TupleValue:
    items: Tuple['Value', ...]

    def __post_init__(self):
        object.__setattr__(self, 'items', tuple(self.items))
        if len(self.items) < 2:
            raise ShapeError('tuples have at least two components')

    def __len__(self):
        return len(self.items)

    def __getitem__(self, index):
        return self.items[index]

    def __str__(self):
        return f"({', '.join(str(v) for v in self.items)})"


class SetValue:
    """Unordered, deduplicated set of values; prints in insertion order"""

    __slots__ = ('items',)

    def __init__(self, items=()):
        ordered = []
        for item in items:
            if item not in ordered:
                ordered.append(item)
        self.items = tuple(ordered)

    def union(self, *values: 'Value') -> 'SetValue':
        return SetValue(self.items + values)

    def issubset(self, other: 'SetValue') -> bool:
        return frozenset(self.items) <= frozenset(other.items)

    def __contains__(self, item):
        return item in self.items

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __eq__(self, other):
        if not isinstance(other, SetValue):
            return NotImplemented
        return frozenset(self.items) == frozenset(other.items)

    def __hash__(self):
        return hash(frozenset(self.items))

    def __repr__(self):
        return f'SetValue({self.items!r})'

    def __str__(self):
        return f"{{{', '.join(str(v) for v in self.items)}}}"


Value = Union[Nat, Bool, SwitchId, Port, IpAddr, Packet, Pattern, Action,
              RuleList, TupleValue, SetValue, Wildcard]


def value_type(value: Value) -> Type:
    """The unique structural type of a value; Wildcard has none"""
    if value is WILDCARD:
        raise UntypeableValue('the wildcard _ has no type')
    return _component_type(value)


def _component_type(value: Value) -> Type:
    match value:
        case Wildcard():
            # only legal inside rule-construction triples
            return ANY
        case Nat():
            return NAT
        case Bool():
            return BOOL
        case SwitchId():
            return SWITCH_ID
        case Port():
            return PORT
        case IpAddr():
            return IP_ADDR
        case Packet():
            return PACKET
        case Pattern():
            return PATTERN
        case Action():
            return ACTION
        case RuleList():
            return RULE_LIST
        case TupleValue():
            return tuple_type(*(_component_type(item) for item in value.items))
        case SetValue():
            element = ANY
            for item in value.items:
                joined = unify(element, value_type(item))
                if joined is None:
                    raise TypeMismatch(f'set {value} mixes element types')
                element = joined
            return set_type(element)
    raise UntypeableValue(f'{value!r} is not an ImNet value')


### Events

@dataclasses.dataclass(frozen=True)
class Event:
    """A finite, ordered, homogeneous sequence of values"""
    values: Tuple[Value, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'values', tuple(self.values))

    @classmethod
    def of(cls, *values: Value) -> 'Event':
        return cls(values)

    @classmethod
    def checked(cls, values) -> 'Event':
        event = cls(tuple(values))
        event_typecheck(event)
        return event

    def __len__(self):
        return len(self.values)

    def __iter__(self) -> Iterator[Value]:
        return iter(self.values)

    def __getitem__(self, index):
        return self.values[index]

    def __str__(self):
        return f"{{{', '.join(str(v) for v in self.values)}}}"


def event_typecheck(event: Event) -> Type:
    """Shared type of every element; ANY for the empty event"""
    shared = ANY
    for index, value in enumerate(event.values):
        try:
            current = value_type(value)
        except UntypeableValue as exc:
            raise exc.at_index(index)
        joined = unify(shared, current)
        if joined is None:
            raise HeterogeneousEvent(
                f'element of type {current} does not match {shared}', index=index)
        shared = joined
    return shared


def pattern_matches(pattern: Pattern, packet: Packet) -> bool:
    return pattern.matches(packet)


def rule_lookup(rules: RuleList, packet: Packet) -> Optional[Rule]:
    """First rule in priority order whose pattern matches, or None"""
    for rule in rules:
        if rule.pattern.matches(packet):
            return rule
    return None


### Semantic state

@dataclasses.dataclass(frozen=True)
class InitialRuleAssignment:
    """Staged (switch, rule list) bindings awaiting Register"""
    bindings: Tuple[Tuple[SwitchId, RuleList], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'bindings', tuple(tuple(b) for b in self.bindings))

    def union(self, other: 'InitialRuleAssignment') -> 'InitialRuleAssignment':
        merged = list(self.bindings)
        for binding in other.bindings:
            if binding not in merged:
                merged.append(binding)
        return InitialRuleAssignment(tuple(merged))

    @property
    def switches(self):
        return tuple(switch for switch, _ in self.bindings)

    def __len__(self):
        return len(self.bindings)

    def __iter__(self):
        return iter(self.bindings)

    def __str__(self):
        return f"{{{', '.join(f'({switch}, {rules})' for switch, rules in self.bindings)}}}"


Binding = Union[Event, RuleList, InitialRuleAssignment]


@dataclasses.dataclass(frozen=True)
class SwitchState:
    """sigma: flow table of every switch that has one"""
    tables: Mapping[SwitchId, RuleList] = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'tables', MappingProxyType(dict(self.tables)))

    def table(self, switch: SwitchId) -> RuleList:
        return self.tables.get(switch, RuleList())

    def with_table(self, switch: SwitchId, rules: RuleList) -> 'SwitchState':
        return SwitchState({**self.tables, switch: rules})

    def items(self):
        return sorted(self.tables.items(), key=lambda item: item[0].name)


@dataclasses.dataclass(frozen=True)
class VariableState:
    """gamma: program variables; unbound lookups are errors"""
    bindings: Mapping[str, Binding] = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'bindings', MappingProxyType(dict(self.bindings)))

    def lookup(self, name: str) -> Binding:
        try:
            return self.bindings[name]
        except KeyError:
            raise UnboundVariable(name) from None

    def bind(self, name: str, binding: Binding) -> 'VariableState':
        return VariableState({**self.bindings, name: binding})

    def __contains__(self, name):
        return name in self.bindings

    def items(self):
        return sorted(self.bindings.items())


@dataclasses.dataclass(frozen=True)
class MachineState:
    """The (sigma, gamma, ir) triple"""
    sigma: SwitchState = dataclasses.field(default_factory=SwitchState)
    gamma: VariableState = dataclasses.field(default_factory=VariableState)
    ir: InitialRuleAssignment = dataclasses.field(default_factory=InitialRuleAssignment)
