"""Simulated switch fabric: topology, live flow tables and packet processing.

The fabric owns everything outside the (sigma, gamma, ir) triple: the
topology, the live image of the flow tables, per-switch history, the
controller inbox and the queue of packets awaiting processing. Programs read
it through a ``FabricView`` snapshot and change it only through
``sync_tables`` (Register) and ``apply_action`` (Send).
"""
import collections
import dataclasses
import enum
import ipaddress
import logging
from types import MappingProxyType
from typing import Callable, Dict, List, Mapping, Optional, Tuple

from django.conf import settings

from .errors import (
    ArityMismatch,
    BuiltinLookupFailure,
    ConfigurationError,
    ImNetError,
    SwitchNotInEvent,
    UnknownHost,
    UnknownPort,
    UnknownQuery,
    UnknownSwitch,
)
from .values import (
    Action,
    ActionKind,
    Event,
    Headers,
    IpAddr,
    Packet,
    Port,
    Rule,
    RuleList,
    SwitchId,
    SwitchState,
    TupleValue,
    Value,
    header_raw,
    rule_lookup,
)

logger = logging.getLogger(__name__)

Endpoint = Tuple[SwitchId, int]

DEFAULT_ACTIONS = ('sendcontroller', 'drop')


class Fate(str, enum.Enum):
    FORWARDED = 'forwarded'
    DELIVERED = 'delivered'
    CONTROLLER = 'controller'
    DROPPED = 'dropped'


class DropReason(str, enum.Enum):
    NO_OUTPUT = 'no-output'
    UNLINKED_PORT = 'unlinked-port'
    UNKNOWN_PORT = 'unknown-port'
    HOP_BUDGET = 'hop-budget'
    ACTION_FAILED = 'action-failed'
    TABLE_MISS = 'table-miss'


### Topology

@dataclasses.dataclass(frozen=True)
class Topology:
    """Switches with their ports, undirected links and attached hosts"""
    ports: Mapping[SwitchId, frozenset] = dataclasses.field(default_factory=dict)
    links: Tuple[Tuple[Endpoint, Endpoint], ...] = ()
    hosts: Mapping[ipaddress.IPv4Address, Endpoint] = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'ports', MappingProxyType(
            {switch: frozenset(numbers) for switch, numbers in self.ports.items()}))
        object.__setattr__(self, 'links', tuple(self.links))
        object.__setattr__(self, 'hosts', MappingProxyType(dict(self.hosts)))
        peers = {}
        for a, b in self.links:
            for end in (a, b):
                self._check_endpoint(end, 'link')
                if end in peers:
                    raise ConfigurationError(f'{end[0]} port {end[1]} is in more than one link')
            if a == b:
                raise ConfigurationError(f'{a[0]} port {a[1]} is linked to itself')
            peers[a], peers[b] = b, a
        attached = {}
        for ip, end in self.hosts.items():
            self._check_endpoint(end, f'host {ip}')
            if end in peers:
                raise ConfigurationError(f'host {ip} is attached to linked port {end[1]} of {end[0]}')
            if end in attached:
                raise ConfigurationError(f'{end[0]} port {end[1]} has more than one host')
            attached[end] = ip
        object.__setattr__(self, '_peers', peers)
        object.__setattr__(self, '_attached', attached)

    def _check_endpoint(self, end: Endpoint, owner: str):
        switch, port = end
        if switch not in self.ports:
            raise ConfigurationError(f'{owner} references unknown switch {switch}')
        if port not in self.ports[switch]:
            raise ConfigurationError(f'{owner} references unknown port {port} of {switch}')

    @classmethod
    def build(cls, switches: Mapping[str, List[int]], links=(), hosts=None) -> 'Topology':
        """Topology from plain names, e.g. ``build({'id1': [1, 3]}, [(('id1', 3), ('id2', 3))])``"""
        return cls(
            {SwitchId(name): numbers for name, numbers in switches.items()},
            tuple(((SwitchId(a[0]), a[1]), (SwitchId(b[0]), b[1])) for a, b in links),
            {ipaddress.IPv4Address(ip): (SwitchId(end[0]), end[1])
             for ip, end in (hosts or {}).items()},
        )

    @property
    def switches(self) -> Tuple[SwitchId, ...]:
        return tuple(sorted(self.ports, key=lambda switch: switch.name))

    def peer(self, switch: SwitchId, port: int) -> Optional[Endpoint]:
        return self._peers.get((switch, port))

    def host_at(self, switch: SwitchId, port: int) -> Optional[ipaddress.IPv4Address]:
        return self._attached.get((switch, port))

    def neighbours(self, switch: SwitchId) -> List[Tuple[int, Endpoint]]:
        """(local port, peer endpoint) for every link of ``switch``, by port"""
        return [(port, self._peers[(switch, port)])
                for port in sorted(self.ports.get(switch, ()))
                if (switch, port) in self._peers]

    def require_switch(self, switch: SwitchId):
        if switch not in self.ports:
            raise UnknownSwitch(f'switch {switch} is not in the topology')

    def require_port(self, switch: SwitchId, port: int):
        self.require_switch(switch)
        if port not in self.ports[switch]:
            raise UnknownPort(f'switch {switch} has no port {port}')


### Configuration

@dataclasses.dataclass(frozen=True)
class FabricConfig:
    default_action: str = 'sendcontroller'
    global_broadcast: bool = False
    hop_budget: int = 64

    def __post_init__(self):
        if self.default_action not in DEFAULT_ACTIONS:
            raise ConfigurationError(
                f'default action must be one of {", ".join(DEFAULT_ACTIONS)}, '
                f'got {self.default_action!r}')
        try:
            budget = int(self.hop_budget)
        except (TypeError, ValueError):
            raise ConfigurationError(f'hop budget must be an integer, got {self.hop_budget!r}') from None
        if budget < 1:
            raise ConfigurationError(f'hop budget must be positive, got {budget}')
        object.__setattr__(self, 'hop_budget', budget)
        if isinstance(self.global_broadcast, str):
            object.__setattr__(self, 'global_broadcast', self.global_broadcast.lower() == 'true')

    @classmethod
    def from_settings(cls, **overrides) -> 'FabricConfig':
        """Settings values, with any non-None override taking precedence"""
        values = {
            'default_action': settings.IMNET_DEFAULT_ACTION,
            'global_broadcast': settings.IMNET_GLOBAL_BROADCAST,
            'hop_budget': settings.IMNET_HOP_BUDGET,
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


### Processing records

@dataclasses.dataclass(frozen=True)
class ProcessingRecord:
    """What happened to one packet at one switch"""
    switch: SwitchId
    packet: Packet
    rule: Optional[Rule]
    actions: Tuple[Action, ...]
    fate: Fate
    reason: Optional[DropReason] = None
    forwarded: Tuple[Tuple[SwitchId, Packet], ...] = ()
    delivered: Tuple[Tuple[ipaddress.IPv4Address, Packet], ...] = ()


@dataclasses.dataclass
class _Effects:
    hops: int = 0
    # port the packet arrived on; header rewrites never move it
    ingress: Optional[int] = None
    forwarded: List[Tuple[SwitchId, Packet]] = dataclasses.field(default_factory=list)
    delivered: List[Tuple[ipaddress.IPv4Address, Packet]] = dataclasses.field(default_factory=list)
    controller: bool = False
    drops: List[DropReason] = dataclasses.field(default_factory=list)

    def fate(self) -> Tuple[Fate, Optional[DropReason]]:
        if self.forwarded:
            return Fate.FORWARDED, None
        if self.delivered:
            return Fate.DELIVERED, None
        if self.controller:
            return Fate.CONTROLLER, None
        return Fate.DROPPED, self.drops[0] if self.drops else DropReason.NO_OUTPUT


### Queries

Query = Callable[['FabricView'], Event]


def _switch_ids(view: 'FabricView') -> Event:
    return Event(view.topology.switches)


def _source_ips(view: 'FabricView') -> Event:
    return Event(tuple(TupleValue((IpAddr(packet.headers.srcip), packet))
                       for _, packet in view.inbox))


def _arrived_packets(view: 'FabricView') -> Event:
    return Event(tuple(packet for _, packet in view.inbox))


BUILTIN_QUERIES: Dict[str, Query] = {
    'SwitchIds': _switch_ids,
    'SourceIps': _source_ips,
    'ArrivedPackets': _arrived_packets,
}


### Fabric

class Fabric:
    """Mutable network state; one run loop owns it at a time"""

    def __init__(self, topology: Topology, config: Optional[FabricConfig] = None):
        self.topology = topology
        self.config = config or FabricConfig()
        self.tables: Dict[SwitchId, RuleList] = {}
        self.history: Dict[SwitchId, List[Tuple[Packet, Action]]] = {
            switch: [] for switch in topology.switches}
        self.inbox: List[Tuple[SwitchId, Packet]] = []
        self.pending = collections.deque()
        self.queries: Dict[str, Query] = dict(BUILTIN_QUERIES)
        self.injected = 0
        self._next_uid = 1

    def register_query(self, name: str, query: Query):
        self.queries[name] = query

    def view(self) -> 'FabricView':
        return FabricView(
            topology=self.topology,
            tables=MappingProxyType(dict(self.tables)),
            histories=MappingProxyType({switch: tuple(entries)
                                      for switch, entries in self.history.items()}),
            inbox=tuple(self.inbox),
            queries=MappingProxyType(dict(self.queries)),
        )

    def query(self, name: str) -> Event:
        return self.view().query(name)

    def inject_packet(self, at: SwitchId, packet: Packet) -> Packet:
        """Queue ``packet`` at switch ``at``; returns it with its uid assigned"""
        self.topology.require_port(at, packet.headers.inport)
        packet = dataclasses.replace(packet, uid=self._next_uid)
        self._next_uid += 1
        self.pending.append((at, packet, 0))
        self.injected += 1
        return packet

    def sync_tables(self, sigma: SwitchState):
        """Make the live tables mirror ``sigma``"""
        for switch, _ in sigma.items():
            self.topology.require_switch(switch)
        self.tables = dict(sigma.tables)
        logger.debug('synchronized %d flow tables', len(self.tables))

    def check_action(self, action: Action, at: SwitchId, packet: Optional[Packet] = None):
        """Raise if ``action`` could not be executed at ``at`` (on ``packet``, when given)"""
        self.topology.require_switch(at)
        if not action.is_applied:
            raise ArityMismatch(f'action {action} is missing its argument')
        if action.kind is ActionKind.SENDOUT:
            self.topology.require_port(at, action.port)
        elif action.kind is ActionKind.CHANGE and packet is not None:
            packet.with_header(action.field, header_raw(action.field, action.value))

    def apply_action(self, action: Action, packet: Packet, at: SwitchId,
                     effects: Optional[_Effects] = None) -> Packet:
        """Execute one action and log it; returns the packet later actions see"""
        self.check_action(action, at)
        effects = effects if effects is not None else _Effects(ingress=packet.headers.inport)
        self.history.setdefault(at, []).append((packet, action))
        match action.kind:
            case ActionKind.SENDCONTROLLER:
                self.inbox.append((at, packet))
                effects.controller = True
            case ActionKind.SENDALL:
                for target, port in self._flood_targets(at, effects.ingress):
                    self._forward(target, packet.with_header('inport', port), effects)
            case ActionKind.SENDOUT:
                peer = self.topology.peer(at, action.port)
                host = self.topology.host_at(at, action.port)
                if peer is not None:
                    self._forward(peer[0], packet.with_header('inport', peer[1]), effects)
                elif host is not None:
                    effects.delivered.append((host, packet))
                else:
                    effects.drops.append(DropReason.UNLINKED_PORT)
            case ActionKind.CHANGE:
                return packet.with_header(action.field, header_raw(action.field, action.value))
        return packet

    def _flood_targets(self, at: SwitchId, ingress: Optional[int]) -> List[Endpoint]:
        if self.config.global_broadcast:
            return [(switch, 0) for switch in self.topology.switches if switch != at]
        return [peer for port, peer in self.topology.neighbours(at)
                if port != ingress]

    def _forward(self, target: SwitchId, packet: Packet, effects: _Effects):
        self.pending.append((target, packet, effects.hops + 1))
        effects.forwarded.append((target, packet))

    def process_pending(self) -> List[ProcessingRecord]:
        """Drain the pending queue in FIFO order"""
        records = []
        while self.pending:
            records.append(self._process(*self.pending.popleft()))
        if records:
            counts = collections.Counter(record.fate.value for record in records)
            logger.info('processed %d packets: %s', len(records),
                        ', '.join(f'{fate}={count}' for fate, count in sorted(counts.items())))
        return records

    def _process(self, at: SwitchId, packet: Packet, hops: int) -> ProcessingRecord:
        if hops >= self.config.hop_budget:
            logger.warning('dropping %s at %s: hop budget of %d exhausted',
                           packet, at, self.config.hop_budget)
            return ProcessingRecord(at, packet, None, (), Fate.DROPPED, DropReason.HOP_BUDGET)
        rule = rule_lookup(self.tables.get(at, RuleList()), packet)
        if rule is None:
            if self.config.default_action == 'drop':
                return ProcessingRecord(at, packet, None, (), Fate.DROPPED, DropReason.TABLE_MISS)
            actions = (Action.send_controller(),)
        else:
            actions = rule.actions
        effects = _Effects(hops=hops, ingress=packet.headers.inport)
        working = packet
        taken = []
        for action in actions:
            try:
                working = self.apply_action(action, working, at, effects)
            except ImNetError as exc:
                logger.warning('%s at %s: %s', packet, at, exc)
                effects.drops.append(DropReason.UNKNOWN_PORT if isinstance(exc, UnknownPort)
                                     else DropReason.ACTION_FAILED)
                break
            taken.append(action)
        fate, reason = effects.fate()
        logger.debug('%s at %s: %s', packet, at, fate.value)
        return ProcessingRecord(at, packet, rule, tuple(taken), fate, reason,
                                tuple(effects.forwarded), tuple(effects.delivered))


@dataclasses.dataclass(frozen=True)
class FabricView:
    """Read-only snapshot of a fabric, used by queries and builtins"""
    topology: Topology
    tables: Mapping[SwitchId, RuleList]
    histories: Mapping[SwitchId, Tuple[Tuple[Packet, Action], ...]]
    inbox: Tuple[Tuple[SwitchId, Packet], ...]
    queries: Mapping[str, Query]

    def query(self, name: str) -> Event:
        try:
            query = self.queries[name]
        except KeyError:
            raise UnknownQuery(name) from None
        return query(self)

    def history(self, switch: SwitchId) -> Tuple[Tuple[Packet, Action], ...]:
        return self.histories.get(switch, ())

    def builtin_port(self, value: Value) -> Port:
        """Attachment port of the host a value refers to"""
        ip = _host_reference(value, prefer_packet=False)
        try:
            return Port(self.topology.hosts[ip][1])
        except KeyError:
            raise UnknownHost(f'no host with address {ip}') from None

    def builtin_switch(self, value: Value, switches: Event) -> SwitchId:
        """Attachment switch of the host a value refers to, if it occurs in ``switches``"""
        ip = _host_reference(value, prefer_packet=True)
        try:
            switch = self.topology.hosts[ip][0]
        except KeyError:
            raise UnknownHost(f'no host with address {ip}') from None
        if switch not in switches:
            raise SwitchNotInEvent(f'host {ip} is attached to {switch}, which is not in {switches}')
        return switch


def _host_reference(value: Value, prefer_packet: bool) -> ipaddress.IPv4Address:
    """The host address a value names: an address, a packet's source, or a tuple component"""
    match value:
        case IpAddr(address):
            return address
        case Packet(headers=headers):
            return headers.srcip
        case TupleValue(items):
            order = (Packet, IpAddr) if prefer_packet else (IpAddr, Packet)
            for kind in order:
                for item in items:
                    if isinstance(item, kind):
                        return _host_reference(item, prefer_packet)
    raise BuiltinLookupFailure(f'{value} does not refer to a host')


def make_packet(**headers) -> Packet:
    """Packet with uid 0; the fabric assigns uids at injection"""
    payload = headers.pop('payload', b'')
    return Packet(Headers(**headers), payload)
