"""Shared fixtures: the two-switch scenario network and small builders."""
from pathlib import Path

from Imnet.services.fabric import Fabric, FabricConfig, Topology, make_packet
from Imnet.services.syntax import parse_program
from Imnet.services.values import (
    Action,
    Event,
    MachineState,
    Pattern,
    Rule,
    RuleList,
    SwitchId,
    TupleValue,
    VariableState,
    WILDCARD,
)

SCENARIOS = Path(__file__).resolve().parent.parent / 'scenarios'

ID1, ID2 = SwitchId('id1'), SwitchId('id2')


def two_switch_topology(extra_ports=()) -> Topology:
    """id1 ports 1 and 3, id2 ports 2 and 3; id1:3 linked to id2:3; hosts on 1 and 2"""
    return Topology.build(
        {'id1': [1, 3, *extra_ports], 'id2': [2, 3]},
        [(('id1', 3), ('id2', 3))],
        {'10.0.0.1': ('id1', 1), '10.0.0.2': ('id2', 2)},
    )


def two_switch_fabric(**config) -> Fabric:
    return Fabric(two_switch_topology(), FabricConfig(**config))


def packet_one(**changes):
    headers = dict(srcip='10.0.0.1', dstip='10.0.0.2', srcport=5001, dstport=80,
                   inport=1, ethsrc=1, ethdst=2)
    headers.update(changes)
    return make_packet(**headers)


def packet_two(**changes):
    headers = dict(srcip='10.0.0.2', dstip='10.0.0.1', srcport=5002, dstport=80,
                   inport=2, ethsrc=2, ethdst=1)
    headers.update(changes)
    return make_packet(**headers)


def fabric_with_arrivals():
    """Fabric whose controller inbox holds pk1 (from id1) and pk2 (from id2)"""
    fabric = two_switch_fabric()
    first = fabric.inject_packet(ID1, packet_one())
    second = fabric.inject_packet(ID2, packet_two())
    fabric.process_pending()
    return fabric, first, second


def controller_rule_triples() -> Event:
    return Event.of(
        TupleValue((Pattern.of(srcport=80), Action.send_all(), WILDCARD)),
        TupleValue((Pattern.of(inport=1), Action.send_controller(), WILDCARD)),
    )


def controller_rules() -> RuleList:
    return RuleList((
        Rule(Pattern.of(srcport=80), (Action.send_all(),)),
        Rule(Pattern.of(inport=1), (Action.send_controller(),)),
    ))


def controller_state() -> MachineState:
    return MachineState(gamma=VariableState({
        'z': Event.of(ID1, ID2),
        'x': controller_rule_triples(),
    }))


def lambda_body(source: str):
    """Parse ``source`` as the body of a lambda over ``t``"""
    program = parse_program(f'>> r := Lift(r, \\t -> {source});')
    return program.body.transformer.fn.body


def lambda_of(source: str):
    return parse_program(f'>> r := Lift(r, \\t -> {source});').body.transformer.fn
