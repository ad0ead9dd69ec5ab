from ipaddress import IPv4Address
from typing import Annotated, Dict, List, Literal, Optional, Union

from ninja import Schema
from pydantic import Field, TypeAdapter, field_validator

from .services.fabric import Topology
from .services.values import ETH_LIMIT, Headers, Packet, SwitchId


# Topology file

class EndpointSchema(Schema):
    switch: str
    port: int = Field(ge=0)


class SwitchSchema(Schema):
    id: str = Field(pattern=r'^[A-Za-z0-9_]+$')
    ports: List[int]


class LinkSchema(Schema):
    a: EndpointSchema
    b: EndpointSchema


class HostSchema(Schema):
    ip: IPv4Address
    switch: str
    port: int = Field(ge=0)


class TopologySchema(Schema):
    switches: List[SwitchSchema]
    links: List[LinkSchema] = []
    hosts: List[HostSchema] = []

    def to_topology(self) -> Topology:
        return Topology.build(
            {switch.id: switch.ports for switch in self.switches},
            [((link.a.switch, link.a.port), (link.b.switch, link.b.port)) for link in self.links],
            {str(host.ip): (host.switch, host.port) for host in self.hosts},
        )


# Injections file

class HeadersSchema(Schema):
    srcip: IPv4Address
    dstip: IPv4Address
    srcport: int = Field(0, ge=0)
    dstport: int = Field(0, ge=0)
    inport: int = Field(0, ge=0)
    ethsrc: int = Field(0, ge=0, lt=ETH_LIMIT)
    ethdst: int = Field(0, ge=0, lt=ETH_LIMIT)


class InjectionSchema(Schema):
    switch: str
    headers: HeadersSchema
    payload: str = ''

    @field_validator('payload')
    @classmethod
    def payload_is_hex(cls, value: str) -> str:
        bytes.fromhex(value)
        return value

    def to_packet(self) -> Packet:
        return Packet(Headers(**self.headers.model_dump()), bytes.fromhex(self.payload))

    @property
    def switch_id(self) -> SwitchId:
        return SwitchId(self.switch)


class InjectionsSchema(Schema):
    arrivals: List[InjectionSchema] = []
    traffic: List[InjectionSchema] = []


# Initial bindings file

class BindingSchema(Schema):
    variable: str = Field(pattern=r'^[A-Za-z][A-Za-z0-9_]*$')
    values: List[str]


class BindingsSchema(Schema):
    bindings: List[BindingSchema] = []


# Trace records

class GammaEntrySchema(Schema):
    kind: Literal['event', 'rules', 'assignment']
    text: str


class SnapshotRecord(Schema):
    kind: Literal['snapshot'] = 'snapshot'
    step: int
    label: str
    sigma: Dict[str, str]
    gamma: Dict[str, GammaEntrySchema]
    ir: str


class ErrorRecord(Schema):
    kind: Literal['error'] = 'error'
    step: int
    label: str
    code: str
    message: str


class PacketRecord(Schema):
    kind: Literal['packet'] = 'packet'
    switch: str
    packet: str
    rule: Optional[str] = None
    actions: List[str] = []
    fate: str
    reason: Optional[str] = None


TraceRecord = Annotated[Union[SnapshotRecord, ErrorRecord, PacketRecord], Field(discriminator='kind')]

TRACE_RECORD = TypeAdapter(TraceRecord)
