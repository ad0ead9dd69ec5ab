"""Readers for the topology, injections and initial-bindings files."""
from pathlib import Path
from typing import List, Tuple

import pydantic

from .schemas import BindingsSchema, InjectionsSchema, TopologySchema
from .services.errors import ConfigurationError, ImNetError
from .services.fabric import Fabric, Topology
from .services.syntax import parse_literal
from .services.values import Event, Packet, SwitchId, VariableState


def _read(path: Path, schema):
    try:
        return schema.model_validate_json(Path(path).read_text(encoding='utf-8'))
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigurationError(f'cannot read {path}: {exc}') from exc
    except pydantic.ValidationError as exc:
        raise ConfigurationError(f'{path} is not a valid {schema.__name__}: {exc}') from exc


def load_topology(path: Path) -> Topology:
    return _read(path, TopologySchema).to_topology()


def load_injections(path: Path) -> Tuple[List[Tuple[SwitchId, Packet]], List[Tuple[SwitchId, Packet]]]:
    """(arrivals, traffic) as (switch, packet) lists"""
    schema = _read(path, InjectionsSchema)
    return ([(entry.switch_id, entry.to_packet()) for entry in schema.arrivals],
            [(entry.switch_id, entry.to_packet()) for entry in schema.traffic])


def load_bindings(path: Path, gamma: VariableState = None) -> VariableState:
    """Bind each listed variable to the event of its parsed literals"""
    gamma = gamma if gamma is not None else VariableState()
    for binding in _read(path, BindingsSchema).bindings:
        try:
            event = Event.checked(parse_literal(text) for text in binding.values)
        except ImNetError as exc:
            raise ConfigurationError(f'{path}: binding {binding.variable!r}: {exc}') from exc
        gamma = gamma.bind(binding.variable, event)
    return gamma


def inject_all(fabric: Fabric, entries) -> List[Packet]:
    return [fabric.inject_packet(switch, packet) for switch, packet in entries]
