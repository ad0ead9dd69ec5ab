"""Trace files: one JSON record per line.

Snapshots carry the canonical text of the (sigma, gamma, ir) triple, so two
traces compare equal exactly when the runs reached equal states.
"""
import dataclasses
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import pydantic

from ..schemas import TRACE_RECORD, ErrorRecord, GammaEntrySchema, PacketRecord, SnapshotRecord
from .errors import ImNetError, TraceFormatError
from .fabric import ProcessingRecord
from .values import Event, InitialRuleAssignment, MachineState, RuleList

_GAMMA_KINDS = ((Event, 'event'), (RuleList, 'rules'), (InitialRuleAssignment, 'assignment'))


def _gamma_kind(binding) -> str:
    for kind, name in _GAMMA_KINDS:
        if isinstance(binding, kind):
            return name
    raise TypeError(f'cannot trace binding {binding!r}')


def snapshot_record(step: int, label: str, state: MachineState) -> SnapshotRecord:
    return SnapshotRecord(
        step=step,
        label=label,
        sigma={switch.name: str(rules) for switch, rules in state.sigma.items()},
        gamma={name: GammaEntrySchema(kind=_gamma_kind(binding), text=str(binding))
               for name, binding in state.gamma.items()},
        ir=str(state.ir),
    )


def error_record(step: int, label: str, error: ImNetError) -> ErrorRecord:
    return ErrorRecord(step=step, label=label, code=error.code, message=str(error))


def packet_record(record: ProcessingRecord) -> PacketRecord:
    return PacketRecord(
        switch=record.switch.name,
        packet=str(record.packet),
        rule=None if record.rule is None else str(record.rule),
        actions=[str(action) for action in record.actions],
        fate=record.fate.value,
        reason=None if record.reason is None else record.reason.value,
    )


def dumps(records: Iterable[pydantic.BaseModel]) -> str:
    return ''.join(f'{record.model_dump_json()}\n' for record in records)


def write_trace(path: Path, records: Iterable[pydantic.BaseModel]):
    Path(path).write_text(dumps(records), encoding='utf-8')


def loads(text: str) -> List[pydantic.BaseModel]:
    records = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(TRACE_RECORD.validate_json(line))
        except pydantic.ValidationError as exc:
            raise TraceFormatError(f'line {number}: not a trace record ({exc.error_count()} errors)') from exc
    return records


def read_trace(path: Path) -> List[pydantic.BaseModel]:
    try:
        text = Path(path).read_text(encoding='utf-8')
    except (OSError, UnicodeDecodeError) as exc:
        raise TraceFormatError(f'cannot read {path}: {exc}') from exc
    return loads(text)


@dataclasses.dataclass(frozen=True)
class Divergence:
    index: int
    actual: Optional[pydantic.BaseModel]
    expected: Optional[pydantic.BaseModel]

    def __str__(self):
        def show(record):
            return '<missing>' if record is None else record.model_dump_json()
        return f'record {self.index} differs\n  actual:   {show(self.actual)}\n  expected: {show(self.expected)}'


def _dump(record):
    return None if record is None else record.model_dump()


def diff_traces(actual: Sequence[pydantic.BaseModel],
                expected: Sequence[pydantic.BaseModel]) -> Optional[Divergence]:
    """First record at which two traces differ, or None"""
    for index in range(max(len(actual), len(expected))):
        left = actual[index] if index < len(actual) else None
        right = expected[index] if index < len(expected) else None
        if _dump(left) != _dump(right):
            return Divergence(index, left, right)
    return None
