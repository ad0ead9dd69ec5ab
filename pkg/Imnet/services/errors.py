"""Error hierarchy shared by the interpreter, the fabric and the commands.

Every error has a stable kebab-case ``code`` that trace error records and
command diagnostics report verbatim.
"""
from typing import Any, Dict, FrozenSet, Optional


class ImNetError(Exception):
    """Base class for every error the simulator raises on purpose"""

    code = 'imnet-error'

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.message = message
        self.index = index

    def at_index(self, index: int) -> 'ImNetError':
        """Record the event position an element-wise evaluation failed at"""
        if self.index is None:
            self.index = index
        return self

    def as_dict(self) -> Dict[str, Any]:
        data = {'code': self.code, 'message': str(self)}
        if self.index is not None:
            data['index'] = self.index
        return data

    def __str__(self):
        if self.index is None:
            return self.message
        return f'{self.message} (at element {self.index})'


class ConfigurationError(ImNetError):
    code = 'configuration-error'


class ParseError(ImNetError):
    code = 'parse-error'

    def __init__(self, message: str, line: int, column: int,
                 expected: FrozenSet[str] = frozenset()):
        super().__init__(message)
        self.line = line
        self.column = column
        self.expected = frozenset(expected)

    def __str__(self):
        text = f'{self.line}:{self.column}: {self.message}'
        if self.expected:
            wanted = ', '.join(f"'{token}'" for token in sorted(self.expected))
            text += f'; expected one of {wanted}'
        return text


class UntypeableValue(ImNetError):
    code = 'untypeable-value'


class HeterogeneousEvent(ImNetError):
    code = 'heterogeneity-error'


class UnboundVariable(ImNetError):
    code = 'unbound-variable'

    def __init__(self, name: str):
        super().__init__(f'variable {name!r} is not bound')
        self.name = name


class TypeMismatch(ImNetError):
    code = 'type-mismatch'


class ShapeError(ImNetError):
    code = 'shape-error'


class LengthMismatch(ImNetError):
    code = 'length-mismatch'

    def __init__(self, left: int, right: int):
        super().__init__(f'events have different lengths: {left} and {right}')
        self.lengths = (left, right)


class PredicateTypeError(ImNetError):
    code = 'predicate-type-error'


class ArityMismatch(ImNetError):
    code = 'arity-mismatch'


class AddRulesTypeError(ImNetError):
    code = 'addrules-type-error'


class OnceOperandError(ImNetError):
    code = 'once-operand-error'


class UnknownQuery(ImNetError):
    code = 'unknown-query'

    def __init__(self, name: str):
        super().__init__(f'unknown query {name!r}')
        self.name = name


class UnknownSwitch(ImNetError):
    code = 'unknown-switch'


class UnknownPort(ImNetError):
    code = 'unknown-port'


class BuiltinLookupFailure(ImNetError):
    code = 'builtin-lookup-failure'


class UnknownHost(BuiltinLookupFailure):
    code = 'unknown-host'


class SwitchNotInEvent(BuiltinLookupFailure):
    code = 'switch-not-in-event'


class ExecutionError(ImNetError):
    """A statement failed; carries where it failed and what ran before it"""

    def __init__(self, label: str, state, cause: ImNetError, trace=()):
        super().__init__(f'{label}: {cause}')
        self.label = label
        self.state = state
        self.cause = cause
        self.trace = list(trace)

    @property
    def code(self):
        return self.cause.code


class TraceFormatError(ImNetError):
    code = 'trace-format-error'
