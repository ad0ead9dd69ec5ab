"""Helpers shared by the imnet_* management commands."""
from pathlib import Path

from django.core.management.base import CommandError

from Imnet.services.errors import ParseError
from Imnet.services.syntax import Program, parse_program

# exit status contract: 1 for program errors, 2 for configuration or IO errors
PROGRAM_ERROR = 1
CONFIG_ERROR = 2


def read_text(path: Path) -> str:
    try:
        return Path(path).read_text(encoding='utf-8')
    except (OSError, UnicodeDecodeError) as exc:
        raise CommandError(f'cannot read {path}: {exc}', returncode=CONFIG_ERROR) from exc


def load_program(path: Path) -> Program:
    text = read_text(path)
    try:
        return parse_program(text)
    except ParseError as exc:
        raise CommandError(f'{path}:{exc}', returncode=PROGRAM_ERROR) from exc
