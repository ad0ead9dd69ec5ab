from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from Imnet.services.syntax import check_program

from ._common import PROGRAM_ERROR, load_program


class Command(BaseCommand):
    help = 'Parse an ImNet program and check its definitions'

    def add_arguments(self, parser):
        parser.add_argument('program', type=Path, help='path to a .imnet source file')

    def handle(self, *args, **options):
        path = options['program']
        program = load_program(path)
        diagnostics = check_program(program)
        for diagnostic in diagnostics:
            self.stderr.write(f'{path}:{diagnostic}')
        if diagnostics:
            raise CommandError(f'{path}: {len(diagnostics)} problem(s) found', returncode=PROGRAM_ERROR)
        self.stdout.write(self.style.SUCCESS(
            f'{path}: ok ({len(program.defs)} definitions)'))
