from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from Imnet.services.syntax import print_program

from ._common import PROGRAM_ERROR, load_program, read_text


class Command(BaseCommand):
    help = 'Print an ImNet program in canonical form'

    def add_arguments(self, parser):
        parser.add_argument('program', type=Path, help='path to a .imnet source file')
        mode = parser.add_mutually_exclusive_group()
        mode.add_argument('--check', action='store_true',
                          help='fail if the file is not canonically formatted')
        mode.add_argument('--write', action='store_true',
                          help='rewrite the file in canonical form')

    def handle(self, *args, **options):
        path = options['program']
        canonical = print_program(load_program(path))
        if options['check']:
            if read_text(path) not in (canonical, canonical + '\n'):
                raise CommandError(f'{path} is not canonically formatted', returncode=PROGRAM_ERROR)
            self.stdout.write(self.style.SUCCESS(f'{path}: canonical'))
        elif options['write']:
            path.write_text(canonical + '\n', encoding='utf-8')
            self.stdout.write(self.style.SUCCESS(f'{path}: rewritten'))
        else:
            self.stdout.write(canonical)
