from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from Imnet.services.errors import TraceFormatError
from Imnet.services.trace import diff_traces, read_trace

from ._common import CONFIG_ERROR, PROGRAM_ERROR


class Command(BaseCommand):
    help = 'Compare two trace files record by record'

    def add_arguments(self, parser):
        parser.add_argument('actual', type=Path)
        parser.add_argument('golden', type=Path)

    def handle(self, *args, **options):
        try:
            actual = read_trace(options['actual'])
            golden = read_trace(options['golden'])
        except TraceFormatError as exc:
            raise CommandError(str(exc), returncode=CONFIG_ERROR) from exc
        divergence = diff_traces(actual, golden)
        if divergence is not None:
            self.stderr.write(str(divergence))
            raise CommandError(f'traces differ at record {divergence.index}', returncode=PROGRAM_ERROR)
        self.stdout.write(self.style.SUCCESS(f'traces match ({len(actual)} records)'))
