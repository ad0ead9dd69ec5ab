from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from Imnet.loaders import inject_all, load_bindings, load_injections, load_topology
from Imnet.services.errors import ExecutionError, ImNetError
from Imnet.services.fabric import DEFAULT_ACTIONS, Fabric, FabricConfig
from Imnet.services.statements import run_program
from Imnet.services.trace import dumps, error_record, packet_record, snapshot_record, write_trace
from Imnet.services.values import MachineState, VariableState

from ._common import CONFIG_ERROR, PROGRAM_ERROR, load_program


class Command(BaseCommand):
    help = 'Run an ImNet program against a simulated fabric and write its trace'

    def add_arguments(self, parser):
        parser.add_argument('--topology', type=Path, required=True)
        parser.add_argument('--program', type=Path, required=True)
        parser.add_argument('--injections', type=Path,
                            help='packets arriving before the program and traffic after it')
        parser.add_argument('--bindings', type=Path,
                            help='initial variable bindings')
        parser.add_argument('--trace', type=Path,
                            help='trace output file; standard output when omitted')
        parser.add_argument('--default-action', choices=DEFAULT_ACTIONS)
        parser.add_argument('--global-broadcast', action='store_true', default=None)
        parser.add_argument('--hop-budget', type=int)
        parser.add_argument('--drain', action='store_true',
                            help='process the traffic queued after the program')

    def handle(self, *args, **options):
        try:
            config = FabricConfig.from_settings(
                default_action=options['default_action'],
                global_broadcast=options['global_broadcast'],
                hop_budget=options['hop_budget'],
            )
            fabric = Fabric(load_topology(options['topology']), config)
            gamma = VariableState()
            if options['bindings']:
                gamma = load_bindings(options['bindings'], gamma)
            arrivals, traffic = [], []
            if options['injections']:
                arrivals, traffic = load_injections(options['injections'])
            inject_all(fabric, arrivals)
        except ImNetError as exc:
            raise CommandError(str(exc), returncode=CONFIG_ERROR) from exc
        fabric.process_pending()

        program = load_program(options['program'])
        records = []
        try:
            outcome = run_program(program, fabric, MachineState(gamma=gamma))
        except ExecutionError as exc:
            records.extend(snapshot_record(step, label, state)
                           for step, (label, state) in enumerate(exc.trace))
            records.append(error_record(len(exc.trace), exc.label, exc.cause))
            self._emit(records, options['trace'])
            raise CommandError(str(exc), returncode=PROGRAM_ERROR) from exc
        records.extend(snapshot_record(step, label, state)
                       for step, (label, state) in enumerate(outcome.trace))

        try:
            inject_all(fabric, traffic)
        except ImNetError as exc:
            raise CommandError(f'traffic: {exc}', returncode=CONFIG_ERROR) from exc
        if options['drain']:
            records.extend(packet_record(record) for record in fabric.process_pending())

        self._emit(records, options['trace'])
        if options['trace']:
            self.stdout.write(self.style.SUCCESS(
                f"{options['program']}: {len(outcome.trace) - 1} steps, trace written to {options['trace']}"))

    def _emit(self, records, path):
        if path is None:
            self.stdout.write(dumps(records), ending='')
            return
        try:
            write_trace(path, records)
        except OSError as exc:
            raise CommandError(f'cannot write {path}: {exc}', returncode=CONFIG_ERROR) from exc
