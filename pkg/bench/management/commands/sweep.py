import csv
import io

from django.core.management.base import CommandError
from django.utils.text import slugify
from rest_framework import serializers

from bench.harness import output_dir_for, sweep
from bench.management.base import EXIT_CONFIG, EXIT_IO, ExperimentCommand, format_errors
from optim.exceptions import OptimError
from optim.imgio import atomic_write


class Command(ExperimentCommand):
    help = 'Run one experiment over a grid of values for one setting (e.g. beta) and tabulate the outcome.'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--key', default='beta', help='Setting to vary.')
        parser.add_argument('--values', required=True, help='Comma separated grid.')
        parser.add_argument('--jobs', type=int, default=1)

    def handle(self, *args, **options):
        experiment = self.load_experiment(options)
        if experiment is None:
            return

        key = options['key']
        values = [value.strip() for value in options['values'].split(',') if value.strip()]
        if not values:
            raise CommandError(f'--values {options["values"]!r} gives an empty grid.', returncode=EXIT_CONFIG)
        directory = output_dir_for(experiment, options.get('output_dir'))
        try:
            rows, _ = sweep(experiment, key, values, jobs=options['jobs'], output_dir=directory,
                            cache_dir=options.get('cache_dir'))
        except serializers.ValidationError as exc:
            raise CommandError(f'Invalid sweep: {format_errors(exc.detail)}', returncode=EXIT_CONFIG)
        except OptimError as exc:
            raise CommandError(f'Sweep failed: {exc}', returncode=EXIT_CONFIG)

        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=list(rows[0]), lineterminator='\n')
        writer.writeheader()
        writer.writerows(rows)
        path = directory / f'{slugify(experiment.name)}-sweep-{key}.csv'
        try:
            atomic_write(path, buffer.getvalue().encode())
        except OSError as exc:
            raise CommandError(f'I/O error: {exc}', returncode=EXIT_IO)

        for row in rows:
            self.stdout.write(' '.join(f'{name}={value}' for name, value in row.items()))
        best = min((row for row in rows if row['rel_error_true'] is not None),
                   key=lambda row: row['rel_error_true'], default=None)
        if best is not None:
            self.stdout.write(self.style.SUCCESS(f'Closest to x_true: {key}={best[key]} ({best["rel_error_true"]:.4g})'))
        self.stdout.write(f'Table: {path}')
