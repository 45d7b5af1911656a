from django.core.management.base import CommandError
from django.utils.text import slugify
from rest_framework import serializers

from bench.harness import (build_problem, make_variants, output_dir_for, persist, reference_solution, run_batch,
                           status_of)
from bench.management.base import EXIT_CONFIG, EXIT_DIVERGED, EXIT_IO, ExperimentCommand, format_errors
from bench.models import Experiment
from bench.plotting import plot_traces
from optim.exceptions import ConvergenceError, OptimError

ALL_METHODS = [choice for choice, _ in Experiment.METHOD_CHOICES]


class Command(ExperimentCommand):
    help = 'Run several methods on one problem against a shared reference solution and plot them together.'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--methods', default=','.join(ALL_METHODS), help='Comma separated method list.')
        parser.add_argument('--jobs', type=int, default=1, help='Experiments run at the same time.')
        parser.add_argument('--no-record', action='store_true', help='Do not store the runs in the database.')

    def handle(self, *args, **options):
        experiment = self.load_experiment(options)
        if experiment is None:
            return

        methods = [method.strip() for method in options['methods'].split(',') if method.strip()]
        try:
            variants = make_variants(experiment, 'method', methods)
        except serializers.ValidationError as exc:
            raise CommandError(f'Invalid method list: {format_errors(exc.detail)}', returncode=EXIT_CONFIG)

        directory = output_dir_for(experiment, options.get('output_dir'))
        try:
            data = build_problem(experiment)
            reference = reference_solution(experiment, data, options.get('cache_dir'))
            results = run_batch(variants, jobs=options['jobs'], reference=reference, data=data,
                                output_dir=directory, cache_dir=options.get('cache_dir'), plot=False)
            plot_path = plot_traces({r.spec.method: r.rows for r in results if r.rows},
                                    directory / f'{slugify(experiment.name)}-bench.svg', title=experiment.name)
        except ConvergenceError as exc:
            raise CommandError(f'Reference solution: {exc} Raise --reference-iter.', returncode=EXIT_CONFIG)
        except OptimError as exc:
            raise CommandError(f'Cannot run benchmark: {exc}', returncode=EXIT_CONFIG)
        except OSError as exc:
            raise CommandError(f'I/O error: {exc}', returncode=EXIT_IO)

        failures = []
        for result in results:
            if not options['no_record'] and result.rows:
                persist(result)
            status = dict(Experiment.STATUS_CHOICES)[status_of(result)]
            if result.error is None:
                self.stdout.write(self.style.SUCCESS(
                    f'{result.spec.method}: {status}, final e={result.summary["final_e"]}, '
                    f'k(e<=1e-2)={result.summary["k_e_1e2"]}, k(e<=1e-3)={result.summary["k_e_1e3"]}'
                ))
            else:
                failures.append(result)
                self.stderr.write(f'{result.spec.method}: {status}: {result.error}')
        self.stdout.write(f'Plot: {plot_path}')

        if failures:
            raise CommandError(f'{len(failures)} of {len(results)} methods did not complete.',
                               returncode=EXIT_DIVERGED if any(status_of(r) == Experiment.STATUS_DIVERGED for r in failures) else 1)
