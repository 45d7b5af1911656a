from django.core.management.base import CommandError

from bench.harness import build_problem, load_problem, persist, read_manifest, run_experiment
from bench.management.base import EXIT_CONFIG, EXIT_DIVERGED, EXIT_IO, ExperimentCommand
from optim.exceptions import ConvergenceError, DivergenceError, OptimError


class Command(ExperimentCommand):
    help = 'Run one method on one problem and write its CSV trace and summary.'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--problem', help='Directory written by make_problem; its manifest fixes the problem settings.')
        parser.add_argument('--no-record', action='store_true', help='Do not store the run in the database.')
        parser.add_argument('--no-plot', action='store_true')

    def handle(self, *args, **options):
        problem_dir = options.get('problem')
        extra = {}
        if problem_dir:
            try:
                extra = read_manifest(problem_dir)['problem']
            except (OSError, KeyError) as exc:
                raise CommandError(f'Cannot read problem manifest in {problem_dir}: {exc}', returncode=EXIT_IO)

        experiment = self.load_experiment(options, extra)
        if experiment is None:
            return

        try:
            data = load_problem(experiment, problem_dir) if problem_dir else build_problem(experiment)
            result = run_experiment(experiment, data=data, output_dir=options.get('output_dir'),
                                    cache_dir=options.get('cache_dir'), plot=False if options['no_plot'] else None)
        except DivergenceError as exc:
            if not options['no_record'] and getattr(exc, 'result', None) is not None:
                persist(exc.result)
            raise CommandError(f'{experiment.method} diverged: {exc}', returncode=EXIT_DIVERGED)
        except ConvergenceError as exc:
            raise CommandError(f'Reference solution: {exc} Raise --reference-iter.', returncode=EXIT_CONFIG)
        except OptimError as exc:
            raise CommandError(f'{experiment.method} failed: {exc}', returncode=EXIT_CONFIG)
        except OSError as exc:
            raise CommandError(f'I/O error: {exc}', returncode=EXIT_IO)

        if not options['no_record']:
            persist(result)

        summary = result.summary
        self.stdout.write(self.style.SUCCESS(f'{experiment.method}: {summary["iterations"]} iterations'))
        for key in ('final_f', 'final_e', 'final_f_rel', 'f_star', 'k_e_1e2', 'time_e_1e2', 'k_e_1e3', 'time_e_1e3',
                    'level_updates', 'rel_error_true'):
            self.stdout.write(f'  {key}: {summary[key]}')
        self.stdout.write(f'  trace: {result.csv_path}')
        if result.plot_path:
            self.stdout.write(f'  plot: {result.plot_path}')
