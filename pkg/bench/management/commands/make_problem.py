from pathlib import Path

from django.core.management.base import CommandError

from bench.harness import build_problem, output_dir_for, write_problem
from bench.management.base import EXIT_CONFIG, EXIT_IO, ExperimentCommand
from optim.exceptions import OptimError


class Command(ExperimentCommand):
    help = 'Generate a synthetic Poisson deblurring problem: x_true, g (IMGF64 and PGM previews) and a manifest.'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--out', help='Target directory (default: <output dir>/problem).')

    def handle(self, *args, **options):
        experiment = self.load_experiment(options)
        if experiment is None:
            return

        directory = Path(options['out']) if options.get('out') else output_dir_for(experiment) / 'problem'
        try:
            data = build_problem(experiment)
            write_problem(experiment, data, directory)
        except OptimError as exc:
            raise CommandError(f'Cannot build problem: {exc}', returncode=EXIT_CONFIG)
        except OSError as exc:
            raise CommandError(f'Cannot write problem files: {exc}', returncode=EXIT_IO)

        self.stdout.write(self.style.SUCCESS(
            f'Wrote {experiment.kind} problem N={experiment.size} (scale {data.scale:.6g}) to {directory}'
        ))
