from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers

from bench.config import load_spec, write_config
from bench.serializers import SCHEDULE_KEYS

# Exit codes.
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_IO = 4


def format_errors(detail):
    if isinstance(detail, dict):
        return '; '.join(f'{key}: {format_errors(value)}' for key, value in detail.items())
    if isinstance(detail, list):
        return ' '.join(format_errors(item) for item in detail)
    return str(detail)


class ExperimentCommand(BaseCommand):
    """
    Shared options: a config file plus flags that override its values.
    """

    def add_arguments(self, parser):
        parser.add_argument('--config', help='Experiment file with [problem], [method], [schedule], [output] sections.')
        parser.add_argument('--set', action='append', default=[], metavar='KEY=VALUE',
                            help='Override any setting; may be repeated.')
        parser.add_argument('--name')
        parser.add_argument('--kind', help='Phantom: disks, blocks or ramp.')
        parser.add_argument('--N', dest='size', help='Image side length.')
        parser.add_argument('--i-max', dest='i_max')
        parser.add_argument('--b', dest='background', help='Background in counts.')
        parser.add_argument('--beta')
        parser.add_argument('--seed')
        parser.add_argument('--method', help='PDHG, SPDHG, SL or SSL.')
        parser.add_argument('--max-iter', dest='max_iter')
        parser.add_argument('--reference-iter', dest='reference_iter')
        parser.add_argument('--preset', help='Published schedule row: cameraman, micro or phantom.')
        parser.add_argument('--t', dest='schedule', help="Comma separated t1..t6, e.g. '0.5,5e-3,0.5,5e-5,1e13,1'.")
        parser.add_argument('--output-dir', dest='output_dir')
        parser.add_argument('--cache-dir', help='Reference solution cache (defaults to DEBLUR_CACHE_DIR).')
        parser.add_argument('--dump-config', metavar='PATH', help='Write the resolved config and exit.')

    def overrides(self, options):
        values = {key: options.get(key) for key in (
            'name', 'kind', 'size', 'i_max', 'background', 'beta', 'seed',
            'method', 'max_iter', 'reference_iter', 'preset', 'output_dir',
        )}
        if options.get('schedule'):
            parts = [part.strip() for part in options['schedule'].split(',')]
            if len(parts) != len(SCHEDULE_KEYS):
                raise CommandError(f'--t needs {len(SCHEDULE_KEYS)} values, got {len(parts)}.', returncode=EXIT_CONFIG)
            values.update(zip(SCHEDULE_KEYS, parts))
        for item in options.get('set') or []:
            key, sep, value = item.partition('=')
            if not sep:
                raise CommandError(f'--set expects KEY=VALUE, got {item!r}.', returncode=EXIT_CONFIG)
            values[key.strip()] = value.strip()
        return values

    def load_experiment(self, options, extra=None):
        values = self.overrides(options)
        values.update(extra or {})
        try:
            experiment = load_spec(options.get('config'), values)
        except serializers.ValidationError as exc:
            raise CommandError(f'Invalid configuration: {format_errors(exc.detail)}', returncode=EXIT_CONFIG)
        except OSError as exc:
            raise CommandError(f'Cannot read configuration: {exc}', returncode=EXIT_IO)

        if options.get('dump_config'):
            try:
                write_config(experiment, options['dump_config'])
            except OSError as exc:
                raise CommandError(f'Cannot write configuration: {exc}', returncode=EXIT_IO)
            self.stdout.write(self.style.SUCCESS(f'Configuration written to {options["dump_config"]}'))
            return None
        return experiment
