import json
import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError
from rest_framework.exceptions import ValidationError as DRFValidationError

from cartankit.algebra.serializers import ModelDescriptorSerializer
from cartankit.geometry.services import EXIT_OK, EXIT_USAGE, SUBCOMMANDS, RunConfig, run

logger = logging.getLogger(__name__)


def _load_json(text, path, name):
    if text is not None and path is not None:
        raise CommandError(f"Give either --{name} or --{name}-file, not both", returncode=EXIT_USAGE)
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise CommandError(f"Cannot read {path}: {e}", returncode=EXIT_USAGE)
    if text is None:
        return None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise CommandError(f"Malformed {name} JSON: {e}", returncode=EXIT_USAGE)


class Command(BaseCommand):
    help = 'Exact verification pipelines for flat parabolic models; writes a JSON report'

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(dest='subcommand', required=True)
        for name in SUBCOMMANDS:
            sub = subparsers.add_parser(name)
            sub.add_argument('--samples', type=int, default=None, help='Number of random samples')
            sub.add_argument('--seed', type=int, default=None, help='64-bit unsigned seed')
            sub.add_argument('--output', default=None, help='Write the report here instead of stdout')
            sub.add_argument('--threads', type=int, default=None, help='Number of chunks to fan samples out to')
            sub.add_argument('--model', choices=['projective', 'conformal'], default=None)
            sub.add_argument('--m', type=int, default=None)
            sub.add_argument('--p', type=int, default=None)
            sub.add_argument('--q', type=int, default=None)
            if name in ('check-system', 'invariant-weyl'):
                sub.add_argument('--system', default=None, help='System descriptor as JSON')
                sub.add_argument('--system-file', default=None, help='File holding the system descriptor')
            if name == 'normality-check':
                sub.add_argument('--cochain', default=None, help='Cochain as JSON')
                sub.add_argument('--cochain-file', default=None, help='File holding the cochain')

    def _model(self, options):
        if options['model'] is None:
            return None
        data = {'model': options['model']}
        data.update({k: options[k] for k in ('m', 'p', 'q') if options[k] is not None})
        serializer = ModelDescriptorSerializer(data=data)
        if not serializer.is_valid():
            raise CommandError(f"Unknown model: {serializer.errors}", returncode=EXIT_USAGE)
        return serializer.save()

    def handle(self, *args, **options):
        subcommand = options['subcommand']
        config_kwargs = {
            'subcommand': subcommand,
            'model': self._model(options),
            'output': options['output'],
            'threads': options['threads'],
            'system': _load_json(options.get('system'), options.get('system_file'), 'system'),
            'cochain': _load_json(options.get('cochain'), options.get('cochain_file'), 'cochain'),
        }
        for key in ('samples', 'seed'):
            if options[key] is not None:
                config_kwargs[key] = options[key]
        if subcommand == 'example-nonhomog' and options['m'] is not None:
            config_kwargs['m'] = options['m']

        try:
            config = RunConfig(**config_kwargs)
        except (ValueError, DRFValidationError) as e:
            raise CommandError(str(e), returncode=EXIT_USAGE)

        result = run(config)
        content = result.content
        if content:
            if config.output:
                Path(config.output).write_bytes(content)
                logger.info(f"Report written to {config.output}")
            else:
                self.stdout.write(content.decode('utf-8'), ending='')

        if result.exit_code != EXIT_OK:
            raise CommandError(result.message, returncode=result.exit_code)
