from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand

from tracking.demos import DEMOS, run_demo

from ._shared import exit_codes


class Command(BaseCommand):
    help = 'Write the plot-ready CSV data of one of the one-dimensional demonstrations.'

    def add_arguments(self, parser):
        parser.add_argument('name', help=f'one of: {", ".join(DEMOS)}')
        parser.add_argument('--output', help='output directory (default: <IFTROM_OUTPUT_ROOT>/demos)')
        parser.add_argument('--samples', type=int, help='snapshot count for steepening-compression')

    def handle(self, *args, **options):
        directory = Path(options['output'] or Path(settings.IFTROM_OUTPUT_ROOT) / 'demos')
        extra = {}
        if options['samples'] is not None:
            extra['n_samples'] = options['samples']
        with exit_codes():
            result = run_demo(options['name'], directory, **extra)
        for path in result.files:
            self.stdout.write(str(path))
        for key, value in result.summary.items():
            self.stdout.write(f'{key} = {value}')
        self.stdout.write(self.style.SUCCESS(f'demo {result.name} done'))
