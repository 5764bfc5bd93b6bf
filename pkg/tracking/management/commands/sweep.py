from django.core.management.base import BaseCommand

from tracking.pipelines import run_sweep

from ._shared import add_config_argument, exit_codes, read_config


class Command(BaseCommand):
    help = 'Fixed-domain ROM and ROM-IFT errors over the [test] parameters.'

    def add_arguments(self, parser):
        add_config_argument(parser)
        parser.add_argument('--workers', type=int, help='worker threads (default: [run] workers)')

    def handle(self, *args, **options):
        config = read_config(options['config'])
        with exit_codes():
            report, path = run_sweep(config, options['workers'])
        self.stdout.write(
            f'max_e_rom = {report.max_rom!r}\n'
            f'max_e_ift = {report.max_ift!r}\n'
            f'failed = {report.n_failed}'
        )
        style = self.style.WARNING if report.n_failed else self.style.SUCCESS
        self.stdout.write(style(f'sweep of {len(report.records)} parameters written to {path}'))
