from django.core.management.base import BaseCommand, CommandError

from tracking.forms import parse_number
from tracking.pipelines import MODES, solve_parameter

from ._shared import CONFIG_ERROR, add_config_argument, exit_codes, read_config


class Command(BaseCommand):
    help = 'Solve at one parameter with the HDM, the fixed-domain ROM or ROM-IFT.'

    def add_arguments(self, parser):
        add_config_argument(parser)
        parser.add_argument('--mu', required=True, help='comma separated parameter vector, e.g. "0,0.55,80"')
        parser.add_argument('--mode', choices=MODES, default='rom-ift')

    def handle(self, *args, **options):
        config = read_config(options['config'])
        try:
            mu = [parse_number(value) for value in options['mu'].split(',')]
        except Exception as exc:
            raise CommandError(f'invalid --mu: {exc}', returncode=CONFIG_ERROR) from exc
        with exit_codes():
            outcome = solve_parameter(config, mu, options['mode'])
        self.stdout.write(f'residual_norm = {outcome.residual_norm!r}')
        if outcome.solution is not None:
            self.stdout.write(
                f'objective = {outcome.solution.objective!r}\n'
                f'iterations = {outcome.solution.iterations}'
            )
        status = str(outcome.status)
        style = self.style.SUCCESS if status == 'ok' else self.style.WARNING
        self.stdout.write(style(f'{options["mode"]} {status}: {outcome.directory}'))
