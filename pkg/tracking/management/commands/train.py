from django.core.management.base import BaseCommand

from tracking.pipelines import run_training

from ._shared import add_config_argument, exit_codes, read_config


class Command(BaseCommand):
    help = 'Offline stage: collect and align training snapshots, then compress them into reduced bases.'

    def add_arguments(self, parser):
        add_config_argument(parser)

    def handle(self, *args, **options):
        config = read_config(options['config'])
        with exit_codes():
            run, manifest = run_training(config)
        self.stdout.write(
            f'snapshots = {manifest["snapshot_count"]}\n'
            f'state_rank = {manifest["state_rank"]}\n'
            f'fixed_rank = {manifest["fixed_rank"]}\n'
            f'mapping_rank = {manifest["mapping_rank"]}'
        )
        self.stdout.write(self.style.SUCCESS(f'training run {run.pk} written to {config.output_dir}'))
