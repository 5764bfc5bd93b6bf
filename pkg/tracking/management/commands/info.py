from django.core.management.base import BaseCommand

from tracking.exceptions import ArtifactError
from tracking.models import TrainingRun
from tracking.storage import read_manifest

from ._shared import add_config_argument, read_config

RECENT_RUNS = 20


class Command(BaseCommand):
    help = 'Show the manifest of a configured run and the registered training runs.'

    def add_arguments(self, parser):
        add_config_argument(parser, required=False)

    def handle(self, *args, **options):
        runs = TrainingRun.objects.all()
        if options['config']:
            config = read_config(options['config'])
            runs = runs.filter(output_dir=str(config.output_dir))
            try:
                manifest = read_manifest(config.output_dir)
            except ArtifactError as exc:
                self.stdout.write(self.style.WARNING(str(exc)))
            else:
                for key in ('problem', 'config_hash', 'snapshot_count', 'state_rank', 'fixed_rank', 'mapping_rank'):
                    self.stdout.write(f'{key} = {manifest.get(key)}')
                for name, filename in sorted(manifest.get('files', {}).items()):
                    self.stdout.write(f'  {name}: {filename}')

        runs = list(runs[:RECENT_RUNS])
        if not runs:
            self.stdout.write('no training runs registered')
            return
        for run in runs:
            self.stdout.write(
                f'#{run.pk} {run.created_at:%Y-%m-%d %H:%M} {run.problem} {run.get_status_display()} '
                f'snapshots={run.snapshot_count} k={run.state_rank} n={run.mapping_rank} '
                f'hash={run.config_hash[:12]} {run.output_dir} ({run.solves.count()} solves)'
            )
