from django.db import models
from django.utils.translation import gettext_lazy as _


class TimeStampedModel(models.Model):
    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        abstract = True


class Problems(models.TextChoices):
    ADVECTION = 'advec2d', _('Advection-reaction (2D)')
    NOZZLE = 'nozzle1d', _('Quasi-1D nozzle')


class TrainingRun(TimeStampedModel):
    class Status(models.TextChoices):
        RUNNING = 'running', _('Running')
        COMPLETED = 'completed', _('Completed')
        FAILED = 'failed', _('Failed')

    problem = models.CharField(max_length=20, choices=Problems.choices)
    config_hash = models.CharField(max_length=64, db_index=True)
    output_dir = models.CharField(max_length=500)
    snapshot_count = models.PositiveIntegerField(default=0)
    state_rank = models.PositiveIntegerField(default=0)
    mapping_rank = models.PositiveIntegerField(default=0)
    status = models.CharField(max_length=20, choices=Status.choices, default=Status.RUNNING)
    notes = models.TextField(blank=True)

    class Meta:
        ordering = ['-created_at']

    def __str__(self) -> str:
        return f'{self.problem} {self.config_hash[:12]}'

    def mark(self, status: str, notes: str = '', **counts) -> None:
        self.status = status
        if notes:
            self.notes = notes
        for name, value in counts.items():
            setattr(self, name, value)
        self.save()


class SolveRecord(TimeStampedModel):
    class Modes(models.TextChoices):
        HDM = 'hdm', _('High-dimensional model')
        ROM_FIXED = 'rom-fixed', _('Fixed-domain ROM')
        ROM_IFT = 'rom-ift', _('ROM with implicit feature tracking')

    class Status(models.TextChoices):
        OK = 'ok', _('Converged')
        MAX_ITER = 'max-iter', _('Iteration limit')
        LINE_SEARCH = 'line-search-failure', _('Line search failure')
        FAILED = 'failed', _('Failed')

    run = models.ForeignKey(
        TrainingRun,
        on_delete=models.SET_NULL,
        null=True,
        blank=True,
        related_name='solves',
    )
    mode = models.CharField(max_length=20, choices=Modes.choices)
    parameters = models.JSONField(default=list)
    e_rom = models.FloatField(null=True, blank=True)
    e_ift = models.FloatField(null=True, blank=True)
    res_rom = models.FloatField(null=True, blank=True)
    res_ift = models.FloatField(null=True, blank=True)
    iterations = models.PositiveIntegerField(default=0)
    status = models.CharField(max_length=30, choices=Status.choices, default=Status.OK)

    class Meta:
        ordering = ['-created_at']

    def __str__(self) -> str:
        return f'{self.get_mode_display()} at {self.parameters}'
