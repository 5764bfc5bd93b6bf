# Generated by Django 5.1.3 on 2026-10-16 09:12

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='TrainingRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
                ('problem', models.CharField(choices=[('advec2d', 'Advection-reaction (2D)'), ('nozzle1d', 'Quasi-1D nozzle')], max_length=20)),
                ('config_hash', models.CharField(db_index=True, max_length=64)),
                ('output_dir', models.CharField(max_length=500)),
                ('snapshot_count', models.PositiveIntegerField(default=0)),
                ('state_rank', models.PositiveIntegerField(default=0)),
                ('mapping_rank', models.PositiveIntegerField(default=0)),
                ('status', models.CharField(choices=[('running', 'Running'), ('completed', 'Completed'), ('failed', 'Failed')], default='running', max_length=20)),
                ('notes', models.TextField(blank=True)),
            ],
            options={
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='SolveRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
                ('mode', models.CharField(choices=[('hdm', 'High-dimensional model'), ('rom-fixed', 'Fixed-domain ROM'), ('rom-ift', 'ROM with implicit feature tracking')], max_length=20)),
                ('parameters', models.JSONField(default=list)),
                ('e_rom', models.FloatField(blank=True, null=True)),
                ('e_ift', models.FloatField(blank=True, null=True)),
                ('res_rom', models.FloatField(blank=True, null=True)),
                ('res_ift', models.FloatField(blank=True, null=True)),
                ('iterations', models.PositiveIntegerField(default=0)),
                ('status', models.CharField(choices=[('ok', 'Converged'), ('max-iter', 'Iteration limit'), ('line-search-failure', 'Line search failure'), ('failed', 'Failed')], default='ok', max_length=30)),
                ('run', models.ForeignKey(blank=True, null=True, on_delete=django.db.models.deletion.SET_NULL, related_name='solves', to='tracking.trainingrun')),
            ],
            options={
                'ordering': ['-created_at'],
            },
        ),
    ]
