# Generated by Django 4.2.7 on 2026-10-19 10:12

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='BatchExperiment',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(choices=[('simulate', 'Simulación individual'), ('batch', 'Lote de mapeos')], max_length=20, verbose_name='Comando')),
                ('application_path', models.CharField(max_length=500, verbose_name='Archivo de aplicación')),
                ('platform_path', models.CharField(max_length=500, verbose_name='Archivo de plataforma')),
                ('strategy', models.CharField(max_length=255, verbose_name='Estrategia de mapeo')),
                ('first_seed', models.BigIntegerField(default=0, verbose_name='Semilla inicial')),
                ('size', models.PositiveIntegerField(default=1, verbose_name='Número de mapeos')),
                ('min_makespan', models.FloatField(blank=True, null=True, verbose_name='Makespan mínimo (s)')),
                ('max_makespan', models.FloatField(blank=True, null=True, verbose_name='Makespan máximo (s)')),
                ('min_energy', models.FloatField(blank=True, null=True, verbose_name='Energía mínima (J)')),
                ('pareto_front', models.JSONField(default=list, verbose_name='Frente de Pareto')),
                ('created_at', models.DateTimeField(auto_now_add=True, verbose_name='Fecha de creación')),
            ],
            options={
                'verbose_name': 'Experimento',
                'verbose_name_plural': 'Experimentos',
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='SimulationRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('mapping_id', models.CharField(max_length=100, verbose_name='Identificador del mapeo')),
                ('seed', models.BigIntegerField(blank=True, null=True, verbose_name='Semilla')),
                ('makespan', models.FloatField(verbose_name='Makespan (s)')),
                ('total_energy', models.FloatField(verbose_name='Energía total (J)')),
                ('sim_wall_time', models.FloatField(verbose_name='Tiempo de simulación (s)')),
                ('per_host_energy', models.JSONField(default=dict, verbose_name='Energía por host (J)')),
                ('experiment', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='records', to='METRICS.batchexperiment')),
            ],
            options={
                'verbose_name': 'Registro de simulación',
                'verbose_name_plural': 'Registros de simulación',
                'ordering': ['experiment', 'id'],
            },
        ),
    ]
