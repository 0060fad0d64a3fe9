from django.db import models


class BatchExperiment(models.Model):
    """
    Modelo para almacenar un lote de simulaciones (o una simulación suelta)
    """
    COMMAND_CHOICES = [
        ('simulate', 'Simulación individual'),
        ('batch', 'Lote de mapeos'),
    ]

    command = models.CharField(max_length=20, choices=COMMAND_CHOICES, verbose_name='Comando')
    application_path = models.CharField(max_length=500, verbose_name='Archivo de aplicación')
    platform_path = models.CharField(max_length=500, verbose_name='Archivo de plataforma')
    strategy = models.CharField(max_length=255, verbose_name='Estrategia de mapeo')
    first_seed = models.BigIntegerField(default=0, verbose_name='Semilla inicial')
    size = models.PositiveIntegerField(default=1, verbose_name='Número de mapeos')

    min_makespan = models.FloatField(null=True, blank=True, verbose_name='Makespan mínimo (s)')
    max_makespan = models.FloatField(null=True, blank=True, verbose_name='Makespan máximo (s)')
    min_energy = models.FloatField(null=True, blank=True, verbose_name='Energía mínima (J)')
    pareto_front = models.JSONField(default=list, verbose_name='Frente de Pareto')

    created_at = models.DateTimeField(auto_now_add=True, verbose_name='Fecha de creación')

    class Meta:
        verbose_name = 'Experimento'
        verbose_name_plural = 'Experimentos'
        ordering = ['-created_at']

    def __str__(self):
        return f"{self.get_command_display()} {self.strategy} ({self.size} mapeos)"


class SimulationRecord(models.Model):
    """
    Resultado de una simulación dentro de un experimento
    """
    experiment = models.ForeignKey(BatchExperiment, on_delete=models.CASCADE, related_name='records')
    mapping_id = models.CharField(max_length=100, verbose_name='Identificador del mapeo')
    seed = models.BigIntegerField(null=True, blank=True, verbose_name='Semilla')
    makespan = models.FloatField(verbose_name='Makespan (s)')
    total_energy = models.FloatField(verbose_name='Energía total (J)')
    sim_wall_time = models.FloatField(verbose_name='Tiempo de simulación (s)')
    per_host_energy = models.JSONField(default=dict, verbose_name='Energía por host (J)')

    class Meta:
        verbose_name = 'Registro de simulación'
        verbose_name_plural = 'Registros de simulación'
        ordering = ['experiment', 'id']

    def __str__(self):
        return f"Mapeo {self.mapping_id}: {self.makespan:.6f} s, {self.total_energy:.3f} J"
