"""
Experiments Models - Ledger of simulate / analyze invocations and their metrics
"""
from django.db import models
from django.utils import timezone


class ExperimentRun(models.Model):
    """One invocation of a management command; report files on disk stay authoritative."""

    STATUS_CHOICES = [
        ('running', 'Running'),
        ('completed', 'Completed'),
        ('failed', 'Failed'),
    ]

    COMMAND_CHOICES = [
        ('simulate', 'Simulate'),
        ('analyze', 'Analyze'),
        ('demo', 'Demo'),
    ]

    command = models.CharField(max_length=20, choices=COMMAND_CHOICES)
    device_id = models.CharField(max_length=50, blank=True)
    protocol = models.CharField(max_length=50, blank=True)
    # decimal text: seeds span the unsigned 64-bit range
    seed = models.CharField(max_length=20, blank=True)
    trials = models.PositiveIntegerField(default=0)

    # Reproducibility
    config_hash = models.CharField(max_length=64, blank=True, help_text="SHA-256 of the resolved config")
    transcript_hash = models.CharField(max_length=64, blank=True, help_text="SHA-256 over the transcript set")
    output_path = models.CharField(max_length=500, blank=True)

    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default='running')
    error = models.TextField(blank=True)
    started_at = models.DateTimeField(auto_now_add=True)
    finished_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        verbose_name = "Experiment Run"
        verbose_name_plural = "Experiment Runs"
        ordering = ['-started_at']
        indexes = [
            models.Index(fields=['command', 'status'], name='run_command_status_idx'),
            models.Index(fields=['config_hash'], name='run_config_hash_idx'),
        ]

    @staticmethod
    def seed_text(seed):
        return '' if seed is None else str(seed)

    def __str__(self):
        return f"{self.command} {self.device_id or '-'} ({self.status})"

    def finish(self, transcript_hash='', output_path=''):
        self.status = 'completed'
        self.transcript_hash = transcript_hash
        self.output_path = str(output_path)
        self.finished_at = timezone.now()
        self.save(update_fields=['status', 'transcript_hash', 'output_path', 'finished_at'])

    def fail(self, error):
        self.status = 'failed'
        self.error = str(error)
        self.finished_at = timezone.now()
        self.save(update_fields=['status', 'error', 'finished_at'])

    def record_metrics(self, rows):
        """Store (analysis id, name, value) rows."""
        RunMetric.objects.bulk_create(
            RunMetric(run=self, analysis_id=analysis_id, name=name, value=value)
            for analysis_id, name, value in rows
        )


class RunMetric(models.Model):
    """One reported metric of a run."""

    run = models.ForeignKey(ExperimentRun, on_delete=models.CASCADE, related_name='metrics')
    analysis_id = models.CharField(max_length=50)
    name = models.CharField(max_length=100)
    value = models.FloatField()

    class Meta:
        verbose_name = "Run Metric"
        verbose_name_plural = "Run Metrics"
        ordering = ['run', 'analysis_id', 'name']
        unique_together = ['run', 'analysis_id', 'name']

    def __str__(self):
        return f"{self.analysis_id}.{self.name} = {self.value}"
