# Generated by Django 6.0.2 on 2026-03-02 10:14

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="ExperimentRun",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                (
                    "command",
                    models.CharField(
                        choices=[
                            ("simulate", "Simulate"),
                            ("analyze", "Analyze"),
                            ("demo", "Demo"),
                        ],
                        max_length=20,
                    ),
                ),
                ("device_id", models.CharField(blank=True, max_length=50)),
                ("protocol", models.CharField(blank=True, max_length=50)),
                ("seed", models.BigIntegerField(blank=True, null=True)),
                ("trials", models.PositiveIntegerField(default=0)),
                (
                    "config_hash",
                    models.CharField(
                        blank=True,
                        help_text="SHA-256 of the resolved config",
                        max_length=64,
                    ),
                ),
                (
                    "transcript_hash",
                    models.CharField(
                        blank=True,
                        help_text="SHA-256 over the transcript set",
                        max_length=64,
                    ),
                ),
                ("output_path", models.CharField(blank=True, max_length=500)),
                (
                    "status",
                    models.CharField(
                        choices=[
                            ("running", "Running"),
                            ("completed", "Completed"),
                            ("failed", "Failed"),
                        ],
                        default="running",
                        max_length=20,
                    ),
                ),
                ("error", models.TextField(blank=True)),
                ("started_at", models.DateTimeField(auto_now_add=True)),
                ("finished_at", models.DateTimeField(blank=True, null=True)),
            ],
            options={
                "verbose_name": "Experiment Run",
                "verbose_name_plural": "Experiment Runs",
                "ordering": ["-started_at"],
                "indexes": [
                    models.Index(
                        fields=["command", "status"],
                        name="run_command_status_idx",
                    ),
                    models.Index(
                        fields=["config_hash"], name="run_config_hash_idx"
                    ),
                ],
            },
        ),
        migrations.CreateModel(
            name="RunMetric",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("analysis_id", models.CharField(max_length=50)),
                ("name", models.CharField(max_length=100)),
                ("value", models.FloatField()),
                (
                    "run",
                    models.ForeignKey(
                        on_delete=django.db.models.deletion.CASCADE,
                        related_name="metrics",
                        to="experiments.experimentrun",
                    ),
                ),
            ],
            options={
                "verbose_name": "Run Metric",
                "verbose_name_plural": "Run Metrics",
                "ordering": ["run", "analysis_id", "name"],
                "unique_together": {("run", "analysis_id", "name")},
            },
        ),
    ]
