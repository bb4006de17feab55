# Generated by Django 6.0.2 on 2026-10-17 09:20

from django.db import migrations, models


def blank_missing_seeds(apps, schema_editor):
    ExperimentRun = apps.get_model("experiments", "ExperimentRun")
    ExperimentRun.objects.filter(seed__isnull=True).update(seed="")


class Migration(migrations.Migration):

    dependencies = [
        ("experiments", "0001_initial"),
    ]

    operations = [
        migrations.AlterField(
            model_name="experimentrun",
            name="seed",
            field=models.CharField(blank=True, max_length=20, null=True),
        ),
        migrations.RunPython(blank_missing_seeds, migrations.RunPython.noop),
        migrations.AlterField(
            model_name="experimentrun",
            name="seed",
            field=models.CharField(blank=True, max_length=20),
        ),
    ]
