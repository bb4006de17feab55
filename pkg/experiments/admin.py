"""
Experiments Admin Configuration
"""
from django.contrib import admin
from experiments.models import ExperimentRun, RunMetric


class RunMetricInline(admin.TabularInline):
    model = RunMetric
    extra = 0
    readonly_fields = ('analysis_id', 'name', 'value')
    can_delete = False


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = ('command', 'device_id', 'protocol', 'seed', 'trials', 'status', 'started_at')
    list_filter = ('command', 'status', 'protocol', 'started_at')
    search_fields = ('device_id', 'config_hash', 'transcript_hash', 'output_path')
    readonly_fields = ('config_hash', 'transcript_hash', 'started_at', 'finished_at')
    date_hierarchy = 'started_at'
    inlines = [RunMetricInline]


@admin.register(RunMetric)
class RunMetricAdmin(admin.ModelAdmin):
    list_display = ('run', 'analysis_id', 'name', 'value')
    list_filter = ('analysis_id',)
    search_fields = ('analysis_id', 'name', 'run__device_id')
