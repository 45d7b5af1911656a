from django.contrib import admin
from .models import Experiment, TraceRecord

@admin.register(Experiment)
class ExperimentAdmin(admin.ModelAdmin):
    list_display = ['name', 'method', 'kind', 'size', 'beta', 'status', 'iterations', 'final_error', 'created_at']
    list_filter = ['method', 'kind', 'status', 'created_at']
    list_per_page = 10
    ordering = ['-created_at']
    readonly_fields = ['slug', 'created_at']
    search_fields = ['name']


@admin.register(TraceRecord)
class TraceRecordAdmin(admin.ModelAdmin):
    list_display = ['experiment', 'k', 'f', 'e_k', 'f_k', 'alpha_k', 'eps_k']
    list_filter = ['experiment__method']
    list_per_page = 50
    list_select_related = ['experiment']
    ordering = ['experiment', 'k']
