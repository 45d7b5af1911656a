from django.db.models.aggregates import Count
from django_filters.rest_framework import DjangoFilterBackend
from rest_framework.filters import OrderingFilter, SearchFilter
from rest_framework.viewsets import ReadOnlyModelViewSet

from .filters import ExperimentFilter
from .models import Experiment, TraceRecord
from .pagination import DefaultPagination, TracePagination
from .serializers import ExperimentSerializer, TraceRecordSerializer

class ExperimentViewSet(ReadOnlyModelViewSet):
    """
    Persisted runs. Runs are started from the command line only.
    """
    queryset = Experiment.objects.annotate(record_count=Count('records')).all()
    serializer_class = ExperimentSerializer

    filter_backends = [DjangoFilterBackend, OrderingFilter, SearchFilter]
    filterset_class = ExperimentFilter
    ordering_fields = ['created_at', 'final_e', 'final_f_rel', 'time_e_1e2', 'time_e_1e3']
    pagination_class = DefaultPagination
    search_fields = ['name']


class TraceRecordViewSet(ReadOnlyModelViewSet):
    serializer_class = TraceRecordSerializer

    filter_backends = [OrderingFilter]
    ordering_fields = ['k', 'time_s']
    pagination_class = TracePagination

    def get_queryset(self):
        return TraceRecord.objects.filter(experiment_id=self.kwargs['experiment_pk']).order_by('k')
