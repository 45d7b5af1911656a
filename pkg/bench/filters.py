from django_filters.rest_framework import FilterSet
from .models import Experiment

class ExperimentFilter(FilterSet):
  class Meta:
    model = Experiment
    fields = {
      'method': ['exact'],
      'kind': ['exact'],
      'status': ['exact'],
      'size': ['exact', 'gt', 'lt'],
      'beta': ['gt', 'lt'],
    }
