from django.core.exceptions import ValidationError as DjangoValidationError
from rest_framework import serializers
from optim.stepsize import ScheduleError, preset_schedule
from .models import Experiment, TraceRecord

SCHEDULE_KEYS = ['t1', 't2', 't3', 't4', 't5', 't6']


class ExperimentConfigSerializer(serializers.ModelSerializer):
    """
    Validates an experiment specification coming from a config file and
    command line flags.

    A ``preset`` fills t1..t6 from the published row for the chosen method;
    values given explicitly win over the preset.
    """

    def validate(self, attrs):
        unknown = set(self.initial_data) - set(self.fields)
        if unknown:
            raise serializers.ValidationError({key: 'Unknown setting.' for key in sorted(unknown)})

        method = attrs.get('method', Experiment.METHOD_SPDHG)
        preset = attrs.get('preset')
        if preset:
            try:
                row = preset_schedule(preset, method).as_tuple()
            except ScheduleError as exc:
                raise serializers.ValidationError({'preset': str(exc)})
            for key, value in zip(SCHEDULE_KEYS, row):
                attrs.setdefault(key, value)
        elif method in (Experiment.METHOD_SL, Experiment.METHOD_SSL):
            # Level methods carry no alpha sequence.
            attrs.setdefault('t3', 0.0)
            attrs.setdefault('t4', 0.0)

        experiment = Experiment(**attrs)
        try:
            experiment.clean()
        except DjangoValidationError as exc:
            raise serializers.ValidationError(exc.message_dict)
        return super().validate(attrs)

    def build(self) -> Experiment:
        """
        Unsaved Experiment holding the validated specification.
        """
        return Experiment(**self.validated_data)

    class Meta:
        model = Experiment
        fields = Experiment.spec_fields()


class ExperimentSerializer(serializers.ModelSerializer):
    record_count = serializers.IntegerField(read_only=True) # Number of stored trace records.

    class Meta:
        model = Experiment
        fields = [
            'id', 'slug', 'status', 'created_at', 'record_count',
            *Experiment.spec_fields(),
            'iterations', 'f_star', 'final_f', 'final_e', 'final_f_rel',
            'k_e_1e2', 'time_e_1e2', 'k_e_1e3', 'time_e_1e3',
            'level_updates', 'diverged_at', 'rel_error_true', 'absolute_metrics', 'csv_path',
        ]


class TraceRecordSerializer(serializers.ModelSerializer):
    class Meta:
        model = TraceRecord
        fields = ['k', 'time_s', 'f', 'e_k', 'f_k', 'alpha_k', 'eps_k', 'delta_l', 'u_norm']
