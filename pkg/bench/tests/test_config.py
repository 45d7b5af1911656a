import pytest
from rest_framework import serializers
from bench.config import dump_config, load_spec, parse_config_text, write_config
from bench.models import Experiment


def errors_of(exc_info):
    return {key: [str(message) for message in messages] if isinstance(messages, list) else str(messages)
            for key, messages in exc_info.value.detail.items()}


class TestParseConfig:

    def test_sections_flatten_to_fields(self):
        values = parse_config_text('[problem]\nsize = 16\nbeta = 0.01\n\n[method]\nmethod = SSL\n')

        assert values == {'size': '16', 'beta': '0.01', 'method': 'SSL'}

    @pytest.mark.parametrize('text, key', [
        ('[problem]\ncolour = red\n', 'problem.colour'),
        ('[problem]\nmethod = SSL\n', 'problem.method'),
        ('[extras]\nsize = 8\n', 'extras'),
        ('size = 8\n', 'config'),
    ])
    def test_if_unknown_or_misplaced_setting_is_rejected(self, text, key):
        with pytest.raises(serializers.ValidationError) as exc_info:
            parse_config_text(text)

        assert key in exc_info.value.detail


class TestLoadSpec:

    def test_defaults(self):
        spec = load_spec()

        assert spec.method == Experiment.METHOD_SPDHG
        assert spec.schedule.as_tuple() == (0.5, 5e-3, 0.5, 5e-5, 1e13, 1.0)
        assert spec.pk is None

    def test_if_overrides_win_over_file(self, tmp_path):
        path = tmp_path / 'exp.ini'
        path.write_text('[problem]\nsize = 16\nbeta = 0.01\n')

        spec = load_spec(path, {'beta': '0.2', 'seed': None})

        assert (spec.size, spec.beta, spec.seed) == (16, 0.2, 0)

    def test_preset_fills_the_schedule(self):
        spec = load_spec(None, {'preset': 'phantom', 'method': 'SSL'})

        assert spec.schedule.as_tuple() == (0.9, 1e-2, 0.0, 0.0, 1e13, 1.0)

    def test_if_explicit_value_wins_over_preset(self):
        spec = load_spec(None, {'preset': 'cameraman', 'method': 'PDHG', 't1': '2.0'})

        assert spec.schedule.as_tuple() == (2.0, 1e-2, 0.04, 1e-5, 0.0, 0.0)

    def test_if_level_method_drops_alpha_schedule(self):
        spec = load_spec(None, {'method': 'SL'})

        assert (spec.t3, spec.t4) == (0.0, 0.0)

    def test_if_unknown_key_is_rejected(self):
        with pytest.raises(serializers.ValidationError) as exc_info:
            load_spec(None, {'colour': 'red'})

        assert errors_of(exc_info)['colour'] == ['Unknown setting.']

    def test_if_invalid_schedule_names_the_condition(self):
        with pytest.raises(serializers.ValidationError) as exc_info:
            load_spec(None, {'method': 'SPDHG', 't6': '0'})

        assert 'sum_gamma_finite' in errors_of(exc_info)['schedule'][0]

    def test_if_constant_alpha_is_rejected(self):
        with pytest.raises(serializers.ValidationError) as exc_info:
            load_spec(None, {'method': 'PDHG', 't4': '0'})

        assert 'sum_alpha_squared_finite' in errors_of(exc_info)['schedule'][0]

    @pytest.mark.parametrize('overrides, key', [
        ({'method': 'SSL', 't3': '0.5'}, 't3'),
        ({'method': 'PDHG', 'delta0': '1.0'}, 'delta0'),
        ({'intensity_low': '5', 'intensity_high': '5'}, 'intensity_high'),
        ({'size': '8', 'psf_size': '9'}, 'psf_size'),
        ({'psf_size': '4'}, 'psf_size'),
        ({'nu1': '1.0'}, 'nu1'),
        ({'size': '4'}, 'size'),
        ({'method': 'ADMM'}, 'method'),
        ({'preset': 'lena'}, 'preset'),
    ])
    def test_if_invalid_value_is_rejected(self, overrides, key):
        with pytest.raises(serializers.ValidationError) as exc_info:
            load_spec(None, overrides)

        assert key in exc_info.value.detail

    def test_if_missing_file_raises(self, tmp_path):
        with pytest.raises(OSError):
            load_spec(tmp_path / 'missing.ini')


class TestDumpConfig:

    def test_dumped_config_reloads_to_the_same_spec(self, tmp_path):
        spec = load_spec(None, {'method': 'SSL', 'beta': '0.00526', 'delta0': '12.5', 'size': '64', 'plot': 'false'})
        path = tmp_path / 'out' / 'exp.ini'
        write_config(spec, path)

        assert load_spec(path).spec_dict() == spec.spec_dict()

    def test_unset_values_are_left_out(self):
        text = dump_config(load_spec())

        assert 'delta0' not in text
        assert 'preset' not in text
        assert text.startswith('[problem]\nname = experiment\n')
