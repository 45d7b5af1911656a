"""
INI experiment files with sections [problem], [method], [schedule] and
[output]. Keys are Experiment field names; every value is validated by
ExperimentConfigSerializer.
"""
import configparser
from pathlib import Path

from rest_framework import serializers

from .models import Experiment
from .serializers import ExperimentConfigSerializer

SECTION_OF = {key: section for section, keys in Experiment.CONFIG_SECTIONS.items() for key in keys}


def parse_config_text(text) -> dict:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise serializers.ValidationError({'config': str(exc)}) from exc

    values, errors = {}, {}
    for section in parser.sections():
        if section not in Experiment.CONFIG_SECTIONS:
            errors[section] = 'Unknown section.'
            continue
        for key, value in parser.items(section):
            if SECTION_OF.get(key) != section:
                errors[f'{section}.{key}'] = 'Unknown key.'
            else:
                values[key] = value.strip()
    if errors:
        raise serializers.ValidationError(errors)
    return values


def read_config(path) -> dict:
    return parse_config_text(Path(path).read_text())


def load_spec(path=None, overrides=None) -> Experiment:
    """
    Read the file (if any), apply overrides and validate. Returns an
    unsaved Experiment. Raises serializers.ValidationError on bad input.
    """
    values = read_config(path) if path else {}
    values.update({key: value for key, value in (overrides or {}).items() if value is not None})
    serializer = ExperimentConfigSerializer(data=values)
    serializer.is_valid(raise_exception=True)
    return serializer.build()


def dump_config(experiment: Experiment) -> str:
    """
    Canonical text of an experiment specification. Unset optional values
    are left out so the file parses back to the same specification.
    """
    parser = configparser.ConfigParser(interpolation=None)
    for section, keys in Experiment.CONFIG_SECTIONS.items():
        parser.add_section(section)
        for key in keys:
            value = getattr(experiment, key)
            if value is None or value == '':
                continue
            parser.set(section, key, repr(value) if isinstance(value, float) else str(value))
    lines = []
    for section in parser.sections():
        lines.append(f'[{section}]')
        lines.extend(f'{key} = {value}' for key, value in parser.items(section))
        lines.append('')
    return '\n'.join(lines)


def write_config(experiment: Experiment, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_config(experiment))
