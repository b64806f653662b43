from pathlib import Path
import tomllib
from typing import Any

from .constants import CONFIG_FILENAME, ROOT_MARKERS
from .errors import ConfigError
from .loader import load_raw_defaults
from .models import ModelParams, OutputFormat, Regime, RunConfig
from .thermo_density import critical_field

# config-file table -> RunConfig fields it may set
_SECTIONS = {
    'model': ('delta', 'h'),
    'numerics': (
        'grid',
        'lieb_grid',
        'circle_points',
        'tail_tol',
        'dimension_cap',
        'chain_cap',
        'threads',
    ),
    'verify': ('seed',),
}

_CASTS = {
    'm': int,
    'kind': str,
    'distance': int,
    'suite': str,
    'points': int,
    'grid': int,
    'lieb_grid': int,
    'circle_points': int,
    'tail_tol': float,
    'dimension_cap': int,
    'chain_cap': int,
    'threads': int,
    'seed': int,
}


def _toml_value(value: Any) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (int, float)):
        return repr(value)
    text = str(value).replace('\\', '\\\\').replace('"', '\\"')
    return f'"{text}"'


def render_run_template() -> str:
    """A run config listing every key a config file may set, filled with the bundled defaults."""
    raw = load_raw_defaults()
    tables = {section: keys for section, keys in _SECTIONS.items()}
    tables['output'] = ('format', 'path')
    lines = [
        '# xxz-corr run configuration.',
        '# Command-line flags override these values; deleted keys fall back to the bundled defaults.',
    ]
    for section in ('model', 'numerics', 'output', 'verify'):
        table = raw.get(section, {}) or {}
        lines.append('')
        lines.append(f'[{section}]')
        lines.extend(f'{key} = {_toml_value(table[key])}' for key in tables[section] if key in table)
    return '\n'.join(lines) + '\n'


def find_project_root(start: Path | None = None) -> Path:
    current = start or Path.cwd()
    for path in [current, *current.parents]:
        if any((path / marker).exists() for marker in ROOT_MARKERS):
            return path
    return current


def locate_config_path(explicit: Path | None = None) -> Path | None:
    """The explicit path if given (it must exist), else xxz-run.toml at the project root, if any."""
    if explicit is not None:
        if not explicit.is_file():
            raise FileNotFoundError(f"Configuration file '{explicit}' not found.")
        return explicit
    candidate = find_project_root() / CONFIG_FILENAME
    return candidate if candidate.is_file() else None


def _read_file(config_path: Path | None) -> dict[str, Any]:
    if config_path is None:
        return {}
    try:
        with config_path.open('rb') as fp:
            return tomllib.load(fp)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f'Cannot parse {config_path}: {exc}') from exc


def _merge(values: dict[str, Any], raw: dict[str, Any]) -> None:
    for section, keys in _SECTIONS.items():
        table = raw.get(section, {}) or {}
        for key in keys:
            if key in table:
                values[key] = table[key]
    output = raw.get('output', {}) or {}
    if 'format' in output:
        values['output_format'] = output['format']
    if output.get('path'):
        values['out'] = output['path']


def load_config(
    command: str,
    config_path: Path | None = None,
    overrides: dict[str, Any] | None = None,
) -> RunConfig:
    """Merge bundled defaults < config file < command-line overrides into a RunConfig."""
    values: dict[str, Any] = {}
    _merge(values, load_raw_defaults())
    _merge(values, _read_file(config_path))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value

    try:
        config = RunConfig(
            command=command,
            delta=float(values.get('delta', 0.5)),
            h=float(values.get('h', 0.0)),
            output_format=OutputFormat.from_str(values.get('output_format'), OutputFormat.CSV),
            out=Path(values['out']) if values.get('out') else None,
            **{key: cast(values[key]) for key, cast in _CASTS.items() if key in values},
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f'Invalid configuration value: {exc}') from exc

    regime = Regime.from_delta(config.delta)
    if config.h < 0:
        raise ConfigError(f'Magnetic field must be non-negative, got h={config.h}')
    if regime == Regime.MASSIVE and 0 < config.h <= critical_field(ModelParams(config.delta).zeta):
        config.notices.append(
            f'h={config.h:g} is below the critical field; the ground state is the zero-field one (h=0)'
        )
        config.h = 0.0
    if config.grid < 2 or config.lieb_grid < 2 or config.circle_points < 2:
        raise ConfigError('Grid sizes must be at least 2')
    return config
