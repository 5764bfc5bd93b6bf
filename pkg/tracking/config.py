"""
INI run configuration.

A run file has the sections [run], [mesh], [solver], [training] and [test].
The first three are flattened into a `RunConfigForm`; the grid sections are
handed to the form as-is and expanded into parameter lists there.
"""

import configparser
import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from django.conf import settings

from .exceptions import ConfigError
from .forms import RunConfigForm
from .ift import IftSettings
from .problems import Problem, ProblemSetup

logger = logging.getLogger(__name__)

FORM_SECTIONS = ('run', 'mesh', 'solver')
GRID_SECTIONS = ('training', 'test')


@dataclass(frozen=True, eq=False)
class RunConfig:
    problem: Problem
    output_dir: Path
    workers: int
    norm: str
    align: bool
    nx: int
    ny: int | None
    degree: int
    geom_degree: int
    settings: IftSettings
    energy: float | None = None
    n_basis: int | None = None
    n_mapping: int | None = None
    training: list[np.ndarray] = field(default_factory=list)
    test: list[np.ndarray] = field(default_factory=list)
    config_hash: str = ''

    def setup(self) -> ProblemSetup:
        return self.problem.setup(self.nx, self.ny, self.degree, self.geom_degree)


def read_ini(path) -> configparser.ConfigParser:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f'config file {path} does not exist')
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(path.read_text(encoding='utf-8'), source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f'cannot parse {path}: {exc}') from exc
    return parser


def config_hash(parser: configparser.ConfigParser) -> str:
    items = sorted(
        f'{section.strip().lower()}.{key.strip().lower()}={" ".join(value.split())}'
        for section in parser.sections()
        for key, value in parser.items(section)
    )
    return hashlib.sha256('\n'.join(items).encode('utf-8')).hexdigest()


def _form_data(parser: configparser.ConfigParser) -> tuple[dict, list[str]]:
    data: dict[str, str] = {}
    errors = []
    for section in parser.sections():
        if section in GRID_SECTIONS:
            continue
        if section not in FORM_SECTIONS:
            errors.append(f'unknown section [{section}]')
            continue
        for key, value in parser.items(section):
            if key in data:
                errors.append(f'{key} is set in more than one section')
            data[key] = value.strip()
    return data, errors


def _resolve(cleaned: dict, problem: Problem, name: str, default=None):
    value = cleaned.get(name)
    if value in (None, ''):
        value = problem.defaults.get(name, default)
    return value


def _auto(value):
    if value == 'auto' or value is None:
        return None
    return float(value)


def load_config(path) -> RunConfig:
    parser = read_ini(path)
    data, errors = _form_data(parser)
    grids = {name: dict(parser.items(name)) for name in GRID_SECTIONS if parser.has_section(name)}
    form = RunConfigForm(data, grids=grids)
    if not form.is_valid():
        for key, messages in form.errors.items():
            prefix = '' if key == '__all__' else f'{key}: '
            errors.extend(prefix + message for message in messages)
    if errors:
        raise ConfigError(f'invalid configuration {path}', errors)

    cleaned = form.cleaned_data
    problem: Problem = cleaned['problem_instance']
    solver = {**settings.IFTROM_SOLVER_DEFAULTS}
    for name in ('eps1', 'eps2', 'max_iterations', 'newton_tol', 'newton_max_iterations'):
        if cleaned.get(name) is not None:
            solver[name] = cleaned[name]
    if cleaned.get('kappa') == '':
        solver['kappa'] = _auto(problem.defaults.get('kappa'))
    else:
        solver['kappa'] = cleaned['kappa']
    if cleaned.get('lm_lambda') == '':
        solver['lm_lambda'] = _auto(problem.defaults.get('lm_lambda'))
    else:
        solver['lm_lambda'] = cleaned['lm_lambda']
    try:
        ift_settings = IftSettings(**solver)
    except ValueError as exc:
        raise ConfigError(f'invalid configuration {path}', [str(exc)]) from exc

    output_dir = Path(cleaned.get('output_dir') or problem.name)
    if not output_dir.is_absolute():
        output_dir = Path(settings.IFTROM_OUTPUT_ROOT) / output_dir
    dim = problem.law().dim
    config = RunConfig(
        problem=problem,
        output_dir=output_dir,
        workers=cleaned.get('workers') or settings.IFTROM_WORKERS,
        norm=cleaned.get('norm') or problem.norm,
        align=cleaned['align'] if 'align' in data else True,
        nx=_resolve(cleaned, problem, 'nx'),
        ny=_resolve(cleaned, problem, 'ny') if dim == 2 else None,
        degree=_resolve(cleaned, problem, 'degree'),
        geom_degree=_resolve(cleaned, problem, 'geom_degree', 1),
        settings=ift_settings,
        energy=cleaned.get('energy'),
        n_basis=cleaned.get('n_basis'),
        n_mapping=cleaned.get('n_mapping') or None,
        training=problem.order_training(cleaned['training']),
        test=list(cleaned['test']),
        config_hash=config_hash(parser),
    )
    logger.info('config %s: problem=%s hash=%s', path, problem.name, config.config_hash[:12])
    return config
