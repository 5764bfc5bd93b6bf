from contextlib import contextmanager

from django.core.management.base import CommandError

from tracking.config import load_config
from tracking.exceptions import ArtifactError, ConfigError, InvalidStateError, NonInvertibleMappingError, SolverError

CONFIG_ERROR = 1
SOLVER_ERROR = 2
IO_ERROR = 3


@contextmanager
def exit_codes():
    """Translate library failures into CommandError with the documented return codes."""
    try:
        yield
    except ConfigError as exc:
        details = ''.join(f'\n  {error}' for error in exc.errors)
        raise CommandError(f'{exc}{details}', returncode=CONFIG_ERROR) from exc
    except (SolverError, NonInvertibleMappingError, InvalidStateError) as exc:
        raise CommandError(f'solver failure: {exc}', returncode=SOLVER_ERROR) from exc
    except (ArtifactError, OSError) as exc:
        raise CommandError(f'I/O failure: {exc}', returncode=IO_ERROR) from exc
    except ValueError as exc:
        raise CommandError(str(exc), returncode=CONFIG_ERROR) from exc


def add_config_argument(parser, required: bool = True) -> None:
    parser.add_argument('--config', required=required, help='INI run configuration')


def read_config(path):
    with exit_codes():
        return load_config(path)
