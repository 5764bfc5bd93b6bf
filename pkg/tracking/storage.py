"""On-disk artifacts: binary matrices, CSV tables, the run manifest and trained models."""

from __future__ import annotations

import csv
import json
import logging
import struct
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .exceptions import ArtifactError
from .fe import write_mesh
from .ift import IftSettings, SnapshotArchive, TrainedModel
from .mapping import MappingFamily, ReducedMappingSpace
from .metrics import ErrorReport
from .reduction import ReducedBasis, truncation_rank

logger = logging.getLogger(__name__)

MAGIC = b'IFTMAT01'
HEADER = struct.Struct('<8sQQ')
MANIFEST = 'manifest.json'
ENERGY_MARKERS = (1e-3, 1e-6, 1e-9)

ARTIFACTS = {
    'aligned_basis': 'aligned_basis.bin',
    'fixed_basis': 'fixed_basis.bin',
    'aligned_sigma': 'aligned_sigma.csv',
    'fixed_sigma': 'fixed_sigma.csv',
    'mapping_basis': 'mapping_basis.bin',
    'mapping_base': 'mapping_base.bin',
    'mapping_sigma': 'mapping_sigma.csv',
    'mapping_snapshots': 'mapping_snapshots.bin',
    'snapshots_aligned': 'snapshots_aligned.bin',
    'snapshots_fixed': 'snapshots_fixed.bin',
    'training': 'training.csv',
    'mesh': 'mesh.txt',
}


def _number(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


# ---------------------------------------------------------------------------
# binary matrices
# ---------------------------------------------------------------------------

def write_matrix(path: str | Path, array) -> None:
    """Column-major little-endian float64 payload after magic, rows and cols."""
    array = np.asarray(array, dtype=float)
    if array.ndim == 1:
        array = array[:, None]
    if array.ndim != 2:
        raise ValueError(f'only vectors and matrices can be stored, got {array.ndim} dimensions')
    rows, cols = array.shape
    payload = np.asarray(array, dtype='<f8').ravel(order='F').tobytes()
    Path(path).write_bytes(HEADER.pack(MAGIC, rows, cols) + payload)


def read_matrix(path: str | Path) -> np.ndarray:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ArtifactError(f'cannot read matrix file {path}: {exc}') from exc
    if len(data) < HEADER.size:
        raise ArtifactError(f'{path}: truncated matrix header')
    magic, rows, cols = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ArtifactError(f'{path}: not a matrix file (magic {magic!r})')
    expected = HEADER.size + 8 * rows * cols
    if len(data) != expected:
        raise ArtifactError(f'{path}: expected {expected} bytes for a {rows}x{cols} matrix, found {len(data)}')
    values = np.frombuffer(data, dtype='<f8', offset=HEADER.size, count=rows * cols)
    return values.reshape((rows, cols), order='F').astype(float)


# ---------------------------------------------------------------------------
# CSV tables
# ---------------------------------------------------------------------------

def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, 'w', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([_number(v) for v in row])


def read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline='') as handle:
            rows = list(csv.reader(handle))
    except OSError as exc:
        raise ArtifactError(f'cannot read table {path}: {exc}') from exc
    if not rows:
        raise ArtifactError(f'{path}: empty table')
    return rows[0], rows[1:]


def write_singular_values(path: str | Path, sigma: np.ndarray, markers: Sequence[float] = ()) -> None:
    """`index,sigma` table; with markers, an `energy` column flags the truncation rank of each energy."""
    sigma = np.asarray(sigma, dtype=float)
    ranks = {truncation_rank(sigma, e): e for e in sorted(markers, reverse=True)} if sigma.size else {}
    if markers:
        rows = [(i + 1, s, _number(ranks[i + 1]) if i + 1 in ranks else '') for i, s in enumerate(sigma)]
        write_csv(path, ('index', 'sigma', 'energy'), rows)
    else:
        write_csv(path, ('index', 'sigma'), ((i + 1, s) for i, s in enumerate(sigma)))


def read_singular_values(path: str | Path) -> np.ndarray:
    _, rows = read_csv(path)
    try:
        return np.array([float(row[1]) for row in rows])
    except (IndexError, ValueError) as exc:
        raise ArtifactError(f'{path}: malformed singular values ({exc})') from exc


def write_history(path: str | Path, history: Sequence[dict]) -> None:
    columns = ('iteration', 'objective', 'grad_w', 'grad_c', 'lam', 'alpha')
    write_csv(path, columns, ([row[c] for c in columns] for row in history))


def report_header(parameter_names: Sequence[str]) -> list[str]:
    mu = [f'mu_{i + 1}' for i in range(len(parameter_names))]
    return mu + ['e_rom', 'e_ift', 'res_rom', 'res_ift', 'iters_ift', 'status']


def write_report(path: str | Path, report: ErrorReport, parameter_names: Sequence[str]) -> None:
    write_csv(path, report_header(parameter_names), (record.row() for record in report.records))


# ---------------------------------------------------------------------------
# manifest and trained models
# ---------------------------------------------------------------------------

def write_manifest(directory: str | Path, manifest: dict) -> Path:
    path = Path(directory) / MANIFEST
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + '\n')
    return path


def read_manifest(directory: str | Path) -> dict:
    path = Path(directory) / MANIFEST
    try:
        return json.loads(path.read_text())
    except OSError as exc:
        raise ArtifactError(f'no manifest in {directory}: {exc}') from exc
    except json.JSONDecodeError as exc:
        raise ArtifactError(f'{path}: malformed manifest ({exc})') from exc


def save_model(model: TrainedModel, directory: str | Path, config_hash: str = '', extra: dict | None = None) -> dict:
    """Write every artifact of a trained model and return the manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    archive = model.archive
    setup = model.setup
    names = model.problem.parameter_names

    write_matrix(directory / ARTIFACTS['aligned_basis'], model.basis.basis)
    write_matrix(directory / ARTIFACTS['fixed_basis'], model.fixed_basis.basis)
    write_singular_values(directory / ARTIFACTS['aligned_sigma'], model.basis.singular_values)
    write_singular_values(directory / ARTIFACTS['fixed_sigma'], model.fixed_basis.singular_values)
    write_matrix(directory / ARTIFACTS['mapping_basis'], model.mapping_space.dense_jacobian())
    write_matrix(directory / ARTIFACTS['mapping_base'], model.mapping_space.base)
    files = dict(ARTIFACTS)
    if isinstance(model.mapping_space, ReducedMappingSpace):
        write_singular_values(directory / ARTIFACTS['mapping_sigma'], model.mapping_space.singular_values)
    else:
        files.pop('mapping_sigma')
    write_matrix(directory / ARTIFACTS['mapping_snapshots'], np.column_stack(archive.aligned_dofs))
    write_matrix(directory / ARTIFACTS['snapshots_aligned'], np.column_stack(archive.snapshots))
    write_matrix(directory / ARTIFACTS['snapshots_fixed'], np.column_stack(archive.fixed_snapshots))
    write_csv(
        directory / ARTIFACTS['training'],
        ['index', *names, 'objective', 'status'],
        (
            (i + 1, *p, archive.objectives[i], archive.statuses[i])
            for i, p in enumerate(archive.parameters)
        ),
    )
    write_mesh(setup.mesh, directory / ARTIFACTS['mesh'])

    manifest = {
        'problem': model.problem.name,
        'config_hash': config_hash,
        'files': files,
        'state_rank': model.basis.rank,
        'fixed_rank': model.fixed_basis.rank,
        'mapping_rank': model.mapping_space.n_coordinates,
        'snapshot_count': len(archive),
        'parameter_names': list(names),
        'training_parameters': [[float(v) for v in p] for p in archive.parameters],
        'discretization': {
            'n_elements': setup.mesh.n_elements,
            'degree': setup.space.degree,
            'geom_degree': setup.mesh.geom_degree,
            'size': setup.space.size,
        },
    }
    manifest.update(extra or {})
    write_manifest(directory, manifest)
    logger.info('saved model to %s (k=%d, n=%d)', directory, model.basis.rank, model.mapping_space.n_coordinates)
    return manifest


def load_model(directory: str | Path, setup, settings: IftSettings | None = None) -> TrainedModel:
    """Rebuild a trained model on `setup`, checking the artifacts against its discretization."""
    directory = Path(directory)
    manifest = read_manifest(directory)
    if manifest.get('problem') != setup.problem.name:
        raise ArtifactError(f'{directory} holds a {manifest.get("problem")!r} model, not {setup.problem.name!r}')
    files = manifest.get('files', {})

    def matrix(key: str) -> np.ndarray:
        if key not in files:
            raise ArtifactError(f'manifest in {directory} lists no {key} file')
        return read_matrix(directory / files[key])

    basis = matrix('aligned_basis')
    fixed = matrix('fixed_basis')
    if basis.shape[0] != setup.space.size or fixed.shape[0] != setup.space.size:
        raise ArtifactError(
            f'basis rows {basis.shape[0]} do not match the discretization size {setup.space.size}; '
            'check the [mesh] section against the training run'
        )
    jacobian = matrix('mapping_basis')
    base = matrix('mapping_base')[:, 0]
    if base.size != setup.mesh.dim * setup.mesh.n_nodes:
        raise ArtifactError(f'mapping base has {base.size} entries for {setup.mesh.n_nodes} nodes')
    snapshots = matrix('snapshots_aligned')
    fixed_snapshots = matrix('snapshots_fixed')
    aligned = matrix('mapping_snapshots')

    archive = SnapshotArchive(
        parameters=[np.asarray(p, dtype=float) for p in manifest.get('training_parameters', [])],
        snapshots=list(snapshots.T),
        fixed_snapshots=list(fixed_snapshots.T),
        aligned_dofs=list(aligned.T),
    )
    model = TrainedModel(
        setup=setup,
        basis=ReducedBasis(np.zeros(basis.shape[0]), basis, read_singular_values(directory / files['aligned_sigma'])),
        fixed_basis=ReducedBasis(np.zeros(fixed.shape[0]), fixed, read_singular_values(directory / files['fixed_sigma'])),
        mapping_space=MappingFamily(setup.mesh, base, jacobian),
        archive=archive,
        settings=settings or IftSettings(),
    )
    logger.debug('loaded model from %s', directory)
    return model
