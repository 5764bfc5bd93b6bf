"""Error functionals, test-set sweeps and their aggregate report."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .exceptions import LayoutError, TrackingError
from .fe import DGSpace, StateField

logger = logging.getLogger(__name__)

NORMS = ('l2', 'l1')
JUMP_TOLERANCE = 1e-8


def _norm(space: DGSpace, values: np.ndarray, norm: str) -> float:
    # vector 2-norm across components inside the integrand
    pointwise = np.sqrt(np.sum(np.abs(values) ** 2, axis=-1))
    if norm == 'l2':
        return float(np.sqrt(np.sum(space.weights * pointwise ** 2)))
    return float(np.sum(space.weights * pointwise))


def rel_error(space: DGSpace, reference: StateField | np.ndarray, approx: StateField | np.ndarray, norm: str = 'l2') -> float:
    """|U_ref - U| / |U_ref| over the reference domain in the L2 or L1 norm."""
    if norm not in NORMS:
        raise ValueError(f'norm must be one of {NORMS}, got {norm!r}')
    exact = space.evaluate(reference)
    error = exact - space.evaluate(approx)
    size = _norm(space, exact, norm)
    if size == 0.0:
        raise ValueError('relative error against a zero reference field')
    return _norm(space, error, norm) / size


class JumpLocation(NamedTuple):
    node: int
    position: float
    magnitude: float


def jump_locator(
    space: DGSpace,
    field: StateField | np.ndarray,
    tol: float = JUMP_TOLERANCE,
    quantity: Callable[[np.ndarray], np.ndarray] | None = None,
) -> JumpLocation | None:
    """Interface with the largest jump of a 1D field, or None for a continuous field.

    Without `quantity` interfaces are ranked by the trace jump of the state.
    With it they are ranked by the jump in element means of the scalar
    `quantity(values)`, which still finds a shock smeared over a few elements
    by artificial viscosity.
    """
    mesh = space.mesh
    if mesh.dim != 1:
        raise LayoutError('jump location is only defined for 1D fields')
    topology = mesh.topology
    if not topology.n_interior:
        return None
    left, left_face, right, right_face = topology.interior.T
    if quantity is None:
        blocks = space.blocks(field)
        values = space.element.face_values
        trace_l = np.einsum('ib,ibm->im', values[left_face, 0], blocks[left])
        trace_r = np.einsum('ib,ibm->im', values[right_face, 0], blocks[right])
        jumps = np.linalg.norm(trace_l - trace_r, axis=1)
    else:
        weights = space.weights
        means = np.sum(weights * quantity(space.evaluate(field)), axis=1) / np.sum(weights, axis=1)
        jumps = np.abs(means[left] - means[right])
    worst = int(np.argmax(jumps))
    if jumps[worst] < tol:
        return None
    geometry = mesh.geometry
    local = geometry.vertex_ids[geometry.face_vertices[left_face[worst]][0]]
    node = int(mesh.elements[left[worst], local])
    return JumpLocation(node, float(mesh.nodes[node, 0]), float(jumps[worst]))


@dataclass
class SweepRecord:
    mu: np.ndarray
    e_rom: float = np.nan
    e_ift: float = np.nan
    res_rom: float = np.nan
    res_ift: float = np.nan
    iterations: int = 0
    status: str = 'ok'

    @property
    def failed(self) -> bool:
        return self.status == 'failed'

    def row(self) -> list:
        return [*map(float, self.mu), self.e_rom, self.e_ift, self.res_rom, self.res_ift, self.iterations, self.status]


@dataclass
class ErrorReport:
    records: list[SweepRecord] = field(default_factory=list)

    @property
    def succeeded(self) -> list[SweepRecord]:
        return [r for r in self.records if not r.failed]

    @property
    def n_failed(self) -> int:
        return len(self.records) - len(self.succeeded)

    def _maximum(self, name: str) -> float:
        values = [getattr(r, name) for r in self.succeeded if np.isfinite(getattr(r, name))]
        return max(values) if values else np.nan

    @property
    def max_rom(self) -> float:
        return self._maximum('e_rom')

    @property
    def max_ift(self) -> float:
        return self._maximum('e_ift')


def sweep(
    solve: Callable[[np.ndarray], SweepRecord],
    parameters: Sequence[np.ndarray],
    workers: int = 1,
) -> ErrorReport:
    """Run `solve` over the test set; a failing parameter is recorded, never raised."""
    parameters = [np.asarray(mu, dtype=float) for mu in parameters]
    if not parameters:
        raise ValueError('the test set is empty')

    def guarded(mu: np.ndarray) -> SweepRecord:
        try:
            record = solve(mu)
        except (TrackingError, ValueError, FloatingPointError) as exc:
            logger.warning('sweep mu=%s failed: %s', mu.tolist(), exc)
            return SweepRecord(mu, status='failed')
        logger.info(
            'sweep mu=%s e_rom=%.6e e_ift=%.6e status=%s', mu.tolist(), record.e_rom, record.e_ift, record.status
        )
        return record

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            records = list(executor.map(guarded, parameters))
    else:
        records = [guarded(mu) for mu in parameters]
    report = ErrorReport(records)
    logger.info(
        'sweep done n=%d failed=%d E_rom=%.6e E_ift=%.6e', len(records), report.n_failed, report.max_rom, report.max_ift
    )
    return report
