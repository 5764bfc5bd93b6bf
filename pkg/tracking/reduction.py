"""POD bases and fixed-domain reduced-order models (Galerkin and minimum-residual)."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .exceptions import InvalidStateError, LayoutError, NonInvertibleMappingError, SolverError
from .fe import QuadratureRule, StateField
from .hdm import Discretization, assemble_residual, jacobian_products
from .mapping import DomainMapping

logger = logging.getLogger(__name__)

ORTHONORMALITY_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class ReducedBasis:
    """Affine trial space U = offset + basis @ w."""

    offset: np.ndarray
    basis: np.ndarray
    singular_values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=float)
        if basis.ndim == 1:
            basis = basis[:, None]
        offset = np.asarray(self.offset, dtype=float)
        if offset.shape != (basis.shape[0],):
            raise LayoutError(f'offset has shape {offset.shape}, basis has {basis.shape[0]} rows')
        object.__setattr__(self, 'basis', basis)
        object.__setattr__(self, 'offset', offset)
        object.__setattr__(self, 'singular_values', np.asarray(self.singular_values, dtype=float))

    def __repr__(self) -> str:
        return f'ReducedBasis(N={self.size}, k={self.rank})'

    @property
    def size(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    def expand(self, w: np.ndarray) -> np.ndarray:
        return self.offset + self.basis @ np.asarray(w)

    def project(self, U: np.ndarray) -> np.ndarray:
        return self.basis.T @ (np.asarray(U) - self.offset)

    def truncate(self, n: int) -> 'ReducedBasis':
        if not 0 <= n <= self.rank:
            raise ValueError(f'cannot truncate a rank-{self.rank} basis to {n}')
        return ReducedBasis(self.offset, self.basis[:, :n], self.singular_values)


def pod(snapshots: np.ndarray, n: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """First n left singular vectors of the snapshot matrix and all its singular values."""
    snapshots = np.asarray(snapshots, dtype=float)
    if snapshots.ndim != 2 or snapshots.shape[1] < 1:
        raise ValueError('POD needs a matrix with at least one snapshot column')
    M = snapshots.shape[1]
    n = M if n is None else n
    if not 1 <= n <= min(M, snapshots.shape[0]):
        raise ValueError(f'POD rank must lie in [1, {min(M, snapshots.shape[0])}], got {n}')
    modes, sigma, _ = scipy.linalg.svd(snapshots, full_matrices=False)
    return modes[:, :n], sigma


def truncation_rank(sigma: np.ndarray, energy: float) -> int:
    """Smallest n with 1 - sum(sigma[:n]^2) / sum(sigma^2) <= energy."""
    sigma = np.asarray(sigma, dtype=float)
    if energy < 0:
        raise ValueError(f'truncation energy must be non-negative, got {energy}')
    total = float(np.sum(sigma ** 2))
    if total == 0.0:
        return 1
    captured = np.cumsum(sigma ** 2) / total
    hits = np.nonzero(1.0 - captured <= energy)[0]
    return int(hits[0]) + 1 if hits.size else sigma.size


def build_basis(
    snapshots: Sequence[np.ndarray] | np.ndarray,
    n: int | None = None,
    energy: float | None = None,
    offset: np.ndarray | None = None,
) -> ReducedBasis:
    """POD of the offset-subtracted snapshots; all modes unless a rank or energy is given."""
    matrix = np.column_stack([np.asarray(s, dtype=float) for s in snapshots]) if not isinstance(
        snapshots, np.ndarray
    ) else np.asarray(snapshots, dtype=float)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    offset = np.zeros(matrix.shape[0]) if offset is None else np.asarray(offset, dtype=float)
    modes, sigma = pod(matrix - offset[:, None])
    rank = modes.shape[1]
    if energy is not None:
        rank = min(rank, truncation_rank(sigma, energy))
    if n is not None:
        rank = min(rank, n)
    return ReducedBasis(offset, modes[:, :rank], sigma)


def _reduced_state(basis: ReducedBasis, w) -> np.ndarray:
    return basis.expand(w)


def _residual_norm(disc, basis, w, mapping, mu) -> tuple[float, np.ndarray | None]:
    try:
        R = assemble_residual(disc, _reduced_state(basis, w), mapping, mu)
    except (InvalidStateError, NonInvertibleMappingError):
        return np.inf, None
    norm = float(np.linalg.norm(R))
    return (norm, R) if np.isfinite(norm) else (np.inf, None)


def initial_reduced_state(
    disc: Discretization,
    basis: ReducedBasis,
    mapping: DomainMapping,
    mu,
    guesses: Sequence[np.ndarray | StateField] = (),
) -> np.ndarray:
    """Coordinates of the first full state with a finite residual: the guesses, the law's initial state, zero."""
    candidates = [*guesses, disc.initial_guess(mapping, disc.law.check_parameter(mu))]
    for state in candidates:
        vector = state.coefficients if isinstance(state, StateField) else np.asarray(state, dtype=float)
        w = basis.project(vector)
        if np.isfinite(_residual_norm(disc, basis, w, mapping, mu)[0]):
            return w
    w = np.zeros(basis.rank)
    if np.isfinite(_residual_norm(disc, basis, w, mapping, mu)[0]):
        return w
    raise SolverError('no starting state in the span of the basis has a finite residual')


def solve_rom_minres(
    disc: Discretization,
    basis: ReducedBasis,
    mapping: DomainMapping,
    mu,
    w0: np.ndarray | None = None,
    tol: float = 1e-8,
    max_iterations: int = 50,
) -> np.ndarray:
    """Gauss-Newton on 1/2 |R(offset + basis w; mapping, mu)|^2 over w, from w0 or a projected initial state."""
    if w0 is None:
        w0 = initial_reduced_state(disc, basis, mapping, mu)
    w = np.asarray(w0, dtype=float).copy()
    if w.shape != (basis.rank,):
        raise LayoutError(f'initial reduced state needs {basis.rank} entries, got shape {w.shape}')
    norm, R = _residual_norm(disc, basis, w, mapping, mu)
    if R is None:
        raise SolverError('residual at the initial reduced state is not finite')
    if basis.rank == 0:
        return w
    for iteration in range(1, max_iterations + 1):
        A, _ = jacobian_products(disc, _reduced_state(basis, w), mapping, mu, V=basis.basis)
        gradient = float(np.linalg.norm(A.T @ R))
        if gradient <= tol:
            return w
        step = scipy.linalg.lstsq(A, -R, lapack_driver='gelsy')[0]
        if disc.law.linear:
            # one least-squares solve is exact for an affine residual
            w = w + step
            logger.debug('minres iter=%d grad=%.3e linear solve', iteration, gradient)
            return w
        alpha = 1.0
        while alpha >= 2.0 ** -12:
            trial_norm, trial_R = _residual_norm(disc, basis, w + alpha * step, mapping, mu)
            if trial_norm < norm:
                break
            alpha *= 0.5
        else:
            # no decrease along the Gauss-Newton direction: numerically stationary
            logger.debug('minres iter=%d res=%.3e grad=%.3e stalled', iteration, norm, gradient)
            return w
        w, R, norm = w + alpha * step, trial_R, trial_norm
        logger.debug('minres iter=%d res=%.3e step=%.3e', iteration, norm, alpha)
    A, _ = jacobian_products(disc, _reduced_state(basis, w), mapping, mu, V=basis.basis)
    if np.linalg.norm(A.T @ R) <= tol:
        return w
    raise SolverError(f'minimum-residual ROM did not converge in {max_iterations} iterations')


def solve_rom_galerkin(
    disc: Discretization,
    basis: ReducedBasis,
    mapping: DomainMapping,
    mu,
    w0: np.ndarray | None = None,
    tol: float = 1e-8,
    max_iterations: int = 50,
) -> np.ndarray:
    """Newton on the projected equations basis^T R(offset + basis w) = 0."""
    if w0 is None:
        w0 = initial_reduced_state(disc, basis, mapping, mu)
    w = np.asarray(w0, dtype=float).copy()
    if basis.rank == 0:
        return w

    def projected(v):
        norm, R = _residual_norm(disc, basis, v, mapping, mu)
        return (np.inf, None) if R is None else (float(np.linalg.norm(basis.basis.T @ R)), basis.basis.T @ R)

    norm, r = projected(w)
    if r is None:
        raise SolverError('residual at the initial reduced state is not finite')
    for iteration in range(1, max_iterations + 1):
        if norm <= tol:
            return w
        A, _ = jacobian_products(disc, _reduced_state(basis, w), mapping, mu, V=basis.basis)
        reduced = basis.basis.T @ A
        if np.linalg.cond(reduced) > 1e14:
            raise SolverError('reduced Galerkin Jacobian is singular')
        step = scipy.linalg.solve(reduced, -r)
        if disc.law.linear:
            return w + step
        alpha = 1.0
        while alpha >= 2.0 ** -12:
            trial_norm, trial_r = projected(w + alpha * step)
            if trial_norm < norm:
                break
            alpha *= 0.5
        else:
            raise SolverError(f'Galerkin ROM stagnated at |r|={norm:.3e}')
        w, r, norm = w + alpha * step, trial_r, trial_norm
        logger.debug('galerkin iter=%d res=%.3e step=%.3e', iteration, norm, alpha)
    if norm <= tol:
        return w
    raise SolverError(f'Galerkin ROM did not converge in {max_iterations} iterations')


def reduced_state_field(disc: Discretization, basis: ReducedBasis, w) -> StateField:
    return StateField(_reduced_state(basis, w), disc.space.layout)


def l2_project(
    target: Callable[[np.ndarray], np.ndarray],
    basis_functions: Sequence[Callable[[np.ndarray], np.ndarray]],
    rule: QuadratureRule,
) -> tuple[np.ndarray, float]:
    """Coefficients of the L2 projection onto span(basis_functions) and the projection error."""
    x = rule.points[:, 0] if rule.points.ndim == 2 and rule.points.shape[1] == 1 else rule.points
    values = np.column_stack([np.asarray(f(x), dtype=float) for f in basis_functions])
    f = np.asarray(target(x), dtype=float)
    weights = rule.weights
    gram = values.T @ (weights[:, None] * values)
    if np.linalg.cond(gram) > 1e14:
        raise ValueError('Gram matrix of the projection basis is singular')
    coefficients = scipy.linalg.solve(gram, values.T @ (weights * f), assume_a='pos')
    misfit = f - values @ coefficients
    return coefficients, float(np.sqrt(np.sum(weights * misfit ** 2)))
