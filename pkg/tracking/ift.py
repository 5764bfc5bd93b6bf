"""Reduced-order model with implicit feature tracking.

The online problem minimizes

    J(w, c) = 1/2 |R(offset + Phi w; G(c), mu)|^2 + kappa^2/2 |eta(G(c)) - eta(G_0)|^2

jointly over reduced state coordinates w and mapping coordinates c with a
Levenberg-Marquardt iteration (regularizing only the mapping block) and a
Wolfe line search. Offline, the same solver aligns every training snapshot
with the basis built from the snapshots before it.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
import scipy.linalg

from .exceptions import InvalidStateError, LayoutError, NonInvertibleMappingError, SolverError, TrainingError
from .hdm import Discretization, assemble_residual, jacobian_products, solve_hdm
from .mapping import (
    DISTORTION_EPS,
    DomainMapping,
    MappingFamily,
    distortion,
    distortion_gradient,
    mapping_is_invertible,
)
from .metrics import rel_error
from .reduction import ReducedBasis, build_basis, initial_reduced_state, solve_rom_minres

logger = logging.getLogger(__name__)

ARMIJO = 1e-4
CURVATURE = 0.9
MAX_HALVINGS = 30
MAX_EXTENSIONS = 4
MAX_REJECTIONS = 10
KAPPA_RATIO = 1e-2
KAPPA_PERTURBATION = 0.25


class Status(str, enum.Enum):
    CONVERGED = 'converged'
    MAX_ITER = 'max-iter'
    LINE_SEARCH = 'line-search-failure'


@dataclass(frozen=True)
class IftSettings:
    eps1: float = 1e-8
    eps2: float = 1e-8
    max_iterations: int = 200
    kappa: float | None = None
    lm_lambda: float | None = None
    newton_tol: float = 1e-10
    newton_max_iterations: int = 50
    distortion_eps: float = DISTORTION_EPS
    armijo: float = ARMIJO
    curvature: float = CURVATURE
    max_halvings: int = MAX_HALVINGS

    def __post_init__(self):
        for name in ('eps1', 'eps2', 'newton_tol', 'distortion_eps'):
            if getattr(self, name) <= 0:
                raise ValueError(f'{name} must be positive')
        if self.kappa is not None and self.kappa < 0:
            raise ValueError('kappa must be non-negative')
        if self.lm_lambda is not None and self.lm_lambda < 0:
            raise ValueError('lm_lambda must be non-negative')
        if not 0 < self.armijo < self.curvature < 1:
            raise ValueError('line search constants need 0 < armijo < curvature < 1')


# ---------------------------------------------------------------------------
# objective
# ---------------------------------------------------------------------------

class IftObjective:
    """Residual-form objective F = [R(offset + Phi w; G(c)); kappa (eta(G(c)) - eta(G_0))]."""

    def __init__(
        self,
        disc: Discretization,
        basis: ReducedBasis,
        space: MappingFamily,
        kappa: float = 0.0,
        nominal: DomainMapping | None = None,
        eps: float = DISTORTION_EPS,
    ):
        if kappa < 0:
            raise ValueError(f'distortion weight kappa must be non-negative, got {kappa}')
        if basis.size != disc.size:
            raise LayoutError(f'basis has {basis.size} rows, the discretization {disc.size} unknowns')
        self.disc = disc
        self.basis = basis
        self.space = space
        self.kappa = float(kappa)
        self.nominal = DomainMapping.identity(disc.space.mesh) if nominal is None else nominal
        self.eps = eps
        self.reference_distortion = distortion(self.nominal, eps)

    def __repr__(self) -> str:
        return f'IftObjective(k={self.n_state}, n={self.n_mapping}, kappa={self.kappa:.3e})'

    @property
    def n_state(self) -> int:
        return self.basis.rank

    @property
    def n_mapping(self) -> int:
        return self.space.n_coordinates

    @property
    def n_rows(self) -> int:
        return self.disc.size + (self.disc.space.mesh.n_elements if self.kappa > 0 else 0)

    def mapping(self, c) -> DomainMapping:
        return self.space.mapping(np.asarray(c))

    def with_kappa(self, kappa: float) -> 'IftObjective':
        return IftObjective(self.disc, self.basis, self.space, kappa, self.nominal, self.eps)


def evaluate_F(obj: IftObjective, w, c, mu) -> np.ndarray:
    mapping = obj.mapping(c)
    R = assemble_residual(obj.disc, obj.basis.expand(w), mapping, mu)
    if obj.kappa == 0.0:
        return R
    return np.concatenate([R, obj.kappa * (distortion(mapping, obj.eps) - obj.reference_distortion)])


def objective_value(obj: IftObjective, w, c, mu) -> float:
    """J(w, c), or +inf where the mapping is inverted or the state is not finite."""
    try:
        F = evaluate_F(obj, w, c, mu)
    except (NonInvertibleMappingError, InvalidStateError):
        return np.inf
    value = 0.5 * float(np.dot(F, F))
    return value if np.isfinite(value) else np.inf


def _dense(matrix) -> np.ndarray:
    return matrix.toarray() if hasattr(matrix, 'toarray') else np.asarray(matrix, dtype=float)


def evaluate_jacobians(obj: IftObjective, w, c, mu) -> tuple[np.ndarray, np.ndarray]:
    """Dense blocks (dF/dw, dF/dc)."""
    mapping = obj.mapping(c)
    U = obj.basis.expand(w)
    Jw, Jx = jacobian_products(obj.disc, U, mapping, mu, V=obj.basis.basis, B=obj.space.jacobian)
    Jx = _dense(Jx).reshape(obj.disc.size, obj.n_mapping)
    if obj.kappa == 0.0:
        return Jw, Jx
    penalty = obj.kappa * _dense(distortion_gradient(mapping, obj.eps) @ obj.space.jacobian)
    penalty = penalty.reshape(obj.disc.space.mesh.n_elements, obj.n_mapping)
    Jw = np.vstack([Jw, np.zeros((penalty.shape[0], obj.n_state))])
    return Jw, np.vstack([Jx, penalty])


# ---------------------------------------------------------------------------
# Levenberg-Marquardt step, line search, convergence
# ---------------------------------------------------------------------------

class LmStep(NamedTuple):
    dw: np.ndarray
    dc: np.ndarray
    rank_deficient: bool


def lm_step(F: np.ndarray, Jw: np.ndarray, Jc: np.ndarray, lam: float) -> LmStep:
    """Least-squares step of [F; 0] + [[Jw, Jc]; [0, sqrt(lam) I]] [dw; dc] by pivoted QR."""
    if lam < 0:
        raise ValueError(f'regularization must be non-negative, got {lam}')
    F = np.asarray(F, dtype=float)
    k, n = Jw.shape[1], Jc.shape[1]
    if k + n == 0:
        return LmStep(np.zeros(0), np.zeros(0), False)
    A = np.vstack([np.hstack([Jw, Jc]), np.hstack([np.zeros((n, k)), np.sqrt(lam) * np.eye(n)])])
    b = np.concatenate([-F, np.zeros(n)])
    q, r, perm = scipy.linalg.qr(A, mode='economic', pivoting=True)
    diagonal = np.abs(np.diag(r))
    threshold = max(A.shape) * np.finfo(float).eps * (diagonal[0] if diagonal.size else 0.0)
    rank = int(np.sum(diagonal > threshold)) if diagonal.size and diagonal[0] > 0 else 0
    delta = np.zeros(k + n)
    if rank == k + n:
        delta[perm] = scipy.linalg.solve_triangular(r, q.T @ b)
    else:
        delta = scipy.linalg.lstsq(A, b, lapack_driver='gelsd')[0]
    return LmStep(delta[:k], delta[k:], rank < k + n)


class LineSearchResult(NamedTuple):
    alpha: float
    value: float
    success: bool
    evaluations: int


def line_search(
    phi: Callable[[float], float],
    phi0: float,
    slope0: float,
    dphi: Callable[[float], float] | None = None,
    armijo: float = ARMIJO,
    curvature: float = CURVATURE,
    max_halvings: int = MAX_HALVINGS,
) -> LineSearchResult:
    """Backtracking search for a step satisfying the weak Wolfe conditions.

    `phi(alpha)` is the objective along the direction and `slope0` its
    derivative at zero. Infinite values (inverted mappings) are rejected like
    any other insufficient decrease. On failure the result carries the last
    trial step and its value.
    """
    if not slope0 < 0:
        return LineSearchResult(0.0, phi0, False, 0)
    alpha = 1.0
    evaluations = 0
    for _ in range(max_halvings + 1):
        value = phi(alpha)
        evaluations += 1
        if value <= phi0 + armijo * alpha * slope0:
            # sufficient decrease; extend while the slope is still steep
            for _ in range(MAX_EXTENSIONS):
                if dphi is None or dphi(alpha) >= curvature * slope0:
                    break
                longer = 2.0 * alpha
                longer_value = phi(longer)
                evaluations += 1
                if not (longer_value <= phi0 + armijo * longer * slope0 and longer_value < value):
                    break
                alpha, value = longer, longer_value
            return LineSearchResult(alpha, value, True, evaluations)
        last = LineSearchResult(alpha, value, False, evaluations)
        alpha *= 0.5
    return last


def check_convergence(grad_w: np.ndarray, grad_c: np.ndarray, eps1: float = 1e-8, eps2: float = 1e-8) -> bool:
    return bool(np.linalg.norm(grad_w) <= eps1 and np.linalg.norm(grad_c) <= eps2)


# ---------------------------------------------------------------------------
# online solve
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class IftSolution:
    w: np.ndarray
    c: np.ndarray
    objective: float
    residual_norm: float
    grad_w: float
    grad_c: float
    iterations: int
    status: Status
    kappa: float = 0.0
    history: list[dict] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED


def initialize_ift(obj: IftObjective, mu, settings: IftSettings | None = None) -> tuple[np.ndarray, np.ndarray]:
    """c0 = 0 and w0 the minimum-residual solution at the mapping c = 0."""
    settings = settings or IftSettings()
    c0 = np.zeros(obj.n_mapping)
    w0 = solve_rom_minres(obj.disc, obj.basis, obj.mapping(c0), mu, tol=settings.eps1)
    return w0, c0


def _seeded_signs(n: int) -> np.ndarray:
    return np.random.default_rng(0).choice([-1.0, 1.0], size=n)


def auto_kappa(obj: IftObjective, mu, w, c, ratio: float = KAPPA_RATIO) -> float:
    """kappa with kappa^2 J_map ~ ratio J_err for a perturbation of a quarter element size."""
    if obj.n_mapping == 0:
        return 0.0
    R = assemble_residual(obj.disc, obj.basis.expand(w), obj.mapping(c), mu)
    error = 0.5 * float(np.dot(R, R))
    signs = _seeded_signs(obj.n_mapping)
    displacement = float(np.max(np.abs(_dense(obj.space.jacobian @ signs))))
    if error == 0.0 or displacement == 0.0:
        return 0.0
    mesh = obj.disc.space.mesh
    h = float(np.mean(np.real(obj.nominal.element_sizes()))) ** (1.0 / mesh.dim)
    t = KAPPA_PERTURBATION * h / displacement
    for _ in range(10):
        perturbed = obj.mapping(np.asarray(c, dtype=float) + t * signs)
        if mapping_is_invertible(perturbed):
            break
        t *= 0.5
    else:
        return 0.0
    gap = distortion(perturbed, obj.eps) - obj.reference_distortion
    penalty = 0.5 * float(np.dot(gap, gap))
    if penalty == 0.0:
        return 0.0
    return float(np.sqrt(ratio * error / penalty))


def _complex_objective(obj: IftObjective, w, c, mu):
    F = evaluate_F(obj, w, c, mu)
    return 0.5 * np.sum(F * F)


def solve_ift(
    obj: IftObjective,
    mu,
    w0: np.ndarray | None = None,
    c0: np.ndarray | None = None,
    settings: IftSettings | None = None,
) -> IftSolution:
    settings = settings or IftSettings()
    mu = obj.disc.law.check_parameter(mu)
    if w0 is None or c0 is None:
        w_init, c_init = initialize_ift(obj, mu, settings)
        w0 = w_init if w0 is None else w0
        c0 = c_init if c0 is None else c0
    w = np.asarray(w0, dtype=float).copy()
    c = np.asarray(c0, dtype=float).copy()
    if w.shape != (obj.n_state,) or c.shape != (obj.n_mapping,):
        raise LayoutError(f'initial point needs shapes ({obj.n_state},), ({obj.n_mapping},)')

    F = evaluate_F(obj, w, c, mu)
    value = 0.5 * float(np.dot(F, F))
    if not np.isfinite(value):
        raise SolverError('objective at the initial point is not finite')
    adaptive = settings.lm_lambda is None
    lam = 0.0 if adaptive else settings.lm_lambda
    lam_ready = not adaptive
    alpha = 0.0
    rejections = 0
    history: list[dict] = []
    status = Status.MAX_ITER
    iteration = 0
    grad_w = grad_c = np.inf

    while True:
        Jw, Jc = evaluate_jacobians(obj, w, c, mu)
        gw, gc = Jw.T @ F, Jc.T @ F
        grad_w, grad_c = float(np.linalg.norm(gw)), float(np.linalg.norm(gc))
        if not lam_ready:
            lam = 1e-4 * float(np.linalg.norm(Jc.T @ Jc, ord=np.inf)) if Jc.size else 0.0
            lam_ready = True
        history.append({
            'iteration': iteration, 'objective': value, 'grad_w': grad_w,
            'grad_c': grad_c, 'lam': lam, 'alpha': alpha,
        })
        logger.debug(
            'lm iter=%d obj=%.6e grad_w=%.3e grad_c=%.3e lam=%.3e alpha=%.3e',
            iteration, value, grad_w, grad_c, lam, alpha,
        )
        if check_convergence(gw, gc, settings.eps1, settings.eps2):
            status = Status.CONVERGED
            break
        if iteration >= settings.max_iterations:
            break
        iteration += 1

        step = lm_step(F, Jw, Jc, lam)
        if step.rank_deficient and adaptive and rejections < MAX_REJECTIONS:
            lam = max(10.0 * lam, 1e-12)
            rejections += 1
            alpha = 0.0
            continue
        slope = float(gw @ step.dw + gc @ step.dc)

        def phi(a, dw=step.dw, dc=step.dc):
            return objective_value(obj, w + a * dw, c + a * dc, mu)

        def dphi(a, dw=step.dw, dc=step.dc, h=1e-20):
            try:
                return float(np.imag(_complex_objective(obj, w + (a + 1j * h) * dw, c + (a + 1j * h) * dc, mu)) / h)
            except (NonInvertibleMappingError, InvalidStateError):
                return 0.0

        search = line_search(
            phi, value, slope, dphi, settings.armijo, settings.curvature, settings.max_halvings
        )
        if not search.success:
            if adaptive and rejections < MAX_REJECTIONS:
                lam = max(10.0 * lam, 1e-12)
                rejections += 1
                alpha = 0.0
                continue
            status = Status.LINE_SEARCH
            logger.warning('lm iter=%d obj=%.6e line search failed, keeping the best iterate', iteration, value)
            break
        rejections = 0
        alpha = search.alpha
        w = w + alpha * step.dw
        c = c + alpha * step.dc
        F = evaluate_F(obj, w, c, mu)
        value = 0.5 * float(np.dot(F, F))
        if adaptive and alpha >= 1.0:
            lam /= 10.0

    residual_norm = float(np.linalg.norm(F[:obj.disc.size]))
    logger.info(
        'lm done status=%s iters=%d obj=%.6e res=%.3e grad_w=%.3e grad_c=%.3e',
        status.value, iteration, value, residual_norm, grad_w, grad_c,
    )
    return IftSolution(
        w=w, c=c, objective=value, residual_norm=residual_norm, grad_w=grad_w, grad_c=grad_c,
        iterations=iteration, status=status, kappa=obj.kappa, history=history,
    )


def prepare_objective(
    disc: Discretization,
    basis: ReducedBasis,
    space: MappingFamily,
    mu,
    settings: IftSettings,
    c0: np.ndarray | None = None,
    guess: np.ndarray | None = None,
) -> tuple[IftObjective, np.ndarray, np.ndarray]:
    """Objective with kappa resolved for this solve, plus the starting point (w0, c0).

    `guess` is a full state (usually the nearest archived snapshot) whose
    projection seeds the minimum-residual solve for w0.
    """
    obj = IftObjective(disc, basis, space, 0.0, eps=settings.distortion_eps)
    c0 = np.zeros(obj.n_mapping) if c0 is None else np.asarray(c0, dtype=float)
    if c0.size and not mapping_is_invertible(obj.mapping(c0)):
        logger.warning('starting mapping is inverted, restarting from c = 0')
        c0 = np.zeros(obj.n_mapping)
    start = initial_reduced_state(disc, basis, obj.mapping(c0), mu, () if guess is None else (guess,))
    try:
        w0 = solve_rom_minres(disc, basis, obj.mapping(c0), mu, start, tol=settings.eps1)
    except SolverError as exc:
        logger.info('minimum-residual start did not converge (%s), starting from the projection', exc)
        w0 = start
    kappa = auto_kappa(obj, mu, w0, c0) if settings.kappa is None else settings.kappa
    return obj.with_kappa(kappa), w0, c0


# ---------------------------------------------------------------------------
# offline training
# ---------------------------------------------------------------------------

class Alignment(NamedTuple):
    dofs: np.ndarray
    c: np.ndarray
    objective: float
    status: str


def align_snapshot(
    disc: Discretization,
    basis: ReducedBasis,
    mu,
    space: MappingFamily,
    c_init: np.ndarray | None = None,
    settings: IftSettings | None = None,
    guess: np.ndarray | None = None,
) -> Alignment:
    """Mapping that aligns the solution at mu with the current basis; identity if the solve fails."""
    settings = settings or IftSettings()
    if basis.rank == 0:
        raise ValueError('alignment needs a nonempty basis')
    try:
        obj, w0, c0 = prepare_objective(disc, basis, space, mu, settings, c_init, guess)
        solution = solve_ift(obj, mu, w0, c0, settings)
    except (SolverError, NonInvertibleMappingError, InvalidStateError) as exc:
        logger.warning('alignment at mu=%s failed (%s); using the identity mapping', np.ravel(mu).tolist(), exc)
        c = np.zeros(space.n_coordinates)
        return Alignment(space.dofs(c), c, np.nan, 'fallback')
    # reduced coordinates are discarded; only the mapping is kept
    return Alignment(space.dofs(solution.c), solution.c, solution.objective, solution.status.value)


@dataclass(eq=False)
class SnapshotArchive:
    parameters: list[np.ndarray] = field(default_factory=list)
    snapshots: list[np.ndarray] = field(default_factory=list)
    fixed_snapshots: list[np.ndarray] = field(default_factory=list)
    aligned_dofs: list[np.ndarray] = field(default_factory=list)
    coordinates: list[np.ndarray] = field(default_factory=list)
    objectives: list[float] = field(default_factory=list)
    statuses: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.snapshots)

    def nearest(self, mu: np.ndarray, scale: np.ndarray) -> int:
        """Index of the archived parameter closest to mu in scaled distance."""
        distances = [float(np.linalg.norm((p - mu) / scale)) for p in self.parameters[:len(self.snapshots)]]
        return int(np.argmin(distances))


@dataclass(eq=False)
class TrainedModel:
    """Everything the online stage needs: both bases, the online mapping space and the archive."""

    setup: object
    basis: ReducedBasis
    fixed_basis: ReducedBasis
    mapping_space: MappingFamily
    archive: SnapshotArchive
    settings: IftSettings = field(default_factory=IftSettings)

    @property
    def problem(self):
        return self.setup.problem

    @property
    def disc(self) -> Discretization:
        return self.setup.disc

    def nearest_snapshot(self, mu, fixed: bool = False) -> np.ndarray:
        """Archived snapshot (aligned, or on the reference mapping) whose parameter is closest to mu."""
        index = self.archive.nearest(np.asarray(mu, dtype=float), _parameter_scale(self.problem))
        return (self.archive.fixed_snapshots if fixed else self.archive.snapshots)[index]


def _parameter_scale(problem) -> np.ndarray:
    return np.array([max(hi - lo, 1e-12) for lo, hi in problem.bounds])


def train_fixed(setup, parameters: Sequence[np.ndarray], settings: IftSettings | None = None) -> list[np.ndarray]:
    """HDM snapshots on the reference mapping."""
    settings = settings or IftSettings()
    identity = setup.nominal
    snapshots = []
    for index, mu in enumerate(parameters, start=1):
        state = solve_hdm(setup.disc, identity, mu, tol=settings.newton_tol, max_iterations=settings.newton_max_iterations)
        snapshots.append(state.coefficients)
        logger.info('fixed snapshot=%d/%d mu=%s', index, len(parameters), np.ravel(mu).tolist())
    return snapshots


def _solve_aligned(setup, mapping, mu, initial, settings):
    disc = setup.disc
    try:
        return solve_hdm(disc, mapping, mu, initial, settings.newton_tol, settings.newton_max_iterations)
    except SolverError:
        if initial is None:
            raise
        logger.info('warm-started HDM failed at mu=%s, restarting with continuation', np.ravel(mu).tolist())
        return solve_hdm(disc, mapping, mu, None, settings.newton_tol, settings.newton_max_iterations)


def offline_train(
    setup,
    parameters: Sequence[np.ndarray],
    settings: IftSettings | None = None,
    energy: float | None = None,
    n_basis: int | None = None,
    n_mapping: int | None = None,
    align: bool = True,
) -> TrainedModel:
    """Grow the basis snapshot by snapshot, aligning each new snapshot with the basis so far."""
    settings = settings or IftSettings()
    problem = setup.problem
    parameters = [problem.check_parameter(mu) for mu in parameters]
    if not parameters:
        raise ValueError('the training set is empty')
    archive = SnapshotArchive(parameters=list(parameters))
    scale = _parameter_scale(problem)
    offline_space = problem.offline_mapping_space(setup)
    total = len(parameters)

    try:
        archive.fixed_snapshots = train_fixed(setup, parameters, settings)
    except (SolverError, NonInvertibleMappingError, InvalidStateError) as exc:
        raise TrainingError(f'HDM failed on the reference mapping: {exc}', archive) from exc

    identity_c = np.zeros(offline_space.n_coordinates)
    archive.snapshots.append(archive.fixed_snapshots[0])
    archive.aligned_dofs.append(offline_space.dofs(identity_c))
    archive.coordinates.append(identity_c)
    archive.objectives.append(0.0)
    archive.statuses.append('reference')
    logger.info('align snapshot=1/%d obj=%.6e status=%s', total, 0.0, 'reference')

    for k in range(1, total):
        mu = parameters[k]
        basis = build_basis(archive.snapshots, energy=energy)
        if align:
            nearest = archive.nearest(mu, scale)
            initial = archive.snapshots[nearest]
            alignment = align_snapshot(
                setup.disc, basis, mu, offline_space, archive.coordinates[nearest], settings, guess=initial
            )
        else:
            alignment = Alignment(offline_space.dofs(identity_c), identity_c, np.nan, 'skipped')
            initial = None
        mapping = DomainMapping(setup.mesh, alignment.dofs)
        try:
            snapshot = _solve_aligned(setup, mapping, mu, initial, settings) if align else None
        except (SolverError, NonInvertibleMappingError, InvalidStateError) as exc:
            raise TrainingError(f'HDM failed at training parameter {k + 1}: {exc}', archive) from exc
        archive.snapshots.append(archive.fixed_snapshots[k] if snapshot is None else snapshot.coefficients)
        archive.aligned_dofs.append(alignment.dofs)
        archive.coordinates.append(alignment.c)
        archive.objectives.append(alignment.objective)
        archive.statuses.append(alignment.status)
        logger.info('align snapshot=%d/%d obj=%.6e status=%s', k + 1, total, alignment.objective, alignment.status)

    basis = build_basis(archive.snapshots, n=n_basis, energy=energy)
    fixed_basis = build_basis(archive.fixed_snapshots, n=n_basis, energy=energy)
    mapping_space = problem.online_mapping_space(setup, archive.aligned_dofs, n_mapping)
    logger.info(
        'training done snapshots=%d state_rank=%d fixed_rank=%d mapping_rank=%d',
        total, basis.rank, fixed_basis.rank, mapping_space.n_coordinates,
    )
    return TrainedModel(setup, basis, fixed_basis, mapping_space, archive, settings)


# ---------------------------------------------------------------------------
# objective landscape
# ---------------------------------------------------------------------------

class LandscapePoint(NamedTuple):
    c: float
    residual_objective: float
    projection_error: float


def objective_landscape(
    obj: IftObjective,
    mu,
    c_values: Sequence[float],
    settings: IftSettings | None = None,
) -> list[LandscapePoint]:
    """Residual-based and error-based objectives along a one-coordinate mapping family."""
    settings = settings or IftSettings()
    if obj.n_mapping != 1:
        raise ValueError('the landscape is defined for one-coordinate mapping families')
    disc = obj.disc
    points = []
    for value in c_values:
        c = np.array([float(value)])
        mapping = obj.mapping(c)
        if not mapping_is_invertible(mapping):
            points.append(LandscapePoint(float(value), np.inf, np.inf))
            continue
        w = solve_rom_minres(disc, obj.basis, mapping, mu, tol=settings.eps1)
        R = assemble_residual(disc, obj.basis.expand(w), mapping, mu)
        reference = solve_hdm(disc, mapping, mu, tol=settings.newton_tol, max_iterations=settings.newton_max_iterations)
        projection = obj.basis.expand(obj.basis.project(reference.coefficients))
        error = rel_error(disc.space, reference, projection)
        points.append(LandscapePoint(float(value), 0.5 * float(np.dot(R, R)), error))
        logger.debug('landscape c=%.4f E1=%.6e E2=%.6e', value, points[-1].residual_objective, error)
    return points
