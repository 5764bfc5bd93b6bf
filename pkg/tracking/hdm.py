"""High-dimensional model: DG residual of a conservation law pulled back to the reference domain.

The residual of element K tested with basis function v is

    -int_K F : grad_0 v  +  oint_dK v Fhat(u-, u+, n~)  -  int_K v S

with F = g f G^{-T} and S = g s, where n~ = cof(dx/dxi) N^ dA^ is the mapped
face normal. Nonlinear laws may add elementwise artificial viscosity,
discretized with symmetric interior penalty terms on interior faces.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from .derivatives import (
    ColoredPattern,
    complex_step_jacobian,
    csafe_max,
    csafe_maximum,
    csafe_minimum,
    directional_derivatives,
)
from .exceptions import InvalidStateError, NonInvertibleMappingError, SolverError
from .fe import DGSpace, StateField, cofactor, determinant, encode
from .mapping import DomainMapping

logger = logging.getLogger(__name__)

SINGULAR_JACOBIAN = 1e-14
SENSOR_WIDTH = 0.5
CONTINUATION = (4.0, 2.0, 1.0)
STAGE_TOLERANCE = 1e-6
MIN_STEP = 1.0 / 2 ** 12
PTC_INITIAL_CFL = 1.0
PTC_MAX_CFL = 1e10
PTC_MAX_STEPS = 300


class ConservationLaw(ABC):
    """A parametrized system of m first-order conservation laws in d dimensions.

    Every method is vectorized over leading axes and must accept complex
    arrays without using |.|, max or comparisons on anything but real parts.
    """

    n_components: int = 1
    dim: int = 1
    linear: bool = False
    surfaces: tuple[int, ...] = ()
    viscosity_scale: float = 0.0
    parameter_names: tuple[str, ...] = ()

    @abstractmethod
    def flux(self, u: np.ndarray, x: np.ndarray, mu: np.ndarray) -> np.ndarray:
        """Physical flux, shape (..., m, d)."""

    def source(self, u: np.ndarray, x: np.ndarray, mu: np.ndarray) -> np.ndarray:
        return np.zeros_like(u)

    @abstractmethod
    def numerical_flux(
        self, ul: np.ndarray, ur: np.ndarray, normal: np.ndarray, x: np.ndarray, mu: np.ndarray
    ) -> np.ndarray:
        """Flux through a face with scaled (non-unit) normal, shape (..., m)."""

    @abstractmethod
    def boundary_state(
        self, u: np.ndarray, x: np.ndarray, normal: np.ndarray, surface: int, mu: np.ndarray
    ) -> np.ndarray:
        """Exterior (ghost) state on a boundary surface."""

    @abstractmethod
    def initial_state(self, x: np.ndarray, mu: np.ndarray) -> np.ndarray:
        """Starting guess for the nonlinear solver at physical points x."""

    def wave_speed(self, u: np.ndarray, x: np.ndarray, mu: np.ndarray) -> np.ndarray:
        return np.ones(u.shape[:-1])

    def check_parameter(self, mu) -> np.ndarray:
        mu = np.atleast_1d(np.asarray(mu, dtype=float))
        if mu.shape != (len(self.parameter_names),):
            raise ValueError(f'expected parameters {self.parameter_names}, got {mu.tolist()}')
        return mu


def transform_flux_source(w, G, g, mu, law: ConservationLaw, x) -> tuple[np.ndarray, np.ndarray]:
    """Reference-domain flux F = g f G^{-T} and source S = g s at states w."""
    g = np.asarray(g)
    if np.any(np.abs(np.real(g)) < SINGULAR_JACOBIAN):
        raise NonInvertibleMappingError('mapping Jacobian is singular')
    F = np.einsum('...mk,...kj->...mj', law.flux(w, x, mu), cofactor(np.asarray(G)))
    S = g[..., None] * law.source(w, x, mu)
    return F, S


def _physical_gradients(jac: np.ndarray, reference_gradients: np.ndarray) -> np.ndarray:
    """grad_x phi = (dx/dxi)^{-T} grad_xi phi, shape (..., n_basis, d)."""
    return np.einsum('...jk,...bk->...bj', cofactor(jac), reference_gradients) / determinant(jac)[..., None, None]


class ResidualWorkspace:
    """Basis and geometry tables of one DG space, gathered per face for vectorized assembly."""

    def __init__(self, space: DGSpace):
        mesh = space.mesh
        element = space.element
        geometry = mesh.geometry
        topology = mesh.topology
        self.space = space

        self.values = element.basis_values
        self.reference_gradients = element.basis_gradients
        self.weights = element.quadrature.weights
        self.geometry_values = space.geometry_values
        self.geometry_gradients = space.geometry_gradients
        self.reference_inverse = space.inverse_jacobians
        self.volume_weights = space.weights
        self.gradients = space.gradients

        self.face_values = element.face_values
        self.face_gradients = element.face_gradients
        self.face_normals = element.scaled_face_normals
        self.face_geometry_values = np.stack([geometry.values(p) for p in element.face_points])
        self.face_geometry_gradients = np.stack([geometry.gradients(p) for p in element.face_points])

        self.left, self.left_face, self.right, self.right_face = topology.interior.T
        n_face_points = element.face_weights.size
        forward = np.arange(n_face_points)
        self.right_points = np.where(topology.flipped[:, None], forward[::-1], forward)
        self.boundary_element, self.boundary_face, self.boundary_surface = mesh.boundary_faces.T

        p = space.degree
        self.penalty = 2.0 * (p + 1) ** 2
        self.sensor_offset = -3.0 - 4.0 * np.log10(max(p, 1))
        if p > 0:
            root_weights = np.sqrt(self.weights)
            q, _ = np.linalg.qr(root_weights[:, None] * element.monomials(element.quadrature.points))
            top = element.exponents.sum(axis=1) == p
            self.high_modes = (q[:, top].T * root_weights) @ self.values
        else:
            self.high_modes = np.zeros((0, element.n_basis))


class Discretization:
    """A conservation law on a DG space: the high-dimensional model."""

    def __init__(self, space: DGSpace, law: ConservationLaw):
        if law.dim != space.mesh.dim or law.n_components != space.n_components:
            raise ValueError('law dimensions do not match the DG space')
        missing = set(space.mesh.surfaces) - set(law.surfaces)
        if missing:
            raise ValueError(f'no boundary condition for surfaces {sorted(missing)}')
        self.space = space
        self.law = law
        self.workspace = ResidualWorkspace(space)

    def __repr__(self) -> str:
        return f'Discretization({type(self.law).__name__}, p={self.space.degree}, n_el={self.space.mesh.n_elements})'

    @property
    def size(self) -> int:
        return self.space.size

    @cached_property
    def state_pattern(self) -> ColoredPattern:
        block = self.space.element.n_basis * self.space.n_components
        return ColoredPattern.from_blocks(self.space.mesh.topology.neighbours, block, block)

    @cached_property
    def mapping_pattern(self) -> ColoredPattern:
        topology = self.space.mesh.topology
        block = self.space.element.n_basis * self.space.n_components
        return ColoredPattern.from_blocks(topology.neighbours @ topology.incidence, block, self.space.mesh.dim)

    def initial_guess(self, mapping: DomainMapping, mu: np.ndarray) -> np.ndarray:
        field = encode(self.space, lambda x: self.law.initial_state(x, mu), coordinates=np.real(mapping.dofs))
        return field.coefficients

    def residual(self, U: np.ndarray, dofs: np.ndarray, mu: np.ndarray, viscosity: float | None = None) -> np.ndarray:
        ws = self.workspace
        space = self.space
        mesh = space.mesh
        law = self.law
        if not np.all(np.isfinite(U)):
            raise InvalidStateError('state contains non-finite values')
        blocks = U.reshape(space.layout.shape)
        X = dofs.reshape(mesh.n_nodes, mesh.dim)[mesh.elements]

        jac = np.einsum('qgk,egj->eqjk', ws.geometry_gradients, X)
        G = np.einsum('eqjk,eqkl->eqjl', jac, ws.reference_inverse)
        g = determinant(G)
        if np.any(np.real(g) <= 0.0):
            raise NonInvertibleMappingError(f'mapping Jacobian determinant {np.real(g).min():.3e} <= 0')
        x = np.einsum('qg,egj->eqj', ws.geometry_values, X)
        u = np.einsum('qb,ebm->eqm', ws.values, blocks)
        F, S = transform_flux_source(u, G, g, mu, law, x)
        R = -np.einsum('eq,eqmj,eqbj->ebm', ws.volume_weights, F, ws.gradients)
        R = R - np.einsum('eq,eqm,qb->ebm', ws.volume_weights, S, ws.values)

        # interior faces, normal and flux taken from the left element
        XL, XR = X[ws.left], X[ws.right]
        phi_l = ws.face_values[ws.left_face]
        phi_r = ws.face_values[ws.right_face[:, None], ws.right_points]
        u_l = np.einsum('iqb,ibm->iqm', phi_l, blocks[ws.left])
        u_r = np.einsum('iqb,ibm->iqm', phi_r, blocks[ws.right])
        jac_l = np.einsum('iqgk,igj->iqjk', ws.face_geometry_gradients[ws.left_face], XL)
        normal = np.einsum('iqjk,iqk->iqj', cofactor(jac_l), ws.face_normals[ws.left_face])
        x_face = np.einsum('iqg,igj->iqj', ws.face_geometry_values[ws.left_face], XL)
        flux = law.numerical_flux(u_l, u_r, normal, x_face, mu)
        R = R.astype(np.result_type(R, flux), copy=False)
        np.add.at(R, ws.left, np.einsum('iqb,iqm->ibm', phi_l, flux))
        np.add.at(R, ws.right, -np.einsum('iqb,iqm->ibm', phi_r, flux))

        # boundary faces
        XB = X[ws.boundary_element]
        phi_b = ws.face_values[ws.boundary_face]
        u_b = np.einsum('iqb,ibm->iqm', phi_b, blocks[ws.boundary_element])
        jac_b = np.einsum('iqgk,igj->iqjk', ws.face_geometry_gradients[ws.boundary_face], XB)
        normal_b = np.einsum('iqjk,iqk->iqj', cofactor(jac_b), ws.face_normals[ws.boundary_face])
        x_b = np.einsum('iqg,igj->iqj', ws.face_geometry_values[ws.boundary_face], XB)
        ghost = np.zeros(u_b.shape, dtype=np.result_type(u_b, normal_b, x_b, float))
        for surface in np.unique(ws.boundary_surface):
            on = ws.boundary_surface == surface
            ghost[on] = law.boundary_state(u_b[on], x_b[on], normal_b[on], int(surface), mu)
        flux_b = law.numerical_flux(u_b, ghost, normal_b, x_b, mu)
        R = R.astype(np.result_type(R, flux_b), copy=False)
        np.add.at(R, ws.boundary_element, np.einsum('iqb,iqm->ibm', phi_b, flux_b))

        scale = law.viscosity_scale if viscosity is None else viscosity
        if scale > 0.0 and space.degree > 0:
            R = R + self._viscous_terms(scale, blocks, u, x, g, jac, X, u_l, u_r, jac_l, normal, phi_l, phi_r, mu)
        return R.ravel()

    def _element_viscosity(self, scale, blocks, u, x, g, mu) -> tuple[np.ndarray, np.ndarray]:
        ws = self.workspace
        d = self.space.mesh.dim
        size = np.einsum('eq,eq->e', ws.volume_weights, g)
        h = size ** (1.0 / d)
        speed = csafe_max(self.law.wave_speed(u, x, mu), axis=1)
        high = np.einsum('kb,eb->ek', ws.high_modes, blocks[..., 0])
        total = np.einsum('q,eq->e', ws.weights, u[..., 0] * u[..., 0])
        sensor = np.log10(np.sum(high * high, axis=1) / (total + 1e-30) + 1e-30)
        switch = 1.0 / (1.0 + np.exp(-(sensor - ws.sensor_offset) / SENSOR_WIDTH))
        return scale * h / max(self.space.degree, 1) * speed * switch, h

    def _viscous_terms(self, scale, blocks, u, x, g, jac, X, u_l, u_r, jac_l, normal, phi_l, phi_r, mu):
        ws = self.workspace
        eps, h = self._element_viscosity(scale, blocks, u, x, g, mu)

        det = determinant(jac)
        grad_phi = _physical_gradients(jac, ws.reference_gradients[None])
        grad_u = np.einsum('eqbj,ebm->eqmj', grad_phi, blocks)
        R = eps[:, None, None] * np.einsum('q,eq,eqmj,eqbj->ebm', ws.weights, det, grad_u, grad_phi)

        XR = X[ws.right]
        jac_r = np.einsum(
            'iqgk,igj->iqjk', ws.face_geometry_gradients[ws.right_face[:, None], ws.right_points], XR
        )
        grad_phi_l = _physical_gradients(jac_l, ws.face_gradients[ws.left_face])
        grad_phi_r = _physical_gradients(jac_r, ws.face_gradients[ws.right_face[:, None], ws.right_points])
        grad_u_l = np.einsum('iqbj,ibm->iqmj', grad_phi_l, blocks[ws.left])
        grad_u_r = np.einsum('iqbj,ibm->iqmj', grad_phi_r, blocks[ws.right])
        eps_l, eps_r = eps[ws.left], eps[ws.right]

        average = 0.5 * (eps_l[:, None, None, None] * grad_u_l + eps_r[:, None, None, None] * grad_u_r)
        average_n = np.einsum('iqmj,iqj->iqm', average, normal)
        jump = u_l - u_r
        area = np.sqrt(np.sum(normal * normal, axis=-1))
        sigma = ws.penalty * csafe_maximum(eps_l, eps_r) / csafe_minimum(h[ws.left], h[ws.right])
        penalty = sigma[:, None, None] * area[..., None] * jump
        symmetric_l = 0.5 * eps_l[:, None, None] * np.einsum('iqbj,iqj->iqb', grad_phi_l, normal)
        symmetric_r = 0.5 * eps_r[:, None, None] * np.einsum('iqbj,iqj->iqb', grad_phi_r, normal)

        R = R.astype(np.result_type(R, penalty), copy=False)
        np.add.at(
            R, ws.left,
            np.einsum('iqb,iqm->ibm', phi_l, penalty - average_n) - np.einsum('iqb,iqm->ibm', symmetric_l, jump),
        )
        np.add.at(
            R, ws.right,
            np.einsum('iqb,iqm->ibm', phi_r, average_n - penalty) - np.einsum('iqb,iqm->ibm', symmetric_r, jump),
        )
        return R

    def lumped_mass(self, dofs: np.ndarray) -> np.ndarray:
        """Element measure split evenly over the element's coefficients."""
        space = self.space
        sizes = np.abs(np.real(DomainMapping(space.mesh, np.real(dofs)).element_sizes()))
        per_node = sizes / space.element.n_basis
        return np.repeat(per_node, space.element.n_basis * space.n_components)

    def time_steps(self, U: np.ndarray, dofs: np.ndarray, mu: np.ndarray, cfl: float) -> np.ndarray:
        space = self.space
        ws = self.workspace
        X = dofs.reshape(space.mesh.n_nodes, space.mesh.dim)[space.mesh.elements]
        x = np.einsum('qg,egj->eqj', ws.geometry_values, X)
        u = np.einsum('qb,ebm->eqm', ws.values, U.reshape(space.layout.shape))
        speed = np.real(self.law.wave_speed(u, x, mu)).max(axis=1)
        sizes = DomainMapping(space.mesh, dofs).element_sizes() ** (1.0 / space.mesh.dim)
        steps = cfl * sizes / np.maximum(speed, 1e-12) / max(space.degree, 1)
        return np.repeat(steps, space.element.n_basis * space.n_components)


def _state_vector(disc: Discretization, U) -> np.ndarray:
    return disc.space.blocks(U).ravel()


def assemble_residual(
    disc: Discretization, U, mapping: DomainMapping, mu, viscosity: float | None = None
) -> np.ndarray:
    mu = disc.law.check_parameter(mu)
    return disc.residual(_state_vector(disc, U), mapping.dofs, mu, viscosity)


def assemble_jacobians(
    disc: Discretization, U, mapping: DomainMapping, mu, viscosity: float | None = None
) -> tuple[sparse.csr_matrix, sparse.csr_matrix]:
    """(dR/dU, dR/dx) as sparse matrices of shape (N, N) and (N, d * n_nodes)."""
    mu = disc.law.check_parameter(mu)
    U = np.real(_state_vector(disc, U)).astype(float)
    dofs = np.real(mapping.dofs).astype(float)
    state = complex_step_jacobian(lambda Z: disc.residual(Z, dofs, mu, viscosity), U, disc.state_pattern)
    geometry = complex_step_jacobian(lambda Y: disc.residual(U, Y, mu, viscosity), dofs, disc.mapping_pattern)
    return state, geometry


def state_jacobian(disc: Discretization, U, mapping: DomainMapping, mu, viscosity: float | None = None):
    mu = disc.law.check_parameter(mu)
    U = np.real(_state_vector(disc, U)).astype(float)
    dofs = np.real(mapping.dofs).astype(float)
    return complex_step_jacobian(lambda Z: disc.residual(Z, dofs, mu, viscosity), U, disc.state_pattern)


def jacobian_products(
    disc: Discretization,
    U,
    mapping: DomainMapping,
    mu,
    V: np.ndarray | None = None,
    B=None,
) -> tuple[np.ndarray | None, np.ndarray | None]:
    """(dR/dU V, dR/dx B), by directional complex steps or sparse products, whichever is cheaper."""
    mu = disc.law.check_parameter(mu)
    U = np.real(_state_vector(disc, U)).astype(float)
    dofs = np.real(mapping.dofs).astype(float)

    def along_state(Z):
        return disc.residual(Z, dofs, mu)

    def along_mapping(Y):
        return disc.residual(U, Y, mu)

    state_product = mapping_product = None
    if V is not None:
        V = np.asarray(V, dtype=float).reshape(U.size, -1)
        if V.shape[1] <= disc.state_pattern.n_colors:
            state_product = directional_derivatives(along_state, U, V)
        else:
            state_product = complex_step_jacobian(along_state, U, disc.state_pattern) @ V
    if B is not None:
        n_columns = B.shape[1]
        if n_columns <= disc.mapping_pattern.n_colors:
            dense = B.toarray() if sparse.issparse(B) else np.asarray(B, dtype=float)
            mapping_product = directional_derivatives(along_mapping, dofs, dense.reshape(dofs.size, -1))
        else:
            product = complex_step_jacobian(along_mapping, dofs, disc.mapping_pattern) @ B
            mapping_product = product.toarray() if sparse.issparse(product) else np.asarray(product)
    return state_product, mapping_product


def _trial_norm(disc: Discretization, U, dofs, mu, viscosity) -> tuple[float, np.ndarray | None]:
    try:
        R = disc.residual(U, dofs, mu, viscosity)
    except (InvalidStateError, NonInvertibleMappingError):
        return np.inf, None
    norm = float(np.linalg.norm(R))
    return (norm, R) if np.isfinite(norm) else (np.inf, None)


def _newton(disc, U, dofs, mu, viscosity, tol, max_iterations) -> tuple[np.ndarray, bool]:
    norm, R = _trial_norm(disc, U, dofs, mu, viscosity)
    if R is None:
        raise InvalidStateError('initial state has a non-finite residual')
    for iteration in range(1, max_iterations + 1):
        if norm <= tol:
            return U, True
        J = complex_step_jacobian(lambda Z: disc.residual(Z, dofs, mu, viscosity), U, disc.state_pattern)
        step = spsolve(J.tocsc(), -R)
        if not np.all(np.isfinite(step)):
            logger.debug('newton iter=%d singular Jacobian', iteration)
            return U, False
        alpha = 1.0
        while alpha >= MIN_STEP:
            trial = U + alpha * step
            trial_norm, trial_R = _trial_norm(disc, trial, dofs, mu, viscosity)
            if trial_norm < (1.0 - 1e-4 * alpha) * norm:
                break
            alpha *= 0.5
        else:
            logger.debug('newton iter=%d res=%.3e stagnated', iteration, norm)
            return U, False
        U, R, norm = trial, trial_R, trial_norm
        logger.debug('newton iter=%d res=%.3e step=%.3e', iteration, norm, alpha)
    return U, norm <= tol


def _pseudo_transient(disc, U, dofs, mu, viscosity, tol, max_steps=PTC_MAX_STEPS) -> np.ndarray:
    """Implicit pseudo-time stepping with switched-evolution-relaxation CFL growth."""
    mass = disc.lumped_mass(dofs)
    cfl = PTC_INITIAL_CFL
    norm, R = _trial_norm(disc, U, dofs, mu, viscosity)
    for iteration in range(1, max_steps + 1):
        if norm <= tol:
            return U
        J = complex_step_jacobian(lambda Z: disc.residual(Z, dofs, mu, viscosity), U, disc.state_pattern)
        steps = disc.time_steps(U, dofs, mu, cfl)
        step = spsolve((J + sparse.diags(mass / steps)).tocsc(), -R)
        trial = U + step
        trial_norm, trial_R = _trial_norm(disc, trial, dofs, mu, viscosity) if np.all(np.isfinite(step)) else (np.inf, None)
        if trial_norm > 10.0 * norm:
            cfl *= 0.1
            if cfl < 1e-8:
                break
            continue
        cfl = min(cfl * min(max(norm / trial_norm, 0.1), 10.0), PTC_MAX_CFL)
        U, R, norm = trial, trial_R, trial_norm
        logger.debug('ptc iter=%d res=%.3e cfl=%.3e', iteration, norm, cfl)
    if norm <= tol:
        return U
    raise SolverError(f'pseudo-transient continuation stalled at residual {norm:.3e}')


def _converge(disc, U, dofs, mu, stages, tol, max_iterations) -> np.ndarray:
    """Newton through the viscosity stages, falling back to pseudo-time stepping per stage."""
    initial_norm, _ = _trial_norm(disc, U, dofs, mu, None)
    if not np.isfinite(initial_norm):
        raise SolverError('residual of the initial state is not finite')
    absolute = tol * max(1.0, initial_norm)
    for index, viscosity in enumerate(stages):
        last = index == len(stages) - 1
        stage_tol = absolute if last else STAGE_TOLERANCE * max(1.0, initial_norm)
        U, converged = _newton(disc, U, dofs, mu, viscosity, stage_tol, max_iterations)
        if not converged:
            if disc.law.linear:
                raise SolverError(f'Newton did not converge in {max_iterations} iterations')
            U = _pseudo_transient(disc, U, dofs, mu, viscosity, stage_tol)
            U, converged = _newton(disc, U, dofs, mu, viscosity, stage_tol, max_iterations)
            if not converged:
                raise SolverError(f'Newton stagnated after continuation at stage {index + 1}')
    return U


def _degree_one_start(disc: Discretization, mapping: DomainMapping, mu, tol, max_iterations) -> np.ndarray | None:
    """Degree-1 solution on the same mesh, interpolated at the nodes of the higher-degree space."""
    space = disc.space
    coarse = Discretization(DGSpace(space.mesh, 1, space.n_components), disc.law)
    try:
        state = solve_hdm(coarse, mapping, mu, tol=tol, max_iterations=max_iterations)
    except (SolverError, InvalidStateError) as exc:
        logger.info('degree-1 start failed (%s), starting from the initial state', exc)
        return None
    table = coarse.space.element.values(space.element.nodes)
    return np.einsum('nb,ebm->enm', table, coarse.space.blocks(state)).ravel()


def solve_hdm(
    disc: Discretization,
    mapping: DomainMapping,
    mu,
    initial=None,
    tol: float = 1e-10,
    max_iterations: int = 50,
) -> StateField:
    """Converge R(U; mapping, mu) = 0 to tol * max(1, |R(initial)|).

    Without an initial state, nonlinear laws on degree p >= 2 start from the
    interpolated degree-1 solution; the law's initial state with viscosity
    continuation is the fallback.
    """
    mu = disc.law.check_parameter(mu)
    dofs = np.real(mapping.dofs).astype(float)
    if initial is None:
        target = disc.law.viscosity_scale
        attempts = []
        if not disc.law.linear and disc.space.degree > 1:
            warm = _degree_one_start(disc, mapping, mu, tol, max_iterations)
            if warm is not None:
                attempts.append((warm, [None]))
        stages = [factor * target for factor in CONTINUATION] if target > 0 else [None]
        attempts.append((disc.initial_guess(mapping, mu), stages))
    else:
        attempts = [(np.real(_state_vector(disc, initial)).astype(float).copy(), [None])]

    for index, (U, stages) in enumerate(attempts):
        try:
            U = _converge(disc, U, dofs, mu, stages, tol, max_iterations)
        except SolverError as exc:
            if index == len(attempts) - 1:
                raise
            logger.info('hdm start %d failed (%s), trying the next one', index + 1, exc)
            continue
        logger.debug('hdm solved mu=%s', mu.tolist())
        return StateField(U, disc.space.layout)
