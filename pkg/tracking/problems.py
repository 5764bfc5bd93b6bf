"""Benchmark problems: analytic demo functions, advection-reaction, quasi-1D nozzle."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .derivatives import csafe_abs
from .exceptions import NonInvertibleMappingError
from .fe import DGSpace, Mesh, build_structured_mesh
from .hdm import ConservationLaw, Discretization
from .mapping import (
    BoundaryConstraintMap,
    DomainMapping,
    FullMappingSpace,
    MappingFamily,
    box_planes,
    build_boundary_constraint,
    build_reduced_mapping_basis,
    mapping_is_invertible,
    restrict,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# 1D demo functions
# ---------------------------------------------------------------------------

def cutoff_gaussian(x, params: Sequence[float]) -> np.ndarray:
    """a exp(-((x - c) / b)^2) for x <= c and 0 beyond the cutoff c."""
    a, b, c = params
    if b == 0:
        raise ValueError('cutoff Gaussian width b must be nonzero')
    x = np.asarray(x, dtype=float)
    return np.where(x <= c, a * np.exp(-(((x - c) / b) ** 2)), 0.0)


def _check_bijection(tau: float, strict: bool) -> None:
    if strict and abs(tau) >= 0.5:
        raise ValueError(f'quadratic bijection is only monotone for |tau| < 1/2, got {tau}')


def quad_bijection(X, tau: float, strict: bool = True) -> np.ndarray:
    """X + tau (1 - X^2) on [-1, 1]; endpoints stay fixed."""
    _check_bijection(tau, strict)
    X = np.asarray(X, dtype=float)
    return X + tau * (1.0 - X ** 2)


def quad_bijection_inverse(x, tau: float, strict: bool = True) -> np.ndarray:
    _check_bijection(tau, strict)
    x = np.asarray(x, dtype=float)
    # root of tau X^2 - X + (x - tau) = 0 that stays finite as tau -> 0
    return 2.0 * (x - tau) / (1.0 + np.sqrt(1.0 - 4.0 * tau * (x - tau)))


def steepening_gaussian(x, mu: float) -> np.ndarray:
    """Gaussian bump that advects with mu and steepens on its right flank.

    The right flank is taken strictly beyond x = mu so the peak is not counted twice.
    """
    x = np.asarray(x, dtype=float)
    amplitude = 0.2 / np.sqrt(mu)
    left = cutoff_gaussian(x, (amplitude, 0.1, mu))
    right = cutoff_gaussian(-x, (amplitude, 0.004 / mu ** 2, -mu))
    return left + np.where(x > mu, right, 0.0)


def steepening_map(X, tau: float) -> np.ndarray:
    """X + 4 (tau - 0.5) X (1 - X); maps 0.5 to tau and fixes the endpoints."""
    X = np.asarray(X, dtype=float)
    return X + 4.0 * (tau - 0.5) * X * (1.0 - X)


def stagnation_pressure(mach: float, gamma: float = 1.4, pressure: float = 1.0) -> float:
    """Pitot pressure behind a normal shock for a supersonic free stream."""
    if mach < 1.0:
        raise ValueError(f'stagnation pressure formula needs Mach >= 1, got {mach}')
    m2 = mach * mach
    ratio = (1.0 - gamma + 2.0 * gamma * m2) / (gamma + 1.0)
    isentropic = ((gamma + 1.0) ** 2 * m2 / (4.0 * gamma * m2 - 2.0 * (gamma - 1.0))) ** (gamma / (gamma - 1.0))
    return pressure * ratio * isentropic


# ---------------------------------------------------------------------------
# advection-reaction
# ---------------------------------------------------------------------------

class AdvectionData(NamedTuple):
    beta: np.ndarray
    reaction: Callable[[np.ndarray], np.ndarray]
    forcing: Callable[[np.ndarray], np.ndarray]
    inflow_value: Callable[[np.ndarray], np.ndarray]
    is_inflow: Callable[[np.ndarray], np.ndarray]


def advec_react_data(mu) -> AdvectionData:
    theta, b, s = mu
    beta = np.array([np.cos(theta), np.sin(theta)])

    def reaction(x):
        return 1.0 + b * np.exp(x[..., 0] + x[..., 1])

    def forcing(x):
        return 1.0 + x[..., 0] * x[..., 1]

    def inflow_value(x):
        x2 = x[..., 1]
        return 4.0 * np.arctan(s * (x2 - 0.5)) * (x2 - x2 * x2)

    def is_inflow(normal):
        # beta . n = 0 counts as outflow
        return np.real(normal @ beta) < 0.0

    return AdvectionData(beta, reaction, forcing, inflow_value, is_inflow)


class AdvectionReactionLaw(ConservationLaw):
    """div(beta u) + tau u = h with upwind fluxes and inflow data u_bar."""

    n_components = 1
    dim = 2
    linear = True
    surfaces = (1, 2, 3, 4)
    parameter_names = ('theta', 'b', 's')

    def flux(self, u, x, mu):
        beta = advec_react_data(mu).beta
        return u[..., :, None] * beta

    def source(self, u, x, mu):
        data = advec_react_data(mu)
        return (data.forcing(x) - data.reaction(x) * u[..., 0])[..., None]

    def numerical_flux(self, ul, ur, normal, x, mu):
        bn = normal @ advec_react_data(mu).beta
        upwind = np.where(np.real(bn)[..., None] >= 0.0, ul, ur)
        return bn[..., None] * upwind

    def boundary_state(self, u, x, normal, surface, mu):
        data = advec_react_data(mu)
        return np.where(data.is_inflow(normal)[..., None], data.inflow_value(x)[..., None], u)

    def initial_state(self, x, mu):
        return np.zeros(x.shape[:-1] + (1,))


# ---------------------------------------------------------------------------
# quasi-1D nozzle
# ---------------------------------------------------------------------------

NOZZLE_LENGTH = 10.0
GAMMA = 1.4
INLET_DENSITY = 1.0
INLET_PRESSURE = 1.0
OUTLET_PRESSURE = 0.7


def nozzle_area(x, mu: float):
    xi = x / NOZZLE_LENGTH
    return 3.0 + 4.0 * (mu - 3.0) * xi * (1.0 - xi)


def nozzle_area_derivative(x, mu: float):
    return 4.0 * (mu - 3.0) * (1.0 - 2.0 * x / NOZZLE_LENGTH) / NOZZLE_LENGTH


def nozzle_pressure(u, area):
    """P from area-weighted conserved variables (A rho, A rho v, A rho E)."""
    return (GAMMA - 1.0) * (u[..., 2] - 0.5 * u[..., 1] ** 2 / u[..., 0]) / area


def nozzle_mach(u):
    """Mach number of area-weighted conserved variables; the area cancels."""
    velocity = u[..., 1] / u[..., 0]
    sound = np.sqrt(GAMMA * (GAMMA - 1.0) * (u[..., 2] / u[..., 0] - 0.5 * velocity ** 2))
    return np.abs(velocity) / sound


def _conserved(density, velocity, pressure, area):
    energy = pressure / (GAMMA - 1.0) + 0.5 * density * velocity ** 2
    return np.stack([density, density * velocity, energy], axis=-1) * area[..., None]


class NozzleData(NamedTuple):
    area: Callable
    area_derivative: Callable
    flux: Callable
    source: Callable
    boundary_state: Callable


class NozzleLaw(ConservationLaw):
    """Quasi-1D Euler equations with Roe fluxes and a Harten entropy fix."""

    n_components = 3
    dim = 1
    linear = False
    surfaces = (1, 2)
    parameter_names = ('mu',)
    entropy_fix = 0.05

    def __init__(self, viscosity_scale: float = 0.5):
        self.viscosity_scale = viscosity_scale

    def _primitive(self, u, area):
        density = u[..., 0] / area
        velocity = u[..., 1] / u[..., 0]
        pressure = nozzle_pressure(u, area)
        return density, velocity, pressure

    def flux(self, u, x, mu):
        area = nozzle_area(x[..., 0], mu[0])
        velocity = u[..., 1] / u[..., 0]
        pressure = nozzle_pressure(u, area)
        f = np.stack([u[..., 1], u[..., 1] * velocity + area * pressure, velocity * (u[..., 2] + area * pressure)], axis=-1)
        return f[..., None]

    def source(self, u, x, mu):
        area = nozzle_area(x[..., 0], mu[0])
        pressure = nozzle_pressure(u, area)
        zero = np.zeros_like(pressure)
        return np.stack([zero, pressure * nozzle_area_derivative(x[..., 0], mu[0]), zero], axis=-1)

    def numerical_flux(self, ul, ur, normal, x, mu):
        area = nozzle_area(x[..., 0], mu[0])
        size = csafe_abs(normal[..., 0])
        direction = normal[..., 0] / size
        rl, vl, pl = self._primitive(ul, area)
        rr, vr, pr = self._primitive(ur, area)
        el, er = ul[..., 2] / area, ur[..., 2] / area
        hl, hr = (el + pl) / rl, (er + pr) / rr

        sl, sr = np.sqrt(rl), np.sqrt(rr)
        v = (sl * vl + sr * vr) / (sl + sr)
        h = (sl * hl + sr * hr) / (sl + sr)
        c = np.sqrt((GAMMA - 1.0) * (h - 0.5 * v * v))
        rho = sl * sr
        vn = v * direction

        dp, dr, dvn = pr - pl, rr - rl, (vr - vl) * direction
        strengths = (
            (dp - rho * c * dvn) / (2.0 * c * c),
            dr - dp / (c * c),
            (dp + rho * c * dvn) / (2.0 * c * c),
        )
        one = np.ones_like(v)
        vectors = (
            np.stack([one, v - c * direction, h - vn * c], axis=-1),
            np.stack([one, v, 0.5 * v * v], axis=-1),
            np.stack([one, v + c * direction, h + vn * c], axis=-1),
        )
        delta = self.entropy_fix * (csafe_abs(v) + c)
        dissipation = 0.0
        for speed, alpha, vector in zip((vn - c, vn, vn + c), strengths, vectors):
            magnitude = csafe_abs(speed)
            magnitude = np.where(np.real(magnitude) < np.real(delta), (speed * speed + delta * delta) / (2.0 * delta), magnitude)
            dissipation = dissipation + (magnitude * alpha)[..., None] * vector

        def physical(r, vel, p, e):
            return np.stack([r * vel, r * vel * vel + p, vel * (e + p)], axis=-1)

        central = 0.5 * (physical(rl, vl, pl, el) + physical(rr, vr, pr, er)) * direction[..., None]
        return (area * size)[..., None] * (central - 0.5 * dissipation)

    def boundary_state(self, u, x, normal, surface, mu):
        area = nozzle_area(x[..., 0], mu[0])
        density, velocity, _ = self._primitive(u, area)
        if surface == 1:
            density = INLET_DENSITY * np.ones_like(density)
            pressure = INLET_PRESSURE * np.ones_like(density)
        else:
            pressure = OUTLET_PRESSURE * np.ones_like(density)
        return _conserved(density, velocity, pressure, area)

    def initial_state(self, x, mu):
        x = x[..., 0]
        area = nozzle_area(x, mu[0])
        pressure = INLET_PRESSURE + (OUTLET_PRESSURE - INLET_PRESSURE) * x / NOZZLE_LENGTH
        return _conserved(np.ones_like(x), 0.2 * np.ones_like(x), pressure, area)

    def wave_speed(self, u, x, mu):
        area = nozzle_area(x[..., 0], mu[0])
        density, velocity, pressure = self._primitive(u, area)
        return csafe_abs(velocity) + np.sqrt(GAMMA * pressure / density)


def nozzle_data(mu) -> NozzleData:
    law = NozzleLaw()
    mu = law.check_parameter(mu)
    return NozzleData(
        area=lambda x: nozzle_area(x, mu[0]),
        area_derivative=lambda x: nozzle_area_derivative(x, mu[0]),
        flux=lambda u, x: law.flux(u, x, mu),
        source=lambda u, x: law.source(u, x, mu),
        boundary_state=lambda u, x, normal, surface: law.boundary_state(u, x, normal, surface, mu),
    )


# ---------------------------------------------------------------------------
# one-parameter mapping of the unit square
# ---------------------------------------------------------------------------

class OneParameterMapping(MappingFamily):
    """x1 = X1; x2 = X2 + 2c X1 X2 below X2 = 0.5 and X2 + 2c X1 (1 - X2) above."""

    def __init__(self, mesh: Mesh):
        X = mesh.nodes
        column = np.zeros_like(X)
        column[:, 1] = np.where(X[:, 1] < 0.5, 2.0 * X[:, 0] * X[:, 1], 2.0 * X[:, 0] * (1.0 - X[:, 1]))
        super().__init__(mesh, X.ravel().copy(), column.reshape(-1, 1))


def onepar_mapping(mesh: Mesh, c: float) -> DomainMapping:
    if abs(c) >= 0.5:
        raise ValueError(f'one-parameter mapping needs |c| < 1/2, got {c}')
    mapping = OneParameterMapping(mesh).mapping(np.array([c], dtype=float))
    if not mapping_is_invertible(mapping):
        raise NonInvertibleMappingError(f'one-parameter mapping with c={c} is inverted')
    return mapping


# ---------------------------------------------------------------------------
# problem registry
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ProblemSetup:
    problem: 'Problem'
    mesh: Mesh
    space: DGSpace
    disc: Discretization
    constraint: BoundaryConstraintMap

    @property
    def nominal(self) -> DomainMapping:
        return DomainMapping.identity(self.mesh)


class Problem:
    name: str = ''
    domain: tuple[tuple[float, float], ...] = ()
    bounds: tuple[tuple[float, float], ...] = ()
    norm: str = 'l2'
    defaults: dict = {}

    def __repr__(self) -> str:
        return f'{type(self).__name__}({self.name!r})'

    @property
    def parameter_names(self) -> tuple[str, ...]:
        return self.law().parameter_names

    def law(self) -> ConservationLaw:
        raise NotImplementedError

    def check_parameter(self, mu) -> np.ndarray:
        mu = np.atleast_1d(np.asarray(mu, dtype=float))
        if mu.shape != (len(self.bounds),):
            raise ValueError(f'{self.name} expects {len(self.bounds)} parameters, got {mu.tolist()}')
        for name, value, (lo, hi) in zip(self.parameter_names, mu, self.bounds):
            if not lo - 1e-12 <= value <= hi + 1e-12:
                raise ValueError(f'parameter {name}={value} outside [{lo}, {hi}]')
        return mu

    def setup(self, nx: int, ny: int | None = None, degree: int = 1, geom_degree: int = 1) -> ProblemSetup:
        mesh = build_structured_mesh(self.domain, nx, ny, geom_degree)
        law = self.law()
        space = DGSpace(mesh, degree, law.n_components)
        constraint = build_boundary_constraint(mesh, box_planes(self.domain))
        logger.info('%s setup: %d elements, p=%d, N=%d', self.name, mesh.n_elements, degree, space.size)
        return ProblemSetup(self, mesh, space, Discretization(space, law), constraint)

    def order_training(self, parameters: Sequence[Sequence[float]]) -> list[np.ndarray]:
        return [np.asarray(mu, dtype=float) for mu in parameters]

    def offline_mapping_space(self, setup: ProblemSetup) -> MappingFamily:
        raise NotImplementedError

    def online_mapping_space(self, setup: ProblemSetup, aligned: Sequence[np.ndarray], n_modes: int | None = None) -> MappingFamily:
        raise NotImplementedError


class AdvecReactProblem(Problem):
    name = 'advec2d'
    domain = ((0.0, 1.0), (0.0, 1.0))
    bounds = ((-np.pi / 10, np.pi / 10), (0.3, 0.7), (60.0, 100.0))
    norm = 'l2'
    defaults = {'nx': 34, 'ny': 34, 'degree': 3, 'geom_degree': 1, 'kappa': 0.0, 'lm_lambda': 0.0}

    def law(self) -> ConservationLaw:
        return AdvectionReactionLaw()

    def order_training(self, parameters):
        """Centroid first, then by increasing scaled distance from it."""
        parameters = [np.asarray(mu, dtype=float) for mu in parameters]
        if len(parameters) < 2:
            return parameters
        lo = np.min(parameters, axis=0)
        hi = np.max(parameters, axis=0)
        width = np.array([b - a for a, b in self.bounds])
        centroid = 0.5 * (lo + hi)
        distance = [float(np.linalg.norm((mu - centroid) / width)) for mu in parameters]
        order = sorted(range(len(parameters)), key=lambda i: (distance[i], i))
        return [parameters[i] for i in order]

    def offline_mapping_space(self, setup):
        return OneParameterMapping(setup.mesh)

    def online_mapping_space(self, setup, aligned, n_modes=None):
        return OneParameterMapping(setup.mesh)


class NozzleProblem(Problem):
    name = 'nozzle1d'
    domain = ((0.0, NOZZLE_LENGTH),)
    bounds = ((0.5, 1.625),)
    norm = 'l1'
    defaults = {'nx': 200, 'ny': None, 'degree': 1, 'geom_degree': 1, 'kappa': 'auto', 'lm_lambda': 'auto'}

    def __init__(self, viscosity_scale: float = 0.5):
        self.viscosity_scale = viscosity_scale

    def law(self) -> ConservationLaw:
        return NozzleLaw(self.viscosity_scale)

    def check_parameter(self, mu):
        mu = super().check_parameter(mu)
        xs = np.linspace(0.0, NOZZLE_LENGTH, 101)
        if np.any(nozzle_area(xs, mu[0]) <= 0):
            raise ValueError(f'nozzle area is not positive for mu={mu[0]}')
        return mu

    def order_training(self, parameters):
        return sorted((np.asarray(mu, dtype=float) for mu in parameters), key=lambda mu: tuple(mu))

    def offline_mapping_space(self, setup):
        return FullMappingSpace(setup.constraint)

    def online_mapping_space(self, setup, aligned, n_modes=None):
        ys = np.column_stack([restrict(setup.constraint, dofs) for dofs in aligned])
        return build_reduced_mapping_basis(setup.constraint, ys, n_modes)


PROBLEMS: dict[str, type[Problem]] = {
    AdvecReactProblem.name: AdvecReactProblem,
    NozzleProblem.name: NozzleProblem,
}


def get_problem(name: str) -> Problem:
    try:
        return PROBLEMS[name]()
    except KeyError:
        raise ValueError(f'unknown problem {name!r}; choose from {sorted(PROBLEMS)}') from None


def advection_line_set(n: int) -> list[np.ndarray]:
    """n uniformly spaced angles on the slice b = 0.55, s = 80."""
    if n < 1:
        raise ValueError('a training set needs at least one parameter')
    if n == 1:
        return [np.array([0.0, 0.55, 80.0])]
    return [np.array([-np.pi / 10 + i / (n - 1) * np.pi / 5, 0.55, 80.0]) for i in range(n)]


def advection_box_set(n: int) -> list[np.ndarray]:
    """Centroid of the parameter box followed by an n x n x n tensor grid."""
    bounds = AdvecReactProblem.bounds
    centroid = np.array([0.5 * (lo + hi) for lo, hi in bounds])
    axes = [np.linspace(lo, hi, n) for lo, hi in bounds]
    grid = np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1).reshape(-1, 3)
    return [centroid] + [mu for mu in grid if not np.allclose(mu, centroid)]
