"""Nodal domain mappings, the boundary-preserving constraint map and mesh distortion."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Mapping as MappingType, Sequence

import numpy as np
import scipy.linalg
from scipy import sparse

from .derivatives import ColoredPattern, complex_step_jacobian
from .exceptions import ConstraintError, LayoutError
from .fe import Mesh, determinant, element_jacobians, element_size, inverse

logger = logging.getLogger(__name__)

DISTORTION_EPS = 1e-8
PLANE_TOLERANCE = 1e-10


class DomainMapping:
    """Mapping of the reference mesh determined by its mapped node positions.

    `dofs` is node-major: (x_0, y_0, x_1, y_1, ...).
    """

    def __init__(self, mesh: Mesh, dofs: np.ndarray):
        dofs = np.asarray(dofs)
        if dofs.shape != (mesh.dim * mesh.n_nodes,):
            raise LayoutError(f'mapping needs {mesh.dim * mesh.n_nodes} dofs, got shape {dofs.shape}')
        self.mesh = mesh
        self.dofs = dofs

    @classmethod
    def identity(cls, mesh: Mesh) -> 'DomainMapping':
        return cls(mesh, mesh.nodes.ravel().copy())

    def __repr__(self) -> str:
        return f'DomainMapping(n_nodes={self.mesh.n_nodes}, dim={self.mesh.dim})'

    @property
    def coordinates(self) -> np.ndarray:
        return self.dofs.reshape(self.mesh.n_nodes, self.mesh.dim)

    def evaluate(self, element: int, points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Mapped points x, mapping Jacobian G and its determinant g at reference points of one element."""
        geometry = self.mesh.geometry
        connectivity = self.mesh.elements[element]
        values = geometry.values(points)
        gradients = geometry.gradients(points)
        x = values @ self.coordinates[connectivity]
        G = self.jacobians(gradients, elements=[element])[0]
        return x, G, determinant(G)

    def jacobians(self, gradients: np.ndarray, elements: Sequence[int] | None = None) -> np.ndarray:
        """G = dx/dX at points where the geometry gradients were tabulated, shape (n_el, n_pts, d, d)."""
        connectivity = self.mesh.elements if elements is None else self.mesh.elements[np.asarray(elements)]
        physical = element_jacobians(connectivity, self.coordinates, gradients)
        reference = element_jacobians(connectivity, self.mesh.nodes, gradients)
        return np.einsum('epij,epjk->epik', physical, inverse(reference))

    def min_jacobian(self) -> float:
        G = self.jacobians(self.mesh.geometry.basis_gradients)
        return float(np.real(determinant(G)).min())

    def element_sizes(self) -> np.ndarray:
        return element_size(self.mesh, np.real(self.coordinates))


def mapping_is_invertible(mapping: DomainMapping) -> bool:
    return mapping.min_jacobian() > 0.0


# ---------------------------------------------------------------------------
# boundary constraint map
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryPlane:
    normal: tuple[float, ...]
    offset: float


def box_planes(domain: Sequence[tuple[float, float]]) -> dict[int, BoundaryPlane]:
    """Planes of the surfaces tagged by `build_structured_mesh` for the same box."""
    if len(domain) == 1:
        (lo, hi), = domain
        return {1: BoundaryPlane((1.0,), lo), 2: BoundaryPlane((1.0,), hi)}
    (x0, x1), (y0, y1) = domain
    return {
        1: BoundaryPlane((0.0, 1.0), y0),
        2: BoundaryPlane((1.0, 0.0), x1),
        3: BoundaryPlane((0.0, 1.0), y1),
        4: BoundaryPlane((1.0, 0.0), x0),
    }


class NodeKind(str, enum.Enum):
    INTERIOR = 'interior'
    SLIDING = 'sliding'
    FIXED = 'fixed'


@dataclass(frozen=True, eq=False)
class BoundaryConstraintMap:
    """Affine map x = offset + E y from unconstrained dofs y to all node coordinates."""

    mesh: Mesh
    planes: dict[int, BoundaryPlane]
    kinds: tuple[NodeKind, ...]
    free_components: tuple[np.ndarray, ...]
    free_dofs: np.ndarray
    offset: np.ndarray
    jacobian: sparse.csr_matrix

    @property
    def n_unconstrained(self) -> int:
        return self.free_dofs.size


def build_boundary_constraint(mesh: Mesh, planes: MappingType[int, BoundaryPlane]) -> BoundaryConstraintMap:
    missing = set(mesh.surfaces) - set(planes)
    if missing:
        raise ConstraintError(f'no plane given for boundary surfaces {sorted(missing)}')
    d = mesh.dim
    on_surfaces: dict[int, list[int]] = {}
    for surface in mesh.surfaces:
        for node in mesh.boundary_nodes(surface):
            on_surfaces.setdefault(int(node), []).append(surface)

    offset = np.zeros(d * mesh.n_nodes)
    rows, cols, values = [], [], []
    kinds, free_components, free_dofs = [], [], []
    for node in range(mesh.n_nodes):
        X = mesh.nodes[node]
        surfaces = sorted(on_surfaces.get(node, []))
        if surfaces:
            normals = np.array([planes[s].normal for s in surfaces], dtype=float)
            offsets = np.array([planes[s].offset for s in surfaces], dtype=float)
            misfit = np.abs(normals @ X - offsets)
            if np.any(misfit > PLANE_TOLERANCE * np.maximum(1.0, np.abs(offsets))):
                raise ConstraintError(f'node {node} at {X.tolist()} does not lie on surfaces {surfaces}')
            rank = np.linalg.matrix_rank(normals)
            if rank < min(len(surfaces), d):
                raise ConstraintError(f'dependent boundary normals at node {node} (surfaces {surfaces})')
        else:
            rank = 0

        if rank >= d:
            kinds.append(NodeKind.FIXED)
            free_components.append(np.zeros(0, dtype=np.int64))
            offset[d * node:d * node + d] = X
            continue

        if rank == 0:
            kinds.append(NodeKind.INTERIOR)
            free = np.arange(d)
            constrained = np.zeros(0, dtype=np.int64)
        else:
            kinds.append(NodeKind.SLIDING)
            # pivoted QR keeps the best-conditioned components of the normals as the constrained ones
            _, _, pivots = scipy.linalg.qr(normals, pivoting=True, mode='economic')
            constrained = np.sort(pivots[:rank])
            free = np.setdiff1d(np.arange(d), constrained)
        free_components.append(free)
        first = len(free_dofs)
        for j, a in enumerate(free):
            rows.append(d * node + a)
            cols.append(first + j)
            values.append(1.0)
            free_dofs.append(d * node + a)
        if constrained.size:
            n_constrained = normals[:rank][:, constrained]
            n_free = normals[:rank][:, free]
            offset[d * node + constrained] = np.linalg.solve(n_constrained, offsets[:rank])
            coupling = -np.linalg.solve(n_constrained, n_free)
            for i, p in enumerate(constrained):
                for j in range(free.size):
                    rows.append(d * node + p)
                    cols.append(first + j)
                    values.append(coupling[i, j])

    n_free = len(free_dofs)
    jacobian = sparse.csr_matrix((values, (rows, cols)), shape=(d * mesh.n_nodes, n_free))
    constraint = BoundaryConstraintMap(
        mesh=mesh,
        planes=dict(planes),
        kinds=tuple(kinds),
        free_components=tuple(free_components),
        free_dofs=np.array(free_dofs, dtype=np.int64),
        offset=offset,
        jacobian=jacobian,
    )
    logger.debug('constraint map: %d nodes, %d unconstrained dofs', mesh.n_nodes, n_free)
    return constraint


def apply_chi(constraint: BoundaryConstraintMap, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y)
    if y.shape != (constraint.n_unconstrained,):
        raise LayoutError(f'expected {constraint.n_unconstrained} unconstrained dofs, got shape {y.shape}')
    return constraint.offset + constraint.jacobian @ y


def restrict(constraint: BoundaryConstraintMap, dofs: np.ndarray) -> np.ndarray:
    """Unconstrained dofs y of a mapping that satisfies the constraints."""
    return np.asarray(dofs)[constraint.free_dofs]


# ---------------------------------------------------------------------------
# distortion
# ---------------------------------------------------------------------------

def _distortion(mesh: Mesh, dofs: np.ndarray, eps: float) -> np.ndarray:
    geometry = mesh.geometry
    coordinates = dofs.reshape(mesh.n_nodes, mesh.dim)
    reference = element_jacobians(mesh.elements, mesh.nodes, geometry.basis_gradients)
    physical = element_jacobians(mesh.elements, coordinates, geometry.basis_gradients)
    G = np.einsum('epij,epjk->epik', physical, inverse(reference))
    g = determinant(G)
    clamped = np.where(np.real(g) > eps, g, eps)
    integrand = (np.sum(G * G, axis=(-2, -1)) / clamped ** (2.0 / mesh.dim)) ** 2
    return (integrand * geometry.quadrature.weights * determinant(reference)).sum(axis=1)


def distortion(mapping: DomainMapping, eps: float = DISTORTION_EPS) -> np.ndarray:
    """Per-element distortion: integral of (|G|_F^2 / max(g, eps)^(2/d))^2 over each reference element."""
    if eps <= 0:
        raise ValueError(f'distortion clamp must be positive, got {eps}')
    return _distortion(mapping.mesh, mapping.dofs, eps)


def _distortion_pattern(mesh: Mesh) -> ColoredPattern:
    return ColoredPattern.from_blocks(mesh.topology.incidence, 1, mesh.dim)


def distortion_gradient(mapping: DomainMapping, eps: float = DISTORTION_EPS) -> sparse.csr_matrix:
    """d eta / d x, shape (n_elements, d * n_nodes)."""
    if eps <= 0:
        raise ValueError(f'distortion clamp must be positive, got {eps}')
    mesh = mapping.mesh
    return complex_step_jacobian(
        lambda dofs: _distortion(mesh, dofs, eps), np.real(mapping.dofs), _distortion_pattern(mesh)
    )


# ---------------------------------------------------------------------------
# affine mapping families
# ---------------------------------------------------------------------------

class MappingFamily:
    """Affine family c -> x = base + jacobian @ c of mappings of one mesh."""

    def __init__(self, mesh: Mesh, base: np.ndarray, jacobian):
        self.mesh = mesh
        self.base = np.asarray(base, dtype=float)
        self.jacobian = jacobian

    @property
    def n_coordinates(self) -> int:
        return self.jacobian.shape[1]

    def dofs(self, c: np.ndarray) -> np.ndarray:
        c = np.asarray(c)
        if c.shape != (self.n_coordinates,):
            raise LayoutError(f'expected {self.n_coordinates} mapping coordinates, got shape {c.shape}')
        if not self.n_coordinates:
            return self.base.astype(c.dtype) if np.iscomplexobj(c) else self.base.copy()
        return self.base + self.jacobian @ c

    def mapping(self, c: np.ndarray) -> DomainMapping:
        return DomainMapping(self.mesh, self.dofs(c))

    def dense_jacobian(self) -> np.ndarray:
        return self.jacobian.toarray() if sparse.issparse(self.jacobian) else np.asarray(self.jacobian)


class FullMappingSpace(MappingFamily):
    """Every unconstrained dof is a coordinate: x = chi(y_base + c)."""

    def __init__(self, constraint: BoundaryConstraintMap, base_y: np.ndarray | None = None):
        if base_y is None:
            base_y = restrict(constraint, constraint.mesh.nodes.ravel())
        self.constraint = constraint
        self.base_y = np.asarray(base_y, dtype=float)
        super().__init__(constraint.mesh, apply_chi(constraint, self.base_y), constraint.jacobian)

    def unconstrained(self, c: np.ndarray) -> np.ndarray:
        return self.base_y + np.asarray(c)


class ReducedMappingSpace(MappingFamily):
    """x = chi(y_1 + Psi c) with orthonormal mapping modes Psi."""

    def __init__(
        self,
        constraint: BoundaryConstraintMap,
        base_y: np.ndarray,
        modes: np.ndarray,
        singular_values: np.ndarray | None = None,
        truncated: bool = False,
    ):
        self.constraint = constraint
        self.base_y = np.asarray(base_y, dtype=float)
        self.modes = np.asarray(modes, dtype=float).reshape(self.base_y.size, -1)
        self.singular_values = np.zeros(0) if singular_values is None else np.asarray(singular_values)
        self.truncated = truncated
        super().__init__(
            constraint.mesh, apply_chi(constraint, self.base_y), np.asarray(constraint.jacobian @ self.modes)
        )

    def unconstrained(self, c: np.ndarray) -> np.ndarray:
        return self.base_y + self.modes @ np.asarray(c)

    def project(self, y: np.ndarray) -> np.ndarray:
        return self.modes.T @ (np.asarray(y) - self.base_y)


def build_reduced_mapping_basis(
    constraint: BoundaryConstraintMap,
    aligned: np.ndarray,
    n_modes: int | None = None,
) -> ReducedMappingSpace:
    """POD of (y_i - y_1), i >= 2, over the columns of `aligned` (n_unconstrained x M)."""
    aligned = np.asarray(aligned, dtype=float)
    if aligned.ndim != 2 or aligned.shape[1] < 1:
        raise ValueError('at least one aligned mapping is required')
    if aligned.shape[0] != constraint.n_unconstrained:
        raise LayoutError(f'aligned mappings need {constraint.n_unconstrained} rows, got {aligned.shape[0]}')
    M = aligned.shape[1]
    n_modes = M - 1 if n_modes is None else n_modes
    if not 0 <= n_modes <= M - 1:
        raise ValueError(f'mapping basis size must lie in [0, {M - 1}], got {n_modes}')
    base_y = aligned[:, 0]
    if M == 1:
        return ReducedMappingSpace(constraint, base_y, np.zeros((base_y.size, 0)))

    modes, sigma, _ = scipy.linalg.svd(aligned[:, 1:] - base_y[:, None], full_matrices=False)
    rank = int(np.sum(sigma > 1e-12 * sigma[0])) if sigma[0] > 0 else 0
    truncated = n_modes > rank
    if truncated:
        logger.warning('mapping basis truncated to rank %d (requested %d)', rank, n_modes)
        n_modes = rank
    return ReducedMappingSpace(constraint, base_y, modes[:, :n_modes], sigma, truncated)


def reduced_mapping(space: MappingFamily, c: np.ndarray) -> DomainMapping:
    return space.mapping(c)

