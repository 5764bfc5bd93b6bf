"""Reference-domain meshes, Lagrange reference elements and the DG state encoding.

Only simplices are supported: segments in 1D and triangles in 2D. Every array
helper in this module accepts complex input so that derivatives can be taken
with complex steps through the whole assembly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import sparse

from .exceptions import LayoutError, MeshError

logger = logging.getLogger(__name__)

SEGMENT = 'segment'
TRIANGLE = 'triangle'
SHAPES = {1: SEGMENT, 2: TRIANGLE}
MAX_QUADRATURE_ORDER = 41

_VERTICES = {
    SEGMENT: np.array([[0.0], [1.0]]),
    TRIANGLE: np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
}
# local faces by their reference vertices; face f of a triangle is opposite vertex f
_FACE_VERTICES = {SEGMENT: ((0,), (1,)), TRIANGLE: ((1, 2), (2, 0), (0, 1))}
_OPPOSITE_VERTEX = {SEGMENT: (1, 0), TRIANGLE: (0, 1, 2)}


# ---------------------------------------------------------------------------
# small dense helpers for d <= 2
# ---------------------------------------------------------------------------

def determinant(a: np.ndarray) -> np.ndarray:
    if a.shape[-1] == 1:
        return a[..., 0, 0]
    if a.shape[-1] == 2:
        return a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
    raise ValueError('only d <= 2 is supported')


def cofactor(a: np.ndarray) -> np.ndarray:
    """det(a) * a^{-T}, written without a division."""
    if a.shape[-1] == 1:
        return np.ones_like(a)
    if a.shape[-1] == 2:
        out = np.empty_like(a)
        out[..., 0, 0] = a[..., 1, 1]
        out[..., 0, 1] = -a[..., 1, 0]
        out[..., 1, 0] = -a[..., 0, 1]
        out[..., 1, 1] = a[..., 0, 0]
        return out
    raise ValueError('only d <= 2 is supported')


def inverse(a: np.ndarray) -> np.ndarray:
    return np.swapaxes(cofactor(a), -1, -2) / determinant(a)[..., None, None]


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray
    order: int

    @property
    def size(self) -> int:
        return self.weights.size


def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def quadrature_for(shape: str, order: int) -> QuadratureRule:
    """Positive-weight rule on the unit reference shape, exact up to `order`."""
    if order < 1:
        raise ValueError(f'quadrature order must be at least 1, got {order}')
    if order > MAX_QUADRATURE_ORDER:
        raise ValueError(f'unsupported quadrature order {order}')
    if shape == SEGMENT:
        x, w = _gauss_legendre(order // 2 + 1)
        return QuadratureRule(x[:, None], w, order)
    if shape == TRIANGLE:
        # collapsed tensor rule; the (1 - u) factor raises the degree in u by one
        u, wu = _gauss_legendre((order + 3) // 2)
        uu, vv = np.meshgrid(u, u, indexing='ij')
        points = np.column_stack([uu.ravel(), (vv * (1.0 - uu)).ravel()])
        weights = (np.outer(wu, wu) * (1.0 - uu)).ravel()
        return QuadratureRule(points, weights, order)
    raise ValueError(f'unknown reference shape {shape!r}')


def composite_rule(
    lower: float,
    upper: float,
    n_intervals: int,
    points_per_interval: int = 3,
    breakpoints: Sequence[float] = (),
) -> QuadratureRule:
    """Composite Gauss rule on [lower, upper]; breakpoints are added as interval edges."""
    if upper <= lower or n_intervals < 1:
        raise ValueError('composite rule needs a nonempty interval and at least one cell')
    edges = np.linspace(lower, upper, n_intervals + 1)
    extra = [b for b in breakpoints if lower < b < upper]
    edges = np.unique(np.concatenate([edges, extra]))
    x, w = _gauss_legendre(points_per_interval)
    widths = np.diff(edges)
    points = edges[:-1, None] + widths[:, None] * x[None, :]
    weights = widths[:, None] * w[None, :]
    return QuadratureRule(points.reshape(-1, 1), weights.ravel(), 2 * points_per_interval - 1)


# ---------------------------------------------------------------------------
# reference elements
# ---------------------------------------------------------------------------

def _lattice(shape: str, degree: int) -> np.ndarray:
    if degree == 0:
        return _VERTICES[shape].mean(axis=0, keepdims=True)
    if shape == SEGMENT:
        return (np.arange(degree + 1) / degree)[:, None]
    return np.array(
        [(i / degree, j / degree) for j in range(degree + 1) for i in range(degree + 1 - j)]
    )


def _exponents(shape: str, degree: int) -> np.ndarray:
    if shape == SEGMENT:
        return np.arange(degree + 1)[:, None]
    return np.array([(total - b, b) for total in range(degree + 1) for b in range(total + 1)])


def barycentric(shape: str, points: np.ndarray) -> np.ndarray:
    points = np.atleast_2d(points)
    if shape == SEGMENT:
        return np.column_stack([1.0 - points[:, 0], points[:, 0]])
    return np.column_stack([1.0 - points[:, 0] - points[:, 1], points[:, 0], points[:, 1]])


class ReferenceElement:
    """Nodal Lagrange basis of degree p on the unit segment or triangle.

    Tabulates basis values and reference gradients at the volume quadrature
    points (order 2p+1 by default) and on every local face (order 2p+2).
    """

    def __init__(
        self,
        shape: str,
        degree: int,
        quadrature_order: int | None = None,
        face_quadrature_order: int | None = None,
    ):
        if shape not in _VERTICES:
            raise ValueError(f'unknown reference shape {shape!r}')
        if degree < 0:
            raise ValueError(f'polynomial degree must be non-negative, got {degree}')
        self.shape = shape
        self.degree = degree
        self.dim = _VERTICES[shape].shape[1]
        self.nodes = _lattice(shape, degree)
        self.exponents = _exponents(shape, degree)
        self._coefficients = np.linalg.inv(self.monomials(self.nodes))

        self.quadrature = quadrature_for(shape, quadrature_order or 2 * degree + 1)
        self.basis_values = self.values(self.quadrature.points)
        self.basis_gradients = self.gradients(self.quadrature.points)

        vertices = _VERTICES[shape]
        faces = _FACE_VERTICES[shape]
        if shape == SEGMENT:
            t = np.zeros(1)
            self.face_weights = np.ones(1)
        else:
            rule = quadrature_for(SEGMENT, face_quadrature_order or 2 * degree + 2)
            t = rule.points[:, 0]
            self.face_weights = rule.weights
        self.face_points = np.stack(
            [vertices[f[0]] + t[:, None] * (vertices[f[-1]] - vertices[f[0]]) for f in faces]
        )
        self.face_values = np.stack([self.values(p) for p in self.face_points])
        self.face_gradients = np.stack([self.gradients(p) for p in self.face_points])
        if shape == SEGMENT:
            self.face_normals = np.array([[-1.0], [1.0]])
            self.face_measures = np.ones(2)
        else:
            tangents = np.array([vertices[b] - vertices[a] for a, b in faces])
            self.face_measures = np.linalg.norm(tangents, axis=1)
            self.face_normals = np.column_stack([tangents[:, 1], -tangents[:, 0]]) / self.face_measures[:, None]
        self.scaled_face_normals = (
            self.face_normals[:, None, :] * self.face_measures[:, None, None] * self.face_weights[None, :, None]
        )

    def __repr__(self) -> str:
        return f'ReferenceElement({self.shape!r}, degree={self.degree})'

    @property
    def n_basis(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_faces(self) -> int:
        return len(_FACE_VERTICES[self.shape])

    @property
    def measure(self) -> float:
        return 1.0 if self.shape == SEGMENT else 0.5

    @property
    def face_vertices(self) -> tuple[tuple[int, ...], ...]:
        return _FACE_VERTICES[self.shape]

    @cached_property
    def vertex_ids(self) -> np.ndarray:
        if self.degree == 0:
            raise ValueError('degree-0 elements have no vertex nodes')
        ids = [int(np.argmin(np.linalg.norm(self.nodes - v, axis=1))) for v in _VERTICES[self.shape]]
        return np.array(ids)

    @cached_property
    def face_nodes(self) -> tuple[np.ndarray, ...]:
        """Local node indices lying on each face."""
        bary = barycentric(self.shape, self.nodes)
        return tuple(
            np.flatnonzero(np.abs(bary[:, v]) < 1e-12) for v in _OPPOSITE_VERTEX[self.shape]
        )

    def monomials(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        return np.prod(points[:, None, :] ** self.exponents[None, :, :], axis=2)

    def values(self, points: np.ndarray) -> np.ndarray:
        """Basis values, shape (n_points, n_basis)."""
        return self.monomials(points) @ self._coefficients

    def gradients(self, points: np.ndarray) -> np.ndarray:
        """Reference gradients, shape (n_points, n_basis, dim)."""
        points = np.atleast_2d(points)
        columns = []
        for k in range(self.dim):
            shifted = self.exponents.copy()
            shifted[:, k] = np.maximum(shifted[:, k] - 1, 0)
            derivative = self.exponents[:, k] * np.prod(points[:, None, :] ** shifted[None, :, :], axis=2)
            columns.append(derivative @ self._coefficients)
        return np.stack(columns, axis=-1)


# ---------------------------------------------------------------------------
# meshes
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MeshTopology:
    interior: np.ndarray
    flipped: np.ndarray
    neighbours: sparse.csr_matrix
    incidence: sparse.csr_matrix

    @property
    def n_interior(self) -> int:
        return self.interior.shape[0]


def element_jacobians(elements: np.ndarray, coordinates: np.ndarray, gradients: np.ndarray) -> np.ndarray:
    """d x / d xi at the points where `gradients` was tabulated, shape (n_el, n_pts, d, d)."""
    return np.einsum('pqk,eqi->epik', gradients, coordinates[elements])


@dataclass(frozen=True, eq=False)
class Mesh:
    dim: int
    nodes: np.ndarray
    elements: np.ndarray
    geom_degree: int
    boundary_faces: np.ndarray
    surfaces: tuple[int, ...] = ()

    def __post_init__(self):
        if self.dim not in SHAPES:
            raise MeshError(f'unsupported mesh dimension {self.dim}')
        nodes = np.asarray(self.nodes, dtype=float).reshape(-1, self.dim)
        elements = np.asarray(self.elements, dtype=np.int64)
        faces = np.asarray(self.boundary_faces, dtype=np.int64).reshape(-1, 3)
        surfaces = tuple(sorted(set(self.surfaces) or set(faces[:, 2].tolist())))
        object.__setattr__(self, 'nodes', nodes)
        object.__setattr__(self, 'elements', elements)
        object.__setattr__(self, 'boundary_faces', faces)
        object.__setattr__(self, 'surfaces', surfaces)

        if self.geom_degree < 1:
            raise MeshError('geometry degree must be at least 1')
        if elements.ndim != 2 or elements.shape[1] != self.geometry.n_basis:
            raise MeshError(
                f'elements need {self.geometry.n_basis} nodes for geometry degree {self.geom_degree}'
            )
        if elements.size and (elements.min() < 0 or elements.max() >= nodes.shape[0]):
            raise MeshError('element connectivity references a missing node')
        if faces.size:
            if faces[:, 0].min() < 0 or faces[:, 0].max() >= elements.shape[0]:
                raise MeshError('boundary face references a missing element')
            if faces[:, 1].min() < 0 or faces[:, 1].max() >= self.geometry.n_faces:
                raise MeshError('boundary face references a missing local face')
            undeclared = set(faces[:, 2].tolist()) - set(surfaces)
            if undeclared:
                raise MeshError(f'boundary faces tagged with undeclared surfaces {sorted(undeclared)}')
        jac = element_jacobians(elements, nodes, self.geometry.basis_gradients)
        if np.any(determinant(jac) <= 0.0):
            raise MeshError('identity placement has non-positive element Jacobians')

    @property
    def shape(self) -> str:
        return SHAPES[self.dim]

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @cached_property
    def geometry(self) -> ReferenceElement:
        return ReferenceElement(self.shape, self.geom_degree)

    @cached_property
    def topology(self) -> MeshTopology:
        geometry = self.geometry
        corners = self.elements[:, geometry.vertex_ids]
        unmatched: dict[tuple[int, ...], tuple[int, int, tuple[int, ...]]] = {}
        interior, flipped = [], []
        for e in range(self.n_elements):
            for f, verts in enumerate(geometry.face_vertices):
                ordered = tuple(int(corners[e, v]) for v in verts)
                key = tuple(sorted(ordered))
                if key in unmatched:
                    e0, f0, ordered0 = unmatched.pop(key)
                    interior.append((e0, f0, e, f))
                    flipped.append(ordered0[0] != ordered[0])
                else:
                    unmatched[key] = (e, f, ordered)
        tagged = {(int(e), int(f)) for e, f, _ in self.boundary_faces}
        untagged = {(e, f) for e, f, _ in unmatched.values()} - tagged
        if untagged:
            raise MeshError(f'{len(untagged)} boundary faces carry no surface tag')

        interior = np.array(interior, dtype=np.int64).reshape(-1, 4)
        n = self.n_elements
        rows = np.concatenate([np.arange(n), interior[:, 0], interior[:, 2]])
        cols = np.concatenate([np.arange(n), interior[:, 2], interior[:, 0]])
        neighbours = sparse.coo_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n)).tocsr()
        neighbours.data[:] = 1.0
        nq = self.elements.shape[1]
        incidence = sparse.coo_matrix(
            (np.ones(self.elements.size), (np.repeat(np.arange(n), nq), self.elements.ravel())),
            shape=(n, self.n_nodes),
        ).tocsr()
        incidence.data[:] = 1.0
        return MeshTopology(interior, np.array(flipped, dtype=bool), neighbours, incidence)

    def boundary_nodes(self, surface: int) -> np.ndarray:
        """Geometry nodes on the faces tagged with `surface`."""
        faces = self.boundary_faces[self.boundary_faces[:, 2] == surface]
        found = [self.elements[e, self.geometry.face_nodes[f]] for e, f, _ in faces]
        return np.unique(np.concatenate(found)) if found else np.zeros(0, dtype=np.int64)


def element_size(mesh: Mesh, coordinates: np.ndarray | None = None) -> np.ndarray:
    """Measure of every element under the placement `coordinates` (reference mesh if omitted)."""
    coordinates = mesh.nodes if coordinates is None else coordinates.reshape(mesh.nodes.shape)
    geometry = mesh.geometry
    jac = element_jacobians(mesh.elements, coordinates, geometry.basis_gradients)
    return np.abs(determinant(jac)) @ geometry.quadrature.weights


def build_structured_mesh(
    domain: Sequence[tuple[float, float]],
    nx: int,
    ny: int | None = None,
    degree: int = 1,
) -> Mesh:
    """Segment mesh of an interval or right-diagonal triangulation of a box.

    Boundary surfaces are numbered 1 (left), 2 (right) in 1D and 1 (bottom),
    2 (right), 3 (top), 4 (left) in 2D.
    """
    domain = [tuple(float(v) for v in side) for side in domain]
    if nx < 1 or (len(domain) == 2 and (ny is None or ny < 1)):
        raise ValueError('a structured mesh needs at least one cell per direction')
    if any(hi <= lo for lo, hi in domain):
        raise ValueError(f'degenerate box {domain}')
    q = degree

    if len(domain) == 1:
        (lo, hi), = domain
        nodes = np.linspace(lo, hi, nx * q + 1)[:, None]
        elements = np.arange(nx)[:, None] * q + np.arange(q + 1)[None, :]
        faces = np.array([(0, 0, 1), (nx - 1, 1, 2)])
        return Mesh(1, nodes, elements, q, faces, (1, 2))

    if len(domain) != 2:
        raise ValueError('only intervals and 2D boxes are supported')
    (x0, x1), (y0, y1) = domain
    local = np.rint(_lattice(TRIANGLE, q) * q).astype(np.int64)
    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing='xy')
    origin = q * np.column_stack([ii.ravel(), jj.ravel()])
    lattice = []
    for d1, d2 in (((1, 0), (1, 1)), ((1, 1), (0, 1))):
        offsets = local[:, :1] * np.array(d1) + local[:, 1:] * np.array(d2)
        lattice.append(origin[:, None, :] + offsets[None, :, :])
    lattice = np.stack(lattice, axis=1).reshape(-1, local.shape[0], 2)
    width = q * nx + 1
    keys = lattice[..., 1] * width + lattice[..., 0]
    unique, elements = np.unique(keys.ravel(), return_inverse=True)
    elements = elements.reshape(keys.shape)
    lx, ly = unique % width, unique // width
    nodes = np.column_stack([x0 + (x1 - x0) * lx / (q * nx), y0 + (y1 - y0) * ly / (q * ny)])

    cells = np.arange(nx * ny).reshape(ny, nx)
    faces = np.concatenate([
        np.column_stack([2 * cells[0, :], np.full(nx, 2), np.full(nx, 1)]),
        np.column_stack([2 * cells[:, -1], np.full(ny, 0), np.full(ny, 2)]),
        np.column_stack([2 * cells[-1, :] + 1, np.full(nx, 0), np.full(nx, 3)]),
        np.column_stack([2 * cells[:, 0] + 1, np.full(ny, 1), np.full(ny, 4)]),
    ])
    return Mesh(2, nodes, elements, q, faces, (1, 2, 3, 4))


def write_mesh(mesh: Mesh, path: str | Path) -> None:
    """Plain-text mesh: header `dim q n_nodes n_elems n_bfaces`, then nodes, connectivity, boundary faces."""
    lines = [f'{mesh.dim} {mesh.geom_degree} {mesh.n_nodes} {mesh.n_elements} {len(mesh.boundary_faces)}']
    lines += [' '.join(repr(float(v)) for v in node) for node in mesh.nodes]
    lines += [' '.join(str(int(i)) for i in element) for element in mesh.elements]
    lines += [' '.join(str(int(i)) for i in face) for face in mesh.boundary_faces]
    Path(path).write_text('\n'.join(lines) + '\n')


def read_mesh(path: str | Path) -> Mesh:
    rows = [line.split() for line in Path(path).read_text().splitlines() if line.strip()]
    try:
        dim, q, n_nodes, n_elements, n_faces = (int(v) for v in rows[0])
        body = rows[1:]
        if len(body) != n_nodes + n_elements + n_faces:
            raise MeshError(f'{path}: expected {n_nodes + n_elements + n_faces} rows, found {len(body)}')
        nodes = np.array(body[:n_nodes], dtype=float)
        elements = np.array(body[n_nodes:n_nodes + n_elements], dtype=np.int64)
        faces = np.array(body[n_nodes + n_elements:], dtype=np.int64)
    except (IndexError, ValueError) as exc:
        raise MeshError(f'{path}: malformed mesh file ({exc})') from exc
    return Mesh(dim, nodes, elements, q, faces)


# ---------------------------------------------------------------------------
# DG state layout and encoding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StateLayout:
    n_elements: int
    n_basis: int
    n_components: int

    @property
    def size(self) -> int:
        return self.n_elements * self.n_basis * self.n_components

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.n_elements, self.n_basis, self.n_components


@dataclass(frozen=True, eq=False)
class StateField:
    coefficients: np.ndarray
    layout: StateLayout

    def __post_init__(self):
        coefficients = np.asarray(self.coefficients)
        if coefficients.ndim != 1 or coefficients.size != self.layout.size:
            raise LayoutError(f'expected {self.layout.size} coefficients, got shape {coefficients.shape}')
        object.__setattr__(self, 'coefficients', coefficients)

    def blocks(self) -> np.ndarray:
        return self.coefficients.reshape(self.layout.shape)


class DGSpace:
    """Discontinuous degree-p space with m components on a reference-domain mesh.

    Coefficients are stored element-major, then local node, then component.
    """

    def __init__(self, mesh: Mesh, degree: int, n_components: int = 1):
        self.mesh = mesh
        self.degree = degree
        self.n_components = n_components
        self.element = ReferenceElement(mesh.shape, degree)
        self.layout = StateLayout(mesh.n_elements, self.element.n_basis, n_components)

        rule = self.element.quadrature
        self.geometry_values = mesh.geometry.values(rule.points)
        self.geometry_gradients = mesh.geometry.gradients(rule.points)
        self.jacobians = element_jacobians(mesh.elements, mesh.nodes, self.geometry_gradients)
        self.inverse_jacobians = inverse(self.jacobians)
        self.weights = rule.weights[None, :] * determinant(self.jacobians)
        self.gradients = np.einsum('pbk,epkj->epbj', self.element.basis_gradients, self.inverse_jacobians)

    @property
    def size(self) -> int:
        return self.layout.size

    def blocks(self, coefficients: np.ndarray | StateField) -> np.ndarray:
        if isinstance(coefficients, StateField):
            if coefficients.layout != self.layout:
                raise LayoutError('state field layout does not match the space')
            return coefficients.blocks()
        coefficients = np.asarray(coefficients)
        if coefficients.shape != (self.size,):
            raise LayoutError(f'expected {self.size} coefficients, got shape {coefficients.shape}')
        return coefficients.reshape(self.layout.shape)

    def element_measures(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    def node_coordinates(self, coordinates: np.ndarray | None = None) -> np.ndarray:
        """Positions of the state nodes, shape (n_el, n_basis, d).

        `coordinates` are mapped geometry-node positions; the reference mesh is used when omitted.
        """
        coordinates = self.mesh.nodes if coordinates is None else coordinates.reshape(self.mesh.nodes.shape)
        table = self.mesh.geometry.values(self.element.nodes)
        return np.einsum('bq,eqi->ebi', table, coordinates[self.mesh.elements])

    def quadrature_coordinates(self) -> np.ndarray:
        return np.einsum('pq,eqi->epi', self.geometry_values, self.mesh.nodes[self.mesh.elements])

    def evaluate(self, coefficients: np.ndarray | StateField) -> np.ndarray:
        """Field values at every volume quadrature point, shape (n_el, n_qp, m)."""
        return np.einsum('pb,ebm->epm', self.element.basis_values, self.blocks(coefficients))


def encode(
    space: DGSpace,
    function: Callable[[np.ndarray], np.ndarray],
    coordinates: np.ndarray | None = None,
) -> StateField:
    """Nodal interpolant of `function`, which maps (n, d) points to (n, m) or (n,) values."""
    points = space.node_coordinates(coordinates).reshape(-1, space.mesh.dim)
    values = np.asarray(function(points))
    if values.ndim == 1:
        values = values[:, None]
    if values.shape != (points.shape[0], space.n_components):
        raise LayoutError(
            f'function returned shape {values.shape}, expected ({points.shape[0]}, {space.n_components})'
        )
    return StateField(values.ravel().copy(), space.layout)


def decode(space: DGSpace, field: StateField | np.ndarray, element: int, points: np.ndarray) -> np.ndarray:
    """Values of the field on one element at reference points, shape (n_points, m)."""
    blocks = space.blocks(field)
    if not 0 <= element < space.layout.n_elements:
        raise LayoutError(f'element {element} outside the mesh')
    return space.element.values(points) @ blocks[element]
