import numpy as np
from django.test import SimpleTestCase

from tracking.exceptions import ConstraintError, LayoutError
from tracking.fe import build_structured_mesh
from tracking.mapping import (
    BoundaryPlane,
    DomainMapping,
    FullMappingSpace,
    NodeKind,
    apply_chi,
    box_planes,
    build_boundary_constraint,
    build_reduced_mapping_basis,
    distortion,
    distortion_gradient,
    mapping_is_invertible,
    restrict,
)

UNIT_SQUARE = ((0.0, 1.0), (0.0, 1.0))


def _interior_bump(mesh, amplitude):
    X = mesh.nodes
    bump = X[:, 0] * (1 - X[:, 0]) * X[:, 1] * (1 - X[:, 1])
    return (X + amplitude * np.column_stack([bump, -bump])).ravel()


class DomainMappingTests(SimpleTestCase):
    def setUp(self):
        self.mesh = build_structured_mesh(UNIT_SQUARE, 3, 3, degree=2)

    def test_identity(self):
        mapping = DomainMapping.identity(self.mesh)
        G = mapping.jacobians(self.mesh.geometry.basis_gradients)
        np.testing.assert_allclose(G, np.broadcast_to(np.eye(2), G.shape), atol=1e-12)
        self.assertAlmostEqual(mapping.min_jacobian(), 1.0)

    def test_evaluate(self):
        dofs = 2.0 * self.mesh.nodes.ravel()
        mapping = DomainMapping(self.mesh, dofs)
        x, G, g = mapping.evaluate(0, np.array([[0.25, 0.25]]))
        np.testing.assert_allclose(G[0], 2.0 * np.eye(2), atol=1e-12)
        self.assertAlmostEqual(float(g[0]), 4.0)

    def test_inverted_mapping(self):
        dofs = self.mesh.nodes.copy()
        dofs[:, 0] = 1.0 - dofs[:, 0]
        self.assertFalse(mapping_is_invertible(DomainMapping(self.mesh, dofs.ravel())))

    def test_wrong_size(self):
        with self.assertRaises(LayoutError):
            DomainMapping(self.mesh, np.zeros(3))


class DistortionTests(SimpleTestCase):
    def setUp(self):
        self.mesh = build_structured_mesh(UNIT_SQUARE, 3, 3)

    def test_identity_value(self):
        eta = distortion(DomainMapping.identity(self.mesh))
        self.assertEqual(eta.shape, (self.mesh.n_elements,))
        self.assertAlmostEqual(float(eta.sum()), 4.0)

    def test_dilation_invariance(self):
        identity = distortion(DomainMapping.identity(self.mesh))
        dilated = distortion(DomainMapping(self.mesh, 3.0 * self.mesh.nodes.ravel()))
        np.testing.assert_allclose(dilated, identity, rtol=1e-12)

    def test_gradient_matches_central_differences(self):
        rng = np.random.default_rng(7)
        mapping = DomainMapping(self.mesh, _interior_bump(self.mesh, 0.4))
        gradient = distortion_gradient(mapping)
        h = 1e-6
        for trial in range(20):
            v = rng.standard_normal(mapping.dofs.size)
            plus = distortion(DomainMapping(self.mesh, mapping.dofs + h * v))
            minus = distortion(DomainMapping(self.mesh, mapping.dofs - h * v))
            expected = (plus - minus) / (2 * h)
            with self.subTest(trial=trial):
                np.testing.assert_allclose(gradient @ v, expected, rtol=1e-6, atol=1e-6 * np.abs(expected).max())

    def test_clamp_must_be_positive(self):
        with self.assertRaises(ValueError):
            distortion(DomainMapping.identity(self.mesh), eps=0.0)


class BoundaryConstraintTests(SimpleTestCase):
    def setUp(self):
        self.mesh = build_structured_mesh(UNIT_SQUARE, 3, 3)
        self.constraint = build_boundary_constraint(self.mesh, box_planes(UNIT_SQUARE))

    def test_node_kinds(self):
        kinds = self.constraint.kinds
        self.assertEqual(kinds.count(NodeKind.FIXED), 4)
        self.assertEqual(kinds.count(NodeKind.SLIDING), 8)
        self.assertEqual(kinds.count(NodeKind.INTERIOR), 4)
        self.assertEqual(self.constraint.n_unconstrained, 16)

    def test_restrict_then_apply(self):
        identity = self.mesh.nodes.ravel()
        np.testing.assert_allclose(apply_chi(self.constraint, restrict(self.constraint, identity)), identity)

    def test_boundary_nodes_stay_on_their_surfaces(self):
        rng = np.random.default_rng(3)
        x = apply_chi(self.constraint, rng.standard_normal(self.constraint.n_unconstrained)).reshape(-1, 2)
        for surface, plane in box_planes(UNIT_SQUARE).items():
            nodes = self.mesh.boundary_nodes(surface)
            np.testing.assert_allclose(x[nodes] @ np.array(plane.normal), plane.offset, atol=1e-12)

    def test_one_dimensional_map_fixes_endpoints(self):
        mesh = build_structured_mesh([(0.0, 10.0)], 4, degree=2)
        constraint = build_boundary_constraint(mesh, box_planes([(0.0, 10.0)]))
        self.assertEqual(constraint.n_unconstrained, mesh.n_nodes - 2)
        x = apply_chi(constraint, np.ones(constraint.n_unconstrained))
        self.assertEqual(x[0], 0.0)
        self.assertEqual(x[-1], 10.0)

    def test_missing_plane(self):
        planes = box_planes(UNIT_SQUARE)
        planes.pop(3)
        with self.assertRaises(ConstraintError):
            build_boundary_constraint(self.mesh, planes)

    def test_node_off_its_plane(self):
        planes = box_planes(UNIT_SQUARE)
        planes[1] = BoundaryPlane((0.0, 1.0), 0.5)
        with self.assertRaises(ConstraintError):
            build_boundary_constraint(self.mesh, planes)

    def test_wrong_unconstrained_size(self):
        with self.assertRaises(LayoutError):
            apply_chi(self.constraint, np.zeros(3))


class MappingSpaceTests(SimpleTestCase):
    def setUp(self):
        self.mesh = build_structured_mesh(UNIT_SQUARE, 3, 3)
        self.constraint = build_boundary_constraint(self.mesh, box_planes(UNIT_SQUARE))

    def test_full_space_origin_is_identity(self):
        space = FullMappingSpace(self.constraint)
        self.assertEqual(space.n_coordinates, 16)
        np.testing.assert_allclose(space.dofs(np.zeros(16)), self.mesh.nodes.ravel())

    def test_reduced_basis_from_aligned_mappings(self):
        rng = np.random.default_rng(11)
        base = restrict(self.constraint, self.mesh.nodes.ravel())
        aligned = np.column_stack([base] + [base + 0.01 * rng.standard_normal(base.size) for _ in range(3)])
        space = build_reduced_mapping_basis(self.constraint, aligned)
        self.assertEqual(space.n_coordinates, 3)
        np.testing.assert_allclose(space.modes.T @ space.modes, np.eye(3), atol=1e-12)
        # every aligned mapping is reproduced exactly
        for y in aligned.T:
            np.testing.assert_allclose(space.unconstrained(space.project(y)), y, atol=1e-12)

    def test_single_mapping_gives_empty_space(self):
        base = restrict(self.constraint, self.mesh.nodes.ravel())
        space = build_reduced_mapping_basis(self.constraint, base[:, None])
        self.assertEqual(space.n_coordinates, 0)
        np.testing.assert_allclose(space.dofs(np.zeros(0)), self.mesh.nodes.ravel())

    def test_rank_truncation_warns(self):
        base = restrict(self.constraint, self.mesh.nodes.ravel())
        shifted = base + 0.01
        aligned = np.column_stack([base, shifted, shifted])
        with self.assertLogs('tracking.mapping', 'WARNING'):
            space = build_reduced_mapping_basis(self.constraint, aligned, 2)
        self.assertTrue(space.truncated)
        self.assertEqual(space.n_coordinates, 1)

    def test_requested_size_out_of_range(self):
        base = restrict(self.constraint, self.mesh.nodes.ravel())
        with self.assertRaises(ValueError):
            build_reduced_mapping_basis(self.constraint, np.column_stack([base, base]), 2)
