import numpy as np
from django.test import SimpleTestCase

from tracking.exceptions import InvalidStateError, NonInvertibleMappingError
from tracking.fe import DGSpace, Mesh, build_structured_mesh, encode
from tracking.hdm import (
    ConservationLaw,
    Discretization,
    assemble_jacobians,
    assemble_residual,
    jacobian_products,
    solve_hdm,
    transform_flux_source,
)
from tracking.mapping import DomainMapping
from tracking.problems import (
    AdvecReactProblem,
    NozzleProblem,
    OneParameterMapping,
    nozzle_area,
    nozzle_pressure,
)

ADVECTION_MU = np.array([0.1, 0.5, 70.0])
NOZZLE_MU = np.array([1.0])
STEP = 1e-6


def central_difference(fun, x, v, h=STEP):
    return (fun(x + h * v) - fun(x - h * v)) / (2 * h)


class DerivativeChecks:
    """Complex-step Jacobians against central differences on random directions."""

    def assert_close(self, exact, expected):
        scale = max(np.abs(expected).max(), 1.0)
        np.testing.assert_allclose(exact, expected, rtol=1e-6, atol=1e-6 * scale)

    def check_state_jacobian(self, disc, U, mapping, mu):
        J, _ = assemble_jacobians(disc, U, mapping, mu)
        rng = np.random.default_rng(0)
        for trial in range(20):
            v = rng.standard_normal(U.size)
            expected = central_difference(lambda Z: assemble_residual(disc, Z, mapping, mu), U, v)
            with self.subTest(trial=trial):
                self.assert_close(J @ v, expected)

    def check_mapping_jacobian(self, disc, U, mapping, mu):
        _, Jx = assemble_jacobians(disc, U, mapping, mu)
        rng = np.random.default_rng(1)
        mesh = mapping.mesh
        for trial in range(20):
            b = 1e-2 * rng.standard_normal(mapping.dofs.size)
            expected = central_difference(
                lambda y: assemble_residual(disc, U, DomainMapping(mesh, y), mu), mapping.dofs, b
            )
            with self.subTest(trial=trial):
                self.assert_close(Jx @ b, expected)


class AdvectionResidualTests(DerivativeChecks, SimpleTestCase):
    def setUp(self):
        self.setup = AdvecReactProblem().setup(3, 3, 2)
        self.disc = self.setup.disc
        self.mapping = OneParameterMapping(self.setup.mesh).mapping(np.array([0.1]))
        self.U = np.random.default_rng(5).standard_normal(self.disc.size)

    def test_state_jacobian(self):
        self.check_state_jacobian(self.disc, self.U, self.mapping, ADVECTION_MU)

    def test_mapping_jacobian(self):
        self.check_mapping_jacobian(self.disc, self.U, self.mapping, ADVECTION_MU)

    def test_products_agree_with_sparse_jacobians(self):
        rng = np.random.default_rng(2)
        V = rng.standard_normal((self.disc.size, 3))
        B = rng.standard_normal((self.mapping.dofs.size, 2))
        J, Jx = assemble_jacobians(self.disc, self.U, self.mapping, ADVECTION_MU)
        state, geometry = jacobian_products(self.disc, self.U, self.mapping, ADVECTION_MU, V=V, B=B)
        np.testing.assert_allclose(state, J @ V, rtol=1e-10, atol=1e-10)
        np.testing.assert_allclose(geometry, Jx @ B, rtol=1e-10, atol=1e-10)

    def test_residual_is_affine_in_the_state(self):
        zero = assemble_residual(self.disc, np.zeros(self.disc.size), self.mapping, ADVECTION_MU)
        R = assemble_residual(self.disc, self.U, self.mapping, ADVECTION_MU)
        R2 = assemble_residual(self.disc, 2 * self.U, self.mapping, ADVECTION_MU)
        np.testing.assert_allclose(R2 - zero, 2 * (R - zero), rtol=1e-10, atol=1e-10)

    def test_solve_converges(self):
        state = solve_hdm(self.disc, self.setup.nominal, ADVECTION_MU)
        R = assemble_residual(self.disc, state, self.setup.nominal, ADVECTION_MU)
        self.assertLess(np.linalg.norm(R), 1e-8)

    def test_solve_on_a_deformed_mesh(self):
        state = solve_hdm(self.disc, self.mapping, ADVECTION_MU)
        self.assertLess(np.linalg.norm(assemble_residual(self.disc, state, self.mapping, ADVECTION_MU)), 1e-8)

    def test_inverted_mapping_raises(self):
        inverted = OneParameterMapping(self.setup.mesh).mapping(np.array([5.0]))
        with self.assertRaises(NonInvertibleMappingError):
            assemble_residual(self.disc, self.U, inverted, ADVECTION_MU)

    def test_non_finite_state_raises(self):
        U = self.U.copy()
        U[3] = np.nan
        with self.assertRaises(InvalidStateError):
            assemble_residual(self.disc, U, self.mapping, ADVECTION_MU)

    def test_wrong_parameter_count(self):
        with self.assertRaises(ValueError):
            assemble_residual(self.disc, self.U, self.mapping, [0.1, 0.5])


class NozzleResidualTests(DerivativeChecks, SimpleTestCase):
    def setUp(self):
        self.setup = NozzleProblem().setup(6, None, 2)
        self.disc = self.setup.disc
        X = self.setup.mesh.nodes[:, 0]
        self.mapping = DomainMapping(self.setup.mesh, X + 0.05 * np.sin(np.pi * X / 10.0))
        U = self.disc.initial_guess(self.mapping, NOZZLE_MU)
        self.U = U + 1e-2 * np.random.default_rng(9).standard_normal(U.size)

    def test_state_jacobian(self):
        self.check_state_jacobian(self.disc, self.U, self.mapping, NOZZLE_MU)

    def test_mapping_jacobian(self):
        self.check_mapping_jacobian(self.disc, self.U, self.mapping, NOZZLE_MU)

    def test_reversed_mesh_raises(self):
        reversed_dofs = 10.0 - self.setup.mesh.nodes[:, 0]
        with self.assertRaises(NonInvertibleMappingError):
            assemble_residual(self.disc, self.U, DomainMapping(self.setup.mesh, reversed_dofs), NOZZLE_MU)


class UniformAdvectionLaw(ConservationLaw):
    """beta . grad u = beta . grad u_exact with upwind fluxes and exact inflow data."""

    n_components = 1
    dim = 2
    linear = True
    surfaces = (1, 2, 3, 4)
    beta = np.array([1.0, 0.5])

    def __init__(self, exact=None, gradient=None):
        self.exact = exact or (lambda x: np.ones(x.shape[:-1]))
        self.gradient = gradient or (lambda x: np.zeros(x.shape))

    def flux(self, u, x, mu):
        return u[..., :, None] * self.beta

    def source(self, u, x, mu):
        return (self.gradient(x) @ self.beta)[..., None]

    def numerical_flux(self, ul, ur, normal, x, mu):
        bn = normal @ self.beta
        return bn[..., None] * np.where(np.real(bn)[..., None] >= 0.0, ul, ur)

    def boundary_state(self, u, x, normal, surface, mu):
        inflow = np.real(normal @ self.beta) < 0.0
        return np.where(inflow[..., None], self.exact(x)[..., None], u)

    def initial_state(self, x, mu):
        return np.zeros(x.shape[:-1] + (1,))


NO_PARAMETERS = np.zeros(0)


class TransformTests(SimpleTestCase):
    def setUp(self):
        rng = np.random.default_rng(4)
        self.law = UniformAdvectionLaw(gradient=lambda x: np.ones(x.shape))
        self.u = rng.standard_normal((5, 1))
        self.x = rng.standard_normal((5, 2))

    def test_identity_mapping(self):
        G = np.broadcast_to(np.eye(2), (5, 2, 2))
        F, S = transform_flux_source(self.u, G, np.ones(5), NO_PARAMETERS, self.law, self.x)
        np.testing.assert_allclose(F, self.law.flux(self.u, self.x, NO_PARAMETERS))
        np.testing.assert_allclose(S, self.law.source(self.u, self.x, NO_PARAMETERS))

    def test_one_dimensional_stretch(self):
        law = NozzleProblem().law()
        x = np.linspace(1.0, 9.0, 4)[:, None]
        u = np.tile([1.0, 0.5, 3.0], (4, 1))
        G = np.full((4, 1, 1), 2.0)
        F, S = transform_flux_source(u, G, np.full(4, 2.0), NOZZLE_MU, law, x)
        np.testing.assert_allclose(F, law.flux(u, x, NOZZLE_MU))
        np.testing.assert_allclose(S, 2.0 * law.source(u, x, NOZZLE_MU))

    def test_rotation(self):
        angle = 0.3
        Q = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
        G = np.broadcast_to(Q, (5, 2, 2))
        F, S = transform_flux_source(self.u, G, np.ones(5), NO_PARAMETERS, self.law, self.x)
        np.testing.assert_allclose(F, self.law.flux(self.u, self.x, NO_PARAMETERS) @ Q, atol=1e-14)
        np.testing.assert_allclose(S, self.law.source(self.u, self.x, NO_PARAMETERS))

    def test_singular_mapping_raises(self):
        with self.assertRaises(NonInvertibleMappingError):
            transform_flux_source(self.u, np.zeros((5, 2, 2)), np.zeros(5), NO_PARAMETERS, self.law, self.x)


class DiscretizationPropertyTests(SimpleTestCase):
    def test_free_stream_is_preserved_on_a_deformed_mesh(self):
        mesh = build_structured_mesh([(0.0, 1.0), (0.0, 1.0)], 4, 4)
        disc = Discretization(DGSpace(mesh, 2, 1), UniformAdvectionLaw())
        mapping = OneParameterMapping(mesh).mapping(np.array([0.2]))
        constant = encode(disc.space, lambda x: np.ones(len(x)))
        R = assemble_residual(disc, constant, mapping, NO_PARAMETERS)
        self.assertLess(np.abs(R).max(), 1e-12)

    def test_manufactured_solution_converges_at_second_order(self):
        law = UniformAdvectionLaw(
            exact=lambda x: np.sin(2.0 * x[..., 0] + x[..., 1]),
            gradient=lambda x: np.cos(2.0 * x[..., 0] + x[..., 1])[..., None] * np.array([2.0, 1.0]),
        )
        errors = []
        for n in (8, 16):
            mesh = build_structured_mesh([(0.0, 1.0), (0.0, 1.0)], n, n)
            disc = Discretization(DGSpace(mesh, 1, 1), law)
            state = solve_hdm(disc, DomainMapping.identity(mesh), NO_PARAMETERS)
            space = disc.space
            error = space.evaluate(state)[..., 0] - law.exact(space.quadrature_coordinates())
            errors.append(np.sqrt(np.sum(space.weights * error ** 2)))
        self.assertGreater(np.log2(errors[0] / errors[1]), 1.5)

    def test_element_renumbering_permutes_the_residual(self):
        setup = AdvecReactProblem().setup(3, 3, 2)
        mesh = setup.mesh
        perm = np.random.default_rng(6).permutation(mesh.n_elements)
        inverse = np.empty_like(perm)
        inverse[perm] = np.arange(perm.size)
        faces = mesh.boundary_faces.copy()
        faces[:, 0] = inverse[faces[:, 0]]
        renumbered = Mesh(mesh.dim, mesh.nodes, mesh.elements[perm], mesh.geom_degree, faces, mesh.surfaces)
        disc = Discretization(DGSpace(renumbered, 2, 1), setup.disc.law)

        dofs = OneParameterMapping(mesh).mapping(np.array([0.1])).dofs
        U = np.random.default_rng(7).standard_normal(setup.disc.size)
        R = assemble_residual(setup.disc, U, DomainMapping(mesh, dofs), ADVECTION_MU)
        blocks = U.reshape(setup.space.layout.shape)[perm].ravel()
        R_renumbered = assemble_residual(disc, blocks, DomainMapping(renumbered, dofs), ADVECTION_MU)
        np.testing.assert_allclose(
            R_renumbered.reshape(disc.space.layout.shape), R.reshape(setup.space.layout.shape)[perm], atol=1e-12
        )


class NozzleSolveTests(SimpleTestCase):
    mu = np.array([0.5])

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.setup = NozzleProblem().setup(200, None, 1)
        cls.state = solve_hdm(cls.setup.disc, cls.setup.nominal, cls.mu)

    def test_residual_is_converged(self):
        disc, nominal = self.setup.disc, self.setup.nominal
        start = assemble_residual(disc, disc.initial_guess(nominal, self.mu), nominal, self.mu)
        R = assemble_residual(disc, self.state, nominal, self.mu)
        self.assertLessEqual(np.linalg.norm(R), 1e-9 * max(1.0, np.linalg.norm(start)))

    def test_density_and_pressure_stay_positive(self):
        space = self.setup.space
        values = space.evaluate(self.state)
        area = nozzle_area(space.quadrature_coordinates()[..., 0], self.mu[0])
        self.assertGreater(values[..., 0].min(), 0.0)
        self.assertGreater(nozzle_pressure(values, area).min(), 0.0)
