import numpy as np
from django.test import SimpleTestCase

from tracking.fe import build_structured_mesh
from tracking.problems import (
    GAMMA,
    AdvecReactProblem,
    NozzleLaw,
    NozzleProblem,
    advec_react_data,
    advection_box_set,
    advection_line_set,
    cutoff_gaussian,
    get_problem,
    nozzle_area,
    nozzle_data,
    nozzle_mach,
    onepar_mapping,
    quad_bijection,
    quad_bijection_inverse,
    stagnation_pressure,
    steepening_gaussian,
    steepening_map,
)


class DemoFunctionTests(SimpleTestCase):
    def test_cutoff_gaussian(self):
        values = cutoff_gaussian(np.array([0.2, 0.2 + 1e-12, -0.3]), (0.8, 0.5, 0.2))
        self.assertAlmostEqual(values[0], 0.8)
        self.assertEqual(values[1], 0.0)
        self.assertAlmostEqual(values[2], 0.8 * np.exp(-1.0))

    def test_cutoff_gaussian_needs_a_width(self):
        with self.assertRaises(ValueError):
            cutoff_gaussian(0.0, (1.0, 0.0, 0.0))

    def test_quad_bijection(self):
        np.testing.assert_allclose(quad_bijection(np.array([-1.0, 1.0]), 0.3), [-1.0, 1.0])
        self.assertAlmostEqual(float(quad_bijection(0.0, 0.3)), 0.3)
        X = np.linspace(-1, 1, 41)
        np.testing.assert_allclose(quad_bijection_inverse(quad_bijection(X, -0.4), -0.4), X, atol=1e-12)
        np.testing.assert_allclose(quad_bijection_inverse(X, 0.0), X)

    def test_quad_bijection_range(self):
        with self.assertRaises(ValueError):
            quad_bijection(0.0, 0.5)
        quad_bijection(0.0, 0.6, strict=False)

    def test_steepening(self):
        self.assertAlmostEqual(float(steepening_map(0.5, 0.3)), 0.3)
        np.testing.assert_allclose(steepening_map(np.array([0.0, 1.0]), 0.7), [0.0, 1.0])
        self.assertAlmostEqual(float(steepening_gaussian(0.4, 0.4)), 0.2 / np.sqrt(0.4))
        amplitude = 0.2 / np.sqrt(0.4)
        # width 0.1 on the left, 0.004 / mu^2 on the right
        self.assertAlmostEqual(float(steepening_gaussian(0.35, 0.4)), amplitude * np.exp(-0.25))
        self.assertAlmostEqual(float(steepening_gaussian(0.45, 0.4)), amplitude * np.exp(-4.0))

    def test_stagnation_pressure(self):
        self.assertAlmostEqual(stagnation_pressure(1.0), 1.89293, delta=1e-4)
        self.assertAlmostEqual(stagnation_pressure(3.0), 12.0610, delta=5e-4)
        self.assertAlmostEqual(stagnation_pressure(2.0, pressure=2.0), 2.0 * stagnation_pressure(2.0))
        with self.assertRaises(ValueError):
            stagnation_pressure(0.9)


class AdvectionTests(SimpleTestCase):
    def test_data(self):
        data = advec_react_data((0.0, 0.5, 80.0))
        np.testing.assert_allclose(data.beta, [1.0, 0.0])
        x = np.array([[0.0, 0.5], [0.0, 0.0], [0.0, 1.0]])
        np.testing.assert_allclose(data.inflow_value(x), 0.0, atol=1e-15)
        self.assertAlmostEqual(float(data.reaction(np.array([0.0, 0.0]))), 1.5)
        self.assertTrue(data.is_inflow(np.array([-1.0, 0.0])))
        self.assertFalse(data.is_inflow(np.array([0.0, 1.0])))

    def test_parameter_domain(self):
        problem = AdvecReactProblem()
        problem.check_parameter([np.pi / 10, 0.3, 100.0])
        with self.assertRaises(ValueError):
            problem.check_parameter([0.0, 0.8, 80.0])
        with self.assertRaises(ValueError):
            problem.check_parameter([0.0, 0.5])

    def test_training_order_is_centroid_first(self):
        grid = advection_box_set(3)
        self.assertEqual(len(grid), 27)
        np.testing.assert_allclose(grid[0], [0.0, 0.5, 80.0], atol=1e-15)
        ordered = AdvecReactProblem().order_training(list(reversed(grid)))
        np.testing.assert_allclose(ordered[0], [0.0, 0.5, 80.0], atol=1e-15)
        scale = np.array([np.pi / 5, 0.4, 40.0])
        distances = [np.linalg.norm((mu - ordered[0]) / scale) for mu in ordered]
        self.assertEqual(distances, sorted(distances))

    def test_line_set(self):
        thetas = [mu[0] for mu in advection_line_set(3)]
        np.testing.assert_allclose(thetas, [-np.pi / 10, 0.0, np.pi / 10], atol=1e-15)
        with self.assertRaises(ValueError):
            advection_line_set(0)

    def test_setup(self):
        setup = AdvecReactProblem().setup(2, 2, 1)
        self.assertEqual(setup.disc.size, 8 * 3)
        self.assertEqual(setup.constraint.n_unconstrained, 2 * 1 + 4)


class OneParameterMappingTests(SimpleTestCase):
    def setUp(self):
        self.mesh = build_structured_mesh([(0.0, 1.0), (0.0, 1.0)], 4, 4)

    def test_boundary_is_preserved(self):
        x = onepar_mapping(self.mesh, 0.3).coordinates
        X = self.mesh.nodes
        for surface in (1, 3):
            nodes = self.mesh.boundary_nodes(surface)
            np.testing.assert_allclose(x[nodes], X[nodes], atol=1e-15)
        left = np.isclose(X[:, 0], 0.0)
        np.testing.assert_allclose(x[left], X[left])
        np.testing.assert_allclose(x[:, 0], X[:, 0])

    def test_midline_moves_with_c(self):
        x = onepar_mapping(self.mesh, 0.2).coordinates
        X = self.mesh.nodes
        middle = np.isclose(X[:, 1], 0.5)
        np.testing.assert_allclose(x[middle, 1], 0.5 + 0.2 * X[middle, 0])

    def test_range(self):
        with self.assertRaises(ValueError):
            onepar_mapping(self.mesh, 0.5)


class NozzleTests(SimpleTestCase):
    def test_area(self):
        self.assertAlmostEqual(float(nozzle_area(0.0, 1.0)), 3.0)
        self.assertAlmostEqual(float(nozzle_area(5.0, 1.0)), 1.0)
        self.assertAlmostEqual(float(nozzle_data([0.5]).area(5.0)), 0.5)

    def test_mach_number_does_not_depend_on_the_area(self):
        density, velocity = 1.0, 2.0
        pressure = velocity ** 2 / GAMMA
        energy = pressure / (GAMMA - 1.0) + 0.5 * density * velocity ** 2
        u = np.array([density, density * velocity, energy])
        for area in (0.5, 1.0, 3.0):
            with self.subTest(area=area):
                self.assertAlmostEqual(float(nozzle_mach(area * u)), 1.0)

    def test_parameter_domain_and_order(self):
        problem = NozzleProblem()
        with self.assertRaises(ValueError):
            problem.check_parameter([0.4])
        ordered = problem.order_training([[1.5], [0.5], [1.0]])
        self.assertEqual([float(mu[0]) for mu in ordered], [0.5, 1.0, 1.5])

    def test_roe_flux_is_consistent(self):
        law = NozzleLaw()
        mu = np.array([1.0])
        x = np.array([[2.0], [7.5]])
        u = law.initial_state(x, mu)
        for sign in (1.0, -1.0):
            normal = np.full((2, 1), sign)
            expected = law.flux(u, x, mu)[..., 0] * sign
            np.testing.assert_allclose(law.numerical_flux(u, u, normal, x, mu), expected, rtol=1e-12, atol=1e-12)

    def test_roe_flux_is_conservative(self):
        law = NozzleLaw()
        mu = np.array([1.2])
        x = np.array([[3.0]])
        ul = law.initial_state(x, mu)
        ur = ul * np.array([1.1, 0.8, 1.05])
        normal = np.array([[1.0]])
        np.testing.assert_allclose(
            law.numerical_flux(ul, ur, normal, x, mu),
            -law.numerical_flux(ur, ul, -normal, x, mu),
            rtol=1e-12,
            atol=1e-12,
        )

    def test_inlet_and_outlet_ghosts(self):
        law = NozzleLaw()
        mu = np.array([1.0])
        x = np.array([[0.0]])
        u = law.initial_state(x, mu)
        area = nozzle_area(0.0, 1.0)
        inlet = law.boundary_state(u, x, np.array([[-1.0]]), 1, mu)
        self.assertAlmostEqual(float(inlet[0, 0] / area), 1.0)
        outlet = law.boundary_state(u, x, np.array([[1.0]]), 2, mu)
        pressure = 0.4 * (outlet[0, 2] - 0.5 * outlet[0, 1] ** 2 / outlet[0, 0]) / area
        self.assertAlmostEqual(float(pressure), 0.7)

    def test_registry(self):
        self.assertIsInstance(get_problem('nozzle1d'), NozzleProblem)
        with self.assertRaises(ValueError):
            get_problem('cylinder')
