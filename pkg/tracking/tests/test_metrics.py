import threading

import numpy as np
from django.test import SimpleTestCase

from tracking.exceptions import LayoutError, SolverError
from tracking.fe import DGSpace, build_structured_mesh, encode
from tracking.hdm import solve_hdm
from tracking.metrics import ErrorReport, SweepRecord, jump_locator, rel_error, sweep
from tracking.problems import NOZZLE_LENGTH, NozzleProblem, nozzle_mach


class RelErrorTests(SimpleTestCase):
    def setUp(self):
        self.space = DGSpace(build_structured_mesh([(0.0, 1.0), (0.0, 1.0)], 2, 2), 1, 2)
        self.field = encode(self.space, lambda x: np.column_stack([1.0 + x[:, 0], x[:, 1] - 2.0]))

    def test_scaled_field(self):
        half = 0.5 * self.field.coefficients
        for norm in ('l2', 'l1'):
            with self.subTest(norm=norm):
                self.assertAlmostEqual(rel_error(self.space, self.field, half, norm), 0.5)
                self.assertEqual(rel_error(self.space, self.field, self.field, norm), 0.0)

    def test_l1_of_a_constant(self):
        ones = np.ones(self.space.size)
        self.assertAlmostEqual(rel_error(self.space, ones, np.zeros(self.space.size), 'l1'), 1.0)

    def test_zero_reference(self):
        with self.assertRaises(ValueError):
            rel_error(self.space, np.zeros(self.space.size), self.field)

    def test_unknown_norm(self):
        with self.assertRaises(ValueError):
            rel_error(self.space, self.field, self.field, 'linf')


class JumpLocatorTests(SimpleTestCase):
    def setUp(self):
        self.space = DGSpace(build_structured_mesh([(0.0, 1.0)], 4), 1, 1)

    def test_step_field(self):
        blocks = np.zeros(self.space.layout.shape)
        blocks[:2] = 1.0
        location = jump_locator(self.space, blocks.ravel())
        self.assertAlmostEqual(location.position, 0.5)
        self.assertAlmostEqual(location.magnitude, 1.0)
        self.assertAlmostEqual(self.space.mesh.nodes[location.node, 0], 0.5)

    def test_continuous_field(self):
        field = encode(self.space, lambda x: 3.0 * x[:, 0])
        self.assertIsNone(jump_locator(self.space, field))

    def test_two_dimensional_field(self):
        space = DGSpace(build_structured_mesh([(0.0, 1.0), (0.0, 1.0)], 2, 2), 1, 1)
        with self.assertRaises(LayoutError):
            jump_locator(space, np.zeros(space.size))

    def test_element_means_of_a_smeared_front(self):
        space = DGSpace(build_structured_mesh([(0.0, 1.0)], 8), 1, 1)
        field = encode(space, lambda x: np.tanh(20.0 * (x[:, 0] - 0.5)))
        location = jump_locator(space, field, quantity=lambda values: values[..., 0])
        self.assertAlmostEqual(location.position, 0.5)
        self.assertGreater(location.magnitude, 0.5)

    def test_constant_quantity_has_no_jump(self):
        blocks = np.zeros(self.space.layout.shape)
        blocks[:2] = 1.0
        location = jump_locator(self.space, blocks.ravel(), quantity=lambda values: np.ones(values.shape[:-1]))
        self.assertIsNone(location)


class NozzleShockLocationTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.setup = NozzleProblem().setup(200, None, 1)
        cls.state = solve_hdm(cls.setup.disc, cls.setup.nominal, [0.5])

    def test_shock_sits_in_the_diverging_section(self):
        location = jump_locator(self.setup.space, self.state, quantity=nozzle_mach)
        self.assertIsNotNone(location)
        self.assertGreater(location.position, 0.5 * NOZZLE_LENGTH)
        self.assertLess(location.position, NOZZLE_LENGTH)
        self.assertGreater(location.magnitude, 0.1)


class SweepTests(SimpleTestCase):
    def solve(self, mu):
        if mu[0] < 0:
            raise SolverError('diverged')
        return SweepRecord(mu, e_rom=float(mu[0]), e_ift=0.1 * float(mu[0]), iterations=3)

    def test_failures_are_recorded(self):
        report = sweep(self.solve, [[-1.0], [2.0], [1.0]])
        self.assertEqual([r.status for r in report.records], ['failed', 'ok', 'ok'])
        self.assertEqual(report.n_failed, 1)
        self.assertEqual(report.max_rom, 2.0)
        self.assertAlmostEqual(report.max_ift, 0.2)

    def test_threaded_sweep_keeps_the_parameter_order(self):
        parameters = [[float(i)] for i in range(8)]
        seen = set()

        def solve(mu):
            seen.add(threading.get_ident())
            return self.solve(mu)

        report = sweep(solve, parameters, workers=2)
        self.assertEqual([float(r.mu[0]) for r in report.records], [float(i) for i in range(8)])
        self.assertGreaterEqual(len(seen), 1)

    def test_empty_test_set(self):
        with self.assertRaises(ValueError):
            sweep(self.solve, [])

    def test_report_without_successes(self):
        report = ErrorReport([SweepRecord(np.array([0.0]), status='failed')])
        self.assertTrue(np.isnan(report.max_rom))

    def test_row(self):
        record = SweepRecord(np.array([0.1, 0.5]), 1e-2, 1e-3, 0.5, 0.25, 7, 'max-iter')
        self.assertEqual(record.row(), [0.1, 0.5, 1e-2, 1e-3, 0.5, 0.25, 7, 'max-iter'])
        self.assertFalse(record.failed)
