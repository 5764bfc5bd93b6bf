import math
import tempfile
from pathlib import Path

from django import forms
from django.test import SimpleTestCase, override_settings

from tracking.config import config_hash, load_config, read_ini
from tracking.exceptions import ConfigError
from tracking.forms import parse_grid, parse_number
from tracking.problems import AdvecReactProblem, NozzleProblem

ADVECTION = """
[run]
problem = advec2d

[training]
theta = linspace(-pi/10, pi/10, 3)
b = 0.55
s = 80

[test]
theta = 0.1, -0.1
b = 0.5
s = 70
"""

NOZZLE = """
[run]
problem = nozzle1d
output_dir = {output}

[mesh]
nx = 40

[training]
mu = linspace(0.5, 1.5, 3)
"""


class ParsingTests(SimpleTestCase):
    def test_numbers(self):
        self.assertAlmostEqual(parse_number('-pi/10'), -math.pi / 10)
        self.assertAlmostEqual(parse_number('2*pi/5'), 2 * math.pi / 5)
        self.assertAlmostEqual(parse_number(' pi '), math.pi)
        self.assertEqual(parse_number('1e-3'), 1e-3)
        with self.assertRaises(forms.ValidationError):
            parse_number('ten')

    def test_grids(self):
        grid = parse_grid('linspace(-pi/10, pi/10, 3)')
        self.assertEqual(len(grid), 3)
        self.assertAlmostEqual(grid[0], -math.pi / 10)
        self.assertAlmostEqual(grid[1], 0.0)
        self.assertEqual(parse_grid('0.1, 0.2'), [0.1, 0.2])
        self.assertEqual(parse_grid('80'), [80.0])
        for text in ('linspace(0, 1, 0)', 'linspace(0, 1, 2.5)', ' , '):
            with self.subTest(text=text), self.assertRaises(forms.ValidationError):
                parse_grid(text)


class ConfigTestCase(SimpleTestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self._tmp.cleanup)
        self.root = Path(self._tmp.name)
        override = override_settings(IFTROM_OUTPUT_ROOT=self.root / 'runs', IFTROM_WORKERS=3)
        override.enable()
        self.addCleanup(override.disable)

    def write(self, text, name='run.ini'):
        path = self.root / name
        path.write_text(text)
        return path

    def assertConfigError(self, text, fragment):
        with self.assertRaises(ConfigError) as caught:
            load_config(self.write(text))
        self.assertTrue(
            any(fragment in error for error in caught.exception.errors) or fragment in str(caught.exception),
            caught.exception.errors,
        )


class LoadConfigTests(ConfigTestCase):
    def test_advection_defaults(self):
        config = load_config(self.write(ADVECTION))
        self.assertIsInstance(config.problem, AdvecReactProblem)
        self.assertEqual((config.nx, config.ny, config.degree, config.geom_degree), (34, 34, 3, 1))
        self.assertEqual(config.settings.kappa, 0.0)
        self.assertEqual(config.settings.lm_lambda, 0.0)
        self.assertEqual(config.settings.max_iterations, 200)
        self.assertEqual(config.norm, 'l2')
        self.assertTrue(config.align)
        self.assertEqual(config.workers, 3)
        self.assertEqual(config.output_dir, self.root / 'runs' / 'advec2d')
        self.assertEqual(len(config.training), 3)
        self.assertEqual(len(config.test), 2)
        # centroid of the training set first
        self.assertAlmostEqual(float(config.training[0][0]), 0.0)
        self.assertEqual(len(config.config_hash), 64)

    def test_nozzle_with_overrides(self):
        output = self.root / 'elsewhere'
        config = load_config(self.write(NOZZLE.format(output=output)))
        self.assertIsInstance(config.problem, NozzleProblem)
        self.assertEqual(config.output_dir, output)
        self.assertEqual(config.nx, 40)
        self.assertIsNone(config.ny)
        self.assertEqual(config.degree, 1)
        self.assertIsNone(config.settings.kappa)
        self.assertIsNone(config.settings.lm_lambda)
        self.assertEqual(config.norm, 'l1')
        self.assertEqual([float(mu[0]) for mu in config.training], [0.5, 1.0, 1.5])
        self.assertEqual(config.test, [])

    def test_explicit_solver_and_mesh_values(self):
        text = ADVECTION.replace(
            '[training]',
            '[mesh]\nnx = 4\ndegree = 1\n\n[solver]\nkappa = auto\nlm_lambda = 1e-3\neps1 = 1e-6\n'
            'max_iterations = 20\n\n[training]',
        ).replace('problem = advec2d', 'problem = advec2d\nalign = false\nworkers = 2\nnorm = l1')
        config = load_config(self.write(text))
        self.assertEqual((config.nx, config.ny, config.degree), (4, 4, 1))
        self.assertIsNone(config.settings.kappa)
        self.assertEqual(config.settings.lm_lambda, 1e-3)
        self.assertEqual(config.settings.eps1, 1e-6)
        self.assertEqual(config.settings.max_iterations, 20)
        self.assertFalse(config.align)
        self.assertEqual(config.workers, 2)
        self.assertEqual(config.norm, 'l1')

    def test_setup_uses_the_mesh_section(self):
        text = ADVECTION.replace('[training]', '[mesh]\nnx = 2\ndegree = 1\n\n[training]')
        setup = load_config(self.write(text)).setup()
        self.assertEqual(setup.mesh.n_elements, 8)
        self.assertEqual(setup.space.degree, 1)


class ConfigErrorTests(ConfigTestCase):
    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            load_config(self.root / 'missing.ini')

    def test_malformed_file(self):
        self.assertConfigError('problem = advec2d\n', 'cannot parse')

    def test_unknown_problem(self):
        self.assertConfigError('[run]\nproblem = cylinder\n', 'problem:')

    def test_demo_problem_points_to_the_demo_command(self):
        self.assertConfigError('[run]\nproblem = demo-gaussian\n', 'use the demo command')

    def test_unknown_section(self):
        self.assertConfigError(ADVECTION + '\n[plots]\ndpi = 300\n', 'unknown section [plots]')

    def test_key_in_two_sections(self):
        text = ADVECTION.replace('[training]', '[mesh]\nproblem = nozzle1d\n\n[training]')
        self.assertConfigError(text, 'more than one section')

    def test_missing_parameter_key(self):
        self.assertConfigError(ADVECTION.replace('b = 0.55\n', ''), 'missing')

    def test_parameter_out_of_bounds(self):
        self.assertConfigError(ADVECTION.replace('s = 80', 's = 120'), 'outside')

    def test_non_positive_tolerance(self):
        text = ADVECTION.replace('[training]', '[solver]\neps1 = 0\n\n[training]')
        self.assertConfigError(text, 'eps1: must be positive')

    def test_negative_kappa(self):
        text = ADVECTION.replace('[training]', '[solver]\nkappa = -1\n\n[training]')
        self.assertConfigError(text, 'kappa:')

    def test_bad_grid(self):
        self.assertConfigError(ADVECTION.replace('s = 80', 's = linspace(60, 100, x)'), '[training]')


class ConfigHashTests(ConfigTestCase):
    def test_hash_ignores_layout(self):
        first = read_ini(self.write('[run]\nproblem = advec2d\n\n[mesh]\nnx = 4\n', 'a.ini'))
        second = read_ini(self.write('[mesh]\nNX =   4\n[run]\nproblem=advec2d\n', 'b.ini'))
        self.assertEqual(config_hash(first), config_hash(second))

    def test_hash_follows_values(self):
        first = read_ini(self.write('[mesh]\nnx = 4\n', 'a.ini'))
        second = read_ini(self.write('[mesh]\nnx = 5\n', 'b.ini'))
        self.assertNotEqual(config_hash(first), config_hash(second))
