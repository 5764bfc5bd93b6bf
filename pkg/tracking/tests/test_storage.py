import json
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from tracking.exceptions import ArtifactError
from tracking.ift import IftSettings, offline_train
from tracking.metrics import ErrorReport, SweepRecord
from tracking.problems import AdvecReactProblem, NozzleProblem, advection_line_set
from tracking.storage import (
    HEADER,
    MAGIC,
    load_model,
    read_csv,
    read_manifest,
    read_matrix,
    read_singular_values,
    save_model,
    write_csv,
    write_manifest,
    write_matrix,
    write_report,
    write_singular_values,
)


class StorageTestCase(SimpleTestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self._tmp.cleanup)
        self.root = Path(self._tmp.name)


class MatrixFileTests(StorageTestCase):
    def test_layout(self):
        path = self.root / 'a.bin'
        array = np.arange(6.0).reshape(2, 3)
        write_matrix(path, array)
        data = path.read_bytes()
        self.assertEqual(data[:8], MAGIC)
        self.assertEqual(len(data), HEADER.size + 6 * 8)
        # column-major payload
        np.testing.assert_array_equal(np.frombuffer(data[HEADER.size:], dtype='<f8'), [0.0, 3.0, 1.0, 4.0, 2.0, 5.0])
        np.testing.assert_array_equal(read_matrix(path), array)

    def test_vector_is_a_column(self):
        path = self.root / 'v.bin'
        write_matrix(path, [1.0, 2.0])
        self.assertEqual(read_matrix(path).shape, (2, 1))

    def test_corrupt_files(self):
        path = self.root / 'bad.bin'
        write_matrix(path, np.eye(2))
        path.write_bytes(path.read_bytes()[:-8])
        with self.assertRaises(ArtifactError):
            read_matrix(path)
        path.write_bytes(b'NOTAMAT!' + bytes(16))
        with self.assertRaises(ArtifactError):
            read_matrix(path)
        path.write_bytes(b'IFT')
        with self.assertRaises(ArtifactError):
            read_matrix(path)
        with self.assertRaises(ArtifactError):
            read_matrix(self.root / 'missing.bin')

    def test_three_dimensional_arrays_are_rejected(self):
        with self.assertRaises(ValueError):
            write_matrix(self.root / 'c.bin', np.zeros((2, 2, 2)))


class TableTests(StorageTestCase):
    def test_floats_round_trip_exactly(self):
        path = self.root / 't.csv'
        write_csv(path, ['a', 'b', 'c'], [[1.0 / 3.0, 2, True]])
        self.assertEqual(path.read_text(), 'a,b,c\n0.3333333333333333,2,true\n')
        header, rows = read_csv(path)
        self.assertEqual(header, ['a', 'b', 'c'])
        self.assertEqual(float(rows[0][0]), 1.0 / 3.0)

    def test_singular_values_with_energy_markers(self):
        path = self.root / 'sigma.csv'
        sigma = np.array([1.0, 0.1, 0.01, 0.001])
        write_singular_values(path, sigma, (1e-3, 1e-6, 1e-9))
        header, rows = read_csv(path)
        self.assertEqual(header, ['index', 'sigma', 'energy'])
        self.assertEqual([row[2] for row in rows], ['', '0.001', '1e-06', '1e-09'])
        np.testing.assert_array_equal(read_singular_values(path), sigma)

    def test_report(self):
        path = self.root / 'sweep.csv'
        report = ErrorReport([SweepRecord(np.array([0.1]), 0.2, 0.01, 1.0, 0.5, 4, 'ok')])
        write_report(path, report, ('mu',))
        header, rows = read_csv(path)
        self.assertEqual(header, ['mu_1', 'e_rom', 'e_ift', 'res_rom', 'res_ift', 'iters_ift', 'status'])
        self.assertEqual(rows, [['0.1', '0.2', '0.01', '1.0', '0.5', '4', 'ok']])

    def test_empty_table(self):
        path = self.root / 'empty.csv'
        path.write_text('')
        with self.assertRaises(ArtifactError):
            read_csv(path)


class ManifestTests(StorageTestCase):
    def test_keys_are_sorted(self):
        write_manifest(self.root, {'state_rank': 2, 'files': {}, 'config_hash': 'x'})
        text = (self.root / 'manifest.json').read_text()
        self.assertLess(text.index('config_hash'), text.index('files'))
        self.assertLess(text.index('files'), text.index('state_rank'))
        self.assertEqual(read_manifest(self.root)['state_rank'], 2)

    def test_missing_or_malformed(self):
        with self.assertRaises(ArtifactError):
            read_manifest(self.root)
        (self.root / 'manifest.json').write_text('{not json')
        with self.assertRaises(ArtifactError):
            read_manifest(self.root)


class ModelStorageTests(StorageTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.setup = AdvecReactProblem().setup(2, 2, 1)
        settings = IftSettings(kappa=0.0, lm_lambda=0.0, max_iterations=10)
        cls.model = offline_train(cls.setup, advection_line_set(2), settings, align=False)

    def test_save_writes_every_artifact(self):
        manifest = save_model(self.model, self.root, 'abc', {'align': False})
        self.assertEqual(manifest['config_hash'], 'abc')
        self.assertEqual(manifest['snapshot_count'], 2)
        self.assertEqual(manifest['parameter_names'], ['theta', 'b', 's'])
        self.assertFalse(manifest['align'])
        self.assertNotIn('mapping_sigma', manifest['files'])
        for name in manifest['files'].values():
            self.assertTrue((self.root / name).exists(), name)
        self.assertEqual(json.loads((self.root / 'manifest.json').read_text()), manifest)

    def test_load_restores_the_model(self):
        save_model(self.model, self.root)
        loaded = load_model(self.root, self.setup)
        np.testing.assert_array_equal(loaded.basis.basis, self.model.basis.basis)
        np.testing.assert_array_equal(loaded.basis.singular_values, self.model.basis.singular_values)
        self.assertEqual(loaded.mapping_space.n_coordinates, 1)
        c = np.array([0.2])
        np.testing.assert_allclose(loaded.mapping_space.dofs(c), self.model.mapping_space.dofs(c), atol=1e-15)
        self.assertEqual(len(loaded.archive), 2)

    def test_load_on_a_different_mesh(self):
        save_model(self.model, self.root)
        with self.assertRaises(ArtifactError):
            load_model(self.root, AdvecReactProblem().setup(3, 3, 1))

    def test_load_for_another_problem(self):
        save_model(self.model, self.root)
        with self.assertRaises(ArtifactError):
            load_model(self.root, NozzleProblem().setup(4, None, 1))
