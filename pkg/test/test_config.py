import argparse
import json
import os
import shutil
import tempfile
import unittest

from snapmix.common.config import ExperimentConfig, DEFAULTS
from snapmix.common.exceptions import ConfigError


class TestExperimentConfig(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def _write(self, obj):
        path = os.path.join(self.tmpdir, 'config.json')
        with open(path, 'w') as f:
            json.dump(obj, f)
        return path

    def test_defaults(self):
        cfg = ExperimentConfig().validate()
        self.assertEqual(cfg.n, DEFAULTS['n'])
        self.assertEqual(cfg.mode, 'oracle')
        self.assertAlmostEqual(cfg.weight_floor, 0.25)
        self.assertEqual(cfg.to_json(), DEFAULTS)

    def test_overrides(self):
        cfg = ExperimentConfig(k=3, w_min=0.1).validate()
        self.assertEqual(cfg.k, 3)
        self.assertEqual(cfg.weight_floor, 0.1)
        with self.assertRaises(ConfigError):
            ExperimentConfig(aperture=3)

    def test_from_args(self):
        path = self._write({'k': 3, 'zeta': 0.5})
        args = argparse.Namespace(n=50, k=2, seed=None, mode='sampled',
                                  config=path)
        cfg = ExperimentConfig.from_args(args).validate()
        self.assertEqual(cfg.n, 50)
        self.assertEqual(cfg.seed, 0)
        self.assertEqual(cfg.mode, 'sampled')
        # The file wins over the command line
        self.assertEqual(cfg.k, 3)
        self.assertEqual(cfg.zeta, 0.5)

    def test_bad_file(self):
        cfg = ExperimentConfig()
        with self.assertRaises(ConfigError):
            cfg.apply_json(self._write([1, 2, 3]))
        with self.assertRaises(ConfigError):
            cfg.apply_json(self._write({'colour': 'red'}))

    def test_validation(self):
        bad = [dict(n=0), dict(k=2.5), dict(seed=-1), dict(threads=0),
               dict(samples1=True), dict(mode='blind'),
               dict(projection='l2'), dict(zeta=0.0), dict(omega=1.0),
               dict(delta=1.0), dict(k=2, w_min=0.6), dict(eps=1.0),
               dict(tau=2.0), dict(sigma=1.0), dict(match_tol=-1.0),
               dict(rho=1.0), dict(psi=1.0), dict(k=3, b=4), dict(m=-1)]
        for overrides in bad:
            with self.assertRaises(ConfigError, msg=repr(overrides)):
                ExperimentConfig(**overrides).validate()


if __name__ == '__main__':
    unittest.main()
