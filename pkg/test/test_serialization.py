import io
import os
import tempfile
import unittest
import numpy as np
import yaml

from holevo_bounds.bayes import CovariantQubitSpec, covariant_mixed_qubit_cost
from holevo_bounds.cli import build_parser, resolve_run_config, run
from holevo_bounds.holevo_exceptions import ConfigError
from holevo_bounds.serialization import load_covariant_spec, load_prior


class PriorFileCase(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, data: dict) -> str:
        path = os.path.join(self.tmp.name, "prior.yml")
        with open(path, "w") as stream:
            yaml.safe_dump(data, stream)
        return path


class PriorFileTest(PriorFileCase):
    def test_gaussian(self):
        prior = load_prior(self.write({"kind": "gaussian", "mean": [0.3, -0.2], "cov": [[0.04, 0.0], [0.0, 0.09]], "nodes": 40}))
        assert prior.param_count == 2
        assert len(prior.nodes) == 40**2
        assert np.allclose(prior.mean, [0.3, -0.2], atol=1e-9)
        assert np.allclose(prior.covariance, np.diag([0.04, 0.09]), atol=1e-9)

    def test_gaussian_default_nodes_shrink_with_dimension(self):
        prior = load_prior(self.write({"kind": "gaussian", "mean": [0.0, 0.0, 0.0], "cov": np.eye(3).tolist()}))
        assert len(prior.nodes) == 24**3
        assert np.allclose(prior.covariance, np.eye(3), atol=1e-6)

    def test_uniform(self):
        prior = load_prior(self.write({"kind": "uniform", "lower": [0.0, 1.0], "upper": [2.0, 3.0], "nodes": 8}))
        assert np.allclose(prior.mean, [1.0, 2.0], atol=1e-12)
        assert np.allclose(np.diag(prior.covariance), [1 / 3, 1 / 3], atol=1e-12)

    def test_discrete(self):
        prior = load_prior(self.write({"kind": "discrete", "points": [[-0.1], [0.1]], "probabilities": [0.5, 0.5]}))
        assert prior.param_count == 1
        assert abs(prior.mean[0]) < 1e-15
        assert abs(prior.covariance[0, 0] - 0.01) < 1e-15

    def test_grid_is_rescaled(self):
        prior = load_prior(self.write({"kind": "grid", "points": [[0.0], [1.0], [2.0]], "density": [1.0, 2.0, 1.0]}))
        assert np.allclose(prior.probabilities, [0.25, 0.5, 0.25], atol=1e-15)
        assert abs(prior.mean[0] - 1.0) < 1e-15

    def test_grid_with_weights(self):
        data = {"kind": "grid", "points": [[0.0, 1.0], [1.0, 1.0]], "density": [0.5, 1.5], "weights": [0.5, 0.5]}
        prior = load_prior(self.write(data))
        assert prior.param_count == 2
        assert np.allclose(prior.probabilities, [0.25, 0.75], atol=1e-15)
        assert np.allclose(prior.mean, [0.75, 1.0], atol=1e-15)

    def test_uniform_sphere(self):
        prior = load_prior(self.write({"kind": "uniform_sphere", "nodes": 32}))
        assert prior.param_count == 2
        cos_theta = np.cos(prior.nodes[:, 0])
        assert abs(prior.probabilities @ cos_theta) < 1e-12
        assert abs(prior.probabilities @ cos_theta**2 - 1 / 3) < 1e-9
        assert abs(prior.mean[1] - np.pi) < 1e-12

    def test_uniform_radial(self):
        prior = load_prior(self.write({"kind": "uniform_radial", "nodes": 16}))
        assert prior.param_count == 3
        assert len(prior.nodes) == 16**3
        radii = prior.nodes[:, 0]
        assert abs(prior.probabilities @ radii - 0.5) < 1e-12
        assert abs(prior.probabilities @ radii**2 - 1 / 3) < 1e-12

    def test_tabulated_radial(self):
        prior = load_prior(self.write({"kind": "radial", "radii": [0.0, 1.0], "density": [0.0, 2.0], "nodes": 16}))
        assert abs(prior.probabilities @ prior.nodes[:, 0] - 2 / 3) < 1e-12

    def test_rejects_bad_files(self):
        with self.assertRaises(ConfigError):
            load_prior(self.write({"kind": "beta"}))
        with self.assertRaises(ConfigError):
            load_prior(self.write({"kind": "gaussian", "mean": [0.0]}))
        with self.assertRaises(ConfigError):
            load_prior(self.write({"kind": "radial", "radii": [0.5, 0.2], "density": [1.0, 1.0]}))
        with self.assertRaises(ConfigError):
            load_prior(self.write({"kind": "radial", "radii": [0.0, 1.5], "density": [1.0, 1.0]}))


class CovariantSpecFileTest(PriorFileCase):
    def test_uniform_radial_spec(self):
        spec = load_covariant_spec(self.write({"kind": "uniform_radial", "nodes": 64}), 3)
        assert spec.n == 3
        assert spec.nodes == 64
        reference = CovariantQubitSpec.uniform(3, nodes=64)
        assert np.allclose(spec.radii, reference.radii)
        assert np.allclose(spec.weights, reference.weights)

    def test_tabulated_spec_is_normalized(self):
        spec = load_covariant_spec(self.write({"kind": "radial", "radii": [0.0, 1.0], "density": [0.0, 4.0], "nodes": 64}), 2)
        assert abs(spec.weights.sum() - 1.0) < 1e-12
        assert abs(spec.radii @ spec.weights - 2 / 3) < 1e-12

    def test_needs_radial_kind(self):
        with self.assertRaises(ConfigError):
            load_covariant_spec(self.write({"kind": "uniform_sphere"}), 2)

    def run_bayes(self, extra) -> dict:
        argv = ["--format", "structured", "bayes", "--kind", "covariant-mixed", "--n", "4", *extra]
        buf = io.StringIO()
        run(resolve_run_config(build_parser().parse_args(argv)), stream=buf)
        return yaml.safe_load(buf.getvalue())

    def test_cli_takes_radial_density(self):
        uniform = self.run_bayes([])
        from_file = self.run_bayes(["--prior", self.write({"kind": "uniform_radial"})])
        assert abs(uniform["cost"] - from_file["cost"]) < 1e-12
        linear = self.run_bayes(["--prior", self.write({"kind": "radial", "radii": [0.0, 1.0], "density": [0.0, 2.0]})])
        expected, _ = covariant_mixed_qubit_cost(CovariantQubitSpec.from_density(4, lambda r: 2 * r, normalize=True))
        assert abs(linear["cost"] - expected) < 1e-9
        assert abs(linear["cost"] - uniform["cost"]) > 1e-6


if __name__ == "__main__":
    unittest.main()
