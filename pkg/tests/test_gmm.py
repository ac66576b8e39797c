"""EM fitting, log densities against the brute-force oracle, classification."""

import numpy as np
import pytest

from oracles import gmm_logpdf_oracle
from swishnet.errors import ConfigError, FileFormatError
from swishnet.gmm import (GmmModel, VARIANCE_FLOOR, gmm_classify, gmm_fit,
                          load_gmms, log_likelihood, save_gmms)


class TestFit:
    def test_k1_closed_form(self):
        gmm = gmm_fit(np.array([[0.0], [2.0]]), n_components=1, seed=0)
        np.testing.assert_allclose(gmm.means, [[1.0]], atol=1e-12)
        np.testing.assert_allclose(gmm.variances, [[1.0]], atol=1e-12)
        np.testing.assert_allclose(gmm.weights, [1.0], atol=1e-12)

    def test_standard_normal_log_density_at_zero(self):
        gmm = GmmModel(weights=np.array([1.0]), means=np.zeros((1, 1)),
                       variances=np.ones((1, 1)))
        ll = log_likelihood(gmm, np.zeros((1, 1)))
        assert abs(ll[0] - (-0.5 * np.log(2 * np.pi))) < 1e-12
        assert abs(ll[0] - (-0.918938)) < 1e-6

    def test_too_many_components(self):
        with pytest.raises(ConfigError):
            gmm_fit(np.zeros((3, 2)), n_components=4)

    def test_em_monotone_over_seeds(self):
        rng = np.random.default_rng(0)
        for seed in range(20):
            k = [1, 2, 4, 8][seed % 4]
            data = rng.standard_normal((120, 3)) * rng.uniform(0.5, 2.0)
            gmm = gmm_fit(data, n_components=k, max_iters=40, seed=seed)
            gains = np.diff(gmm.log_likelihoods)
            assert (gains >= -1e-9).all(), f"seed {seed}: LL decreased by {gains.min()}"

    def test_two_component_mixture_recovery(self):
        rng = np.random.default_rng(1)
        data = np.concatenate([rng.normal(-3.0, 1.0, 5000),
                               rng.normal(3.0, 1.0, 5000)])[:, None]
        gmm = gmm_fit(data, n_components=2, max_iters=300, seed=0)
        recovered = np.sort(gmm.means[:, 0])
        np.testing.assert_allclose(recovered, [-3.0, 3.0], atol=0.1)

    def test_variance_floor_respected(self):
        # identical points would collapse variances without the floor
        data = np.vstack([np.zeros((50, 2)), np.ones((50, 2))])
        gmm = gmm_fit(data, n_components=2, max_iters=50, seed=3)
        assert (gmm.variances >= VARIANCE_FLOOR).all()

    def test_log_density_matches_oracle(self):
        rng = np.random.default_rng(2)
        gmm = gmm_fit(rng.standard_normal((200, 4)), n_components=4, max_iters=20, seed=0)
        points = rng.standard_normal((10, 4))
        ll = log_likelihood(gmm, points)
        for i in range(10):
            expected = gmm_logpdf_oracle(points[i], gmm.weights, gmm.means, gmm.variances)
            assert abs(ll[i] - expected) < 1e-10

    def test_weights_on_simplex(self):
        rng = np.random.default_rng(4)
        gmm = gmm_fit(rng.standard_normal((300, 2)), n_components=8, seed=1)
        assert abs(gmm.weights.sum() - 1.0) < 1e-12


class TestClassify:
    def _models(self):
        offsets = (-5.0, 0.0, 5.0)
        return [
            GmmModel(weights=np.array([1.0]), means=np.full((1, 2), mu),
                     variances=np.ones((1, 2)))
            for mu in offsets
        ]

    def test_unanimous_vote(self):
        models = self._models()
        frames = np.full((10, 2), 5.0)
        label, ll = gmm_classify(models, frames)
        assert label == 2
        assert ll.shape == (10, 3)

    def test_plurality_vote(self):
        models = self._models()
        frames = np.vstack([np.full((50, 2), 5.0), np.full((48, 2), 0.0)])
        label, _ = gmm_classify(models, frames)
        assert label == 2

    def test_tie_broken_by_summed_log_likelihood(self):
        models = self._models()
        # one frame votes each of class 0 and class 2; class 2 frame is
        # closer to its model, so its summed LL wins the tie
        frames = np.vstack([np.full((1, 2), -4.0), np.full((1, 2), 5.0)])
        label, ll = gmm_classify(models, frames)
        votes = np.bincount(np.argmax(ll, axis=1), minlength=3)
        assert votes[0] == votes[2] == 1
        assert label == 2

    def test_separable_clusters_perfect_accuracy(self):
        rng = np.random.default_rng(5)
        centers = np.array([[-6.0, 0.0], [0.0, 6.0], [6.0, 0.0]])
        models = []
        for c in centers:
            train = rng.normal(c, 0.5, size=(300, 2))
            models.append(gmm_fit(train, n_components=2, max_iters=50, seed=0))
        correct = 0
        for true_label, c in enumerate(centers):
            for _ in range(20):
                clip = rng.normal(c, 0.5, size=(30, 2))
                label, _ = gmm_classify(models, clip)
                correct += label == true_label
        assert correct == 60


class TestSerialization:
    def test_round_trip_classification_parity(self, tmp_path):
        rng = np.random.default_rng(6)
        models = {
            "noise": gmm_fit(rng.normal(-3, 1, (100, 3)), 2, seed=0),
            "music": gmm_fit(rng.normal(0, 1, (100, 3)), 2, seed=0),
            "speech": gmm_fit(rng.normal(3, 1, (100, 3)), 2, seed=0),
        }
        path = tmp_path / "g.swgm"
        save_gmms(models, path)
        assert path.read_bytes()[:4] == b"SWGM"
        loaded = load_gmms(path)
        assert list(loaded) == ["noise", "music", "speech"]
        frames = rng.normal(3, 1, (25, 3))
        assert gmm_classify(models, frames)[0] == gmm_classify(loaded, frames)[0]

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "g.swgm"
        path.write_bytes(b"SWSH" + b"\x00" * 16)
        with pytest.raises(FileFormatError):
            load_gmms(path)
