import numpy as np
import pytest

from markovtopics import ModelParams, ModelSpec, make_prior
from markovtopics.generate import generate, generate_from, sample_categorical


class TestSampleCategorical:
    def test_degenerate_single(self):
        rng = np.random.default_rng(0)
        assert all(sample_categorical(np.array([1.0]), rng) == 0 for _ in range(20))

    def test_point_mass(self):
        rng = np.random.default_rng(0)
        assert all(sample_categorical(np.array([0.0, 1.0, 0.0]), rng) == 1
                   for _ in range(20))

    def test_frequency(self):
        rng = np.random.default_rng(7)
        draws = np.array([sample_categorical(np.array([0.3, 0.7]), rng)
                          for _ in range(100_000)])
        assert abs(np.mean(draws == 0) - 0.3) < 0.01

    def test_non_normalized_rejected(self):
        with pytest.raises(ValueError):
            sample_categorical(np.array([0.3, 0.3]), np.random.default_rng(0))


def _uniform_params(X, Y, Z):
    return ModelParams(
        phi=np.full((X, Y), 1.0 / X),
        theta=np.full((Y, Z), 1.0 / Y),
        xi=np.full((Z, Z), 1.0 / Z),
        pi=np.full(Z, 1.0 / Z),
    )


class TestGenerateFrom:
    def test_absorbing_start(self):
        p = ModelParams(phi=np.full((2, 1), 0.5), theta=np.ones((1, 2)),
                        xi=np.eye(2), pi=np.array([1.0, 0.0]))
        ds = generate_from(p, 10, [2] * 10, seed=0)
        assert np.all(ds.true_behaviours == 0)

    def test_cyclic_chain(self):
        # 0 -> 1 -> 2 -> 0 deterministic cycle.
        xi = np.zeros((3, 3))
        xi[1, 0] = xi[2, 1] = xi[0, 2] = 1.0
        p = ModelParams(phi=np.full((2, 1), 0.5), theta=np.ones((1, 3)),
                        xi=xi, pi=np.array([1.0, 0.0, 0.0]))
        ds = generate_from(p, 9, [1] * 9, seed=1)
        assert list(ds.true_behaviours) == [0, 1, 2] * 3

    def test_uniform_word_frequencies(self):
        p = _uniform_params(4, 2, 2)
        ds = generate_from(p, 100, [1000] * 100, seed=3)
        words = np.concatenate([d.words for d in ds.corpus.documents])
        freqs = np.bincount(words, minlength=4) / len(words)
        assert np.all(np.abs(freqs - 0.25) < 0.01)

    def test_word_frequency_tracks_phi_given_topic(self):
        # Point-mass theta makes every token use topic 0; word frequencies
        # then converge to phi's first column.
        phi = np.array([[0.6, 0.1], [0.3, 0.4], [0.1, 0.5]])
        p = ModelParams(phi=phi, theta=np.array([[1.0], [0.0]]),
                        xi=np.ones((1, 1)), pi=np.array([1.0]))
        ds = generate_from(p, 100, [1000] * 100, seed=4)
        words = np.concatenate([d.words for d in ds.corpus.documents])
        freqs = np.bincount(words, minlength=3) / len(words)
        assert np.all(np.abs(freqs - phi[:, 0]) < 0.02)

    def test_zero_length_rejected(self):
        p = _uniform_params(2, 1, 1)
        with pytest.raises(ValueError):
            generate_from(p, 2, [3, 0], seed=0)

    def test_transition_frequencies_match_xi(self):
        xi = np.array([[0.8, 0.3], [0.2, 0.7]])
        p = ModelParams(phi=np.full((2, 1), 0.5), theta=np.ones((1, 2)),
                        xi=xi, pi=np.array([0.5, 0.5]))
        ds = generate_from(p, 20000, [1] * 20000, seed=5)
        z = ds.true_behaviours
        for z_old in range(2):
            idx = np.nonzero(z[:-1] == z_old)[0]
            emp = np.mean(z[idx + 1] == 0)
            assert abs(emp - xi[0, z_old]) < 0.02


class TestGenerate:
    def test_single_behaviour(self):
        spec = ModelSpec(3, 2, 1)
        ds = generate(spec, make_prior("1", spec), 5, [2] * 5, seed=0)
        assert np.all(ds.true_behaviours == 0)

    def test_deterministic(self):
        spec = ModelSpec(3, 2, 2)
        h = make_prior("1", spec)
        a = generate(spec, h, 4, [3] * 4, seed=9)
        b = generate(spec, h, 4, [3] * 4, seed=9)
        for da, db in zip(a.corpus.documents, b.corpus.documents):
            assert np.array_equal(da.words, db.words)

    def test_replay_from_drawn_params(self):
        # Parameter and token draws use independent sub-streams, so a
        # dataset replays exactly from its own parameters and seed.
        spec = ModelSpec(4, 2, 2)
        h = make_prior("1", spec)
        ds = generate(spec, h, 6, [4] * 6, seed=11)
        replay = generate_from(ds.true_params, 6, [4] * 6, seed=11)
        for da, db in zip(ds.corpus.documents, replay.corpus.documents):
            assert np.array_equal(da.words, db.words)
        assert np.array_equal(ds.true_behaviours, replay.true_behaviours)

    def test_assignment_shapes(self):
        spec = ModelSpec(3, 2, 2)
        ds = generate(spec, make_prior("1", spec), 3, [2, 4, 1], seed=2)
        assert [len(y) for y in ds.true_topics] == [2, 4, 1]
        assert ds.true_behaviours.shape == (3,)
