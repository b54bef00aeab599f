import numpy as np

from markovtopics import ModelSpec, corpus_from_lists, make_prior
from markovtopics import generate, gibbs
from markovtopics.model import validate_params

from _oracles import enum_collapsed_posterior


class TestTally:
    def test_hand_counts(self):
        spec = ModelSpec(3, 2, 2)
        corpus = corpus_from_lists([[0, 1], [2]], spec)
        y_assign = [np.array([0, 1]), np.array([1])]
        z_assign = np.array([0, 1])
        c = gibbs.tally(y_assign, z_assign, corpus)
        assert c.n_xy[0, 0] == 1 and c.n_xy[1, 1] == 1 and c.n_xy[2, 1] == 1
        assert c.n_yz[0, 0] == 1 and c.n_yz[1, 0] == 1 and c.n_yz[1, 1] == 1
        assert c.n_zz[1, 0] == 1 and c.n_zz.sum() == 1
        assert c.n_z1[0] == 1 and c.n_z1.sum() == 1

    def test_totals(self):
        spec = ModelSpec(4, 3, 2)
        ds = generate.generate(spec, make_prior("1", spec), 6, [3] * 6, seed=0)
        state = gibbs.gibbs_init(ds.corpus, spec, seed=1)
        c = state.counts
        assert c.n_xy.sum() == ds.corpus.num_tokens
        assert c.n_yz.sum() == ds.corpus.num_tokens
        assert c.n_zz.sum() == len(ds.corpus) - 1
        assert c.n_z1.sum() == 1
        assert np.array_equal(state.topic_totals, c.n_xy.sum(axis=0))


class TestSweep:
    def test_audit_passes_over_many_sweeps(self):
        spec = ModelSpec(4, 3, 3)
        ds = generate.generate(spec, make_prior("1", spec), 8, [4] * 8, seed=2)
        h = make_prior("1", spec)
        state = gibbs.gibbs_init(ds.corpus, spec, seed=0)
        for _ in range(25):
            gibbs.gibbs_sweep(state, ds.corpus, h, audit=True)
        assert state.sweeps == 25

    def test_deterministic_in_seed(self):
        spec = ModelSpec(3, 2, 2)
        ds = generate.generate(spec, make_prior("1", spec), 6, [3] * 6, seed=3)
        h = make_prior("1", spec)
        a = gibbs.gibbs_init(ds.corpus, spec, seed=7)
        b = gibbs.gibbs_init(ds.corpus, spec, seed=7)
        for _ in range(10):
            gibbs.gibbs_sweep(a, ds.corpus, h)
            gibbs.gibbs_sweep(b, ds.corpus, h)
        assert np.array_equal(a.z_assign, b.z_assign)
        for ya, yb in zip(a.y_assign, b.y_assign):
            assert np.array_equal(ya, yb)

    def test_degenerate_single_state_no_op(self):
        spec = ModelSpec(3, 1, 1)
        corpus = corpus_from_lists([[0, 1], [2]], spec)
        h = make_prior("1", spec)
        state = gibbs.gibbs_init(corpus, spec, seed=0)
        before = state.counts.copy()
        gibbs.gibbs_sweep(state, corpus, h, audit=True)
        assert np.array_equal(before.n_xy, state.counts.n_xy)
        assert np.all(state.z_assign == 0)


class TestPointEstimate:
    def test_hand_arithmetic(self):
        spec = ModelSpec(2, 1, 1)
        corpus = corpus_from_lists([[0, 0, 1]], spec)
        y_assign = [np.array([0, 0, 0])]
        c = gibbs.tally(y_assign, np.array([0]), corpus)
        p = gibbs.point_estimate(c, make_prior("1", spec))
        assert np.allclose(p.phi[:, 0], [3 / 5, 2 / 5])
        assert np.allclose(p.pi, [1.0])

    def test_valid_distributions(self):
        spec = ModelSpec(4, 2, 2)
        ds = generate.generate(spec, make_prior("1", spec), 6, [4] * 6, seed=1)
        state = gibbs.gibbs_init(ds.corpus, spec, seed=0)
        p = gibbs.point_estimate(state.counts, make_prior("H", spec))
        assert validate_params(p, spec) == []


class TestStationaryDistribution:
    def _empirical(self, corpus, spec, hyper, seed, burn, keep):
        state = gibbs.gibbs_init(corpus, spec, seed)
        for _ in range(burn):
            gibbs.gibbs_sweep(state, corpus, hyper)
        freq = {}
        for _ in range(keep):
            gibbs.gibbs_sweep(state, corpus, hyper)
            key = (tuple(int(v) for v in state.z_assign),
                   tuple(int(v) for y in state.y_assign for v in y))
            freq[key] = freq.get(key, 0) + 1
        return {k: v / keep for k, v in freq.items()}

    def test_matches_enumerated_posterior_flat_prior(self):
        # Tiny instance: the chain's long-run state frequencies must match
        # the exactly enumerated collapsed posterior in total variation.
        spec = ModelSpec(2, 2, 2)
        corpus = corpus_from_lists([[0], [1, 0]], spec)
        h = make_prior("1", spec)
        exact = enum_collapsed_posterior(corpus, h)
        emp = self._empirical(corpus, spec, h, seed=11, burn=500, keep=40_000)
        tv = 0.5 * sum(abs(emp.get(k, 0.0) - p) for k, p in exact.items())
        tv += 0.5 * sum(v for k, v in emp.items() if k not in exact)
        assert tv < 0.02

    def test_matches_enumerated_posterior_uneven_prior(self):
        # Asymmetric hyperparameters exercise every prior term in the
        # conditionals, including the initial-behaviour factor.
        from markovtopics import Hyperparams
        spec = ModelSpec(2, 2, 2)
        corpus = corpus_from_lists([[1], [0]], spec)
        h = Hyperparams(alpha=np.array([2.0, 0.7]), beta=np.array([0.5, 1.5]),
                        gamma=np.array([1.2, 0.8]), eta=np.array([3.0, 1.0]))
        exact = enum_collapsed_posterior(corpus, h)
        emp = self._empirical(corpus, spec, h, seed=3, burn=500, keep=40_000)
        tv = 0.5 * sum(abs(emp.get(k, 0.0) - p) for k, p in exact.items())
        tv += 0.5 * sum(v for k, v in emp.items() if k not in exact)
        assert tv < 0.02

    def test_three_document_chain_marginals(self):
        # Longer chain: compare the marginal distribution of the behaviour
        # path only, which keeps the enumeration cheap.
        spec = ModelSpec(2, 1, 2)
        corpus = corpus_from_lists([[0], [1], [0]], spec)
        h = make_prior("1", spec)
        exact = enum_collapsed_posterior(corpus, h)
        z_exact = {}
        for (zs, _), p in exact.items():
            z_exact[zs] = z_exact.get(zs, 0.0) + p
        state = gibbs.gibbs_init(corpus, spec, seed=5)
        for _ in range(500):
            gibbs.gibbs_sweep(state, corpus, h)
        freq = {}
        keep = 40_000
        for _ in range(keep):
            gibbs.gibbs_sweep(state, corpus, h)
            key = tuple(int(v) for v in state.z_assign)
            freq[key] = freq.get(key, 0) + 1
        tv = 0.5 * sum(abs(freq.get(k, 0) / keep - p) for k, p in z_exact.items())
        assert tv < 0.02


class TestGsFit:
    def test_sample_count_and_shapes(self):
        spec = ModelSpec(3, 2, 2)
        ds = generate.generate(spec, make_prior("1", spec), 6, [3] * 6, seed=0)
        samples, per_sample, pooled = gibbs.gs_fit(
            ds.corpus, make_prior("1", spec), spec, seed=0,
            burn_in=20, num_samples=3, spacing=5)
        assert len(samples) == 3 and len(per_sample) == 3
        assert validate_params(pooled, spec) == []
        for c in samples:
            assert c.n_xy.sum() == ds.corpus.num_tokens

    def test_deterministic(self):
        spec = ModelSpec(3, 2, 2)
        ds = generate.generate(spec, make_prior("1", spec), 5, [3] * 5, seed=4)
        h = make_prior("1", spec)
        _, _, a = gibbs.gs_fit(ds.corpus, h, spec, seed=2, burn_in=10,
                               num_samples=2, spacing=3)
        _, _, b = gibbs.gs_fit(ds.corpus, h, spec, seed=2, burn_in=10,
                               num_samples=2, spacing=3)
        assert np.array_equal(a.phi, b.phi)
