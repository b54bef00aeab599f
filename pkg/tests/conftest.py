import numpy as np
import pytest

from markovtopics import ModelSpec, corpus_from_lists, make_prior, random_init


def random_instance(rng, max_dim=3, max_docs=4, max_len=3):
    """A random tiny model + corpus pair for oracle comparisons."""
    spec = ModelSpec(
        num_words=int(rng.integers(1, max_dim + 1)),
        num_topics=int(rng.integers(1, max_dim + 1)),
        num_behaviours=int(rng.integers(1, max_dim + 1)),
    )
    hyper = make_prior("1", spec)
    params = random_init(spec, hyper, int(rng.integers(0, 2**31)))
    T = int(rng.integers(1, max_docs + 1))
    docs = [rng.integers(0, spec.num_words, size=int(rng.integers(1, max_len + 1)))
            for _ in range(T)]
    corpus = corpus_from_lists(docs, spec)
    return spec, params, corpus


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
