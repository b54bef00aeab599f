"""Synthetic data generation following the model's generative process.

Also serves as the ground-truth oracle for parameter-recovery tests: the
sampled parameters and hidden assignments are returned alongside the corpus.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    Corpus,
    Document,
    Hyperparams,
    ModelParams,
    ModelSpec,
    PROB_TOL,
)

# Sub-stream labels for the splittable seeded RNG.  Parameter draws and token
# draws come from independent streams so that a dataset can be replayed from
# its parameters alone.
_STREAM_LABELS = {"params": 0x9e3779b9, "tokens": 0x85ebca6b}


def _stream(seed: int, label: str) -> np.random.Generator:
    return np.random.default_rng([seed, _STREAM_LABELS[label]])


def sample_categorical(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Draw an index from a categorical distribution given as a vector."""
    probs = np.asarray(probs, dtype=float)
    if abs(probs.sum() - 1.0) > PROB_TOL:
        raise ValueError(f"categorical probabilities sum to {probs.sum()!r}, not 1")
    u = rng.random()
    return int(np.searchsorted(np.cumsum(probs), u, side="right").clip(0, len(probs) - 1))


@dataclass
class GeneratedDataset:
    """A synthetic corpus plus the ground truth that produced it."""

    corpus: Corpus
    true_params: ModelParams
    true_topics: list[np.ndarray]  # per-document token topic assignments
    true_behaviours: np.ndarray  # per-document behaviour assignments


def generate_from(params: ModelParams, num_docs: int, doc_lengths: list[int],
                  seed: int) -> GeneratedDataset:
    """Run the generative chain with the supplied parameters.

    The behaviour of document 1 is drawn from ``pi``, later behaviours from
    the transition column of the previous behaviour; each token draws a topic
    from the behaviour's topic column and a word from the topic's word column.
    """
    if len(doc_lengths) != num_docs:
        raise ValueError("doc_lengths must have num_docs entries")
    if any(n <= 0 for n in doc_lengths):
        raise ValueError("zero-length documents are not allowed")
    spec = params.spec
    rng = _stream(seed, "tokens")

    # Precomputed cumulative columns: token sampling dominates the cost.
    cum_pi = np.cumsum(params.pi)
    cum_xi = np.cumsum(params.xi, axis=0)
    cum_theta = np.cumsum(params.theta, axis=0)
    cum_phi = np.cumsum(params.phi, axis=0)

    docs = []
    topics = []
    behaviours = np.empty(num_docs, dtype=np.int64)
    z = None
    for t in range(num_docs):
        if t == 0:
            z = int(np.searchsorted(cum_pi, rng.random(), side="right").clip(0, spec.num_behaviours - 1))
        else:
            z = int(np.searchsorted(cum_xi[:, z], rng.random(), side="right").clip(0, spec.num_behaviours - 1))
        behaviours[t] = z
        n = doc_lengths[t]
        u_topic = rng.random(n)
        y = np.searchsorted(cum_theta[:, z], u_topic, side="right").clip(0, spec.num_topics - 1)
        u_word = rng.random(n)
        x = np.empty(n, dtype=np.int64)
        for i in range(n):
            x[i] = np.searchsorted(cum_phi[:, y[i]], u_word[i], side="right").clip(0, spec.num_words - 1)
        docs.append(Document(words=x, timestamp=t + 1))
        topics.append(np.asarray(y, dtype=np.int64))
    corpus = Corpus(documents=docs, spec=spec)
    return GeneratedDataset(corpus=corpus, true_params=params,
                            true_topics=topics, true_behaviours=behaviours)


def generate(spec: ModelSpec, hyper: Hyperparams, num_docs: int,
             doc_lengths: list[int], seed: int) -> GeneratedDataset:
    """Draw parameters from their priors, then generate a corpus from them.

    Uses independent sub-streams of ``seed`` for the parameter and token
    draws, so ``generate_from`` with the returned parameters and the same
    seed replays the identical corpus.
    """
    rng = _stream(seed, "params")
    phi = rng.dirichlet(hyper.beta, size=spec.num_topics).T
    theta = rng.dirichlet(hyper.alpha, size=spec.num_behaviours).T
    xi = rng.dirichlet(hyper.gamma, size=spec.num_behaviours).T
    pi = rng.dirichlet(hyper.eta)
    params = ModelParams(phi=phi, theta=theta, xi=xi, pi=pi)
    return generate_from(params, num_docs, doc_lengths, seed)
