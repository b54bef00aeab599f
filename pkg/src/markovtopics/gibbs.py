"""Collapsed Gibbs sampling: hidden assignments with the parameter matrices
integrated out.

The conditionals are derived from the full joint of the model.  For a topic
assignment the conditional is the usual word-count ratio times the
topic-given-behaviour count.  For a behaviour assignment it combines the
Dirichlet-multinomial compound likelihood of the document's topic counts
with the collapsed transition terms into and out of the document, including
the self-transition correction when the neighbouring behaviours coincide.
The initial-behaviour distribution is not sampled; its collapsed single
observation contributes a term proportional to the prior vector.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .model import (
    Corpus,
    Hyperparams,
    ModelParams,
    ModelSpec,
    SufficientCounts,
    zero_counts,
)
from .vb import point_estimates, vb_m_step


@dataclass
class GibbsState:
    """Assignments, their tallies and the chain's RNG."""

    y_assign: list[np.ndarray]
    z_assign: np.ndarray
    counts: SufficientCounts
    topic_totals: np.ndarray  # cached column sums of n_xy
    rng: np.random.Generator
    sweeps: int = 0


def tally(y_assign, z_assign, corpus: Corpus) -> SufficientCounts:
    """Full recount of the assignments; used for init and audits."""
    spec = corpus.spec
    counts = zero_counts(spec, mode="integer")
    for t, doc in enumerate(corpus.documents):
        np.add.at(counts.n_xy, (doc.words, y_assign[t]), 1)
        np.add.at(counts.n_yz, (y_assign[t], z_assign[t]), 1)
    for t in range(1, len(corpus)):
        counts.n_zz[z_assign[t], z_assign[t - 1]] += 1
    counts.n_z1[z_assign[0]] += 1
    return counts


def gibbs_init(corpus: Corpus, spec: ModelSpec, seed: int) -> GibbsState:
    """Uniform-random assignments with consistent tallies."""
    rng = np.random.default_rng(seed)
    y_assign = [rng.integers(0, spec.num_topics, size=len(doc))
                for doc in corpus.documents]
    z_assign = rng.integers(0, spec.num_behaviours, size=len(corpus))
    counts = tally(y_assign, z_assign, corpus)
    return GibbsState(y_assign=y_assign, z_assign=z_assign, counts=counts,
                      topic_totals=counts.n_xy.sum(axis=0), rng=rng)


def _resample_behaviours(state: GibbsState, corpus: Corpus, hyper: Hyperparams):
    n_yz, n_zz, n_z1 = state.counts.n_yz, state.counts.n_zz, state.counts.n_z1
    z = state.z_assign
    alpha, gamma, eta = hyper.alpha, hyper.gamma, hyper.eta
    num_topics = n_yz.shape[0]
    num_behaviours = n_yz.shape[1]
    T = len(corpus)
    ks = np.arange(num_behaviours)
    log_eta = np.log(eta)
    gamma_sum = gamma.sum()
    rng = state.rng

    for t in range(T):
        z_old = int(z[t])
        m = np.bincount(state.y_assign[t], minlength=num_topics)
        n_t = int(m.sum())

        # Exclude document t's own contributions before scoring candidates.
        n_yz[:, z_old] -= m
        if t == 0:
            n_z1[z_old] -= 1
        else:
            n_zz[z_old, z[t - 1]] -= 1
        if t < T - 1:
            n_zz[z[t + 1], z_old] -= 1

        # Dirichlet-multinomial compound term of the document's topic counts.
        a = n_yz + alpha[:, None]
        dm = (gammaln(a + m[:, None]) - gammaln(a)).sum(axis=0)
        tot = a.sum(axis=0)
        dm -= gammaln(tot + n_t) - gammaln(tot)

        logp = dm
        if t == 0:
            logp = logp + log_eta
        else:
            logp = logp + np.log(n_zz[:, z[t - 1]] + gamma)
        if t < T - 1:
            z_next = int(z[t + 1])
            num = n_zz[z_next, :] + gamma[z_next]
            den = n_zz.sum(axis=0) + gamma_sum
            if t > 0:
                z_prev = int(z[t - 1])
                num = num + ((ks == z_prev) & (z_next == z_prev))
                den = den + (ks == z_prev)
            logp = logp + np.log(num) - np.log(den)

        logp -= logp.max()
        p = np.exp(logp)
        cp = np.cumsum(p)
        k = int(np.searchsorted(cp, rng.random() * cp[-1], side="right").clip(0, num_behaviours - 1))

        n_yz[:, k] += m
        if t == 0:
            n_z1[k] += 1
        else:
            n_zz[k, z[t - 1]] += 1
        if t < T - 1:
            n_zz[z[t + 1], k] += 1
        z[t] = k


def _resample_topics(state: GibbsState, corpus: Corpus, hyper: Hyperparams):
    n_xy, n_yz = state.counts.n_xy, state.counts.n_yz
    totals = state.topic_totals
    alpha, beta = hyper.alpha, hyper.beta
    beta_sum = beta.sum()
    num_topics = n_xy.shape[1]
    rng = state.rng

    for t, doc in enumerate(corpus.documents):
        z_t = int(state.z_assign[t])
        ys = state.y_assign[t]
        words = doc.words
        for i in range(len(words)):
            x = int(words[i])
            y_old = int(ys[i])
            n_xy[x, y_old] -= 1
            totals[y_old] -= 1
            n_yz[y_old, z_t] -= 1
            w = (n_xy[x] + beta[x]) / (totals + beta_sum) * (n_yz[:, z_t] + alpha)
            cw = np.cumsum(w)
            k = int(np.searchsorted(cw, rng.random() * cw[-1], side="right").clip(0, num_topics - 1))
            n_xy[x, k] += 1
            totals[k] += 1
            n_yz[k, z_t] += 1
            ys[i] = k


def gibbs_sweep(state: GibbsState, corpus: Corpus, hyper: Hyperparams,
                audit: bool = False) -> GibbsState:
    """One full pass: behaviours in time order, then topics in corpus order.

    With ``audit`` the tallies are recounted from scratch afterwards and a
    mismatch aborts.
    """
    _resample_behaviours(state, corpus, hyper)
    _resample_topics(state, corpus, hyper)
    state.sweeps += 1
    if audit:
        fresh = tally(state.y_assign, state.z_assign, corpus)
        for name in ("n_xy", "n_yz", "n_zz", "n_z1"):
            if not np.array_equal(getattr(fresh, name), getattr(state.counts, name)):
                raise AssertionError(f"count audit failed for {name} after sweep {state.sweeps}")
    return state


def point_estimate(counts: SufficientCounts, hyper: Hyperparams) -> ModelParams:
    """Posterior-mean estimate from a single counts sample: (count + prior)
    column-normalised — algebraically the same form as the VB point
    estimate, so it is computed through it."""
    float_counts = SufficientCounts(
        n_xy=np.asarray(counts.n_xy, dtype=float),
        n_yz=np.asarray(counts.n_yz, dtype=float),
        n_zz=np.asarray(counts.n_zz, dtype=float),
        n_z1=np.asarray(counts.n_z1, dtype=float),
    )
    return point_estimates(vb_m_step(float_counts, hyper))


def gs_fit(corpus: Corpus, hyper: Hyperparams, spec: ModelSpec, seed: int,
           burn_in: int = 500, num_samples: int = 5, spacing: int = 100,
           ) -> tuple[list[SufficientCounts], list[ModelParams], ModelParams]:
    """Run one chain; capture spaced count samples after burn-in.

    Returns the captured counts, the per-sample point estimates and their
    pooled (averaged) estimate.
    """
    state = gibbs_init(corpus, spec, seed)
    for _ in range(burn_in):
        gibbs_sweep(state, corpus, hyper)
    samples = []
    for s in range(num_samples):
        if s > 0:
            for _ in range(spacing):
                gibbs_sweep(state, corpus, hyper)
        samples.append(state.counts.copy())
    per_sample = [point_estimate(c, hyper) for c in samples]
    pooled = ModelParams(
        phi=np.mean([p.phi for p in per_sample], axis=0),
        theta=np.mean([p.theta for p in per_sample], axis=0),
        xi=np.mean([p.xi for p in per_sample], axis=0),
        pi=np.mean([p.pi for p in per_sample], axis=0),
    )
    return samples, per_sample, pooled
