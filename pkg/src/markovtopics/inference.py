"""Forward-backward engine for the behaviour chain.

All recursions run in the log domain: the raw products underflow for
realistic document lengths.  The engine also accepts the sub-stochastic
"tilde" surrogate parameters used by variational inference; normalization
by the overall constant absorbs the column deficit, so the returned
posteriors are proper distributions either way.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .model import Corpus, ModelParams, NumericalError, SufficientCounts


def _lse(a: np.ndarray, axis: int) -> np.ndarray:
    """Log-sum-exp over one axis of a small dense array.

    scipy's logsumexp dominates the recursion runtime through per-call
    overhead, so the hot loops use this minimal version.  All -inf slices
    are handled (the max is shifted to 0 so exp never sees nan).
    """
    m = np.max(a, axis=axis, keepdims=True)
    m_safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(invalid="ignore"):
        s = np.sum(np.exp(a - m_safe), axis=axis)
    with np.errstate(divide="ignore"):
        return np.squeeze(m_safe, axis=axis) + np.log(s)


@dataclass
class Messages:
    """Log forward/backward messages, the normalisation constant and the
    cached per-document emission logs."""

    log_alpha: np.ndarray  # (num_behaviours, T)
    log_beta: np.ndarray  # (num_behaviours, T)
    log_K: float
    log_emission: np.ndarray  # (num_behaviours, T)


@dataclass
class Posteriors:
    """Hidden-variable posteriors given a corpus and parameters."""

    z1: np.ndarray  # (num_behaviours,)
    pair_zz: np.ndarray  # (T-1, Z, Z); [t-1, z_new, z_old] = p(z_{t+1}=z_new, z_t=z_old | x)
    token_yz: list[np.ndarray]  # per document (N_t, Y, Z)
    token_y: list[np.ndarray]  # per document (N_t, Y)


def word_mixture_logs(params: ModelParams) -> np.ndarray:
    """log sum_y phi[x, y] theta[y, z] for every word/behaviour pair, shape
    (num_words, num_behaviours).  Zero mixtures become -inf."""
    mix = params.phi @ params.theta
    with np.errstate(divide="ignore"):
        return np.log(mix)


def emission_logs(params: ModelParams, corpus: Corpus,
                  log_mix: np.ndarray | None = None) -> np.ndarray:
    """Per-document log emission under each behaviour, shape (Z, T).

    Entry (z, t) sums the log mixture probability of every token of
    document t given behaviour z.  A token with zero mixture probability
    contributes -inf; it is propagated, not clamped.
    """
    if log_mix is None:
        log_mix = word_mixture_logs(params)
    T = len(corpus)
    out = np.empty((params.pi.shape[0], T))
    for t, doc in enumerate(corpus.documents):
        out[:, t] = log_mix[doc.words].sum(axis=0)
    return out


def forward(params: ModelParams, corpus: Corpus,
            log_emission: np.ndarray | None = None) -> np.ndarray:
    """Log forward messages: joint of the prefix and the current behaviour."""
    if log_emission is None:
        log_emission = emission_logs(params, corpus)
    Z, T = log_emission.shape
    with np.errstate(divide="ignore"):
        log_pi = np.log(params.pi)
        log_xi = np.log(params.xi)
    la = np.empty((Z, T))
    la[:, 0] = log_pi + log_emission[:, 0]
    for t in range(1, T):
        # la[z, t] = e(z, t) + logsumexp_z'( la[z', t-1] + log xi[z, z'] )
        la[:, t] = log_emission[:, t] + _lse(la[None, :, t - 1] + log_xi, axis=1)
    return la


def backward(params: ModelParams, corpus: Corpus,
             log_emission: np.ndarray | None = None) -> np.ndarray:
    """Log backward messages; the final column is zero by definition."""
    if log_emission is None:
        log_emission = emission_logs(params, corpus)
    Z, T = log_emission.shape
    with np.errstate(divide="ignore"):
        log_xi = np.log(params.xi)
    lb = np.empty((Z, T))
    lb[:, T - 1] = 0.0
    for t in range(T - 2, -1, -1):
        # lb[z, t] = logsumexp_z'( lb[z', t+1] + log xi[z', z] + e(z', t+1) )
        lb[:, t] = _lse((lb[:, t + 1] + log_emission[:, t + 1])[:, None] + log_xi, axis=0)
    return lb


def messages(params: ModelParams, corpus: Corpus) -> Messages:
    """Run both passes once, sharing the emission logs."""
    loge = emission_logs(params, corpus)
    la = forward(params, corpus, loge)
    lb = backward(params, corpus, loge)
    log_K = float(logsumexp(la[:, 0] + lb[:, 0]))
    return Messages(log_alpha=la, log_beta=lb, log_K=log_K, log_emission=loge)


def log_marginal_likelihood(msgs: Messages) -> float:
    """log p(x_{1:T} | params), read off the last forward column."""
    return float(logsumexp(msgs.log_alpha[:, -1]))


def posteriors(params: ModelParams, corpus: Corpus, msgs: Messages) -> Posteriors:
    """The four hidden-variable posteriors, exponentiated from log space.

    Raises :class:`NumericalError` when the corpus is impossible under the
    model (overall normalisation constant zero).
    """
    la, lb, log_K = msgs.log_alpha, msgs.log_beta, msgs.log_K
    loge = msgs.log_emission
    Z, T = la.shape
    if not np.isfinite(log_K):
        raise NumericalError("corpus impossible under model: normalisation constant is zero")
    with np.errstate(divide="ignore"):
        log_xi = np.log(params.xi)
        log_phi = np.log(params.phi)
        log_theta = np.log(params.theta)
    log_mix = word_mixture_logs(params)

    z1 = np.exp(la[:, 0] + lb[:, 0] - log_K)

    pair_zz = np.empty((T - 1, Z, Z))
    for t in range(1, T):
        # [z_new, z_old]: forward into z_old at t-1, transition, emission
        # and backward out of z_new at t.
        lp = (la[None, :, t - 1] + log_xi
              + (loge[:, t] + lb[:, t])[:, None] - log_K)
        pair_zz[t - 1] = np.exp(lp)

    token_yz = []
    token_y = []
    for t, doc in enumerate(corpus.documents):
        # Leave-one-token-out product = loge[z, t] - log_mix[x_i, z]; combined
        # with the forward message this is la[z, t] - log_mix[x_i, z].
        # Behaviours with la = -inf have zero posterior mass: mask them to
        # avoid -inf minus -inf.
        base = la[:, t] + lb[:, t] - log_K  # (Z,)
        lm = log_mix[doc.words]  # (N_t, Z)
        with np.errstate(invalid="ignore"):
            lw = base[None, :] - lm  # (N_t, Z)
        lw[:, ~np.isfinite(base)] = -np.inf
        # (N_t, Y, Z): token term + log phi + log theta
        lt = lw[:, None, :] + log_phi[doc.words][:, :, None] + log_theta[None, :, :]
        p = np.exp(lt)
        token_yz.append(p)
        token_y.append(p.sum(axis=2))
    return Posteriors(z1=z1, pair_zz=pair_zz, token_yz=token_yz, token_y=token_y)


def expected_counts(post: Posteriors, corpus: Corpus) -> SufficientCounts:
    """Aggregate the posteriors into the four sufficient-count arrays."""
    spec = corpus.spec
    n_xy = np.zeros((spec.num_words, spec.num_topics))
    n_yz = np.zeros((spec.num_topics, spec.num_behaviours))
    for t, doc in enumerate(corpus.documents):
        np.add.at(n_xy, doc.words, post.token_y[t])
        n_yz += post.token_yz[t].sum(axis=0)
    n_zz = post.pair_zz.sum(axis=0) if len(post.pair_zz) else np.zeros(
        (spec.num_behaviours, spec.num_behaviours))
    return SufficientCounts(n_xy=n_xy, n_yz=n_yz, n_zz=n_zz,
                            n_z1=post.z1.copy(), mode="expected")


def infer(params: ModelParams, corpus: Corpus):
    """Convenience: messages, posteriors and counts in one call."""
    msgs = messages(params, corpus)
    post = posteriors(params, corpus, msgs)
    return msgs, post, expected_counts(post, corpus)
