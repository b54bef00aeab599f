"""Online scoring of test documents by predictive marginal likelihood.

All scores are kept in the log domain; the per-document normality measure
(likelihood divided by length) is represented as log likelihood minus log
length, a strictly monotone transform that leaves thresholds and
precision-recall curves unaffected.

The predictive state carries the behaviour belief for the *upcoming*
document, i.e. p(z_next | history).  Scoring a document multiplies in its
emission, normalises (the normaliser is exactly the document likelihood)
and propagates one step through the transition matrix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from . import inference
from .model import Corpus, Document, ModelParams

#: Documents shorter than this are not evaluated and count as normal.
MIN_SCORABLE_WORDS = 20


@dataclass
class PredictiveState:
    """Belief over the next document's behaviour given the history."""

    behaviour_belief: np.ndarray
    last_doc_index: int = 0


@dataclass
class ScoredDocument:
    """Per-document scoring record."""

    index: int
    length: int
    log_lik: float
    score: float | None
    evaluated: bool = True
    word_log_liks: np.ndarray | None = None


def init_state(params: ModelParams, last_filtered: np.ndarray | None = None,
               ) -> PredictiveState:
    """Initial predictive state for a test stream.

    Default: the initial behaviour distribution, as if the stream restarted.
    With ``last_filtered`` (the filtered belief of the last training
    document), the belief is that vector propagated one step through the
    transition matrix, which makes test scoring the exact continuation of
    the training stream.
    """
    if last_filtered is None:
        belief = params.pi.copy()
    else:
        belief = params.xi @ np.asarray(last_filtered, dtype=float)
        belief = belief / belief.sum()
    return PredictiveState(behaviour_belief=belief, last_doc_index=0)


def filtered_belief(params: ModelParams, corpus: Corpus) -> np.ndarray:
    """Filtered behaviour posterior after the last training document."""
    msgs = inference.messages(params, corpus)
    la = msgs.log_alpha[:, -1]
    b = np.exp(la - logsumexp(la))
    return b / b.sum()


def _doc_emission_logs(doc: Document, log_mix: np.ndarray) -> np.ndarray:
    return log_mix[doc.words].sum(axis=0)


def normalise_score(log_lik: float, length: int) -> float:
    """Log of the length-normalised likelihood."""
    if length < 1:
        raise ValueError("length must be >= 1")
    return log_lik - np.log(length)


def score_plugin(state: PredictiveState, doc: Document, params: ModelParams,
                 log_mix: np.ndarray | None = None,
                 min_words: int = MIN_SCORABLE_WORDS,
                 ) -> tuple[ScoredDocument, PredictiveState]:
    """Score one document against point-estimate parameters.

    The document log likelihood mixes the per-behaviour emission over the
    current belief; the recursive Bayes update divides by that same
    likelihood and propagates through the transition matrix.  Documents
    shorter than ``min_words`` still update the state but are flagged as
    not evaluated (normal by default).
    """
    if log_mix is None:
        log_mix = inference.word_mixture_logs(params)
    loge = _doc_emission_logs(doc, log_mix)
    with np.errstate(divide="ignore"):
        log_belief = np.log(state.behaviour_belief)
    joint = loge + log_belief
    log_lik = float(logsumexp(joint))

    if np.isfinite(log_lik):
        filtered = np.exp(joint - log_lik)
        belief = params.xi @ filtered
        belief = belief / belief.sum()
    else:
        # Impossible document: reset the stream to the initial distribution.
        belief = params.pi.copy()
    new_state = PredictiveState(behaviour_belief=belief,
                                last_doc_index=state.last_doc_index + 1)

    n = len(doc)
    evaluated = n >= min_words
    scored = ScoredDocument(
        index=new_state.last_doc_index,
        length=n,
        log_lik=log_lik,
        score=normalise_score(log_lik, n) if evaluated else None,
        evaluated=evaluated,
    )
    return scored, new_state


def score_mc(states: list[PredictiveState], doc: Document,
             samples: list[ModelParams],
             log_mixes: list[np.ndarray] | None = None,
             min_words: int = MIN_SCORABLE_WORDS,
             ) -> tuple[ScoredDocument, list[PredictiveState]]:
    """Monte Carlo score: average the predictive likelihood over parameter
    samples, each tracking its own history state."""
    if not samples:
        raise ValueError("at least one parameter sample is required")
    if len(states) != len(samples):
        raise ValueError("one predictive state per sample is required")
    if log_mixes is None:
        log_mixes = [inference.word_mixture_logs(p) for p in samples]
    per_sample = []
    new_states = []
    for st, params, lm in zip(states, samples, log_mixes):
        scored, new_st = score_plugin(st, doc, params, log_mix=lm, min_words=min_words)
        per_sample.append(scored.log_lik)
        new_states.append(new_st)
    log_lik = float(logsumexp(per_sample) - np.log(len(samples)))
    n = len(doc)
    evaluated = n >= min_words
    scored = ScoredDocument(
        index=new_states[0].last_doc_index,
        length=n,
        log_lik=log_lik,
        score=normalise_score(log_lik, n) if evaluated else None,
        evaluated=evaluated,
    )
    return scored, new_states


def word_log_liks(state: PredictiveState, doc: Document,
                  params_or_samples, mode: str = "plugin",
                  states: list[PredictiveState] | None = None) -> np.ndarray:
    """Per-token log marginal likelihoods under the current belief.

    ``mode="plugin"`` uses a single parameter set; ``mode="mc"`` averages
    over samples, each with its own state (pass ``states``).
    """
    if mode == "plugin":
        params = params_or_samples
        log_mix = inference.word_mixture_logs(params)
        with np.errstate(divide="ignore"):
            log_belief = np.log(state.behaviour_belief)
        return logsumexp(log_mix[doc.words] + log_belief[None, :], axis=1)
    if mode == "mc":
        samples = params_or_samples
        if states is None or len(states) != len(samples):
            raise ValueError("mc mode needs one predictive state per sample")
        per = np.stack([
            word_log_liks(st, doc, p, mode="plugin")
            for st, p in zip(states, samples)
        ])
        return logsumexp(per, axis=0) - np.log(len(samples))
    raise ValueError(f"unknown mode {mode!r}")


def localise(word_lls: np.ndarray, doc: Document, layout, top_n: int,
             ) -> list[tuple[int, int, int, str]]:
    """The ``top_n`` least likely tokens decoded to frame positions.

    Returns (token index, cell x, cell y, direction) tuples sorted by
    ascending likelihood; ties keep token order.  ``top_n`` larger than the
    document clamps.
    """
    from .ingest import decode_word  # local import to avoid a cycle

    if top_n <= 0:
        raise ValueError("top_n must be positive")
    top_n = min(top_n, len(doc))
    order = np.argsort(word_lls, kind="stable")[:top_n]
    out = []
    for i in order:
        cx, cy, direction = decode_word(layout, int(doc.words[i]))
        out.append((int(i), cx, cy, direction))
    return out
