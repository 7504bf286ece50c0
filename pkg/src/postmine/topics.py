"""TF-IDF weighting, LDA topic models and coherence-based model selection.

Inference is variational Bayes rather than collapsed Gibbs: the
documents carry fractional TF-IDF weights, and VB consumes fractional
expected counts directly.  Per-topic word distributions get a symmetric
Dirichlet prior eta = 0.01, per-document topic distributions a symmetric
alpha = 1/K.  Fits are deterministic functions of (matrix, K, seed,
iters): the only randomness is the seeded Gamma initialization of the
topic-word variational parameters.

The fit keeps the per-document variational parameters warm across
sweeps, which makes the evidence lower bound non-decreasing from one
sweep to the next (each update is an exact coordinate maximization).
The bound trace is kept on the returned model so callers can audit
monotonicity.

Model quality is scored with intrinsic (co-document) coherence: for
each topic, sum over ordered top-word pairs (w_i, w_j), i > j ranked by
topic mass, of ln((codoc(w_i, w_j) + eps) / doc(w_j)), eps = 1e-12,
averaged over topics.  ``select_k`` fits one model per candidate K and
returns the coherence argmax, ties broken toward smaller K.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import digamma, gammaln

from .errors import DataError, EmptyVocabularyError
from .textprep import Token, TokenKind

logger = logging.getLogger(__name__)

COHERENCE_EPS = 1e-12

_CONTENT_KINDS = (TokenKind.WORD, TokenKind.HASHTAG_SEGMENTED)


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    doc_freq: tuple[int, ...]
    index: Mapping[str, int]

    def __len__(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class WeightedMatrix:
    """Per-document sparse rows of (term index, nonnegative weight).

    ``terms`` mirrors the vocabulary the indices point into so that
    models fitted from the matrix can name their top words.
    """

    rows: tuple[tuple[np.ndarray, np.ndarray], ...]
    n_terms: int
    terms: tuple[str, ...] | None = None

    def __len__(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class TopicModel:
    k: int
    topic_word: np.ndarray        # K x V, rows sum to 1
    doc_topic: np.ndarray         # D x K, rows sum to 1
    coherence: float
    seed: int
    terms: tuple[str, ...] | None = None
    objective_trace: tuple[float, ...] = ()


def content_terms(doc: Sequence[Token]) -> list[str]:
    """Surfaces of the tokens that count as content (words and hashtag
    segments); tags and punctuation never enter the vocabulary."""
    return [t.surface for t in doc if t.kind in _CONTENT_KINDS]


def build_vocab(
    docs: Sequence[Sequence[Token]],
    min_df: int = 1,
    stopwords: frozenset[str] | set[str] = frozenset(),
) -> Vocabulary:
    """Collect content terms appearing in at least min_df documents."""
    if min_df < 1:
        raise ValueError(f"min_df must be >= 1, got {min_df}")
    df: dict[str, int] = {}
    for doc in docs:
        for term in set(content_terms(doc)):
            if term not in stopwords:
                df[term] = df.get(term, 0) + 1
    terms = tuple(sorted(t for t, n in df.items() if n >= min_df))
    if not terms:
        raise EmptyVocabularyError(
            "no term satisfies min_df=%d after stopword removal" % min_df
        )
    return Vocabulary(
        terms=terms,
        doc_freq=tuple(df[t] for t in terms),
        index={t: i for i, t in enumerate(terms)},
    )


def tfidf(docs: Sequence[Sequence[Token]], vocab: Vocabulary) -> WeightedMatrix:
    """weight(d, t) = tf(d, t) * ln(N / df(t)) over the vocabulary.

    A term present in every document gets idf exactly 0 and drops out of
    the sparse rows, as does any term absent from a document.
    """
    n_docs = len(docs)
    idf = np.array([math.log(n_docs / df) for df in vocab.doc_freq])
    rows = []
    for doc in docs:
        counts: dict[int, int] = {}
        for term in content_terms(doc):
            idx = vocab.index.get(term)
            if idx is not None:
                counts[idx] = counts.get(idx, 0) + 1
        ids = []
        weights = []
        for idx in sorted(counts):
            w = counts[idx] * idf[idx]
            if w > 0.0:
                ids.append(idx)
                weights.append(w)
        rows.append((np.array(ids, dtype=np.intp), np.array(weights, dtype=np.float64)))
    return WeightedMatrix(rows=tuple(rows), n_terms=len(vocab), terms=vocab.terms)


def _dirichlet_expectation(params: np.ndarray) -> np.ndarray:
    if params.ndim == 1:
        return digamma(params) - digamma(params.sum())
    return digamma(params) - digamma(params.sum(axis=1))[:, None]


def fit_lda(
    matrix: WeightedMatrix,
    k: int,
    seed: int,
    iters: int = 200,
    eta: float = 0.01,
    tol: float = 1e-6,
    inner_iters: int = 100,
    inner_tol: float = 1e-10,
) -> TopicModel:
    """Batch variational-Bayes LDA over (possibly fractional) weights.

    Stops early when the relative change of the bound falls below tol.
    Documents with no nonzero weight are skipped with a warning and get
    a uniform doc_topic row.  Coherence is left NaN; ``coherence`` /
    ``select_k`` fill it in.
    """
    if k < 2:
        raise ValueError(f"topic count must be >= 2, got {k}")
    if k > matrix.n_terms:
        raise DataError(f"topic count {k} exceeds vocabulary size {matrix.n_terms}")
    if iters < 1:
        raise ValueError("iters must be >= 1")

    n_docs = len(matrix.rows)
    n_terms = matrix.n_terms
    alpha = 1.0 / k
    active = [d for d, (ids, _) in enumerate(matrix.rows) if len(ids) > 0]
    skipped = n_docs - len(active)
    if skipped:
        logger.warning("fit_lda: skipping %d document(s) with no weighted terms", skipped)

    rng = np.random.default_rng(seed)
    lam = rng.gamma(100.0, 0.01, (k, n_terms))
    gamma = np.full((n_docs, k), alpha)
    for d in active:
        gamma[d] = alpha + matrix.rows[d][1].sum() / k

    trace: list[float] = []
    for _ in range(iters):
        elog_beta = _dirichlet_expectation(lam)
        exp_elog_beta = np.exp(elog_beta)
        sstats = np.zeros((k, n_terms))
        for d in active:
            ids, cts = matrix.rows[d]
            gamma_d = gamma[d]
            exp_elog_theta_d = np.exp(_dirichlet_expectation(gamma_d))
            beta_d = exp_elog_beta[:, ids]
            for _inner in range(inner_iters):
                phinorm = exp_elog_theta_d @ beta_d + 1e-100
                last_gamma = gamma_d
                gamma_d = alpha + exp_elog_theta_d * ((cts / phinorm) @ beta_d.T)
                exp_elog_theta_d = np.exp(_dirichlet_expectation(gamma_d))
                if np.mean(np.abs(gamma_d - last_gamma)) < inner_tol:
                    break
            gamma[d] = gamma_d
            phinorm = exp_elog_theta_d @ beta_d + 1e-100
            sstats[:, ids] += np.outer(exp_elog_theta_d, cts / phinorm) * beta_d
        lam = eta + sstats
        bound = _elbo(matrix, active, gamma, lam, alpha, eta)
        trace.append(bound)
        if len(trace) >= 2:
            prev = trace[-2]
            if abs(bound - prev) <= tol * abs(prev):
                break

    topic_word = lam / lam.sum(axis=1)[:, None]
    doc_topic = np.full((n_docs, k), 1.0 / k)
    for d in active:
        doc_topic[d] = gamma[d] / gamma[d].sum()
    return TopicModel(
        k=k,
        topic_word=topic_word,
        doc_topic=doc_topic,
        coherence=float("nan"),
        seed=seed,
        terms=matrix.terms,
        objective_trace=tuple(trace),
    )


def _elbo(
    matrix: WeightedMatrix,
    active: list[int],
    gamma: np.ndarray,
    lam: np.ndarray,
    alpha: float,
    eta: float,
) -> float:
    """Evidence lower bound with the per-token assignments optimized out
    (log-sum-exp over topics for every weighted term)."""
    k, n_terms = lam.shape
    elog_beta = _dirichlet_expectation(lam)
    score = 0.0
    for d in active:
        ids, cts = matrix.rows[d]
        gamma_d = gamma[d]
        elog_theta_d = _dirichlet_expectation(gamma_d)
        combined = elog_theta_d[:, None] + elog_beta[:, ids]
        peak = combined.max(axis=0)
        score += float(cts @ (peak + np.log(np.exp(combined - peak).sum(axis=0))))
        score += float(np.sum((alpha - gamma_d) * elog_theta_d))
        score += float(np.sum(gammaln(gamma_d)) - gammaln(gamma_d.sum()))
        score += gammaln(alpha * k) - k * gammaln(alpha)
    score += float(np.sum((eta - lam) * elog_beta))
    score += float(np.sum(gammaln(lam)) - np.sum(gammaln(lam.sum(axis=1))))
    score += k * (gammaln(eta * n_terms) - n_terms * gammaln(eta))
    return score


def top_words(model: TopicModel, topic: int, n: int) -> list[tuple[str, float]]:
    """The n highest-probability terms of one topic, descending, ties
    broken lexicographically; clamps n to the vocabulary size."""
    if model.terms is None:
        raise ValueError("model carries no vocabulary terms")
    if not 0 <= topic < model.k:
        raise ValueError(f"topic {topic} out of range for k={model.k}")
    row = model.topic_word[topic]
    order = sorted(range(len(row)), key=lambda i: (-row[i], model.terms[i]))
    return [(model.terms[i], float(row[i])) for i in order[: min(n, len(row))]]


def coherence(
    model: TopicModel, docs: Sequence[Sequence[Token]], top_n: int = 10
) -> float:
    """Mean intrinsic co-document coherence over the model's topics."""
    if top_n < 2:
        raise ValueError(f"top_n must be >= 2, got {top_n}")
    tops = [
        [term for term, _ in top_words(model, t, top_n)] for t in range(model.k)
    ]
    needed = {term for words in tops for term in words}
    doc_sets: dict[str, set[int]] = {term: set() for term in needed}
    for d, doc in enumerate(docs):
        for term in set(content_terms(doc)):
            if term in needed:
                doc_sets[term].add(d)
    total = 0.0
    for words in tops:
        topic_sum = 0.0
        for i in range(1, len(words)):
            for j in range(i):
                base = len(doc_sets[words[j]])
                if base == 0:
                    raise DataError(
                        f"top word {words[j]!r} occurs in no document; "
                        "vocabulary and documents are inconsistent"
                    )
                co = len(doc_sets[words[i]] & doc_sets[words[j]])
                topic_sum += math.log((co + COHERENCE_EPS) / base)
        total += topic_sum
    return total / model.k


def select_k(
    matrix: WeightedMatrix,
    docs: Sequence[Sequence[Token]],
    k_candidates: Iterable[int],
    seed: int,
    iters: int = 200,
    top_n: int = 10,
) -> TopicModel:
    """Fit one model per candidate K, return the coherence argmax.

    Candidates are scanned in ascending order and a strictly higher
    coherence is required to displace the incumbent, so exact ties go to
    the smaller K and the result does not depend on candidate order.
    """
    candidates = sorted(set(k_candidates))
    if not candidates:
        raise ValueError("k_candidates is empty")
    best: TopicModel | None = None
    for k in candidates:
        model = fit_lda(matrix, k, seed, iters=iters)
        score = coherence(model, docs, top_n=top_n)
        model = replace(model, coherence=score)
        logger.info("select_k: k=%d coherence=%.6f", k, score)
        if best is None or score > best.coherence:
            best = model
    assert best is not None
    return best


def save_model(model: TopicModel, path: str | Path) -> None:
    """Flat text serialization: a header line (K, vocab size, seed,
    coherence) then dense topic_word and doc_topic rows."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(
            f"{model.k}\t{model.topic_word.shape[1]}\t{model.seed}\t"
            f"{float(model.coherence)!r}\n"
        )
        for row in model.topic_word:
            handle.write("\t".join(repr(float(x)) for x in row))
            handle.write("\n")
        for row in model.doc_topic:
            handle.write("\t".join(repr(float(x)) for x in row))
            handle.write("\n")


def load_model(path: str | Path, terms: tuple[str, ...] | None = None) -> TopicModel:
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    if not lines:
        raise DataError(f"model file {path} is empty")
    head = lines[0].split("\t")
    if len(head) != 4:
        raise DataError(f"model file {path}: bad header")
    k, n_terms, seed = int(head[0]), int(head[1]), int(head[2])
    coh = float(head[3])
    body = lines[1:]
    if len(body) < k:
        raise DataError(f"model file {path}: truncated topic rows")
    topic_word = np.array([[float(x) for x in line.split("\t")] for line in body[:k]])
    doc_topic = np.array([[float(x) for x in line.split("\t")] for line in body[k:]])
    if topic_word.shape != (k, n_terms):
        raise DataError(f"model file {path}: topic row shape mismatch")
    return TopicModel(
        k=k,
        topic_word=topic_word,
        doc_topic=doc_topic,
        coherence=coh,
        seed=seed,
        terms=terms,
    )
