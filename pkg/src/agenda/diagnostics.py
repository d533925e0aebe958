"""Model-selection diagnostics over candidate topic counts.

Four measures per fitted model: held-out predictive likelihood by document
completion, top-word exclusivity, co-occurrence coherence, and a Pearson
residual dispersion statistic. The sweep driver fits one model per candidate
K and tabulates everything for side-by-side comparison.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .corpus import DocTermMatrix
from .rng import generator, spawn_seeds
from .topic_models import LdaHyper, TopicModelFit, expand_tokens, fit_lda

DEFAULT_TOP_WORDS = 10


@dataclass
class DiagnosticsReport:
    K: int
    heldout_loglik: float
    exclusivity: np.ndarray  # per topic
    coherence: np.ndarray    # per topic
    dispersion: float

    @property
    def exclusivity_mean(self) -> float:
        return float(np.mean(self.exclusivity))

    @property
    def coherence_mean(self) -> float:
        return float(np.mean(self.coherence))


def heldout_loglik(beta: np.ndarray, heldout: DocTermMatrix, hyper: LdaHyper,
                   *, fold_iters: int = 120, fold_burn: int = 40,
                   seed: int | None = None) -> float:
    """Mean per-word log predictive probability by document completion.

    Each held-out document's tokens are shuffled and split in half; document
    shares are estimated by folding the first half in with beta fixed, and
    the second half is scored under those shares. Documents with fewer than
    two in-vocabulary tokens are skipped with a warning.
    """
    K, V = beta.shape
    if heldout.n_terms != V:
        raise ValueError("held-out matrix vocabulary does not match beta")
    alpha = hyper.alpha_value
    rg = generator(hyper.seed if seed is None else seed)
    total_logp = 0.0
    total_words = 0
    skipped = 0
    token_doc, token_term = expand_tokens(heldout)
    for d in range(heldout.n_docs):
        terms = token_term[token_doc == d]
        if terms.shape[0] < 2:
            skipped += 1
            continue
        terms = rg.permutation(terms)
        n_fit = (terms.shape[0] + 1) // 2
        fit_terms = terms[:n_fit].astype(np.int32)
        score_terms = terms[n_fit:]
        z = rg.integers(0, K, size=n_fit, dtype=np.int32)
        topic_counts = np.bincount(z, minlength=K).astype(np.int64)
        acc_theta = np.zeros(K)
        kept = _kernels.foldin_run(fit_terms, z, topic_counts, beta, alpha,
                                   rg.random((fold_iters, n_fit)), fold_burn,
                                   acc_theta)
        theta_hat = acc_theta / kept
        word_p = theta_hat @ beta[:, score_terms]
        total_logp += float(np.log(word_p).sum())
        total_words += score_terms.shape[0]
    if skipped:
        warnings.warn(f"skipped {skipped} held-out documents with < 2 "
                      "in-vocabulary tokens", RuntimeWarning)
    if total_words == 0:
        raise ValueError("no held-out tokens to score")
    return total_logp / total_words


def top_words(beta: np.ndarray, M: int = DEFAULT_TOP_WORDS) -> np.ndarray:
    """Top-M term ids per topic, best first; ties broken by term id."""
    K, V = beta.shape
    M = min(M, V)
    # stable sort on (-beta, term id)
    order = np.argsort(-beta, axis=1, kind="stable")
    return order[:, :M]


def exclusivity(beta: np.ndarray, M: int = DEFAULT_TOP_WORDS) -> np.ndarray:
    """Per topic, the mean over its top-M words of that topic's share of the
    word's total mass across topics. Duplicated topics score exactly 1/K."""
    tops = top_words(beta, M)
    col_tot = beta.sum(axis=0)
    out = np.empty(beta.shape[0])
    for k in range(beta.shape[0]):
        vs = tops[k]
        out[k] = float(np.mean(beta[k, vs] / col_tot[vs]))
    return out


def coherence(beta: np.ndarray, dtm: DocTermMatrix,
              M: int = DEFAULT_TOP_WORDS) -> np.ndarray:
    """Document co-occurrence coherence of each topic's top-M words.

    For ranked top words v_1..v_M the score is
    sum over i < j of log((codoc(v_i, v_j) + 1) / doc(v_j)), where codoc
    counts documents containing both words and doc counts documents
    containing the word. A word absent from every document gets doc count 1
    with a warning.
    """
    if M < 2:
        raise ValueError("coherence needs M >= 2 top words")
    present = (dtm.counts > 0).astype(np.int64).tocsc()
    tops = top_words(beta, M)
    doc_count = np.asarray(present.sum(axis=0)).ravel()
    warned = False
    out = np.empty(beta.shape[0])
    for k in range(beta.shape[0]):
        vs = tops[k]
        cols = present[:, vs].toarray()
        score = 0.0
        for j in range(1, len(vs)):
            dj = doc_count[vs[j]]
            if dj == 0:
                dj = 1
                if not warned:
                    warnings.warn("top word absent from all documents; using "
                                  "doc count 1", RuntimeWarning)
                    warned = True
            for i in range(j):
                co = int(np.minimum(cols[:, i], cols[:, j]).sum())
                score += np.log((co + 1.0) / dj)
        out[k] = score
    return out


def dispersion(fit: TopicModelFit, dtm: DocTermMatrix) -> float:
    """Mean squared Pearson residual over the nonzero count cells.

    The model-implied cell probability is m = theta @ beta; values well
    above 1 indicate the fit is over-dispersed (too few topics).
    """
    theta, beta = fit.theta, fit.beta
    if theta.shape[0] != dtm.n_docs or beta.shape[1] != dtm.n_terms:
        raise ValueError("fit and matrix are not conformable")
    m = theta @ beta
    lengths = dtm.doc_lengths.astype(np.float64)
    coo = dtm.counts.tocoo()
    warned = False
    total = 0.0
    for d, v, x in zip(coo.row, coo.col, coo.data):
        mdv = m[d, v]
        if mdv <= 0.0:
            if not warned:
                warnings.warn("zero model probability at an observed cell; "
                              "flooring at 1e-12", RuntimeWarning)
                warned = True
            mdv = 1e-12
        num = (x - lengths[d] * mdv) ** 2
        if num == 0.0:
            continue
        den = lengths[d] * mdv * min(1.0 - mdv, 1.0 - 1e-12)
        if den <= 0.0:
            den = lengths[d] * 1e-12
        total += num / den
    return total / coo.nnz


def split_heldout(dtm: DocTermMatrix, frac: float = 0.2, seed: int = 0,
                  ) -> tuple[DocTermMatrix, DocTermMatrix]:
    """Deterministically split documents into train and held-out sets."""
    rg = generator(seed)
    n = dtm.n_docs
    n_held = max(1, int(round(frac * n)))
    if n_held >= n:
        raise ValueError("held-out fraction leaves no training documents")
    held = np.sort(rg.choice(n, size=n_held, replace=False))
    mask = np.zeros(n, dtype=bool)
    mask[held] = True
    train = DocTermMatrix(docs=[dtm.docs[i] for i in range(n) if not mask[i]],
                          counts=dtm.counts[~mask])
    test = DocTermMatrix(docs=[dtm.docs[i] for i in range(n) if mask[i]],
                         counts=dtm.counts[mask])
    return train, test


def sweep_topics(dtm: DocTermMatrix, K_list: list[int], hyper_template: LdaHyper,
                 *, M: int = DEFAULT_TOP_WORDS, heldout_frac: float = 0.2,
                 ) -> list[DiagnosticsReport]:
    """Fit one model per candidate K and report all four diagnostics.

    A failed fit for one K is reported as a warning and the sweep continues.
    """
    if not K_list:
        raise ValueError("empty K list")
    train, held = split_heldout(dtm, heldout_frac, hyper_template.seed)
    seeds = spawn_seeds(hyper_template.seed, 2 * len(K_list))
    reports = []
    for i, K in enumerate(K_list):
        hyper = LdaHyper(K=K, alpha=hyper_template.alpha,
                         eta=hyper_template.eta, iters=hyper_template.iters,
                         burn_in=hyper_template.burn_in, seed=seeds[2 * i])
        try:
            fit = fit_lda(train, hyper)
            reports.append(DiagnosticsReport(
                K=K,
                heldout_loglik=heldout_loglik(fit.beta, held, hyper,
                                              seed=seeds[2 * i + 1]),
                exclusivity=exclusivity(fit.beta, M),
                coherence=coherence(fit.beta, train, M),
                dispersion=dispersion(fit, train),
            ))
        except (ValueError, FloatingPointError) as exc:
            warnings.warn(f"K={K} failed: {exc}", RuntimeWarning)
    return reports


def write_reports(reports: list[DiagnosticsReport], out_dir: str | Path) -> None:
    """report.csv with one row per K plus a per-topic long-format CSV."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "report.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["K", "heldout", "exclusivity_mean", "coherence_mean",
                         "dispersion"])
        for r in reports:
            writer.writerow([r.K, f"{r.heldout_loglik:.10g}",
                             f"{r.exclusivity_mean:.10g}",
                             f"{r.coherence_mean:.10g}",
                             f"{r.dispersion:.10g}"])
    with open(out_dir / "per_topic.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["K", "topic", "exclusivity", "coherence"])
        for r in reports:
            for k in range(len(r.exclusivity)):
                writer.writerow([r.K, k, f"{r.exclusivity[k]:.10g}",
                                 f"{r.coherence[k]:.10g}"])
