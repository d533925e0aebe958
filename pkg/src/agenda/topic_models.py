"""Topic estimation: LDA by collapsed Gibbs sampling and a correlated topic
model (logistic-normal document shares) fit by Metropolis-within-Gibbs, plus
the matching corpus generators used for oracle testing.

Conventions: beta is the K x V matrix of topic-term distributions, theta the
D x K matrix of document-topic shares, z the per-token assignments in
canonical token order. Point estimates are posterior means over post-burn-in
sweeps with hyperparameter smoothing. All fits are deterministic given the
seed; randomness comes from one PCG64 stream per fit.
"""
from __future__ import annotations

import datetime as dt
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .corpus import DocTermMatrix
from .rng import generator

LDA = "lda"
CTM = "ctm"


@dataclass
class LdaHyper:
    K: int
    alpha: float | None = None  # None means the 50/K default
    eta: float = 0.1
    iters: int = 200
    burn_in: int = 100
    seed: int = 0

    @property
    def alpha_value(self) -> float:
        return 50.0 / self.K if self.alpha is None else float(self.alpha)

    def validate(self) -> None:
        # K = 1 is allowed as the degenerate single-topic model.
        if self.K < 1:
            raise ValueError("K must be at least 1")
        if self.alpha_value <= 0 or self.eta <= 0:
            raise ValueError("alpha and eta must be positive")
        if not 0 <= self.burn_in < self.iters:
            raise ValueError("need 0 <= burn_in < iters")


@dataclass
class TopicModelFit:
    beta: np.ndarray    # (K, V), rows sum to 1
    theta: np.ndarray   # (D, K), rows sum to 1
    z: np.ndarray       # final-sweep assignments, canonical token order
    loglik: np.ndarray  # per-sweep trace

    @property
    def K(self) -> int:
        return self.beta.shape[0]


@dataclass
class CtmParams:
    mu: np.ndarray       # (K-1,)
    sigma: np.ndarray    # (K-1, K-1)
    eta_doc: np.ndarray  # (D, K-1) posterior-mean latent vectors
    accept_rate: float = float("nan")


@dataclass
class CtmOptions:
    step_size: float = 0.3
    ridge: float = 1e-6


def expand_tokens(dtm: DocTermMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Flatten counts into per-token (doc, term) arrays in canonical order."""
    coo = dtm.counts.tocoo()
    order = np.lexsort((coo.col, coo.row))
    doc = np.repeat(coo.row[order], coo.data[order]).astype(np.int32)
    term = np.repeat(coo.col[order], coo.data[order]).astype(np.int32)
    return doc, term


def softmax_shares(eta_doc: np.ndarray) -> np.ndarray:
    """Map (D, K-1) latent vectors to (D, K) shares; topic K is the reference
    with latent coordinate pinned to zero."""
    eta_aug = np.concatenate([eta_doc, np.zeros((eta_doc.shape[0], 1))], axis=1)
    eta_aug -= eta_aug.max(axis=1, keepdims=True)
    w = np.exp(eta_aug)
    return w / w.sum(axis=1, keepdims=True)


# -- reference sampler state (used by tests and the conditional API) ----------

@dataclass
class GibbsState:
    token_doc: np.ndarray
    token_term: np.ndarray
    z: np.ndarray
    doc_topic: np.ndarray
    term_topic: np.ndarray
    topic_total: np.ndarray
    doc_starts: np.ndarray = field(default=None)


def make_state(dtm: DocTermMatrix, z: np.ndarray, K: int) -> GibbsState:
    token_doc, token_term = expand_tokens(dtm)
    if z.shape[0] != token_doc.shape[0]:
        raise ValueError("z length does not match token count")
    D, V = dtm.counts.shape
    doc_topic = np.zeros((D, K), dtype=np.int64)
    term_topic = np.zeros((V, K), dtype=np.int64)
    topic_total = np.zeros(K, dtype=np.int64)
    np.add.at(doc_topic, (token_doc, z), 1)
    np.add.at(term_topic, (token_term, z), 1)
    np.add.at(topic_total, z, 1)
    starts = np.zeros(D + 1, dtype=np.int64)
    np.add.at(starts, token_doc + 1, 1)
    starts = np.cumsum(starts)
    return GibbsState(token_doc=token_doc, token_term=token_term,
                      z=z.astype(np.int32), doc_topic=doc_topic,
                      term_topic=term_topic, topic_total=topic_total,
                      doc_starts=starts)


def gibbs_conditional(d: int, n: int, state: GibbsState, hyper: LdaHyper,
                      ) -> np.ndarray:
    """Full conditional over topics for token n of document d.

    The token's own assignment is removed from every count before the
    two smoothed count ratios are multiplied; the result is normalized.
    """
    i = int(state.doc_starts[d]) + n
    if i >= state.doc_starts[d + 1]:
        raise IndexError("token index out of range for document")
    v = state.token_term[i]
    k_cur = state.z[i]
    K = hyper.K
    V = state.term_topic.shape[0]
    alpha, eta = hyper.alpha_value, hyper.eta
    tt = state.term_topic[v].astype(np.float64).copy()
    tot = state.topic_total.astype(np.float64).copy()
    dk = state.doc_topic[d].astype(np.float64).copy()
    tt[k_cur] -= 1
    tot[k_cur] -= 1
    dk[k_cur] -= 1
    n_d = dk.sum()
    p = (tt + eta) / (tot + V * eta) * (dk + alpha) / (n_d + K * alpha)
    return p / p.sum()


# -- LDA -----------------------------------------------------------------------

def fit_lda(dtm: DocTermMatrix, hyper: LdaHyper, init_z: np.ndarray | None = None,
            collect_state_trace: bool = False,
            ) -> TopicModelFit | tuple[TopicModelFit, np.ndarray]:
    """Collapsed Gibbs LDA.

    Runs hyper.iters full sweeps from a random topic allocation; beta and
    theta are smoothed means of the post-burn-in count tables. With
    collect_state_trace the full z vector after every sweep is returned too
    (only sensible for tiny corpora).
    """
    hyper.validate()
    token_doc, token_term = expand_tokens(dtm)
    n_tokens = token_doc.shape[0]
    if n_tokens == 0:
        raise ValueError("empty document-term matrix")
    if hyper.K > n_tokens:
        raise ValueError(f"K={hyper.K} exceeds total token count {n_tokens}")
    D, V = dtm.counts.shape
    K = hyper.K
    rg = generator(hyper.seed)
    if init_z is None:
        z = rg.integers(0, K, size=n_tokens, dtype=np.int32)
    else:
        z = np.asarray(init_z, dtype=np.int32).copy()
        if z.shape[0] != n_tokens or (K > 0 and z.size and (z.min() < 0 or z.max() >= K)):
            raise ValueError("bad init_z")

    doc_topic = np.zeros((D, K), dtype=np.int64)
    term_topic = np.zeros((V, K), dtype=np.int64)
    topic_total = np.zeros(K, dtype=np.int64)
    np.add.at(doc_topic, (token_doc, z), 1)
    np.add.at(term_topic, (token_term, z), 1)
    np.add.at(topic_total, z, 1)
    doc_len = dtm.doc_lengths.astype(np.float64)

    uniforms = rg.random((hyper.iters, n_tokens))
    acc_doc_topic = np.zeros((D, K), dtype=np.float64)
    acc_term_topic = np.zeros((V, K), dtype=np.float64)
    acc_topic_total = np.zeros(K, dtype=np.float64)
    loglik = np.zeros(hyper.iters, dtype=np.float64)
    if collect_state_trace:
        trace = np.zeros((hyper.iters, n_tokens), dtype=np.int8)
    else:
        trace = np.zeros((1, 1), dtype=np.int8)

    _kernels.lda_run(token_doc, token_term, z, doc_topic, term_topic,
                     topic_total, doc_len, hyper.alpha_value, hyper.eta,
                     uniforms, hyper.burn_in, acc_doc_topic, acc_term_topic,
                     acc_topic_total, loglik, trace, collect_state_trace)

    n_keep = hyper.iters - hyper.burn_in
    beta = (acc_term_topic.T / n_keep + hyper.eta)
    beta /= (acc_topic_total / n_keep + V * hyper.eta)[:, None]
    theta = (acc_doc_topic / n_keep + hyper.alpha_value)
    theta /= (doc_len + K * hyper.alpha_value)[:, None]
    fit = TopicModelFit(beta=beta, theta=theta, z=z, loglik=loglik)
    if collect_state_trace:
        return fit, trace
    return fit


# -- CTM -----------------------------------------------------------------------

def fit_ctm(dtm: DocTermMatrix, hyper: LdaHyper, ctm_opts: CtmOptions | None = None,
            ) -> tuple[TopicModelFit, CtmParams]:
    """Correlated topic model by Metropolis-within-Gibbs.

    Alternates (i) collapsed Gibbs updates of token assignments given the
    current document shares, (ii) per-document random-walk Metropolis updates
    of the logistic-normal latent vectors, and (iii) closed-form empirical
    Bayes updates of the population mean and covariance from the current
    latent vectors. Final shares are exactly softmax of the posterior-mean
    latent vectors.
    """
    hyper.validate()
    if hyper.K < 2:
        raise ValueError("CTM needs K >= 2")
    opts = ctm_opts or CtmOptions()
    token_doc, token_term = expand_tokens(dtm)
    n_tokens = token_doc.shape[0]
    if hyper.K > n_tokens:
        raise ValueError(f"K={hyper.K} exceeds total token count {n_tokens}")
    D, V = dtm.counts.shape
    K = hyper.K
    Km1 = K - 1
    rg = generator(hyper.seed)

    z = rg.integers(0, K, size=n_tokens, dtype=np.int32)
    doc_topic = np.zeros((D, K), dtype=np.int64)
    term_topic = np.zeros((V, K), dtype=np.int64)
    topic_total = np.zeros(K, dtype=np.int64)
    np.add.at(doc_topic, (token_doc, z), 1)
    np.add.at(term_topic, (token_term, z), 1)
    np.add.at(topic_total, z, 1)
    doc_len = dtm.doc_lengths.astype(np.float64)

    eta_doc = np.zeros((D, Km1))
    theta = softmax_shares(eta_doc)
    mu = np.zeros(Km1)
    sigma = np.eye(Km1)
    steps = np.full(D, opts.step_size)

    acc_eta = np.zeros_like(eta_doc)
    acc_mu = np.zeros_like(mu)
    acc_sigma = np.zeros_like(sigma)
    acc_term_topic = np.zeros((V, K), dtype=np.float64)
    acc_topic_total = np.zeros(K, dtype=np.float64)
    loglik = np.zeros(hyper.iters)
    accepted = 0
    accept_proposals = 0
    ridge_warned = False

    def mvn_quad(x):
        # 0.5 * (x - mu)' Sigma^{-1} (x - mu), row-wise
        diff = x - mu
        sol = np.linalg.solve(sigma, diff.T).T
        return 0.5 * np.einsum("ij,ij->i", diff, sol)

    # The population parameters stay at their loose (0, I) start for the
    # first half of burn-in. Updating the covariance from the degenerate
    # all-zero start would collapse it and pin every latent vector at the
    # origin before the likelihood can pull it anywhere.
    warmup = hyper.burn_in // 2

    for t in range(hyper.iters):
        _kernels.ctm_z_sweep(token_doc, token_term, z, doc_topic, term_topic,
                             topic_total, theta, hyper.eta,
                             rg.random(n_tokens))

        # Metropolis update of each document's latent vector
        prop = eta_doc + steps[:, None] * rg.standard_normal((D, Km1))
        counts = doc_topic[:, :Km1].astype(np.float64)
        aug_old = np.concatenate([eta_doc, np.zeros((D, 1))], axis=1)
        aug_new = np.concatenate([prop, np.zeros((D, 1))], axis=1)
        lse_old = _logsumexp_rows(aug_old)
        lse_new = _logsumexp_rows(aug_new)
        lik_old = np.einsum("ij,ij->i", counts, eta_doc) - doc_len * lse_old
        lik_new = np.einsum("ij,ij->i", counts, prop) - doc_len * lse_new
        delta = (lik_new - lik_old) - mvn_quad(prop) + mvn_quad(eta_doc)
        accept = np.log(rg.random(D)) < delta
        eta_doc[accept] = prop[accept]
        theta = softmax_shares(eta_doc)
        if t < hyper.burn_in:
            steps[accept] = np.minimum(steps[accept] * np.exp(0.05 * 0.7), 10.0)
            steps[~accept] = np.maximum(steps[~accept] * np.exp(-0.05 * 0.3), 1e-5)
        else:
            accepted += int(accept.sum())
            accept_proposals += D

        # empirical Bayes refresh of the population parameters
        if t >= warmup:
            mu = eta_doc.mean(axis=0)
            centred = eta_doc - mu
            sigma = centred.T @ centred / max(D - 1, 1)
            min_eig = float(np.linalg.eigvalsh(sigma).min()) if Km1 > 0 else 1.0
            if min_eig < 1e-10:
                sigma = sigma + opts.ridge * np.eye(Km1)
                if not ridge_warned:
                    warnings.warn("covariance update not positive definite; "
                                  "added ridge", RuntimeWarning)
                    ridge_warned = True

        loglik[t] = (_kernels.lda_joint_loglik(doc_topic, term_topic,
                                               topic_total, doc_len,
                                               1.0, hyper.eta)
                     + float(np.einsum("ij,ij->", doc_topic,
                                       np.log(theta + 1e-300))))
        if t >= hyper.burn_in:
            acc_eta += eta_doc
            acc_mu += mu
            acc_sigma += sigma
            acc_term_topic += term_topic
            acc_topic_total += topic_total

    n_keep = hyper.iters - hyper.burn_in
    eta_hat = acc_eta / n_keep
    theta_hat = softmax_shares(eta_hat)
    beta = (acc_term_topic.T / n_keep + hyper.eta)
    beta /= (acc_topic_total / n_keep + V * hyper.eta)[:, None]
    fit = TopicModelFit(beta=beta, theta=theta_hat, z=z, loglik=loglik)
    params = CtmParams(mu=acc_mu / n_keep, sigma=acc_sigma / n_keep,
                       eta_doc=eta_hat,
                       accept_rate=accepted / max(accept_proposals, 1))
    return fit, params


def _logsumexp_rows(x: np.ndarray) -> np.ndarray:
    m = x.max(axis=1, keepdims=True)
    return (m + np.log(np.exp(x - m).sum(axis=1, keepdims=True))).ravel()


def permute_ctm_params(params: CtmParams, perm: np.ndarray) -> CtmParams:
    """Re-express logistic-normal parameters after reordering topics.

    perm maps new topic j to old topic perm[j]. The additive log-ratio
    transform with a new reference topic is linear in the old latent
    coordinates, so mu and sigma transform through a single matrix.
    """
    perm = np.asarray(perm)
    K = perm.shape[0]
    M = np.zeros((K - 1, K - 1))
    ref = perm[K - 1]
    for j in range(K - 1):
        if perm[j] < K - 1:
            M[j, perm[j]] += 1.0
        if ref < K - 1:
            M[j, ref] -= 1.0
    return CtmParams(mu=M @ params.mu, sigma=M @ params.sigma @ M.T,
                     eta_doc=params.eta_doc @ M.T,
                     accept_rate=params.accept_rate)


# -- corpus generation -----------------------------------------------------------

@dataclass
class GenerativeTruth:
    beta: np.ndarray                       # (K, V)
    alpha: float | np.ndarray = 1.0        # Dirichlet hyper (LDA family)
    mu: np.ndarray | None = None           # logistic-normal mean (CTM family)
    sigma: np.ndarray | None = None        # logistic-normal covariance


@dataclass
class SimulatedCorpus:
    dtm: DocTermMatrix
    theta: np.ndarray  # (D, K) drawn shares
    z: np.ndarray      # token assignments in the dtm's canonical order


def generate_corpus(truth: GenerativeTruth, doc_lengths, seed: int,
                    family: str = LDA) -> SimulatedCorpus:
    """Draw a synthetic corpus from the document-generation process.

    Per document: draw shares from Dirichlet(alpha) or softmax of a
    multivariate normal depending on family, then a topic per token and a
    term from that topic's distribution.
    """
    beta = np.asarray(truth.beta, dtype=np.float64)
    K, V = beta.shape
    if not np.allclose(beta.sum(axis=1), 1.0, atol=1e-8):
        raise ValueError("truth.beta rows must sum to 1")
    lengths = np.asarray(doc_lengths, dtype=np.int64)
    if (lengths <= 0).any():
        raise ValueError("doc lengths must be positive")
    D = lengths.shape[0]
    rg = generator(seed)

    if family == LDA:
        alpha = truth.alpha
        alpha_vec = (np.full(K, float(alpha)) if np.isscalar(alpha)
                     else np.asarray(alpha, dtype=np.float64))
        theta = rg.dirichlet(alpha_vec, size=D)
    elif family == CTM:
        if truth.mu is None or truth.sigma is None:
            raise ValueError("CTM family needs mu and sigma")
        etas = rg.multivariate_normal(truth.mu, truth.sigma, size=D,
                                      method="cholesky")
        theta = softmax_shares(etas)
    else:
        raise ValueError(f"unknown family {family!r}")

    import scipy.sparse as sp

    rows, cols, vals = [], [], []
    z_parts = []
    for d in range(D):
        zs = rg.choice(K, size=lengths[d], p=theta[d])
        ws = np.empty(lengths[d], dtype=np.int64)
        for k in range(K):
            mask = zs == k
            n_k = int(mask.sum())
            if n_k:
                ws[mask] = rg.choice(V, size=n_k, p=beta[k])
        # canonical order within the document: sort by term, then topic
        order = np.lexsort((zs, ws))
        ws, zs = ws[order], zs[order]
        z_parts.append(zs)
        uniq, cnt = np.unique(ws, return_counts=True)
        rows.extend([d] * len(uniq))
        cols.extend(uniq.tolist())
        vals.extend(cnt.tolist())
    counts = sp.csr_matrix(
        (np.asarray(vals, dtype=np.int64), (rows, cols)), shape=(D, V))
    docs = [("house", dt.date(1901, 1, 1) + dt.timedelta(days=d)) for d in range(D)]
    return SimulatedCorpus(dtm=DocTermMatrix(docs=docs, counts=counts),
                           theta=theta, z=np.concatenate(z_parts).astype(np.int32))


def align_topics(beta_fit: np.ndarray, beta_ref: np.ndarray) -> np.ndarray:
    """Greedy one-to-one matching of fitted topics to reference topics by
    total-variation distance; returns perm with fitted topic perm[j] matched
    to reference topic j."""
    K = beta_ref.shape[0]
    tv = 0.5 * np.abs(beta_ref[:, None, :] - beta_fit[None, :, :]).sum(axis=2)
    perm = np.full(K, -1, dtype=np.int64)
    used_fit: set[int] = set()
    for _ in range(K):
        best = None
        for j in range(K):
            if perm[j] >= 0:
                continue
            for m in range(K):
                if m in used_fit:
                    continue
                if best is None or tv[j, m] < best[0]:
                    best = (tv[j, m], j, m)
        _, j, m = best
        perm[j] = m
        used_fit.add(m)
    return perm


def aligned_tv(beta_fit: np.ndarray, beta_ref: np.ndarray) -> float:
    """Mean per-topic total variation after greedy alignment."""
    perm = align_topics(beta_fit, beta_ref)
    return float(np.mean(
        [0.5 * np.abs(beta_ref[j] - beta_fit[perm[j]]).sum()
         for j in range(beta_ref.shape[0])]))


# -- serialization ----------------------------------------------------------------

def save_fit(fit: TopicModelFit, out_dir: str | Path,
             hyper: LdaHyper | None = None,
             params: CtmParams | None = None, model: str = LDA) -> None:
    """Write beta/theta as dense CSVs with id header rows, the assignment
    vector, the loglik trace, the CTM parameter blocks if present, and a
    JSON record of the hyperparameters."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_dense(out / "beta.csv", fit.beta, "term")
    _write_dense(out / "theta.csv", fit.theta, "topic")
    np.savetxt(out / "z.csv", fit.z[:, None], fmt="%d", header="topic",
               comments="")
    np.savetxt(out / "loglik.csv", fit.loglik[:, None], fmt="%.10g",
               header="loglik", comments="")
    if params is not None:
        _write_dense(out / "ctm_mu.csv", params.mu[None, :], "dim")
        _write_dense(out / "ctm_sigma.csv", params.sigma, "dim")
        _write_dense(out / "ctm_eta.csv", params.eta_doc, "dim")
    if hyper is not None:
        record = {"model": model, "K": hyper.K, "alpha": hyper.alpha_value,
                  "eta": hyper.eta, "iters": hyper.iters,
                  "burn_in": hyper.burn_in, "seed": hyper.seed}
        (out / "fit_params.json").write_text(
            json.dumps(record, indent=2, sort_keys=True), encoding="utf-8")


def load_fit(in_dir: str | Path) -> tuple[TopicModelFit, CtmParams | None]:
    out = Path(in_dir)
    beta = _read_dense(out / "beta.csv")
    theta = _read_dense(out / "theta.csv")
    z = np.loadtxt(out / "z.csv", skiprows=1, dtype=np.int32, ndmin=1)
    loglik = np.loadtxt(out / "loglik.csv", skiprows=1, ndmin=1)
    fit = TopicModelFit(beta=beta, theta=theta, z=z, loglik=loglik)
    params = None
    if (out / "ctm_mu.csv").exists():
        params = CtmParams(mu=_read_dense(out / "ctm_mu.csv").ravel(),
                           sigma=_read_dense(out / "ctm_sigma.csv"),
                           eta_doc=_read_dense(out / "ctm_eta.csv"))
    return fit, params


def _write_dense(path: Path, mat: np.ndarray, prefix: str) -> None:
    mat = np.atleast_2d(mat)
    header = ",".join(f"{prefix}_{i}" for i in range(mat.shape[1]))
    np.savetxt(path, mat, fmt="%.17g", delimiter=",", header=header,
               comments="")


def _read_dense(path: Path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
