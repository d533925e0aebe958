"""Numba kernels for the collapsed Gibbs samplers and the event model.

Everything here is deterministic given the pre-drawn random arrays passed in;
no kernel owns an RNG. Token streams are in canonical order (documents
ascending, term ids ascending within a document, repeats adjacent).
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def lda_run(token_doc, token_term, z, doc_topic, term_topic, topic_total,
            doc_len, alpha, eta, uniforms, burn_in,
            acc_doc_topic, acc_term_topic, acc_topic_total,
            loglik_out, trace_out, record_trace):
    """Run full collapsed-Gibbs sweeps over all tokens.

    uniforms has one row per sweep and one column per token. Post-burn-in
    count tables are accumulated into the acc_* arrays; when record_trace is
    true the z vector after each sweep is stored in trace_out.
    """
    n_tokens = token_doc.shape[0]
    K = doc_topic.shape[1]
    V = term_topic.shape[0]
    n_sweeps = uniforms.shape[0]
    probs = np.empty(K, dtype=np.float64)
    for t in range(n_sweeps):
        for i in range(n_tokens):
            d = token_doc[i]
            v = token_term[i]
            k_old = z[i]
            doc_topic[d, k_old] -= 1
            term_topic[v, k_old] -= 1
            topic_total[k_old] -= 1
            total = 0.0
            for k in range(K):
                p = ((term_topic[v, k] + eta) / (topic_total[k] + V * eta)
                     * (doc_topic[d, k] + alpha))
                probs[k] = p
                total += p
            target = uniforms[t, i] * total
            acc = 0.0
            k_new = K - 1
            for k in range(K):
                acc += probs[k]
                if target < acc:
                    k_new = k
                    break
            z[i] = k_new
            doc_topic[d, k_new] += 1
            term_topic[v, k_new] += 1
            topic_total[k_new] += 1
        loglik_out[t] = lda_joint_loglik(doc_topic, term_topic, topic_total,
                                         doc_len, alpha, eta)
        if t >= burn_in:
            for d in range(doc_topic.shape[0]):
                for k in range(K):
                    acc_doc_topic[d, k] += doc_topic[d, k]
            for v2 in range(V):
                for k in range(K):
                    acc_term_topic[v2, k] += term_topic[v2, k]
            for k in range(K):
                acc_topic_total[k] += topic_total[k]
        if record_trace:
            for i in range(n_tokens):
                trace_out[t, i] = z[i]


@njit(cache=True)
def lda_joint_loglik(doc_topic, term_topic, topic_total, doc_len, alpha, eta):
    """Collapsed joint log p(w, z) under symmetric Dirichlet priors."""
    D, K = doc_topic.shape
    V = term_topic.shape[0]
    out = K * (math.lgamma(V * eta) - V * math.lgamma(eta))
    for k in range(K):
        s = 0.0
        for v in range(V):
            s += math.lgamma(term_topic[v, k] + eta)
        out += s - math.lgamma(topic_total[k] + V * eta)
    out += D * (math.lgamma(K * alpha) - K * math.lgamma(alpha))
    for d in range(D):
        s = 0.0
        for k in range(K):
            s += math.lgamma(doc_topic[d, k] + alpha)
        out += s - math.lgamma(doc_len[d] + K * alpha)
    return out


@njit(cache=True)
def ctm_z_sweep(token_doc, token_term, z, doc_topic, term_topic, topic_total,
                theta, eta, uniforms):
    """One Gibbs sweep over assignments with document shares theta held fixed.

    Topic-term distributions stay collapsed; the document factor is theta.
    """
    n_tokens = token_doc.shape[0]
    K = doc_topic.shape[1]
    V = term_topic.shape[0]
    probs = np.empty(K, dtype=np.float64)
    for i in range(n_tokens):
        d = token_doc[i]
        v = token_term[i]
        k_old = z[i]
        doc_topic[d, k_old] -= 1
        term_topic[v, k_old] -= 1
        topic_total[k_old] -= 1
        total = 0.0
        for k in range(K):
            p = (theta[d, k] * (term_topic[v, k] + eta)
                 / (topic_total[k] + V * eta))
            probs[k] = p
            total += p
        target = uniforms[i] * total
        acc = 0.0
        k_new = K - 1
        for k in range(K):
            acc += probs[k]
            if target < acc:
                k_new = k
                break
        z[i] = k_new
        doc_topic[d, k_new] += 1
        term_topic[v, k_new] += 1
        topic_total[k_new] += 1


@njit(cache=True)
def foldin_run(token_term, z, topic_counts, beta, alpha, uniforms, burn_in,
               acc_theta):
    """Fold one held-out document in with beta fixed; accumulate smoothed
    topic shares post burn-in."""
    n_tokens = token_term.shape[0]
    K = topic_counts.shape[0]
    n_sweeps = uniforms.shape[0]
    probs = np.empty(K, dtype=np.float64)
    kept = 0
    for t in range(n_sweeps):
        for i in range(n_tokens):
            v = token_term[i]
            k_old = z[i]
            topic_counts[k_old] -= 1
            total = 0.0
            for k in range(K):
                p = beta[k, v] * (topic_counts[k] + alpha)
                probs[k] = p
                total += p
            target = uniforms[t, i] * total
            acc = 0.0
            k_new = K - 1
            for k in range(K):
                acc += probs[k]
                if target < acc:
                    k_new = k
                    break
            z[i] = k_new
            topic_counts[k_new] += 1
        if t >= burn_in:
            kept += 1
            denom = n_tokens + K * alpha
            for k in range(K):
                acc_theta[k] += (topic_counts[k] + alpha) / denom
    return kept


# -- event model ---------------------------------------------------------------

@njit(cache=True, inline="always")
def _cell_loglik(n_days, sumlog_row, conc_row, conc_sum):
    out = n_days * math.lgamma(conc_sum)
    for p in range(conc_row.shape[0]):
        out += (conc_row[p] - 1.0) * sumlog_row[p] - n_days * math.lgamma(conc_row[p])
    return out


@njit(cache=True)
def event_total_loglik(cell_ndays, cell_sumlog, conc, conc_tot):
    total = 0.0
    for i in range(conc.shape[0]):
        total += _cell_loglik(cell_ndays[i], cell_sumlog[i], conc[i], conc_tot[i])
    return total


@njit(cache=True)
def event_sweep(alpha, beta, delta, mu, sigma,
                conc, conc_tot, loglik_cell,
                cell_gov, cell_elec, cell_cham, cell_ndays, cell_sumlog,
                cell_decay,
                prior_sd_alpha, prior_sd_beta, prior_sd_mu, sigma_upper,
                step_delta, step_alpha, step_beta, step_sigma,
                step_shift_global, step_shift_gov, step_shift_elec,
                step_shift_slope, scratch_sum, scratch_cnt,
                adapt, normals, uniforms, accepts, proposals):
    """One Metropolis-within-Gibbs sweep over all parameter blocks.

    normals and uniforms are flat arrays consumed in a fixed order: delta
    block (topic-major), alpha, beta, sigma blocks, the closed-form mu
    draws, then three translation blocks. The translations move along the
    likelihood-invariant ridges of the additive parameterization (level
    effects against the random-effect means) so the chain mixes across them;
    their acceptance ratio involves priors only. accepts/proposals count per
    block [delta, alpha, beta, sigma, shifts] and are only incremented when
    adapt is off.
    """
    C, P = delta.shape
    G = alpha.shape[0]
    E = beta.shape[0]
    rn = 0
    ru = 0
    rm = 0.05  # Robbins-Monro adaptation gain

    # delta: one scalar update per (cell, topic)
    for p in range(P):
        for i in range(C):
            g = cell_gov[i]
            c = cell_cham[i]
            old = delta[i, p]
            new = old + step_delta[i, p] * normals[rn]
            rn += 1
            a_old = conc[i, p]
            a_new = a_old * math.exp(new - old)
            tot_new = conc_tot[i] - a_old + a_new
            dlik = (cell_ndays[i] * (math.lgamma(tot_new) - math.lgamma(conc_tot[i])
                                     - math.lgamma(a_new) + math.lgamma(a_old))
                    + (a_new - a_old) * cell_sumlog[i, p])
            m = mu[c, p]
            sd = sigma[g, p]
            dpri = -0.5 * ((new - m) ** 2 - (old - m) ** 2) / (sd * sd)
            if math.log(uniforms[ru]) < dlik + dpri:
                delta[i, p] = new
                conc[i, p] = a_new
                conc_tot[i] = tot_new
                loglik_cell[i] += dlik
                if adapt:
                    step_delta[i, p] = min(step_delta[i, p] * math.exp(rm * 0.7), 10.0)
                else:
                    accepts[0] += 1
            elif adapt:
                step_delta[i, p] = max(step_delta[i, p] * math.exp(-rm * 0.3), 1e-05)
            if not adapt:
                proposals[0] += 1
            ru += 1

    # alpha: affects every cell of its government, all chambers
    for g in range(G):
        for p in range(P):
            old = alpha[g, p]
            new = old + step_alpha[g, p] * normals[rn]
            rn += 1
            shift = math.exp(new - old)
            dlik = 0.0
            for i in range(C):
                if cell_gov[i] != g:
                    continue
                a_old = conc[i, p]
                a_new = a_old * shift
                tot_new = conc_tot[i] - a_old + a_new
                dlik += (cell_ndays[i] * (math.lgamma(tot_new)
                                          - math.lgamma(conc_tot[i])
                                          - math.lgamma(a_new)
                                          + math.lgamma(a_old))
                         + (a_new - a_old) * cell_sumlog[i, p])
            dpri = -0.5 * (new * new - old * old) / (prior_sd_alpha * prior_sd_alpha)
            if math.log(uniforms[ru]) < dlik + dpri:
                alpha[g, p] = new
                for i in range(C):
                    if cell_gov[i] != g:
                        continue
                    a_old = conc[i, p]
                    a_new = a_old * shift
                    tot_new = conc_tot[i] - a_old + a_new
                    dcell = (cell_ndays[i] * (math.lgamma(tot_new)
                                              - math.lgamma(conc_tot[i])
                                              - math.lgamma(a_new)
                                              + math.lgamma(a_old))
                             + (a_new - a_old) * cell_sumlog[i, p])
                    conc[i, p] = a_new
                    conc_tot[i] = tot_new
                    loglik_cell[i] += dcell
                if adapt:
                    step_alpha[g, p] = min(step_alpha[g, p] * math.exp(rm * 0.7), 10.0)
                else:
                    accepts[1] += 1
            elif adapt:
                step_alpha[g, p] = max(step_alpha[g, p] * math.exp(-rm * 0.3), 1e-05)
            if not adapt:
                proposals[1] += 1
            ru += 1

    # beta: enters through the per-cell decay multiplier
    for e in range(E):
        for p in range(P):
            old = beta[e, p]
            new = old + step_beta[e, p] * normals[rn]
            rn += 1
            dlik = 0.0
            for i in range(C):
                if cell_elec[i] != e:
                    continue
                a_old = conc[i, p]
                a_new = a_old * math.exp((new - old) * cell_decay[i])
                tot_new = conc_tot[i] - a_old + a_new
                dlik += (cell_ndays[i] * (math.lgamma(tot_new)
                                          - math.lgamma(conc_tot[i])
                                          - math.lgamma(a_new)
                                          + math.lgamma(a_old))
                         + (a_new - a_old) * cell_sumlog[i, p])
            dpri = -0.5 * (new * new - old * old) / (prior_sd_beta * prior_sd_beta)
            if math.log(uniforms[ru]) < dlik + dpri:
                beta[e, p] = new
                for i in range(C):
                    if cell_elec[i] != e:
                        continue
                    a_old = conc[i, p]
                    a_new = a_old * math.exp((new - old) * cell_decay[i])
                    tot_new = conc_tot[i] - a_old + a_new
                    dcell = (cell_ndays[i] * (math.lgamma(tot_new)
                                              - math.lgamma(conc_tot[i])
                                              - math.lgamma(a_new)
                                              + math.lgamma(a_old))
                             + (a_new - a_old) * cell_sumlog[i, p])
                    conc[i, p] = a_new
                    conc_tot[i] = tot_new
                    loglik_cell[i] += dcell
                if adapt:
                    step_beta[e, p] = min(step_beta[e, p] * math.exp(rm * 0.7), 10.0)
                else:
                    accepts[2] += 1
            elif adapt:
                step_beta[e, p] = max(step_beta[e, p] * math.exp(-rm * 0.3), 1e-05)
            if not adapt:
                proposals[2] += 1
            ru += 1

    # sigma: reflected random walk inside (0, sigma_upper)
    for g in range(G):
        for p in range(P):
            old = sigma[g, p]
            new = old + step_sigma[g, p] * normals[rn]
            rn += 1
            for _ in range(64):
                if new < 0.0:
                    new = -new
                elif new > sigma_upper:
                    new = 2.0 * sigma_upper - new
                else:
                    break
            dpost = 0.0
            for i in range(C):
                if cell_gov[i] != g:
                    continue
                resid = delta[i, p] - mu[cell_cham[i], p]
                dpost += (-math.log(new) - 0.5 * (resid / new) ** 2
                          + math.log(old) + 0.5 * (resid / old) ** 2)
            if math.log(uniforms[ru]) < dpost:
                sigma[g, p] = new
                if adapt:
                    step_sigma[g, p] = min(step_sigma[g, p] * math.exp(rm * 0.7), 10.0)
                else:
                    accepts[3] += 1
            elif adapt:
                step_sigma[g, p] = max(step_sigma[g, p] * math.exp(-rm * 0.3), 1e-05)
            if not adapt:
                proposals[3] += 1
            ru += 1

    # mu: conjugate normal draw given delta and sigma
    n_cham = mu.shape[0]
    for c in range(n_cham):
        for p in range(P):
            prec = 1.0 / (prior_sd_mu * prior_sd_mu)
            mean_num = 0.0
            for i in range(C):
                if cell_cham[i] != c:
                    continue
                sd = sigma[cell_gov[i], p]
                w = 1.0 / (sd * sd)
                prec += w
                mean_num += w * delta[i, p]
            mu[c, p] = mean_num / prec + normals[rn] / math.sqrt(prec)
            rn += 1

    # global shift: alpha[:, p] + s, mu[:, p] - s, delta[:, p] - s leaves the
    # likelihood and the delta prior untouched
    for p in range(P):
        s = step_shift_global[p] * normals[rn]
        rn += 1
        dpri = 0.0
        for g in range(G):
            dpri += -0.5 * ((alpha[g, p] + s) ** 2 - alpha[g, p] ** 2) \
                / (prior_sd_alpha * prior_sd_alpha)
        for c in range(n_cham):
            dpri += -0.5 * ((mu[c, p] - s) ** 2 - mu[c, p] ** 2) \
                / (prior_sd_mu * prior_sd_mu)
        if math.log(uniforms[ru]) < dpri:
            for g in range(G):
                alpha[g, p] += s
            for c in range(n_cham):
                mu[c, p] -= s
            for i in range(C):
                delta[i, p] -= s
            if adapt:
                step_shift_global[p] = min(
                    step_shift_global[p] * math.exp(rm * 0.7), 10.0)
            else:
                accepts[4] += 1
        elif adapt:
            step_shift_global[p] = max(
                step_shift_global[p] * math.exp(-rm * 0.3), 1e-05)
        if not adapt:
            proposals[4] += 1
        ru += 1

    # per-government shift between alpha and its cells' delta values
    for g in range(G):
        for p in range(P):
            s = step_shift_gov[g, p] * normals[rn]
            rn += 1
            dpri = -0.5 * ((alpha[g, p] + s) ** 2 - alpha[g, p] ** 2) \
                / (prior_sd_alpha * prior_sd_alpha)
            sd = sigma[g, p]
            for i in range(C):
                if cell_gov[i] != g:
                    continue
                r_old = delta[i, p] - mu[cell_cham[i], p]
                r_new = r_old - s
                dpri += -0.5 * (r_new * r_new - r_old * r_old) / (sd * sd)
            if math.log(uniforms[ru]) < dpri:
                alpha[g, p] += s
                for i in range(C):
                    if cell_gov[i] == g:
                        delta[i, p] -= s
                if adapt:
                    step_shift_gov[g, p] = min(
                        step_shift_gov[g, p] * math.exp(rm * 0.7), 10.0)
                else:
                    accepts[4] += 1
            elif adapt:
                step_shift_gov[g, p] = max(
                    step_shift_gov[g, p] * math.exp(-rm * 0.3), 1e-05)
            if not adapt:
                proposals[4] += 1
            ru += 1

    # per-election shift between beta and the decay-weighted delta values
    for e in range(E):
        for p in range(P):
            s = step_shift_elec[e, p] * normals[rn]
            rn += 1
            dpri = -0.5 * ((beta[e, p] + s) ** 2 - beta[e, p] ** 2) \
                / (prior_sd_beta * prior_sd_beta)
            for i in range(C):
                if cell_elec[i] != e:
                    continue
                sd = sigma[cell_gov[i], p]
                r_old = delta[i, p] - mu[cell_cham[i], p]
                r_new = r_old - s * cell_decay[i]
                dpri += -0.5 * (r_new * r_new - r_old * r_old) / (sd * sd)
            if math.log(uniforms[ru]) < dpri:
                beta[e, p] += s
                for i in range(C):
                    if cell_elec[i] == e:
                        delta[i, p] -= s * cell_decay[i]
                if adapt:
                    step_shift_elec[e, p] = min(
                        step_shift_elec[e, p] * math.exp(rm * 0.7), 10.0)
                else:
                    accepts[4] += 1
            elif adapt:
                step_shift_elec[e, p] = max(
                    step_shift_elec[e, p] * math.exp(-rm * 0.3), 1e-05)
            if not adapt:
                proposals[4] += 1
            ru += 1

    # slope composite: trade beta against the involved government levels and
    # the decay residuals, another likelihood-invariant direction
    for e in range(E):
        for p in range(P):
            s = step_shift_slope[e, p] * normals[rn]
            rn += 1
            for g in range(G):
                scratch_sum[g] = 0.0
                scratch_cnt[g] = 0.0
            for i in range(C):
                if cell_elec[i] == e:
                    scratch_sum[cell_gov[i]] += cell_decay[i]
                    scratch_cnt[cell_gov[i]] += 1.0
            dpri = -0.5 * ((beta[e, p] + s) ** 2 - beta[e, p] ** 2) \
                / (prior_sd_beta * prior_sd_beta)
            for g in range(G):
                if scratch_cnt[g] == 0.0:
                    continue
                dbar = scratch_sum[g] / scratch_cnt[g]
                a_new = alpha[g, p] - s * dbar
                dpri += -0.5 * (a_new * a_new - alpha[g, p] ** 2) \
                    / (prior_sd_alpha * prior_sd_alpha)
            for i in range(C):
                if cell_elec[i] != e:
                    continue
                g = cell_gov[i]
                dbar = scratch_sum[g] / scratch_cnt[g]
                sd = sigma[g, p]
                r_old = delta[i, p] - mu[cell_cham[i], p]
                r_new = r_old - s * (cell_decay[i] - dbar)
                dpri += -0.5 * (r_new * r_new - r_old * r_old) / (sd * sd)
            if math.log(uniforms[ru]) < dpri:
                beta[e, p] += s
                for g in range(G):
                    if scratch_cnt[g] > 0.0:
                        alpha[g, p] -= s * (scratch_sum[g] / scratch_cnt[g])
                for i in range(C):
                    if cell_elec[i] != e:
                        continue
                    g = cell_gov[i]
                    dbar = scratch_sum[g] / scratch_cnt[g]
                    delta[i, p] -= s * (cell_decay[i] - dbar)
                if adapt:
                    step_shift_slope[e, p] = min(
                        step_shift_slope[e, p] * math.exp(rm * 0.7), 10.0)
                else:
                    accepts[4] += 1
            elif adapt:
                step_shift_slope[e, p] = max(
                    step_shift_slope[e, p] * math.exp(-rm * 0.3), 1e-05)
            if not adapt:
                proposals[4] += 1
            ru += 1
