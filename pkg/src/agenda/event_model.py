"""Hierarchical Dirichlet regression of daily topic shares on government terms
and decaying election effects.

Each day's share vector is a Dirichlet draw whose concentration is modelled
on the log scale: a government-level effect, an election effect that decays
linearly over the sitting periods of its election period, and a
chamber-by-period random effect with government-specific scale. Estimation is
Metropolis-within-Gibbs with component-wise random walks (adaptive during
burn-in), a closed-form draw for the chamber-level means and a reflected
random walk for the bounded scales.

The within-election sitting-period counter restarts at 1 after every
election, so the decay multiplier (periods remaining) is largest right after
an election and reaches zero in the period before the next one.
"""
from __future__ import annotations

import csv
import datetime as dt
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import gammaln

from . import _kernels
from .cap_mapping import CapScheme, PanelRow, ThetaPanel, aggregate
from .corpus import SittingCalendar
from .record_parser import CHAMBERS
from .rng import generator, spawn_seeds
from .timeline import Timeline


@dataclass
class EventModelSpec:
    P: int = 19
    prior_sd_alpha: float = 10.0
    prior_sd_beta: float = 10.0
    prior_sd_mu: float = 10.0
    sigma_upper: float = 3.0
    chains: int = 2
    iters: int = 4000
    burn_in: int = 2000
    thin: int = 2
    seed: int = 0

    def validate(self) -> None:
        if min(self.P, self.chains, self.iters, self.thin) < 1:
            raise ValueError("P, chains, iters and thin must be positive")
        if min(self.prior_sd_alpha, self.prior_sd_beta, self.prior_sd_mu,
               self.sigma_upper) <= 0:
            raise ValueError("prior scales must be positive")
        if not 0 <= self.burn_in < self.iters:
            raise ValueError("need 0 <= burn_in < iters")
        if (self.iters - self.burn_in) % self.thin:
            raise ValueError("thin must divide iters - burn_in")

    @property
    def draws_per_chain(self) -> int:
        return (self.iters - self.burn_in) // self.thin


def log_concentration(alpha_gp: float, beta_ep: float, delta_csp: float,
                      n_periods: int, s_within: int) -> float:
    """Log Dirichlet concentration for one (chamber, period, topic) cell.

    s_within counts sitting periods inside the election period starting at 1,
    so the election effect scales with the periods remaining and hits zero in
    the period's last sitting block.
    """
    if not 1 <= s_within <= n_periods:
        raise ValueError("within-election counter out of range")
    return alpha_gp + beta_ep * (n_periods - s_within) + delta_csp


def dirichlet_loglik(theta_row: np.ndarray, concentration: np.ndarray) -> float:
    """Exact Dirichlet log density at an interior point of the simplex."""
    theta_row = np.asarray(theta_row, dtype=np.float64)
    concentration = np.asarray(concentration, dtype=np.float64)
    if theta_row.shape != concentration.shape:
        raise ValueError("dimension mismatch")
    if (theta_row <= 0).any() or (theta_row >= 1).any():
        raise ValueError("theta must be strictly inside the simplex")
    if (concentration <= 0).any():
        raise ValueError("concentrations must be positive")
    return float(gammaln(concentration.sum()) - gammaln(concentration).sum()
                 + ((concentration - 1.0) * np.log(theta_row)).sum())


# -- design construction ---------------------------------------------------------

@dataclass
class PanelDesign:
    """Panel collapsed to (chamber, period) cells with sufficient statistics."""
    cell_cham: np.ndarray   # (C,) chamber index into CHAMBERS
    cell_period: np.ndarray  # (C,) sitting-period id
    cell_gov: np.ndarray    # (C,) government index (into gov_ids)
    cell_elec: np.ndarray   # (C,) election index (into elec_ids)
    cell_ndays: np.ndarray  # (C,)
    cell_sumlog: np.ndarray  # (C, P) sum of log shares over the cell's days
    cell_decay: np.ndarray  # (C,) decay multiplier N_e - s_within
    day_cell: np.ndarray    # (D,) panel row -> cell index
    gov_ids: list[int]
    elec_ids: list[int]
    P: int

    @property
    def n_cells(self) -> int:
        return self.cell_cham.shape[0]

    @property
    def n_gov(self) -> int:
        return len(self.gov_ids)

    @property
    def n_elec(self) -> int:
        return len(self.elec_ids)


def build_design(panel: ThetaPanel, timeline: Timeline) -> PanelDesign:
    gov_ids = [g.gid for g in timeline.governments]
    elec_ids = [e.eid for e in timeline.elections]
    gov_index = {g: i for i, g in enumerate(gov_ids)}
    elec_index = {e: i for i, e in enumerate(elec_ids)}
    cham_index = {c: i for i, c in enumerate(CHAMBERS)}

    period_gov: dict[int, int] = {}
    period_elec: dict[int, int] = {}
    for row in panel.rows:
        if row.government not in gov_index or row.election not in elec_index:
            raise ValueError(f"panel row {row.chamber} {row.date} references "
                             "ids missing from the timeline")
        for table, value in ((period_gov, row.government),
                             (period_elec, row.election)):
            if table.setdefault(row.period, value) != value:
                raise ValueError(f"period {row.period} maps to more than one "
                                 "government or election")

    # within-election counter over the panel's sitting periods
    periods = sorted(period_gov)
    decay_of_period: dict[int, float] = {}
    by_elec: dict[int, list[int]] = {}
    for s in periods:
        by_elec.setdefault(period_elec[s], []).append(s)
    for plist in by_elec.values():
        n_e = len(plist)
        for j, s in enumerate(plist, start=1):
            decay_of_period[s] = float(n_e - j)

    cell_of: dict[tuple[int, int], int] = {}
    for row in panel.rows:
        key = (cham_index[row.chamber], row.period)
        if key not in cell_of:
            cell_of[key] = len(cell_of)
    order = sorted(cell_of, key=lambda k: (k[0], k[1]))
    remap = {cell_of[key]: i for i, key in enumerate(order)}

    C, P = len(order), panel.P
    cell_cham = np.array([key[0] for key in order], dtype=np.int64)
    cell_period = np.array([key[1] for key in order], dtype=np.int64)
    cell_gov = np.array([gov_index[period_gov[key[1]]] for key in order],
                        dtype=np.int64)
    cell_elec = np.array([elec_index[period_elec[key[1]]] for key in order],
                         dtype=np.int64)
    cell_decay = np.array([decay_of_period[key[1]] for key in order])
    cell_ndays = np.zeros(C)
    cell_sumlog = np.zeros((C, P))
    day_cell = np.zeros(len(panel.rows), dtype=np.int64)
    for i, row in enumerate(panel.rows):
        j = remap[cell_of[(cham_index[row.chamber], row.period)]]
        day_cell[i] = j
        cell_ndays[j] += 1
        cell_sumlog[j] += np.log(panel.shares[i])
    return PanelDesign(cell_cham=cell_cham, cell_period=cell_period,
                       cell_gov=cell_gov, cell_elec=cell_elec,
                       cell_ndays=cell_ndays, cell_sumlog=cell_sumlog,
                       cell_decay=cell_decay, day_cell=day_cell,
                       gov_ids=gov_ids, elec_ids=elec_ids, P=P)


def build_panel(theta: np.ndarray, scheme: CapScheme,
                docs: list[tuple[str, dt.date]], calendar: SittingCalendar,
                timeline: Timeline) -> ThetaPanel:
    """Aggregate fitted shares and attach period, government and election ids.

    A sitting period is assigned to the government and election period in
    force on its first sitting day.
    """
    shares = aggregate(theta, scheme)
    first_day: dict[int, dt.date] = {}
    for day in calendar.days:
        first_day.setdefault(calendar.period_of_day[day], day)
    rows = []
    for chamber, date in docs:
        s = calendar.period_of_day[date]
        anchor = first_day[s]
        rows.append(PanelRow(chamber=chamber, date=date, period=s,
                             government=timeline.government_of(anchor).gid,
                             election=timeline.election_of(anchor).eid))
    return ThetaPanel(rows=rows, shares=shares,
                      group_codes=scheme.group_codes)


# -- posterior ----------------------------------------------------------------------

@dataclass
class EventPosterior:
    alpha: np.ndarray   # (n, G, P)
    beta: np.ndarray    # (n, E, P)
    delta: np.ndarray   # (n, C, P)
    mu: np.ndarray      # (n, 2, P)
    sigma: np.ndarray   # (n, G, P)
    chain: np.ndarray   # (n,)
    design: PanelDesign
    spec: EventModelSpec
    accept_rates: dict[str, float]
    loglik: np.ndarray  # (chains, iters) log-posterior trace
    rhat: dict[str, np.ndarray] = field(default_factory=dict)
    rhat_warn: bool = False

    @property
    def n_draws(self) -> int:
        return self.alpha.shape[0]

    def concentration_draws(self) -> np.ndarray:
        """Per-draw Dirichlet concentrations, shape (n, C, P)."""
        d = self.design
        lc = (self.alpha[:, d.cell_gov, :]
              + self.beta[:, d.cell_elec, :] * d.cell_decay[None, :, None]
              + self.delta)
        return np.exp(lc)

    def mean_concentration(self) -> np.ndarray:
        return self.concentration_draws().mean(axis=0)


def _params_array_loglik(design: PanelDesign, alpha, beta, delta, mu, sigma,
                         spec: EventModelSpec) -> float:
    """Log posterior used by the sampler (likelihood via cell statistics)."""
    conc = np.exp(alpha[design.cell_gov]
                  + beta[design.cell_elec] * design.cell_decay[:, None]
                  + delta)
    lik = _kernels.event_total_loglik(design.cell_ndays, design.cell_sumlog,
                                      conc, conc.sum(axis=1))
    pri = (-0.5 * (alpha ** 2).sum() / spec.prior_sd_alpha ** 2
           - alpha.size * np.log(spec.prior_sd_alpha * np.sqrt(2 * np.pi)))
    pri += (-0.5 * (beta ** 2).sum() / spec.prior_sd_beta ** 2
            - beta.size * np.log(spec.prior_sd_beta * np.sqrt(2 * np.pi)))
    pri += (-0.5 * (mu ** 2).sum() / spec.prior_sd_mu ** 2
            - mu.size * np.log(spec.prior_sd_mu * np.sqrt(2 * np.pi)))
    sd = sigma[design.cell_gov]  # (C, P)
    resid = delta - mu[design.cell_cham]
    pri += float((-np.log(sd * np.sqrt(2 * np.pi))
                  - 0.5 * (resid / sd) ** 2).sum())
    if ((sigma <= 0) | (sigma >= spec.sigma_upper)).any():
        return -np.inf
    pri += -sigma.size * np.log(spec.sigma_upper)
    return float(lik + pri)


def log_posterior(panel: ThetaPanel, timeline: Timeline, spec: EventModelSpec,
                  alpha, beta, delta, mu, sigma) -> float:
    """Unnormalized log posterior at explicit parameter values.

    delta rows follow the design's canonical cell order (chambers in
    CHAMBERS order, then sitting period).
    """
    design = build_design(panel, timeline)
    return _params_array_loglik(design, np.asarray(alpha, dtype=float),
                                np.asarray(beta, dtype=float),
                                np.asarray(delta, dtype=float),
                                np.asarray(mu, dtype=float),
                                np.asarray(sigma, dtype=float), spec)


def fit(panel: ThetaPanel, timeline: Timeline, spec: EventModelSpec,
        ) -> EventPosterior:
    """Draw from the posterior with `spec.chains` independent chains.

    Deterministic given spec.seed; step sizes adapt only during burn-in.
    Emits acceptance diagnostics and split-chain R-hat per scalar parameter;
    R-hat above 1.1 on more than 5 percent of parameters raises a warning
    flag in the result.
    """
    spec.validate()
    if panel.P != spec.P:
        raise ValueError(f"panel has P={panel.P} but spec.P={spec.P}")
    design = build_design(panel, timeline)
    C, P = design.n_cells, design.P
    G, E = design.n_gov, design.n_elec
    n_keep = spec.draws_per_chain
    shape = dict(alpha=(G, P), beta=(E, P), delta=(C, P), mu=(2, P),
                 sigma=(G, P))
    draws = {k: np.zeros((spec.chains * n_keep,) + s) for k, s in shape.items()}
    chain_ix = np.zeros(spec.chains * n_keep, dtype=np.int64)
    loglik = np.zeros((spec.chains, spec.iters))
    accepts = np.zeros(5, dtype=np.int64)
    proposals = np.zeros(5, dtype=np.int64)

    n_norm = C * P + G * P + E * P + G * P + 2 * P + P + G * P + 2 * E * P
    n_unif = C * P + G * P + E * P + G * P + P + G * P + 2 * E * P
    scratch_sum = np.zeros(G)
    scratch_cnt = np.zeros(G)

    for chain, chain_seed in enumerate(spawn_seeds(spec.seed, spec.chains)):
        rg = generator(chain_seed)
        alpha = np.zeros((G, P))
        beta = np.zeros((E, P))
        delta = np.zeros((C, P))
        mu = np.zeros((2, P))
        sigma = np.full((G, P), min(1.0, spec.sigma_upper / 2))
        conc = np.exp(alpha[design.cell_gov]
                      + beta[design.cell_elec] * design.cell_decay[:, None]
                      + delta)
        conc_tot = conc.sum(axis=1)
        loglik_cell = np.array([
            _kernels.event_total_loglik(design.cell_ndays[i:i + 1],
                                        design.cell_sumlog[i:i + 1],
                                        conc[i:i + 1], conc_tot[i:i + 1])
            for i in range(C)])
        if not np.isfinite(loglik_cell.sum()):
            raise ValueError("posterior not finite at the initial state")
        step_delta = np.full((C, P), 0.2)
        step_alpha = np.full((G, P), 0.2)
        step_beta = np.full((E, P), 0.1)
        step_sigma = np.full((G, P), 0.2)
        step_shift_global = np.full(P, 1.0)
        step_shift_gov = np.full((G, P), 0.5)
        step_shift_elec = np.full((E, P), 0.2)
        step_shift_slope = np.full((E, P), 0.2)

        kept = 0
        for t in range(spec.iters):
            _kernels.event_sweep(
                alpha, beta, delta, mu, sigma, conc, conc_tot, loglik_cell,
                design.cell_gov, design.cell_elec, design.cell_cham,
                design.cell_ndays, design.cell_sumlog, design.cell_decay,
                spec.prior_sd_alpha, spec.prior_sd_beta, spec.prior_sd_mu,
                spec.sigma_upper, step_delta, step_alpha, step_beta,
                step_sigma, step_shift_global, step_shift_gov,
                step_shift_elec, step_shift_slope, scratch_sum, scratch_cnt,
                t < spec.burn_in,
                rg.standard_normal(n_norm), rg.random(n_unif),
                accepts, proposals)
            loglik[chain, t] = _params_array_loglik(design, alpha, beta,
                                                    delta, mu, sigma, spec)
            if t >= spec.burn_in and (t - spec.burn_in + 1) % spec.thin == 0:
                i = chain * n_keep + kept
                draws["alpha"][i] = alpha
                draws["beta"][i] = beta
                draws["delta"][i] = delta
                draws["mu"][i] = mu
                draws["sigma"][i] = sigma
                chain_ix[i] = chain
                kept += 1
        assert kept == n_keep

    # Recenter each draw along the likelihood-invariant ridge: adding a
    # constant to every government level while subtracting it from the
    # chamber means and the period effects leaves the model unchanged, so
    # only the weak priors pin that direction. Folding the mean of the
    # present chambers' mu into alpha makes the reported levels the
    # identified ones without altering any model-implied quantity.
    present = np.unique(design.cell_cham)
    m = draws["mu"][:, present, :].mean(axis=1, keepdims=True)
    draws["alpha"] += m
    draws["mu"] -= m
    draws["delta"] -= m

    rates = {name: float(accepts[j] / max(proposals[j], 1))
             for j, name in enumerate(["delta", "alpha", "beta", "sigma",
                                       "shift"])}
    post = EventPosterior(alpha=draws["alpha"], beta=draws["beta"],
                          delta=draws["delta"], mu=draws["mu"],
                          sigma=draws["sigma"], chain=chain_ix, design=design,
                          spec=spec, accept_rates=rates, loglik=loglik)
    post.rhat = {k: split_rhat(draws[k], chain_ix) for k in draws}
    flat = np.concatenate([v.ravel() for v in post.rhat.values()])
    post.rhat_warn = bool(np.mean(flat > 1.1) > 0.05)
    if post.rhat_warn:
        warnings.warn("split R-hat above 1.1 on more than 5% of parameters",
                      RuntimeWarning)
    return post


def split_rhat(draws: np.ndarray, chain_ix: np.ndarray) -> np.ndarray:
    """Split-chain potential scale reduction per scalar parameter.

    Each chain's draws are halved, giving 2 * chains sequences; constant
    sequences return 1.
    """
    chains = int(chain_ix.max()) + 1 if chain_ix.size else 1
    seqs = []
    for c in range(chains):
        block = draws[chain_ix == c]
        half = block.shape[0] // 2
        if half < 2:
            raise ValueError("not enough draws for split R-hat")
        seqs.append(block[:half])
        seqs.append(block[half:2 * half])
    x = np.stack(seqs)          # (m, n, ...)
    m, n = x.shape[0], x.shape[1]
    mean_j = x.mean(axis=1)
    var_j = x.var(axis=1, ddof=1)
    W = var_j.mean(axis=0)
    B_over_n = mean_j.var(axis=0, ddof=1)
    out = np.ones_like(W)
    ok = W > 0
    out[ok] = np.sqrt((n - 1) / n + B_over_n[ok] / W[ok])
    out[~ok & (B_over_n > 0)] = np.inf
    return out


# -- comparisons and outliers ----------------------------------------------------

@dataclass(frozen=True)
class ComparisonRow:
    level: str
    unit_id: int
    unit_name: str
    compared_to_id: int
    compared_to_name: str
    different: bool
    flagged_topics: tuple[int, ...]  # 1-based topic numbers


def compare_neighbors(post: EventPosterior, timeline: Timeline, level: str,
                      ) -> list[ComparisonRow]:
    """Flag adjacent governments or elections whose 95 percent credible
    intervals fail to overlap on at least one topic.

    Government comparisons skip excluded terms via the timeline's comparison
    links; elections are compared consecutively.
    """
    if level == "government":
        effects = post.alpha
        index = {g: i for i, g in enumerate(post.design.gov_ids)}
        name_of = {g.gid: g.name for g in timeline.governments}
    elif level == "election":
        effects = post.beta
        index = {e: i for i, e in enumerate(post.design.elec_ids)}
        name_of = {e.eid: str(e.date.year) for e in timeline.elections}
    else:
        raise ValueError(f"unknown comparison level {level!r}")
    lo = np.quantile(effects, 0.025, axis=0)
    hi = np.quantile(effects, 0.975, axis=0)
    rows = []
    for earlier, later in timeline.comparison_pairs(level):
        a, b = index[earlier], index[later]
        disjoint = (lo[b] > hi[a]) | (hi[b] < lo[a])
        flagged = tuple(int(p) + 1 for p in np.flatnonzero(disjoint))
        rows.append(ComparisonRow(level=level, unit_id=later,
                                  unit_name=name_of[later],
                                  compared_to_id=earlier,
                                  compared_to_name=name_of[earlier],
                                  different=bool(flagged),
                                  flagged_topics=flagged))
    return rows


def outlier_zscores(panel: ThetaPanel, post: EventPosterior) -> np.ndarray:
    """Per-day, per-topic deviations from the sitting-period mean in Dirichlet
    standard deviations, at the posterior-mean concentration."""
    conc = post.mean_concentration()          # (C, P)
    tot = conc.sum(axis=1, keepdims=True)
    mean = conc / tot
    sd = np.sqrt(mean * (1 - mean) / (tot + 1))
    cells = post.design.day_cell
    return (panel.shares - mean[cells]) / sd[cells]


@dataclass(frozen=True)
class OutlierDay:
    chamber: str
    date: dt.date
    period: int
    flagged_topics: tuple[int, ...]  # 1-based
    max_abs_z: float


def detect_outlier_days(panel: ThetaPanel, post: EventPosterior,
                        threshold: float = 3.0) -> list[OutlierDay]:
    """Days whose share of some topic sits more than `threshold` Dirichlet
    standard deviations from its sitting-period mean."""
    z = outlier_zscores(panel, post)
    out = []
    for i, row in enumerate(panel.rows):
        hits = np.flatnonzero(np.abs(z[i]) > threshold)
        if hits.size:
            out.append(OutlierDay(chamber=row.chamber, date=row.date,
                                  period=row.period,
                                  flagged_topics=tuple(int(p) + 1 for p in hits),
                                  max_abs_z=float(np.abs(z[i]).max())))
    return out


# -- simulation ---------------------------------------------------------------------

@dataclass
class EventTruth:
    alpha: np.ndarray  # (G, P)
    beta: np.ndarray   # (E, P)
    mu: np.ndarray     # (2, P)
    sigma: np.ndarray  # (G, P)


@dataclass
class SimulatedPanel:
    panel: ThetaPanel
    timeline: Timeline
    truth: EventTruth
    delta: np.ndarray  # (C, P) in the design's canonical cell order


def simulate_panel(truth: EventTruth, *, n_periods: int, days_per_period: int,
                   seed: int, chambers: tuple[str, ...] = CHAMBERS,
                   start: dt.date = dt.date(1901, 5, 9)) -> SimulatedPanel:
    """Generate a synthetic panel plus a matching timeline from known effects.

    Sitting periods are split as evenly as possible over the elections, and
    elections are split contiguously over the governments; every period's
    days fall inside one government term and one election period.
    """
    from .timeline import Election, Government

    G, P = truth.alpha.shape
    E = truth.beta.shape[0]
    if truth.sigma.shape != (G, P) or truth.mu.shape[1] != P:
        raise ValueError("truth arrays disagree on dimensions")
    if not (1 <= G <= E <= n_periods):
        raise ValueError("need 1 <= governments <= elections <= periods")
    rg = generator(seed)

    base = n_periods // E
    extra = n_periods % E
    periods_of_elec = [base + (1 if e < extra else 0) for e in range(E)]
    elec_of_period = np.repeat(np.arange(E), periods_of_elec)
    gbase = E // G
    gextra = E % G
    elecs_of_gov = [gbase + (1 if g < gextra else 0) for g in range(G)]
    gov_of_elec = np.repeat(np.arange(G), elecs_of_gov)

    period_days: list[list[dt.date]] = []
    for s in range(n_periods):
        first = start + dt.timedelta(days=s * (days_per_period + 7))
        period_days.append([first + dt.timedelta(days=i)
                            for i in range(days_per_period)])

    elections = []
    for e in range(E):
        first_s = int(np.flatnonzero(elec_of_period == e)[0])
        elections.append(Election(eid=e + 1,
                                  date=period_days[first_s][0]
                                  - dt.timedelta(days=3),
                                  winner="Labor" if e % 2 else "Non-labor"))
    governments = []
    for g in range(G):
        first_e = int(np.flatnonzero(gov_of_elec == g)[0])
        gov_start = elections[first_e].date
        if g + 1 < G:
            next_e = int(np.flatnonzero(gov_of_elec == g + 1)[0])
            gov_end = elections[next_e].date
        else:
            gov_end = None
        governments.append(Government(gid=g + 1, name=f"Gov {g + 1}",
                                      party="Labor" if g % 2 else "Non-labor",
                                      start=gov_start, end=gov_end))
    timeline = Timeline(governments=governments, elections=elections)

    # delta in canonical cell order: chamber-major, then period
    n_cham = len(chambers)
    delta = np.empty((n_cham * n_periods, P))
    for ci in range(n_cham):
        for s in range(n_periods):
            g = gov_of_elec[elec_of_period[s]]
            delta[ci * n_periods + s] = (truth.mu[ci if ci < 2 else 1]
                                         + truth.sigma[g] * rg.standard_normal(P))

    rows, shares = [], []
    for ci, chamber in enumerate(chambers):
        for s in range(n_periods):
            e = int(elec_of_period[s])
            g = int(gov_of_elec[e])
            n_e = periods_of_elec[e]
            s_within = int(s - np.flatnonzero(elec_of_period == e)[0]) + 1
            lc = np.array([
                log_concentration(truth.alpha[g, p], truth.beta[e, p],
                                  delta[ci * n_periods + s, p], n_e, s_within)
                for p in range(P)])
            conc = np.exp(lc)
            for day in period_days[s]:
                rows.append(PanelRow(chamber=chamber, date=day, period=s,
                                     government=g + 1, election=e + 1))
                shares.append(rg.dirichlet(conc))
    order = sorted(range(len(rows)), key=lambda i: (rows[i].date, rows[i].chamber))
    panel = ThetaPanel(rows=[rows[i] for i in order],
                       shares=np.asarray(shares)[order])
    return SimulatedPanel(panel=panel, timeline=timeline, truth=truth,
                          delta=delta)


# -- artifact IO -------------------------------------------------------------------

def write_draws(post: EventPosterior, path: str | Path) -> None:
    """Long-format draws CSV: param,unit,topic,chain,draw,value."""
    d = post.design
    per_chain = post.n_draws // post.spec.chains
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["param", "unit", "topic", "chain", "draw", "value"])

        def emit(name, arr, labels):
            for j, label in enumerate(labels):
                for p in range(d.P):
                    for i in range(post.n_draws):
                        writer.writerow([name, label, p + 1,
                                         int(post.chain[i]), i % per_chain,
                                         f"{arr[i, j, p]:.10g}"])

        emit("alpha", post.alpha, [f"g{g}" for g in d.gov_ids])
        emit("beta", post.beta, [f"e{e}" for e in d.elec_ids])
        emit("delta", post.delta,
             [f"{CHAMBERS[d.cell_cham[c]]}:{d.cell_period[c]}"
              for c in range(d.n_cells)])
        emit("mu", post.mu, list(CHAMBERS))
        emit("sigma", post.sigma, [f"g{g}" for g in d.gov_ids])


def write_summary(post: EventPosterior, path: str | Path) -> None:
    d = post.design
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["param", "unit", "topic", "mean", "sd",
                         "q025", "q500", "q975", "rhat"])

        def emit(name, arr, labels):
            q = np.quantile(arr, [0.025, 0.5, 0.975], axis=0)
            rhat = post.rhat[name]
            for j, label in enumerate(labels):
                for p in range(d.P):
                    writer.writerow([
                        name, label, p + 1,
                        f"{arr[:, j, p].mean():.10g}",
                        f"{arr[:, j, p].std(ddof=1):.10g}",
                        f"{q[0, j, p]:.10g}", f"{q[1, j, p]:.10g}",
                        f"{q[2, j, p]:.10g}", f"{rhat[j, p]:.6g}"])

        emit("alpha", post.alpha, [f"g{g}" for g in d.gov_ids])
        emit("beta", post.beta, [f"e{e}" for e in d.elec_ids])
        emit("delta", post.delta,
             [f"{CHAMBERS[d.cell_cham[c]]}:{d.cell_period[c]}"
              for c in range(d.n_cells)])
        emit("mu", post.mu, list(CHAMBERS))
        emit("sigma", post.sigma, [f"g{g}" for g in d.gov_ids])


def write_comparisons(rows: list[ComparisonRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["level", "unit_id", "unit_name", "compared_to_id",
                         "compared_to_name", "different", "flagged_topics"])
        for r in rows:
            writer.writerow([r.level, r.unit_id, r.unit_name,
                             r.compared_to_id, r.compared_to_name,
                             "true" if r.different else "false",
                             ";".join(map(str, r.flagged_topics))])


def write_flagged_units_table(rows: list[ComparisonRow], timeline: Timeline,
                              path: str | Path) -> None:
    """The flagged-units table: one row per unit found different, in the
    shape of the published prime-minister and election summaries."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        if rows and rows[0].level == "government":
            writer.writerow(["number", "premiership", "start", "end",
                             "party_changed"])
            for r in rows:
                if not r.different:
                    continue
                g = timeline.government_by_id(r.unit_id)
                prev = timeline.government_by_id(r.compared_to_id)
                writer.writerow([g.gid, g.name, g.start.isoformat(),
                                 g.end.isoformat() if g.end else "",
                                 "No" if g.party == prev.party else "Yes"])
        else:
            writer.writerow(["number", "year", "date", "winner",
                             "changed_party"])
            for r in rows:
                if not r.different:
                    continue
                e = timeline.election_by_id(r.unit_id)
                prev = timeline.election_by_id(r.compared_to_id)
                writer.writerow([e.eid, e.date.year, e.date.isoformat(),
                                 e.winner,
                                 "No" if e.winner == prev.winner else "Yes"])


def write_outliers(days: list[OutlierDay], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["chamber", "date", "period_id", "flagged_topics",
                         "max_abs_z"])
        for o in days:
            writer.writerow([o.chamber, o.date.isoformat(), o.period,
                             ";".join(map(str, o.flagged_topics)),
                             f"{o.max_abs_z:.6g}"])
