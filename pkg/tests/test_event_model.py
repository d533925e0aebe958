import datetime as dt
import math

import numpy as np
import pytest
from scipy.stats import dirichlet as sp_dirichlet
from scipy.stats import norm, uniform

import agenda.cap_mapping as cm
import agenda.event_model as em
from agenda.rng import generator
from agenda.timeline import Election, Government, Timeline


def small_truth(seed, P=3, G=2, E=3, beta_scale=0.05, sigma_lo=0.08,
                sigma_hi=0.2, alpha_loc=2.5):
    rg = generator(seed)
    return em.EventTruth(
        alpha=alpha_loc + 0.4 * rg.standard_normal((G, P)),
        beta=beta_scale * rg.standard_normal((E, P)),
        mu=np.zeros((2, P)),
        sigma=rg.uniform(sigma_lo, sigma_hi, size=(G, P)))


def quick_spec(P, seed=0, iters=3000, burn_in=1500, thin=3, chains=2):
    return em.EventModelSpec(P=P, chains=chains, iters=iters, burn_in=burn_in,
                             thin=thin, seed=seed)


class TestLogConcentration:
    def test_hand_value(self):
        assert em.log_concentration(1.0, 0.5, -0.2, 4, 1) == pytest.approx(2.3)

    def test_zero_params_give_unit_concentration(self):
        for s in range(1, 5):
            assert math.exp(em.log_concentration(0, 0, 0, 4, s)) == 1.0

    def test_strictly_decreasing_for_positive_beta(self):
        vals = [em.log_concentration(0.7, 0.3, 0.1, 6, s) for s in range(1, 7)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_counter_range_validated(self):
        with pytest.raises(ValueError):
            em.log_concentration(0, 0, 0, 4, 0)
        with pytest.raises(ValueError):
            em.log_concentration(0, 0, 0, 4, 5)


class TestDirichletLoglik:
    def test_uniform_concentration_closed_form(self):
        # Dirichlet(1,1,1) has constant density Gamma(3) = 2 on the simplex
        val = em.dirichlet_loglik(np.array([0.2, 0.5, 0.3]), np.ones(3))
        assert val == pytest.approx(math.log(2.0), abs=1e-12)

    def test_hand_evaluated_two_component(self):
        val = em.dirichlet_loglik(np.array([0.5, 0.5]), np.array([2.0, 1.0]))
        assert val == pytest.approx(0.0, abs=1e-12)

    def test_symmetric_concentration_permutation_invariant(self):
        theta = np.array([0.6, 0.3, 0.1])
        conc = np.full(3, 1.7)
        for perm in ([0, 1, 2], [2, 1, 0], [1, 2, 0]):
            assert em.dirichlet_loglik(theta[perm], conc) == pytest.approx(
                em.dirichlet_loglik(theta, conc), abs=1e-12)

    def test_boundary_rejected(self):
        with pytest.raises(ValueError, match="strictly inside"):
            em.dirichlet_loglik(np.array([1.0, 0.0]), np.ones(2))

    def test_agrees_with_scipy(self):
        rg = generator(4)
        for _ in range(20):
            theta = rg.dirichlet(np.ones(4))
            theta = np.maximum(theta, 1e-9)
            theta /= theta.sum()
            conc = rg.uniform(0.3, 5.0, size=4)
            assert em.dirichlet_loglik(theta, conc) == pytest.approx(
                sp_dirichlet.logpdf(theta, conc), abs=1e-9)


class TestSimulateAndDesign:
    def test_panel_shapes_and_ids(self):
        truth = small_truth(1)
        sim = em.simulate_panel(truth, n_periods=9, days_per_period=3, seed=2)
        assert len(sim.panel.rows) == 9 * 3 * 2
        design = em.build_design(sim.panel, sim.timeline)
        assert design.n_cells == 18
        assert design.P == 3
        # decay restarts after each election and ends at zero
        for e in range(design.n_elec):
            decays = design.cell_decay[design.cell_elec == e]
            n_e = len(set(design.cell_period[design.cell_elec == e]))
            assert decays.max() == n_e - 1
            assert decays.min() == 0.0

    def test_day_cell_consistency(self):
        truth = small_truth(3)
        sim = em.simulate_panel(truth, n_periods=6, days_per_period=4, seed=4)
        design = em.build_design(sim.panel, sim.timeline)
        for i, row in enumerate(sim.panel.rows):
            c = design.day_cell[i]
            assert design.cell_period[c] == row.period
        assert design.cell_ndays.sum() == len(sim.panel.rows)

    def test_inconsistent_period_mapping_rejected(self):
        rows = [cm.PanelRow("house", dt.date(1950, 1, 1), 0, 1, 1),
                cm.PanelRow("house", dt.date(1950, 1, 2), 0, 2, 1)]
        shares = np.full((2, 2), 0.5)
        panel = cm.ThetaPanel(rows=rows, shares=shares)
        govs = [Government(1, "A", "x", dt.date(1949, 1, 1), dt.date(1951, 1, 1)),
                Government(2, "B", "x", dt.date(1951, 1, 1), None)]
        elecs = [Election(1, dt.date(1949, 12, 10), "x")]
        with pytest.raises(ValueError, match="more than one"):
            em.build_design(panel, Timeline(governments=govs, elections=elecs))


class TestLogPosteriorOracle:
    def test_matches_straight_line_reimplementation(self):
        truth = small_truth(5)
        sim = em.simulate_panel(truth, n_periods=8, days_per_period=3, seed=6)
        spec = quick_spec(P=3)
        design = em.build_design(sim.panel, sim.timeline)
        rg = generator(7)
        cham_ix = {"house": 0, "senate": 1}
        for _ in range(100):
            G, E, C, P = design.n_gov, design.n_elec, design.n_cells, design.P
            al = rg.normal(2.0, 0.5, size=(G, P))
            be = rg.normal(0, 0.2, size=(E, P))
            de = rg.normal(0, 0.3, size=(C, P))
            mu = rg.normal(0, 0.3, size=(2, P))
            sg = rg.uniform(0.05, 2.9, size=(G, P))
            got = em.log_posterior(sim.panel, sim.timeline, spec,
                                   al, be, de, mu, sg)
            want = 0.0
            for i, row in enumerate(sim.panel.rows):
                cell = design.day_cell[i]
                conc = np.exp(al[design.cell_gov[cell]]
                              + be[design.cell_elec[cell]]
                              * design.cell_decay[cell] + de[cell])
                want += sp_dirichlet.logpdf(sim.panel.shares[i], conc)
            want += norm.logpdf(al, 0, spec.prior_sd_alpha).sum()
            want += norm.logpdf(be, 0, spec.prior_sd_beta).sum()
            want += norm.logpdf(mu, 0, spec.prior_sd_mu).sum()
            for cell in range(C):
                want += norm.logpdf(de[cell], mu[design.cell_cham[cell]],
                                    sg[design.cell_gov[cell]]).sum()
            want += uniform.logpdf(sg, 0, spec.sigma_upper).sum()
            assert got == pytest.approx(want, abs=1e-8)


class TestFit:
    def test_deterministic_given_seed(self):
        truth = small_truth(10)
        sim = em.simulate_panel(truth, n_periods=6, days_per_period=3, seed=11)
        spec = quick_spec(P=3, seed=12, iters=400, burn_in=200, thin=2)
        p1 = em.fit(sim.panel, sim.timeline, spec)
        p2 = em.fit(sim.panel, sim.timeline, spec)
        assert (p1.alpha == p2.alpha).all()
        assert (p1.sigma == p2.sigma).all()
        assert (p1.loglik == p2.loglik).all()

    def test_draw_counts_and_ranges(self):
        truth = small_truth(13)
        sim = em.simulate_panel(truth, n_periods=6, days_per_period=3, seed=14)
        spec = quick_spec(P=3, seed=15, iters=600, burn_in=200, thin=4,
                          chains=3)
        post = em.fit(sim.panel, sim.timeline, spec)
        assert post.n_draws == 3 * (600 - 200) // 4
        assert np.bincount(post.chain).tolist() == [100, 100, 100]
        assert np.isfinite(post.alpha).all()
        assert (post.sigma > 0).all() and (post.sigma < 3).all()

    def test_thin_must_divide(self):
        spec = em.EventModelSpec(P=2, iters=100, burn_in=50, thin=3)
        with pytest.raises(ValueError, match="thin"):
            spec.validate()

    def test_null_beta_centered_near_zero(self):
        # one government, one election: the decay multiplier still varies over
        # periods, so beta is identified; with beta = 0 truth its posterior
        # should cover zero comfortably
        truth = small_truth(16, G=1, E=1, beta_scale=0.0)
        sim = em.simulate_panel(truth, n_periods=10, days_per_period=4,
                                seed=17)
        post = em.fit(sim.panel, sim.timeline, quick_spec(P=3, seed=18))
        mean = post.beta.mean(axis=0)
        sd = post.beta.std(axis=0, ddof=1)
        assert (np.abs(mean) < 2 * sd).all()

    def test_single_period_elections_still_mix(self):
        # one sitting period per election period: every decay weight is zero
        # and the election effects are prior-only, but the sampler must mix
        truth = small_truth(19, G=2, E=6)
        sim = em.simulate_panel(truth, n_periods=6, days_per_period=4, seed=20)
        post = em.fit(sim.panel, sim.timeline,
                      quick_spec(P=3, seed=21, iters=16000, burn_in=8000,
                                 thin=8))
        assert (post.design.cell_decay == 0).all()
        assert not post.rhat_warn
        assert float(post.rhat["beta"].max()) < 1.1

    def test_wrong_p_rejected(self):
        truth = small_truth(22)
        sim = em.simulate_panel(truth, n_periods=6, days_per_period=3, seed=23)
        with pytest.raises(ValueError, match="spec.P"):
            em.fit(sim.panel, sim.timeline, quick_spec(P=7))


def fabricate_posterior(alpha_draws, P=1, seed=30):
    """EventPosterior with hand-made alpha draws on a tiny two-government,
    two-election panel."""
    truth = small_truth(seed, P=P, G=2, E=2, beta_scale=0.0)
    sim = em.simulate_panel(truth, n_periods=4, days_per_period=2, seed=seed)
    design = em.build_design(sim.panel, sim.timeline)
    n = alpha_draws.shape[0]
    spec = em.EventModelSpec(P=P, chains=1, iters=2 * n, burn_in=0, thin=2)
    zeros = np.zeros((n, design.n_cells, P))
    return sim, em.EventPosterior(
        alpha=alpha_draws, beta=np.zeros((n, design.n_elec, P)),
        delta=zeros, mu=np.zeros((n, 2, P)),
        sigma=np.full((n, design.n_gov, P), 0.5),
        chain=np.zeros(n, dtype=np.int64), design=design, spec=spec,
        accept_rates={}, loglik=np.zeros((1, 2 * n)))


class TestCompareNeighbors:
    def test_disjoint_intervals_flagged(self):
        n = 401
        alpha = np.zeros((n, 2, 1))
        alpha[:, 0, 0] = np.linspace(0.1, 0.3, n)
        alpha[:, 1, 0] = np.linspace(0.4, 0.6, n)
        sim, post = fabricate_posterior(alpha)
        rows = em.compare_neighbors(post, sim.timeline, "government")
        assert len(rows) == 1
        assert rows[0].different
        assert rows[0].flagged_topics == (1,)

    def test_identical_posteriors_not_flagged(self):
        n = 401
        draws = np.tile(np.linspace(-1, 1, n)[:, None, None], (1, 2, 1))
        sim, post = fabricate_posterior(draws)
        rows = em.compare_neighbors(post, sim.timeline, "government")
        assert rows == [em.ComparisonRow("government", 2, "Gov 2", 1, "Gov 1",
                                         False, ())]

    def test_power_and_specificity(self):
        # one government's level on one topic is shifted by five noise scales;
        # that pair must flag on that topic and the others must stay quiet
        P, G, E, S = 3, 4, 4, 24
        sigma_true = 0.3
        hits = others_clean = 0
        reps = 10
        for rep in range(reps):
            rg = generator(800 + rep)
            alpha = np.full((G, P), 3.2)
            alpha[2, 1] += 5 * sigma_true
            truth = em.EventTruth(alpha=alpha, beta=np.zeros((E, P)),
                                  mu=np.zeros((2, P)),
                                  sigma=np.full((G, P), sigma_true))
            sim = em.simulate_panel(truth, n_periods=S, days_per_period=8,
                                    seed=900 + rep)
            post = em.fit(sim.panel, sim.timeline,
                          quick_spec(P=P, seed=1000 + rep, iters=16000,
                                     burn_in=8000, thin=8))
            rows = em.compare_neighbors(post, sim.timeline, "government")
            flagged = {(r.unit_id, p) for r in rows for p in r.flagged_topics}
            # government 3 (gid 3) vs government 2: topic 2 shifts up, and the
            # following comparison (4 vs 3) sees the shift drop away again,
            # which is itself a true difference
            hits += (3, 2) in flagged
            others_clean += not (flagged - {(3, 2), (4, 2)})
        assert hits >= 8
        assert others_clean >= 8

    def test_thinning_invariance_of_flags(self):
        truth = small_truth(40, G=3, E=3, beta_scale=0.0)
        truth.alpha[1] += 1.0  # make the middle government clearly different
        sim = em.simulate_panel(truth, n_periods=9, days_per_period=4, seed=41)
        flags = []
        for thin in (2, 4):
            post = em.fit(sim.panel, sim.timeline,
                          quick_spec(P=3, seed=42, iters=4000, burn_in=2000,
                                     thin=thin))
            rows = em.compare_neighbors(post, sim.timeline, "government")
            flags.append([(r.unit_id, r.different) for r in rows])
        assert flags[0] == flags[1]


class TestOutliers:
    def fabricated_post_with_conc(self, conc_row, n_days=6):
        """Posterior whose mean concentration is exactly conc_row in every
        cell, alongside a panel whose first row sits at the Dirichlet mean."""
        P = len(conc_row)
        truth = small_truth(50, P=P, G=2, E=2, beta_scale=0.0)
        sim = em.simulate_panel(truth, n_periods=4, days_per_period=2, seed=50)
        design = em.build_design(sim.panel, sim.timeline)
        n = 4
        lc = np.log(np.asarray(conc_row, dtype=float))
        alpha = np.tile(lc, (n, design.n_gov, 1))
        post = em.EventPosterior(
            alpha=alpha, beta=np.zeros((n, design.n_elec, P)),
            delta=np.zeros((n, design.n_cells, P)), mu=np.zeros((n, 2, P)),
            sigma=np.full((n, design.n_gov, P), 0.5),
            chain=np.zeros(n, dtype=np.int64), design=design,
            spec=em.EventModelSpec(P=P, chains=1, iters=2 * n, burn_in=0,
                                   thin=2),
            accept_rates={}, loglik=np.zeros((1, 1)))
        return sim, post

    def test_day_at_mean_has_zero_z(self):
        conc = np.array([2.0, 2.0, 2.0])
        sim, post = self.fabricated_post_with_conc(conc)
        shares = sim.panel.shares.copy()
        shares[0] = conc / conc.sum()
        panel = cm.ThetaPanel(rows=sim.panel.rows, shares=shares)
        z = em.outlier_zscores(panel, post)
        assert z[0] == pytest.approx(np.zeros(3), abs=1e-12)

    def test_dirichlet_moment_values(self):
        # concentration (2,2,2): mean 1/3, sd = sqrt((1/3)(2/3)/7); note a
        # day at mean + 4 sd would leave the simplex at this concentration,
        # so the flagging check below uses a tighter one
        conc = np.array([2.0, 2.0, 2.0])
        sim, post = self.fabricated_post_with_conc(conc)
        mean_conc = post.mean_concentration()
        tot = mean_conc.sum(axis=1, keepdims=True)
        mean = mean_conc / tot
        sd = np.sqrt(mean * (1 - mean) / (tot + 1))
        assert mean[0] == pytest.approx([1 / 3] * 3, abs=1e-12)
        assert sd[0] == pytest.approx(
            [math.sqrt((1 / 3) * (2 / 3) / 7)] * 3, abs=1e-12)

    def test_four_sd_day_flagged_with_dirichlet_moments(self):
        # concentration (20,20,20): mean 1/3, sd = sqrt((1/3)(2/3)/61), so a
        # day at mean + 4 sd stays inside the simplex
        conc = np.array([20.0, 20.0, 20.0])
        sd = math.sqrt((1 / 3) * (2 / 3) / 61)
        sim, post = self.fabricated_post_with_conc(conc)
        shares = sim.panel.shares.copy()
        bumped = 1 / 3 + 4 * sd
        rest = (1 - bumped) / 2
        shares[0] = [bumped, rest, rest]
        panel = cm.ThetaPanel(rows=sim.panel.rows, shares=shares)
        z = em.outlier_zscores(panel, post)
        assert z[0, 0] == pytest.approx(4.0, abs=1e-9)
        days = em.detect_outlier_days(panel, post)
        flagged = [(d.chamber, d.date) for d in days]
        assert (panel.rows[0].chamber, panel.rows[0].date) in flagged
        assert days[0].flagged_topics == (1,)

    def test_flags_invariant_under_topic_permutation(self):
        conc = np.array([3.0, 1.5, 2.5])
        sim, post = self.fabricated_post_with_conc(conc)
        z1 = em.outlier_zscores(sim.panel, post)
        perm = np.array([2, 0, 1])
        shares_p = sim.panel.shares[:, perm]
        panel_p = cm.ThetaPanel(rows=sim.panel.rows, shares=shares_p)
        post.alpha = post.alpha[:, :, perm]
        z2 = em.outlier_zscores(panel_p, post)
        assert z2 == pytest.approx(z1[:, perm], abs=1e-12)


class TestArtifactIO:
    def test_draws_and_summary_csv(self, tmp_path):
        truth = small_truth(60)
        sim = em.simulate_panel(truth, n_periods=6, days_per_period=3, seed=61)
        post = em.fit(sim.panel, sim.timeline,
                      quick_spec(P=3, seed=62, iters=200, burn_in=100, thin=10))
        em.write_draws(post, tmp_path / "draws.csv")
        em.write_summary(post, tmp_path / "summary.csv")
        lines = (tmp_path / "draws.csv").read_text().splitlines()
        assert lines[0] == "param,unit,topic,chain,draw,value"
        d = post.design
        expect = post.n_draws * 3 * (d.n_gov + d.n_elec + d.n_cells + 2
                                     + d.n_gov)
        assert len(lines) - 1 == expect
        rows = em.compare_neighbors(post, sim.timeline, "government")
        em.write_comparisons(rows, tmp_path / "comparisons.csv")
        header = (tmp_path / "comparisons.csv").read_text().splitlines()[0]
        assert header.startswith("level,unit_id")
