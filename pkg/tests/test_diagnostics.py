import math

import numpy as np
import pytest

import agenda.diagnostics as dg
import agenda.topic_models as tm
from agenda.rng import generator

from conftest import make_dtm


class TestHeldout:
    def test_uniform_single_topic_closed_form(self):
        V = 8
        beta = np.full((1, V), 1 / V)
        held = make_dtm([[2, 1, 0, 0, 3, 0, 0, 1]])
        hyper = tm.LdaHyper(K=1, alpha=1.0, eta=0.1, seed=0, iters=10,
                            burn_in=5)
        out = dg.heldout_loglik(beta, held, hyper)
        assert out == pytest.approx(math.log(1 / V), abs=1e-12)

    def test_point_mass_topics_hand_value(self):
        # K=2 point-mass topics; a 10-token document entirely of term 0.
        # Folding in n_fit = 5 tokens: every assignment is forced to topic 0,
        # so theta_hat = ((5 + a)/(5 + 2a), a/(5 + 2a)) and the per-word
        # predictive for the scored half is theta_hat[0] * 1.
        beta = np.array([[1.0, 0.0], [0.0, 1.0]])
        held = make_dtm([[10, 0]])
        a = 0.5
        hyper = tm.LdaHyper(K=2, alpha=a, eta=0.1, seed=1, iters=40,
                            burn_in=10)
        out = dg.heldout_loglik(beta, held, hyper)
        expect = math.log((5 + a) / (5 + 2 * a))
        assert out == pytest.approx(expect, abs=1e-12)
        assert -0.2 < out < 0.0

    def test_true_model_beats_mismatched(self):
        rg = generator(100)
        V, K, D = 60, 4, 60
        beta_true = rg.dirichlet(np.full(V, 0.05), size=K)
        truth = tm.GenerativeTruth(beta=beta_true, alpha=0.3)
        wins = 0
        for rep in range(10):
            sim = tm.generate_corpus(truth, np.full(D, 80), seed=200 + rep,
                                     family="lda")
            hyper = tm.LdaHyper(K=K, alpha=0.3, eta=0.05, seed=rep, iters=30,
                                burn_in=10)
            good = dg.heldout_loglik(beta_true, sim.dtm, hyper, seed=300 + rep)
            shuffled = beta_true[:, rg.permutation(V)]
            bad = dg.heldout_loglik(shuffled, sim.dtm, hyper, seed=300 + rep)
            wins += good > bad
        assert wins >= 9

    def test_uniform_beta_scores_worse(self):
        rg = generator(7)
        beta_true = rg.dirichlet(np.full(40, 0.1), size=3)
        sim = tm.generate_corpus(tm.GenerativeTruth(beta=beta_true, alpha=0.4),
                                 np.full(30, 60), seed=8, family="lda")
        hyper = tm.LdaHyper(K=3, alpha=0.4, eta=0.1, seed=2, iters=30,
                            burn_in=10)
        sharp = dg.heldout_loglik(beta_true, sim.dtm, hyper, seed=5)
        flat = dg.heldout_loglik(np.full((3, 40), 1 / 40), sim.dtm, hyper,
                                 seed=5)
        assert sharp > flat

    def test_short_documents_skipped_with_warning(self):
        beta = np.full((2, 4), 0.25)
        held = make_dtm([[1, 0, 0, 0], [3, 1, 0, 0]])
        hyper = tm.LdaHyper(K=2, alpha=1.0, eta=0.1, seed=0, iters=10,
                            burn_in=2)
        with pytest.warns(RuntimeWarning, match="skipped 1"):
            dg.heldout_loglik(beta, held, hyper)

    def test_improves_over_burn_in_on_synthetic_data(self):
        rg = generator(55)
        beta_true = rg.dirichlet(np.full(60, 0.05), size=3)
        truth = tm.GenerativeTruth(beta=beta_true, alpha=0.3)
        sim = tm.generate_corpus(truth, np.full(80, 100), seed=56,
                                 family="lda")
        train, held = dg.split_heldout(sim.dtm, 0.25, seed=57)
        hyper_early = tm.LdaHyper(K=3, alpha=0.3, eta=0.1, iters=1, burn_in=0,
                                  seed=58)
        hyper_late = tm.LdaHyper(K=3, alpha=0.3, eta=0.1, iters=200,
                                 burn_in=100, seed=58)
        early = dg.heldout_loglik(tm.fit_lda(train, hyper_early).beta, held,
                                  hyper_late, seed=59)
        late = dg.heldout_loglik(tm.fit_lda(train, hyper_late).beta, held,
                                 hyper_late, seed=59)
        assert late > early


class TestExclusivity:
    def test_disjoint_supports_score_one(self):
        beta = np.array([[0.5, 0.5, 0, 0], [0, 0, 0.9, 0.1]])
        assert dg.exclusivity(beta, M=2) == pytest.approx([1.0, 1.0])

    def test_identical_topics_score_half(self):
        row = np.array([0.4, 0.3, 0.2, 0.1])
        beta = np.vstack([row, row])
        assert dg.exclusivity(beta, M=3) == pytest.approx([0.5, 0.5])

    def test_hand_built_three_by_four(self):
        beta = np.array([
            [0.70, 0.20, 0.05, 0.05],
            [0.10, 0.60, 0.20, 0.10],
            [0.05, 0.05, 0.50, 0.40],
        ])
        # top-2 words per topic by mass: topic0 -> (0, 1), topic1 -> (1, 2),
        # topic2 -> (2, 3); hand arithmetic on column shares:
        expect = [
            ((0.70 / 0.85) + (0.20 / 0.85)) / 2,
            ((0.60 / 0.85) + (0.20 / 0.75)) / 2,
            ((0.50 / 0.75) + (0.40 / 0.55)) / 2,
        ]
        assert dg.exclusivity(beta, M=2) == pytest.approx(expect, abs=1e-12)

    def test_duplicated_rows_score_one_over_k(self):
        for K in (2, 3, 5):
            beta = np.tile(np.array([[0.5, 0.25, 0.15, 0.1]]), (K, 1))
            assert dg.exclusivity(beta, M=4) == pytest.approx([1 / K] * K,
                                                              abs=1e-15)


class TestCoherence:
    def test_perfect_cooccurrence_near_zero(self):
        n = 7
        counts = np.zeros((n, 3), dtype=int)
        counts[:, 0] = 1
        counts[:, 1] = 1
        dtm = make_dtm(counts)
        beta = np.array([[0.6, 0.4, 0.0]])
        out = dg.coherence(beta, dtm, M=2)
        assert out[0] == pytest.approx(math.log((n + 1) / n), abs=1e-12)

    def test_never_cooccurring_pair(self):
        counts = np.zeros((20, 2), dtype=int)
        counts[:10, 0] = 1
        counts[10:, 1] = 1
        dtm = make_dtm(counts)
        beta = np.array([[0.7, 0.3]])
        out = dg.coherence(beta, dtm, M=2)
        assert out[0] == pytest.approx(math.log(1 / 10), abs=1e-12)

    def test_five_doc_two_topic_hand_fixture(self):
        # docs (rows) x terms (cols); presence pattern written out by hand
        counts = np.array([
            [2, 1, 0, 0],
            [1, 1, 0, 0],
            [1, 0, 1, 0],
            [0, 0, 2, 1],
            [0, 0, 1, 1],
        ])
        dtm = make_dtm(counts)
        beta = np.array([[0.5, 0.3, 0.1, 0.1],
                         [0.1, 0.1, 0.5, 0.3]])
        # topic 0 top-2 = terms (0, 1): doc(1) = 2, codoc(0,1) = 2
        # topic 1 top-2 = terms (2, 3): doc(3) = 2, codoc(2,3) = 2
        expect = [math.log(3 / 2), math.log(3 / 2)]
        assert dg.coherence(beta, dtm, M=2) == pytest.approx(expect, abs=1e-12)

    def test_absent_word_warns_and_uses_one(self):
        counts = np.array([[3, 0], [2, 0]])
        dtm = make_dtm(counts)
        beta = np.array([[0.6, 0.4]])
        with pytest.warns(RuntimeWarning, match="absent"):
            out = dg.coherence(beta, dtm, M=2)
        assert out[0] == pytest.approx(math.log(1.0), abs=1e-12)

    def test_permutation_invariant_to_document_order(self):
        rg = generator(3)
        counts = rg.integers(0, 3, size=(12, 6))
        counts[0, 0] += 1
        beta = rg.dirichlet(np.ones(6), size=2)
        a = dg.coherence(beta, make_dtm(counts), M=3)
        b = dg.coherence(beta, make_dtm(counts[rg.permutation(12)]), M=3)
        assert a == pytest.approx(b, abs=1e-12)


class TestDispersion:
    def test_null_simulation_near_one(self):
        rg = generator(60)
        D, V, K, Nd = 200, 50, 3, 500
        beta = rg.dirichlet(np.ones(V), size=K)
        theta = rg.dirichlet(np.ones(K), size=D)
        m = theta @ beta
        counts = np.vstack([rg.multinomial(Nd, m[d]) for d in range(D)])
        fit = tm.TopicModelFit(beta=beta, theta=theta,
                               z=np.zeros(1, dtype=np.int32),
                               loglik=np.zeros(1))
        stat = dg.dispersion(fit, make_dtm(counts))
        assert 0.8 < stat < 1.2

    def test_underfitting_raises_dispersion(self):
        rg = generator(61)
        V = 40
        beta_true = np.zeros((2, V))
        beta_true[0, :20] = 1 / 20
        beta_true[1, 20:] = 1 / 20
        sim = tm.generate_corpus(tm.GenerativeTruth(beta=beta_true, alpha=0.2),
                                 np.full(100, 200), seed=62, family="lda")
        fit1 = tm.fit_lda(sim.dtm, tm.LdaHyper(K=1, alpha=1.0, eta=0.1,
                                               iters=30, burn_in=10, seed=63))
        fit2 = tm.fit_lda(sim.dtm, tm.LdaHyper(K=2, alpha=0.5, eta=0.1,
                                               iters=120, burn_in=60, seed=63))
        d1 = dg.dispersion(fit1, sim.dtm)
        d2 = dg.dispersion(fit2, sim.dtm)
        assert d1 > d2

    def test_single_cell_exact_fit_is_zero(self):
        dtm = make_dtm([[4]])
        fit = tm.TopicModelFit(beta=np.array([[1.0]]), theta=np.array([[1.0]]),
                               z=np.zeros(4, dtype=np.int32),
                               loglik=np.zeros(1))
        assert dg.dispersion(fit, dtm) == 0.0


class TestSweep:
    def test_singleton_k_list(self):
        rg = generator(70)
        counts = rg.integers(0, 4, size=(30, 25))
        counts[:, 0] += 1
        dtm = make_dtm(counts)
        template = tm.LdaHyper(K=2, iters=30, burn_in=10, seed=71)
        reports = dg.sweep_topics(dtm, [3], template)
        assert len(reports) == 1
        assert reports[0].K == 3

    def test_deterministic_given_seed(self):
        rg = generator(72)
        counts = rg.integers(0, 4, size=(30, 25))
        counts[:, 0] += 1
        dtm = make_dtm(counts)
        template = tm.LdaHyper(K=2, iters=30, burn_in=10, seed=73)
        r1 = dg.sweep_topics(dtm, [2, 4], template)
        r2 = dg.sweep_topics(dtm, [2, 4], template)
        assert [r.heldout_loglik for r in r1] == [r.heldout_loglik for r in r2]
        assert [r.dispersion for r in r1] == [r.dispersion for r in r2]

    def test_failed_k_skipped_with_warning(self):
        dtm = make_dtm([[2, 1], [1, 1]])  # 5 tokens total, 4 in training
        template = tm.LdaHyper(K=2, iters=10, burn_in=2, seed=74)
        with pytest.warns(RuntimeWarning, match="failed"):
            reports = dg.sweep_topics(dtm, [2, 1000], template,
                                      heldout_frac=0.5)
        assert [r.K for r in reports] == [2]

    def test_report_csv(self, tmp_path):
        rg = generator(75)
        counts = rg.integers(0, 4, size=(24, 20))
        counts[:, 0] += 1
        dtm = make_dtm(counts)
        template = tm.LdaHyper(K=2, iters=20, burn_in=10, seed=76)
        reports = dg.sweep_topics(dtm, [2, 3], template)
        dg.write_reports(reports, tmp_path)
        header = (tmp_path / "report.csv").read_text().splitlines()[0]
        assert header == "K,heldout,exclusivity_mean,coherence_mean,dispersion"
        per_topic = (tmp_path / "per_topic.csv").read_text().splitlines()
        assert len(per_topic) == 1 + 2 + 3
