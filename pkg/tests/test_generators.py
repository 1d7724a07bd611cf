import numpy as np
import pytest

from hcpd.generators import (
    CL_REGENERATE,
    Event,
    EventSchedule,
    GroundTruth,
    SbmConfig,
    bter_generate,
    bter_probabilities,
    sample_block_matrix,
    sample_bter_config,
    sbm_block_matrices,
    sbm_generate,
    table1_bter,
    table1_sbm,
    table1_schedules,
)
from hcpd.graph import unweight


def small_sbm(trials=10):
    B = np.array([[0.8, 0.2, 0.1], [0.2, 0.6, 0.3], [0.1, 0.3, 0.5]])
    return SbmConfig((20, 15, 10), B, trials)


def block_density(g, labels, i, j):
    n_i, n_j = np.sum(labels == i), np.sum(labels == j)
    pairs = n_i * (n_i - 1) / 2 if i == j else n_i * n_j
    a, b = labels[g.src], labels[g.dst]
    mask = ((a == i) & (b == j)) | ((a == j) & (b == i))
    return g.weight[mask].sum() / pairs, pairs


class TestSchedules:
    def test_sbm_schedule(self):
        sbm, _ = table1_schedules()
        assert sbm.times == (16, 31, 51, 76)
        assert sbm.global_times == (31, 76)
        assert sbm.local_times == (16, 51)
        first = sbm.events[0]
        assert first.communities == (0,) and first.factor == pytest.approx(2 / 3)
        assert sbm.events[1].communities == (0, 1, 5, 6)
        assert sbm.events[2].communities == (6, 7) and sbm.events[2].factor == 2

    def test_bter_schedule_marks_event_two_global(self):
        _, bter = table1_schedules()
        assert bter.events[1].kind == CL_REGENERATE and bter.events[1].is_global
        assert bter.events[1].communities == (0,)
        assert bter.global_times == (31, 76)

    def test_times_must_increase(self):
        with pytest.raises(ValueError):
            EventSchedule((Event(5, "rate-scale", (0,), False, 0.5), Event(5, "rate-scale", (1,), False, 0.5)))

    def test_unknown_community_is_rejected(self):
        sched = EventSchedule((Event(3, "rate-scale", (7,), False, 0.5),))
        with pytest.raises(ValueError, match="unknown community"):
            sbm_generate(small_sbm(), 5, sched, 0)

    def test_event_round_trip(self):
        for e in table1_schedules()[0]:
            assert Event.from_dict(e.to_dict()) == e


class TestBlockMatrix:
    def test_dominant_diagonal_and_symmetry(self):
        for seed in range(50):
            B = sample_block_matrix(8, np.random.default_rng(seed))
            np.testing.assert_array_equal(B, B.T)
            off = B[~np.eye(8, dtype=bool)]
            assert B.diagonal().min() > off.max()
            assert 0 <= B.min() and B.max() <= 1

    def test_matches_rejection_sampler_in_distribution(self):
        # k=2: accept (d1, d2, o) iff o < min(d1, d2).  Under acceptance o is the
        # minimum of three uniforms, so E[o] = 1/4 and E[d] = 5/8.
        rng = np.random.default_rng(0)
        draws = np.array([sample_block_matrix(2, rng) for _ in range(20000)])
        assert draws[:, 0, 1].mean() == pytest.approx(0.25, abs=0.01)
        assert draws[:, 0, 0].mean() == pytest.approx(0.625, abs=0.01)

    def test_config_rejects_non_dominant_matrix(self):
        with pytest.raises(ValueError):
            SbmConfig((2, 2), np.array([[0.1, 0.5], [0.5, 0.9]]), 10)


class TestSbm:
    def test_deterministic_per_seed_and_seeds_differ(self):
        a, _ = table1_sbm(3, T=3)
        b, _ = table1_sbm(3, T=3)
        c, _ = table1_sbm(4, T=3)
        assert np.array_equal(a.at(2).weight, b.at(2).weight)
        assert not np.array_equal(a.at(2).weight, c.at(2).weight)

    def test_table1_shape(self):
        seq, truth = table1_sbm(0, T=2)
        assert seq.n_nodes == 1000 and truth.assignment.k == 8
        assert truth.assignment.sizes.tolist() == [300, 200, 150, 100, 80, 70, 50, 50]

    def test_weights_are_binomial_fractions(self):
        seq, _ = sbm_generate(small_sbm(), 3, EventSchedule(()), 1)
        for g in seq:
            assert g.weight.min() > 0 and g.weight.max() <= 1
            np.testing.assert_allclose(g.weight * 10, np.round(g.weight * 10))
            unweight(g, 0)  # precondition holds

    def test_block_density_monte_carlo(self):
        cfg = small_sbm()
        seq, _ = sbm_generate(cfg, 100, EventSchedule(()), 2)
        labels = cfg.labels
        for i, j in [(0, 0), (1, 2), (2, 2)]:
            p = cfg.block_matrix[i, j]
            dens = [block_density(g, labels, i, j) for g in seq]
            mean = np.mean([d for d, _ in dens])
            pairs = dens[0][1]
            tol = 3 * np.sqrt(p * (1 - p) / (cfg.trials * pairs * 100))
            assert abs(mean - p) < tol

    def test_pre_event_snapshots_share_one_model(self):
        cfg = small_sbm()
        sched = EventSchedule((Event(16, "rate-scale", (0,), False, 0.5),))
        seq, _ = sbm_generate(cfg, 20, sched, 5)
        before = [block_density(seq.at(t), cfg.labels, 0, 0)[0] for t in range(1, 16)]
        after = [block_density(seq.at(t), cfg.labels, 0, 0)[0] for t in range(16, 21)]
        sd = np.sqrt(0.8 * 0.2 / (10 * 190))
        assert np.ptp(before) < 8 * sd
        assert np.mean(after) == pytest.approx(0.4, abs=4 * sd)

    def test_event_only_affects_later_snapshots_and_targeted_pairs(self):
        cfg = small_sbm()
        quiet, _ = sbm_generate(cfg, 6, EventSchedule(()), 9)
        sched = EventSchedule((Event(4, "rate-scale", (0,), False, 0.5),))
        loud, _ = sbm_generate(cfg, 6, sched, 9)
        for t in (1, 2, 3):
            assert list(quiet.at(t).edges()) == list(loud.at(t).edges())
        labels = cfg.labels
        for t in (4, 5, 6):
            def other(g):
                inside = (labels[g.src] == 0) & (labels[g.dst] == 0)
                return sorted(zip(g.src[~inside], g.dst[~inside], g.weight[~inside]))
            assert other(quiet.at(t)) == other(loud.at(t))
            assert block_density(loud.at(t), labels, 0, 0)[0] < block_density(quiet.at(t), labels, 0, 0)[0]

    def test_global_rate_event_scales_listed_off_diagonals(self):
        seq_states = sbm_block_matrices(small_sbm(), 10,
                                        EventSchedule((Event(5, "rate-scale", (0, 1), True, 0.5),)), 0)
        B0, B1 = seq_states[0][2], seq_states[1][2]
        assert B1[0, 1] == pytest.approx(B0[0, 1] / 2)
        assert B1[0, 2] == B0[0, 2] and B1[0, 0] == B0[0, 0]

    def test_regeneration_draws_a_new_valid_matrix(self):
        _, truth = table1_sbm(1, T=100)
        mats = [np.array(m["matrix"]) for m in truth.params["block_matrices"]]
        assert not np.allclose(mats[3], mats[4])
        off = mats[4][~np.eye(8, dtype=bool)]
        assert mats[4].diagonal().min() > off.max()


class TestBter:
    def test_sizes_in_range(self):
        for seed in range(20):
            cfg = sample_bter_config(seed)
            assert sum(cfg.community_sizes) == 100 and len(cfg.community_sizes) == 5
            assert all(15 <= s <= 25 for s in cfg.community_sizes)
            assert 0 < cfg.er_probs.min() and cfg.er_probs.max() <= 0.5
            assert np.all(cfg.cl_weights > 0)

    def test_inter_community_expected_edges(self):
        cfg = sample_bter_config(1)
        labels = cfg.labels
        iu, ju = np.triu_indices(cfg.n, 1)
        inter = labels[iu] != labels[ju]
        probs = bter_probabilities(cfg.community_sizes, cfg.er_probs, cfg.cl_weights, iu, ju, labels)
        # edge present iff Binomial(trials, p) > 0
        p_edge = 1 - (1 - probs[inter]) ** cfg.trials
        want = p_edge.sum()
        seq, _ = bter_generate(cfg, 100, EventSchedule(()), 1)
        counts = [np.sum(labels[g.src] != labels[g.dst]) for g in seq]
        sd = np.sqrt(np.sum(p_edge * (1 - p_edge)) / 100)
        assert abs(np.mean(counts) - want) < 4 * sd

    def test_cl_probabilities_are_capped(self):
        cfg = sample_bter_config(0)
        iu, ju = np.triu_indices(cfg.n, 1)
        probs = bter_probabilities(cfg.community_sizes, cfg.er_probs, cfg.cl_weights * 50, iu, ju, cfg.labels)
        assert probs.max() <= 1.0

    def test_table1_events_change_the_right_pairs(self):
        seq, truth = table1_bter(2)
        labels = truth.assignment.labels
        # event 2 redraws c0's CL weights: pairs not touching c0 are unaffected
        g30, g31 = seq.at(30), seq.at(31)
        assert g30.n_nodes == g31.n_nodes == 100
        quiet, _ = table1_bter(2, T=30)
        assert list(quiet.at(30).edges()) == list(g30.edges())
        assert truth.schedule.global_times == (31, 76)
        assert set(np.unique(labels)) == set(range(5))


def test_ground_truth_round_trip(tmp_path):
    _, truth = table1_bter(0, T=40)
    truth.write(tmp_path)
    back = GroundTruth.read(tmp_path)
    assert back.schedule == truth.schedule and back.assignment == truth.assignment
    assert back.T == 40 and back.model == "bter"
