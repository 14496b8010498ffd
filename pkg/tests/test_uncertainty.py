import math

import numpy as np
import pytest

from semrank.model import validate_config
from semrank.uncertainty import cluster_mass, estimate, renormalize, semantic_entropy

from conftest import make_candidate, random_request


class TestRenormalize:
    def test_equal_split(self):
        items = [make_candidate("a", [1.0], 0.2), make_candidate("b", [1.0], 0.2)]
        probs = [c.prob for c in renormalize(items)]
        assert probs == [0.5, 0.5]

    def test_singleton(self):
        items = [make_candidate("a", [1.0], 0.3)]
        assert renormalize(items)[0].prob == 1.0

    def test_ratios_preserved(self):
        items = [
            make_candidate("a", [1.0], 0.1),
            make_candidate("b", [1.0], 0.2),
            make_candidate("c", [1.0], 0.3),
        ]
        probs = [c.prob for c in renormalize(items)]
        assert probs == pytest.approx([1 / 6, 2 / 6, 3 / 6], abs=1e-12)
        assert sum(probs) == pytest.approx(1.0, abs=1e-12)

    def test_sum_to_one_random(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 15))
            items = [
                make_candidate(f"i{i}", [1.0], float(rng.uniform(1e-6, 1.0)))
                for i in range(n)
            ]
            out = renormalize(items)
            assert sum(c.prob for c in out) == pytest.approx(1.0, abs=1e-12)


class TestClusterMass:
    def test_direct_sum(self):
        members = [make_candidate("a", [1.0], 0.2), make_candidate("b", [1.0], 0.3)]
        assert cluster_mass(members) == pytest.approx(0.5, abs=1e-15)

    def test_singleton(self):
        assert cluster_mass([make_candidate("a", [1.0], 0.25)]) == 0.25


class TestSemanticEntropy:
    def test_single_cluster_zero(self):
        assert semantic_entropy([1.0]) == 0.0
        assert semantic_entropy([1.0], "log_m") == 0.0

    def test_two_uniform_clusters(self):
        assert semantic_entropy([0.5, 0.5]) == pytest.approx(math.log(2), abs=1e-12)

    def test_four_uniform_clusters(self):
        assert semantic_entropy([0.25] * 4) == pytest.approx(math.log(4), abs=1e-12)
        assert semantic_entropy([0.25] * 4, "log_m") == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("m", [2, 3, 5, 8])
    def test_bounds(self, rng, m):
        for _ in range(30):
            masses = rng.dirichlet(np.ones(m))
            h = semantic_entropy(list(masses))
            assert 0.0 <= h <= math.log(m) + 1e-12
            assert 0.0 <= semantic_entropy(list(masses), "log_m") <= 1.0 + 1e-12

    def test_relabeling_invariance(self, rng):
        masses = list(rng.dirichlet(np.ones(6)))
        h = semantic_entropy(masses)
        for _ in range(5):
            perm = list(rng.permutation(6))
            assert semantic_entropy([masses[i] for i in perm]) == pytest.approx(
                h, abs=1e-12
            )

    def test_zero_iff_one_cluster_has_all_mass(self):
        assert semantic_entropy([1.0, 0.0]) == 0.0
        assert semantic_entropy([0.999, 0.001]) > 0.0


class TestEstimate:
    def test_single_candidate(self):
        cfg = validate_config({})
        cs = estimate([make_candidate("a", [1.0, 0.0], 0.4)], cfg)
        assert len(cs.clusters) == 1
        assert cs.entropy == 0.0
        assert cs.clusters[0].mass == pytest.approx(1.0, abs=1e-12)

    def test_identical_logits_merge_entropy_zero(self):
        cfg = validate_config({})
        items = [
            make_candidate("a", [1.0, 2.0], 0.5),
            make_candidate("b", [1.0, 2.0], 0.5),
        ]
        cs = estimate(items, cfg)
        assert len(cs.clusters) == 1
        assert cs.clusters[0].mass == pytest.approx(1.0, abs=1e-9)
        assert cs.entropy == 0.0

    def test_clustering_ablation_gives_singletons(self):
        cfg = validate_config({"enable_clustering": False})
        items = [
            make_candidate("a", [1.0, 2.0], 0.5),
            make_candidate("b", [1.0, 2.0], 0.5),
        ]
        cs = estimate(items, cfg)
        assert len(cs.clusters) == 2
        assert cs.entropy == pytest.approx(math.log(2), abs=1e-12)

    def test_uncertainty_ablation_zeroes_entropy(self):
        cfg = validate_config({"enable_uncertainty": False})
        items = [
            make_candidate("a", [1.0, 0.0], 0.5),
            make_candidate("b", [0.0, 1.0], 0.5),
        ]
        cs = estimate(items, cfg)
        assert len(cs.clusters) == 2
        assert cs.entropy == 0.0

    def test_masses_sum_to_one(self, rng):
        cfg = validate_config({})
        for _ in range(30):
            req = random_request(rng, int(rng.integers(1, 12)))
            cs = estimate(req.candidates, cfg)
            assert sum(c.mass for c in cs.clusters) == pytest.approx(1.0, abs=1e-9)
            for cluster in cs.clusters:
                assert cluster.mass == pytest.approx(
                    sum(m.prob for m in cluster.members), abs=1e-12
                )

    def test_duplication_invariance(self, rng):
        """Splitting one item into two identical-logit halves must leave the
        cluster structure, masses, and entropy untouched, while naive
        item-level entropy strictly increases."""
        cfg = validate_config({})
        for _ in range(100):
            n = int(rng.integers(2, 10))
            req = random_request(rng, n)
            base = estimate(req.candidates, cfg)

            victim = int(rng.integers(n))
            items = list(req.candidates)
            half = items[victim].prob / 2.0
            dup_a = make_candidate(items[victim].id, items[victim].logits, half)
            dup_b = make_candidate(items[victim].id + "_copy", items[victim].logits, half)
            dup_items = items[:victim] + [dup_a, dup_b] + items[victim + 1 :]
            dup = estimate(dup_items, cfg)

            assert len(dup.clusters) == len(base.clusters)
            assert sorted(c.mass for c in dup.clusters) == pytest.approx(
                sorted(c.mass for c in base.clusters), abs=1e-9
            )
            assert dup.entropy == pytest.approx(base.entropy, abs=1e-9)

            def naive_entropy(cands):
                from semrank.uncertainty import renormalize as renorm

                probs = [c.prob for c in renorm(cands)]
                return -sum(p * math.log(p) for p in probs if p > 0)

            assert naive_entropy(dup_items) > naive_entropy(items) - 1e-12
