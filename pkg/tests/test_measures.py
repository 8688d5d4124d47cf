from __future__ import annotations

import numpy as np
import pytest

import oracles
from conftest import random_reps, random_rsm
from diffsim import (
    DegenerateRSMError,
    RepresentationSet,
    ValidationError,
    ad_cka,
    ad_distcorr,
    blended_ms_distcorr,
    build_rsm,
    cka,
    cka_via_markov,
    distcorr,
    distcorr_via_markov,
    hsic,
    ms_cka,
    ms_distcorr,
)


class TestHsic:
    def test_centering_matrix_self_value(self):
        h = np.array([[0.5, -0.5], [-0.5, 0.5]])
        assert hsic(h, h) == pytest.approx(1.0, abs=1e-15)

    def test_constant_second_argument_gives_zero(self, rng):
        s = random_rsm(rng, 6)
        assert hsic(s, np.ones((6, 6))) == pytest.approx(0.0, abs=1e-12)

    def test_matches_double_loop_oracle(self, rng):
        for _ in range(25):
            s1 = random_rsm(rng, 8)
            s2 = random_rsm(rng, 8)
            assert hsic(s1, s2) == pytest.approx(oracles.hsic_double_loop(s1, s2), abs=1e-12)

    def test_single_sample_rejected(self):
        with pytest.raises(ValidationError):
            hsic(np.ones((1, 1)), np.ones((1, 1)))

    def test_shape_mismatch_rejected(self, rng):
        with pytest.raises(ValidationError):
            hsic(random_rsm(rng, 4), random_rsm(rng, 5))


class TestCka:
    def test_self_similarity_is_one(self, rng):
        s = random_rsm(rng, 10)
        assert cka(s, s).value == pytest.approx(1.0, abs=1e-12)

    def test_scale_invariance(self, rng):
        s1, s2 = random_rsm(rng, 9), random_rsm(rng, 9)
        base = cka(s1, s2).value
        for a, b in ((0.01, 100.0), (100.0, 0.01), (3.0, 7.0)):
            assert cka(a * s1, b * s2).value == pytest.approx(base, abs=1e-12)

    def test_markov_route_equivalence(self, rng):
        s1, s2 = random_rsm(rng, 16), random_rsm(rng, 16)
        assert cka_via_markov(s1, s2).value == pytest.approx(cka(s1, s2).value, abs=1e-10)

    def test_degenerate_rsm_rejected(self, rng):
        s = random_rsm(rng, 5)
        with pytest.raises(DegenerateRSMError):
            cka(np.ones((5, 5)), s)

    def test_matches_definition_oracle(self, rng):
        s1, s2 = random_rsm(rng, 8), random_rsm(rng, 8)
        assert cka(s1, s2).value == pytest.approx(oracles.cka_definition(s1, s2), abs=1e-12)


class TestDistcorr:
    def test_self_similarity_is_one(self, rng):
        s = random_rsm(rng, 7)
        assert distcorr(s, s).value == pytest.approx(1.0, abs=1e-12)

    def test_negated_argument_gives_minus_one(self, rng):
        s = random_rsm(rng, 7)
        assert distcorr(s, -s).value == pytest.approx(-1.0, abs=1e-12)

    def test_matches_elementwise_definition(self, rng):
        for _ in range(25):
            s1, s2 = random_rsm(rng, 8), random_rsm(rng, 8)
            expected = oracles.distcorr_definition(s1, s2)
            assert distcorr(s1, s2).value == pytest.approx(expected, abs=1e-12)

    def test_degenerate_rsm_rejected(self):
        with pytest.raises(DegenerateRSMError):
            distcorr(np.ones((4, 4)), np.eye(4))


class TestMarkovRouteEquivalence:
    @pytest.mark.parametrize("n", [4, 16, 64])
    def test_both_measures_agree_across_sizes(self, rng, n):
        for _ in range(30):
            s1, s2 = random_rsm(rng, n), random_rsm(rng, n)
            assert abs(cka_via_markov(s1, s2).value - cka(s1, s2).value) <= 1e-10
            assert abs(distcorr_via_markov(s1, s2).value - distcorr(s1, s2).value) <= 1e-10

    def test_degenerate_input_fails_both_routes(self, rng):
        s2 = random_rsm(rng, 6)
        const = np.ones((6, 6))
        with pytest.raises(DegenerateRSMError):
            cka(const, s2)
        with pytest.raises(DegenerateRSMError):
            cka_via_markov(const, s2)
        with pytest.raises(DegenerateRSMError):
            distcorr_via_markov(const, s2)


class TestMultiScale:
    def test_scale_one_reduces_to_plain_measures(self, rng):
        s1, s2 = random_rsm(rng, 12), random_rsm(rng, 12)
        assert abs(ms_cka(s1, s2, 1).value - cka(s1, s2).value) <= 1e-10
        assert abs(ms_distcorr(s1, s2, 1).value - distcorr(s1, s2).value) <= 1e-10

    def test_self_similarity_any_scale(self, rng):
        s = random_rsm(rng, 10)
        for t in (1, 2, 5):
            assert ms_cka(s, s, t).value == pytest.approx(1.0, abs=1e-12)
            assert ms_distcorr(s, s, t).value == pytest.approx(1.0, abs=1e-12)

    def test_matches_naive_power_oracle(self, rng):
        q = np.full(16, 1.0 / 16.0)
        s1, s2 = random_rsm(rng, 16), random_rsm(rng, 16)
        p1 = oracles.naive_power(oracles.embed(s1, q), 3)
        p2 = oracles.naive_power(oracles.embed(s2, q), 3)
        assert ms_cka(s1, s2, 3).value == pytest.approx(oracles.cka_definition(p1, p2), abs=1e-10)
        expected = oracles.distcorr_definition(
            oracles.naive_power(oracles.embed(s1, q), 2), oracles.naive_power(oracles.embed(s2, q), 2)
        )
        assert ms_distcorr(s1, s2, 2).value == pytest.approx(expected, abs=1e-10)

    def test_invalid_scale_rejected(self, rng):
        s1, s2 = random_rsm(rng, 5), random_rsm(rng, 5)
        with pytest.raises(ValidationError):
            ms_cka(s1, s2, 0)

    def test_scale_invariance(self, rng):
        s1, s2 = random_rsm(rng, 8), random_rsm(rng, 8)
        base = ms_cka(s1, s2, 2).value
        assert ms_cka(0.01 * s1, 100.0 * s2, 2).value == pytest.approx(base, abs=1e-10)


class TestBlended:
    def test_self_similarity_is_one(self, rng):
        s = random_rsm(rng, 9)
        assert blended_ms_distcorr(s, s).value == pytest.approx(1.0, abs=1e-12)

    def test_affine_combination_of_components(self, rng):
        s1, s2 = random_rsm(rng, 8), random_rsm(rng, 8)
        x = ms_distcorr(s1, s2, 2).value
        y = distcorr(s1, s2).value
        assert blended_ms_distcorr(s1, s2).value == pytest.approx((x + 2.0 * y) / 3.0, abs=1e-12)

    def test_recomposition_from_oracle_components(self, rng):
        q = np.full(8, 0.125)
        s1, s2 = random_rsm(rng, 8), random_rsm(rng, 8)
        x = oracles.distcorr_definition(
            oracles.naive_power(oracles.embed(s1, q), 2), oracles.naive_power(oracles.embed(s2, q), 2)
        )
        y = oracles.distcorr_definition(s1, s2)
        assert blended_ms_distcorr(s1, s2).value == pytest.approx((x + 2 * y) / 3, abs=1e-12)


class TestAlternatingDiffusion:
    def test_singletons_reduce_to_plain_measures(self, rng):
        r1, r2 = random_reps(rng, 12), random_reps(rng, 12)
        got = ad_cka([r1], [r2], kernel="linear").value
        want = cka(build_rsm(r1, "linear"), build_rsm(r2, "linear")).value
        assert abs(got - want) <= 1e-10
        got = ad_distcorr([r1], [r2]).value
        want = distcorr(
            build_rsm(r1, "euclidean_distance"), build_rsm(r2, "euclidean_distance")
        ).value
        assert abs(got - want) <= 1e-10
        assert ad_cka([r1], [r1]).value == pytest.approx(1.0, abs=1e-12)

    def test_identical_sets_score_one(self, rng):
        a = RepresentationSet(tuple(random_reps(rng, 10) for _ in range(3)))
        assert ad_cka(a, a).value == pytest.approx(1.0, abs=1e-12)
        assert ad_distcorr(a, a).value == pytest.approx(1.0, abs=1e-12)

    def test_three_member_sets_match_manual_pipeline(self, rng):
        n = 16
        q = np.full(n, 1.0 / n)
        members1 = [random_reps(rng, n) for _ in range(3)]
        members2 = [random_reps(rng, n) for _ in range(3)]

        def fused(members):
            ps = [oracles.embed(oracles.gram_matrix(m), q) for m in members]
            return ps[2] @ ps[1] @ ps[0]

        f1, f2 = fused(members1), fused(members2)
        got = ad_cka(RepresentationSet(tuple(members1)), RepresentationSet(tuple(members2)),
                     kernel="linear").value
        assert got == pytest.approx(oracles.cka_definition(f1, f2), abs=1e-10)
        got = ad_distcorr(RepresentationSet(tuple(members1)), RepresentationSet(tuple(members2)),
                          kernel="linear").value
        assert got == pytest.approx(oracles.distcorr_definition(f1, f2), abs=1e-10)

    def test_sample_misalignment_rejected(self, rng):
        with pytest.raises(ValidationError):
            ad_cka([random_reps(rng, 8)], [random_reps(rng, 9)])

    def test_mixed_kernels_flagged(self, rng):
        a = RepresentationSet((random_reps(rng, 8), random_reps(rng, 8)))
        score = ad_cka(a, a, kernel=["linear", "rbf"])
        assert score.params["kernel_id"] == "mixed"
        assert score.params["mixed_kernels"] is True

    def test_per_member_kernel_count_must_match(self, rng):
        a = RepresentationSet((random_reps(rng, 8), random_reps(rng, 8)))
        with pytest.raises(ValidationError):
            ad_cka(a, a, kernel=["linear"])

    def test_deep_fusion_of_unrelated_reps_degenerates(self, rng):
        # eight independent random layers: the fused operator collapses onto its
        # rank-one background, and the measure refuses rather than score noise
        m1 = [random_reps(rng, 256, 16) for _ in range(8)]
        m2 = [random_reps(rng, 256, 16) for _ in range(8)]
        with pytest.raises(DegenerateRSMError):
            ad_cka(RepresentationSet(tuple(m1)), RepresentationSet(tuple(m2)), kernel="linear")

    def test_perturbation_stability_small(self, rng):
        n, depth = 32, 4
        members1 = [random_reps(rng, n, 6) for _ in range(depth)]
        members2 = [random_reps(rng, n, 6) for _ in range(depth)]
        base = ad_cka(RepresentationSet(tuple(members1)), RepresentationSet(tuple(members2)),
                      kernel="linear").value
        for _ in range(5):
            noisy1 = [m + rng.uniform(-1e-7, 1e-7, size=m.shape) for m in members1]
            noisy2 = [m + rng.uniform(-1e-7, 1e-7, size=m.shape) for m in members2]
            value = ad_cka(RepresentationSet(tuple(noisy1)), RepresentationSet(tuple(noisy2)),
                           kernel="linear").value
            assert abs(value - base) <= 1e-6


class TestMeasureProperties:
    def test_symmetry_in_arguments(self, rng):
        s1, s2 = random_rsm(rng, 9), random_rsm(rng, 9)
        assert cka(s1, s2).value == pytest.approx(cka(s2, s1).value, abs=1e-12)
        assert distcorr(s1, s2).value == pytest.approx(distcorr(s2, s1).value, abs=1e-12)
        assert ms_cka(s1, s2, 2).value == pytest.approx(ms_cka(s2, s1, 2).value, abs=1e-12)
        assert blended_ms_distcorr(s1, s2).value == pytest.approx(
            blended_ms_distcorr(s2, s1).value, abs=1e-12
        )
        r1 = [random_reps(rng, 8) for _ in range(2)]
        r2 = [random_reps(rng, 8) for _ in range(2)]
        assert ad_cka(r1, r2).value == pytest.approx(ad_cka(r2, r1).value, abs=1e-12)

    def test_cka_range_with_psd_kernels(self, rng):
        for kernel in ("linear", "rbf"):
            for _ in range(50):
                n = int(rng.integers(3, 16))
                s1 = build_rsm(random_reps(rng, n), kernel).data
                s2 = build_rsm(random_reps(rng, n), kernel).data
                v = cka(s1, s2).value
                assert -1e-9 <= v <= 1.0 + 1e-9
                v = ms_cka(s1, s2, 3).value
                assert -1.0 - 1e-9 <= v <= 1.0 + 1e-9

    def test_cosine_range(self, rng):
        for _ in range(50):
            n = int(rng.integers(3, 16))
            s1, s2 = random_rsm(rng, n), random_rsm(rng, n)
            assert -1.0 - 1e-9 <= distcorr(s1, s2).value <= 1.0 + 1e-9
