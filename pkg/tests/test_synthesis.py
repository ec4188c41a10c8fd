import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftlab.classify import evaluate_certificate
from shiftlab.errors import (CertificateMismatch, IrregularityUnavailable,
                             NoProperSubshift, NotAdmissible, NotPrimitive)
from shiftlab.measures import constant_potential, indicator_potential
from shiftlab.shifts import golden_mean_shift, is_admissible, iter_words, sft_from_matrix
from shiftlab.synthesis import (GapClass, certify, glue, regenerate_segment,
                                sturmian_word, synthesize_witness, thue_morse_word)

N_SMALL = 1 << 14
SEED = 20250809


class TestGlue:
    def test_inadmissible_rejected(self, golden):
        with pytest.raises(NotAdmissible):
            glue(golden, [(1, 1)])

    def test_full2_example(self, full2):
        # M = 1: one lexicographically-least symbol inserted between segments
        assert glue(full2, [(0, 0), (1, 1)]) == (0, 0, 0, 1, 1)

    def test_golden_example(self, golden):
        # M = 2: insert the least admissible pair, here 0 0
        out = glue(golden, [(0, 1, 0), (1,)])
        assert out == (0, 1, 0, 0, 0, 1)
        assert is_admissible(out, golden)

    def test_windows_exact(self, golden):
        segs = [(0, 1, 0, 1), (0, 0, 0), (1, 0)]
        out = glue(golden, segs)
        gap = golden.primitive_gap
        pos = 0
        for seg in segs:
            assert out[pos:pos + len(seg)] == seg
            pos += len(seg) + gap

    def test_not_primitive(self):
        s = sft_from_matrix(2, [[1, 0], [0, 1]])
        with pytest.raises(NotPrimitive):
            glue(s, [(0,), (1,)])

    @given(st.lists(st.integers(0, 30), min_size=1, max_size=5))
    @settings(max_examples=40, deadline=None)
    def test_random_segments_admissible(self, seeds):
        g = golden_mean_shift()
        words = list(iter_words(g, 5))
        segs = [words[i % len(words)] for i in seeds]
        out = glue(g, segs)
        assert is_admissible(out, g)


class TestGeneratorWords:
    def test_thue_morse_8(self):
        assert thue_morse_word(8) == (0, 1, 1, 0, 1, 0, 0, 1)

    def test_thue_morse_1(self):
        assert thue_morse_word(1) == (0,)

    def test_thue_morse_substitution_fixed_point(self):
        # image of the n-prefix under 0->01, 1->10 is the 2n-prefix
        w = thue_morse_word(256)
        image = []
        for c in w[:128]:
            image.extend((0, 1) if c == 0 else (1, 0))
        assert tuple(image) == w

    def test_sturmian_fibonacci(self):
        alpha = "0.61803398874989484820458683436563811772"
        assert sturmian_word(alpha, "0", 5) == (1, 0, 1, 1, 0)

    def test_sturmian_frequency(self):
        alpha = "0.61803398874989484820458683436563811772"
        w = sturmian_word(alpha, "0", 10000)
        assert sum(w) / len(w) == pytest.approx(0.618034, abs=1e-3)

    def test_sturmian_balanced(self):
        # counts of 1s in windows of equal length differ by at most 1
        alpha = "0.70710678118654752440084436210484903928"
        w = sturmian_word(alpha, "0.25", 4096)
        for ell in (3, 9, 30):
            sums = {sum(w[i:i + ell]) for i in range(len(w) - ell)}
            assert max(sums) - min(sums) <= 1


class TestWitnesses:
    @pytest.mark.parametrize("gap_class", list(GapClass))
    def test_default_witness_certifies(self, full2, phi_full2, gap_class):
        o = synthesize_witness(full2, gap_class, phi_full2, N_SMALL, seed=SEED)
        assert len(o.word) == N_SMALL
        assert certify(o)["gap_class"] == gap_class.value
        pairs = np.array(full2.matrix)[o.word[:-1], o.word[1:]]
        assert np.all(pairs == 1)

    def test_deterministic(self, full2, phi_full2):
        a = synthesize_witness(full2, GapClass.W_NOT_QR, phi_full2, N_SMALL, seed=7)
        b = synthesize_witness(full2, GapClass.W_NOT_QR, phi_full2, N_SMALL, seed=7)
        assert np.array_equal(a.word, b.word)
        c = synthesize_witness(full2, GapClass.W_NOT_QR, phi_full2, N_SMALL, seed=8)
        assert not np.array_equal(a.word, c.word)

    def test_scheduled_windows_verbatim(self, full2, phi_full2):
        o = synthesize_witness(full2, GapClass.QW_NOT_V, phi_full2, N_SMALL, seed=3)
        mismatches = 0
        for seg in o.schedule.segments:
            expected = regenerate_segment(full2, seg, o.certificate.pool)
            got = tuple(int(c) for c in o.word[seg.start:seg.start + seg.length])
            mismatches += got != tuple(expected)[:len(got)]
        assert mismatches == 0

    def test_periodic_witness(self, full2):
        o = synthesize_witness(full2, GapClass.PERIODIC, None, 10, seed=0, cycle=(0, 1))
        assert o.word_tuple() == (0, 1, 0, 1, 0, 1, 0, 1, 0, 1)
        assert o.certificate.inf_entropy_over_K == 0.0

    def test_golden_ambient_raises_for_proper_support_classes(self, golden, phi_golden):
        with pytest.raises(NoProperSubshift):
            synthesize_witness(golden, GapClass.V_NOT_W, phi_golden, N_SMALL, seed=1)

    def test_constant_potential_rejected(self, full2):
        with pytest.raises(IrregularityUnavailable):
            synthesize_witness(full2, GapClass.W_NOT_QR, constant_potential(full2, 1.0),
                               N_SMALL, seed=1)

    def test_thue_morse_needs_room(self, golden):
        with pytest.raises(NotAdmissible):
            synthesize_witness(golden, GapClass.ALMOST_PERIODIC_NOT_PER, None,
                               N_SMALL, seed=1)

    def test_not_primitive_ambient(self, phi_full2):
        s = sft_from_matrix(2, [[1, 0], [0, 1]])
        with pytest.raises(NotPrimitive):
            synthesize_witness(s, GapClass.R_FULL_SUPPORT,
                               indicator_potential(s, (1,)), N_SMALL, seed=1)

    def test_pinned_prefix_everywhere(self, full2, phi_full2):
        for gap_class in GapClass:
            o = synthesize_witness(full2, gap_class, phi_full2, N_SMALL, seed=11,
                                   pinned_prefix=(0, 1, 1))
            assert o.word_tuple()[:3] == (0, 1, 1)
            certify(o)

    def test_inadmissible_prefix_rejected(self, golden, phi_golden):
        with pytest.raises(NotAdmissible):
            synthesize_witness(golden, GapClass.W_NOT_QR, phi_golden, N_SMALL,
                               seed=1, pinned_prefix=(1, 1))


class TestCertify:
    def test_tampered_entropy_detected(self, full2, phi_full2):
        o = synthesize_witness(full2, GapClass.W_NOT_QR, phi_full2, N_SMALL, seed=21)
        o.certificate.exact_facts[0]["entropy"] += 1e-6
        with pytest.raises(CertificateMismatch):
            certify(o)

    def test_tampered_inf_detected(self, full2, phi_full2):
        o = synthesize_witness(full2, GapClass.I_NOT_QW, phi_full2, N_SMALL, seed=21)
        o.certificate.inf_entropy_over_K += 1e-6
        with pytest.raises(CertificateMismatch):
            certify(o)

    def test_full_support_mu_violates_v_not_w(self, full2, phi_full2):
        o = synthesize_witness(full2, GapClass.V_NOT_W, phi_full2, N_SMALL, seed=21)
        # swap the proper-support endpoint for the maximal measure
        from shiftlab.measures import parry_measure
        from shiftlab.synthesis import _measure_facts
        o.certificate.pool[1] = parry_measure(full2)
        o.certificate.exact_facts[1] = _measure_facts(
            o.certificate.pool[1], full2, phi_full2)
        o.certificate.inf_entropy_over_K = min(
            o.certificate.exact_facts[i]["entropy"] for i in o.certificate.extremes)
        with pytest.raises(CertificateMismatch) as exc:
            certify(o)
        assert "mu_support" in str(exc.value)

    def test_word_tamper_detected(self, full2, phi_full2):
        o = synthesize_witness(full2, GapClass.R_FULL_SUPPORT, phi_full2, N_SMALL, seed=21)
        o.word[100] = 1 - o.word[100]
        with pytest.raises(CertificateMismatch):
            certify(o)

    def test_swapped_schedules_fail_a_verdict(self, full2, phi_full2):
        a = synthesize_witness(full2, GapClass.R_FULL_SUPPORT, phi_full2, 1 << 16, seed=2)
        b = synthesize_witness(full2, GapClass.I_NOT_QW, phi_full2, 1 << 16, seed=2)
        cross = evaluate_certificate(a.word, full2, b.certificate.expected_statistics,
                                     phi=phi_full2)
        assert not cross.all_pass
        cross2 = evaluate_certificate(b.word, full2, a.certificate.expected_statistics,
                                      phi=phi_full2)
        assert not cross2.all_pass


class TestOtherAmbients:
    """Certificate arithmetic must hold on any primitive ambient; the
    statistical thresholds are pinned for the default full 2-shift and may
    honestly fail elsewhere."""

    @pytest.fixture(scope="class")
    @staticmethod
    def three_sym():
        return sft_from_matrix(3, [[1, 1, 1], [1, 1, 0], [1, 0, 1]])

    def test_all_classes_certify_on_three_symbols(self, three_sym):
        phi = indicator_potential(three_sym, (1,))
        for gap_class in GapClass:
            o = synthesize_witness(three_sym, gap_class, phi, 1 << 14, seed=5)
            certify(o)
            assert len(o.word) == 1 << 14

    def test_most_verdicts_hold_on_three_symbols(self, three_sym):
        phi = indicator_potential(three_sym, (1,))
        for gap_class in (GapClass.W_NOT_QR, GapClass.V_NOT_W, GapClass.QW_NOT_V,
                          GapClass.QR_NOT_ERG_NOT_A, GapClass.R_FULL_SUPPORT,
                          GapClass.PERIODIC):
            o = synthesize_witness(three_sym, gap_class, phi, 1 << 16, seed=5)
            r = evaluate_certificate(o.word, three_sym,
                                     o.certificate.expected_statistics, phi=phi)
            assert r.all_pass, (gap_class, [v for v in r.verdicts if not v["passed"]])

    def test_missing_ingredients_reported(self, random4):
        # this seeded graph has no cycle edge-disjoint from its densest
        # proper subgraph and no full 2-shift block
        phi = indicator_potential(random4, (1,))
        with pytest.raises(NoProperSubshift):
            synthesize_witness(random4, GapClass.I_NOT_QW, phi, 1 << 12, seed=5)


class TestTinyHorizons:
    @pytest.mark.parametrize("n", [16, 64, 257])
    def test_exact_length_and_certify(self, full2, phi_full2, n):
        for gap_class in GapClass:
            o = synthesize_witness(full2, gap_class, phi_full2, n, seed=3)
            assert len(o.word) == n
            certify(o)
