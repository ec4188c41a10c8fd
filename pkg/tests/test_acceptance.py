"""Acceptance gate: one test per criterion, one pass/fail line each.

Run with `pytest tests/test_acceptance.py -s` to see the lines as they
print.  Witnesses are synthesized once per session at the full 2^20
horizon and reused across the certificate and evidence criteria.
"""

import math
import subprocess
import sys
import time

import pytest

from shiftlab import io, oracle, rng
from shiftlab.beta import beta_count_words, beta_entropy_estimate, quasi_greedy_normalize
from shiftlab.classify import evaluate_certificate
from shiftlab.measures import constant_potential, indicator_potential
from shiftlab.shifts import (count_periodic, count_words, full_shift,
                             is_admissible, iter_words,
                             largest_proper_scc_subgraph, primitive_cycles,
                             topological_entropy)
from shiftlab.spectrum import (check_concavity, has_irregular, spectrum_curve,
                               spectrum_point, sup_equals_htop)
from shiftlab.synthesis import (GapClass, SynthesisConfig, certify,
                                synthesize_witness)

from conftest import ACCEPTANCE_SEED

PHI = (1 + math.sqrt(5)) / 2
GOLDEN_BETA = "1.61803398874989484820458683436563811772"
HORIZON = 1 << 20


def report(criterion: str, passed: bool, detail: str = "") -> None:
    line = f"[{criterion}] {'PASS' if passed else 'FAIL'}" + (f"  {detail}" if detail else "")
    print(line)
    assert passed, line


@pytest.fixture(scope="session")
def witnesses(full2, phi_full2):
    out = {}
    t0 = time.time()
    for gc in GapClass:
        o = synthesize_witness(full2, gc, phi_full2, HORIZON, seed=ACCEPTANCE_SEED)
        out[gc] = o
    return out, time.time() - t0


def test_c1_entropy_triple_agreement(golden):
    t0 = time.time()
    spectral = topological_entropy(golden)
    words = math.log(count_words(golden, 24)) / 24
    periodic = math.log(count_periodic(golden, 30)) / 30
    elapsed = time.time() - t0
    ok = (abs(spectral - math.log(PHI)) <= 1e-9
          and abs(words - math.log(PHI)) <= 0.03
          and abs(periodic - math.log(PHI)) <= 0.02
          and elapsed < 1.0)
    report("C1 entropy triple agreement", ok,
           f"spectral_err={abs(spectral - math.log(PHI)):.2e} "
           f"words_err={abs(words - math.log(PHI)):.4f} "
           f"periodic_err={abs(periodic - math.log(PHI)):.4f} t={elapsed:.2f}s")


def test_c2_exact_combinatorics(golden, full2, full3, random4):
    ok = True
    for s in (golden, full2, full3, random4):
        for n in range(1, 13):
            ok = ok and count_words(s, n) == oracle.brute_count_words(s, n)
            ok = ok and count_periodic(s, n) == oracle.brute_count_cycles(s, n)
    report("C2 exact combinatorics", ok, "4 shifts, n <= 12, words + cycles")


def test_c3_beta_entropy(golden):
    t0 = time.time()
    errs = {}
    for beta in ("1.8", GOLDEN_BETA, "2.5"):
        spec = quasi_greedy_normalize(beta)
        errs[beta[:6]] = abs(beta_entropy_estimate(spec, 22) - math.log(spec.beta))
    ok = all(e <= 0.02 for e in errs.values())

    g_spec = quasi_greedy_normalize(GOLDEN_BETA)
    from shiftlab.beta import beta_admissible
    lang_ok = True
    for n in range(1, 11):
        lang_ok = lang_ok and beta_count_words(g_spec, n) == count_words(golden, n)
        for w in iter_words(full_shift(2), n):
            lang_ok = lang_ok and beta_admissible(w, g_spec) == is_admissible(w, golden)
    elapsed = time.time() - t0
    ok = ok and lang_ok and elapsed < 10.0
    report("C3 beta-shift entropy", ok,
           f"errs={ {k: round(v, 4) for k, v in errs.items()} } "
           f"golden_language_exact={lang_ok} t={elapsed:.1f}s")


def test_c4_variational_spectrum(golden, phi_golden):
    t0 = time.time()
    max_diff = 0.0
    for i in range(1, 10):
        a = 0.5 * i / 10
        psi, _ = spectrum_point(golden, phi_golden, a)
        brute = oracle.brute_constrained_entropy(golden, phi_golden, a, 40)
        max_diff = max(max_diff, abs(psi - brute))
    curve = spectrum_curve(golden, phi_golden, 33)
    concave = check_concavity(curve, slack=1e-9)
    sup_ok = sup_equals_htop(curve, tol=1e-4)
    elapsed = time.time() - t0
    ok = max_diff <= 0.02 and concave and sup_ok and elapsed < 30.0
    report("C4 variational spectrum", ok,
           f"max|psi-oracle|={max_diff:.4f} concave={concave} sup={sup_ok} t={elapsed:.1f}s")


def test_c5_irregularity_detector(golden, full2, full3, random4):
    shifts = [golden, full2, full3, random4]
    ok = True
    for s in shifts:
        ok = ok and not has_irregular(s, constant_potential(s, 1.0))
        ok = ok and has_irregular(s, indicator_potential(s, (1,)))
    # exhaustive cycle-mean comparison on every k <= 4 test shift
    for s in shifts:
        if s.k > 4:
            continue
        phi = indicator_potential(s, (1,))
        means = [sum(1.0 for c in cyc if c == 1) / len(cyc)
                 for cyc in primitive_cycles(s, s.k)]
        exhaustive = max(means) - min(means) > 1e-12
        ok = ok and has_irregular(s, phi) == exhaustive
    report("C5 irregularity detector", ok, f"{len(shifts)} shifts")


def test_c6_certificate_entropy_bounds(witnesses, full2):
    """Certificates recompute exactly; entropy infima meet per-class floors.

    Full-support classes reach 0.9 * ambient entropy.  Proper-support
    classes are capped by the largest proper subgraph's entropy (times the
    class's mixture weight), so their floors are stated against that cap;
    the two zero-entropy classes must claim exactly zero.
    """
    orbits, _ = witnesses
    h_top = topological_entropy(full2)
    _, _, h_sub = largest_proper_scc_subgraph(full2)
    cfg = SynthesisConfig()
    floors = {
        GapClass.W_NOT_QR: 0.9 * h_top,
        GapClass.QR_NOT_ERG_NOT_A: 0.9 * h_top,
        GapClass.R_FULL_SUPPORT: 0.9 * h_top,
        GapClass.V_NOT_W: 0.9 * cfg.theta_v_not_w * h_sub,
        GapClass.QW_NOT_V: 0.9 * 0.5 * h_sub,
        GapClass.I_NOT_QW: 0.9 * cfg.theta_i_not_qw * h_sub,
    }
    ok = True
    details = []
    for gc, o in orbits.items():
        certify(o)  # recomputes every stored fact to 1e-10
        inf_h = o.certificate.inf_entropy_over_K
        if gc in floors:
            good = inf_h >= floors[gc]
        else:
            good = inf_h == 0.0
        ok = ok and good
        details.append(f"{gc.value}={inf_h:.3f}")
    report("C6 certificate entropy bounds", ok, " ".join(details))


def test_c7_witness_evidence_suite(witnesses, full2, phi_full2):
    orbits, synth_time = witnesses
    t0 = time.time()
    ok = True
    details = []
    for gc, o in orbits.items():
        rep = evaluate_certificate(o.word, full2, o.certificate.expected_statistics,
                                   phi=phi_full2)
        failed = [v["check"] for v in rep.verdicts if not v["passed"]]
        ok = ok and not failed
        details.append(f"{gc.value}:{'ok' if not failed else failed}")
    # negative control: cross-scored schedules must fail at least one verdict
    a, b = orbits[GapClass.R_FULL_SUPPORT], orbits[GapClass.I_NOT_QW]
    cross1 = evaluate_certificate(a.word, full2, b.certificate.expected_statistics,
                                  phi=phi_full2)
    cross2 = evaluate_certificate(b.word, full2, a.certificate.expected_statistics,
                                  phi=phi_full2)
    negative_ok = (not cross1.all_pass) and (not cross2.all_pass)
    ok = ok and negative_ok
    elapsed = synth_time + (time.time() - t0)
    ok = ok and elapsed < 180.0
    report("C7 witness evidence suite", ok,
           f"negative_control={negative_ok} total_t={elapsed:.1f}s " + " ".join(details))


def test_c8_prefix_pinning(full2, phi_full2):
    words_by_len = {L: list(iter_words(full2, L)) for L in range(1, 9)}
    us = rng.uniform_stream(ACCEPTANCE_SEED, 200)
    prefixes = []
    i = 0
    while len(prefixes) < 50:
        length = 1 + int(float(us[i]) * 8) % 8
        pool = words_by_len[length]
        prefixes.append(pool[int(float(us[i + 1]) * len(pool)) % len(pool)])
        i += 2
    ok = True
    per_class = {gc: 0 for gc in GapClass}
    for idx, prefix in enumerate(prefixes):
        gc = list(GapClass)[idx % len(GapClass)]
        o = synthesize_witness(full2, gc, phi_full2, 1 << 14,
                               seed=ACCEPTANCE_SEED + idx, pinned_prefix=prefix)
        ok = ok and o.word_tuple()[:len(prefix)] == prefix
        certify(o)
        per_class[gc] += 1
    # every class must appear and at least 50 prefixes must have been pinned
    ok = ok and all(v > 0 for v in per_class.values())
    report("C8 density / prefix pinning", ok, f"50 prefixes across {len(GapClass)} classes")


def test_c9_cli_determinism(tmp_path, full2, phi_full2):
    d = tmp_path
    io.write_json(d / "full2.json", io.shift_to_doc(full2))
    io.write_json(d / "phi.json", io.potential_to_doc(phi_full2))

    def run(*args):
        proc = subprocess.run([sys.executable, "-m", "shiftlab.cli", *args],
                              capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        return proc.stdout

    outs = []
    for tag in ("a", "b"):
        run("synthesize", "--shift", str(d / "full2.json"), "--class", "V_NOT_W",
            "--potential", str(d / "phi.json"), "--horizon", str(1 << 15),
            "--seed", "7", "--out", str(d / f"orbit_{tag}"))
        run("spectrum", "--shift", str(d / "full2.json"), "--potential",
            str(d / "phi.json"), "--points", "9", "--out", str(d / f"curve_{tag}.csv"))
    same = all(
        (d / "orbit_a" / name).read_bytes() == (d / "orbit_b" / name).read_bytes()
        for name in ("stream.txt", "certificate.json", "manifest.json"))
    same = same and (d / "curve_a.csv").read_bytes() == (d / "curve_b.csv").read_bytes()
    report("C9 determinism", same, "synthesize + spectrum byte-identical")
