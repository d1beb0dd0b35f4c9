"""Acceptance checks, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (visible with ``pytest -s``)
and then asserts. Tolerances are fixed here, not tuned per run.
"""

import time

import numpy as np
import pytest

from bigframe import cli
from bigframe import suites
from bigframe.core import Verdict, biframe_operator, classify, optimal_bounds, sqrt_factor
from bigframe.errors import RangeNotIncluded
from bigframe.instances import (KINDS, GeneratorSpec, deserialize, example_3_4, example_3_6,
                                random_operator, random_system, serialize)
from bigframe.opkit import (adjoint, douglas_factor, neumann_bounds, opnorm, pseudo_inverse,
                            psd_sqrt)
from bigframe.stability import StabilityParams, certify_stability, predicted_stability_bounds
from bigframe.suites import TAGS, run_suite
from bigframe.transforms import combined_operator_bounds, positive_perturb

EPS_GRID = (0.01, 0.05, 0.1, 0.2, 0.3)


def verdict(name, ok, detail=""):
    print(f"{'PASS' if ok else 'FAIL'} {name} {detail}".rstrip())
    return ok


def cgauss(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_criterion_01_rank_one_fixture():
    t0 = time.perf_counter()
    sys = example_3_4()
    rep = classify(sys)
    s = biframe_operator(sys)
    elapsed = time.perf_counter() - t0
    ok = (rep.verdict is Verdict.K_BI_G_FRAME
          and abs(rep.a_opt - 1) <= 1e-9 and abs(rep.b_opt - 2) <= 1e-9
          and np.array_equal(s, np.diag([2, 1, 1, 0]).astype(complex))
          and elapsed < 1.0)
    assert verdict("criterion 1: 4-dim K-bi-g-frame fixture",
                   ok, f"A={rep.a_opt:.12g} B={rep.b_opt:.12g} t={elapsed:.3f}s")


def test_criterion_02_parseval_fixture():
    t0 = time.perf_counter()
    sys = example_3_6()
    rep = classify(sys)
    resid = np.linalg.norm(biframe_operator(sys) - sys.k_op @ adjoint(sys.k_op))
    elapsed = time.perf_counter() - t0
    ok = rep.verdict is Verdict.PARSEVAL and resid <= 1e-12 and elapsed < 1.0
    assert verdict("criterion 2: Parseval fixture", ok, f"resid={resid:.3g} t={elapsed:.3f}s")


def test_criterion_03_swap_suite():
    t0 = time.perf_counter()
    res = run_suite("3.7", 200, 0)
    elapsed = time.perf_counter() - t0
    exact = res.counters().get("exact_adjoint", 0)
    ok = res.failed == 0 and exact == 200 and elapsed < 30
    assert verdict("criterion 3: swap suite", ok,
                   f"{res.passed}/200 exact={exact} t={elapsed:.2f}s")


def test_criterion_04_lower_bound_optimality():
    res = run_suite("3.11", 200, 0)
    vacuous = res.counters().get("vacuous", 0)
    ok = res.failed == 0 and vacuous == 0
    assert verdict("criterion 4: A_opt attains and 1.01 A_opt breaks PSD gap", ok,
                   f"{res.passed}/200 vacuous={vacuous} worst={res.worst_margin:.3g}")


def test_criterion_05_square_root_factorization():
    res = run_suite("3.13", 200, 0)
    c = res.counters()
    ok = res.failed == 0 and c.get("engineered", 0) == 50
    # spot-check the factor residual outside the suite
    sys = example_3_6()
    u = sqrt_factor(sys)
    resid = np.linalg.norm(psd_sqrt(biframe_operator(sys)) @ u - sys.k_op) / np.linalg.norm(sys.k_op)
    try:
        sqrt_factor(example_3_4().with_k(np.eye(4)))
        rejected = False
    except RangeNotIncluded:
        rejected = True
    ok = ok and resid <= 1e-9 and rejected
    assert verdict("criterion 5: square-root factorization", ok,
                   f"{res.passed}/200 engineered={c.get('engineered', 0)}")


def test_criterion_06_combination_soundness_and_regression():
    r8, r9 = run_suite("3.8", 200, 0), run_suite("3.9", 200, 0)
    ex = example_3_4()
    pred = combined_operator_bounds([optimal_bounds(ex).bounds] * 2, [1, 1])
    actual = optimal_bounds(ex.with_k(2 * ex.k_op)).a_opt
    regression = abs(actual - 0.25) <= 1e-9 and actual < 0.5 and pred.paper_constant == 0.5
    ok = r8.failed == 0 and r9.failed == 0 and regression and pred.lower <= actual + 1e-12
    assert verdict("criterion 6: combination bounds", ok,
                   f"3.8 {r8.passed}/200 3.9 {r9.passed}/200 A(2K)={actual:.12g} "
                   f"uncorrected={pred.paper_constant:g} "
                   f"uncorrected_violations={r8.counters().get('published_constant_exceeds_optimum', 0)}")


def _bases():
    """Base K-bi-g-frames: both fixtures plus random systems of every kind."""
    out = [example_3_4(), example_3_6()]
    for seed in range(48):
        sys = random_system(GeneratorSpec(2 + seed % 7, 1 + seed % 5, KINDS[seed % len(KINDS)], seed))
        if classify(sys).verdict >= Verdict.K_BI_G_FRAME:
            out.append(sys)
    return out


def test_criterion_07a_positive_perturbation_identity():
    rng = np.random.default_rng(70)
    bases = _bases()
    worst = 0.0
    for n_pow in (1, 2, 3):
        for i in range(100):
            sys = bases[i % len(bases)]
            t = random_operator(sys.dim, "positive", rng)
            t *= rng.uniform(0.1, 1.5) / opnorm(t)
            s_out = biframe_operator(positive_perturb(sys, t, n_pow))
            c = np.eye(sys.dim) + np.linalg.matrix_power(t, n_pow)
            err = np.linalg.norm(s_out - adjoint(c) @ biframe_operator(sys) @ c)
            worst = max(worst, err / np.linalg.norm(s_out))
    assert verdict("criterion 7a: (I+T^n)* S (I+T^n) identity", worst <= 1e-12,
                   f"worst={worst:.3g}")


@pytest.mark.xfail(strict=True, reason="non-degradation fails for singular S: a positive T "
                   "can move N(S) off N(K*); see test_transforms counterexample")
def test_criterion_07b_positive_perturbation_never_degrades():
    rng = np.random.default_rng(71)
    bases = _bases()
    degraded = 0
    for n_pow in (1, 2, 3):
        for i in range(100):
            sys = bases[i % len(bases)]
            t = random_operator(sys.dim, "positive", rng)
            t *= rng.uniform(0.1, 1.5) / opnorm(t)
            if classify(positive_perturb(sys, t, n_pow)).verdict < Verdict.K_BI_G_FRAME:
                degraded += 1
    assert verdict("criterion 7b: classification never degrades", degraded == 0,
                   f"degraded={degraded}/300")


def test_criterion_08_right_composition_and_surjectivity():
    r3, r4 = run_suite("4.3", 200, 0), run_suite("4.4", 200, 0)
    surj = r4.counters().get("surjective", 0)
    ok = r3.failed == 0 and r4.failed == 0 and 0 < surj < 200
    assert verdict("criterion 8: commuting sandwich and surjectivity", ok,
                   f"4.3 {r3.passed}/200 4.4 {r4.passed}/200 surjective={surj}")


def test_criterion_09_stability_grid():
    worst_margin, worst_rel, agree = np.inf, 0.0, 0.0
    ok = True
    for base in (example_3_4(), example_3_6()):
        a_base = optimal_bounds(base).a_opt
        for eps in EPS_GRID:
            cert = certify_stability(base, base.phi, base.psi.scaled(1 + eps),
                                     StabilityParams(alpha=eps))
            rel = abs(cert.achieved.lower - (1 + eps) * a_base) / ((1 + eps) * a_base)
            worst_margin = min(worst_margin, cert.hypothesis_margin)
            worst_rel = max(worst_rel, rel)
            ok &= bool(cert.verdict) and cert.hypothesis_margin >= -1e-12 and rel <= 1e-9
        res = optimal_bounds(base)
        r = np.sqrt(res.b_opt / res.a_opt)
        for d in (0.05, 0.2, 0.4):
            if d * r >= 1 or d >= res.a_opt:
                continue
            p_cor = predicted_stability_bounds(StabilityParams(d_const=d, variant="cor_5_2"),
                                               res.bounds, 1.0, 1.0)
            p_thm = predicted_stability_bounds(StabilityParams(gamma=d * r), res.bounds, 1.0, 1.0)
            agree = max(agree, abs(p_cor.lower - p_thm.lower), abs(p_cor.upper - p_thm.upper))
    ok &= agree <= 1e-12
    assert verdict("criterion 9: scaled-psi stability grid", ok,
                   f"worst_margin={worst_margin:.3g} worst_rel={worst_rel:.3g} "
                   f"cor_agreement={agree:.3g}")


def test_criterion_10_operator_kit():
    rng = np.random.default_rng(100)
    penrose = 0.0
    for _ in range(200):
        rows, cols = rng.integers(2, 9, size=2)
        rank = int(rng.integers(1, min(rows, cols)))
        t = cgauss(rng, rows, rank) @ cgauss(rng, rank, cols)
        p = pseudo_inverse(t)
        tp, pt = t @ p, p @ t
        penrose = max(penrose,
                      np.linalg.norm(t @ p @ t - t) / np.linalg.norm(t),
                      np.linalg.norm(p @ t @ p - p) / np.linalg.norm(p),
                      np.linalg.norm(tp - adjoint(tp)) / np.linalg.norm(tp),
                      np.linalg.norm(pt - adjoint(pt)) / np.linalg.norm(pt))
    douglas, rejected = 0.0, 0
    for _ in range(100):
        n = int(rng.integers(2, 9))
        r = int(rng.integers(1, n))
        t2 = cgauss(rng, n, r) @ cgauss(rng, r, n)
        t1 = t2 @ cgauss(rng, n, n)
        u, _ = douglas_factor(t1, t2)
        douglas = max(douglas, np.linalg.norm(t2 @ u - t1) / np.linalg.norm(t1))
        try:
            douglas_factor(cgauss(rng, n, n), t2)
        except RangeNotIncluded:
            rejected += 1
    contained = 0
    cases = [(c, a, b) for c in (0.3, 0.8, 1.0, 1.2, 2.5) for a in (0.0, 0.3, 0.6)
             for b in (0.0, 0.2, 0.5)]
    valid = 0
    for c, a, b in cases:
        res = neumann_bounds(c * np.eye(3), a, b)
        if res.hypothesis_margin < 0:
            continue
        valid += 1
        f, i = res.forward_bounds, res.inverse_bounds
        contained += (f[0] - 1e-12 <= c <= f[1] + 1e-12) and (i[0] - 1e-12 <= 1 / c <= i[1] + 1e-12)
    ok = penrose <= 1e-10 and douglas <= 1e-10 and rejected == 100 and contained == valid > 0
    assert verdict("criterion 10: operator kit", ok,
                   f"penrose={penrose:.3g} douglas={douglas:.3g} rejected={rejected}/100 "
                   f"neumann={contained}/{valid}")


def test_criterion_11_cli(tmp_path, capsys, monkeypatch):
    path = tmp_path / "example34.bgf"
    path.write_bytes(serialize(example_3_4()))
    code = cli.main(["analyze", str(path)], environ={})
    out = capsys.readouterr().out
    kv = dict(line.split("=", 1) for line in out.splitlines() if "=" in line and ":" not in line)
    analyze_ok = (code == 0 and kv["classification"] == "k_bi_g_frame"
                  and float(kv["A_opt"]) == pytest.approx(1, abs=1e-9)
                  and float(kv["B_opt"]) == pytest.approx(2, abs=1e-9))

    round_trip = all(deserialize(serialize(s)) == s
                     for s in [example_3_4(), example_3_6()]
                     + [random_system(GeneratorSpec(6, 4, k, 5)) for k in KINDS])

    codes = {
        "usage": cli.main(["verify", "0.0"], environ={}),
        "parse": cli.main(["analyze", str(_write(tmp_path, "bad.bgf", "bigframe v1\ndim 2\n"))],
                          environ={}),
    }
    with monkeypatch.context() as m:
        m.setitem(suites.TRIALS, "3.7", lambda rng, i: suites.Trial(i != 1, -1.0))
        codes["suite_failure"] = cli.main(["verify", "3.7", "--instances", "3"], environ={})
    t0 = time.perf_counter()
    suite_codes = {tag: cli.main(["verify", tag, "--instances", "200"], environ={}) for tag in TAGS}
    elapsed = time.perf_counter() - t0
    capsys.readouterr()
    exits_ok = codes == {"usage": 2, "parse": 3, "suite_failure": 1} and set(suite_codes.values()) == {0}
    ok = analyze_ok and round_trip and exits_ok and elapsed < 300
    assert verdict("criterion 11: CLI", ok,
                   f"analyze={analyze_ok} round_trip={round_trip} codes={codes} "
                   f"verify_all={elapsed:.1f}s")


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p
