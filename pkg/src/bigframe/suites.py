"""Randomized property suites, one per result, addressed by its number.

Every suite draws ``instances`` independent trials. Trial ``i`` uses its own
generator seeded from ``(seed, i)``, so results do not depend on execution
order. A trial reports pass/fail and a normalized margin (positive means
slack, negative means violation).
"""

from dataclasses import dataclass, field

import numpy as np

from .core import (BiGFrameSystem, FrameBounds, GOperatorFamily, Verdict,
                   biframe_operator, classify, g_frame_operator_and_bessel,
                   optimal_bounds, psd_gap,
                   sqrt_factor)
from .errors import NotKBiGFrame, RangeNotIncluded
from .instances import (KINDS, GeneratorSpec, _covering_dims, random_families,
                        random_operator, random_system, random_unitary,
                        tighten)
from .opkit import adjoint, opnorm, psd_sqrt, symmetrize
from .stability import (StabilityParams, SubsetPolicy, adjoint_batch,
                        certify_stability, predicted_stability_bounds)
from .transforms import (combined_operator_bounds, lift_ordinary,
                         positive_perturb, product_operator_bounds,
                         restrict_range, right_compose,
                         surjectivity_equivalence, swap)

TAGS = ("3.7", "3.8", "3.9", "3.10", "3.11", "3.13", "4.1", "4.2", "4.3", "4.4",
        "5.1", "5.2", "5.3", "5.4")

BOUND_SLACK = 1e-8


@dataclass
class Trial:
    ok: bool
    margin: float
    note: str = ""
    flags: dict = field(default_factory=dict)


@dataclass
class SuiteResult:
    theorem: str
    seed: int
    instances: int
    trials: list

    @property
    def passed(self):
        return sum(t.ok for t in self.trials)

    @property
    def failed(self):
        return self.instances - self.passed

    @property
    def failing(self):
        return [i for i, t in enumerate(self.trials) if not t.ok]

    @property
    def worst_margin(self):
        vals = [t.margin for t in self.trials if np.isfinite(t.margin)]
        return min(vals) if vals else float("nan")

    def counters(self):
        out = {}
        for t in self.trials:
            for k, v in t.flags.items():
                out[k] = out.get(k, 0) + int(bool(v))
        return dict(sorted(out.items()))


def instance_seed(seed, index):
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


def _cg(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def _pd_families(rng, n, m):
    """Random families whose biframe operator is positive definite."""
    return random_families(n, m, rng, dims=_covering_dims(n, m, rng))


def _rel(x, y):
    if (np.isinf(x) and np.isinf(y)) or (np.isnan(x) and np.isnan(y)):
        return 0.0
    den = max(abs(x), abs(y))
    return 0.0 if den == 0 else abs(x - y) / den


def _lower_margin(pred_lower, a_opt):
    return (a_opt - pred_lower) / max(1.0, abs(a_opt)) + BOUND_SLACK


def _upper_margin(pred_upper, b_opt):
    return (pred_upper - b_opt) / max(1.0, abs(b_opt)) + BOUND_SLACK


def _random_k_frame(rng, n_range=(2, 10), m_range=(1, 6), attempts=25):
    for _ in range(attempts):
        n = int(rng.integers(*n_range))
        m = int(rng.integers(*m_range))
        kind = KINDS[int(rng.integers(len(KINDS)))]
        sys = random_system(GeneratorSpec(n, m, kind, int(rng.integers(2 ** 32))))
        rep = classify(sys)
        if rep.verdict >= Verdict.K_BI_G_FRAME and not rep.degenerate_k:
            return sys, rep
    phi, psi = _pd_families(rng, n, m)
    sys = BiGFrameSystem(phi, psi, _cg(rng, n, n))
    return sys, classify(sys)


# ------------------------------------------------------------------ bounds and combinations

def trial_3_7(rng, index):
    n = int(rng.integers(2, 17))
    m = int(rng.integers(1, 9))
    kind = KINDS[index % len(KINDS)]
    sys = random_system(GeneratorSpec(n, m, kind, int(rng.integers(2 ** 32))))
    sw = swap(sys)
    exact = np.array_equal(biframe_operator(sw), adjoint(biframe_operator(sys)))
    r1, r2 = classify(sys), classify(sw)
    err = max(_rel(r1.a_opt, r2.a_opt), _rel(r1.b_opt, r2.b_opt))
    margin = 1e-10 - err
    ok = bool(exact and r1.verdict == r2.verdict and margin >= 0 and swap(sw) == sys)
    return Trial(ok, margin, f"n={n} m={m} kind={kind}", {"exact_adjoint": exact})


def _combination_trial(rng, n_ops):
    n = int(rng.integers(2, 9))
    m = int(rng.integers(1, 6))
    phi, psi = _pd_families(rng, n, m)
    ks = [_cg(rng, n, n) for _ in range(n_ops)]
    if rng.random() < 0.3:
        ks[0] = ks[1] if n_ops > 1 else ks[0]
    bounds = []
    for k in ks:
        res = optimal_bounds(BiGFrameSystem(phi, psi, k))
        bounds.append(res.bounds)
    alphas = list(_cg(rng, n_ops))
    k_sum = sum(a * k for a, k in zip(alphas, ks))
    pred = combined_operator_bounds(bounds, alphas)
    act = optimal_bounds(BiGFrameSystem(phi, psi, k_sum))
    margins = [_lower_margin(pred.lower, act.a_opt), _upper_margin(pred.upper, act.b_opt)]
    paper_violation = pred.paper_constant > act.a_opt * (1 + 1e-9)

    k_prod = ks[0]
    for k in ks[1:]:
        k_prod = k_prod @ k
    pred2 = product_operator_bounds(bounds[0], ks[1:])
    act2 = optimal_bounds(BiGFrameSystem(phi, psi, k_prod))
    if not act2.degenerate_k:
        margins.append(_lower_margin(pred2.lower, act2.a_opt))
    margins.append(_upper_margin(pred2.upper, act2.b_opt))
    margin = min(margins)
    return Trial(margin >= 0, margin, f"n={n} ops={n_ops}",
                 {"published_constant_exceeds_optimum": paper_violation})


def trial_3_8(rng, index):
    return _combination_trial(rng, 2)


def trial_3_9(rng, index):
    return _combination_trial(rng, int(rng.integers(3, 6)))


def trial_3_10(rng, index):
    n = int(rng.integers(2, 9))
    m = int(rng.integers(1, 6))
    phi, psi = _pd_families(rng, n, m)
    base = optimal_bounds(BiGFrameSystem(phi, psi, np.eye(n)))
    k = _cg(rng, n, n)
    k *= rng.uniform(1.0, 3.0) / opnorm(k)
    pred = lift_ordinary(base.bounds, k)
    act = optimal_bounds(BiGFrameSystem(phi, psi, k))
    margin = min(_lower_margin(pred.lower, act.a_opt), _upper_margin(pred.upper, act.b_opt))
    return Trial(margin >= 0, margin, f"n={n} ||K||={opnorm(k):.3g}")


def trial_3_11(rng, index):
    sys, rep = _random_k_frame(rng)
    if rep.verdict < Verdict.K_BI_G_FRAME or rep.degenerate_k:
        return Trial(True, float("nan"), "no K-bi-g-frame drawn", {"vacuous": True})
    snorm = opnorm(biframe_operator(sys))
    g0 = psd_gap(sys, rep.a_opt)
    g1 = psd_gap(sys, 1.01 * rep.a_opt)
    margin = min(g0 / snorm + 1e-8, -g1 / snorm)
    return Trial(bool(g0 >= -1e-8 * snorm and g1 < 0), margin, f"verdict={rep.verdict}")


def trial_3_13(rng, index):
    engineered = index % 4 == 0
    if engineered:
        n = int(rng.integers(3, 11))
        m = int(rng.integers(1, n))
        dims = [1] * m
        for _ in range(int(rng.integers(0, n - m))):
            dims[int(rng.integers(m))] += 1
        phi, psi = random_families(n, m, rng, dims=tuple(dims))
        sys = BiGFrameSystem(phi, psi, random_operator(n, "invertible", rng))
    else:
        n = int(rng.integers(2, 11))
        m = int(rng.integers(1, 7))
        kind = KINDS[int(rng.integers(len(KINDS)))]
        sys = random_system(GeneratorSpec(n, m, kind, int(rng.integers(2 ** 32))))
    rep = classify(sys)
    is_k = rep.verdict >= Verdict.K_BI_G_FRAME
    k = sys.k_op
    try:
        u = sqrt_factor(sys)
    except RangeNotIncluded:
        ok = not is_k
        if engineered:
            ok = ok and rep.verdict < Verdict.K_BI_G_FRAME
        return Trial(ok, float("nan"), f"rejected, verdict={rep.verdict}",
                     {"engineered": engineered, "factored": False})
    root = psd_sqrt(biframe_operator(sys))
    kn = np.linalg.norm(k)
    resid = np.linalg.norm(root @ u - k) / kn if kn > 0 else 0.0
    margin = 1e-9 - resid
    ok = bool(is_k and margin >= 0 and not engineered)
    return Trial(ok, margin, f"factored, verdict={rep.verdict}",
                 {"engineered": engineered, "factored": True})


# ------------------------------------------------------------------ range and composition

def trial_4_1(rng, index):
    n = int(rng.integers(2, 9))
    m = int(rng.integers(1, 6))
    phi, psi = _pd_families(rng, n, m)
    if rng.random() < 0.5:
        k = random_operator(n, "rank", rng, rank=int(rng.integers(1, n + 1)))
    else:
        k = _cg(rng, n, n)
    sys = BiGFrameSystem(phi, psi, k)
    t = k @ _cg(rng, n, n)
    new, pred = restrict_range(sys, t)
    act = optimal_bounds(new)
    margin = min(_lower_margin(pred.lower, act.a_opt), _upper_margin(pred.upper, act.b_opt))
    return Trial(margin >= 0, margin, f"n={n} rank(K)={act.k_rank}")


def trial_4_2(rng, index):
    """Operator identity always; non-degradation where it provably holds.

    Non-degradation is gated only when S is invertible or T commutes with S.
    Other degradations are counted in ``degraded_singular_s``.
    """
    sys, rep = _random_k_frame(rng)
    n = sys.dim
    p = index % 3 + 1
    t = random_operator(n, "positive", rng)
    t *= rng.uniform(0.1, 1.5) / opnorm(t)
    if rng.random() < 0.25:
        # T built from S's own spectral projectors commutes with S
        w, v = np.linalg.eigh(symmetrize(biframe_operator(sys)))
        t = (v * rng.uniform(0, 1.5, n)) @ adjoint(v)
    out = positive_perturb(sys, t, p)
    s_in = biframe_operator(sys)
    s_out = biframe_operator(out)
    c = np.eye(n) + np.linalg.matrix_power(t, p)
    resid = np.linalg.norm(s_out - adjoint(c) @ s_in @ c) / np.linalg.norm(s_out)
    margin = 1e-12 - resid
    out_rep = classify(out)
    kept = out_rep.verdict >= Verdict.K_BI_G_FRAME
    hyp = rep.is_bi_g_frame or np.linalg.norm(t @ s_in - s_in @ t) <= 1e-12 * opnorm(t) * opnorm(s_in)
    ok = bool(margin >= 0 and (kept or not hyp))
    return Trial(ok, margin, f"n={n} power={p}",
                 {"degraded_singular_s": not kept and not hyp, "degraded": not kept})


def _commuting_pair(rng, n, allow_singular_m):
    """K and M simultaneously diagonalizable, with R(K^*) inside R(M)."""
    if allow_singular_m:
        v = random_unitary(n, rng)
        vinv = adjoint(v)
    else:
        v = np.eye(n) + 0.4 * _cg(rng, n, n) / np.sqrt(n)
        vinv = np.linalg.inv(v)
    kd = _cg(rng, n)
    md = _cg(rng, n) + 0.2 * np.exp(2j * np.pi * rng.random(n))
    if allow_singular_m:
        zero_k = rng.random(n) < 0.3
        kd[zero_k] = 0
        zero_m = zero_k & (rng.random(n) < 0.7)
        md[zero_m] = 0
    return (v * kd) @ vinv, (v * md) @ vinv


def trial_4_3(rng, index):
    n = int(rng.integers(2, 9))
    m = int(rng.integers(1, 6))
    phi, psi = _pd_families(rng, n, m)
    k, mop = _commuting_pair(rng, n, bool(index % 2))
    if opnorm(k) == 0:
        k, mop = _commuting_pair(rng, n, False)
    sys = BiGFrameSystem(phi, psi, k)
    out, pred = right_compose(sys, mop)
    act = optimal_bounds(out)
    lm = _lower_margin(pred.lower, act.a_opt) if not act.degenerate_k else np.inf
    margin = min(lm, _upper_margin(pred.upper, act.b_opt))
    return Trial(margin >= 0, margin, f"n={n} rank(K)={act.k_rank}")


def trial_4_4(rng, index):
    n = int(rng.integers(2, 9))
    m = int(rng.integers(1, 6))
    v = random_unitary(n, rng)
    kd = rng.uniform(0.3, 2.0, n) * np.exp(2j * np.pi * rng.random(n))
    k = (v * kd) @ adjoint(v)
    md = rng.uniform(0.3, 2.0, n) * np.exp(2j * np.pi * rng.random(n))
    zeros = int(rng.integers(0, 3)) if index % 2 else 0
    md[rng.permutation(n)[:min(zeros, n)]] = 0
    mop = (v * md) @ adjoint(v)
    delta = float(rng.uniform(0.5, 2.0))
    phi, psi = _pd_families(rng, n, m)
    phi, psi = tighten(phi, psi, k, delta, rng)
    sys = BiGFrameSystem(phi, psi, k)
    is_k, surj = surjectivity_equivalence(sys, delta, mop)
    # K is invertible here, so M K^* is onto exactly when no eigenvalue of M vanishes
    expected = bool(np.all(md != 0))
    ok = is_k == surj == expected
    return Trial(ok, 1.0 if ok else -1.0, f"n={n} zeros={zeros}", {"surjective": surj})


# ------------------------------------------------------------------ stability

def _perturbed_pair(rng, n, m, k, eps):
    """Base families and a structured perturbation, both with Hermitian PSD S."""
    dims = _covering_dims(n, m, rng)
    r = np.eye(n) + 0.5 * _cg(rng, n, n) / np.sqrt(n)
    dr = _cg(rng, n, n) / np.sqrt(n)
    out = {"phi": [], "psi": [], "lam": [], "gam": []}
    for d in dims:
        theta = _cg(rng, d, n)
        dtheta = _cg(rng, d, n)
        w = np.eye(d) + 0.3 * _cg(rng, d, d) / np.sqrt(d)
        out["phi"].append(w @ theta @ r)
        out["psi"].append(np.linalg.solve(adjoint(w), theta) @ r)
        out["lam"].append((w @ (theta + eps * dtheta)) @ (r + eps * dr))
        out["gam"].append(np.linalg.solve(adjoint(w), theta + eps * dtheta) @ (r + eps * dr))
    fam = {key: GOperatorFamily(n, dims, tuple(v)) for key, v in out.items()}
    return BiGFrameSystem(fam["phi"], fam["psi"], k), fam["lam"], fam["gam"]


def _difference_norms(base, lam, gam, kstar_inv=None):
    """Largest ``||D_J||`` (and ``||D_J K^{-*}||``) over all subsets J."""
    policy = SubsetPolicy("exhaustive")
    masks = policy.masks(len(base)).astype(float)
    t1 = np.stack([adjoint(q) @ p for p, q in zip(base.phi, base.psi)])
    t2 = np.stack([adjoint(q) @ p for p, q in zip(lam, gam)])
    d = np.einsum("cm,mij->cij", masks, t1 - t2)
    plain = float(np.linalg.norm(d, 2, axis=(1, 2)).max())
    if kstar_inv is None:
        return plain, None
    return plain, float(np.linalg.norm(d @ kstar_inv, 2, axis=(1, 2)).max())


def _stability_trial(rng, index, variant):
    n = int(rng.integers(2, 7))
    m = int(rng.integers(1, 7))
    if variant == "thm_5_1":
        k = random_operator(n, "rank", rng, rank=int(rng.integers(1, n + 1)))
    else:
        k = random_operator(n, "invertible", rng)
    kstar_inv = None if variant == "thm_5_1" else np.linalg.inv(adjoint(k))
    eps = 0.05
    alpha = float(rng.uniform(0, 0.3))
    beta = float(rng.uniform(0, 0.3))
    for _ in range(40):
        base, lam, gam = _perturbed_pair(rng, n, m, k, eps)
        res = optimal_bounds(base)
        if res.bounds is None:
            eps *= 0.5
            continue
        a, b = res.bounds.lower, res.bounds.upper
        r = np.sqrt(b / a)
        plain, weighted = _difference_norms(base, lam, gam, kstar_inv)
        pad = 1 + 1e-9
        if variant == "thm_5_1":
            params = StabilityParams(alpha, beta, gamma=min(plain * pad, 0.999999), variant=variant)
        elif variant == "thm_5_3":
            params = StabilityParams(alpha, beta, gamma=min(weighted * pad, 0.999999), variant=variant)
        elif variant == "thm_5_4":
            params = StabilityParams(alpha, beta, gamma=min(0.5 * weighted * pad, 0.999999),
                                     sigma=min(0.5 * plain * pad, 0.999999), variant=variant)
        else:
            params = StabilityParams(d_const=weighted * pad, variant=variant)
        try:
            params.check(res.bounds)
        except Exception:
            eps *= 0.5
            continue
        break
    else:
        return Trial(True, float("nan"), "no admissible perturbation", {"vacuous": True})

    cert = certify_stability(base, lam, gam, params, SubsetPolicy("exhaustive"),
                             seed=int(rng.integers(2 ** 32)))
    cand = classify(BiGFrameSystem(lam, gam, k))
    scale = max(1.0, b)
    upper_ok = cand.b_opt <= cert.predicted.upper + BOUND_SLACK * scale
    margins = [cert.hypothesis_margin / scale + 1e-12,
               _upper_margin(cert.predicted.upper, cand.b_opt)]
    ok = cert.hypothesis_margin >= -1e-12 * scale and upper_ok

    if variant == "cor_5_2":
        _, b_phi = _bessel(base.phi)
        _, b_psi = _bessel(base.psi)
        spec = StabilityParams(0.0, 0.0, gamma=params.d_const * np.sqrt(b / a), variant="thm_5_1")
        p1 = predicted_stability_bounds(spec, res.bounds, b_phi, b_psi)
        agree = max(_rel(p1.lower, cert.predicted.lower), _rel(p1.upper, cert.predicted.upper))
        margins.append(1e-12 - agree)
        ok = ok and agree <= 1e-12
    if variant in ("thm_5_3", "thm_5_4"):
        _, b_phi = _bessel(base.phi)
        _, b_psi = _bessel(base.psi)
        red = StabilityParams(alpha, beta, variant=variant)
        ref = StabilityParams(alpha, beta, variant="thm_5_1")
        p_red = predicted_stability_bounds(red, res.bounds, b_phi, b_psi)
        p_ref = predicted_stability_bounds(ref, res.bounds, b_phi, b_psi)
        same = p_red.lower == p_ref.lower and p_red.upper == p_ref.upper
        ok = ok and same
    flags = {
        "candidate_k_frame": cand.verdict >= Verdict.K_BI_G_FRAME,
        "predicted_lower_holds": bool(cert.lower_holds),
        "certificate_verdict": cert.verdict,
    }
    return Trial(bool(ok), min(margins), f"n={n} m={m} eps={eps:.3g}", flags)


def _bessel(fam):
    return g_frame_operator_and_bessel(fam)


def trial_5_1(rng, index):
    return _stability_trial(rng, index, "thm_5_1")


def trial_5_2(rng, index):
    return _stability_trial(rng, index, "cor_5_2")


def trial_5_3(rng, index):
    return _stability_trial(rng, index, "thm_5_3")


def trial_5_4(rng, index):
    return _stability_trial(rng, index, "thm_5_4")


TRIALS = {
    "3.7": trial_3_7, "3.8": trial_3_8, "3.9": trial_3_9, "3.10": trial_3_10,
    "3.11": trial_3_11, "3.13": trial_3_13, "4.1": trial_4_1, "4.2": trial_4_2,
    "4.3": trial_4_3, "4.4": trial_4_4, "5.1": trial_5_1, "5.2": trial_5_2,
    "5.3": trial_5_3, "5.4": trial_5_4,
}


def run_suite(theorem, instances=200, seed=0):
    """Run the property suite for ``theorem`` (one of :data:`TAGS`)."""
    if theorem not in TRIALS:
        raise KeyError(f"unknown theorem tag {theorem!r}; expected one of {TAGS}")
    fn = TRIALS[theorem]
    trials = []
    for i in range(instances):
        rng = np.random.default_rng(instance_seed(seed, i))
        try:
            trials.append(fn(rng, i))
        except NotKBiGFrame as exc:
            trials.append(Trial(False, float("nan"), f"error: {exc}"))
    return SuiteResult(theorem, seed, instances, trials)
