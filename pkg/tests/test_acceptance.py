"""Acceptance suite: one test per criterion, printing a PASS/FAIL line each.

Run with `pytest -s tests/test_acceptance.py` to see the lines as they
complete.  Tolerances are pinned here, not configurable.
"""

import time
from fractions import Fraction as F

import numpy as np

import heterobaker as hb
from heterobaker.observables import pc_center
from heterobaker.ruin import surviving_path_histogram
from heterobaker.verify import (check_formula_compositions, check_phat_sum,
                                check_reduction, random_pc1, random_pc3)

NEUTRAL = hb.BakerParams.neutral(2)
OP = hb.ReducedOp.neutral(2)
PHI = hb.affine_center()


def _report(num, name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {num:>2} {name}: {status} {detail}")
    assert ok, f"criterion {num} ({name}) failed: {detail}"


def test_c01_optimal_decay_exponent():
    t0 = time.time()
    series = hb.exact_reduced_correlation(PHI, PHI, 8192, op=OP,
                                          numeric="double")
    fit = hb.decay_slope_fit(series, (512, 8192))
    plateau = dict(fit["plateau"])
    drift = abs(plateau[8192] - plateau[4096]) / plateau[4096]
    elapsed = time.time() - t0
    ok = -1.55 <= fit["slope"] <= -1.45 and drift < 0.02 and elapsed < 60
    _report(1, "optimal decay exponent", ok,
            f"slope={fit['slope']:.4f} plateau_drift={drift:.2%} "
            f"time={elapsed:.1f}s")


def test_c02_hand_checkable_values():
    # independent grid oracles first
    pa = hb.PAFun1D.affine(1, F(-1, 2))
    oracle0 = hb.inner_product_pa(pa, pa)
    oracle1 = hb.inner_product_pa(hb.p0_apply_pa(OP, pa, 1), pa)
    chi = hb.wavelet(1, 0)
    oracle_chi = hb.inner_product(hb.p0_apply(OP, chi, 2), chi)
    ok = (oracle0, oracle1, oracle_chi) == (F(1, 12), F(1, 24), F(1, 4))
    # only then the fast paths
    series = hb.exact_reduced_correlation(PHI, PHI, 1, op=OP,
                                          numeric="rational")
    ok = ok and series[0].exact == F(1, 12) and series[1].exact == F(1, 24)
    obs = pc_center(chi)
    haar = hb.exact_reduced_correlation(obs, obs, 2, op=OP, mode="haar")
    ok = ok and haar[2].exact == F(1, 4)
    _report(2, "hand-checkable exact values", ok,
            f"P0^0={oracle0} P0^1={oracle1} chi2={oracle_chi}")


def test_c03_oracle_equivalence_suite():
    rng = np.random.Generator(np.random.Philox(key=2024))
    t0 = time.time()
    all_ok, sw_count = True, 0
    for i in range(100):
        if i % 8 == 0:
            # sprinkle square-wave-span inputs so that route is exercised
            depth = int(rng.integers(1, 6))
            f = hb.PCFun1D.zero()
            for l in range(1, depth + 1):
                c = F(int(rng.integers(-32, 33)), 64)
                f = f + hb.square_wave(l) * c
            if all(v == 0 for v in f.values):
                f = f + hb.square_wave(1) * F(1, 2)
            f = f.refine([F(1, 2 ** depth)])
        else:
            f = random_pc1(rng, int(rng.integers(1, 6)))
            if all(v == 0 for v in f.values):
                continue
        rep = hb.oracle_equivalence_report(f, OP, 12)
        all_ok = all_ok and rep["agree"]
        sw_count += bool(rep["squarewave_applicable"])
    _report(3, "oracle equivalence (100 functions, n<=12)", all_ok,
            f"squarewave_applicable={sw_count} time={time.time() - t0:.1f}s")


def test_c04_ruin_closed_form():
    ok = True
    for l in range(1, 33):
        state = hb.RuinState.delta(l)
        for n in range(1, 65):
            state = hb.step(state)
            closed = hb.q_via_transition(hb.RuinState.delta(l), n)
            if state.q != closed.q:
                ok = False
                break
        if not ok:
            break
    brute_ok = True
    for l in (1, 2, 3, 4, 5, 6):
        for n in range(1, 15):
            hist = surviving_path_histogram(l, n)
            for lp in range(max(1, l - n), l + n + 1):
                if F(hist.get(lp, 0), 2 ** n) != hb.transition_prob_exact(l, lp, n):
                    brute_ok = False
    _report(4, "gambler's-ruin closed form", ok and brute_ok,
            "recursion l<=32,n<=64 exact; enumeration n<=14 exact")


def test_c05_transition_ratio_witness():
    intervals = {}
    all_ratios = []
    for n in (10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6):
        rep = hb.asymptotic_ratio_report([n])
        intervals[n] = (rep["r_min"], rep["r_max"])
        all_ratios += [r["ratio"] for r in rep["rows"]]
    r_min, r_max = min(all_ratios), max(all_ratios)
    ratio_ok = r_max / r_min < 10 and r_min > 0
    r5 = hb.transition_prob_float(1, 1, 10 ** 5) * (10 ** 5) ** 1.5
    r6 = hb.transition_prob_float(1, 1, 10 ** 6) * (10 ** 6) ** 1.5
    cauchy_ok = abs(r6 - r5) / r5 < 0.05
    _report(5, "transition asymptotics witness", ratio_ok and cauchy_ok,
            f"interval=[{r_min:.4f},{r_max:.4f}] spread={r_max / r_min:.3f} "
            f"stabilization={abs(r6 - r5) / r5:.2e}")


def test_c06_domination_and_equality():
    stair = hb.PCFun1D.uniform([F(-3, 4), F(-1, 4), F(1, 4), F(3, 4)])
    rep = hb.domination_check(stair, 8, l_max=12)
    ok = rep["all_hold"] and rep["all_equal"]
    rng = np.random.Generator(np.random.Philox(key=606))
    for _ in range(5):
        f = random_pc1(rng, int(rng.integers(1, 5)))
        if all(v == 0 for v in f.values):
            continue
        r = hb.domination_check(f, 8)
        ok = ok and r["all_hold"]
    _report(6, "domination and monotone equality", ok,
            f"staircase C_phi={rep['c_phi']}")


def test_c07_3d_operator_identities():
    t0 = time.time()
    rng = np.random.Generator(np.random.Philox(key=707))
    ok = True
    for i in range(20):
        Fv = random_pc3(rng)
        ok = ok and check_phat_sum(NEUTRAL, Fv)
        for n in range(1, 5):
            a, b = check_formula_compositions(NEUTRAL, Fv, n)
            ok = ok and a and b
        if not ok:
            break
    red_ok = True
    for level in (1, 2, 2):
        f = random_pc1(rng, level)
        red_ok = red_ok and check_reduction(NEUTRAL, f, 6)
    _report(7, "3D operator identities", ok and red_ok,
            f"20 functions, compositions n<=4, reduction n<=6, "
            f"time={time.time() - t0:.1f}s")


def test_c08_fiber_average_decay():
    u = hb.PCFun3D.build(["0", "1"], ["0", "1"], ["0", "1/2", "1"],
                         [[[1, -1]]])
    rows = hb.fiber_average_decay_check(NEUTRAL, u, (F(-1, 2), 0, 0, 1),
                                        n_max=20, theta=1.0)
    ok = all(r["ok"] for r in rows)
    _report(8, "fiber-average decay bound (n<=20)", ok,
            f"|value(20)|={abs(float(rows[20]['value'])):.3e} "
            f"bound={rows[20]['bound']:.3e}")


def test_c09_regime_separation():
    biased = hb.ReducedOp(2, F(3, 5))
    series_b = hb.exact_reduced_correlation(PHI, PHI, 512, op=biased,
                                            numeric="double")
    fit_exp = hb.exp_rate_fit(series_b, (64, 512))
    fit_pow = hb.decay_slope_fit(series_b, (64, 512))
    biased_ok = fit_exp["rate"] < 0.98 and \
        fit_pow["residual"] >= 10 * fit_exp["residual"]
    series_n = hb.exact_reduced_correlation(PHI, PHI, 512, op=OP,
                                            numeric="double")
    fit_exp_n = hb.exp_rate_fit(series_n, (64, 512))
    fit_pow_n = hb.decay_slope_fit(series_n, (64, 512))
    neutral_ok = fit_exp_n["residual"] > fit_pow_n["residual"]
    _report(9, "exponential vs polynomial regimes", biased_ok and neutral_ok,
            f"lambda={fit_exp['rate']:.4f} "
            f"biased res pow/exp={fit_pow['residual'] / fit_exp['residual']:.1f} "
            f"neutral res exp/pow={fit_exp_n['residual'] / fit_pow_n['residual']:.1f}")


PARAMETER_GRID = [
    (2, "1/4", "1/4"), (2, "1/5", "3/10"), (2, "3/10", "1/5"),
    (2, "1/8", "3/8"), (2, "2/5", "1/10"), (3, "1/6", "1/6"),
    (3, "1/9", "2/9"), (3, "1/4", "1/12"), (4, "1/8", "1/8"),
    (4, "1/16", "3/16"),
    (2, "1/4", "1/5"), (2, "1/3", "1/3"), (2, "1/8", "1/8"),
    (2, "2/5", "2/5"), (2, "1/5", "1/5"), (3, "1/6", "1/5"),
    (3, "1/9", "1/9"), (3, "1/4", "1/4"), (4, "1/8", "1/16"),
    (4, "3/16", "3/16"),
]


def test_c10_measure_preservation():
    exact_ok = True
    for M, a, b in PARAMETER_GRID:
        params = hb.BakerParams(M, hb.frac(a), hb.frac(b))
        if hb.tiling_report(params)["passed"] != params.is_measure_preserving:
            exact_ok = False
    mc_ok = True
    harness = [(2, "1/4", "1/4"), (3, "1/6", "1/6"), (2, "1/5", "3/10"),
               (2, "1/8", "1/8"), (2, "1/3", "1/3"), (3, "1/4", "1/4")]
    for M, a, b in harness:
        params = hb.BakerParams(M, hb.frac(a), hb.frac(b))
        res = hb.measure_invariance_chisq(params, n=50, samples=10 ** 6,
                                          seed=10)
        if res["passed"] != params.is_measure_preserving:
            mc_ok = False
    _report(10, "measure preservation iff a+b=1/M", exact_ok and mc_ok,
            f"{len(PARAMETER_GRID)} exact pairs, {len(harness)} chi-square "
            f"runs at N=1e6")


def test_c11_mc_exact_cross_check():
    t0 = time.time()
    ns = [1, 5, 10, 20]
    exact = hb.exact_reduced_correlation(PHI, PHI, 20, op=OP,
                                         numeric="rational")
    out = hb.mc_correlation_series(NEUTRAL, PHI, PHI, ns, 10 ** 7, seed=2718)
    ok = True
    zs = []
    for n in ns:
        rec = out[n]
        z = (rec.value - float(exact[n].exact)) / rec.error
        zs.append(z)
        ok = ok and abs(z) < 3
    elapsed = time.time() - t0
    ok = ok and elapsed < 300
    _report(11, "MC/exact cross-check at N=1e7", ok,
            f"z={['%.2f' % z for z in zs]} time={elapsed:.0f}s")
