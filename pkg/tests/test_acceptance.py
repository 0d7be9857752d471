"""Acceptance criteria, one test per criterion.

Each test records a single PASS/FAIL line (printed in the pytest terminal
summary, or directly when this file is run as a script) and then asserts.
"""

import math
import time
import warnings

import mpmath
import numpy as np
import pytest
from conftest import grid_for

from homf.cli import main
from homf.estimate import ExperimentConfig, run_experiment
from homf.figures import FIG3_COVS, figure2_columns, figure3_columns, figure5_columns, read_csv
from homf.hom import (
    cfi_gaussian,
    cfi_numeric,
    cfi_zero_delay,
    coincidence_probability,
    coincidence_probability_gaussian,
    hom_dip,
    max_cfi_gaussian,
    optimal_operating_delay,
    visibility_overlap,
)
from homf.metrology import MINUS, effective_qfi, optimal_covariance, optimal_envelope, qcrb, qfi_matrix
from homf.spectra import GaussianJsaParams, gaussian_jsa, to_temporal
from homf.timeresolved import (
    DetectorConfig,
    cfi_matrix_timeresolved,
    click_distribution_exact,
    click_distribution_slow,
    hom_kernel,
    photon_duration,
)

RESULTS = []


def record(number, title, ok, detail):
    RESULTS.append(f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title} ({detail})")
    assert ok, RESULTS[-1]


def q_minus(p):
    return effective_qfi(qfi_matrix(p.to_moments()))[1]


def random_states(rng, n, c_max=0.95, unit_visibility=0):
    out = []
    for k in range(n):
        bw1 = float(np.exp(rng.uniform(np.log(0.5), np.log(2.0))))
        c = float(rng.uniform(-c_max, c_max))
        if k < unit_visibility:
            out.append(GaussianJsaParams.from_normalized(bw1, bw1, c))
            continue
        bw2 = float(np.exp(rng.uniform(np.log(0.5), np.log(2.0))))
        gap = float(rng.uniform(-1, 1)) * min(bw1, bw2)
        out.append(GaussianJsaParams.from_normalized(bw1, bw2, c, 0.0, gap))
    return out


def test_criterion_1_quadrature_matches_closed_form():
    rng = np.random.default_rng(1)
    states = random_states(rng, 200, unit_visibility=50)
    start = time.perf_counter()
    p_err = v_err = cfi_err = 0.0
    for k, p in enumerate(states):
        jsa = gaussian_jsa(p, grid_for(p))
        dip = hom_dip(p)
        taus = np.linspace(-5, 5, 201) * dip.width
        p_err = max(p_err, float(np.max(np.abs(coincidence_probability(jsa, taus)
                                                - coincidence_probability_gaussian(p, taus)))))
        v_err = max(v_err, abs(visibility_overlap(jsa) - dip.visibility))
        if k < 50:
            cfi_err = max(cfi_err, abs(cfi_zero_delay(jsa) * dip.width**2 - 1))
    elapsed = time.perf_counter() - start
    ok = p_err <= 1e-6 and v_err <= 1e-6 and cfi_err <= 1e-5 and elapsed < 60
    record(1, "closed form vs quadrature", ok,
           f"max |dP_c| = {p_err:.1e}, max |dV| = {v_err:.1e}, max rel dF(0) = {cfi_err:.1e}, {elapsed:.1f} s")


def test_criterion_2_bound_chain():
    rng = np.random.default_rng(2)
    states = random_states(rng, 500, c_max=0.999)
    worst = -np.inf
    for k, p in enumerate(states):
        tau = float(rng.uniform(0, 5)) * hom_dip(p).width
        q = qfi_matrix(p.to_moments())
        qm = effective_qfi(q)[1]
        infos = [cfi_gaussian(p, tau), cfi_gaussian(p, tau, complete=True)]
        if k < 40 and abs(p.normalized_cov) < 0.95:
            infos.append(cfi_numeric(gaussian_jsa(p, grid_for(p)), max(tau, 0.05 * hom_dip(p).width)))
        for f in infos:
            worst = max(worst, (f - qm) / qm)
        worst = max(worst, (qm - q.q_mm) / q.q_mm)
    record(2, "F <= q_eff_minus <= q_mm", worst <= 1e-9, f"500 states, worst relative excess {worst:.1e}")


def test_criterion_3_optimal_covariance():
    rng = np.random.default_rng(3)
    worst_steps = 0.0
    worst_bound = 0.0
    for _ in range(20):
        bw1, bw2 = np.exp(rng.uniform(np.log(0.2), np.log(5.0), size=2))
        cov, _ = optimal_envelope(bw1, bw2, MINUS, n=2001)
        step = 2 * bw1 * bw2 / 2002
        worst_steps = max(worst_steps, abs(cov + min(bw1, bw2) ** 2) / step)
        c_opt = optimal_covariance(bw1, bw2, MINUS)
        std = qcrb(effective_qfi(qfi_matrix(GaussianJsaParams(0, 0, bw1, bw2, c_opt).to_moments()))[1]).std_bound
        target = 0.25 * max(1 / bw1, 1 / bw2)
        worst_bound = max(worst_bound, abs(std - target) / target)
    ok = worst_steps <= 1 and worst_bound <= 1e-10
    record(3, "optimal covariance", ok,
           f"argmax within {worst_steps:.2f} grid steps, bound rel error {worst_bound:.1e}")


def _width_mp(c):
    mpmath.mp.dps = 50
    a = b = mpmath.mpf(1)
    cov = -mpmath.mpf(c)
    return float(mpmath.sqrt((a + b + 2 * cov) / (a * b - cov**2)) / 4)


def test_criterion_4_width_limit():
    cs = [0.9, 0.99, 0.999, 0.9999]
    widths = [hom_dip(GaussianJsaParams(cov=-c)).width for c in cs]
    exact = _width_mp(0.9999)
    err = abs(widths[-1] - exact) / exact
    approx = 1 / (4 * math.sqrt((1 + 0.9999) / 2))
    err_approx = abs(widths[-1] - approx) / approx
    monotone = all(b < a for a, b in zip(widths, widths[1:])) and all(w > 0.25 for w in widths)
    ok = err <= 1e-4 and err_approx <= 1e-4 and monotone
    record(4, "T -> 1/(4 bw)", ok,
           f"T(-0.9999) = {widths[-1]:.7f}, rel err {err:.1e} vs exact, {err_approx:.1e} vs "
           f"1/(4 sqrt((1+c)/2)), sequence {' > '.join(f'{w:.5f}' for w in widths)} > 0.25")


def test_criterion_5_saturation():
    rng = np.random.default_rng(5)
    v1 = [GaussianJsaParams.from_normalized(b, b, c) for b, c in
          zip(np.exp(rng.uniform(-0.7, 0.7, 10)), rng.uniform(-0.95, 0.95, 10))]
    worst_v1 = np.inf
    for p in v1:
        t = hom_dip(p).width
        worst_v1 = min(worst_v1, cfi_gaussian(p, t / 1000) / q_minus(p),
                       cfi_numeric(gaussian_jsa(p, grid_for(p)), t / 1000) / q_minus(p))
    # V = 0.8 by bandwidth mismatch and by detuning
    gap = math.sqrt(-2 * 2 * math.log(0.8))
    v08 = [GaussianJsaParams(bw1=1, bw2=2), GaussianJsaParams(bw1=1, bw2=0.5, cov=0.0),
           GaussianJsaParams(mean2=gap), GaussianJsaParams(bw1=1.0, bw2=1.0, cov=-0.5, mean2=gap * math.sqrt(1.5))]
    best_v08 = 0.0
    for p in v08:
        assert hom_dip(p).visibility == pytest.approx(0.8, rel=1e-12)
        taus = np.linspace(0, 5, 20001) * hom_dip(p).width
        for complete in (False, True):
            dense = float(np.max(cfi_gaussian(p, taus, complete=complete)))
            best = max(dense, max_cfi_gaussian(p, complete)[1])
            best_v08 = max(best_v08, best / q_minus(p))
    ok = worst_v1 > 0.999 and best_v08 < 1
    record(5, "qCRB saturation only at unit visibility", ok,
           f"V=1: min F(T/1000)/q = {worst_v1:.6f}; V=0.8: max F/q = {best_v08:.4f}")


def _figure(which, tmp_path):
    path = tmp_path / f"figure{which}.csv"
    assert main(["figure", str(which), "--output", str(path)]) == 0
    return path.read_text(encoding="utf-8")


def test_criterion_6_figures(tmp_path):
    start = time.perf_counter()
    cols2, a2 = read_csv(_figure(2, tmp_path), figure2_columns())
    mirror = np.array_equal(a2[:, 0], -a2[::-1, 0]) and all(
        np.array_equal(a2[:, k], a2[::-1, k + 1]) for k in range(1, len(cols2), 2))

    cols3, a3 = read_csv(_figure(3, tmp_path), figure3_columns())
    curves = a3[:, 1:1 + len(FIG3_COVS)]
    below = bool(np.all(curves <= a3[:, [cols3.index("single_delay_bound")]] * (1 + 1e-12)))
    far = (a3[:, 0] <= 0.5) | (a3[:, 0] >= 2.0)
    fastest = bool(np.all(curves[far, -1] < curves[far, :-1].min(axis=1)))
    at_one = curves[int(np.argmin(np.abs(a3[:, 0] - 1)))]
    ordered3 = bool(np.all(np.diff(at_one) > 0))

    cols5, a5 = read_csv(_figure(5, tmp_path), figure5_columns())
    prec = a5[:, 1::2]
    order_one = bool(np.all(np.diff(prec[int(np.argmin(np.abs(a5[:, 0] - 1)))]) > 0))
    order_far = bool(np.all(np.diff(prec[-1]) < 0))
    elapsed = time.perf_counter() - start
    ok = mirror and below and fastest and ordered3 and order_one and order_far and elapsed < 120
    record(6, "figure data properties", ok,
           f"fig2 mirror={mirror}; fig3 below bound={below}, -0.99 falls fastest={fastest}, "
           f"ordered at r=1={ordered3}; fig5 ordered at r=1={order_one}, reversed at r={a5[-1, 0]:g}={order_far}; "
           f"{elapsed:.1f} s")


def test_criterion_7_time_resolved():
    start = time.perf_counter()
    p = GaussianJsaParams(bw1=1.0, bw2=1.3, cov=-0.4, mean2=0.2)
    jta = to_temporal(gaussian_jsa(p))
    t = hom_dip(p).width
    dur = photon_duration(jta)

    det = DetectorConfig(theta=0.8, tau_res=20 * dur)
    exact = click_distribution_exact(jta, 0.4 * t, 0.3, det)
    slow = click_distribution_slow(jta, 0.4 * t, 0.3, det)
    slow_err = max(float(np.max(np.abs(getattr(exact, k) - getattr(slow, k)))) for k in ("p1", "p2", "p12"))

    total_err = 0.0
    for theta in (1.0, 0.7, 0.2):
        for x in (-1.5, 0.0, 0.6):
            for model, res in ((click_distribution_exact, 1.5), (click_distribution_slow, 20 * dur)):
                d = model(jta, x * t, 0.1, DetectorConfig(theta=theta, tau_res=res))
                total_err = max(total_err, abs(d.total() - 1))

    res = np.array([5.0, 10.0, 20.0, 40.0])
    f_pp = [cfi_matrix_timeresolved(jta, 0.4 * t, 0.0, DetectorConfig(theta=0.9, tau_res=r), model="exact")[0, 0]
            for r in res]
    slope = float(np.polyfit(np.log(res), np.log(f_pp), 1)[0])

    theta = 0.7
    kernel_err = 0.0
    for x in np.linspace(-3, 3, 13):
        h = hom_kernel(jta, x * t)
        pc = coincidence_probability_gaussian(p, x * t)
        mass = click_distribution_exact(jta, x * t, 0.0, DetectorConfig(theta=theta, tau_res=2.0),
                                        np.linspace(-24, 24, 241)).masses()["p12"]
        kernel_err = max(kernel_err, abs(theta**2 * h - theta**2 * pc), abs(mass - theta**2 * pc))

    tau_res, tau_e = 1.0, 0.6
    fine = np.linspace(-14, 14, 701)
    base = click_distribution_exact(jta, 0.3 * t, 0.2, DetectorConfig(theta=0.8, tau_res=tau_res), fine)
    out = fine[np.abs(fine) <= 6]
    kern = np.exp(-0.5 * ((out[:, None] - fine[None, :]) / tau_e) ** 2) / (math.sqrt(2 * math.pi) * tau_e)
    kern *= fine[1] - fine[0]
    jit = click_distribution_exact(jta, 0.3 * t, 0.2, DetectorConfig(theta=0.8, tau_res=tau_res, tau_e=tau_e), out)
    conv_err = max(float(np.max(np.abs(jit.p1 - kern @ base.p1))), float(np.max(np.abs(jit.p2 - kern @ base.p2))),
                   float(np.max(np.abs(jit.p12 - kern @ base.p12 @ kern.T))))
    elapsed = time.perf_counter() - start
    ok = (slow_err <= 1e-3 and total_err <= 1e-4 and abs(slope + 2) <= 0.1 and kernel_err <= 1e-5
          and conv_err <= 1e-8 and elapsed < 300)
    record(7, "time-resolved limits", ok,
           f"slow vs exact {slow_err:.1e}, |total-1| {total_err:.1e}, F_pp slope {slope:.3f}, "
           f"theta^2 H vs P_c {kernel_err:.1e}, jitter convolution {conv_err:.1e}, {elapsed:.1f} s")


def test_criterion_8_monte_carlo():
    start = time.perf_counter()
    params = GaussianJsaParams(cov=-0.5)
    dip = hom_dip(params)
    assert dip.visibility == 1.0
    offset = optimal_operating_delay(dip) + 0.2 * dip.width
    cfg = ExperimentConfig(params, operating_offset=offset, n_trials=10_000, n_experiments=1_000, rng_seed=0)
    rep = run_experiment(cfg)
    full = run_experiment(cfg, complete_cfi=True)
    floor = rep.qcrb_variance * (1 - 3 / math.sqrt(cfg.n_experiments))
    elapsed = time.perf_counter() - start
    ok = 0.85 <= rep.efficiency <= 1.05 and rep.empirical_variance >= floor and elapsed < 120
    record(8, "Monte Carlo MLE efficiency", ok,
           f"efficiency {rep.efficiency:.3f} (complete-CFI bound: {full.efficiency:.3f}), "
           f"var {rep.empirical_variance:.3e} >= {floor:.3e}, mean {rep.mean_estimate:.1e} s, "
           f"out of bracket {rep.out_of_bracket_fraction:.3f}, {elapsed:.1f} s")


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    for test in tests:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                if "tmp_path" in test.__code__.co_varnames[: test.__code__.co_argcount]:
                    with tempfile.TemporaryDirectory() as d:
                        test(Path(d))
                else:
                    test()
        except AssertionError:
            pass
        print(RESULTS[-1])
