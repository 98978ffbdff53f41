"""Acceptance battery: one test per release gate, runnable end to end.

Each test prints a PASS line with the measured quantities when it
succeeds; under pytest -v the test names double as the per-gate
pass/fail report.  Tolerances are fixed here and are not to be loosened;
a failing gate means the implementation or the gate's premise is wrong,
and which one must be settled before shipping.
"""

import json
import math

import numpy as np
import pytest
from scipy.optimize import minimize

from minifunc.cli import main
from minifunc.estimators import (
    EstimatorConfig,
    composite_estimate,
    default_config,
    plain_plugin_estimate,
    sample_histogram,
    tuned_config,
    validate_config,
)
from minifunc.functionals import (
    additive_functional,
    power_functional,
    shannon_functional,
)
from minifunc.lowerbounds import (
    canonical_two_point_pair,
    le_cam_bound,
    moment_matched_pair,
    poisson_mixture_tv,
)
from minifunc.polyapprox import remez_best_approx
from minifunc.risklab import DistributionSpec, monte_carlo_risk

SH = shannon_functional()


def test_acceptance_01_factorial_moment_unbiasedness():
    """(N)_m / n^m averages to p^m within four standard errors."""
    n = 10**4
    reps = 10**6
    rng = np.random.default_rng(20240801)
    worst = 0.0
    for p in (0.001, 0.01, 0.1):
        draws = rng.poisson(n * p, reps).astype(np.float64)
        running = np.ones(reps)
        for m in range(1, 9):
            running = running * (draws - (m - 1)) / n
            mean = running.mean()
            se = running.std(ddof=1) / math.sqrt(reps)
            z = abs(mean - p**m) / se
            worst = max(worst, z)
            assert z <= 4.0, (
                f"factorial moment biased: p={p} m={m} mean={mean!r} "
                f"target={p**m!r} z={z:.2f}"
            )
    print(f"PASS factorial moments: worst |z| = {worst:.2f} over 24 cases")


def test_acceptance_02_remez_correctness():
    """Degree-0 error of x is 1/2; polynomials are recovered; extrema alternate."""
    r0 = remez_best_approx(lambda x: x, 0, (0.0, 1.0))
    assert abs(r0.sup_error - 0.5) <= 1e-10

    coeff_sets = [
        [0.3],
        [0.1, -0.4],
        [0.2, -1.0, 0.75],
        [0.0, 0.5, -0.25, 2.0, -1.5, 0.125],
    ]
    for coeffs in coeff_sets:
        poly = np.polynomial.Polynomial(coeffs)
        deg = len(coeffs) - 1
        for L in (deg, deg + 2):
            r = remez_best_approx(poly, L, (0.0, 1.0))
            assert r.sup_error <= 1e-12, (
                f"degree-{deg} polynomial not recovered at L={L}: "
                f"E_L={r.sup_error!r}"
            )

    battery = [
        (SH.eval, (0.0, 1.0)),
        (np.sqrt, (0.0, 0.1)),
        (power_functional(1.4).eval, (0.0, 1.0)),
    ]
    for fn, interval in battery:
        for L in (3, 8, 16):
            r = remez_best_approx(fn, L, interval)
            assert r.converged
            assert len(r.alternation_points) == L + 2
            signs = np.sign(r.alternation_residuals)
            assert np.all(np.abs(np.diff(signs)) == 2.0), "extrema do not alternate"
            assert np.max(np.abs(np.abs(r.alternation_residuals) - r.sup_error)) <= (
                1e-8 * max(r.sup_error, 1e-30) + 1e-13
            )
    print("PASS remez: degree-0 error 1/2, polynomials recovered, alternation verified")


def test_acceptance_03_approximation_error_scaling():
    """E_L of sqrt on [0, lam] scales like lam^(1/2) / L."""
    phi = power_functional(0.5).eval
    degrees = np.arange(4, 41)
    errs = [remez_best_approx(phi, int(L), (0.0, 0.1)).sup_error for L in degrees]
    slope_L = np.polyfit(np.log(degrees), np.log(errs), 1)[0]
    assert abs(slope_L - (-1.0)) <= 0.15, f"slope vs degree {slope_L!r}"

    lams = np.array([0.01, 0.02, 0.05, 0.1, 0.2, 0.5])
    errs_lam = [remez_best_approx(phi, 16, (0.0, float(l))).sup_error for l in lams]
    slope_lam = np.polyfit(np.log(lams), np.log(errs_lam), 1)[0]
    assert abs(slope_lam - 0.5) <= 0.1, f"slope vs interval width {slope_lam!r}"
    print(f"PASS error scaling: slope vs L = {slope_L:.4f}, slope vs lam = {slope_lam:.4f}")


def test_acceptance_04_moment_matched_pairs():
    """LP gap for x^2 at L=1 is 1/4; moments match; mixture TV obeys (2eM/L)^L."""
    pair_sq = moment_matched_pair(lambda x: x * x, 1, (0.0, 1.0))
    assert abs(pair_sq.gap - 0.250) <= 0.005
    e1 = remez_best_approx(lambda x: x * x, 1, (0.0, 1.0)).sup_error
    assert pair_sq.gap == pytest.approx(2.0 * e1, abs=0.005)
    assert np.max(np.abs(pair_sq.moment_residuals())) <= 1e-8

    worst_ratio = 0.0
    for (s, L) in [(1.0, 6), (1.0, 8), (1.0, 10), (0.5, 4)]:
        m_scale = s  # mixture rates are x in [0, s] at n = k = 1
        assert L > 2.0 * math.e * m_scale
        pair = moment_matched_pair(SH.eval, L, (0.0, s))
        assert np.max(np.abs(pair.moment_residuals())) <= 1e-8
        res = poisson_mixture_tv(pair, 1, 1)
        lim = (2.0 * math.e * m_scale / L) ** L
        assert res.numeric_tv <= lim, (
            f"mixture TV {res.numeric_tv!r} exceeds ({2 * math.e * m_scale}/{L})^{L}"
            f" = {lim!r}"
        )
        worst_ratio = max(worst_ratio, res.numeric_tv / lim)
    print(
        f"PASS moment pairs: gap {pair_sq.gap:.4f} = 2 E_1, "
        f"worst TV/limit ratio {worst_ratio:.2e}"
    )


def test_acceptance_05_plugin_bias_oracle():
    """Plugin bias is -(k-1)/2n at the uniform; order-2 correction beats it 5x."""
    k, n, reps = 100, 10**5, 10**4
    spec = DistributionSpec("uniform", k)
    plug = monte_carlo_risk(spec, SH, "plugin", n, reps=reps, master_seed=11)
    target = -(k - 1) / (2.0 * n)
    z = abs(plug.bias - target) / plug.se_bias
    assert z <= 3.0, f"plugin bias {plug.bias!r} vs {target!r}, z={z:.2f}"

    corr = monte_carlo_risk(spec, SH, "corrected", n, reps=reps, master_seed=11)
    assert abs(corr.bias) <= abs(plug.bias) / 5.0, (
        f"corrected bias {corr.bias!r} not 5x below plugin bias {plug.bias!r}"
    )
    print(
        f"PASS plugin bias: bias {plug.bias:.3e} vs -(k-1)/2n = {target:.3e} "
        f"(z={z:.2f}); corrected bias {corr.bias:.3e}"
    )


def test_acceptance_06_composite_beats_plugin():
    """At k = n = 10^4 the composite estimator halves the plugin MSE."""
    k = n = 10**4
    spec = DistributionSpec("uniform", k)
    comp = monte_carlo_risk(spec, SH, "composite", n, reps=1000, master_seed=5)
    plug = monte_carlo_risk(spec, SH, "plugin", n, reps=1000, master_seed=5)
    ratio = comp.mse / plug.mse
    assert ratio <= 0.5, f"MSE ratio {ratio!r} above 1/2"
    print(
        f"PASS separation: MSE(composite)={comp.mse:.4g}, "
        f"MSE(plugin)={plug.mse:.4g}, ratio={ratio:.3g}"
    )


def test_acceptance_07_two_point_bound_below_risk():
    """The two-point risk bound sits below both estimators' MSE at P."""
    k, n, reps = 100, 1000, 10**4
    pair = canonical_two_point_pair(SH, k, n)
    bound = le_cam_bound(pair.P, pair.Q, SH, n)
    theta = additive_functional(pair.P, SH)
    probs = pair.P.probs

    rng = np.random.default_rng(123)
    cfg = tuned_config(1.0)
    sq_comp = np.empty(reps)
    sq_plug = np.empty(reps)
    for r in range(reps):
        h = sample_histogram(probs, n, "multinomial", rng)
        sq_comp[r] = (composite_estimate(h, SH, cfg, rng=rng).estimate - theta) ** 2
        sq_plug[r] = (plain_plugin_estimate(h, SH) - theta) ** 2
    for name, sq in (("composite", sq_comp), ("plugin", sq_plug)):
        mse = sq.mean()
        se = sq.std(ddof=1) / math.sqrt(reps)
        assert bound <= mse + 3.0 * se, (
            f"{name} MSE {mse!r} (se {se!r}) below two-point bound {bound!r}"
        )
    print(
        f"PASS two-point bound: {bound:.4g} <= composite MSE {sq_comp.mean():.4g}, "
        f"plugin MSE {sq_plug.mean():.4g}"
    )


def _simplex_max(f, k, seed, starts=6):
    """Multistart SLSQP maximization of f over the probability simplex."""
    rng = np.random.default_rng(seed)
    cons = ({"type": "eq", "fun": lambda p: p.sum() - 1.0},)
    bounds = [(1e-12, 1.0)] * k
    inits = [np.full(k, 1.0 / k)]
    for _ in range(starts - 1):
        inits.append(rng.dirichlet(np.full(k, 0.35)))
    best, best_p = -np.inf, None
    for x0 in inits:
        res = minimize(
            lambda p: -f(p),
            np.clip(x0, 1e-12, 1.0),
            method="SLSQP",
            bounds=bounds,
            constraints=cons,
            options={"maxiter": 500, "ftol": 1e-15},
        )
        if -res.fun > best:
            best, best_p = -res.fun, res.x
    return best, best_p


def test_acceptance_08_simplex_maxima():
    """Numeric maximization reproduces the closed-form simplex maxima to 1e-9."""
    for k in (2, 10, 100):
        got, _ = _simplex_max(lambda p: float(np.sum(p**0.5)), k, seed=k)
        want = k**0.5
        assert abs(got - want) <= 1e-9, (
            f"sum p^0.5 maximum at k={k}: numeric {got!r} vs uniform value {want!r}"
        )
    for k in (2, 10, 100):
        got, arg = _simplex_max(
            lambda p: float(np.sum(p * np.log(np.clip(p, 1e-300, 1.0)) ** 2)),
            k,
            seed=100 + k,
        )
        want = math.log(k) ** 2
        assert abs(got - want) <= 1e-9, (
            f"sum p ln^2 p maximum at k={k}: numeric {got!r} at "
            f"p={np.sort(arg)[-2:]} vs uniform value {want!r}"
        )
    print("PASS simplex maxima: both families match closed forms at k in {2, 10, 100}")


def test_acceptance_09_config_validation(tmp_path, capsys):
    """Defaults satisfy all three admissibility inequalities; violations refuse."""
    for alpha in (0.3, 0.5, 1.0, 1.4):
        cfg = default_config(alpha)
        violations = validate_config(cfg, alpha)
        assert violations == [], f"default constants fail at alpha={alpha}: {violations}"

    bad = validate_config(EstimatorConfig(c1=0.9, c2=0.5), 1.0)
    assert len(bad) >= 1

    hist = tmp_path / "h.csv"
    hist.write_text("symbol,count\n" + "\n".join(f"{i},25" for i in range(4)) + "\n")
    code = main(
        ["estimate", "--phi", "shannon", "--input", str(hist),
         "--c1", "0.9", "--c2", "0.5"]
    )
    err = capsys.readouterr().err
    assert code == 3
    assert "admissibility" in err
    print(
        f"PASS config validation: defaults admissible at 4 exponents, "
        f"{len(bad)} violation(s) enforced with exit 3"
    )


def test_acceptance_10_risk_sweep_determinism(tmp_path, capsys):
    """risk-sweep CSVs are byte-identical across runs and --jobs values."""
    def argv(out, jobs):
        return [
            "risk-sweep", "--family", "uniform", "--phi", "shannon",
            "--n-grid", "30,60,120,300", "--k-rule", "fixed:10",
            "--reps", "100", "--estimators", "plugin,composite",
            "--seed", "7", "--jobs", str(jobs), "--out", out,
        ]

    paths = [str(tmp_path / f"sweep{i}.csv") for i in range(3)]
    assert main(argv(paths[0], 1)) == 0
    assert main(argv(paths[1], 1)) == 0
    assert main(argv(paths[2], 3)) == 0
    capsys.readouterr()
    blobs = [open(p, "rb").read() for p in paths]
    assert blobs[0] == blobs[1], "re-run changed the CSV"
    assert blobs[0] == blobs[2], "--jobs changed the CSV"
    print(f"PASS determinism: {len(blobs[0])} CSV bytes identical across runs and jobs")
