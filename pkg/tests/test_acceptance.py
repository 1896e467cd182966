"""End-to-end acceptance criteria, each at its stated tolerance.

Every test prints one ``criterion N: PASS|FAIL`` line (also collected in the
terminal summary) and then asserts the same condition. Runs use the shipped
configs under ``configs/`` with their seeds and 100 replications.
"""
import math
import time
from pathlib import Path

import numpy as np
import pytest

from hybridml.bench.config import load_config
from hybridml.bench.runner import run_experiment
from hybridml.bench.summary import summarize
from hybridml.graph import DecomposableGraph
from hybridml.hybrid import hybrid_log_ml, relative_l1_objective, representative_log_value
from hybridml.models import (HIWGraphical, IWCovariance, MvnIgRegression, RegressionData, chib_identity_check,
                             conjugate_normal, iw_covariance, mvn_ig_meanfield, mvn_ig_regression,
                             truncated_mvn_regression)
from hybridml.models.covariance import cholesky_jacobian_log
from hybridml.oracles import QuadratureSpec, orthant_log_probability, posterior_box, quadrature_log_integral
from hybridml.partition import TreeConfig, bounding_box, extract_partition, fit_regression_tree
from hybridml.rng import RngStream

pytestmark = pytest.mark.acceptance

CONFIGS = Path(__file__).parent.parent / "configs"


def _run(name, **overrides):
    cfg = load_config(CONFIGS / name).with_overrides(**overrides)
    t0 = time.perf_counter()
    rows = run_experiment(cfg)
    elapsed = time.perf_counter() - t0
    return rows, {s.estimator: s for s in summarize(rows)}, elapsed


def _errors(rows, estimator):
    return np.array([r.truth - r.estimate for r in rows if r.estimator == estimator and r.converged])


def test_criterion_1_conjugate_normal(report_criterion):
    rows, s, secs = _run("table1_conjugate.ini")
    h, hme, bse = s["hybrid"], s["hme"], s["bse"]
    checks = {
        "hybrid |AE|<=0.5": abs(h.ae) <= 0.5,
        "hybrid RMSE<=0.5": h.rmse <= 0.5,
        "HME |AE|>=3": abs(hme.ae) >= 3,
        "BSE |AE|<=0.1": bse.n > 0 and abs(bse.ae) <= 0.1,
        "runtime<=120s": secs <= 120,
    }
    ok = all(checks.values())
    report_criterion(1, ok, f"hybrid AE {h.ae:.4f} RMSE {h.rmse:.4f}; HME AE {hme.ae:.4f}; "
                            f"BSE AE {bse.ae:.4f} ({bse.failures} fail); {secs:.1f}s "
                            + " ".join(k for k, v in checks.items() if not v))
    assert ok, checks


def test_criterion_2_mvn_ig(report_criterion):
    rows, s, secs = _run("fig1_mvn_ig.ini")
    h, hme, came = s["hybrid"], s["hme"], s["came"]
    checks = {
        "hybrid |median|<=2": abs(h.median_error) <= 2,
        "SD(hybrid)<SD(HME)": h.sd < hme.sd,
        "SD(hybrid)<SD(CAME)": h.sd < came.sd,
        "runtime<=300s": secs <= 300,
    }
    ok = all(checks.values())
    report_criterion(2, ok, f"hybrid median {h.median_error:.4f} SD {h.sd:.4f}; HME SD {hme.sd:.4f}; "
                            f"CAME SD {came.sd:.4f}; {secs:.1f}s "
                            + " ".join(k for k, v in checks.items() if not v))
    assert ok, checks


def test_criterion_3_truncated_mvn(report_criterion):
    rows2, s2, _ = _run("truncated_mvn_d2.ini")
    err2 = _errors(rows2, "hybrid")
    rows20, s20, secs = _run("fig1_truncated_mvn.ini", estimators=("hybrid",))
    err20 = _errors(rows20, "hybrid")
    truth_se = np.array([r.truth_se for r in rows20 if r.estimator == "hybrid"])
    # 95% interval for the centre of the error distribution, oracle error included
    half = 1.96 * math.sqrt(err20.var(ddof=1) / err20.size + np.mean(truth_se ** 2))
    centre = float(err20.mean())
    checks = {
        "d=2 all 100 |error|<=0.5": err2.size == 100 and np.max(np.abs(err2)) <= 0.5,
        "d=20 centre CI within +-2": -2 <= centre - half and centre + half <= 2,
        "d=20 |median|<=2": abs(float(np.median(err20))) <= 2,
    }
    ok = all(checks.values())
    report_criterion(3, ok, f"d=2 max|error| {np.max(np.abs(err2)):.4f}; d=20 mean error {centre:.4f} "
                            f"+- {half:.4f}, median {np.median(err20):.4f}, oracle se <= {truth_se.max():.2g}; "
                            f"{secs:.1f}s " + " ".join(k for k, v in checks.items() if not v))
    assert ok, checks


def test_criterion_4_iw_covariance(report_criterion):
    rows, s, secs = _run("fig2_iw.ini")
    h = s["hybrid"]
    bridges = [s[k] for k in ("bse", "wbse") if k in s]
    contrast = any(b.failures >= 1 or (b.n > 1 and b.sd > h.sd) for b in bridges)
    checks = {
        "hybrid |AE|<=2": abs(h.ae) <= 2,
        "hybrid SD<=3": h.sd <= 3,
        "bridge larger SD or failures": contrast,
        "runtime<=300s": secs <= 300,
    }
    ok = all(checks.values())
    report_criterion(4, ok, f"hybrid AE {h.ae:.4f} SD {h.sd:.4f}; "
                            + "; ".join(f"{b.estimator} SD {b.sd if b.sd is not None else float('nan'):.4f} "
                                        f"fail {b.failures}" for b in bridges)
                            + f"; {secs:.1f}s " + " ".join(k for k, v in checks.items() if not v))
    assert ok, checks


def test_criterion_5_hiw_graphical(report_criterion):
    rows, s, secs = _run("fig2_hiw.ini")
    h = s["hybrid"]
    fails = {k: s[k].failures for k in ("bse", "wbse") if k in s}
    checks = {
        "hybrid |AE|<=2.5": abs(h.ae) <= 2.5,
        "bridge non-convergence >=1": sum(fails.values()) >= 1,
    }
    ok = all(checks.values())
    report_criterion(5, ok, f"hybrid AE {h.ae:.4f} SD {h.sd:.4f}; bridge failures {fails}; {secs:.1f}s "
                            + " ".join(k for k, v in checks.items() if not v))
    assert ok, checks


def test_criterion_6_meanfield(report_criterion):
    rows, s, secs = _run("meanfield.ini")
    h, came = s["hybrid"], s["came"]
    checks = {
        "MAE(hybrid)<MAE(CAME)": h.mae < came.mae,
        "hybrid MAE within x3 of 0.449": 0.449 / 3 <= h.mae <= 0.449 * 3,
        "CAME MAE within x3 of 0.698": 0.698 / 3 <= came.mae <= 0.698 * 3,
    }
    ok = all(checks.values())
    report_criterion(6, ok, f"hybrid MAE {h.mae:.4f}; CAME MAE {came.mae:.4f}; "
                            f"BSE MAE {s['bse'].mae:.4f}; {secs:.1f}s "
                            + " ".join(k for k, v in checks.items() if not v))
    assert ok, checks


# -- criterion 7: exact identities --------------------------------------------------

def _exact_jacobian_log(T):
    d = T.shape[0]
    idx = list(zip(*np.tril_indices(d)))
    J = np.zeros((len(idx), len(idx)))
    for col, (i, j) in enumerate(idx):
        E = np.zeros((d, d))
        E[i, j] = 1.0
        dS = E @ T.T + T @ E.T
        J[:, col] = [dS[a, b] for a, b in idx]
    return np.linalg.slogdet(J)[1]


def _quad(model, nodes=300, width=10.0):
    u = model.sample_posterior(RngStream(0, 7), 4000)
    lo, hi = posterior_box(u, width, positive=model.support.positive)
    return quadrature_log_integral(model.psi, QuadratureSpec(lo, hi, nodes))


def _identity_checks():
    out = {}
    r = RngStream(2024)
    normalized = [conjugate_normal(r.child(0)), mvn_ig_regression(r.child(1)),
                  mvn_ig_meanfield(mvn_ig_regression(r.child(2), d=9), 3), iw_covariance(r.child(3))]
    worst = 0.0
    for m in normalized:
        t = m.truth().value
        vals = chib_identity_check(m, m.sample_posterior(r.child(9), 10))
        worst = max(worst, float(np.max(np.abs(vals - t))) / max(1.0, abs(t)))
    out["Chib identity"] = (worst <= 1e-8, worst)

    rng = np.random.default_rng(1)
    worst = 0.0
    for d in (1, 2, 3, 4, 6):
        for _ in range(20):
            T = np.tril(rng.normal(size=(d, d)))
            T[np.diag_indices(d)] = rng.uniform(0.2, 3.0, size=d)
            worst = max(worst, abs(cholesky_jacobian_log(np.diag(T)) - _exact_jacobian_log(T)))
    out["Cholesky Jacobian"] = (worst <= 1e-9, worst)

    y = np.random.default_rng(2).normal(1.0, 2.0, size=30)
    x1 = np.random.default_rng(3).normal(0.0, 1.5, size=(25, 1))
    low_dim = [conjugate_normal(r.child(4)), mvn_ig_regression(r.child(5), n=40, d=1),
               MvnIgRegression(RegressionData(np.zeros((30, 0)), y), a0=2.0, b0=3.0),
               IWCovariance(x1, [[2.0]], 3.0), truncated_mvn_regression(r.child(6), n=30, d=1)]
    worst = max(abs(_quad(m) - m.truth().value) for m in low_dim)
    t2 = truncated_mvn_regression(r.child(7), n=50, d=2)
    lo, hi = posterior_box(t2.sample_posterior(RngStream(0), 4000), 10.0)
    q2 = quadrature_log_integral(t2.psi, QuadratureSpec(tuple(max(a, 1e-12) for a in lo), hi, 600))
    worst = max(worst, abs(q2 - t2.truth().value))
    out["quadrature vs closed form, d<=2"] = (worst <= 1e-4, worst)

    gen = np.random.default_rng(4)
    bad = 0
    for _ in range(1000):
        psi = gen.normal(gen.uniform(-5, 5), gen.uniform(0.01, 3), size=int(gen.integers(1, 30)))
        c = representative_log_value(psi)
        grid = np.linspace(psi.min() - 1, psi.max() + 1, 10_000)
        bad += float(relative_l1_objective(psi, c)) > relative_l1_objective(psi, grid).min() * (1 + 1e-12) + 1e-12
    out["weighted-l1 vs grid argmin (1000 cells)"] = (bad == 0, bad)

    m = conjugate_normal(r.child(8))
    u = m.sample_posterior(r.child(10), 1000)
    psi = m.psi(u)
    base = hybrid_log_ml(u, psi).log_z
    worst = max(abs(hybrid_log_ml(u, psi + k).log_z - (base - k)) for k in (-500.0, -3.0, 0.5, 700.0))
    out["hybrid shift equivariance"] = (worst <= 1e-10, worst)

    worst = 0.0
    for seed in range(20):
        g = np.random.default_rng(seed)
        d = int(g.integers(1, 5))
        pts = g.standard_normal((400, d))
        tree = fit_regression_tree(pts, np.sum(pts ** 2, axis=1), TreeConfig(cp=0.001))
        part = extract_partition(tree, bounding_box(pts))
        vol_err = abs(sum(c.volume for c in part) - part.box.volume) / part.box.volume
        owner = part.membership(len(pts))
        member_ok = np.all(owner >= 0) and all(np.all(c.contains(pts[c.members])) for c in part)
        worst = max(worst, vol_err if member_ok else math.inf)
    out["partition volume/membership"] = (worst <= 1e-12, worst)
    return out


@pytest.mark.filterwarnings("ignore::hybridml.oracles.QuadratureAccuracyWarning")
def test_criterion_7_identity_suite(report_criterion):
    t0 = time.perf_counter()
    checks = _identity_checks()
    secs = time.perf_counter() - t0
    ok = all(v[0] for v in checks.values()) and secs <= 60
    detail = "; ".join(f"{k} {v[1]:.2g}" for k, v in checks.items())
    failed = [k for k, v in checks.items() if not v[0]] + (["runtime"] if secs > 60 else [])
    report_criterion(7, ok, f"{detail}; {secs:.1f}s " + " ".join(failed))
    assert ok, checks


# -- criterion 8: reductions -------------------------------------------------------

def test_criterion_8_reduction_suite(report_criterion):
    x = np.random.default_rng(8).normal(size=(60, 4)) @ np.triu(np.ones((4, 4))) * 0.5
    complete = max(abs(HIWGraphical(x[:, :d], DecomposableGraph.complete(d), delta=b).truth().value
                       - IWCovariance(x[:, :d], np.eye(d), nu=b + d - 1).truth().value)
                   for d in (2, 3, 4) for b in (1.0, 3.0, 7.5))
    empty = abs(HIWGraphical(x, DecomposableGraph.empty(4), delta=3.0).truth().value
                - sum(IWCovariance(x[:, [k]], [[1.0]], nu=3.0).truth().value for k in range(4)))
    half = abs(orthant_log_probability([0.0], [[2.0]])[0] - math.log(0.5))
    arcsine = max(abs(math.exp(orthant_log_probability([0.0, 0.0], [[1.0, rho], [rho, 1.0]])[0])
                      - (0.25 + math.asin(rho) / (2 * math.pi))) for rho in (-0.8, -0.3, 0.3, 0.5, 0.9))
    checks = {"complete HIW = IW": complete <= 1e-8, "empty HIW factorizes": empty <= 1e-8,
              "d=1 orthant 1/2": half <= 1e-15, "d=2 arcsine": arcsine <= 1e-6}
    ok = all(checks.values())
    report_criterion(8, ok, f"complete {complete:.2g}; empty {empty:.2g}; d=1 {half:.2g}; "
                            f"arcsine {arcsine:.2g} " + " ".join(k for k, v in checks.items() if not v))
    assert ok, checks
