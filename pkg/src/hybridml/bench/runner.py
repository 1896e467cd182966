"""Seeded replications over (model x estimator) and CSV rows.

Replication ``r`` owns the stream ``(seed, r)``; its children feed data
generation, the truth oracle, posterior sampling and each estimator under a
fixed key, so results do not depend on run order, job count or which other
estimators are enabled.
"""
from __future__ import annotations

import csv
import hashlib
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..baselines import (BridgeNotConverged, bridge_sampling, came, harmonic_mean, warp_bridge_sampling)
from ..hybrid import HybridConfig, RepresentativeRule, hybrid_log_ml
from ..models import Model, Truth, get_spec
from ..rng import RngStream
from .config import ExperimentConfig

DATA, TRUTH, POSTERIOR, FRESH = 0, 1, 2, 3
ESTIMATOR_KEYS = {"hybrid": 10, "hybrid_leafmean": 11, "hme": 12, "came": 13, "bse": 14, "wbse": 15}

COLUMNS = ("model", "rep", "estimator", "estimate", "truth", "error", "converged", "n_mcmc", "n_obs",
           "seed", "wall_ms", "truth_se", "sample_hash", "flag")


class ReplicationError(RuntimeError):
    """Data generation, truth or posterior sampling failed for a replication."""

    def __init__(self, rep: int, stage: str, cause: Exception):
        super().__init__(f"replication {rep}: {stage} failed: {cause}")
        self.rep, self.stage = rep, stage


@dataclass(frozen=True)
class Row:
    model: str
    rep: int
    estimator: str
    estimate: float | None
    truth: float
    converged: bool
    n_mcmc: int
    n_obs: int
    seed: int
    wall_ms: float | None = None
    truth_se: float | None = None
    sample_hash: str = ""
    flag: str = ""

    @property
    def error(self) -> float | None:
        """``truth - estimate``."""
        return None if self.estimate is None else self.truth - self.estimate


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_rows(rows, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([r.model, r.rep, r.estimator, _fmt(r.estimate), _fmt(r.truth), _fmt(r.error),
                    "true" if r.converged else "false", r.n_mcmc, r.n_obs, r.seed,
                    "" if r.wall_ms is None else f"{r.wall_ms:.3f}", _fmt(r.truth_se), r.sample_hash, r.flag])


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    write_rows(rows, buf)
    return buf.getvalue()


def _opt_float(text: str) -> float | None:
    return float(text) if text.strip() else None


def read_rows(stream) -> list[Row]:
    reader = csv.DictReader(stream)
    if reader.fieldnames is None or tuple(reader.fieldnames[:len(COLUMNS)]) != COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}; expected {','.join(COLUMNS)}")
    rows = []
    for line in reader:
        try:
            rows.append(Row(
                model=line["model"], rep=int(line["rep"]), estimator=line["estimator"],
                estimate=_opt_float(line["estimate"]), truth=float(line["truth"]),
                converged=line["converged"].strip().lower() == "true",
                n_mcmc=int(line["n_mcmc"]), n_obs=int(line["n_obs"]), seed=int(line["seed"]),
                wall_ms=_opt_float(line["wall_ms"]), truth_se=_opt_float(line["truth_se"]),
                sample_hash=line["sample_hash"], flag=line["flag"],
            ))
        except (KeyError, ValueError) as exc:
            raise ValueError(f"bad CSV row at line {reader.line_num}: {exc}") from None
    return rows


def sample_hash(samples: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(samples, dtype=np.float64).tobytes()).hexdigest()[:16]


def _run_estimator(name: str, model: Model, samples, psi, rng: RngStream, cfg: ExperimentConfig,
                   fresh_rng: RngStream):
    """``(estimate or None, converged, flag)``."""
    if name in ("hybrid", "hybrid_leafmean"):
        hc = cfg.hybrid
        if name == "hybrid_leafmean":
            hc = HybridConfig(hc.tree, RepresentativeRule.LEAF_MEAN, hc.fresh_sample_count)
        est = hybrid_log_ml(samples, psi, hc, fresh_sampler=lambda k: model.sample_posterior(fresh_rng, k))
        flag = "" if est.diagnostics.coverage_q_hat is None else f"q_hat={est.diagnostics.coverage_q_hat:.4g}"
        return est.log_z, True, flag
    if name == "hme":
        return harmonic_mean(model.log_lik(samples)), True, ""
    if name == "came":
        res = came(model, samples, rng, cfg.came)
        return res.log_z, True, res.flag
    fn = bridge_sampling if name == "bse" else warp_bridge_sampling
    res = fn(model, samples, rng, cfg.bridge)
    return res.log_z, True, res.flag


def _model_for(cfg: ExperimentConfig, rep: int) -> tuple[Model, Truth]:
    spec = get_spec(cfg.model)
    data_rep = 0 if cfg.fixed_data else rep
    root = RngStream(cfg.seed, data_rep)
    try:
        model = spec.create(root.child(DATA), **cfg.build_params())
    except Exception as exc:
        raise ReplicationError(rep, "data generation", exc) from exc
    try:
        truth = model.truth(root.child(TRUTH))
    except Exception as exc:
        raise ReplicationError(rep, "truth", exc) from exc
    if not math.isfinite(truth.value):
        raise ReplicationError(rep, "truth", ValueError("non-finite truth"))
    return model, truth


def run_replication(cfg: ExperimentConfig, rep: int) -> list[Row]:
    model, truth = _model_for(cfg, rep)
    root = RngStream(cfg.seed, rep)
    try:
        samples = model.sample_posterior(root.child(POSTERIOR), cfg.n_mcmc)
        psi = model.psi(samples)
    except Exception as exc:
        raise ReplicationError(rep, "posterior sampling", exc) from exc
    digest = sample_hash(samples)
    n_obs = int(getattr(model, "n", 0))
    rows = []
    for name in cfg.estimators:
        rng = root.child(ESTIMATOR_KEYS[name])
        t0 = time.perf_counter()
        try:
            estimate, converged, flag = _run_estimator(name, model, samples, psi, rng, cfg,
                                                       root.child(FRESH))
        except BridgeNotConverged as exc:
            estimate, converged = None, False
            flag = f"not_converged(iterations={exc.iterations};last={exc.last_log_z:.6g})"
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            estimate, converged, flag = None, False, f"failed({type(exc).__name__}: {exc})"
        if estimate is not None and not math.isfinite(estimate):
            estimate, converged, flag = None, False, f"failed(non-finite estimate {estimate})"
        wall = (time.perf_counter() - t0) * 1000.0 if cfg.timing else None
        rows.append(Row(cfg.model, rep, name, estimate, truth.value, converged, cfg.n_mcmc, n_obs,
                        cfg.seed, wall, truth.se, digest, flag.replace(",", ";")))
    return rows


def _worker(args):
    cfg, rep = args
    return run_replication(cfg, rep)


def run_experiment(cfg: ExperimentConfig, jobs: int = 1, progress=None) -> list[Row]:
    """All replications; rows ordered by (rep, estimator order in the config)."""
    reps = range(cfg.reps)
    out: list[Row] = []
    if jobs <= 1:
        for rep in reps:
            out.extend(run_replication(cfg, rep))
            if progress:
                progress(rep)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for rep, rows in zip(reps, pool.map(_worker, [(cfg, r) for r in reps])):
                out.extend(rows)
                if progress:
                    progress(rep)
    order = {name: k for k, name in enumerate(cfg.estimators)}
    out.sort(key=lambda r: (r.rep, order[r.estimator]))
    return out
