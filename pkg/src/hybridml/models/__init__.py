"""Benchmark model zoo and a name-based registry for the harness."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

from ..graph import DecomposableGraph
from ..rng import RngStream
from .base import Model, Support, Truth, chib_identity_check
from .conjugate import ConjugateNormal, conjugate_normal
from .covariance import (DEFAULT_EDGES, HIWGraphical, IWCovariance, default_omega, hiw_graphical,
                         iw_covariance)
from .regression import (MeanFieldMvnIg, MvnIgRegression, RegressionData, TruncatedMvnRegression,
                         mvn_ig_meanfield, mvn_ig_regression, truncated_mvn_regression)


def _parse_matrix(text: str) -> np.ndarray:
    rows = [r for r in text.replace("\n", ";").split(";") if r.strip()]
    return np.array([[float(v) for v in r.replace(",", " ").split()] for r in rows])


def _parse_graph(text: str) -> DecomposableGraph:
    """An edge-list file path, or inline ``d: i-j i-j ...`` with 1-based vertices."""
    text = text.strip()
    if ":" not in text:
        return DecomposableGraph.load(Path(text))
    d, edges = text.split(":", 1)
    pairs = []
    for tok in edges.replace(",", " ").split():
        i, j = tok.split("-")
        pairs.append((int(i) - 1, int(j) - 1))
    return DecomposableGraph(int(d), tuple(pairs))


_PARSERS: dict[str, Callable[[str], Any]] = {
    "int": int,
    "float": float,
    "matrix": _parse_matrix,
    "graph": _parse_graph,
}


@dataclass(frozen=True)
class Param:
    name: str
    kind: str
    default: Any
    doc: str = ""

    def parse(self, text: str):
        try:
            return _PARSERS[self.kind](text)
        except Exception as exc:
            raise ValueError(f"bad value for {self.name} ({self.kind}): {text!r}") from exc


@dataclass(frozen=True)
class ModelSpec:
    name: str
    build: Callable[..., Model]
    params: tuple[Param, ...]
    doc: str

    def param(self, name: str) -> Param:
        for p in self.params:
            if p.name == name:
                return p
        raise KeyError(name)

    def parse_params(self, raw: dict[str, str]) -> dict[str, Any]:
        known = {p.name for p in self.params}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ValueError(f"unknown parameter(s) for {self.name}: {', '.join(unknown)}")
        return {k: self.param(k).parse(v) for k, v in raw.items()}

    def create(self, rng: RngStream, **params) -> Model:
        kwargs = {p.name: p.default for p in self.params}
        kwargs.update(params)
        return self.build(rng, **kwargs)


def _meanfield(rng, block_size, **kw):
    return mvn_ig_meanfield(mvn_ig_regression(rng, **kw), block_size)


def _hiw(rng, n, graph, delta, off_diagonal):
    if isinstance(graph, str):
        graph = _parse_graph(graph)
    return hiw_graphical(rng, n=n, graph=graph, delta=delta, Omega_true=default_omega(graph, off_diagonal))


_DEFAULT_GRAPH = "5: " + " ".join(f"{i}-{j}" for i, j in DEFAULT_EDGES)

REGISTRY: dict[str, ModelSpec] = {s.name: s for s in [
    ModelSpec("conjugate_normal", conjugate_normal, (
        Param("n", "int", 50, "observations"),
        Param("m0", "float", 0.0), Param("w0", "float", 0.05),
        Param("r0", "float", 3.0), Param("s0", "float", 3.0),
        Param("gen_mean", "float", 30.0), Param("gen_var", "float", 4.0),
    ), "normal data, normal/inverse-gamma prior on (mean, variance); u = (mu, s2)"),
    ModelSpec("mvn_ig_regression", mvn_ig_regression, (
        Param("n", "int", 100), Param("d", "int", 19, "covariates"),
        Param("a0", "float", 1.0), Param("b0", "float", 1.0),
        Param("sigma2_true", "float", 4.0),
    ), "linear regression, MVN-IG prior, beta_true ~ U[-10, 10]; u = (beta, s2)"),
    ModelSpec("mvn_ig_meanfield", _meanfield, (
        Param("n", "int", 100), Param("d", "int", 9, "covariates"),
        Param("block_size", "int", 3),
        Param("a0", "float", 1.0), Param("b0", "float", 1.0),
        Param("sigma2_true", "float", 4.0),
    ), "MVN-IG regression sampled from a block mean-field approximation"),
    ModelSpec("truncated_mvn_regression", truncated_mvn_regression, (
        Param("n", "int", 100), Param("d", "int", 20, "covariates"),
        Param("sigma2", "float", 4.0), Param("lam", "float", 0.25),
        Param("oracle_draws", "int", 200_000, "GHK draws for the truth when d > 3"),
    ), "known-variance regression, first-orthant truncated normal prior; u = beta"),
    ModelSpec("iw_covariance", iw_covariance, (
        Param("n", "int", 100), Param("d", "int", 4),
        Param("nu", "float", 5.0), Param("Lambda", "matrix", None, "default identity"),
        Param("Sigma_true", "matrix", None, "default: built-in 4x4 matrix"),
    ), "zero-mean Gaussian, inverse-Wishart prior; u = lower Cholesky factor of Sigma"),
    ModelSpec("hiw_graphical", _hiw, (
        Param("n", "int", 100),
        Param("graph", "graph", _DEFAULT_GRAPH, "edge-list path or 'd: i-j ...' (1-based)"),
        Param("delta", "float", 3.0),
        Param("off_diagonal", "float", 0.5, "edge entries of the true precision's Cholesky factor"),
    ), "decomposable Gaussian graphical model, HIW(delta, I) prior; u = free entries of chol(Omega)"),
]}


def get_spec(name: str) -> ModelSpec:
    try:
        return REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {', '.join(REGISTRY)}") from None


def describe_models() -> str:
    lines = []
    for spec in REGISTRY.values():
        lines.append(f"{spec.name}: {spec.doc}")
        for p in spec.params:
            default = "identity" if p.default is None and p.kind == "matrix" else p.default
            note = f"  # {p.doc}" if p.doc else ""
            lines.append(f"    {p.name} ({p.kind}) = {default}{note}")
    return "\n".join(lines)


__all__ = [
    "Model", "Support", "Truth", "chib_identity_check", "RegressionData",
    "ConjugateNormal", "MvnIgRegression", "MeanFieldMvnIg", "TruncatedMvnRegression",
    "IWCovariance", "HIWGraphical",
    "conjugate_normal", "mvn_ig_regression", "mvn_ig_meanfield", "truncated_mvn_regression",
    "iw_covariance", "hiw_graphical", "default_omega",
    "Param", "ModelSpec", "REGISTRY", "get_spec", "describe_models",
]
