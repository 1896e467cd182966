"""INI experiment files.

``[experiment]`` holds the run settings; a section named after the model
holds model parameters; optional ``[hybrid]``, ``[came]`` and ``[bridge]``
sections tune the estimators::

    [experiment]
    model = conjugate_normal
    n_obs = 50
    n_mcmc = 1000
    reps = 100
    seed = 2024
    estimators = hybrid, hme, came, bse

    [conjugate_normal]
    w0 = 0.05
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from ..baselines import BridgeConfig, CameConfig
from ..hybrid import HybridConfig
from ..models import get_spec
from ..partition import TreeConfig

ESTIMATORS = ("hybrid", "hybrid_leafmean", "hme", "came", "bse", "wbse")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    n_mcmc: int
    reps: int = 1
    seed: int = 0
    estimators: tuple[str, ...] = ("hybrid",)
    n_obs: int | None = None
    model_params: dict[str, Any] = field(default_factory=dict)
    output: str | None = None
    fixed_data: bool = False
    timing: bool = False
    hybrid: HybridConfig = field(default_factory=HybridConfig)
    came: CameConfig = field(default_factory=CameConfig)
    bridge: BridgeConfig = field(default_factory=BridgeConfig)

    def __post_init__(self):
        try:
            get_spec(self.model)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        if self.n_mcmc < 2:
            raise ConfigError("n_mcmc must be >= 2")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        if not self.estimators:
            raise ConfigError("estimator list is empty")
        for name in self.estimators:
            if name not in ESTIMATORS:
                raise ConfigError(f"unknown estimator {name!r}; choose from {', '.join(ESTIMATORS)}")
        if len(set(self.estimators)) != len(self.estimators):
            raise ConfigError("estimator listed twice")

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        try:
            return replace(self, **kw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    def build_params(self) -> dict[str, Any]:
        params = dict(self.model_params)
        if self.n_obs is not None:
            params["n"] = self.n_obs
        return params


def _take(section, key, conv, default):
    if key not in section:
        return default
    raw = section[key]
    try:
        return conv(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(text)


def _check_keys(section, allowed, name):
    extra = sorted(set(section) - set(allowed))
    if extra:
        raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(extra)}")


def parse_config(text: str, base_dir: Path | None = None) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    if "experiment" not in cp:
        raise ConfigError("missing [experiment] section")
    ex = cp["experiment"]
    _check_keys(ex, ("model", "n_obs", "n_mcmc", "reps", "seed", "estimators", "output",
                     "fixed_data", "timing"), "experiment")
    if "model" not in ex or "n_mcmc" not in ex:
        raise ConfigError("[experiment] needs model and n_mcmc")
    model = ex["model"].strip()
    try:
        spec = get_spec(model)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    known = {"experiment", "hybrid", "came", "bridge", model}
    stray = [s for s in cp.sections() if s not in known]
    if stray:
        raise ConfigError(f"unexpected section(s): {', '.join(stray)}")

    params: dict[str, Any] = {}
    if model in cp:
        raw = dict(cp[model])
        if "graph" in raw and ":" not in raw["graph"] and base_dir is not None:
            raw["graph"] = str((base_dir / raw["graph"]).resolve())
        try:
            params = spec.parse_params(raw)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if "n" in params and "n_obs" in ex:
        raise ConfigError("give the observation count once, as n_obs")

    hybrid = HybridConfig()
    if "hybrid" in cp:
        h = cp["hybrid"]
        _check_keys(h, ("min_split", "min_bucket", "cp", "max_depth", "fresh_sample_count"), "hybrid")
        try:
            tree = TreeConfig(_take(h, "min_split", int, 20), _take(h, "min_bucket", int, 7),
                              _take(h, "cp", float, 0.01), _take(h, "max_depth", int, 30))
            hybrid = HybridConfig(tree, fresh_sample_count=_take(h, "fresh_sample_count", int, 0))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    came = CameConfig()
    if "came" in cp:
        c = cp["came"]
        _check_keys(c, ("alpha", "importance_draw_count"), "came")
        try:
            came = CameConfig(_take(c, "importance_draw_count", int, None), _take(c, "alpha", float, 0.005))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    bridge = BridgeConfig()
    if "bridge" in cp:
        b = cp["bridge"]
        _check_keys(b, ("max_iterations", "tol", "proposal_draw_count"), "bridge")
        try:
            bridge = BridgeConfig(_take(b, "max_iterations", int, 500), _take(b, "tol", float, 1e-8),
                                  _take(b, "proposal_draw_count", int, None))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    estimators = tuple(t.strip() for t in ex.get("estimators", "hybrid").split(",") if t.strip())
    output = ex.get("output")
    return ExperimentConfig(
        model=model,
        n_mcmc=_take(ex, "n_mcmc", int, None),
        reps=_take(ex, "reps", int, 1),
        seed=_take(ex, "seed", int, 0),
        estimators=estimators,
        n_obs=_take(ex, "n_obs", int, None),
        model_params=params,
        output=output,
        fixed_data=_take(ex, "fixed_data", _bool, False),
        timing=_take(ex, "timing", _bool, False),
        hybrid=hybrid,
        came=came,
        bridge=bridge,
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, base_dir=path.parent)
