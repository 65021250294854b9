"""Experiment configuration: JSON documents parsed into dataclasses.

Every validation failure raises :class:`~capx.errors.ConfigError` carrying
the dotted path of the offending field.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field

from .compound import CompoundModel, McConfig, Method
from .errors import CapxError, ConfigError
from .frequency import NegativeBinomial, Poisson
from .severity import HeavyWeibull, InverseGaussian, LogNormal, Pareto, Regime
from .spectral import SpectralWeight

# regulatory quantile grid of the Poisson / log-normal case study
DEFAULT_ALPHA_GRID = (0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 0.99, 0.995, 0.9995)
MEASURES = ("tail", "var", "es", "srm")
METHODS = tuple(m.value for m in Method)

_SEVERITIES = {
    "lognormal": (LogNormal, ("mu", "sigma")),
    "inverse_gaussian": (InverseGaussian, ("mu_tilde", "lambda_tilde")),
    "pareto": (Pareto, ("c", "alpha")),
    "heavy_weibull": (HeavyWeibull, ("lambda_w", "alpha_w")),
}
_FREQUENCIES = {
    "poisson": (Poisson, ("lambda",)),
    "negative_binomial": (NegativeBinomial, ("r", "p")),
}
_TOP_KEYS = {"model", "alpha_grid", "x_grid", "measures", "weight", "mc", "methods",
             "output_path", "diagnostics"}
_MC_DEFAULTS = {"n_samples": 1_000_000, "seed": 42, "n_workers": 1, "ci_level": 0.99}


@dataclass(frozen=True)
class ExperimentConfig:
    model: CompoundModel
    alpha_grid: tuple = DEFAULT_ALPHA_GRID
    x_grid: tuple = ()
    measures: tuple = ("var",)
    weight: SpectralWeight = field(default_factory=SpectralWeight.flat)
    mc: McConfig = field(default_factory=McConfig)
    methods: tuple = ("monte_carlo", "sla1", "sla2")
    output_path: str | None = None
    diagnostic_grid: tuple = ()
    raw: dict = field(default_factory=dict, compare=False, repr=False)


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError("expected a finite number", path)
    return float(value)


def _integer(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError("expected an integer", path)
    return value


def _object(value, path):
    if not isinstance(value, dict):
        raise ConfigError("expected an object", path)
    return value


def _parametric(spec, table, path):
    spec = _object(spec, path)
    kind = spec.get("kind")
    if kind not in table:
        raise ConfigError(f"kind must be one of {sorted(table)}", f"{path}.kind")
    cls, names = table[kind]
    extra = set(spec) - {"kind", *names}
    if extra:
        raise ConfigError(f"unknown field(s) {sorted(extra)}", path)
    args = []
    for name in names:
        if name not in spec:
            raise ConfigError("missing parameter", f"{path}.{name}")
        args.append(_number(spec[name], f"{path}.{name}"))
    try:
        return cls(*args)
    except CapxError as exc:
        raise ConfigError(str(exc), path) from exc


def parse_model(spec, path="model") -> CompoundModel:
    spec = _object(spec, path)
    extra = set(spec) - {"frequency", "severity"}
    if extra:
        raise ConfigError(f"unknown field(s) {sorted(extra)}", path)
    for key in ("frequency", "severity"):
        if key not in spec:
            raise ConfigError("missing", f"{path}.{key}")
    return CompoundModel(_parametric(spec["frequency"], _FREQUENCIES, f"{path}.frequency"),
                         _parametric(spec["severity"], _SEVERITIES, f"{path}.severity"))


def _grid(values, path, unit_interval):
    if not isinstance(values, list) or not values:
        raise ConfigError("expected a non-empty list", path)
    out = tuple(_number(v, f"{path}[{i}]") for i, v in enumerate(values))
    for i, v in enumerate(out):
        if unit_interval and not (0.0 < v < 1.0):
            raise ConfigError("must lie in (0, 1)", f"{path}[{i}]")
        if not unit_interval and v < 0:
            raise ConfigError("must be nonnegative", f"{path}[{i}]")
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ConfigError("must be sorted ascending without repeats", path)
    return out


def _tags(values, allowed, path):
    if not isinstance(values, list) or not values:
        raise ConfigError("expected a non-empty list", path)
    for i, v in enumerate(values):
        if v not in allowed:
            raise ConfigError(f"must be one of {list(allowed)}", f"{path}[{i}]")
    # canonical order, duplicates dropped
    return tuple(a for a in allowed if a in values)


def _weight(spec, path="weight"):
    spec = _object(spec, path)
    kind = spec.get("kind", "flat")
    allowed = {"flat": {"kind"}, "cara": {"kind", "xi"}}.get(kind)
    if allowed is None:
        raise ConfigError("kind must be 'flat' or 'cara'", f"{path}.kind")
    if set(spec) - allowed:
        raise ConfigError(f"unknown field(s) {sorted(set(spec) - allowed)}", path)
    if kind == "flat":
        return SpectralWeight.flat()
    xi = _number(spec.get("xi"), f"{path}.xi")
    try:
        return SpectralWeight.cara(xi)
    except CapxError as exc:
        raise ConfigError(str(exc), f"{path}.xi") from exc


def _mc(spec, path="mc"):
    spec = {**_MC_DEFAULTS, **_object(spec, path)}
    extra = set(spec) - set(_MC_DEFAULTS)
    if extra:
        raise ConfigError(f"unknown field(s) {sorted(extra)}", path)
    args = [_integer(spec["n_samples"], f"{path}.n_samples"),
            _integer(spec["seed"], f"{path}.seed"),
            _integer(spec["n_workers"], f"{path}.n_workers"),
            _number(spec["ci_level"], f"{path}.ci_level")]
    try:
        return McConfig(*args)
    except CapxError as exc:
        raise ConfigError(str(exc), path) from exc


def parse_config(doc: dict) -> ExperimentConfig:
    doc = _object(doc, "$")
    extra = set(doc) - _TOP_KEYS
    if extra:
        raise ConfigError(f"unknown field(s) {sorted(extra)}", "$")
    if "model" not in doc:
        raise ConfigError("missing", "model")
    model = parse_model(doc["model"])
    measures = _tags(doc.get("measures", ["var"]), MEASURES, "measures")
    methods = _tags(doc.get("methods", ["monte_carlo", "sla1", "sla2"]), METHODS, "methods")
    alpha_grid = _grid(doc.get("alpha_grid", list(DEFAULT_ALPHA_GRID)), "alpha_grid", True)
    x_grid = ()
    if "x_grid" in doc:
        x_grid = _grid(doc["x_grid"], "x_grid", False)
    elif "tail" in measures:
        raise ConfigError("required when measures include 'tail'", "x_grid")

    if "exact_series" in methods and not (isinstance(model.frequency, Poisson)
                                          and isinstance(model.severity, InverseGaussian)):
        raise ConfigError("exact_series needs Poisson frequency and inverse_gaussian severity",
                          "methods")
    sla = {"sla1", "sla2"} & set(methods)
    if sla and {"es", "srm"} & set(measures):
        info = model.severity.tail_info()
        if info.regime != Regime.REGULARLY_VARYING:
            raise ConfigError("es/srm with sla methods need a regularly varying severity",
                              "measures")

    diag = ()
    if "diagnostics" in doc:
        d = _object(doc["diagnostics"], "diagnostics")
        if set(d) - {"x_grid"}:
            raise ConfigError(f"unknown field(s) {sorted(set(d) - {'x_grid'})}", "diagnostics")
        if "x_grid" in d:
            diag = _grid(d["x_grid"], "diagnostics.x_grid", False)

    out = doc.get("output_path")
    if out is not None and not isinstance(out, str):
        raise ConfigError("expected a string", "output_path")
    return ExperimentConfig(model=model, alpha_grid=alpha_grid, x_grid=x_grid, measures=measures,
                            weight=_weight(doc.get("weight", {"kind": "flat"})),
                            mc=_mc(doc.get("mc", {})), methods=methods, output_path=out,
                            diagnostic_grid=diag, raw=copy.deepcopy(doc))


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", "$") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", "$") from exc
    return parse_config(doc)


def with_overrides(doc: dict, **overrides) -> dict:
    """Copy of ``doc`` with dotted-path overrides applied, e.g. ``{"mc.seed": 7}``."""
    doc = copy.deepcopy(doc)
    for dotted, value in overrides.items():
        set_path(doc, dotted, value, create=True)
    return doc


def set_path(doc, dotted, value, create=False):
    keys = dotted.split(".")
    node = doc
    for i, key in enumerate(keys[:-1]):
        if not isinstance(node, dict) or (key not in node and not create):
            raise ConfigError("path does not resolve", ".".join(keys[:i + 1]))
        node = node.setdefault(key, {})
    if not isinstance(node, dict) or (keys[-1] not in node and not create):
        raise ConfigError("path does not resolve", dotted)
    node[keys[-1]] = value
