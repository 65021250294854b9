"""Experiment runner: evaluates every (level, method, measure) cell of a config.

CSV output has the fixed column order ``alpha, measure, method, value,
ci_low, ci_high, rel_error, validity`` with 12 significant digits. For the
``tail`` measure the first column carries the loss threshold ``x`` rather
than a confidence level.
"""

from __future__ import annotations

import copy
import csv
import io
from dataclasses import dataclass

from . import compound, sla
from .compound import Estimate, Method
from .config import ExperimentConfig, parse_config, set_path
from .diagnostics import big_jump_check, default_grid, rv_index_estimate, subexp_ratio
from .errors import ConfigError
from .severity import Pareto, Regime

__all__ = ["ResultRow", "run_experiment", "sensitivity_sweep", "diagnose",
           "write_rows", "write_sweep", "write_diagnostics", "COLUMNS"]

COLUMNS = ("alpha", "measure", "method", "value", "ci_low", "ci_high", "rel_error", "validity")


@dataclass(frozen=True)
class ResultRow:
    alpha: float
    measure: str
    method: str
    estimate: Estimate
    rel_error: float | None = None
    validity: bool = True


def _fmt(v):
    return "" if v is None else format(float(v), ".12g")


def _row_fields(row):
    e = row.estimate
    return [_fmt(row.alpha), row.measure, row.method, _fmt(e.value), _fmt(e.ci_low),
            _fmt(e.ci_high), _fmt(row.rel_error), "true" if row.validity else "false"]


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_rows(rows, fh):
    w = _writer(fh)
    w.writerow(COLUMNS)
    for row in rows:
        w.writerow(_row_fields(row))


def _approx(value, method, valid=True):
    return Estimate(float(value), method), valid


def _cell(cfg: ExperimentConfig, sample, measure, point, method):
    """``(Estimate, validity)`` for one cell, or ``None`` if the method does not cover the measure."""
    model = cfg.model
    if method == "monte_carlo":
        if measure == "tail":
            return sample.tail(point), True
        if measure == "var":
            return sample.var(point), True
        if measure == "es":
            return sample.es(point), True
        return sample.srm(point, cfg.weight), True
    if method == "exact_series":
        f, s = model.frequency, model.severity
        if measure == "tail":
            return _approx(compound.exact_tail_poisson_ig(f.lam, s.mu_tilde, s.lambda_tilde, point),
                           Method.EXACT_SERIES)
        if measure == "var":
            return _approx(compound.exact_var_poisson_ig(f.lam, s.mu_tilde, s.lambda_tilde, point),
                           Method.EXACT_SERIES)
        return None
    m = Method(method)
    if measure == "tail":
        fn = sla.sla1_tail if m == Method.SLA1 else sla.sla2_tail
        approx = fn(model, point)
        return _approx(approx.value, m, approx.valid)
    if measure == "var":
        fn = sla.sla1_var if m == Method.SLA1 else sla.sla2_var
        return _approx(fn(model, point), m)
    if m == Method.SLA1:
        if measure == "es":
            return _approx(sla.sla1_es(model, point), m)
        return _approx(sla.sla1_srm(model, point, cfg.weight), m)
    aux = sla.SecondOrderAux.exact_pareto(model.severity)
    if measure == "es":
        return _approx(sla.sla2_es(model, point, aux), m)
    return _approx(sla.sla2_srm(model, point, cfg.weight, aux), m)


def _has_alternate_form(model):
    info = model.severity.tail_info()
    return isinstance(model.severity, Pareto) and info.regime == Regime.REGULARLY_VARYING \
        and 0 < info.rho < 1


def run_experiment(cfg: ExperimentConfig, write=True):
    """Evaluate every requested cell; reference is exact_series when available, else Monte Carlo.

    Writes the CSV to ``cfg.output_path`` when ``write`` is set and a path is configured.
    """
    sample = None
    if "monte_carlo" in cfg.methods:
        sample = compound.annual_loss_sample(cfg.model, cfg.mc)
    rows = []
    for measure in cfg.measures:
        points = cfg.x_grid if measure == "tail" else cfg.alpha_grid
        for point in points:
            cells = []
            for method in cfg.methods:
                out = _cell(cfg, sample, measure, point, method)
                if out is not None:
                    cells.append((method, *out))
            if measure == "tail" and "sla2" in cfg.methods and _has_alternate_form(cfg.model):
                approx = sla.sla2_tail_alt(cfg.model, point)
                cells.append(("sla2_alt", Estimate(approx.value, Method.SLA2), approx.valid))
            ref = next((e.value for m, e, _ in cells if m == "exact_series"), None)
            if ref is None:
                ref = next((e.value for m, e, _ in cells if m == "monte_carlo"), None)
            for method, est, valid in cells:
                rel = None
                if ref is not None:
                    rel = (est.value - ref) / ref if ref != 0 else float("nan")
                rows.append(ResultRow(point, measure, method, est, rel, valid))
    if write and cfg.output_path:
        with open(cfg.output_path, "w", newline="") as fh:
            write_rows(rows, fh)
    return rows


def sensitivity_sweep(cfg: ExperimentConfig, parameter: str, values, write=True):
    """Re-run the experiment for each value of the model parameter at ``parameter``.

    Returns a list of ``(parameter_value, rows)`` pairs.
    """
    if not values:
        raise ConfigError("sweep needs at least one value", "values")
    if not parameter.startswith("model."):
        raise ConfigError("sweep parameter must resolve inside the model spec", parameter)
    results = []
    for v in values:
        doc = copy.deepcopy(cfg.raw)
        set_path(doc, parameter, v)
        sub = parse_config(doc)
        results.append((v, run_experiment(sub, write=False)))
    if write and cfg.output_path:
        with open(cfg.output_path, "w", newline="") as fh:
            write_sweep(parameter, results, fh)
    return results


def write_sweep(parameter, results, fh):
    w = _writer(fh)
    w.writerow(("parameter", "parameter_value", *COLUMNS))
    for value, rows in results:
        for row in rows:
            w.writerow([parameter, _fmt(value), *_row_fields(row)])


def diagnose(cfg: ExperimentConfig, write=True):
    """Run the rv-index, subexponential-ratio and big-jump diagnostics on the config's model."""
    sev = cfg.model.severity
    grid = cfg.diagnostic_grid or tuple(default_grid(sev))
    reports = [rv_index_estimate(sev, grid), subexp_ratio(sev, grid),
               *big_jump_check(cfg.model, grid, cfg.mc)]
    if write and cfg.output_path:
        with open(cfg.output_path, "w", newline="") as fh:
            write_diagnostics(reports, fh)
    return reports


def write_diagnostics(reports, fh):
    w = _writer(fh)
    w.writerow(("diagnostic", "x", "value", "limit_target", "converged", "max_deviation_at_tail"))
    for r in reports:
        for x, v in r.grid:
            w.writerow([r.name, _fmt(x), _fmt(v), _fmt(r.limit_target),
                        "true" if r.converged else "false", _fmt(r.max_deviation_at_tail)])


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    write_rows(rows, buf)
    return buf.getvalue()
