"""End-to-end experiment runs with machine-readable reports and gates.

Three headline verifications: the entropy/exponent inequality (with the cat
map as the equality witness), exponential decay of the mixing diagnostics
against the exponent integral, and at-most-linear growth of the squared
log-Sobolev norm.  Gates check inequality directions with 3-sigma Monte
Carlo slack; observed ratios involving the theory's non-explicit constants
are reported and regression-baselined, never gated on target values.
"""

import json
import os
import tempfile
from dataclasses import dataclass, field as dataclass_field

import numpy as np
from scipy import stats

from .config import Config, default_radii, render_config
from .diagnostics import (
    DiagnosticSeries,
    Partition,
    entropy_rate,
    h_minus_one,
    log_sobolev,
    mixing_scale,
    nu_log_bound,
)
from .errors import ErgomixError
from .fields import VelocityFieldSpec, grad_l1_time_average, make_field
from .lyapunov import ensemble_spectrum, top_exponent_bound_gap
from .maps import make_map
from .scalar import make_initial, scalar_series
from .seeding import child_seed

RATE_TOLERANCE = 1e-9  # fitted rates this close to zero count as non-negative
GATE_EPSILON = 1e-12  # absolute slack so exact-zero cases survive float dust
STABILITY_FRACTION = 0.2
TREND_ALPHA = 0.05


def fit_exponential_rate(times, values, burn_in: float = 0.0) -> float:
    """Least-squares slope of -log(values) against time after burn_in."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = times >= burn_in
    if np.count_nonzero(mask) < 4:
        raise ErgomixError(
            f"need at least 4 points after burn_in={burn_in}, got {np.count_nonzero(mask)}"
        )
    if np.any(values[mask] <= 0.0):
        raise ErgomixError("values must be positive for a log-linear rate fit")
    return float(np.polyfit(times[mask], -np.log(values[mask]), 1)[0])


def fit_linear_slope(times, values, burn_in: float = 0.0) -> float:
    """Least-squares slope of values against time after burn_in."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = times >= burn_in
    if np.count_nonzero(mask) < 4:
        raise ErgomixError(
            f"need at least 4 points after burn_in={burn_in}, got {np.count_nonzero(mask)}"
        )
    return float(np.polyfit(times[mask], values[mask], 1)[0])


def growth_trend_pvalue(times, values) -> float:
    """One-sided p-value for a positive linear trend over the whole series.

    Small p-values mean statistically significant growth; the boundedness
    gates require p >= 0.05 (no detectable upward trend).
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(values) < 4 or np.ptp(values) < 1e-14:
        return 1.0
    return float(stats.linregress(times, values, alternative="greater").pvalue)


def _ratio(numerator: float, denominator: float) -> float:
    if abs(denominator) > 1e-12:
        return numerator / denominator
    return 0.0 if abs(numerator) <= 1e-12 else float("inf")


@dataclass
class RuelleReport:
    entropy_estimate: float
    entropy_bias_bound: float
    sum_positive_exponents: float
    stderr: float
    nu_log_bound_value: float
    passed: bool
    details: dict = dataclass_field(default_factory=dict)

    def to_json_dict(self):
        payload = {
            "entropy_estimate": self.entropy_estimate,
            "entropy_bias_bound": self.entropy_bias_bound,
            "sum_positive_exponents": self.sum_positive_exponents,
            "stderr": self.stderr,
            "nu_log_bound_value": self.nu_log_bound_value,
            "pass": self.passed,
        }
        payload.update(self.details)
        return payload

    def summary(self):
        return (
            f"ruelle: entropy={self.entropy_estimate:.4f} (bias<={self.entropy_bias_bound:.4f}) "
            f"sum_positive={self.sum_positive_exponents:.4f} pass={self.passed}"
        )


@dataclass
class MixingReport:
    series: DiagnosticSeries
    fitted_h_minus_one_rate: float
    fitted_log_sobolev_slope: float
    lambda_max_integral: float
    grad_l1_average: float
    ratio_mixing: float
    ratio_regularity: float
    pass_direction: bool
    fitted_mixing_scale_rate: float = 0.0
    details: dict = dataclass_field(default_factory=dict)

    def to_json_dict(self):
        payload = {
            "series": {
                "times": self.series.times,
                "h_minus_one": self.series.h_minus_one,
                "log_sobolev": self.series.log_sobolev,
                "mixing_scale": self.series.mixing_scale,
                "metadata": self.series.metadata,
            },
            "fitted_h_minus_one_rate": self.fitted_h_minus_one_rate,
            "fitted_log_sobolev_slope": self.fitted_log_sobolev_slope,
            "lambda_max_integral": self.lambda_max_integral,
            "grad_l1_average": self.grad_l1_average,
            "ratio_mixing": self.ratio_mixing,
            "ratio_regularity": self.ratio_regularity,
            "pass_direction": self.pass_direction,
            "fitted_mixing_scale_rate": self.fitted_mixing_scale_rate,
        }
        payload.update(self.details)
        return payload

    def summary(self):
        return (
            f"mixing: beta={self.fitted_h_minus_one_rate:.4f} "
            f"lsq_slope={self.fitted_log_sobolev_slope:.4f} "
            f"lambda_int={self.lambda_max_integral:.4f} pass={self.pass_direction}"
        )


def _build_map(config: Config):
    if config.map.kind == "time_one_flow":
        field = make_field(_field_spec(config))
        return make_map("time_one_flow", field=field, steps=config.steps_per_unit)
    return make_map(config.map.kind)


def _field_spec(config: Config) -> VelocityFieldSpec:
    block = config.field
    return VelocityFieldSpec(
        kind=block.kind,
        amplitude=block.amplitude,
        phases=tuple(block.phases),
        wavenumber=block.wavenumber,
    )


def run_lyapunov(config: Config):
    """Ensemble spectrum of the configured map, plus the gradient bound gap."""
    map_ = _build_map(config)
    report = ensemble_spectrum(
        map_, config.samples, config.n, child_seed(config.seed, "lyapunov")
    )
    payload = report.to_json_dict()
    sum_zero = abs(float(np.sum(report.mean_exponents)))
    passed = sum_zero <= 1e-3 * 2  # d = 2 per the incompressible-sum contract
    payload["exponent_sum"] = float(np.sum(report.mean_exponents))
    if config.map.kind == "time_one_flow":
        field = make_field(_field_spec(config))
        gap = top_exponent_bound_gap(field, report)
        payload["grad_l1_average"] = grad_l1_time_average(field)
        payload["top_exponent_bound_gap"] = gap
        passed = passed and gap >= -3.0 * float(report.stderr[0])
    passed = bool(passed)
    payload["pass"] = passed
    return payload, passed, None


def run_ruelle(config: Config) -> RuelleReport:
    """Entropy-rate vs positive-exponent-sum verification on one map."""
    map_ = _build_map(config)
    partition = Partition(config.level)
    estimate, bias_bound = entropy_rate(
        map_, partition, config.n, config.samples, child_seed(config.seed, "entropy")
    )
    nu_value = nu_log_bound(
        map_, partition, config.probes_per_cell, child_seed(config.seed, "nu")
    )
    lyap = ensemble_spectrum(
        map_, config.lyapunov_samples, config.lyapunov_n, child_seed(config.seed, "lyapunov")
    )
    stderr = lyap.sum_positive_stderr()
    passed = estimate - bias_bound <= lyap.sum_positive + 3.0 * stderr + GATE_EPSILON
    return RuelleReport(
        entropy_estimate=estimate,
        entropy_bias_bound=bias_bound,
        sum_positive_exponents=lyap.sum_positive,
        stderr=stderr,
        nu_log_bound_value=nu_value,
        passed=passed,
        details={
            "map_kind": config.map.kind,
            "partition_level": config.level,
            "n": config.n,
            "samples": config.samples,
            "lambda_max_integral": lyap.lambda_max_integral,
            "seed": config.seed,
        },
    )


def _series_pipeline(config: Config, resolution: int):
    """Evolve the scalar and collect the diagnostic series at one resolution."""
    field = make_field(_field_spec(config))
    datum = make_initial(
        config.datum.kind, wavevector=config.datum.wavevector, level=config.datum.level
    )
    radii = config.radii if config.radii else default_radii(resolution)
    series = DiagnosticSeries(
        metadata={
            "resolution": resolution,
            "kappa": config.kappa,
            "radii": list(radii),
            "field": _field_spec(config).__dict__ | {"phases": list(config.field.phases)},
            "datum": datum.metadata(),
            "steps_per_unit": config.steps_per_unit,
        }
    )
    l2_values = []
    # one offset sample shared by the whole series: with common random
    # offsets the time differences reflect the transport, not re-sampling
    offset_seed = child_seed(config.seed, "log_sobolev", resolution)
    for grid in scalar_series(field, datum, config.horizon, resolution, config.steps_per_unit):
        h1 = h_minus_one(grid)
        lsq = log_sobolev(grid, config.shell_samples, offset_seed)
        mix = mixing_scale(grid, config.kappa, radii)
        series.append(grid.time, h1, lsq, mix)
        l2_values.append(grid.l2_norm())
    series.metadata["l2_norm"] = l2_values
    return series


def _interpolation_ratio_series(series: DiagnosticSeries):
    """Observed constant in the L2 / H^-1 / log-Sobolev interpolation bound."""
    ratios = []
    for h1, lsq, l2 in zip(series.h_minus_one, series.log_sobolev, series.metadata["l2_norm"]):
        lhs = float(np.log(2.0 + _ratio(l2, h1))) * l2 * l2
        ratios.append(_ratio(lhs, lsq))
    return ratios


def _mixing_report(config: Config, series: DiagnosticSeries) -> MixingReport:
    burn_in = config.burn_in_fraction * config.horizon
    times = series.times
    beta = fit_exponential_rate(times, series.h_minus_one, burn_in)
    lsq_slope = fit_linear_slope(times, series.log_sobolev, burn_in)
    mix_rate = fit_exponential_rate(times, series.mixing_scale, burn_in)
    field = make_field(_field_spec(config))
    lyap = ensemble_spectrum(
        make_map("time_one_flow", field=field, steps=config.steps_per_unit),
        config.lyapunov_samples,
        config.lyapunov_n,
        child_seed(config.seed, "lyapunov"),
    )
    grad_avg = grad_l1_time_average(field)
    c_obs = _interpolation_ratio_series(series)
    trend_p = growth_trend_pvalue(times, c_obs)
    ratio_mixing = _ratio(beta, lyap.lambda_max_integral)
    ratio_regularity = _ratio(lsq_slope, lyap.lambda_max_integral)
    pass_direction = bool(
        beta >= -RATE_TOLERANCE
        and lsq_slope >= -RATE_TOLERANCE
        and mix_rate >= -RATE_TOLERANCE
        and np.isfinite(ratio_mixing)
        and np.isfinite(ratio_regularity)
    )
    return MixingReport(
        series=series,
        fitted_h_minus_one_rate=beta,
        fitted_log_sobolev_slope=lsq_slope,
        lambda_max_integral=lyap.lambda_max_integral,
        grad_l1_average=grad_avg,
        ratio_mixing=ratio_mixing,
        ratio_regularity=ratio_regularity,
        pass_direction=pass_direction,
        fitted_mixing_scale_rate=mix_rate,
        details={
            "burn_in": burn_in,
            "fit_window": [burn_in, float(config.horizon)],
            "interpolation_ratio": c_obs,
            "interpolation_trend_pvalue": trend_p,
            "lambda_stderr": float(lyap.stderr[0]),
            "seed": config.seed,
        },
    )


def run_mixing(config: Config) -> MixingReport:
    """Mixing-direction verification at the configured resolution."""
    series = _series_pipeline(config, config.resolution)
    return _mixing_report(config, series)


def run_regularity(config: Config) -> MixingReport:
    """Regularity-slope verification, with a grid-doubling stability check."""
    report = run_mixing(config)
    series_double = _series_pipeline(config, 2 * config.resolution)
    burn_in = config.burn_in_fraction * config.horizon
    slope_double = fit_linear_slope(series_double.times, series_double.log_sobolev, burn_in)
    slope = report.fitted_log_sobolev_slope
    scale = max(abs(slope), abs(slope_double), 1e-12)
    stable = abs(slope - slope_double) <= STABILITY_FRACTION * scale
    report.details["log_sobolev_slope_double_resolution"] = slope_double
    report.details["slope_stability_fraction"] = abs(slope - slope_double) / scale
    report.pass_direction = bool(np.isfinite(slope) and slope >= -RATE_TOLERANCE and stable)
    return report


def run_experiment(config: Config):
    """Dispatch on config.experiment; returns (payload, passed, series or None)."""
    if config.experiment == "lyapunov":
        return run_lyapunov(config)
    if config.experiment == "ruelle":
        report = run_ruelle(config)
        return report.to_json_dict(), report.passed, None
    if config.experiment == "mixing":
        report = run_mixing(config)
        return report.to_json_dict(), report.pass_direction, report.series
    if config.experiment == "regularity":
        report = run_regularity(config)
        return report.to_json_dict(), report.pass_direction, report.series
    raise ErgomixError(f"experiment {config.experiment!r} is not runnable here")


def write_json_atomic(payload, path):
    """Serialize to a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    descriptor, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(descriptor, "w") as handle:
            json.dump(payload, handle, indent=2, sort_keys=True)
            handle.write("\n")
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def write_series_csv_atomic(series: DiagnosticSeries, path):
    """CSV with header t,h_minus_one,log_sobolev,mixing_scale; atomic rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    descriptor, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(descriptor, "w") as handle:
            handle.write("t,h_minus_one,log_sobolev,mixing_scale\n")
            for row in zip(series.times, series.h_minus_one, series.log_sobolev, series.mixing_scale):
                handle.write(",".join(repr(v) for v in row) + "\n")
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def write_text_atomic(text, path):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    descriptor, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(descriptor, "w") as handle:
            handle.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
