"""Experiment runner: sampling, noise, replicates, exponent fits, reports.

Two experiments are provided.  The variance experiment evaluates V (both
routes), V1, V2 and the predicted small-lambda envelope over replicate draws
of X for each sample size.  The inconsistency experiment fits minimum-norm
interpolants to noisy data over a grid of sample sizes, measures the
gamma-norm error exactly via coefficients, and compares the fitted growth
exponent of the mean error with the predicted one.

Every random stream is a pure function of (seed, n, replicate), so a fixed
config reproduces every output file byte for byte.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .fitting import fit_loglog_slope
from .kernels import SpectralKernel
from .operators import (
    build_operator_model,
    v1_lambda,
    v2_lambda,
    v_lambda_coefficient_route,
    v_lambda_gram_route,
)
from .solvers import SampleSet, gamma_error_sq, min_norm_fit
from .spectra import make_power_law_spectrum, theoretical_exponent

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExperimentResult",
    "sample_inputs",
    "make_responses",
    "replicate_rng",
    "run_variance_experiment",
    "run_inconsistency_experiment",
    "fit_loglog_slope",
]

MAX_FAILURE_FRACTION = 0.2


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one experiment run."""

    beta: float
    gamma: float
    sigma: float = 1.0
    zeta: float = 0.0
    basis: str = "cosine_unit_interval"
    truncation: int = 4096
    n_grid: tuple[int, ...] = (64, 128, 256, 512, 1024)
    replicates: int = 50
    lambda_grid: tuple[float, ...] = ()
    seed: int = 0
    f_star: str = "zero"  # "zero" or "single_mode"
    f_star_b1: float = 0.0
    output_dir: str = "."

    def __post_init__(self):
        if self.beta <= 1:
            raise ConfigError("beta must exceed 1")
        if not 0 <= self.gamma < 1:
            raise ConfigError("gamma must lie in [0, 1)")
        if self.sigma <= 0:
            raise ConfigError("sigma must be positive")
        if len(self.n_grid) == 0 or any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ConfigError("n_grid must be non-empty and strictly increasing")
        if any(n < 1 for n in self.n_grid):
            raise ConfigError("sample sizes must be positive")
        if self.replicates < 1:
            raise ConfigError("replicates must be at least 1")
        if self.f_star not in ("zero", "single_mode"):
            raise ConfigError("f_star must be 'zero' or 'single_mode'")
        if any(l <= 0 for l in self.lambda_grid):
            raise ConfigError("lambda grid entries must be positive")

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config {path}: {err}") from err
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("n_grid", "lambda_grid"):
            if key in raw:
                raw[key] = tuple(raw[key])
        try:
            return cls(**raw)
        except TypeError as err:
            raise ConfigError(str(err)) from err

    def build_kernel(self) -> SpectralKernel:
        spec = make_power_law_spectrum(self.beta, self.zeta, self.truncation)
        return SpectralKernel(spectrum=spec, basis=self.basis)

    def f_star_coeffs(self, kernel: SpectralKernel) -> np.ndarray:
        if self.f_star == "zero":
            return np.zeros(1)
        return np.array([self.f_star_b1])


@dataclass
class ExperimentResult:
    """Aggregated errors, fitted exponent, and the theoretical comparison."""

    n_values: list[int]
    mean_errors: list[float]
    stderr_errors: list[float]
    median_errors: list[float]
    q10_errors: list[float]
    q90_errors: list[float]
    success_counts: list[int]
    failure_counts: list[int]
    fitted_slope: float | None
    slope_stderr: float | None
    theoretical_exponent: float
    classification: str
    runtime_seconds: float
    config: dict

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)


def replicate_rng(seed: int, n: int, replicate: int) -> np.random.Generator:
    """Independent stream derived deterministically from (seed, n, replicate)."""
    return np.random.default_rng(np.random.SeedSequence([seed, n, replicate]))


def sample_inputs(domain, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n points uniformly on [0, 1] or on the sphere S^d.

    ``domain`` is either the string "unit_interval" or the pair ("sphere", d).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if domain == "unit_interval":
        return rng.random(n)
    if isinstance(domain, tuple) and domain[0] == "sphere":
        d = int(domain[1])
        g = rng.standard_normal((n, d + 1))
        return g / np.linalg.norm(g, axis=1, keepdims=True)
    raise ValueError(f"unknown domain {domain!r}")


def make_responses(X, f_star_values, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """y_i = f*(x_i) + sigma xi_i with standard Gaussian noise."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    f = np.zeros(len(X)) if f_star_values is None else np.asarray(f_star_values, dtype=float)
    return f + sigma * rng.standard_normal(len(X))


def _f_star_values(cfg: ExperimentConfig, kernel: SpectralKernel, X: np.ndarray):
    if cfg.f_star == "zero":
        return None
    return cfg.f_star_b1 * kernel.basis_matrix(X)[:, 0]


def _write_plot_script(out: Path, files: list[str]) -> None:
    lines = [
        "#!/usr/bin/env python3",
        '"""Plot the CSV outputs of this run (matplotlib)."""',
        "import csv, sys",
        "import matplotlib.pyplot as plt",
        "",
    ]
    for name in files:
        lines += [
            f"rows = list(csv.DictReader(open({name!r})))",
            "cols = rows[0].keys()",
            "x = [float(r[list(cols)[0]]) for r in rows]",
            "for c in list(cols)[1:]:",
            "    plt.loglog(x, [abs(float(r[c])) or None for r in rows], label=c)",
            f"plt.xlabel(list(cols)[0]); plt.legend(); plt.title({name!r})",
            f"plt.savefig({name!r}.replace('.csv', '.png'), dpi=120); plt.clf()",
            "",
        ]
    (out / "plot.py").write_text("\n".join(lines), encoding="utf-8")


def run_variance_experiment(cfg: ExperimentConfig, threads: int = 1) -> dict:
    """Evaluate the variance functionals over replicates and sample sizes.

    Writes per-n curve files with replicate means of V (both routes), V1, V2
    and the envelope shape, plus ``curve.csv`` for the largest n and a
    ``summary.json`` with the |V - V1| contraction across n.
    """
    if len(cfg.lambda_grid) == 0:
        raise ConfigError("variance experiment needs a lambda grid")
    if any(l >= 0.5 for l in cfg.lambda_grid):
        raise ConfigError("lambda grid must lie inside (0, 1/2)")
    t0 = time.time()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    kernel = cfg.build_kernel()
    lam = np.asarray(cfg.lambda_grid, dtype=float)

    def one(n: int, r: int):
        X = sample_inputs("unit_interval", n, replicate_rng(cfg.seed, n, r))
        m = build_operator_model(kernel, X)
        v_coeff = np.array([v_lambda_coefficient_route(m, cfg.gamma, l) for l in lam])
        v_gram = np.array([v_lambda_gram_route(kernel, X, cfg.gamma, l) for l in lam])
        v1 = np.array([v1_lambda(m, cfg.gamma, l) for l in lam])
        v2 = np.array([v2_lambda(kernel.spectrum, cfg.gamma, l, n) for l in lam])
        return v_coeff, v_gram, v1, v2

    results: dict[tuple[int, int], tuple] = {}
    failures: dict[int, int] = {n: 0 for n in cfg.n_grid}
    jobs = [(n, r) for n in cfg.n_grid for r in range(cfg.replicates)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futs = {pool.submit(one, n, r): (n, r) for n, r in jobs}
            for fut, key in futs.items():
                try:
                    results[key] = fut.result()
                except np.linalg.LinAlgError:
                    failures[key[0]] += 1
    else:
        for n, r in jobs:
            try:
                results[(n, r)] = one(n, r)
            except np.linalg.LinAlgError:
                failures[n] += 1

    envelope = lam ** (-cfg.gamma - 1.0 / cfg.beta) * np.where(
        lam < 1.0, np.log(1.0 / lam), 1.0
    ) ** (-cfg.zeta)
    summary = {"per_n": {}, "config": asdict(cfg)}
    files = []
    for n in cfg.n_grid:
        reps = [results[(n, r)] for r in range(cfg.replicates) if (n, r) in results]
        if not reps:
            continue
        stacks = [np.mean([rep[k] for rep in reps], axis=0) for k in range(4)]
        name = f"curve_n{n}.csv"
        with open(out / name, "w", encoding="utf-8") as fh:
            fh.write("lambda,v_coeff,v_gram,v1,v2,envelope\n")
            for row in zip(lam, *stacks, envelope / n):
                fh.write(",".join(f"{x:.17g}" for x in row) + "\n")
        files.append(name)
        rel = [
            np.median(np.abs(rep[0] - rep[2]) / np.maximum(rep[2], np.finfo(float).tiny))
            for rep in reps
        ]
        summary["per_n"][str(n)] = {
            "successes": len(reps),
            "failures": failures[n],
            "median_rel_v_minus_v1": float(np.median(rel)),
        }
    # canonical file for the largest sample size
    largest = f"curve_n{cfg.n_grid[-1]}.csv"
    if (out / largest).exists():
        (out / "curve.csv").write_bytes((out / largest).read_bytes())
        files.append("curve.csv")
    summary["runtime_seconds"] = time.time() - t0
    (out / "summary.json").write_text(json.dumps(summary, sort_keys=True, indent=2))
    _write_plot_script(out, files)
    return summary


def run_inconsistency_experiment(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Minimum-norm interpolation error growth across sample sizes.

    Per (n, replicate): draw X and noisy Y, fit the interpolant, record the
    exact squared gamma-norm error.  The slope of log(mean error) against
    log n is compared with the predicted exponent.
    """
    t0 = time.time()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    kernel = cfg.build_kernel()
    alpha_star = 1.0 / cfg.beta  # uniformly bounded basis pins the embedding index
    pred = theoretical_exponent(cfg.gamma, cfg.beta, cfg.zeta, alpha_star)

    def one(n: int, r: int) -> float:
        rng = replicate_rng(cfg.seed, n, r)
        X = sample_inputs("unit_interval", n, rng)
        f_vals = _f_star_values(cfg, kernel, X)
        Y = make_responses(X, f_vals, cfg.sigma, rng)
        fit = min_norm_fit(kernel, SampleSet(X, Y))
        return gamma_error_sq(fit, cfg.f_star_coeffs(kernel), cfg.gamma)

    errors: dict[tuple[int, int], float] = {}
    jobs = [(n, r) for n in cfg.n_grid for r in range(cfg.replicates)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futs = {pool.submit(one, n, r): (n, r) for n, r in jobs}
            for fut, key in futs.items():
                try:
                    errors[key] = fut.result()
                except np.linalg.LinAlgError:
                    pass
    else:
        for n, r in jobs:
            try:
                errors[(n, r)] = one(n, r)
            except np.linalg.LinAlgError:
                pass

    means, stderrs, medians, q10, q90, succ, fail = [], [], [], [], [], [], []
    for n in cfg.n_grid:
        vals = np.array([errors[(n, r)] for r in range(cfg.replicates) if (n, r) in errors])
        succ.append(len(vals))
        fail.append(cfg.replicates - len(vals))
        if len(vals) == 0:
            means.append(float("nan"))
            stderrs.append(float("nan"))
            medians.append(float("nan"))
            q10.append(float("nan"))
            q90.append(float("nan"))
            continue
        means.append(float(np.mean(vals)))
        stderrs.append(float(np.std(vals, ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0)
        medians.append(float(np.median(vals)))
        q10.append(float(np.quantile(vals, 0.1)))
        q90.append(float(np.quantile(vals, 0.9)))

    too_many_failures = any(
        f > MAX_FAILURE_FRACTION * cfg.replicates for f in fail
    )
    slope = stderr = None
    if len(cfg.n_grid) >= 3 and not too_many_failures and all(np.isfinite(means)):
        slope, stderr = fit_loglog_slope(np.array(cfg.n_grid, float), np.array(means))

    result = ExperimentResult(
        n_values=list(cfg.n_grid),
        mean_errors=means,
        stderr_errors=stderrs,
        median_errors=medians,
        q10_errors=q10,
        q90_errors=q90,
        success_counts=succ,
        failure_counts=fail,
        fitted_slope=slope,
        slope_stderr=stderr,
        theoretical_exponent=pred.exponent,
        classification=pred.classification,
        runtime_seconds=time.time() - t0,
        config=asdict(cfg),
    )
    with open(out / "errors.csv", "w", encoding="utf-8") as fh:
        fh.write("n,replicate,gamma_error_sq\n")
        for n in cfg.n_grid:
            for r in range(cfg.replicates):
                if (n, r) in errors:
                    fh.write(f"{n},{r},{errors[(n, r)]:.17g}\n")
    (out / "summary.json").write_text(result.to_json(), encoding="utf-8")
    _write_plot_script(out, ["errors.csv"])
    return result
