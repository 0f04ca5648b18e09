"""Configuration-driven batch runner.

Subcommands (all driven by a single JSON config):

* ``simulate``    sample a copula model, optionally merge marginals, write paths
* ``wasserstein`` path-space distance between two marginal families
* ``robustness``  the Pareto-on-elliptical truncation experiment
* ``klexpand``    empirical covariance eigendecomposition of sampled paths
* ``check``       moment or minorant-assumption diagnostics

Every run writes its data files plus ``manifest.json`` holding the
command name, the echoed config, the effective seed, library versions,
and SHA-256 checksums of the outputs.  Outputs carry no timestamps and
all floats are written with 17 significant digits, so a rerun with the
same config and seed is byte-identical.

Exit codes: 0 success, 2 invalid config or arguments, 3 numeric
failure, 4 violated model assumption.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np
import scipy
from scipy import stats

from . import __version__
from .copulas import CopulaModel
from .errors import (AssumptionViolatedError, InvalidArgumentError,
                     NumericFailureError, UnsupportedOperationError)
from .grid import TimeGrid, make_uniform_grid
from .kl import kl_from_ensemble, tail_energy
from .marginals import (ExponentialScale, GaussianScale, LognormalMixing,
                        Pareto, ScaleMixtureGaussian, Uniform)
from .robustness import (ExperimentConfig, check_assumption,
                         gaussian_minorant_params, pareto_elliptical_experiment,
                         pareto_minorant_params)
from .serialize import sha256_file, write_csv, write_json, write_matrix_csv
from .sklar import ProcessEnsemble, check_moment_condition, merge
from .transport import attach_mc_check, pathspace_wasserstein_same_copula

_EXIT_CONFIG = 2
_EXIT_NUMERIC = 3
_EXIT_ASSUMPTION = 4


def _check_keys(section: dict, allowed, context: str) -> None:
    """Unknown keys are hard errors; silent typos corrupt experiments."""
    if not isinstance(section, dict):
        raise InvalidArgumentError(f"config section {context!r} must be an object")
    for key in section:
        if key not in allowed:
            raise InvalidArgumentError(
                f"unknown config key {context}.{key}" if context else
                f"unknown config key {key}")


def _require(section: dict, key: str, context: str):
    if key not in section:
        where = f"{context}.{key}" if context else key
        raise InvalidArgumentError(f"missing config key {where}")
    return section[key]


def _parse_grid(section, context="grid") -> TimeGrid:
    _check_keys(section, ("a", "b", "m"), context)
    a = float(_require(section, "a", context))
    b = float(_require(section, "b", context))
    m = _require(section, "m", context)
    if not isinstance(m, int) or isinstance(m, bool):
        raise InvalidArgumentError(f"{context}.m must be an integer")
    return make_uniform_grid(a, b, m)


def _parse_mixing(section, context="mixing") -> LognormalMixing:
    _check_keys(section, ("mu", "sigma"), context)
    return LognormalMixing(float(section.get("mu", 0.0)),
                           float(section.get("sigma", 0.5)))


def _parse_family(section, context="family"):
    kind = _require(section, "kind", context)
    if kind == "gaussian_scale":
        _check_keys(section, ("kind", "sigma", "mean", "power_law_hurst"), context)
        if "power_law_hurst" in section:
            if "sigma" in section:
                raise InvalidArgumentError(
                    f"{context}: give either sigma or power_law_hurst, not both")
            return GaussianScale.power_law(float(section["power_law_hurst"]))
        return GaussianScale(float(section.get("sigma", 1.0)),
                             float(section.get("mean", 0.0)))
    if kind == "exponential_scale":
        _check_keys(section, ("kind", "scale", "power_law_hurst"), context)
        if "power_law_hurst" in section:
            if "scale" in section:
                raise InvalidArgumentError(
                    f"{context}: give either scale or power_law_hurst, not both")
            return ExponentialScale.power_law(float(section["power_law_hurst"]))
        return ExponentialScale(float(section.get("scale", 1.0)))
    if kind == "pareto":
        _check_keys(section, ("kind", "x_min", "alpha"), context)
        return Pareto(float(_require(section, "x_min", context)),
                      float(_require(section, "alpha", context)))
    if kind == "uniform":
        _check_keys(section, ("kind", "lo", "hi"), context)
        return Uniform(float(section.get("lo", 0.0)), float(section.get("hi", 1.0)))
    if kind == "scale_mixture_gaussian":
        _check_keys(section, ("kind", "mixing", "scale"), context)
        mixing = _parse_mixing(section.get("mixing", {}), f"{context}.mixing")
        return ScaleMixtureGaussian(mixing, float(section.get("scale", 1.0)))
    raise InvalidArgumentError(f"unknown marginal kind {context}.kind = {kind!r}")


def _parse_model(section, context="model") -> CopulaModel:
    _check_keys(section, ("variant", "hurst", "theta", "mixing", "t0"), context)
    variant = _require(section, "variant", context)
    mixing = None
    if "mixing" in section:
        mixing = _parse_mixing(section["mixing"], f"{context}.mixing")
    hurst = section.get("hurst")
    theta = section.get("theta")
    t0 = section.get("t0")
    return CopulaModel(variant=variant,
                       hurst=None if hurst is None else float(hurst),
                       theta=None if theta is None else float(theta),
                       mixing=mixing,
                       t0=None if t0 is None else float(t0))


def _parse_seed(cfg, context="") -> int:
    seed = _require(cfg, "seed", context)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise InvalidArgumentError("seed must be a nonnegative integer")
    return seed


def _parse_n_paths(cfg, context="") -> int:
    n = _require(cfg, "n_paths", context)
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InvalidArgumentError("n_paths must be a positive integer")
    return n


def _run_simulate(cfg, outdir):
    _check_keys(cfg, ("grid", "model", "family", "n_paths", "seed"), "")
    grid = _parse_grid(_require(cfg, "grid", ""))
    model = _parse_model(_require(cfg, "model", ""))
    n_paths = _parse_n_paths(cfg)
    seed = _parse_seed(cfg)
    copula = model.sample(grid, n_paths, seed)
    ks_p = [float(stats.kstest(copula.paths[:, j], "uniform").pvalue)
            for j in range(grid.m)]
    if "family" in cfg:
        family = _parse_family(cfg["family"])
        ensemble = merge(copula, family)
        paths = ensemble.paths
        marginal = family.kind
    else:
        paths = copula.paths
        marginal = None
    write_matrix_csv(os.path.join(outdir, "ensemble.csv"), grid.points, paths)
    extras = {
        "model": copula.model_tag,
        "marginal": marginal,
        "grid": {"a": grid.a, "b": grid.b, "m": grid.m},
        "n_paths": n_paths,
        "column_ks_p": ks_p,
    }
    return extras, ["ensemble.csv"]


def _run_wasserstein(cfg, outdir):
    _check_keys(cfg, ("grid", "p", "family_a", "family_b", "mc", "seed"), "")
    grid = _parse_grid(_require(cfg, "grid", ""))
    p = _require(cfg, "p", "")
    family_a = _parse_family(_require(cfg, "family_a", ""), "family_a")
    family_b = _parse_family(_require(cfg, "family_b", ""), "family_b")
    report = pathspace_wasserstein_same_copula(family_a, family_b, grid, p)
    if "mc" in cfg:
        mc = cfg["mc"]
        _check_keys(mc, ("model", "n_paths"), "mc")
        model = _parse_model(_require(mc, "model", "mc"), "mc.model")
        n_paths = _parse_n_paths(mc, "mc")
        seed = _parse_seed(cfg)
        copula = model.sample(grid, n_paths, seed)
        report = attach_mc_check(report, merge(copula, family_a),
                                 merge(copula, family_b))
    write_json(os.path.join(outdir, "report.json"), report)
    rows = np.column_stack([grid.points, report.per_t])
    write_csv(os.path.join(outdir, "per_t.csv"), ("t", "w_p"), rows)
    return {}, ["report.json", "per_t.csv"]


def _run_robustness(cfg, outdir):
    allowed = ("a", "b", "m", "n_paths", "seed", "hurst", "mixing", "x_min",
               "alpha", "gamma", "n_keep", "marginal_mode", "p", "epsilon",
               "q", "beta")
    _check_keys(cfg, allowed, "")
    kwargs = {}
    for key in allowed:
        if key not in cfg:
            continue
        if key == "mixing":
            kwargs[key] = _parse_mixing(cfg[key])
        elif key == "n_keep":
            value = cfg[key]
            if not isinstance(value, list) or not all(
                    isinstance(k, int) and not isinstance(k, bool) for k in value):
                raise InvalidArgumentError("n_keep must be a list of integers")
            kwargs[key] = tuple(value)
        elif key in ("m", "n_paths", "seed", "p"):
            if not isinstance(cfg[key], int) or isinstance(cfg[key], bool):
                raise InvalidArgumentError(f"config key {key} must be an integer")
            kwargs[key] = cfg[key]
        elif key == "marginal_mode":
            kwargs[key] = cfg[key]
        else:
            kwargs[key] = float(cfg[key])
    report = pareto_elliptical_experiment(ExperimentConfig(**kwargs))
    write_json(os.path.join(outdir, "report.json"), report)
    header = ("n_keep", "lhs", "marginal_term", "copula_term", "K", "rho",
              "tail_energy", "holds")
    rows = [[getattr(row, name) for name in header] for row in report.rows]
    write_csv(os.path.join(outdir, "rows.csv"), header, rows)
    return {}, ["report.json", "rows.csv"]


def _run_klexpand(cfg, outdir):
    _check_keys(cfg, ("grid", "model", "family", "n_paths", "seed", "n_keep"), "")
    grid = _parse_grid(_require(cfg, "grid", ""))
    model = _parse_model(_require(cfg, "model", ""))
    n_paths = _parse_n_paths(cfg)
    seed = _parse_seed(cfg)
    copula = model.sample(grid, n_paths, seed)
    if "family" in cfg:
        ensemble = merge(copula, _parse_family(cfg["family"]))
    else:
        ensemble = ProcessEnsemble(grid, copula.paths, "uniform", copula.model_tag)
    decomposition = kl_from_ensemble(ensemble)
    n_keep = cfg.get("n_keep", [])
    if not isinstance(n_keep, list) or not all(
            isinstance(k, int) and not isinstance(k, bool) for k in n_keep):
        raise InvalidArgumentError("n_keep must be a list of integers")
    tails = {str(k): tail_energy(decomposition, k) for k in n_keep}
    report = {
        "eigenvalues": decomposition.eigenvalues,
        "mean": decomposition.mean,
        "tail_energy": tails,
    }
    write_json(os.path.join(outdir, "report.json"), report)
    write_csv(os.path.join(outdir, "eigenvalues.csv"), ("index", "eigenvalue"),
              [(i, v) for i, v in enumerate(decomposition.eigenvalues)])
    functions = np.column_stack([grid.points, decomposition.eigenfunctions])
    header = ["t"] + [f"phi{i}" for i in range(grid.m)]
    write_csv(os.path.join(outdir, "eigenfunctions.csv"), header, functions)
    return {}, ["report.json", "eigenvalues.csv", "eigenfunctions.csv"]


def _run_check(cfg, outdir):
    _check_keys(cfg, ("mode", "grid", "family", "p", "params", "seed"), "")
    mode = _require(cfg, "mode", "")
    grid = _parse_grid(_require(cfg, "grid", ""))
    family = _parse_family(_require(cfg, "family", ""))
    if mode == "moment":
        p = _require(cfg, "p", "")
        report = check_moment_condition(family, grid, float(p))
        write_json(os.path.join(outdir, "report.json"), report)
        return {}, ["report.json"]
    if mode == "assumption":
        section = cfg.get("params", {})
        _check_keys(section, ("p", "epsilon", "q", "beta", "x0"), "params")
        common = {
            "p": section.get("p", 1),
            "epsilon": float(section.get("epsilon", 1.0)),
            "q": float(section.get("q", 2.0)),
        }
        if isinstance(family, Pareto):
            params = pareto_minorant_params(
                family, grid, x0=float(section.get("x0", 0.0)),
                beta=float(section.get("beta", 2.0 / 3.0)), **common)
        elif isinstance(family, GaussianScale):
            if "x0" in section:
                raise InvalidArgumentError("params.x0 applies to pareto only")
            params = gaussian_minorant_params(
                family, grid, beta=float(section.get("beta", 0.5)), **common)
        else:
            raise InvalidArgumentError(
                "assumption mode supports pareto and gaussian_scale families")
        report = check_assumption(family, params, grid)
        write_json(os.path.join(outdir, "report.json"), report)
        return {}, ["report.json"]
    raise InvalidArgumentError(f"mode must be 'moment' or 'assumption', got {mode!r}")


_RUNNERS = {
    "simulate": _run_simulate,
    "wasserstein": _run_wasserstein,
    "robustness": _run_robustness,
    "klexpand": _run_klexpand,
    "check": _run_check,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="copulaproc",
        description="Copula-process sampling, transport distances, and "
                    "robustness bound evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "sample a copula model and optionally merge marginals",
        "wasserstein": "path-space Wasserstein distance between marginal families",
        "robustness": "Pareto-on-elliptical truncation experiment",
        "klexpand": "empirical covariance eigendecomposition",
        "check": "moment and minorant-assumption diagnostics",
    }
    for name in _RUNNERS:
        cmd = sub.add_parser(name, help=helps[name])
        cmd.add_argument("--config", required=True, help="path to a JSON config")
        cmd.add_argument("--seed", type=int, default=None,
                         help="override the config's master seed (u64)")
        cmd.add_argument("--out", default=".", help="output directory")
        cmd.add_argument("--threads", type=int, default=1,
                         help="worker budget; affects speed only, never results")
    return parser


def _load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise InvalidArgumentError(f"config {path} must hold a JSON object")
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise InvalidArgumentError(f"--threads must be >= 1, got {args.threads}")
        cfg = _load_config(args.config)
        if args.seed is not None:
            if args.seed < 0 or args.seed > 2**64 - 1:
                raise InvalidArgumentError(f"--seed out of u64 range: {args.seed}")
            cfg["seed"] = args.seed
        os.makedirs(args.out, exist_ok=True)
        extras, files = _RUNNERS[args.command](cfg, args.out)
        manifest = {
            "command": args.command,
            "config_echo": cfg,
            "seed": cfg.get("seed"),
            "versions": {
                "copulaproc": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "python": "%d.%d.%d" % sys.version_info[:3],
            },
            "output_files": [
                {"name": name, "sha256": sha256_file(os.path.join(args.out, name))}
                for name in files
            ],
        }
        manifest.update(extras)
        write_json(os.path.join(args.out, "manifest.json"), manifest)
        return 0
    except (InvalidArgumentError, UnsupportedOperationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except AssumptionViolatedError as exc:
        print(f"assumption violated: {exc}", file=sys.stderr)
        return _EXIT_ASSUMPTION
    except NumericFailureError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return _EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
