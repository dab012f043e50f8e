"""Command-line entry point: ``convexkpca run|sweep|synth|check``.

Settings come from an optional ``--config`` file of ``key = value`` lines
(``#`` starts a comment) and from flags; flags win. Exit codes: 0 success,
1 configuration error, 2 runtime error, 3 property failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import harness, properties
from .datasets import DATASET_NAMES, manifest, synth_four_gaussians
from .errors import ConfigError, ConvexKpcaError

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_PROPERTY = 0, 1, 2, 3

log = logging.getLogger("convexkpca")


def _list(text: str) -> list[str]:
    return [t.strip() for t in str(text).split(",") if t.strip()]


def _floats(text: str) -> list[float]:
    return [float(t) for t in _list(text)]


def _ints(text: str) -> list[int]:
    return [int(t) for t in _list(text)]


def _bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (parser, subcommands that accept it)
CONFIG_KEYS = {
    "datasets": (_list, {"run"}),
    "fractions": (_floats, {"run"}),
    "reps": (int, {"run", "sweep"}),
    "models": (_list, {"run", "sweep"}),
    "gamma_policy": (str, {"run"}),
    "k": (_ints, {"run", "sweep"}),
    "seed": (int, {"run", "sweep", "synth", "check"}),
    "threads": (int, {"run", "sweep"}),
    "out": (str, {"run", "sweep", "synth"}),
    "grid_size": (int, {"run", "sweep"}),
    "standardize": (_bool, {"run", "sweep"}),
    "center": (_bool, {"run", "sweep"}),
    "synth_seed": (int, {"run", "sweep"}),
    "dataset": (str, {"sweep"}),
    "fraction": (float, {"sweep"}),
    "seeds": (int, {"check"}),
    "properties": (_list, {"check"}),
    "verbose": (int, set()),
}


def read_config(path, command: str) -> dict:
    """Parse a key = value config file, rejecting unknown or misplaced keys."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from exc
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        parse, commands = CONFIG_KEYS[key]
        if commands and command not in commands:
            raise ConfigError(f"{path}:{lineno}: key {key!r} does not apply to '{command}'")
        try:
            out[key] = parse(value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
    return out


def _settings(args: argparse.Namespace) -> dict:
    """Config-file values overlaid with every flag that was given explicitly."""
    settings = read_config(args.config, args.command) if getattr(args, "config", None) else {}
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def _expand_models(names, ks) -> tuple[str, ...]:
    out = []
    for name in names:
        if name == "semikpca":
            out.extend(f"semikpca-k{k}" for k in ks)
        else:
            out.append(name)
    for m in out:
        try:
            harness.parse_model(m)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    return tuple(dict.fromkeys(out))


def _check_datasets(names) -> None:
    known = set(manifest()) | {"synth"}
    for n in names:
        if n not in known:
            raise ConfigError(f"unknown dataset {n!r}; available: {', '.join(sorted(known))}")


def _experiment_config(s: dict, datasets, fractions) -> harness.ExperimentConfig:
    ks = s.get("k", [0, 1])
    models = _expand_models(s.get("models", ["semikpca", "semi-lssvm", "subs-lssvm"]), ks)
    policy = s.get("gamma_policy", "both")
    if policy not in ("best", "fixed", "both"):
        raise ConfigError(f"gamma policy must be best, fixed or both, got {policy!r}")
    policies = harness.POLICIES if policy == "both" else (policy,)
    try:
        return harness.ExperimentConfig(
            datasets=tuple(datasets),
            fractions=tuple(fractions),
            repetitions=s.get("reps", 10),
            models=models,
            gamma_policies=policies,
            base_seed=s.get("seed", 0),
            standardize=s.get("standardize", True),
            center=s.get("center", False),
            grid_size=s.get("grid_size", harness.semikpca.GRID_SIZE),
            synth_seed=s.get("synth_seed", 0),
            threads=s.get("threads") or os.cpu_count() or 1,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_run(args) -> int:
    s = _settings(args)
    datasets = s.get("datasets", list(DATASET_NAMES))
    _check_datasets(datasets)
    cfg = _experiment_config(s, datasets, s.get("fractions", list(harness.DEFAULT_FRACTIONS)))
    report = harness.run_experiment(cfg)
    out = Path(s.get("out", "results"))
    paths = harness.write_report(report, out)
    sys.stdout.write(harness.rank_and_format(report))
    for p in paths:
        log.info("wrote %s", p)
    return EXIT_RUNTIME if report.errors else EXIT_OK


def cmd_sweep(args) -> int:
    s = _settings(args)
    dataset = s.get("dataset", "synth")
    _check_datasets([dataset])
    fraction = s.get("fraction", 0.01)
    cfg = _experiment_config(s, [dataset], [fraction])
    try:
        curves = harness.gamma_sweep(
            dataset,
            fraction,
            models=cfg.models,
            grid_size=cfg.grid_size,
            repetitions=cfg.repetitions,
            seed=cfg.base_seed,
            cfg=cfg,
        )
    except ConvexKpcaError as exc:
        log.error("sweep failed: %s", exc)
        return EXIT_RUNTIME
    paths = harness.write_sweep(curves, Path(s.get("out", "sweep")))
    for c in curves:
        i = int(np.argmax(c.mean_acc))
        print(
            f"{harness.display_name(c.model):16s} best gamma={c.best_gamma:.4g} "
            f"acc={c.mean_acc[i]:.1f}  heuristic gamma={c.heuristic_gamma:.4g}"
        )
    if curves:
        c = curves[0]
        print(f"1/lambda_1={c.inv_lambda1:.4g}  1/lambda_2={c.inv_lambda2:.4g}  baseline={c.baseline_acc:.1f}%")
    for p in paths:
        log.info("wrote %s", p)
    return EXIT_OK


def cmd_synth(args) -> int:
    s = _settings(args)
    ds = synth_four_gaussians(s.get("seed", 0))
    out = Path(s.get("out", "synth.csv"))
    if out.suffix == "" or out.is_dir():
        out.mkdir(parents=True, exist_ok=True)
        out = out / "synth.csv"
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
    lines = ["x1,x2,class"] + [f"{float(a)!r},{float(b)!r},{int(c)}" for (a, b), c in zip(ds.X, ds.labels)]
    out.write_text("\n".join(lines) + "\n")
    log.info("wrote %s (%d points)", out, ds.n)
    return EXIT_OK


def cmd_check(args) -> int:
    s = _settings(args)
    names = s.get("properties")
    if names:
        unknown = [n for n in names if n not in properties.PROPERTIES]
        if unknown:
            raise ConfigError(f"unknown properties: {', '.join(unknown)}")
    results = properties.run_checks(s.get("seeds", 20), names, base_seed=s.get("seed", 0))
    sys.stdout.write(properties.format_checks(results))
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"FAILED: {', '.join(failed)}")
        return EXIT_PROPERTY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="convexkpca", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=None, help="more logging (repeatable)")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, *, seed_help="base random seed"):
        sp.add_argument("--config", help="key = value config file; flags override it")
        sp.add_argument("--seed", type=int, help=seed_help)

    def experiment(sp):
        sp.add_argument("--reps", type=int, help="repetitions per cell (default 10)")
        sp.add_argument(
            "--models",
            type=_list,
            help="comma list of semikpca, semikpca-kN, semi-lssvm, subs-lssvm "
            "(default semikpca,semi-lssvm,subs-lssvm)",
        )
        sp.add_argument("--k", type=_ints, help="comma list of k values that 'semikpca' expands to (default 0,1)")
        sp.add_argument("--threads", type=int, help="worker threads (default: all cores)")
        sp.add_argument("--grid-size", dest="grid_size", type=int, help="gamma grid points (default 40)")
        sp.add_argument("--no-standardize", dest="standardize", action="store_const", const=False,
                        help="use raw features instead of z-scores")
        sp.add_argument("--center", dest="center", action="store_const", const=True,
                        help="double-centre the kernel matrix")

    run = sub.add_parser("run", help="accuracy table over datasets, label fractions and models")
    common(run, seed_help="repetition r masks with seed SEED + r (default 0)")
    experiment(run)
    run.add_argument("--datasets", type=_list, help=f"comma list (default: all of {', '.join(DATASET_NAMES)})")
    run.add_argument("--fractions", type=_floats, help="comma list of label fractions (default 0.01,0.02,0.05,0.1)")
    run.add_argument("--gamma-policy", dest="gamma_policy", choices=("best", "fixed", "both"),
                     help="gamma selection (default both)")
    run.add_argument("--out", help="output directory (default ./results)")
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="accuracy as a function of gamma")
    common(sweep, seed_help="repetition r masks with seed SEED + r (default 0)")
    experiment(sweep)
    sweep.add_argument("--dataset", help="dataset name (default synth)")
    sweep.add_argument("--fraction", type=float, help="label fraction (default 0.01)")
    sweep.add_argument("--out", help="output directory (default ./sweep)")
    sweep.set_defaults(func=cmd_sweep)

    synth = sub.add_parser("synth", help="write the four-Gaussian dataset as CSV")
    common(synth, seed_help="generator seed (default 0)")
    synth.add_argument("--out", help="output file or directory (default ./synth.csv)")
    synth.set_defaults(func=cmd_synth)

    check = sub.add_parser("check", help="randomised property suites")
    common(check, seed_help="first seed (default 0)")
    check.add_argument("--seeds", type=int, help="seeds per property (default 20)")
    check.add_argument("--properties", type=_list,
                       help=f"comma list (default all: {', '.join(properties.PROPERTIES)})")
    check.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * (args.verbose or 0)
    logging.basicConfig(level=max(level, logging.DEBUG), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvexKpcaError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
