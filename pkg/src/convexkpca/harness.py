"""Experiment protocol: repeated label masks, gamma policies, model comparison.

Every model sees the same revealed labels for a given (dataset, fraction,
repetition); repetition r masks with seed ``base_seed + r``. Accuracy is
measured on the hidden labels only. The "best" policy picks, per
repetition, the grid gamma with the highest accuracy on those hidden
labels, so it is an oracle upper bound rather than a model-selection rule.
"""

from __future__ import annotations

import csv
import io
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import baselines, semikpca
from .datasets import DATASET_NAMES, Dataset, load_dataset, mask_labels, standardize
from .errors import ConvexKpcaError
from .kernels import KernelMatrix, KernelSpec, center, gram
from .spectral import Spectrum, deflate, eig_sym, top_k

log = logging.getLogger(__name__)

DEFAULT_FRACTIONS = (0.01, 0.02, 0.05, 0.10)
DEFAULT_MODELS = ("semikpca-k0", "semikpca-k1", "semi-lssvm", "subs-lssvm")
POLICIES = ("best", "fixed")
_SEMIKPCA = re.compile(r"^semikpca-k(\d+)$")


def parse_model(name: str) -> tuple[str, int | None]:
    m = _SEMIKPCA.match(name)
    if m:
        return "semikpca", int(m.group(1))
    if name in ("semi-lssvm", "subs-lssvm"):
        return name, None
    raise ValueError(f"unknown model {name!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple[str, ...] = DATASET_NAMES
    fractions: tuple[float, ...] = DEFAULT_FRACTIONS
    repetitions: int = 10
    models: tuple[str, ...] = DEFAULT_MODELS
    gamma_policies: tuple[str, ...] = POLICIES
    base_seed: int = 0
    standardize: bool = True
    center: bool = False
    grid_size: int = semikpca.GRID_SIZE
    synth_seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        for f in self.fractions:
            if not 0 < f <= 1:
                raise ValueError(f"fraction {f} outside (0, 1]")
        for m in self.models:
            parse_model(m)
        for p in self.gamma_policies:
            if p not in POLICIES:
                raise ValueError(f"unknown gamma policy {p!r}")
        if self.grid_size < 1:
            raise ValueError("grid_size must be >= 1")


@dataclass(frozen=True)
class ResultRow:
    dataset: str
    labels: int
    model: str
    policy: str
    seed: int
    gamma: float
    accuracy: float


@dataclass(frozen=True)
class SummaryRow:
    dataset: str
    labels: int
    model: str
    policy: str
    mean: float
    std: float
    repetitions: int
    gammas: tuple[float, ...]
    error: str = ""


@dataclass
class ExperimentReport:
    rows: list[ResultRow] = field(default_factory=list)
    summary: list[SummaryRow] = field(default_factory=list)

    @property
    def errors(self) -> list[SummaryRow]:
        return [s for s in self.summary if s.error]


@dataclass
class Prepared:
    """Per-dataset state shared by every fraction, repetition and model."""

    dataset: Dataset
    X: np.ndarray
    K: KernelMatrix
    full: Spectrum

    def spectrum(self, k: int):
        return top_k(self.K, k, full=self.full)


def prepare(ds: Dataset, cfg: ExperimentConfig) -> Prepared:
    X = standardize(ds.X) if cfg.standardize else ds.X
    K = gram(X, KernelSpec())
    if cfg.center:
        K = center(K)
    return Prepared(ds, X, K, eig_sym(K))


def model_grid(prep: Prepared, model: str, size: int) -> np.ndarray:
    kind, k = parse_model(model)
    if kind == "semikpca":
        return semikpca.gamma_grid(prep.spectrum(k), size)
    return baselines.gamma_grid(prep.X.shape[1], prep.X.shape[0], size)


def model_fixed_gamma(prep: Prepared, model: str) -> float:
    kind, k = parse_model(model)
    if kind == "semikpca":
        return semikpca.heuristic_gamma(prep.spectrum(k))
    mode = "semi" if kind == "semi-lssvm" else "subs"
    return baselines.fixed_gamma_rule(mode, prep.X.shape[1], prep.X.shape[0])


def _lssvm_values(prep: Prepared, kind: str, Y: np.ndarray, gamma: float) -> np.ndarray:
    if kind == "semi-lssvm":
        return baselines.fit_semi_lssvm_many(prep.K, Y, gamma)[1]
    return np.column_stack(
        [baselines.fit_subs_lssvm_kernel(prep.K, Y[:, r], gamma).decision_values for r in range(Y.shape[1])]
    )


def accuracy_grid(prep: Prepared, model: str, masks, gammas) -> np.ndarray:
    """Hidden-label accuracy (%) for every (gamma, repetition) pair."""
    truth = prep.dataset.labels
    Y = np.column_stack([m.revealed for m in masks]).astype(float)
    hidden = ~np.column_stack([m.mask for m in masks])
    out = np.empty((len(gammas), len(masks)))
    kind, k = parse_model(model)
    deflated = deflate(prep.K, prep.spectrum(k)) if kind == "semikpca" else None
    for i, g in enumerate(gammas):
        if deflated is not None:
            F = semikpca.fit_many(deflated, Y, g)[1]
        else:
            F = _lssvm_values(prep, kind, Y, g)
        correct = (semikpca.sign(F) == truth[:, None]) & hidden
        out[i] = 100.0 * correct.sum(axis=0) / hidden.sum(axis=0)
    return out


def _summarise(rows: list[ResultRow]) -> SummaryRow:
    r0 = rows[0]
    acc = np.array([r.accuracy for r in rows])
    return SummaryRow(
        r0.dataset,
        r0.labels,
        r0.model,
        r0.policy,
        float(acc.mean()),
        float(acc.std()),
        len(rows),
        tuple(r.gamma for r in rows),
    )


def _run_dataset(name: str, cfg: ExperimentConfig) -> tuple[list[ResultRow], list[SummaryRow]]:
    rows: list[ResultRow] = []
    summary: list[SummaryRow] = []
    try:
        prep = prepare(load_dataset(name, cfg.synth_seed), cfg)
    except ConvexKpcaError as exc:
        summary.append(SummaryRow(name, 0, "*", "*", np.nan, np.nan, 0, (), f"{type(exc).__name__}: {exc}"))
        return rows, summary
    ds = prep.dataset
    for fraction in cfg.fractions:
        try:
            masks = [mask_labels(ds, fraction, cfg.base_seed + r) for r in range(cfg.repetitions)]
        except ConvexKpcaError as exc:
            summary.append(SummaryRow(name, 0, "*", "*", np.nan, np.nan, 0, (), f"{type(exc).__name__}: {exc}"))
            continue
        nlab = masks[0].label_count
        for model in cfg.models:
            for policy in cfg.gamma_policies:
                try:
                    if policy == "best":
                        gammas = model_grid(prep, model, cfg.grid_size)
                        accs = accuracy_grid(prep, model, masks, gammas)
                        pick = accs.argmax(axis=0)  # first grid point wins ties
                        chosen = gammas[pick]
                        best = accs[pick, np.arange(len(masks))]
                    else:
                        g = model_fixed_gamma(prep, model)
                        best = accuracy_grid(prep, model, masks, [g])[0]
                        chosen = np.full(len(masks), g)
                except ConvexKpcaError as exc:
                    msg = f"{type(exc).__name__}: {exc}"
                    log.warning("%s %s %s: %s", name, model, policy, msg)
                    summary.append(SummaryRow(name, nlab, model, policy, np.nan, np.nan, 0, (), msg))
                    continue
                cell = [
                    ResultRow(name, nlab, model, policy, m.seed, float(g), float(a))
                    for m, g, a in zip(masks, chosen, best)
                ]
                rows.extend(cell)
                summary.append(_summarise(cell))
    return rows, summary


def _order_key(dataset: str, labels: int, model: str, policy: str):
    return (dataset, labels, policy, model)


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    with ThreadPoolExecutor(max_workers=max(1, cfg.threads)) as pool:
        parts = list(pool.map(lambda n: _run_dataset(n, cfg), cfg.datasets))
    report = ExperimentReport()
    for rows, summary in parts:
        report.rows.extend(rows)
        report.summary.extend(summary)
    report.rows.sort(key=lambda r: _order_key(r.dataset, r.labels, r.model, r.policy) + (r.seed,))
    report.summary.sort(key=lambda s: _order_key(s.dataset, s.labels, s.model, s.policy))
    return report


# ---------------------------------------------------------------- sweeps


@dataclass(frozen=True)
class SweepCurve:
    dataset: str
    fraction: float
    model: str
    gammas: np.ndarray
    mean_acc: np.ndarray
    std_acc: np.ndarray
    best_gamma: float
    heuristic_gamma: float
    inv_lambda1: float
    inv_lambda2: float
    baseline_acc: float


def gamma_sweep(
    dataset: str,
    fraction: float,
    models=DEFAULT_MODELS,
    grid_size: int = semikpca.GRID_SIZE,
    repetitions: int = 10,
    seed: int = 0,
    cfg: ExperimentConfig | None = None,
) -> list[SweepCurve]:
    """Mean hidden-label accuracy along each model's own gamma grid.

    Semi-KPCA grids stop just below 1/lambda_{k+1}. The "heuristic" marker is
    the log-midpoint gamma for Semi-KPCA and the d/N rule for the LS-SVMs.
    """
    cfg = cfg or ExperimentConfig(datasets=(dataset,), fractions=(fraction,))
    prep = prepare(load_dataset(dataset, cfg.synth_seed), cfg)
    ds = prep.dataset
    masks = [mask_labels(ds, fraction, seed + r) for r in range(repetitions)]
    values = prep.full.values
    inv1 = 1.0 / values[0]
    inv2 = 1.0 / values[1] if values[1] > 0 else np.inf
    curves = []
    for model in models:
        gammas = model_grid(prep, model, grid_size)
        accs = accuracy_grid(prep, model, masks, gammas)
        mean = accs.mean(axis=1)
        curves.append(
            SweepCurve(
                dataset,
                fraction,
                model,
                gammas,
                mean,
                accs.std(axis=1),
                float(gammas[int(np.argmax(mean))]),
                float(model_fixed_gamma(prep, model)),
                float(inv1),
                float(inv2),
                100.0 * ds.majority_rate,
            )
        )
    return curves


# ---------------------------------------------------------------- output

DISPLAY = {
    "semi-lssvm": "Semi-LSSVM",
    "subs-lssvm": "Subs-LSSVM",
}


def display_name(model: str) -> str:
    kind, k = parse_model(model)
    return f"Semi-KPCA(k={k})" if kind == "semikpca" else DISPLAY[model]


def _model_order(model: str):
    kind, k = parse_model(model)
    return (0, k, model) if kind == "semikpca" else (1, 0, model)


def rank_block(summaries: list[SummaryRow]) -> dict[str, int]:
    """Rank models by mean accuracy (desc), then std (asc), then name."""
    ok = [s for s in summaries if not s.error]
    ordered = sorted(ok, key=lambda s: (-s.mean, s.std, s.model))
    return {s.model: i + 1 for i, s in enumerate(ordered)}


def rank_and_format(report: ExperimentReport) -> str:
    """Text table with one line per (dataset, labels) and 'mean+-std (rank)' cells."""
    blocks: dict[tuple, list[SummaryRow]] = {}
    for s in report.summary:
        if s.model == "*":
            continue
        blocks.setdefault((s.dataset, s.labels, s.policy), []).append(s)
    models = sorted({s.model for s in report.summary if s.model != "*"}, key=_model_order)
    policies = [p for p in POLICIES if any(s.policy == p for s in report.summary)]
    head = ["dataset", "labels"] + [f"{display_name(m)} [{p}]" for p in policies for m in models]
    lines = []
    for dataset, labels in sorted({(d, l) for d, l, _ in blocks}):
        cells = [dataset, str(labels)]
        for p in policies:
            block = blocks.get((dataset, labels, p), [])
            ranks = rank_block(block)
            by_model = {s.model: s for s in block}
            for m in models:
                s = by_model.get(m)
                if s is None:
                    cells.append("-")
                elif s.error:
                    cells.append("error")
                else:
                    cells.append(f"{s.mean:.1f}±{s.std:.1f} ({ranks[m]})")
        lines.append(cells)
    widths = [max(len(r[i]) for r in [head] + lines) for i in range(len(head))]
    fmt = lambda r: "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()
    out = [fmt(head), fmt(["-" * w for w in widths])] + [fmt(r) for r in lines]
    for s in report.errors:
        out.append(f"error: {s.dataset} labels={s.labels} {s.model} {s.policy}: {s.error}")
    return "\n".join(out) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _num(x: float) -> str:
    return repr(float(x))


def write_report(report: ExperimentReport, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = _csv(
        ["dataset", "labels", "model", "policy", "seed", "gamma", "accuracy"],
        [[r.dataset, r.labels, r.model, r.policy, r.seed, _num(r.gamma), _num(r.accuracy)] for r in report.rows],
    )
    summary = _csv(
        ["dataset", "labels", "model", "policy", "mean", "std", "repetitions", "gammas", "error"],
        [
            [
                s.dataset,
                s.labels,
                s.model,
                s.policy,
                _num(s.mean),
                _num(s.std),
                s.repetitions,
                " ".join(_num(g) for g in s.gammas),
                s.error,
            ]
            for s in report.summary
        ],
    )
    paths = [out / "results.csv", out / "summary.csv", out / "table.txt"]
    for path, text in zip(paths, (results, summary, rank_and_format(report))):
        path.write_text(text)
    return paths


def _slug(x) -> str:
    return re.sub(r"[^A-Za-z0-9.]+", "-", str(x)).strip("-")


def write_sweep(curves: list[SweepCurve], out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for c in curves:
        p = out / f"sweep_{_slug(c.dataset)}_{_slug(c.fraction)}_{_slug(c.model)}.csv"
        p.write_text(
            _csv(
                ["gamma", "mean_acc", "std_acc"],
                [[_num(g), _num(m), _num(s)] for g, m, s in zip(c.gammas, c.mean_acc, c.std_acc)],
            )
        )
        paths.append(p)
    if curves:
        c0 = curves[0]
        p = out / f"markers_{_slug(c0.dataset)}_{_slug(c0.fraction)}.csv"
        p.write_text(
            _csv(
                ["model", "best_gamma", "heuristic_gamma", "inv_lambda1", "inv_lambda2", "baseline_acc"],
                [
                    [c.model, _num(c.best_gamma), _num(c.heuristic_gamma), _num(c.inv_lambda1), _num(c.inv_lambda2), _num(c.baseline_acc)]
                    for c in curves
                ],
            )
        )
        paths.append(p)
    return paths
