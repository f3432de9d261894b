"""Config-driven experiment runner with grid search and deterministic reports.

A JSON config names a task (impute, forecast, variance, diagnose,
regimes), a data source (CSV or synthetic specs), a hyper-parameter grid,
splits and seeds. Reports are emitted as RFC-4180 CSV and stable-key JSON;
identical config + seed reproduces report.csv byte for byte.
"""

from __future__ import annotations

import dataclasses
import json
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import mssa_suitability, rank_scaling_report
from .hsvt import EnergyThreshold, Fixed, MedianThreshold, RankPolicy, policy_label
from .metrics import imp_err, nrmse, standardize_stats
from .mssa import fit_forecaster, forecast, impute, rolling_forecast
from .panel import Panel, initialize_missing, load_csv
from .synth import (
    Constant,
    CorruptionSpec,
    FactorModelSpec,
    GaussianNoise,
    HarmonicMix,
    HarmonicTerm,
    LinearRecurrence,
    NoNoise,
    Polynomial,
    PoissonObservations,
    SmoothPeriodic,
    corrupt,
    generate_latent,
    mixture_of_harmonics_panel,
)
from .tssa import compare_regimes
from .variance import estimate_variance

SCHEMA_VERSION = 1
REPORT_COLUMNS = ["task", "split", "mode", "L", "policy", "init", "seed", "repeat", "window", "metric", "value", "selected", "flags"]

TASKS = ("impute", "forecast", "variance", "diagnose", "regimes")

_TOP_KEYS = {"schema_version", "task", "data", "grid", "splits", "seeds", "holdout_fraction", "repeats", "horizon", "windows", "subset_sizes", "energy", "cp_rank", "out"}


class ConfigError(ValueError):
    """Raised for malformed experiment configs."""


# ---------------------------------------------------------------------
# JSON <-> spec parsing
# ---------------------------------------------------------------------

def _check_keys(d: dict, allowed, where: str) -> None:
    unknown = sorted(set(d) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {', '.join(unknown)}")


def parse_policy(d: dict) -> RankPolicy:
    _check_keys(d, {"kind", "k", "fraction"}, "policy")
    kind = d.get("kind", "energy")
    if kind == "fixed":
        return Fixed(int(d["k"]))
    if kind == "energy":
        return EnergyThreshold(float(d.get("fraction", 0.9)))
    if kind == "median":
        return MedianThreshold()
    raise ConfigError(f"unknown policy kind {kind!r}")


def parse_signal(d: dict):
    kind = d.get("kind")
    if kind == "harmonic":
        _check_keys(d, {"kind", "terms"}, "signal")
        terms = tuple(
            HarmonicTerm(
                amplitude=float(t.get("amplitude", 1.0)),
                frequency=float(t.get("frequency", 0.0)),
                phase=float(t.get("phase", 0.0)),
                decay=float(t.get("decay", 0.0)),
                poly=tuple(t.get("poly", (1.0,))),
            )
            for t in d["terms"]
        )
        return HarmonicMix(terms=terms)
    if kind == "recurrence":
        _check_keys(d, {"kind", "coefficients", "seed_values"}, "signal")
        return LinearRecurrence(coefficients=tuple(d["coefficients"]), seed_values=tuple(d["seed_values"]))
    if kind == "smooth":
        _check_keys(d, {"kind", "period", "fn"}, "signal")
        return SmoothPeriodic(period=float(d["period"]), fn=d.get("fn", "smooth_bump"))
    if kind == "constant":
        _check_keys(d, {"kind", "value"}, "signal")
        return Constant(value=float(d.get("value", 1.0)))
    if kind == "polynomial":
        _check_keys(d, {"kind", "coefficients"}, "signal")
        return Polynomial(coefficients=tuple(d["coefficients"]))
    raise ConfigError(f"unknown signal kind {kind!r}")


def parse_factor(d: dict) -> FactorModelSpec:
    _check_keys(d, {"n_series", "n_steps", "rank", "temporal", "loading_bound", "value_bound", "nonnegative_loadings", "seed"}, "factor")
    return FactorModelSpec(
        n_series=int(d["n_series"]),
        n_steps=int(d["n_steps"]),
        rank=int(d["rank"]),
        temporal=tuple(parse_signal(s) for s in d["temporal"]),
        loading_bound=float(d.get("loading_bound", 1.0)),
        value_bound=(None if d.get("value_bound") is None else float(d["value_bound"])),
        nonnegative_loadings=bool(d.get("nonnegative_loadings", False)),
        seed=int(d.get("seed", 0)),
    )


def parse_corruption(d: dict) -> CorruptionSpec:
    _check_keys(d, {"rho", "noise", "variance", "seed"}, "corruption")
    noise_d = d.get("noise", {"kind": "none"})
    kind = noise_d.get("kind", "none")
    if kind == "none":
        noise = NoNoise()
    elif kind == "gaussian":
        noise = GaussianNoise(sigma=float(noise_d["sigma"]))
    elif kind == "poisson":
        noise = PoissonObservations()
    else:
        raise ConfigError(f"unknown noise kind {kind!r}")
    return CorruptionSpec(
        rho=float(d.get("rho", 1.0)),
        noise=noise,
        variance_spec=(parse_factor(d["variance"]) if d.get("variance") else None),
        seed=int(d.get("seed", 0)),
    )


# ---------------------------------------------------------------------
# deterministic seeding
# ---------------------------------------------------------------------

def _entropy(*parts) -> list[int]:
    out = []
    for p in parts:
        out.append(zlib.crc32(p.encode()) if isinstance(p, str) else int(p) & 0xFFFFFFFF)
    return out


def _rng(*parts) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(_entropy(*parts)))


def _sub_seed(*parts) -> int:
    return int(np.random.SeedSequence(_entropy(*parts)).generate_state(1)[0])


# ---------------------------------------------------------------------
# imputation evaluation protocol
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class ImputeEvalProtocol:
    """Additionally-masked panels plus the scorer that recovers the held-out cells."""

    base_panel: Panel
    panels: tuple[Panel, ...]
    holdout_masks: tuple[np.ndarray, ...]

    def score(self, repeat: int, estimates, truth=None, stats_mask=None) -> float:
        scored = self.holdout_masks[repeat]
        if not scored.any():
            scored = ~self.base_panel.mask  # fraction 0: score the original missing cells
            if truth is None:
                raise ValueError("scoring original missing cells needs explicit truth values")
        truth_values = self.base_panel.values if truth is None else np.asarray(getattr(truth, "values", truth), dtype=float)
        return nrmse(truth_values, estimates, scored, stats_mask)


def impute_eval_protocol(panel: Panel, holdout_fraction: float = 0.1, repeats: int = 3, seed: int = 0, col_range: tuple[int, int] | None = None) -> ImputeEvalProtocol:
    """Mask a fraction of the observed cells uniformly at random, once per repeat.

    ``col_range`` limits the candidate cells to a half-open column range so
    validation holdouts never touch test columns.
    """
    if not 0.0 <= holdout_fraction < 1.0:
        raise ValueError("holdout fraction must lie in [0, 1)")
    panels, masks = [], []
    for r in range(repeats):
        rng = _rng(seed, "holdout", r)
        eligible = panel.mask.copy()
        if col_range is not None:
            lo, hi = col_range
            eligible[:, :lo] = False
            eligible[:, hi:] = False
        held = eligible & (rng.random(panel.mask.shape) < holdout_fraction)
        masked = replace(panel, values=np.where(held, 0.0, panel.zero_filled()), mask=panel.mask & ~held)
        panels.append(masked)
        masks.append(held)
    return ImputeEvalProtocol(base_panel=panel, panels=tuple(panels), holdout_masks=tuple(masks))


# ---------------------------------------------------------------------
# report assembly
# ---------------------------------------------------------------------

@dataclass
class ExperimentReport:
    task: str
    rows: list[dict]
    resolved_config: dict

    def sorted_rows(self) -> list[dict]:
        def key(row):
            return tuple(str(row.get(c, "")) for c in REPORT_COLUMNS)

        return sorted(self.rows, key=key)

    def csv_text(self) -> str:
        import csv as _csv
        import io

        buf = io.StringIO()
        writer = _csv.writer(buf, lineterminator="\r\n")
        writer.writerow(REPORT_COLUMNS)
        for row in self.sorted_rows():
            out = []
            for col in REPORT_COLUMNS:
                v = row.get(col)
                if v is None:
                    out.append("")
                elif isinstance(v, float):
                    out.append(f"{v:.12g}")
                else:
                    out.append(str(v))
            writer.writerow(out)
        return buf.getvalue()

    def json_text(self) -> str:
        payload = {"schema_version": SCHEMA_VERSION, "task": self.task, "rows": self.sorted_rows()}
        return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False, default=_json_default) + "\n"

    def config_text(self) -> str:
        return json.dumps(self.resolved_config, sort_keys=True, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if dataclasses.is_dataclass(o):
        return dataclasses.asdict(o)
    raise TypeError(f"not JSON serializable: {type(o)}")


def _row(task, **kw) -> dict:
    base = {c: None for c in REPORT_COLUMNS}
    base["task"] = task
    base.update(kw)
    if isinstance(base.get("value"), (int, np.integer)):
        base["value"] = float(base["value"])
    return base


# ---------------------------------------------------------------------
# data sources and splits
# ---------------------------------------------------------------------

@dataclass
class DataSource:
    panel: Panel | None  # fixed panel (CSV) or None when synthetic
    latent: np.ndarray | None
    factor: FactorModelSpec | None
    mixture: dict | None
    corruption: CorruptionSpec | None
    label: str

    def panel_for_seed(self, seed: int) -> tuple[Panel, np.ndarray | None]:
        """(observed panel, latent truth or None); corruption reseeded per run."""
        if self.panel is not None:
            return self.panel, self.latent
        corr = replace(self.corruption, seed=_sub_seed(self.corruption.seed, "corrupt", seed))
        if self.mixture is not None:
            latent = mixture_of_harmonics_panel(**self.mixture)
        else:
            latent = generate_latent(self.factor)
        return corrupt(latent, corr), latent.values


def _parse_data(d: dict, missing_token: str | None) -> DataSource:
    _check_keys(d, {"csv", "missing_token", "synthetic"}, "data")
    if ("csv" in d) == ("synthetic" in d):
        raise ConfigError("data needs exactly one of csv or synthetic")
    if "csv" in d:
        token = missing_token if missing_token is not None else d.get("missing_token", "")
        panel = load_csv(d["csv"], missing_token=token)
        return DataSource(panel=panel, latent=None, factor=None, mixture=None, corruption=None, label=Path(d["csv"]).name)
    syn = d["synthetic"]
    _check_keys(syn, {"factor", "mixture", "corruption"}, "data.synthetic")
    if ("factor" in syn) == ("mixture" in syn):
        raise ConfigError("synthetic data needs exactly one of factor or mixture")
    corruption = parse_corruption(syn.get("corruption", {}))
    if "factor" in syn:
        return DataSource(panel=None, latent=None, factor=parse_factor(syn["factor"]), mixture=None, corruption=corruption, label="factor")
    mix = dict(syn["mixture"])
    _check_keys(mix, {"n_left", "n_right", "rank", "n_steps", "n_harmonics", "seed"}, "data.synthetic.mixture")
    return DataSource(panel=None, latent=None, factor=None, mixture=mix, corruption=corruption, label="mixture")


def _parse_splits(d: dict | None, n_steps: int) -> dict[str, tuple[int, int]]:
    if d is None:
        return {}
    _check_keys(d, {"train", "val", "test"}, "splits")
    out = {}
    for name, rng_ in d.items():
        lo, hi = int(rng_[0]), int(rng_[1])
        if not 0 <= lo < hi <= n_steps:
            raise ConfigError(f"split {name} range [{lo}, {hi}) must lie inside [0, {n_steps})")
        out[name] = (lo, hi)
    names = sorted(out)
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            (alo, ahi), (blo, bhi) = out[a], out[b]
            if max(alo, blo) < min(ahi, bhi):
                raise ConfigError(f"overlapping splits: {a} and {b}")
    # validation fits only ever see columns below val_hi, so test must come after
    if "val" in out and "test" in out and out["val"][1] > out["test"][0]:
        raise ConfigError("the test range must come after the validation range")
    if "train" in out and "val" in out and out["train"][1] > out["val"][0]:
        raise ConfigError("the validation range must come after the training range")
    return out


@dataclass(frozen=True)
class GridCell:
    L: int | None
    policy: RankPolicy
    mode: str
    init: str

    def label(self) -> tuple:
        return (self.mode, "" if self.L is None else str(self.L), policy_label(self.policy), self.init)


def _parse_grid(d: dict | None, modes_allowed=("mssa", "ssa", "hssa", "vssa")) -> list[GridCell]:
    d = d or {}
    _check_keys(d, {"L", "policy", "mode", "init"}, "grid")
    Ls = d.get("L", [None])
    policies = [parse_policy(p) for p in d.get("policy", [{"kind": "energy"}])]
    modes = d.get("mode", ["mssa"])
    inits = d.get("init", ["zero"])
    for m in modes:
        if m not in modes_allowed:
            raise ConfigError(f"mode {m!r} not allowed for this task (allowed: {modes_allowed})")
    for i in inits:
        if i not in ("zero", "ffill"):
            raise ConfigError(f"unknown init {i!r}")
    return [
        GridCell(L=(None if L is None else int(L)), policy=p, mode=m, init=i)
        for m in modes
        for L in Ls
        for p in policies
        for i in inits
    ]


def _apply_init(panel: Panel, init: str) -> Panel:
    return initialize_missing(panel, "ffill") if init == "ffill" else panel


def _map_cells(cells, fn, workers: int):
    if workers <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, cells))


# ---------------------------------------------------------------------
# task drivers
# ---------------------------------------------------------------------

def _run_impute(cfg, source: DataSource, splits, seeds, workers) -> list[dict]:
    holdout = float(cfg.get("holdout_fraction", 0.1))
    repeats = int(cfg.get("repeats", 3))
    cells = _parse_grid(cfg.get("grid"))
    val = splits.get("val")
    test = splits.get("test")
    train = splits.get("train")
    panels = {seed: source.panel_for_seed(seed) for seed in seeds}

    def stats_mask_for(panel: Panel):
        if not train:
            return None
        m = np.zeros(panel.mask.shape, dtype=bool)
        m[:, train[0] : train[1]] = panel.mask[:, train[0] : train[1]]
        return m

    def evaluate(cell: GridCell, col_range, phase: str, seed: int):
        panel, truth = panels[seed]
        proto = impute_eval_protocol(panel, holdout, repeats if phase == "val" else 1, seed=_sub_seed(seed, phase), col_range=col_range)
        hi = col_range[1] if col_range else panel.n_steps
        scores = []
        for r, masked in enumerate(proto.panels):
            visible = replace(masked, values=masked.values[:, :hi], mask=masked.mask[:, :hi])
            est = impute(_apply_init(visible, cell.init), L=cell.L, policy=cell.policy, mode=cell.mode).estimates
            full_est = np.zeros(panel.values.shape)
            full_est[:, :hi] = est
            score = proto.score(r, full_est, truth=(truth if holdout == 0 else None), stats_mask=stats_mask_for(panel))
            scores.append((r, score, full_est, proto.holdout_masks[r]))
        return scores

    val_range = val if val else (0, panels[seeds[0]][0].n_steps)

    def run_cell(cell: GridCell):
        cell_rows, values = [], []
        mode, L, pol, init = cell.label()
        for seed in seeds:
            for r, score, _, _ in evaluate(cell, val_range, "val", seed):
                cell_rows.append(_row("impute", split="val", mode=mode, L=L, policy=pol, init=init, seed=seed, repeat=r, metric="nrmse", value=score))
                values.append(score)
        return cell_rows, float(np.mean(values))

    rows: list[dict] = []
    cell_means = {}
    for cell, (cell_rows, mean) in zip(cells, _map_cells(cells, run_cell, workers)):
        rows.extend(cell_rows)
        cell_means[cell.label()] = mean
    best_label = min(sorted(cell_means), key=lambda k: cell_means[k])
    best_cell = next(c for c in cells if c.label() == best_label)

    if test:
        for seed in seeds:
            truth = panels[seed][1]
            for r, score, est, held in evaluate(best_cell, test, "test", seed):
                mode, L, pol, init = best_cell.label()
                rows.append(_row("impute", split="test", mode=mode, L=L, policy=pol, init=init, seed=seed, repeat=r, metric="nrmse", value=score, selected=1))
                if truth is not None:
                    rows.append(_row("impute", split="test", mode=mode, L=L, policy=pol, init=init, seed=seed, repeat=r, metric="imp_err", value=imp_err(truth, est, held), selected=1))
    for label, mean in sorted(cell_means.items()):
        mode, L, pol, init = label
        rows.append(_row("impute", split="val", mode=mode, L=L, policy=pol, init=init, metric="mean_nrmse", value=(mean if np.isfinite(mean) else None), selected=int(label == best_label)))
    return rows


def _run_forecast(cfg, source: DataSource, splits, seeds, workers) -> list[dict]:
    horizon = int(cfg.get("horizon", 1))
    n_windows = int(cfg.get("windows", 1))
    cells = _parse_grid(cfg.get("grid"), modes_allowed=("mssa",))
    val = splits.get("val")
    test = splits.get("test")
    train = splits.get("train")
    rows: list[dict] = []

    def score_windows(cell: GridCell, panel: Panel, truth, upto: int, lo: int, seed: int, split: str):
        sub = replace(panel, values=panel.values[:, :upto], mask=panel.mask[:, :upto])
        if (upto - lo) < n_windows * horizon:
            raise ConfigError(f"{split} range too short for {n_windows} windows of horizon {horizon}")
        result = rolling_forecast(_apply_init(sub, cell.init), horizon=horizon, windows=n_windows, L=cell.L, policy=cell.policy)
        stats_mask = None
        if train:
            stats_mask = np.zeros(panel.mask.shape[:1] + (upto,), dtype=bool)
            stats_mask[:, train[0] : min(train[1], upto)] = panel.mask[:, train[0] : min(train[1], upto)]
        _, std = standardize_stats(sub.values, stats_mask if stats_mask is not None else sub.mask)
        out = []
        for w, wf in enumerate(result.windows):
            if not wf.times:
                out.append((w, None, "no-block-boundary-in-window"))
                continue
            times = np.asarray(wf.times)
            scored = panel.mask[:, times - 1]
            flags = "" if scored.any(axis=0).all() else "fully-missing-target-column"
            truth_vals = truth[:, times - 1] if truth is not None else panel.values[:, times - 1]
            diff = (truth_vals - wf.forecasts) / std[:, None]
            if truth is None:
                if not scored.any():
                    out.append((w, None, "no-observed-targets"))
                    continue
                score = float(np.sqrt(np.mean(diff[scored] ** 2)))
            else:
                score = float(np.sqrt(np.mean(diff**2)))
            out.append((w, score, flags))
        return out

    panels = {seed: source.panel_for_seed(seed) for seed in seeds}
    val_hi = val[1] if val else panels[seeds[0]][0].n_steps
    val_lo = val[0] if val else 0

    def run_cell(cell: GridCell):
        cell_rows, values = [], []
        mode, L, pol, init = cell.label()
        for seed in seeds:
            panel, truth = panels[seed]
            for w, score, flags in score_windows(cell, panel, truth, val_hi, val_lo, seed, "val"):
                cell_rows.append(_row("forecast", split="val", mode=mode, L=L, policy=pol, init=init, seed=seed, window=w, metric="nrmse", value=score, flags=flags or None))
                if score is not None:
                    values.append(score)
        return cell_rows, (float(np.mean(values)) if values else float("inf"))

    cell_means = {}
    for cell, (cell_rows, mean) in zip(cells, _map_cells(cells, run_cell, workers)):
        rows.extend(cell_rows)
        cell_means[cell.label()] = mean
    best_label = min(sorted(cell_means), key=lambda k: cell_means[k])
    best_cell = next(c for c in cells if c.label() == best_label)

    if test:
        for seed in seeds:
            panel, truth = panels[seed]
            for w, score, flags in score_windows(best_cell, panel, truth, test[1], test[0], seed, "test"):
                mode, L, pol, init = best_cell.label()
                rows.append(_row("forecast", split="test", mode=mode, L=L, policy=pol, init=init, seed=seed, window=w, metric="nrmse", value=score, selected=1, flags=flags or None))
    for label, mean in sorted(cell_means.items()):
        mode, L, pol, init = label
        rows.append(_row("forecast", split="val", mode=mode, L=L, policy=pol, init=init, metric="mean_nrmse", value=(mean if np.isfinite(mean) else None), selected=int(label == best_label)))
    return rows


def _run_variance(cfg, source: DataSource, splits, seeds, workers) -> list[dict]:
    cells = _parse_grid(cfg.get("grid"), modes_allowed=("mssa",))
    rows: list[dict] = []
    for cell in cells:
        for seed in seeds:
            panel, truth = source.panel_for_seed(seed)
            result = estimate_variance(_apply_init(panel, cell.init), L=cell.L, policy_mean=cell.policy, policy_sq=cell.policy)
            mode, L, pol, init = cell.label()
            flags = "partial-observations" if result.flagged_partial else None
            rows.append(_row("variance", split="all", mode=mode, L=L, policy=pol, init=init, seed=seed, metric="mean_sigma2", value=float(result.sigma2_hat.mean()), flags=flags))
            truth_var = _variance_truth(source, truth)
            if truth_var is not None:
                rows.append(_row("variance", split="all", mode=mode, L=L, policy=pol, init=init, seed=seed, metric="mse_sigma2", value=float(np.mean((result.sigma2_hat - truth_var) ** 2)), flags=flags))
    return rows


def _variance_truth(source: DataSource, truth) -> np.ndarray | None:
    if source.corruption is None or truth is None:
        return None
    c = source.corruption
    if c.variance_spec is not None:
        return generate_latent(c.variance_spec).values
    if isinstance(c.noise, GaussianNoise):
        return np.full_like(truth, c.noise.sigma**2)
    if isinstance(c.noise, PoissonObservations):
        return truth.copy()
    return np.zeros_like(truth)


def _run_diagnose(cfg, source: DataSource, splits, seeds, workers) -> list[dict]:
    energy = float(cfg.get("energy", 0.9))
    subset_sizes = cfg.get("subset_sizes")
    panel, _ = source.panel_for_seed(seeds[0])
    report = rank_scaling_report(panel, subset_sizes=subset_sizes, energy=energy)
    verdict = mssa_suitability(report)
    rows = [
        _row("diagnose", split="all", mode="stacked", L=r.L, seed=seeds[0], metric="effective_rank", value=float(r.effective_rank), window=r.n_series)
        for r in report.rows
    ]
    rows += [
        _row("diagnose", split="all", mode="series", L=r.L, seed=seeds[0], metric="effective_rank", value=float(r.effective_rank), window=i)
        for i, r in enumerate(report.per_series)
    ]
    score = {"favorable": 1.0, "inconclusive": 0.0, "unfavorable": -1.0}[verdict.verdict]
    rows.append(_row("diagnose", split="all", mode="stacked", metric="suitability", value=score, flags=f"{verdict.verdict}: {verdict.rationale}"))
    return rows


def _run_regimes(cfg, source: DataSource, splits, seeds, workers) -> list[dict]:
    if source.factor is None:
        raise ConfigError("regimes task needs synthetic factor data")
    cp_rank = cfg.get("cp_rank")
    results = compare_regimes(source.factor, source.corruption, seeds, cp_rank=(None if cp_rank is None else int(cp_rank)))
    return [
        _row("regimes", split="all", mode=r["method"], seed=r["seed"], metric="imp_err", value=float(r["imp_err"]))
        for r in results
    ]


# ---------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------

def run_experiment(config: dict, out_dir=None, seed: int = 0, workers: int = 1, missing_token: str | None = None) -> ExperimentReport:
    """Execute a config and optionally write report.csv / report.json / resolved-config.json."""
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    _check_keys(config, _TOP_KEYS, "config")
    version = config.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}; this build speaks {SCHEMA_VERSION}")
    task = config.get("task")
    if task not in TASKS:
        raise ConfigError(f"task must be one of {TASKS}, got {task!r}")
    if "data" not in config:
        raise ConfigError("config needs a data section")
    source = _parse_data(config["data"], missing_token)
    seeds = [int(s) for s in config.get("seeds", [0])]
    seeds = [_sub_seed(seed, "run", s) if seed else s for s in seeds]
    probe_panel, _ = source.panel_for_seed(seeds[0])
    splits = _parse_splits(config.get("splits"), probe_panel.n_steps)

    driver = {
        "impute": _run_impute,
        "forecast": _run_forecast,
        "variance": _run_variance,
        "diagnose": _run_diagnose,
        "regimes": _run_regimes,
    }[task]
    rows = driver(config, source, splits, seeds, workers)

    resolved = dict(config)
    resolved.update({"schema_version": SCHEMA_VERSION, "base_seed": seed, "effective_seeds": seeds, "package_version": __version__})
    report = ExperimentReport(task=task, rows=rows, resolved_config=resolved)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.csv").write_text(report.csv_text(), encoding="utf-8")
        (out / "report.json").write_text(report.json_text(), encoding="utf-8")
        (out / "resolved-config.json").write_text(report.config_text(), encoding="utf-8")
    return report
