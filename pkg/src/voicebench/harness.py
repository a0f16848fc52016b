"""Repeated-subsampling experiment harness.

Every (run, model) pair is an independent task: it re-derives the run's
split and oversampling from seeds, trains one model, and scores the held
out test rows. Within a run all models therefore see byte-identical data,
and results do not depend on worker count or completion order. Wall-clock
timings are kept out of runs.csv (they would break reproducible bytes) and
go to a sidecar file instead.

Seed derivation, fixed forever:
    run_seed   = (base_seed & 0xFFFFFFFFFFFFFFFF) XOR run_index
    stream     = SeedSequence((run_seed, stream_id)), one 64-bit word
    stream ids: 0 split, 1 oversample train, 2 oversample validation,
                3 + index of the model kind in CANONICAL_KINDS
"""
from __future__ import annotations

import csv
import hashlib
import io
import multiprocessing
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import metrics, stats
from .data import LabeledDataset, load_audio_dataset, load_tabular_dataset, oversample, stratified_split
from .errors import (
    AllTied,
    TooFewModels,
    TooFewRuns,
    UsageError,
    VoicebenchError,
    WriteError,
    ZeroVariance,
)
from .jsonio import canonical_dumps, canonical_loads, format_float
from .mfcc import MfccParams
from .models import CANONICAL_KINDS, ClassifierSpec, fit, make_spec

FORMAT_VERSION = 1
_MASK64 = 0xFFFFFFFFFFFFFFFF

STREAM_SPLIT = 0
STREAM_OVERSAMPLE_TRAIN = 1
STREAM_OVERSAMPLE_VAL = 2
STREAM_MODEL_BASE = 3

RUNS_CSV_COLUMNS = (
    "run_index", "model", "seed",
    "accuracy", "precision", "recall", "f1",
    "early_stopped", "split_hash",
)

DEFAULT_OUTPUT_ENV = "VOICEBENCH_OUT"


def run_seed(base_seed: int, run_index: int) -> int:
    return (int(base_seed) & _MASK64) ^ int(run_index)


def stream_seed(run_seed_value: int, stream_id: int) -> int:
    seq = np.random.SeedSequence((run_seed_value, stream_id))
    return int(seq.generate_state(1, np.uint64)[0])


def model_stream_id(kind: str) -> int:
    return STREAM_MODEL_BASE + CANONICAL_KINDS.index(kind)


# --- configuration ---------------------------------------------------------

@dataclass(frozen=True)
class DatasetSpec:
    """Where the rows come from: a WAV tree with a manifest, or a CSV."""

    kind: str  # "audio" | "tabular"
    root: str | None = None
    manifest: str | None = None
    csv: str | None = None
    label_column: str | None = None
    drop_columns: tuple = ()

    def __post_init__(self):
        if self.kind == "audio":
            if not self.root or not self.manifest:
                raise UsageError("audio dataset needs 'root' and 'manifest'")
        elif self.kind == "tabular":
            if not self.csv or not self.label_column:
                raise UsageError("tabular dataset needs 'csv' and 'label_column'")
        else:
            raise UsageError(f"unknown dataset kind {self.kind!r}")

    def to_dict(self) -> dict:
        if self.kind == "audio":
            return {"kind": "audio", "root": self.root, "manifest": self.manifest}
        return {
            "kind": "tabular",
            "csv": self.csv,
            "label_column": self.label_column,
            "drop_columns": list(self.drop_columns),
        }

    @staticmethod
    def from_dict(raw: dict) -> "DatasetSpec":
        return DatasetSpec(
            kind=raw.get("kind", ""),
            root=raw.get("root"),
            manifest=raw.get("manifest"),
            csv=raw.get("csv"),
            label_column=raw.get("label_column"),
            drop_columns=tuple(raw.get("drop_columns", ())),
        )


def load_manifest(path) -> dict[str, int]:
    """Manifest JSON: {"format_version": 1, "groups": {"dirname": 0|1}}."""
    with open(path) as fh:
        raw = canonical_loads(fh.read())
    groups = raw.get("groups")
    if not isinstance(groups, dict) or not groups:
        raise UsageError(f"{path}: manifest needs a non-empty 'groups' object")
    out = {}
    for name, label in groups.items():
        if label not in (0, 1):
            raise UsageError(f"{path}: group {name!r} label must be 0 or 1")
        out[str(name)] = int(label)
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetSpec
    models: tuple = CANONICAL_KINDS
    model_params: dict = field(default_factory=dict)
    runs: int = 1000
    base_seed: int = 0
    workers: int = 1
    alpha: float = 0.05
    output_dir: str = ""

    def __post_init__(self):
        if self.runs < 1:
            raise UsageError(f"runs must be >= 1, got {self.runs}")
        if self.workers < 1:
            raise UsageError(f"workers must be >= 1, got {self.workers}")
        if not (0.0 < self.alpha < 1.0):
            raise UsageError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.models:
            raise UsageError("need at least one model")
        seen = set()
        for kind in self.models:
            if kind not in CANONICAL_KINDS:
                raise UsageError(
                    f"unknown model kind {kind!r}; valid kinds: "
                    f"{', '.join(CANONICAL_KINDS)}"
                )
            if kind in seen:
                raise UsageError(f"model kind {kind!r} listed twice")
            seen.add(kind)
        for kind, overrides in self.model_params.items():
            make_spec(kind, overrides)  # validates names eagerly
        object.__setattr__(self, "models", tuple(self.models))
        if not self.output_dir:
            object.__setattr__(
                self, "output_dir", os.environ.get(DEFAULT_OUTPUT_ENV, "voicebench_out")
            )

    def fingerprint(self) -> str:
        # workers and output_dir are execution details; everything that can
        # change a result row (or the analysis) is hashed
        payload = {
            "dataset": self.dataset.to_dict(),
            "models": list(self.models),
            "model_params": {k: dict(v) for k, v in sorted(self.model_params.items())},
            "runs": self.runs,
            "base_seed": self.base_seed,
            "alpha": self.alpha,
        }
        digest = hashlib.sha256(canonical_dumps(payload).encode()).hexdigest()
        return digest[:16]

    @staticmethod
    def from_dict(raw: dict, overrides: dict | None = None) -> "ExperimentConfig":
        merged = dict(raw)
        for key, value in (overrides or {}).items():
            if value is not None:
                merged[key] = value
        if "dataset" not in merged:
            raise UsageError("config needs a 'dataset' section")
        known = {"dataset", "models", "model_params", "runs", "base_seed",
                 "workers", "alpha", "output_dir", "format_version"}
        for key in merged:
            if key not in known:
                raise UsageError(f"unknown config key {key!r}")
        return ExperimentConfig(
            dataset=DatasetSpec.from_dict(merged["dataset"]),
            models=tuple(merged.get("models", CANONICAL_KINDS)),
            model_params={
                str(k): dict(v) for k, v in merged.get("model_params", {}).items()
            },
            runs=int(merged.get("runs", 1000)),
            base_seed=int(merged.get("base_seed", 0)),
            workers=int(merged.get("workers", 1)),
            alpha=float(merged.get("alpha", 0.05)),
            output_dir=str(merged.get("output_dir", "")),
        )

    @staticmethod
    def from_file(path, overrides: dict | None = None) -> "ExperimentConfig":
        with open(path) as fh:
            raw = canonical_loads(fh.read())
        if not isinstance(raw, dict):
            raise UsageError(f"{path}: config must be a JSON object")
        return ExperimentConfig.from_dict(raw, overrides)


def load_dataset(spec: DatasetSpec, params: MfccParams | None = None) -> LabeledDataset:
    if spec.kind == "audio":
        return load_audio_dataset(spec.root, load_manifest(spec.manifest), params)
    return load_tabular_dataset(spec.csv, spec.label_column, tuple(spec.drop_columns))


# --- run records ------------------------------------------------------------

@dataclass(frozen=True)
class RunRecord:
    run_index: int
    model: str
    seed: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    early_stopped: bool | None
    split_hash: str
    train_ms: float | None = None


@dataclass(frozen=True)
class RunTable:
    records: tuple
    config_fingerprint: str

    def model_order(self) -> list[str]:
        seen = []
        for record in self.records:
            if record.model not in seen:
                seen.append(record.model)
        return seen

    def run_indices(self) -> list[int]:
        return sorted({record.run_index for record in self.records})

    def accuracies(self, model: str) -> np.ndarray:
        rows = [r for r in self.records if r.model == model]
        rows.sort(key=lambda r: r.run_index)
        return np.array([r.accuracy for r in rows])


def _split_hash(split) -> str:
    digest = hashlib.sha256()
    for name, idx in (
        ("train", split.train_idx),
        ("validation", split.validation_idx),
        ("test", split.test_idx),
    ):
        digest.update(name.encode())
        digest.update(np.ascontiguousarray(idx, dtype=np.int64).tobytes())
    return digest.hexdigest()[:16]


def execute_task(
    dataset: LabeledDataset,
    model_params: dict,
    run_index: int,
    base_seed: int,
    kind: str,
) -> RunRecord:
    """Train and score one model for one run; pure given its arguments."""
    rs = run_seed(base_seed, run_index)
    split = stratified_split(dataset, stream_seed(rs, STREAM_SPLIT))
    train = oversample(
        split.train_features, split.train_labels,
        stream_seed(rs, STREAM_OVERSAMPLE_TRAIN),
    )
    validation = oversample(
        split.validation_features, split.validation_labels,
        stream_seed(rs, STREAM_OVERSAMPLE_VAL),
    )
    spec = ClassifierSpec(kind, dict(model_params.get(kind, {})))
    model = fit(spec, train, validation, seed=stream_seed(rs, model_stream_id(kind)))
    scored = metrics.score(split.test_labels, model.predict(split.test_features))
    return RunRecord(
        run_index=run_index,
        model=kind,
        seed=rs,
        accuracy=scored.accuracy,
        precision=scored.precision,
        recall=scored.recall,
        f1=scored.f1,
        early_stopped=model.meta.early_stopped,
        split_hash=_split_hash(split),
        train_ms=model.meta.train_ms,
    )


_WORKER_DATASET = None
_WORKER_PARAMS = None
_WORKER_SEED = None


def _worker_init(features, labels, source_name, model_params, base_seed):
    global _WORKER_DATASET, _WORKER_PARAMS, _WORKER_SEED
    _WORKER_DATASET = LabeledDataset(features, labels, source_name=source_name)
    _WORKER_PARAMS = model_params
    _WORKER_SEED = base_seed


def _worker_task(task):
    run_index, kind = task
    return execute_task(_WORKER_DATASET, _WORKER_PARAMS, run_index, _WORKER_SEED, kind)


def run_experiment(
    config: ExperimentConfig,
    dataset: LabeledDataset | None = None,
    existing: RunTable | None = None,
    progress=None,
) -> RunTable:
    """Produce one RunRecord per (run, model), reusing rows from `existing`.

    The output ordering is (run_index, position of model in config.models)
    regardless of worker count, which is what makes runs.csv reproducible.
    """
    if dataset is None:
        dataset = load_dataset(config.dataset)
    fingerprint = config.fingerprint()

    have = {}
    if existing is not None:
        if existing.config_fingerprint and existing.config_fingerprint != fingerprint:
            raise UsageError(
                "existing results were produced by a different configuration "
                f"({existing.config_fingerprint} != {fingerprint})"
            )
        have = {(r.run_index, r.model): r for r in existing.records}

    tasks = [
        (run_index, kind)
        for run_index in range(config.runs)
        for kind in config.models
        if (run_index, kind) not in have
    ]

    computed = {}
    if tasks:
        workers = min(config.workers, len(tasks))
        if workers > 1:
            ctx = multiprocessing.get_context()
            with ctx.Pool(
                processes=workers,
                initializer=_worker_init,
                initargs=(dataset.features, dataset.labels, dataset.source_name,
                          config.model_params, config.base_seed),
            ) as pool:
                for i, record in enumerate(pool.imap(_worker_task, tasks, chunksize=1)):
                    computed[(record.run_index, record.model)] = record
                    if progress:
                        progress(i + 1, len(tasks))
        else:
            for i, task in enumerate(tasks):
                record = execute_task(
                    dataset, config.model_params, task[0], config.base_seed, task[1]
                )
                computed[(record.run_index, record.model)] = record
                if progress:
                    progress(i + 1, len(tasks))

    ordered = []
    for run_index in range(config.runs):
        for kind in config.models:
            key = (run_index, kind)
            ordered.append(have[key] if key in have else computed[key])
    return RunTable(records=tuple(ordered), config_fingerprint=fingerprint)


# --- file formats -----------------------------------------------------------

def _write_text(path, text: str):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise WriteError(f"{path}: {exc}") from None


def _bool_cell(value: bool | None) -> str:
    if value is None:
        return ""
    return "true" if value else "false"


def runs_csv_text(table: RunTable) -> str:
    out = io.StringIO()
    out.write(f"# format_version={FORMAT_VERSION}\n")
    out.write(f"# config_fingerprint={table.config_fingerprint}\n")
    out.write(",".join(RUNS_CSV_COLUMNS) + "\n")
    for r in table.records:
        out.write(
            f"{r.run_index},{r.model},{r.seed},"
            f"{format_float(r.accuracy)},{format_float(r.precision)},"
            f"{format_float(r.recall)},{format_float(r.f1)},"
            f"{_bool_cell(r.early_stopped)},{r.split_hash}\n"
        )
    return out.getvalue()


def write_runs_csv(table: RunTable, path) -> None:
    _write_text(path, runs_csv_text(table))


def read_runs_csv(path) -> RunTable:
    fingerprint = ""
    rows = []
    with open(path, newline="") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                if line.startswith("# config_fingerprint="):
                    fingerprint = line.split("=", 1)[1]
                continue
            rows.append(line)
    if not rows:
        raise VoicebenchError(f"{path}: no header row")
    header = rows[0].split(",")
    if tuple(header) != RUNS_CSV_COLUMNS:
        raise VoicebenchError(f"{path}: unexpected columns {header}")
    records = []
    for row in csv.reader(rows[1:]):
        if not row:
            continue
        records.append(RunRecord(
            run_index=int(row[0]),
            model=row[1],
            seed=int(row[2]),
            accuracy=float(row[3]),
            precision=float(row[4]),
            recall=float(row[5]),
            f1=float(row[6]),
            early_stopped=None if row[7] == "" else row[7] == "true",
            split_hash=row[8],
        ))
    return RunTable(records=tuple(records), config_fingerprint=fingerprint)


def timings_csv_text(table: RunTable) -> str:
    out = io.StringIO()
    out.write(f"# format_version={FORMAT_VERSION}\n")
    out.write("run_index,model,train_ms\n")
    for r in table.records:
        if r.train_ms is None:
            continue  # rows reloaded from disk have no fresh timing
        out.write(f"{r.run_index},{r.model},{format_float(r.train_ms)}\n")
    return out.getvalue()


def boxplot_csv_text(table: RunTable) -> str:
    out = io.StringIO()
    out.write(f"# format_version={FORMAT_VERSION}\n")
    out.write("model,run_index,accuracy\n")
    for model in table.model_order():
        for r in table.records:
            if r.model == model:
                out.write(f"{model},{r.run_index},{format_float(r.accuracy)}\n")
    return out.getvalue()


# --- analysis ---------------------------------------------------------------

_METRIC_NAMES = ("accuracy", "precision", "recall", "f1")


@dataclass(frozen=True)
class StatReport:
    alpha: float
    n_runs: int
    models: tuple
    descriptives: dict
    normality: dict
    variance_homogeneity: dict
    omnibus: dict
    pairwise: dict
    letters: dict
    config_fingerprint: str

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "alpha": self.alpha,
            "n_runs": self.n_runs,
            "models": list(self.models),
            "descriptives": self.descriptives,
            "normality": self.normality,
            "variance_homogeneity": self.variance_homogeneity,
            "omnibus": self.omnibus,
            "pairwise": self.pairwise,
            "letters": self.letters,
            "config_fingerprint": self.config_fingerprint,
        }


def _test_result_dict(result: stats.TestResult) -> dict:
    out = {
        "status": "ok",
        "statistic": result.statistic,
        "p_value": result.p_value,
    }
    if result.df is not None:
        out["df"] = list(result.df) if isinstance(result.df, tuple) else result.df
    return out


def analyze(table: RunTable, alpha: float = 0.05) -> StatReport:
    """Descriptives plus the normality/variance/omnibus/post-hoc chain.

    Groups are per-model accuracy series over runs. Degenerate situations
    (zero-variance group, all values tied) are reported as structured
    entries instead of aborting, since they are legitimate outcomes of a
    saturated benchmark.
    """
    models = table.model_order()
    if len(models) < 2:
        raise TooFewModels(f"need at least 2 models to compare, got {len(models)}")
    n_runs = len(table.run_indices())
    if n_runs < 3:
        raise TooFewRuns(f"need at least 3 runs for the tests, got {n_runs}")

    groups = [table.accuracies(model) for model in models]
    for model, acc in zip(models, groups):
        if acc.size != n_runs:
            raise TooFewRuns(
                f"model {model!r} has {acc.size} rows but {n_runs} runs exist"
            )

    descriptives = {}
    for model in models:
        rows = sorted(
            (r for r in table.records if r.model == model),
            key=lambda r: r.run_index,
        )
        descriptives[model] = {}
        for name in _METRIC_NAMES:
            series = np.array([getattr(r, name) for r in rows])
            descriptives[model][name] = {
                "mean": float(series.mean()),
                "std": float(series.std(ddof=1)),
            }

    normality = {}
    for model, acc in zip(models, groups):
        try:
            normality[model] = _test_result_dict(stats.shapiro_wilk(acc))
        except ZeroVariance:
            normality[model] = {"status": "degenerate-zero-variance"}

    variance = _test_result_dict(stats.levene(groups))

    try:
        omnibus = _test_result_dict(stats.kruskal_wallis(groups))
    except AllTied:
        omnibus = {"status": "degenerate-all-tied"}

    pairwise_matrix = stats.dunn_bonferroni(groups)
    letters_list = stats.compact_letters(pairwise_matrix.adjusted_p, alpha)

    pairwise = {
        "models": list(models),
        "z": pairwise_matrix.z.tolist(),
        "raw_p": pairwise_matrix.raw_p.tolist(),
        "adjusted_p": pairwise_matrix.adjusted_p.tolist(),
    }
    letters = {model: letters_list[i] for i, model in enumerate(models)}

    return StatReport(
        alpha=alpha,
        n_runs=n_runs,
        models=tuple(models),
        descriptives=descriptives,
        normality=normality,
        variance_homogeneity=variance,
        omnibus=omnibus,
        pairwise=pairwise,
        letters=letters,
        config_fingerprint=table.config_fingerprint,
    )


def emit_outputs(table: RunTable, report: StatReport | None, out_dir) -> dict:
    """Write runs.csv, timings.csv, and (when a report is given)
    report.json plus boxplot_accuracy.csv. Returns {name: path}."""
    out_dir = Path(out_dir)
    paths = {}
    write_runs_csv(table, out_dir / "runs.csv")
    paths["runs"] = str(out_dir / "runs.csv")
    _write_text(out_dir / "timings.csv", timings_csv_text(table))
    paths["timings"] = str(out_dir / "timings.csv")
    if report is not None:
        _write_text(out_dir / "report.json", canonical_dumps(report.to_dict()))
        paths["report"] = str(out_dir / "report.json")
        _write_text(out_dir / "boxplot_accuracy.csv", boxplot_csv_text(table))
        paths["boxplot"] = str(out_dir / "boxplot_accuracy.csv")
    return paths


def dump_splits_csv(config: ExperimentConfig, dataset: LabeledDataset) -> str:
    """Partition membership per run, for auditing subsampling behaviour."""
    out = io.StringIO()
    out.write(f"# format_version={FORMAT_VERSION}\n")
    out.write("run_index,partition,row_index\n")
    for run_index in range(config.runs):
        rs = run_seed(config.base_seed, run_index)
        split = stratified_split(dataset, stream_seed(rs, STREAM_SPLIT))
        for name, idx in (
            ("train", split.train_idx),
            ("validation", split.validation_idx),
            ("test", split.test_idx),
        ):
            for row in idx:
                out.write(f"{run_index},{name},{row}\n")
    return out.getvalue()


def stderr_progress(done: int, total: int):
    if done == total or done % max(1, total // 20) == 0:
        print(f"  {done}/{total} tasks", file=sys.stderr, flush=True)
