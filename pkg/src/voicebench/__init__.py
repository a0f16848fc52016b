"""Voice-feature benchmark: MFCC extraction, five from-scratch binary
classifiers, repeated stratified subsampling, and a nonparametric
model-comparison chain with reproducible outputs.
"""
from .audio import AudioClip, decode_wav, fix_duration, read_wav, resample
from .data import (
    LabeledDataset,
    ScalerState,
    SplitTriple,
    apply_scaler,
    fit_scaler,
    load_audio_dataset,
    load_tabular_dataset,
    oversample,
    stratified_split,
)
from .harness import (
    DatasetSpec,
    ExperimentConfig,
    RunRecord,
    RunTable,
    StatReport,
    analyze,
    emit_outputs,
    run_experiment,
)
from .metrics import ConfusionMatrix, MetricSet, confusion, metric_set, score
from .mfcc import MfccParams, mel_filterbank, mfcc, stft_power, temporal_mean
from .models import CANONICAL_KINDS, ClassifierSpec, fit, make_spec
from .stats import (
    PairwiseMatrix,
    TestResult,
    compact_letters,
    dunn_bonferroni,
    kruskal_wallis,
    levene,
    shapiro_wilk,
)

__version__ = "0.1.0"
