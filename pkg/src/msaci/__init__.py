"""Online multi-step-ahead conformal forecasting: MIMO conformalised ridge
regression driven by per-step adaptive conformal inference."""

from .aci import AciConfig, AciState, MultiStepACI, PendingBuffer, current_significance, extract_errors, update
from .config import ExperimentConfig, load_config, parse_config
from .crr import IntervalVector, ResidualComponents, compute_components, predict_intervals
from .evaluation import RunMetrics, check_bounds, render_table
from .ingest import SeriesFrame, SupervisedPair, WindowConfig, load_csv, make_windows, stream_pairs
from .pipeline import run_experiment, run_on_frame, run_synthetic
from .ridge import GcvGrid, RidgeState, gcv_tune

__version__ = "0.1.0"
