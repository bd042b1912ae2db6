from .baseline import baseline_csv, random_baseline
from .config import BenchmarkConfig
from .reports import PHASES, phase_report, render_text, write_report
from .runner import MatrixCache, RunResult, run_benchmark
from .store import ResultStore, ScoreRecord, export_scores, import_scores

__all__ = [
    "PHASES",
    "BenchmarkConfig",
    "MatrixCache",
    "ResultStore",
    "RunResult",
    "ScoreRecord",
    "baseline_csv",
    "export_scores",
    "import_scores",
    "phase_report",
    "random_baseline",
    "render_text",
    "run_benchmark",
    "write_report",
]
