"""Synthetic visual-reasoning benchmark harness for image-to-video models.

The pipeline, end to end:

- :mod:`vireo.taskgen` renders seeded reasoning tasks (mazes, sudoku,
  arithmetic, sorting, counting, ...) as an initial frame, a prompt, and a
  machine-checkable ground truth.
- :mod:`vireo.verify` decides whether a generated clip actually solved the
  task, with classical vision only — no learned judge required for most
  task families.
- :mod:`vireo.harness` runs k seeded generations per sample, scores Pass@k,
  and aggregates per-dimension/difficulty/task reports.
- :mod:`vireo.tpo` optimizes prompts at test time through a
  loss -> gradient -> update loop in natural language, plus pre-/post-rewrite
  baselines and reward ranking.
- :mod:`vireo.modelio` speaks to real generator/judge/embedder/grounder
  endpoints over HTTP and provides built-in substitutes (ground-truth
  replay, analytic embedder, color grounder, a local stub server) so the
  whole pipeline runs hermetically.

The ``vireo`` command line exposes dataset generation, evaluation, prompt
optimization, reporting, prompt authoring, and the stub server.
"""

from .config import (
    AppConfig,
    build_embedder,
    build_generator,
    build_grounder,
    build_judge,
    load_config,
)
from .core import (
    SCHEMA_VERSION,
    BarOrder,
    BBox,
    ChoiceLetter,
    ConfigError,
    Dataset,
    DatasetError,
    Difficulty,
    DigitSequence,
    Dimension,
    DIMENSION_OF_TASK,
    EliminationOrder,
    ExprResult,
    Frame,
    MazeTruth,
    MetricError,
    ObjectRef,
    ObjectSet,
    PixelTarget,
    QAItem,
    QASet,
    SudokuGrid,
    TargetRegion,
    Task,
    TaskSample,
    Verdict,
    VideoClip,
    load_clip,
    load_dataset,
    read_verdicts,
    save_clip,
    save_dataset,
    write_verdicts,
)
from .harness import (
    EvalConfig,
    Report,
    Strategy,
    aggregate_report,
    pass_at_k,
    pass_at_k_detail,
    render_csv,
    render_json,
    render_markdown,
    run_eval,
)
from .modelio import (
    ColorGrounder,
    Detection,
    Embedder,
    GeneratorClient,
    Grounder,
    HttpEmbedder,
    HttpGenerator,
    HttpGrounder,
    HttpJudge,
    JudgeClient,
    OracleGenerator,
    PatchHistogramEmbedder,
    ScriptedJudge,
    StubServer,
)
from .tpo import (
    PromptTemplateSet,
    RewardDeps,
    RewardScorer,
    TpoConfig,
    TpoTrace,
    author_prompt,
    default_templates,
    load_templates,
    load_trace,
    post_rewrite,
    pre_rewrite,
    rank_by_reward,
    run_tpo,
    save_trace,
)
from .track import TrackConfig, Trajectory, extract_trajectory
from .verify import VerifierDeps, VerifyConfig, verify_final

__version__ = "0.1.0"

__all__ = [
    "AppConfig",
    "BarOrder",
    "BBox",
    "ChoiceLetter",
    "ColorGrounder",
    "ConfigError",
    "Dataset",
    "DatasetError",
    "Detection",
    "Difficulty",
    "DigitSequence",
    "Dimension",
    "DIMENSION_OF_TASK",
    "EliminationOrder",
    "Embedder",
    "EvalConfig",
    "ExprResult",
    "Frame",
    "GeneratorClient",
    "Grounder",
    "HttpEmbedder",
    "HttpGenerator",
    "HttpGrounder",
    "HttpJudge",
    "JudgeClient",
    "MazeTruth",
    "MetricError",
    "ObjectRef",
    "ObjectSet",
    "OracleGenerator",
    "PatchHistogramEmbedder",
    "PixelTarget",
    "PromptTemplateSet",
    "QAItem",
    "QASet",
    "Report",
    "RewardDeps",
    "RewardScorer",
    "SCHEMA_VERSION",
    "ScriptedJudge",
    "Strategy",
    "StubServer",
    "SudokuGrid",
    "TargetRegion",
    "Task",
    "TaskSample",
    "TpoConfig",
    "TpoTrace",
    "TrackConfig",
    "Trajectory",
    "Verdict",
    "VerifierDeps",
    "VerifyConfig",
    "VideoClip",
    "aggregate_report",
    "author_prompt",
    "build_embedder",
    "build_generator",
    "build_grounder",
    "build_judge",
    "default_templates",
    "extract_trajectory",
    "load_clip",
    "load_config",
    "load_dataset",
    "load_templates",
    "load_trace",
    "pass_at_k",
    "pass_at_k_detail",
    "post_rewrite",
    "pre_rewrite",
    "rank_by_reward",
    "read_verdicts",
    "render_csv",
    "render_json",
    "render_markdown",
    "run_eval",
    "run_tpo",
    "save_clip",
    "save_dataset",
    "save_trace",
    "verify_final",
    "write_verdicts",
]
