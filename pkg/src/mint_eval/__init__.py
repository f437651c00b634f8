"""Metric-interference-aware evaluation for machine translation.

Score ingestion, native chrF/BLEU, MBR selection, top-k filtering, a
regression random forest with the MINTAdjust correction built on it,
AutoRank ensembles, meta-evaluation statistics and a synthetic scenario
generator. Hot loops run in a compiled extension when it is available and
fall back to NumPy otherwise (see ``mint_eval._backend``).
"""

__version__ = "0.1.0"

from .registry import (  # noqa: E402
    CandidatePool,
    Family,
    MetricRegistry,
    MetricSpec,
    Polarity,
    ScoreTable,
    default_registry,
    join_segments,
    load_score_table,
)
from .lexmetrics import corpus_bleu, corpus_chrf, sentence_bleu, sentence_chrf  # noqa: E402
from .mbr import MbrConfig, mbr_select  # noqa: E402
from .filtering import Selection, jaccard, topk_filter  # noqa: E402
from .forest import ForestConfig, ForestModel, fit_forest, predict_forest  # noqa: E402
from .adjust import AdjustSpec, apply_mintadjust, train_human_ensemble, train_mintadjust  # noqa: E402
from .rankers import autorank_instance, autorank_system  # noqa: E402
from .metaeval import (  # noqa: E402
    borda,
    delta_quadrants,
    ins_pa,
    paired_bootstrap_p,
    spa,
    spearman_per_source,
)
from .report import MetaEvalReport, render_report  # noqa: E402

__all__ = [
    "AdjustSpec", "CandidatePool", "Family", "ForestConfig", "ForestModel", "MbrConfig", "MetaEvalReport",
    "MetricRegistry", "MetricSpec", "Polarity", "ScoreTable", "Selection", "apply_mintadjust",
    "autorank_instance", "autorank_system", "borda", "corpus_bleu", "corpus_chrf", "default_registry",
    "delta_quadrants", "fit_forest", "ins_pa", "jaccard", "join_segments", "load_score_table", "mbr_select",
    "paired_bootstrap_p", "predict_forest", "render_report", "sentence_bleu", "sentence_chrf", "spa",
    "spearman_per_source", "topk_filter", "train_human_ensemble", "train_mintadjust",
]
