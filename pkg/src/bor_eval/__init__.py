"""bor-eval: chance-corrected selectivity metrics for retrieval evaluation.

Measures how many bits of evidence a retrieval system provides over a
uniform random sampler at the same depth, and diagnoses when growing
candidate lists stop being able to show anything at all.
"""

from .probability import (
    BaselineParams,
    Probability,
    lambda_rate,
    log_choose,
    mean_probability,
    p_rand_at_least_m,
    p_rand_binomial,
    p_rand_coverage,
    p_rand_poisson,
)
from .metrics import (
    BorValue,
    CeilingReport,
    DepthDelta,
    bor,
    bor_opt,
    bor_recall,
    ceilings,
    depth_delta,
    enrichment_factor,
)
from .ingest import (
    DatasetStats,
    Document,
    Judgments,
    LabeledCorpus,
    ParseError,
    Run,
    class_relevance,
    dataset_stats,
    extract_subject,
    parse_corpus,
    parse_qrels,
    parse_run,
    write_qrels,
    write_run,
)
from .evaluator import (
    BootstrapCI,
    BorReport,
    NoEvaluableQueriesError,
    SuccessRule,
    bootstrap_ci,
    depth_sweep,
    evaluate,
    query_success,
)
from .bm25 import Bm25Params, InvertedIndex, build_index, make_run, search, tokenize
from .simulate import (
    NEWSGROUPS_TRAIN_CLASS_SIZES,
    SyntheticSpec,
    TrialConfig,
    boundary_map,
    generate_class_corpus,
    monte_carlo_p,
    simulate_sweep,
)
from .advisor import (
    CatalogScenario,
    CollapseDiagnostic,
    DepthRecommendation,
    ScenarioResult,
    catalog_report,
    diagnose,
    recommend_k,
)

__version__ = "0.1.0"
