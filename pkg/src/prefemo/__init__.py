"""Preference-based evolutionary multi-objective optimization toolkit."""

from .core import (
    BoxBounds,
    Dominance,
    Population,
    Solution,
    crowding_distance,
    fast_nondominated_sort,
    nondominated_fronts,
    normalize,
    pareto_compare,
)
from .scalarize import (
    ReferencePoint,
    WeightSet,
    augmented_asf,
    das_dennis,
    g_flag,
    nums_transform,
    r_compare,
    rmead2_resample,
    tchebycheff,
    weighted_distance,
)
from .problems import (
    AssetHistory,
    ProblemSpec,
    evaluate,
    evaluate_portfolio,
    load_asset_history,
    make_spec,
    repair_to_simplex,
    sample_true_front,
    synthetic_history,
)
from .metrics import (
    MetricRecord,
    TestOutcome,
    ep_accuracy,
    hypervolume,
    igd,
    r_hv,
    r_igd,
    r_preprocess,
    rank_table,
    wilcoxon_signed_rank,
)
from .algorithms import (
    ALGORITHM_KINDS,
    AlgorithmSpec,
    GenerationalEngine,
    RunResult,
    ibea_fitness,
    pbea_indicator,
    rnsga2_select,
    run,
)
from .variation import polynomial_mutation, sbx_crossover

__version__ = "0.1.0"
