"""Association networks from binary co-membership data."""

__version__ = "0.1.0"

from .conditional import (
    RegressionFit,
    RegressionMethod,
    conditional_edge_weights,
    nodewise_fit,
    signed_log_magnitude,
)
from .engine import BinaryMatrix, WeightTable, all_pairs, column_marginals, pair_counts, pair_index
from .ingest import (
    filter_min_degree,
    read_dense_csv,
    read_membership_pairs,
    write_dense_csv,
    write_membership_pairs,
)
from .measures import (
    AssociationWeight,
    ContingencyCounts,
    MeasureKind,
    PairProportions,
    agreement_weight,
    jaccard,
    p11_weight,
    pearson_phi,
    proportions_from_counts,
    simpson,
)
from .network import (
    ComparisonTable,
    WeightedNetwork,
    build_network,
    compare_measures,
    export,
    rank_edges,
    read_node_link_json,
)
from .synth import FeasibleEnvelope, feasible_envelope, sample_dyadic_independent, sample_leader_model
