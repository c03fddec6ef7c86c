"""Statistical models and their rI-projections."""

from divmax.modelzoo.expfam import (
    ProjResult,
    count_space,
    count_vectors,
    multinomial,
    project_independence,
    project_mpd,
    project_multinomial,
    project_partition,
)
from divmax.modelzoo.mixture import EMConfig, project_mixture_em
from divmax.modelzoo.models import (
    DBNModel,
    FullModel,
    IndependenceModel,
    MixtureModel,
    Model,
    MPDModel,
    MultinomialModel,
    PartitionModel,
    RBMModel,
    UMPDModel,
    UnionPartitionModel,
    exact_maximum,
    model_from_json,
)
from divmax.modelzoo.networks import (
    DbnParams,
    NetConfig,
    RbmParams,
    dbn_visible,
    project_dbn,
    project_rbm,
    rbm_visible,
)
from divmax.modelzoo.transfer import check_projection_in_submodel
from divmax.modelzoo.unions import divergence_from_umpd, divergence_from_union_partitions, random_mpd_member
from divmax.partitions import CubicalPartition, CubicalSet, Partition

__all__ = [
    "CubicalPartition", "CubicalSet", "DBNModel", "DbnParams", "EMConfig", "FullModel",
    "IndependenceModel", "MPDModel", "MixtureModel", "Model", "MultinomialModel", "NetConfig",
    "Partition", "PartitionModel", "ProjResult", "RBMModel", "RbmParams", "UMPDModel",
    "UnionPartitionModel", "check_projection_in_submodel", "count_space", "count_vectors",
    "dbn_visible", "divergence_from_umpd", "divergence_from_union_partitions", "exact_maximum",
    "model_from_json", "multinomial", "project_dbn", "project_independence", "project_mixture_em",
    "project_mpd", "project_multinomial", "project_partition", "project_rbm", "random_mpd_member",
    "rbm_visible",
]
