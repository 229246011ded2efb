"""Bayesian stochastic block models with Gibbs-type partition priors.

Collapsed Gibbs sampling over node partitions of binary undirected
networks, with Dirichlet-multinomial, Dirichlet process, Pitman-Yor and
Gnedin priors, optional node-attribute supervision, VI-based posterior
summaries, marginal-likelihood comparison and new-node prediction.
"""

__version__ = "0.1.0"

from .cohesion import (
    AttributeCohesion,
    category_counts,
    log_cohesion,
    log_supervised_prior,
    log_supervised_urn_weight,
)
from .estimator import ESBM
from .inference import (
    BayesFactor,
    CredibleBall,
    HarmonicMarginal,
    SimilarityMatrix,
    VIStat,
    credible_ball,
    deviance,
    edge_misclassification,
    effective_sample_size,
    geweke_z,
    kass_raftery_label,
    log_bayes_factor,
    log_harmonic_marginal,
    point_estimate,
    similarity_matrix,
    vi_distance,
)
from .network import (
    AttributeTable,
    BlockCounts,
    Network,
    Partition,
    block_counts,
    canonicalize,
)
from .prediction import NewNodeEdges, predict_matrix, predict_membership, read_new_edges
from .priors import (
    DirichletMultinomial,
    DirichletProcess,
    GnedinProcess,
    HDistribution,
    PitmanYor,
    elicit_prior,
    gn_population_pmf,
    h_distribution,
    log_eppf,
    log_urn_weight,
    log_urn_weights,
    make_prior,
)
from .sampler import (
    LikelihoodSpec,
    SamplerConfig,
    ThetaEstimate,
    TraceStore,
    full_conditional,
    gibbs_sweeps,
    log_marginal_likelihood,
    run_chain,
    theta_plugin,
)
from .simulate import (
    PRESET_NAMES,
    GeneratorSpec,
    generate,
    generate_holdout,
    preset,
)

__all__ = [
    "AttributeCohesion",
    "AttributeTable",
    "BayesFactor",
    "BlockCounts",
    "CredibleBall",
    "DirichletMultinomial",
    "DirichletProcess",
    "ESBM",
    "GeneratorSpec",
    "GnedinProcess",
    "HDistribution",
    "HarmonicMarginal",
    "LikelihoodSpec",
    "Network",
    "NewNodeEdges",
    "PRESET_NAMES",
    "Partition",
    "PitmanYor",
    "SamplerConfig",
    "SimilarityMatrix",
    "ThetaEstimate",
    "TraceStore",
    "VIStat",
    "block_counts",
    "canonicalize",
    "category_counts",
    "credible_ball",
    "deviance",
    "edge_misclassification",
    "effective_sample_size",
    "elicit_prior",
    "full_conditional",
    "generate",
    "generate_holdout",
    "geweke_z",
    "gibbs_sweeps",
    "gn_population_pmf",
    "h_distribution",
    "kass_raftery_label",
    "log_bayes_factor",
    "log_cohesion",
    "log_eppf",
    "log_harmonic_marginal",
    "log_marginal_likelihood",
    "log_supervised_prior",
    "log_supervised_urn_weight",
    "log_urn_weight",
    "log_urn_weights",
    "make_prior",
    "point_estimate",
    "predict_matrix",
    "predict_membership",
    "preset",
    "read_new_edges",
    "run_chain",
    "similarity_matrix",
    "theta_plugin",
    "vi_distance",
]
