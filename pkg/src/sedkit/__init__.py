"""Correction toolkit for Bayesian network structures learned from data with
measurement error: find the 3-vertex cliques such error induces and remove
the spurious edges that hidden-variable reconstructions explain better.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .data import Dataset, SufficientStats, Variable, counts, read_csv, write_csv
from .em import EmConfig, EmResult, em_fit, posterior_hidden
from .evaluation import EvalReport, clique_count, compare_cpdags
from .graph import (
    Edge,
    MixedGraph,
    augment_with_noisy_children,
    cpdag_to_dag,
    d_separated,
    dag_to_cpdag,
    directed_edge,
    find_3_cliques,
    load_graph,
    neighbors,
    save_graph,
    undirected_edge,
)
from .learn import HcConfig, export_graph, hill_climb, import_graph
from .model import (
    BayesNet,
    Cpt,
    NoiseChannel,
    corrupt,
    draw_noise_channel,
    forward_sample,
    load_network,
    random_bn,
    save_network,
)
from .score import BicScore, bic_complete, bic_hidden, loglik_complete
from .sed import (
    ReconstructionResult,
    RemovalRecord,
    SedConfig,
    SedState,
    build_cse,
    reconstruction,
    run_sed,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "Dataset",
    "SufficientStats",
    "Variable",
    "counts",
    "read_csv",
    "write_csv",
    "EmConfig",
    "EmResult",
    "em_fit",
    "posterior_hidden",
    "EvalReport",
    "clique_count",
    "compare_cpdags",
    "Edge",
    "MixedGraph",
    "augment_with_noisy_children",
    "cpdag_to_dag",
    "d_separated",
    "dag_to_cpdag",
    "directed_edge",
    "find_3_cliques",
    "load_graph",
    "neighbors",
    "save_graph",
    "undirected_edge",
    "HcConfig",
    "export_graph",
    "hill_climb",
    "import_graph",
    "BayesNet",
    "Cpt",
    "NoiseChannel",
    "corrupt",
    "draw_noise_channel",
    "forward_sample",
    "load_network",
    "random_bn",
    "save_network",
    "BicScore",
    "bic_complete",
    "bic_hidden",
    "loglik_complete",
    "ReconstructionResult",
    "RemovalRecord",
    "SedConfig",
    "SedState",
    "build_cse",
    "reconstruction",
    "run_sed",
    "__version__",
]
