"""Achievable and converse rates for broadcast function computation over
finite fields, via characteristic graphs, plus an operational compress-bin
coding simulator.

The hot simulation kernel is compiled (Cython) when available, with a pure
numpy fallback selected automatically at import; see
:func:`compbcast.simulate.default_backend`.
"""

from .errors import (
    CompBcastError,
    DemandParseError,
    EnumerationTimeout,
    GuardExceeded,
    InstanceFormatError,
    InvalidInstanceError,
)
from .expr import parse_demand, pretty
from .model import (
    Instance,
    UserSpec,
    demand_table,
    expand_demand,
    load_bundled_instance,
    load_instance,
    make_instance,
    support,
    validate_instance,
)
from .entropy import (
    JointPMF,
    conditional_entropy,
    conditional_mutual_information,
    entropy,
    push_channel,
)
from .graphs import (
    CharGraph,
    broadcast_graph,
    build_characteristic_graph,
    build_union_graph,
    export_dot,
    or_power,
)
from .mis import MISFamily, enumerate_mis, is_independent, validate_cover
from .rates import (
    CompatibleScheme,
    CoverDistribution,
    RateReport,
    VectorScheme,
    build_vector_scheme,
    evaluate_cover_rate,
    explicit_message_rate,
    find_compatible_function,
    genie_best_ordering,
    genie_lower_bound,
    optimize_achievable,
    prop1_lower_bound,
    slepian_wolf_baseline,
    split_scheme_rate,
    vector_scheme_rate,
)
from .oracle import Partition, decode_check, oracle_search, partition_objective
from .simulate import (
    SimConfig,
    SimReport,
    binning_simulate,
    default_backend,
    single_shot_execute,
    typicality_check,
)

__version__ = "0.1.0"

__all__ = [
    "CompBcastError",
    "DemandParseError",
    "EnumerationTimeout",
    "GuardExceeded",
    "InstanceFormatError",
    "InvalidInstanceError",
    "parse_demand",
    "pretty",
    "Instance",
    "UserSpec",
    "demand_table",
    "expand_demand",
    "load_bundled_instance",
    "load_instance",
    "make_instance",
    "support",
    "validate_instance",
    "JointPMF",
    "conditional_entropy",
    "conditional_mutual_information",
    "entropy",
    "push_channel",
    "CharGraph",
    "broadcast_graph",
    "build_characteristic_graph",
    "build_union_graph",
    "export_dot",
    "or_power",
    "MISFamily",
    "enumerate_mis",
    "is_independent",
    "validate_cover",
    "CompatibleScheme",
    "CoverDistribution",
    "RateReport",
    "VectorScheme",
    "build_vector_scheme",
    "evaluate_cover_rate",
    "explicit_message_rate",
    "find_compatible_function",
    "genie_best_ordering",
    "genie_lower_bound",
    "optimize_achievable",
    "prop1_lower_bound",
    "slepian_wolf_baseline",
    "split_scheme_rate",
    "vector_scheme_rate",
    "Partition",
    "decode_check",
    "oracle_search",
    "partition_objective",
    "SimConfig",
    "SimReport",
    "binning_simulate",
    "default_backend",
    "single_shot_execute",
    "typicality_check",
    "__version__",
]
