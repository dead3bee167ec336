"""Discrete multistage decision problems as influence diagrams with a
regime node: identifiability checks and strategy evaluation."""

from .errors import (
    CapacityError,
    InputError,
    ModelError,
    ParseError,
    PolicyError,
    PositivityError,
    RegimesError,
)
from .graph import (
    Dag,
    UndirectedGraph,
    ancestral_closure,
    descendants,
    moralize,
    separated,
    topological_order,
)
from .model import (
    SIGMA,
    UNDEFINED,
    Cpt,
    ExactSource,
    InfluenceDiagram,
    InfoBase,
    JointTable,
    Policy,
    Strategy,
    SupportSet,
    Variable,
    conditional,
    consequence_direct,
    joint_distribution,
    observable_joint,
    support,
)
from .grecursion import (
    GammaSupport,
    RecursionTable,
    build_dag_i,
    build_dag_i_prime,
    check_graphsep,
    construct_p_i,
    g_recursion,
    gamma_support,
    recursion_table,
    verify_general_conditions,
)
from .stability import (
    PositivityReport,
    StabilityReport,
    check_positivity,
    check_sequential_irrelevance_numeric,
    check_sequential_randomization,
    check_simple_stability_graphical,
    check_simple_stability_numeric,
    extended_positivity,
    support_propagation,
)
from .admissible import (
    AdmissibleSequence,
    check_admissible,
    compute_candidate_sequence,
    improve_sequence,
    search_admissible_ordering,
)
from .optimize import enumerate_strategies, optimal_strategy, strategy_count
from .data import Dataset, EstimatedSource, estimate_conditionals, sample
from .parser import ModelDocument, format_model, parse_model

__all__ = [n for n in dir() if not n.startswith("_")]
