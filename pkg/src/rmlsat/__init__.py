"""Decision procedures for modal logic with existential refinement quantifiers.

Satisfiability runs a two-prefix tableau search; model checking runs
the same search pinned to a concrete structure; an independent
brute-force oracle cross-validates both.
"""

from .errors import ResourceLimit
from .formula import (
    And,
    Atom,
    Box,
    DepthMetrics,
    Diamond,
    ExistsR,
    ForallR,
    Formula,
    FragmentViolation,
    NegAtom,
    Not,
    Or,
    ParseError,
    atoms,
    in_existential_fragment,
    metrics,
    normalize,
    parse,
    parse_general,
    render,
    size,
    subformulas,
)
from .kripke import (
    KripkeModel,
    NotATree,
    PointedModel,
    RefinementRelation,
    StateNotFound,
    enumerate_root_restrictions,
    greatest_refinement,
    is_bisimilar,
    load_model,
    model_from_dict,
    model_to_dict,
    pointed_from_dict,
    to_dot,
    unravel,
    verify_refinement_mapping,
)
from .modelcheck import InvalidInput, check, reduce_k_sat
from .oracle import oracle_eval, oracle_sat
from .solver import (
    ClashFailure,
    SatResult,
    SearchState,
    SearchStats,
    SolverOptions,
    run_activation,
    sat,
)
from .tableau import (
    Branch,
    ChainModel,
    Clash,
    ModelChain,
    NotComplete,
    RuleInstance,
    extract_models,
)

__version__ = "0.1.0"
