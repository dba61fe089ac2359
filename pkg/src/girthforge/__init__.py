"""High-girth digraphs with prescribed acyclic homomorphisms.

Random blow-up construction, exact small-instance deciders for acyclic
homomorphisms, and a Monte Carlo harness for the first-moment estimates
behind the construction.
"""

from .digraph import (
    INFINITE,
    Digraph,
    all_labeled_digraphs,
    count_short_cycles,
    digon,
    directed_cycle,
    girth,
    induced_subdigraph,
    intersecting_short_cycle_pairs,
    is_induced_acyclic,
    short_cycles,
    transitive_tournament,
)
from .errors import (
    DigraphFormatError,
    DimensionMismatch,
    EnumerationTruncated,
    InvalidColouring,
    NoMajorityColour,
    NotLarge,
    RetriesExhausted,
)
from .homs import (
    HomViolation,
    VertexMapping,
    check_acyclic_hom,
    compose,
    enumerate_acyclic_homs,
    find_acyclic_hom,
    is_acyclic_hom,
    is_core,
    is_pointed,
    is_uniquely_colourable,
)
from .model import (
    BlockDigraph,
    ModelParams,
    SampledDigraph,
    build_blowup,
    classify_large,
    extract_cycle_matching,
    find_bad_pair,
    good_arc_load,
    sample,
)
from .construction import (
    ConstructionArtifact,
    VerificationReport,
    construct,
    derive_f,
    load_artifact,
    save_artifact,
    verify_theorem1,
)
from .montecarlo import (
    Estimate,
    chernoff_check,
    eval_bounds,
    mc_good_arc_load,
    mc_intersecting_pairs,
    mc_Pr,
    mc_short_cycles,
    mc_zU_acyclic,
)

__version__ = "0.1.0"
