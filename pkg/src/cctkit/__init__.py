"""Calling-context-tree analysis workbench.

Load profiles into metric-annotated trees, derive comparison metrics, prune
interactively without orphaning subtrees, round-trip view state as call-path
queries, and compute tidy layouts for an interactive explorer.
"""

from .errors import (
    CctError,
    EmptyInput,
    InconsistentMetrics,
    InvertedRange,
    MissingMetric,
    NameCollision,
    NestedCollapse,
    ParseError,
    QuerySyntaxError,
    SchemaError,
    StaleView,
    TooFewFrames,
    UnknownMetric,
    UnknownNode,
)
from .ingest import (
    detect_format,
    read_folded,
    read_literal,
    read_profile,
    write_folded,
    write_literal,
)
from .layout import (
    EncodingScales,
    LayoutNode,
    LayoutResult,
    encode,
    layout,
    thin_labels,
)
from .model import (
    CctNode,
    Frame,
    GraphFrame,
    GraphFrameBuilder,
    MetricTable,
    NodeId,
    ancestors,
    build,
    descendants,
    finalize_inclusive,
    path_to_root,
)
from .ops import (
    AlignmentMap,
    DegenerateRatio,
    DerivedMetricSpec,
    SpeedupResult,
    align,
    derive,
    filter_prune,
    imbalance,
    speedup,
)
from .paths import node_path, resolve_node_path
from .prune import (
    ButterflyHistogram,
    SurrogateNode,
    ViewState,
    butterfly_histogram,
    classify,
    clear_mass_prune,
    default_view_state,
    mass_prune,
    range_elided_roots,
    surrogate,
    surrogates,
    toggle_collapse,
    view_from_doc,
    view_to_doc,
    visible,
)
from .query import (
    And,
    ChildIndexCmp,
    DepthCmp,
    Leaf,
    MetricCmp,
    NameRegex,
    Not,
    Or,
    Pattern,
    Query,
    Step,
    apply,
    from_view,
    parse,
    select,
    serialize,
)

__version__ = "0.1.0"
