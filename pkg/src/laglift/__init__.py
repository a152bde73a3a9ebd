"""laglift: upgrade dependency graphs to cut technical lag safely.

Pipeline: restore the project's dependency graph, traverse it dependents
first, filter each node's newer versions for closure growth and reachable
breaking changes, apply the latest survivor, and re-resolve before the
next node.
"""

from .compat import (
    BreakingSet,
    CompatCheck,
    UsageModel,
    breaking_changes,
    is_compatible,
    load_usage_model,
    reachable_used_constructs,
)
from .errors import LagliftError
from .graph import (
    DependencyGraph,
    GraphMetrics,
    ResolvedTree,
    RootManifest,
    graph_metrics,
    load_manifest,
    parse_dep_tree,
    render_tree,
    resolve_graph,
    restore_edges,
    update_graph,
)
from .harness import (
    EcosystemParams,
    compare_modes,
    gen_ecosystem,
    oracle_verify_plan,
    write_fixture_bundle,
)
from .planner import (
    NodeDecision,
    UpgradePlan,
    baseline_direct_latest,
    candidate_versions,
    filter_compat,
    filter_debloat,
    plan_upgrades,
    select_optimal,
    traversal_order,
)
from .registry import (
    ApiSurface,
    ConstructId,
    DependencyDecl,
    PackageId,
    RegistryIndex,
    Release,
    load_registry,
)
from .versioning import (
    LagMeasure,
    Version,
    compare_versions,
    is_stable,
    parse_version,
    time_lag,
    version_lag,
)

__version__ = "0.1.0"

__all__ = [
    "ApiSurface",
    "BreakingSet",
    "CompatCheck",
    "ConstructId",
    "DependencyDecl",
    "DependencyGraph",
    "EcosystemParams",
    "GraphMetrics",
    "LagMeasure",
    "LagliftError",
    "NodeDecision",
    "PackageId",
    "RegistryIndex",
    "Release",
    "ResolvedTree",
    "RootManifest",
    "UpgradePlan",
    "UsageModel",
    "Version",
    "baseline_direct_latest",
    "breaking_changes",
    "candidate_versions",
    "compare_modes",
    "compare_versions",
    "filter_compat",
    "filter_debloat",
    "gen_ecosystem",
    "graph_metrics",
    "is_compatible",
    "is_stable",
    "load_manifest",
    "load_registry",
    "load_usage_model",
    "oracle_verify_plan",
    "parse_dep_tree",
    "parse_version",
    "plan_upgrades",
    "reachable_used_constructs",
    "render_tree",
    "resolve_graph",
    "restore_edges",
    "select_optimal",
    "time_lag",
    "traversal_order",
    "update_graph",
    "version_lag",
    "write_fixture_bundle",
]
