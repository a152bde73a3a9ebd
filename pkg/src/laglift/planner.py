"""The upgrade-planning loop: order, filter, select, update, report.

Nodes are visited dependents-first. Each node's stable newer versions are
filtered twice (no closure growth, no reachable breaking change), the
latest survivor is applied, and the graph is re-resolved before the next
node so every decision sees the up-to-date context.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

from .compat import UsageModel, is_compatible
from .errors import (
    DocumentFormatError,
    LagliftError,
    NoStableReleaseError,
    PlanExecutionError,
)
from .graph import DependencyGraph, GraphMetrics, graph_metrics, resolve_graph, update_graph
from .registry import ACTIVE_SCOPES, ConstructId, PackageId, RegistryIndex
from .versioning import Version, is_stable, parse_version

OUTCOMES = ("upgraded", "kept-no-candidates", "kept-all-filtered", "skipped-node-vanished")
MODES = ("lagease", "direct-latest")
REJECT_REASONS = ("debloat", "incompatible")


@dataclass(frozen=True)
class Rejection:
    version: Version
    reason: str
    evidence: tuple[ConstructId, ...]

    def __post_init__(self):
        if self.reason not in REJECT_REASONS:
            raise DocumentFormatError(f"unknown rejection reason {self.reason!r}")


@dataclass(frozen=True)
class NodeDecision:
    package: PackageId
    from_version: Version
    to_version: Version
    outcome: str
    rejected: tuple[Rejection, ...]

    def __post_init__(self):
        if self.outcome not in OUTCOMES:
            raise DocumentFormatError(f"unknown outcome {self.outcome!r}")
        if self.outcome == "upgraded" and not self.to_version > self.from_version:
            raise DocumentFormatError(
                f"upgraded decision for {self.package} must move forward: "
                f"{self.from_version} -> {self.to_version}"
            )
        for rejection in self.rejected:
            if not rejection.version > self.from_version:
                raise DocumentFormatError(
                    f"rejected version {rejection.version} of {self.package} "
                    f"is not newer than {self.from_version}"
                )


@dataclass(frozen=True)
class UpgradePlan:
    mode: str
    decisions: tuple[NodeDecision, ...]
    metrics_before: GraphMetrics
    metrics_after: GraphMetrics

    def __post_init__(self):
        if self.mode not in MODES:
            raise DocumentFormatError(f"unknown plan mode {self.mode!r}")

    def upgrade_pins(self) -> dict[PackageId, Version]:
        """The pinned overrides this plan applied, in decision order."""
        return {
            d.package: d.to_version for d in self.decisions if d.outcome == "upgraded"
        }


def traversal_order(graph: DependencyGraph) -> list[PackageId]:
    """Topological order with dependents before dependencies.

    Ties break by (depth ascending, package id); cycles are broken by
    repeatedly deleting, inside each strongly-connected component, the
    back-edge (target no deeper than source) with the lexicographically
    greatest target. Deleted edges affect ordering only.
    """
    nodes = list(graph.nodes)
    depths = {pkg: graph.nodes[pkg].depth for pkg in nodes}
    edges = {
        (e.source, e.target)
        for e in graph.edges
        if e.source is not None and e.source != e.target
    }

    while True:
        components = [c for c in _strongly_connected(nodes, edges) if len(c) > 1]
        if not components:
            break
        for component in components:
            back = [
                (src, dst)
                for (src, dst) in edges
                if src in component and dst in component and depths[dst] <= depths[src]
            ]
            edges.remove(max(back, key=lambda e: (e[1], e[0])))

    incoming = {pkg: 0 for pkg in nodes}
    outgoing: dict[PackageId, list[PackageId]] = {pkg: [] for pkg in nodes}
    for src, dst in edges:
        incoming[dst] += 1
        outgoing[src].append(dst)

    ready = sorted((pkg for pkg in nodes if incoming[pkg] == 0), key=lambda p: (depths[p], p))
    order: list[PackageId] = []
    while ready:
        pkg = ready.pop(0)
        order.append(pkg)
        released = []
        for dst in outgoing[pkg]:
            incoming[dst] -= 1
            if incoming[dst] == 0:
                released.append(dst)
        ready.extend(released)
        ready.sort(key=lambda p: (depths[p], p))
    return order


def _strongly_connected(
    nodes: list[PackageId], edges: set[tuple[PackageId, PackageId]]
) -> list[set[PackageId]]:
    """Kosaraju's algorithm with iterative DFS."""
    forward: dict[PackageId, list[PackageId]] = {pkg: [] for pkg in nodes}
    backward: dict[PackageId, list[PackageId]] = {pkg: [] for pkg in nodes}
    for src, dst in sorted(edges, key=lambda e: (e[0], e[1])):
        forward[src].append(dst)
        backward[dst].append(src)

    finished: list[PackageId] = []
    seen: set[PackageId] = set()
    for start in sorted(nodes):
        if start in seen:
            continue
        stack: list[tuple[PackageId, int]] = [(start, 0)]
        seen.add(start)
        while stack:
            node, child = stack[-1]
            if child < len(forward[node]):
                stack[-1] = (node, child + 1)
                nxt = forward[node][child]
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append((nxt, 0))
            else:
                stack.pop()
                finished.append(node)

    components: list[set[PackageId]] = []
    assigned: set[PackageId] = set()
    for start in reversed(finished):
        if start in assigned:
            continue
        component = {start}
        assigned.add(start)
        stack2 = [start]
        while stack2:
            node = stack2.pop()
            for nxt in backward[node]:
                if nxt not in assigned:
                    assigned.add(nxt)
                    component.add(nxt)
                    stack2.append(nxt)
        components.append(component)
    return components


def candidate_versions(
    reg: RegistryIndex, package: PackageId, current: Version
) -> list[Version]:
    """Stable versions strictly newer than ``current``, ascending."""
    reg.release(package, current)
    return [
        r.version
        for r in reg.releases_of(package)
        if is_stable(r.version) and r.version > current
    ]


def filter_debloat(
    candidates: list[Version],
    package: PackageId,
    current: Version,
    reg: RegistryIndex,
) -> list[Version]:
    """Drop candidates whose isolated closure outgrows the current one."""
    base = reg.closure_size(package, current)
    return [v for v in candidates if reg.closure_size(package, v) <= base]


def filter_compat(
    candidates: list[Version],
    package: PackageId,
    current: Version,
    usage: UsageModel,
    reg: RegistryIndex,
    original: Version | None = None,
) -> tuple[list[Version], list[Rejection]]:
    """Split candidates into compatible survivors and evidenced rejections.

    Candidates are checked against the node's current release. When earlier
    iterations shifted the node away from ``original`` (the version the
    project was built against), candidates must also be compatible with that
    release, so an upgrade never lands on a version that breaks the project
    relative to its starting point.
    """
    old = reg.release(package, current)
    old_original = None
    if original is not None and original != current:
        old_original = reg.release(package, original)
    kept: list[Version] = []
    rejections: list[Rejection] = []
    for version in candidates:
        candidate = reg.release(package, version)
        check = is_compatible(usage, package, old, candidate)
        if check.compatible and old_original is not None:
            check = is_compatible(usage, package, old_original, candidate)
        if check.compatible:
            kept.append(version)
        else:
            rejections.append(Rejection(version, "incompatible", check.evidence))
    return kept, rejections


def select_optimal(filtered: list[Version]) -> Version | None:
    """Latest surviving candidate, or None to keep the current version."""
    return max(filtered) if filtered else None


def plan_upgrades(
    graph: DependencyGraph, reg: RegistryIndex, usage: UsageModel
) -> UpgradePlan:
    """Run the full lagease loop over the graph and record every decision."""
    initial = graph
    order = traversal_order(initial)
    queue: deque[tuple[PackageId, Version]] = deque(
        (pkg, initial.nodes[pkg].version) for pkg in order
    )
    scheduled = set(order)
    original_versions = {pkg: node.version for pkg, node in initial.nodes.items()}
    current_graph = initial
    decisions: list[NodeDecision] = []

    while queue:
        pkg, last_seen = queue.popleft()
        iteration = len(decisions) + 1
        if pkg not in current_graph.nodes:
            decisions.append(
                NodeDecision(pkg, last_seen, last_seen, "skipped-node-vanished", ())
            )
            continue
        current = current_graph.nodes[pkg].version
        try:
            candidates = candidate_versions(reg, pkg, current)
            unbloated = filter_debloat(candidates, pkg, current, reg)
            unbloated_set = set(unbloated)
            rejections = [
                Rejection(v, "debloat", ()) for v in candidates if v not in unbloated_set
            ]
            survivors, compat_rejections = filter_compat(
                unbloated, pkg, current, usage, reg, original=original_versions.get(pkg)
            )
            rejections.extend(compat_rejections)
            chosen = select_optimal(survivors)
            if chosen is None:
                outcome = "kept-no-candidates" if not candidates else "kept-all-filtered"
                decisions.append(
                    NodeDecision(pkg, current, current, outcome, tuple(rejections))
                )
                continue
            current_graph = update_graph(current_graph, pkg, chosen, reg)
            decisions.append(
                NodeDecision(pkg, current, chosen, "upgraded", tuple(rejections))
            )
        except LagliftError as exc:
            if isinstance(exc, PlanExecutionError):
                raise
            raise PlanExecutionError(f"iteration {iteration} ({pkg}): {exc}") from exc
        newly = sorted(
            (q for q in current_graph.nodes if q not in scheduled),
            key=lambda q: (current_graph.nodes[q].depth, q),
        )
        for q in newly:
            queue.append((q, current_graph.nodes[q].version))
            scheduled.add(q)

    return UpgradePlan(
        mode="lagease",
        decisions=tuple(decisions),
        metrics_before=graph_metrics(initial, reg),
        metrics_after=graph_metrics(current_graph, reg),
    )


def baseline_direct_latest(graph: DependencyGraph, reg: RegistryIndex) -> UpgradePlan:
    """Dependabot-style baseline: jump every direct dependency to latest stable.

    No filters are applied; the graph is re-resolved once at the end.
    """
    pins = dict(graph.pins)
    decisions: list[NodeDecision] = []
    for decl in graph.manifest.direct_dependencies:
        if decl.scope not in ACTIVE_SCOPES:
            continue
        pkg = decl.package
        current = graph.nodes[pkg].version
        try:
            latest = reg.latest_stable(pkg)
        except NoStableReleaseError:
            latest = None
        if latest is not None and latest > current:
            pins[pkg] = latest
            decisions.append(NodeDecision(pkg, current, latest, "upgraded", ()))
        else:
            decisions.append(
                NodeDecision(pkg, current, current, "kept-no-candidates", ())
            )
    final = resolve_graph(graph.manifest, reg, pins=pins)
    return UpgradePlan(
        mode="direct-latest",
        decisions=tuple(decisions),
        metrics_before=graph_metrics(graph, reg),
        metrics_after=graph_metrics(final, reg),
    )


def plan_to_payload(plan: UpgradePlan) -> dict:
    return {
        "mode": plan.mode,
        "metrics_before": plan.metrics_before.to_dict(),
        "metrics_after": plan.metrics_after.to_dict(),
        "decisions": [
            {
                "package": str(d.package),
                "from": d.from_version.raw,
                "to": d.to_version.raw,
                "outcome": d.outcome,
                "rejected": [
                    {
                        "version": r.version.raw,
                        "reason": r.reason,
                        "evidence": [str(c) for c in r.evidence],
                    }
                    for r in d.rejected
                ],
            }
            for d in plan.decisions
        ],
    }


def plan_to_json(plan: UpgradePlan) -> str:
    return json.dumps(plan_to_payload(plan), indent=2, sort_keys=True) + "\n"


def plan_to_text(plan: UpgradePlan) -> str:
    """Fixed-width human-readable rendering of a plan."""
    rows = [("package", "from", "to", "outcome", "rejected")]
    for d in plan.decisions:
        rejected = ", ".join(f"{r.version.raw}({r.reason})" for r in d.rejected) or "-"
        rows.append((str(d.package), d.from_version.raw, d.to_version.raw, d.outcome, rejected))
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = [f"mode: {plan.mode}"]
    for row in rows:
        lines.append("  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip())
    before, after = plan.metrics_before, plan.metrics_after
    lines.append(f"nodes: {before.node_count} -> {after.node_count}")
    lines.append(f"version lag: {before.total_version_lag} -> {after.total_version_lag}")
    lines.append(
        f"time lag days: {before.total_time_lag_days} -> {after.total_time_lag_days}"
    )
    return "\n".join(lines) + "\n"


def _metrics_from_payload(payload: dict, where: str) -> GraphMetrics:
    expected = ("node_count", "total_version_lag", "total_time_lag_days")
    if not isinstance(payload, dict) or sorted(payload) != sorted(expected):
        raise DocumentFormatError(f"malformed metrics record in {where}")
    return GraphMetrics(**{k: int(payload[k]) for k in expected})


def plan_from_payload(payload: dict) -> UpgradePlan:
    """Rebuild a plan from its JSON payload, validating shape and values."""
    if not isinstance(payload, dict):
        raise DocumentFormatError("plan document must be a JSON object")
    expected = ("mode", "metrics_before", "metrics_after", "decisions")
    unknown = [k for k in payload if k not in expected]
    missing = [k for k in expected if k not in payload]
    if unknown or missing:
        raise DocumentFormatError(
            f"plan document keys wrong: missing {missing}, unknown {unknown}"
        )
    decisions = []
    for entry in payload["decisions"]:
        rejected = tuple(
            Rejection(
                version=parse_version(r["version"]),
                reason=r["reason"],
                evidence=tuple(ConstructId.parse(c) for c in r["evidence"]),
            )
            for r in entry["rejected"]
        )
        decisions.append(
            NodeDecision(
                package=PackageId.parse(entry["package"]),
                from_version=parse_version(entry["from"]),
                to_version=parse_version(entry["to"]),
                outcome=entry["outcome"],
                rejected=rejected,
            )
        )
    return UpgradePlan(
        mode=payload["mode"],
        decisions=tuple(decisions),
        metrics_before=_metrics_from_payload(payload["metrics_before"], "metrics_before"),
        metrics_after=_metrics_from_payload(payload["metrics_after"], "metrics_after"),
    )
