"""Dependency graph construction, tree ingestion, and re-resolution.

Two entry points produce the same graph shape: ``resolve_graph`` resolves a
root manifest against the registry (breadth-first, nearest declaration
wins), and ``restore_edges`` ingests a Maven-style tree dump and restores
the edges the tree omitted. ``update_graph`` re-resolves globally with the
planner's decisions applied as pinned overrides, so every iteration sees an
up-to-date graph.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    DanglingTargetError,
    DocumentFormatError,
    InputFileError,
    LagliftError,
    TreeFormatError,
    UnknownPackageError,
    UnknownReleaseError,
)
from .registry import (
    ACTIVE_SCOPES,
    SCOPES,
    DependencyDecl,
    PackageId,
    RegistryIndex,
    _parse_decl,
    _require_keys,
)
from .versioning import Version, is_stable, parse_version, time_lag, version_lag


@dataclass(frozen=True)
class RootManifest:
    """The project's own module: a name plus its direct dependencies."""

    module_name: str
    direct_dependencies: tuple[DependencyDecl, ...]

    def __post_init__(self):
        if not self.module_name:
            raise DocumentFormatError("manifest module name must be non-empty")
        seen: set[PackageId] = set()
        for decl in self.direct_dependencies:
            if decl.package in seen:
                raise DocumentFormatError(f"duplicate direct dependency {decl.package}")
            seen.add(decl.package)


@dataclass(frozen=True)
class TreeNode:
    """One line of a dependency-tree dump (root excluded)."""

    package: PackageId
    version: Version
    scope: str
    depth: int
    parent: int | None  # index into ResolvedTree.nodes; None = root


@dataclass(frozen=True)
class ResolvedTree:
    root: str
    nodes: tuple[TreeNode, ...]


@dataclass(frozen=True)
class GraphNode:
    package: PackageId
    version: Version
    depth: int


@dataclass(frozen=True)
class Edge:
    """Directed dependency edge annotated with the declared target version."""

    source: PackageId | None  # None = the root module
    target: PackageId
    declared: Version

    def sort_key(self):
        src = ("", "") if self.source is None else (self.source.group, self.source.artifact)
        return (src, (self.target.group, self.target.artifact), self.declared.raw)


@dataclass(frozen=True)
class DependencyGraph:
    root: str
    nodes: dict[PackageId, GraphNode]
    edges: tuple[Edge, ...]
    manifest: RootManifest
    pins: dict[PackageId, Version]
    diagnostics: tuple[str, ...] = ()


@dataclass(frozen=True)
class GraphMetrics:
    node_count: int
    total_version_lag: int
    total_time_lag_days: int

    def to_dict(self) -> dict:
        return {
            "node_count": self.node_count,
            "total_version_lag": self.total_version_lag,
            "total_time_lag_days": self.total_time_lag_days,
        }


class _Resolution:
    """Mediation outcome: winning versions, depths, scopes, and parentage."""

    def __init__(self):
        self.versions: dict[PackageId, Version] = {}
        self.depths: dict[PackageId, int] = {}
        self.scopes: dict[PackageId, str] = {}
        self.children: dict[PackageId | None, list[PackageId]] = {}


def _mediate(
    root_decls: list[DependencyDecl],
    reg: RegistryIndex,
    pins: dict[PackageId, Version],
) -> _Resolution:
    """Breadth-first nearest-wins mediation with first-declared tie-breaks.

    Pinned packages resolve to their pinned version wherever they first
    appear; everything else takes the version of its shallowest (then
    earliest) declaration.
    """
    res = _Resolution()
    frontier: list[tuple[PackageId, Version, PackageId | None, str]] = [
        (d.package, d.version, None, d.scope) for d in root_decls
    ]
    depth = 1
    while frontier:
        newly = []
        for pkg, declared, parent, scope in frontier:
            if pkg in res.versions:
                continue
            use = pins.get(pkg, declared)
            try:
                release = reg.release(pkg, use)
            except (UnknownPackageError, UnknownReleaseError):
                raise DanglingTargetError(
                    f"declaration targets {pkg}:{use}, which is not in the registry"
                ) from None
            res.versions[pkg] = use
            res.depths[pkg] = depth
            res.scopes[pkg] = scope
            res.children.setdefault(parent, []).append(pkg)
            newly.append(release)
        frontier = [
            (d.package, d.version, release.package, d.scope)
            for release in newly
            for d in release.dependencies
            if d.scope in ACTIVE_SCOPES and d.package not in res.versions
        ]
        depth += 1
    return res


def _build_edges(
    node_versions: dict[PackageId, Version],
    root_targets: list[tuple[PackageId, Version]],
    reg: RegistryIndex,
) -> tuple[tuple[Edge, ...], list[str]]:
    """Edges from root declarations plus every registry declaration between nodes."""
    edges: list[Edge] = [Edge(None, pkg, declared) for pkg, declared in root_targets]
    diagnostics: list[str] = []
    for pkg, version in node_versions.items():
        for d in reg.release(pkg, version).dependencies:
            if d.scope not in ACTIVE_SCOPES:
                continue
            if d.package in node_versions:
                edges.append(Edge(pkg, d.package, d.version))
            else:
                diagnostics.append(
                    f"dangling declaration: {pkg}:{version} -> {d.package}:{d.version} "
                    f"(target not in graph)"
                )
    return tuple(sorted(set(edges), key=Edge.sort_key)), diagnostics


def _bfs_depths(
    root_targets: list[PackageId],
    edges: tuple[Edge, ...],
) -> dict[PackageId, int]:
    adjacency: dict[PackageId, list[PackageId]] = {}
    for edge in edges:
        if edge.source is not None:
            adjacency.setdefault(edge.source, []).append(edge.target)
    depths: dict[PackageId, int] = {}
    queue: deque[PackageId] = deque()
    for pkg in root_targets:
        if pkg not in depths:
            depths[pkg] = 1
            queue.append(pkg)
    while queue:
        pkg = queue.popleft()
        for nxt in adjacency.get(pkg, ()):
            if nxt not in depths:
                depths[nxt] = depths[pkg] + 1
                queue.append(nxt)
    return depths


def resolve_graph(
    manifest: RootManifest,
    reg: RegistryIndex,
    pins: dict[PackageId, Version] | None = None,
) -> DependencyGraph:
    """Resolve a manifest into a mediated dependency graph.

    An empty manifest yields a root-only graph. ``pins`` force specific
    packages to resolve to chosen versions regardless of declaration depth.
    """
    pins = dict(pins or {})
    root_decls = [d for d in manifest.direct_dependencies if d.scope in ACTIVE_SCOPES]
    res = _mediate(root_decls, reg, pins)
    root_targets = [(d.package, pins.get(d.package, d.version)) for d in root_decls]
    edges, diagnostics = _build_edges(res.versions, root_targets, reg)
    depths = _bfs_depths([pkg for pkg, _ in root_targets], edges)
    nodes = {
        pkg: GraphNode(pkg, version, depths.get(pkg, res.depths[pkg]))
        for pkg, version in res.versions.items()
    }
    return DependencyGraph(
        root=manifest.module_name,
        nodes=nodes,
        edges=edges,
        manifest=manifest,
        pins=pins,
        diagnostics=tuple(diagnostics),
    )


def update_graph(
    graph: DependencyGraph,
    package: PackageId,
    new_version: Version,
    reg: RegistryIndex,
) -> DependencyGraph:
    """Re-resolve the whole graph with ``package`` pinned to ``new_version``.

    All previously pinned decisions stay in force; packages no longer
    declared by anyone drop out, new transitive packages enter at their
    breadth-first depth.
    """
    if package not in graph.nodes:
        raise UnknownPackageError(f"{package} is not a node of the graph")
    reg.release(package, new_version)  # raises for unknown releases
    pins = dict(graph.pins)
    pins[package] = new_version
    return resolve_graph(graph.manifest, reg, pins=pins)


def graph_metrics(graph: DependencyGraph, reg: RegistryIndex) -> GraphMetrics:
    """Node count plus summed version lag and time lag across all nodes."""
    total_vlag = 0
    total_tlag = 0
    for node in graph.nodes.values():
        releases = reg.releases_of(node.package)
        total_vlag += version_lag(node.version, [r.version for r in releases])
        stable = [r for r in releases if is_stable(r.version)]
        if stable:
            current = reg.release(node.package, node.version)
            total_tlag += time_lag(current.released_at, stable[-1].released_at)
    return GraphMetrics(
        node_count=len(graph.nodes),
        total_version_lag=total_vlag,
        total_time_lag_days=total_tlag,
    )


_BRANCH_MARKERS = ("+- ", "\\- ")
_CONTINUATIONS = ("|  ", "   ")


def parse_dep_tree(text: str) -> ResolvedTree:
    """Parse a Maven-style dependency tree dump.

    The first line is the root coordinate (group:artifact:packaging:version);
    children are "group:artifact:packaging:version:scope" behind "+- " or
    "\\- " markers with "|  " / "   " continuations.
    """
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise TreeFormatError("empty dependency tree")

    root_parts = lines[0].split(":")
    if len(root_parts) != 4:
        raise TreeFormatError(
            f"line 1: root must be group:artifact:packaging:version, got {lines[0]!r}"
        )
    root = f"{root_parts[0]}:{root_parts[1]}"

    nodes: list[TreeNode] = []
    stack: list[tuple[int, int]] = []  # (depth, node index)
    prev_depth = 0
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            raise TreeFormatError(f"line {lineno}: blank line inside tree")
        pos = 0
        levels = 0
        while line[pos : pos + 3] in _CONTINUATIONS:
            pos += 3
            levels += 1
        if line[pos : pos + 3] not in _BRANCH_MARKERS:
            raise TreeFormatError(f"line {lineno}: malformed tree prefix {line!r}")
        depth = levels + 1
        if depth > prev_depth + 1:
            raise TreeFormatError(
                f"line {lineno}: indentation jumps from depth {prev_depth} to {depth}"
            )
        parts = line[pos + 3 :].split(":")
        if len(parts) != 5:
            raise TreeFormatError(
                f"line {lineno}: expected group:artifact:packaging:version:scope, "
                f"got {line[pos + 3:]!r}"
            )
        group, artifact, _packaging, version_text, scope = parts
        if scope not in SCOPES:
            raise TreeFormatError(f"line {lineno}: unknown scope {scope!r}")
        while stack and stack[-1][0] >= depth:
            stack.pop()
        parent = stack[-1][1] if stack else None
        nodes.append(
            TreeNode(
                package=PackageId(group, artifact),
                version=parse_version(version_text),
                scope=scope,
                depth=depth,
                parent=parent,
            )
        )
        stack.append((depth, len(nodes) - 1))
        prev_depth = depth
    return ResolvedTree(root=root, nodes=tuple(nodes))


def restore_edges(tree: ResolvedTree, reg: RegistryIndex) -> DependencyGraph:
    """Turn a parsed tree into a complete graph with hidden edges restored.

    Test/provided subtrees are dropped whole, duplicate occurrences are
    mediated (shallowest, then first, wins), and every dependency the
    registry declares between surviving nodes becomes an edge even when the
    tree omitted it.
    """
    valid = [False] * len(tree.nodes)
    for idx, node in enumerate(tree.nodes):
        parent_ok = node.parent is None or valid[node.parent]
        valid[idx] = parent_ok and node.scope in ACTIVE_SCOPES

    chosen: dict[PackageId, TreeNode] = {}
    for idx, node in enumerate(tree.nodes):
        if not valid[idx]:
            continue
        current = chosen.get(node.package)
        if current is None or node.depth < current.depth:
            chosen[node.package] = node

    node_versions = {pkg: node.version for pkg, node in chosen.items()}
    for pkg, version in node_versions.items():
        reg.release(pkg, version)  # raises for tree nodes absent from the registry

    root_targets: list[tuple[PackageId, Version]] = []
    root_decls: list[DependencyDecl] = []
    seen_direct: set[PackageId] = set()
    for idx, node in enumerate(tree.nodes):
        if not valid[idx] or node.depth != 1 or node.package in seen_direct:
            continue
        seen_direct.add(node.package)
        root_targets.append((node.package, node_versions[node.package]))
        root_decls.append(
            DependencyDecl(node.package, node_versions[node.package], node.scope)
        )

    edges, diagnostics = _build_edges(node_versions, root_targets, reg)
    depths = _bfs_depths([pkg for pkg, _ in root_targets], edges)
    nodes = {}
    for pkg, node in chosen.items():
        depth = depths.get(pkg)
        if depth is None:
            diagnostics.append(f"node {pkg} unreachable from root after edge restoration")
            depth = node.depth
        nodes[pkg] = GraphNode(pkg, node_versions[pkg], depth)

    manifest = RootManifest(module_name=tree.root, direct_dependencies=tuple(root_decls))
    return DependencyGraph(
        root=tree.root,
        nodes=nodes,
        edges=edges,
        manifest=manifest,
        pins={},
        diagnostics=tuple(diagnostics),
    )


def render_tree(graph: DependencyGraph, reg: RegistryIndex) -> str:
    """Render the mediated tree with first-occurrence expansion.

    Inverse of ``parse_dep_tree`` + ``restore_edges`` for graphs produced by
    ``resolve_graph``: each package appears once, under the parent whose
    declaration won mediation.
    """
    root_decls = [d for d in graph.manifest.direct_dependencies if d.scope in ACTIVE_SCOPES]
    res = _mediate(root_decls, reg, graph.pins)
    if res.versions != {pkg: node.version for pkg, node in graph.nodes.items()}:
        raise LagliftError("graph does not match a resolution of its own manifest")

    module = graph.root
    root_line = f"{module}:jar:0-SNAPSHOT" if module.count(":") == 1 else f"{module}:{module}:jar:0-SNAPSHOT"
    lines = [root_line]

    def emit(pkg: PackageId, ancestors_last: list[bool]) -> None:
        prefix = "".join("   " if last else "|  " for last in ancestors_last[:-1])
        prefix += "\\- " if ancestors_last[-1] else "+- "
        version = res.versions[pkg]
        lines.append(f"{prefix}{pkg.group}:{pkg.artifact}:jar:{version.raw}:{res.scopes[pkg]}")
        children = res.children.get(pkg, [])
        for i, child in enumerate(children):
            emit(child, ancestors_last + [i == len(children) - 1])

    top = res.children.get(None, [])
    for i, pkg in enumerate(top):
        emit(pkg, [i == len(top) - 1])
    return "\n".join(lines) + "\n"


def manifest_from_payload(payload: dict) -> RootManifest:
    """Build a root manifest from an already-parsed JSON document."""
    _require_keys(payload, ("module", "dependencies"), (), "root manifest")
    if not isinstance(payload["module"], str):
        raise DocumentFormatError("'module' must be a string")
    return RootManifest(
        module_name=payload["module"],
        direct_dependencies=tuple(
            _parse_decl(d, "root manifest") for d in payload["dependencies"]
        ),
    )


def load_manifest(path: str | Path) -> RootManifest:
    """Load a root manifest from a JSON file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputFileError(f"cannot read manifest {path}: {exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentFormatError(f"manifest {path} is not valid JSON: {exc}") from exc
    return manifest_from_payload(payload)
