"""Synthetic ecosystems, an independent plan oracle, and mode comparison.

The oracle deliberately re-implements resolution, closure counting,
reachability, and the planning loop with naive quadratic scans. It shares
only the data types with the production code, so agreement between the two
is meaningful evidence.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

from .compat import (
    PROJECT_OWNER,
    UsageModel,
    is_compatible,
    usage_model_from_payload,
)
from .graph import (
    DependencyGraph,
    RootManifest,
    manifest_from_payload,
    resolve_graph,
)
from .planner import (
    NodeDecision,
    Rejection,
    UpgradePlan,
    plan_upgrades,
    baseline_direct_latest,
)
from .registry import (
    PackageId,
    RegistryIndex,
    registry_from_payload,
)
from .versioning import Version, is_stable, parse_version

_ACTIVE = ("compile", "runtime")
_BASE_DATE = datetime(2020, 1, 1, tzinfo=timezone.utc)


@dataclass(frozen=True)
class EcosystemParams:
    """Knobs for deterministic ecosystem generation."""

    seed: int
    package_count: int = 6
    max_versions: int = 4
    max_deps_per_release: int = 3
    breaking_probability: float = 0.2
    usage_density: float = 0.5

    def __post_init__(self):
        if self.package_count < 1:
            raise ValueError("package_count must be >= 1")
        if self.max_versions < 1:
            raise ValueError("max_versions must be >= 1")
        if self.max_deps_per_release < 0:
            raise ValueError("max_deps_per_release must be >= 0")
        for name in ("breaking_probability", "usage_density"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be within [0, 1]")


def ecosystem_payloads(params: EcosystemParams) -> tuple[dict, dict, dict]:
    """Generate (registry, manifest, usage) JSON payloads for ``params``.

    Pure function of the params: the same seed always yields byte-identical
    serialized documents. Declared dependencies point only at later-generated
    packages, so the registry is acyclic by construction.
    """
    rng = random.Random(params.seed)
    n = params.package_count
    group = "org.gen"
    artifacts = [f"lib{i:02d}" for i in range(n)]

    version_lists: list[list[str]] = []
    timestamp_lists: list[list[str]] = []
    api_lists: list[list[dict[str, str]]] = []  # per release: signature -> fingerprint

    for i in range(n):
        count = rng.randint(1, params.max_versions)
        versions: list[str] = []
        major, minor = 1, 0
        while len(versions) < count:
            if versions:
                if rng.random() < 0.3:
                    major, minor = major + 1, 0
                else:
                    minor += 1
            base = f"{major}.{minor}"
            if len(versions) + 1 < count and rng.random() < 0.15:
                versions.append(f"{base}-rc1")
            versions.append(base)
        versions = versions[:count]
        version_lists.append(versions)

        day = 0
        stamps = []
        for _ in versions:
            day += rng.randint(15, 60)
            stamps.append((_BASE_DATE + timedelta(days=day)).strftime("%Y-%m-%dT%H:%M:%SZ"))
        timestamp_lists.append(stamps)

        prefix = f"org.gen.{artifacts[i]}.Api"
        surface = {
            f"{prefix}#m{j}()": f"{rng.getrandbits(32):08x}"
            for j in range(rng.randint(2, 4))
        }
        next_member = len(surface)
        history = [dict(surface)]
        for _ in versions[1:]:
            for signature in sorted(surface):
                roll = rng.random()
                if roll < params.breaking_probability * 0.25:
                    del surface[signature]
                elif roll < params.breaking_probability:
                    surface[signature] = f"{rng.getrandbits(32):08x}"
            if rng.random() < 0.2:
                surface[f"{prefix}#m{next_member}()"] = f"{rng.getrandbits(32):08x}"
                next_member += 1
            history.append(dict(surface))
        api_lists.append(history)

    dep_lists: list[list[list[dict]]] = []
    for i in range(n):
        per_release = []
        later = list(range(i + 1, n))
        for _ in version_lists[i]:
            k = rng.randint(0, min(params.max_deps_per_release, len(later)))
            decls = []
            for j in rng.sample(later, k):
                decls.append(
                    {
                        "package": f"{group}:{artifacts[j]}",
                        "version": rng.choice(version_lists[j]),
                        "scope": rng.choices(
                            ["compile", "runtime", "test", "provided"],
                            weights=[0.75, 0.1, 0.08, 0.07],
                        )[0],
                    }
                )
            per_release.append(decls)
        dep_lists.append(per_release)

    registry_payload = {
        "packages": [
            {
                "group": group,
                "artifact": artifacts[i],
                "releases": [
                    {
                        "version": version_lists[i][r],
                        "released_at": timestamp_lists[i][r],
                        "dependencies": dep_lists[i][r],
                        "api": [
                            {"id": sig, "kind": "method", "fingerprint": fp}
                            for sig, fp in sorted(api_lists[i][r].items())
                        ],
                    }
                    for r in range(len(version_lists[i]))
                ],
            }
            for i in range(n)
        ]
    }

    direct_count = rng.randint(1, min(4, n))
    manifest_payload = {
        "module": "org.gen:app",
        "dependencies": [],
    }
    for i in sorted(rng.sample(range(n), direct_count)):
        stable_versions = [
            v for v in version_lists[i] if is_stable(parse_version(v))
        ]
        pick = min(
            rng.randint(0, len(stable_versions) - 1),
            rng.randint(0, len(stable_versions) - 1),
        )
        manifest_payload["dependencies"].append(
            {
                "package": f"{group}:{artifacts[i]}",
                "version": stable_versions[pick],
                "scope": "compile" if rng.random() < 0.9 else "runtime",
            }
        )

    registry = registry_from_payload(registry_payload)
    manifest = manifest_from_payload(manifest_payload)
    graph = resolve_graph(manifest, registry)

    entry = "method:org.gen.app.Main#main()"
    owners: dict[str, str] = {entry: PROJECT_OWNER}
    edges: list[list[str]] = []
    helper_count = 0
    for pkg, node in graph.nodes.items():
        release = registry.release(pkg, node.version)
        for construct in sorted(release.api.entries):
            if rng.random() < params.usage_density:
                owners[str(construct)] = str(pkg)
                if rng.random() < 0.3:
                    helper = f"method:org.gen.app.Helper{helper_count}#h()"
                    helper_count += 1
                    owners[helper] = PROJECT_OWNER
                    edges.append([entry, helper])
                    edges.append([helper, str(construct)])
                else:
                    edges.append([entry, str(construct)])
            elif rng.random() < 0.5:
                # Owned but never referenced: exercises reachability filtering.
                owners[str(construct)] = str(pkg)
    usage_payload = {"entries": [entry], "edges": edges, "owners": owners}

    return registry_payload, manifest_payload, usage_payload


def gen_ecosystem(
    params: EcosystemParams,
) -> tuple[RegistryIndex, RootManifest, UsageModel]:
    """Generate and validate a full synthetic ecosystem."""
    registry_payload, manifest_payload, usage_payload = ecosystem_payloads(params)
    return (
        registry_from_payload(registry_payload),
        manifest_from_payload(manifest_payload),
        usage_model_from_payload(usage_payload),
    )


def write_fixture_bundle(params: EcosystemParams, directory: str | Path) -> tuple[Path, Path, Path]:
    """Write registry.json, manifest.json, and usage.json under ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    payloads = ecosystem_payloads(params)
    paths = (
        directory / "registry.json",
        directory / "manifest.json",
        directory / "usage.json",
    )
    for path, payload in zip(paths, payloads):
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return paths


def replay_final_graph(
    graph: DependencyGraph, plan: UpgradePlan, reg: RegistryIndex
) -> DependencyGraph:
    """Re-derive the graph a plan ends with by applying its pins at once."""
    pins = dict(graph.pins)
    pins.update(plan.upgrade_pins())
    return resolve_graph(graph.manifest, reg, pins=pins)


def breaking_violations(
    initial: DependencyGraph,
    final: DependencyGraph,
    plan: UpgradePlan,
    reg: RegistryIndex,
    usage: UsageModel,
) -> int:
    """Count upgraded nodes whose final release breaks a reachable construct.

    The check compares each decision-upgraded package's release in the
    initial graph against its release in the final graph.
    """
    upgraded = {d.package for d in plan.decisions if d.outcome == "upgraded"}
    count = 0
    for pkg, node in final.nodes.items():
        if pkg not in upgraded or pkg not in initial.nodes:
            continue
        old = reg.release(pkg, initial.nodes[pkg].version)
        new = reg.release(pkg, node.version)
        if not is_compatible(usage, pkg, old, new).compatible:
            count += 1
    return count


# --- independent oracle ----------------------------------------------------


def _naive_closure(reg: RegistryIndex, package: PackageId, version: Version) -> int:
    resolved: list[tuple[PackageId, Version]] = [(package, version)]
    level = [
        (d.package, d.version)
        for d in reg.release(package, version).dependencies
        if d.scope in _ACTIVE
    ]
    while level:
        nxt: list[tuple[PackageId, Version]] = []
        for pkg, ver in level:
            if any(done == pkg for done, _ in resolved):
                continue
            resolved.append((pkg, ver))
            nxt.extend(
                (d.package, d.version)
                for d in reg.release(pkg, ver).dependencies
                if d.scope in _ACTIVE
            )
        level = nxt
    return len(resolved) - 1


def _naive_resolve(
    manifest: RootManifest,
    reg: RegistryIndex,
    pins: dict[PackageId, Version],
) -> tuple[dict[PackageId, Version], dict[PackageId, int], list[tuple[PackageId | None, PackageId]]]:
    """Level-by-level mediation; depths recomputed by edge relaxation."""
    versions: dict[PackageId, Version] = {}
    level = [
        (d.package, d.version)
        for d in manifest.direct_dependencies
        if d.scope in _ACTIVE
    ]
    roots = [pkg for pkg, _ in level]
    while level:
        nxt: list[tuple[PackageId, Version]] = []
        for pkg, ver in level:
            if pkg in versions:
                continue
            versions[pkg] = pins.get(pkg, ver)
            nxt.extend(
                (d.package, d.version)
                for d in reg.release(pkg, versions[pkg]).dependencies
                if d.scope in _ACTIVE
            )
        level = nxt

    edges: list[tuple[PackageId | None, PackageId]] = [(None, pkg) for pkg in roots]
    for pkg, ver in versions.items():
        for d in reg.release(pkg, ver).dependencies:
            if d.scope in _ACTIVE and d.package in versions:
                edges.append((pkg, d.package))

    depths = {pkg: len(versions) + 1 for pkg in versions}
    for pkg in roots:
        depths[pkg] = 1
    changed = True
    while changed:
        changed = False
        for src, dst in edges:
            if src is None:
                continue
            if depths[src] + 1 < depths[dst]:
                depths[dst] = depths[src] + 1
                changed = True
    return versions, depths, edges


def _naive_reachable(usage: UsageModel, package: PackageId) -> set:
    reachable = set(usage.entries)
    changed = True
    while changed:
        changed = False
        for src, dst in usage.edges:
            if src in reachable and dst not in reachable:
                reachable.add(dst)
                changed = True
    return {c for c in reachable if usage.owners.get(c) == package}


def _naive_breaking(reg: RegistryIndex, package: PackageId, old: Version, new: Version) -> set:
    old_api = reg.release(package, old).api.entries
    new_api = reg.release(package, new).api.entries
    removed = {c for c in old_api if c not in new_api}
    altered = {c for c in old_api if c in new_api and old_api[c] != new_api[c]}
    return removed | altered


def _naive_sccs(
    nodes: list[PackageId], edges: list[tuple[PackageId, PackageId]]
) -> list[set[PackageId]]:
    reach: dict[PackageId, set[PackageId]] = {pkg: {pkg} for pkg in nodes}
    changed = True
    while changed:
        changed = False
        for src, dst in edges:
            before = len(reach[src])
            reach[src] |= reach[dst]
            if len(reach[src]) != before:
                changed = True
    components = []
    assigned: set[PackageId] = set()
    for pkg in sorted(nodes):
        if pkg in assigned:
            continue
        component = {q for q in reach[pkg] if pkg in reach[q]}
        assigned |= component
        components.append(component)
    return components


def _naive_order(
    versions: dict[PackageId, Version],
    depths: dict[PackageId, int],
    edges: list[tuple[PackageId | None, PackageId]],
) -> list[PackageId]:
    nodes = list(versions)
    working = sorted(
        {(src, dst) for src, dst in edges if src is not None and src != dst}
    )
    while True:
        cyclic = [c for c in _naive_sccs(nodes, working) if len(c) > 1]
        if not cyclic:
            break
        for component in cyclic:
            back = [
                (src, dst)
                for src, dst in working
                if src in component and dst in component and depths[dst] <= depths[src]
            ]
            working.remove(max(back, key=lambda e: (e[1], e[0])))

    order: list[PackageId] = []
    placed: set[PackageId] = set()
    while len(order) < len(nodes):
        ready = [
            pkg
            for pkg in nodes
            if pkg not in placed
            and all(src in placed for src, dst in working if dst == pkg)
        ]
        pick = min(ready, key=lambda p: (depths[p], p))
        order.append(pick)
        placed.add(pick)
    return order


def _naive_metrics(
    versions: dict[PackageId, Version], reg: RegistryIndex
) -> tuple[int, int, int]:
    node_count = len(versions)
    vlag = 0
    tlag = 0
    for pkg, current in versions.items():
        releases = reg.releases_of(pkg)
        newer_stable = [
            r for r in releases if is_stable(r.version) and r.version > current
        ]
        vlag += len(newer_stable)
        stable = [r for r in releases if is_stable(r.version)]
        if stable:
            latest = stable[-1]
            days = (latest.released_at - reg.release(pkg, current).released_at).days
            tlag += max(days, 0)
    return node_count, vlag, tlag


def _naive_compat_evidence(
    reg: RegistryIndex,
    usage: UsageModel,
    package: PackageId,
    old: Version,
    candidate: Version,
) -> tuple:
    broken = _naive_breaking(reg, package, old, candidate)
    if not broken:
        return ()
    used = _naive_reachable(usage, package)
    return tuple(sorted(broken & used))


def _naive_lagease(
    graph: DependencyGraph, reg: RegistryIndex, usage: UsageModel
) -> tuple[list[NodeDecision], dict[PackageId, Version]]:
    pins = dict(graph.pins)
    versions, depths, edges = _naive_resolve(graph.manifest, reg, pins)
    initial_versions = dict(versions)
    queue = [(pkg, versions[pkg]) for pkg in _naive_order(versions, depths, edges)]
    scheduled = {pkg for pkg, _ in queue}
    decisions: list[NodeDecision] = []
    index = 0
    while index < len(queue):
        pkg, last_seen = queue[index]
        index += 1
        if pkg not in versions:
            decisions.append(
                NodeDecision(pkg, last_seen, last_seen, "skipped-node-vanished", ())
            )
            continue
        current = versions[pkg]
        candidates = [
            r.version
            for r in reg.releases_of(pkg)
            if is_stable(r.version) and r.version > current
        ]
        rejections: list[Rejection] = []
        base_closure = _naive_closure(reg, pkg, current)
        unbloated = []
        for v in candidates:
            if _naive_closure(reg, pkg, v) <= base_closure:
                unbloated.append(v)
            else:
                rejections.append(Rejection(v, "debloat", ()))
        survivors = []
        original = initial_versions.get(pkg, current)
        for v in unbloated:
            evidence = _naive_compat_evidence(reg, usage, pkg, current, v)
            if not evidence and original != current:
                evidence = _naive_compat_evidence(reg, usage, pkg, original, v)
            if evidence:
                rejections.append(Rejection(v, "incompatible", evidence))
            else:
                survivors.append(v)
        if not survivors:
            outcome = "kept-no-candidates" if not candidates else "kept-all-filtered"
            decisions.append(NodeDecision(pkg, current, current, outcome, tuple(rejections)))
            continue
        chosen = survivors[0]
        for v in survivors[1:]:
            if v > chosen:
                chosen = v
        decisions.append(NodeDecision(pkg, current, chosen, "upgraded", tuple(rejections)))
        pins[pkg] = chosen
        versions, depths, edges = _naive_resolve(graph.manifest, reg, pins)
        for q in sorted(
            (q for q in versions if q not in scheduled),
            key=lambda q: (depths[q], q),
        ):
            queue.append((q, versions[q]))
            scheduled.add(q)
    return decisions, versions


def _naive_baseline(
    graph: DependencyGraph, reg: RegistryIndex
) -> tuple[list[NodeDecision], dict[PackageId, Version]]:
    pins = dict(graph.pins)
    versions, _, _ = _naive_resolve(graph.manifest, reg, pins)
    decisions: list[NodeDecision] = []
    for decl in graph.manifest.direct_dependencies:
        if decl.scope not in _ACTIVE:
            continue
        current = versions[decl.package]
        stable = [
            r.version for r in reg.releases_of(decl.package) if is_stable(r.version)
        ]
        latest = stable[-1] if stable else None
        if latest is not None and latest > current:
            pins[decl.package] = latest
            decisions.append(
                NodeDecision(decl.package, current, latest, "upgraded", ())
            )
        else:
            decisions.append(
                NodeDecision(decl.package, current, current, "kept-no-candidates", ())
            )
    final_versions, _, _ = _naive_resolve(graph.manifest, reg, pins)
    return decisions, final_versions


@dataclass(frozen=True)
class OracleVerdict:
    passed: bool
    divergences: tuple[str, ...]


def oracle_verify_plan(
    plan: UpgradePlan,
    graph: DependencyGraph,
    reg: RegistryIndex,
    usage: UsageModel,
) -> OracleVerdict:
    """Replay the plan with the naive implementations and diff every decision."""
    if plan.mode == "lagease":
        expected_decisions, final_versions = _naive_lagease(graph, reg, usage)
    else:
        expected_decisions, final_versions = _naive_baseline(graph, reg)

    divergences: list[str] = []
    for i, (expected, actual) in enumerate(zip(expected_decisions, plan.decisions)):
        if expected != actual:
            divergences.append(
                f"decision {i + 1} for {actual.package}: expected "
                f"{expected.package} {expected.from_version}->{expected.to_version} "
                f"[{expected.outcome}], plan has "
                f"{actual.package} {actual.from_version}->{actual.to_version} "
                f"[{actual.outcome}]"
            )
            break
    if not divergences and len(expected_decisions) != len(plan.decisions):
        divergences.append(
            f"decision count mismatch: oracle replayed {len(expected_decisions)}, "
            f"plan has {len(plan.decisions)}"
        )

    if not divergences:
        initial_versions = {pkg: node.version for pkg, node in graph.nodes.items()}
        for label, versions, metrics in (
            ("metrics_before", initial_versions, plan.metrics_before),
            ("metrics_after", final_versions, plan.metrics_after),
        ):
            nodes, vlag, tlag = _naive_metrics(versions, reg)
            got = (metrics.node_count, metrics.total_version_lag, metrics.total_time_lag_days)
            if got != (nodes, vlag, tlag):
                divergences.append(
                    f"{label} mismatch: oracle computed {(nodes, vlag, tlag)}, plan has {got}"
                )
    return OracleVerdict(passed=not divergences, divergences=tuple(divergences))


# --- mode comparison ---------------------------------------------------------


@dataclass(frozen=True)
class ModeReport:
    mode: str
    nodes: int
    original_version_lag: int
    reduced_version_lag: int
    original_dep_count: int
    dep_count_delta: int
    breaking_violations: int

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "nodes": self.nodes,
            "original_version_lag": self.original_version_lag,
            "reduced_version_lag": self.reduced_version_lag,
            "original_dep_count": self.original_dep_count,
            "dep_count_delta": self.dep_count_delta,
            "breaking_violations": self.breaking_violations,
        }


@dataclass(frozen=True)
class ModeComparison:
    rows: tuple[ModeReport, ...]

    def to_payload(self) -> dict:
        return {"rows": [row.to_dict() for row in self.rows]}

    def to_json(self) -> str:
        return json.dumps(self.to_payload(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        header = (
            "mode",
            "nodes",
            "original_version_lag",
            "reduced_version_lag",
            "original_dep_count",
            "dep_count_delta",
            "breaking_violations",
        )
        table = [header] + [
            tuple(str(row.to_dict()[column]) for column in header) for row in self.rows
        ]
        widths = [max(len(line[i]) for line in table) for i in range(len(header))]
        lines = [
            "  ".join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip()
            for line in table
        ]
        return "\n".join(lines) + "\n"


def _mode_report(
    mode: str,
    graph: DependencyGraph,
    plan: UpgradePlan,
    reg: RegistryIndex,
    usage: UsageModel,
) -> ModeReport:
    final = replay_final_graph(graph, plan, reg)
    before, after = plan.metrics_before, plan.metrics_after
    return ModeReport(
        mode=mode,
        nodes=before.node_count,
        original_version_lag=before.total_version_lag,
        reduced_version_lag=before.total_version_lag - after.total_version_lag,
        original_dep_count=before.node_count,
        dep_count_delta=before.node_count - after.node_count,
        breaking_violations=breaking_violations(graph, final, plan, reg, usage),
    )


def compare_modes(
    graph: DependencyGraph, reg: RegistryIndex, usage: UsageModel
) -> ModeComparison:
    """Run both planning modes on the same inputs and tabulate the outcome."""
    lagease_plan = plan_upgrades(graph, reg, usage)
    baseline_plan = baseline_direct_latest(graph, reg)
    return ModeComparison(
        rows=(
            _mode_report("lagease", graph, lagease_plan, reg, usage),
            _mode_report("direct-latest", graph, baseline_plan, reg, usage),
        )
    )
