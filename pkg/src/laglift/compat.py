"""Breaking-change detection and construct reachability.

A candidate upgrade is incompatible only when a construct it removes or
alters is actually reachable from the project's entry points, so breaking
changes in unused corners of a library never block an upgrade.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path

from .errors import DocumentFormatError, InputFileError, PackageMismatchError
from .registry import ApiSurface, ConstructId, PackageId, Release, _require_keys

PROJECT_OWNER = "<project>"


@dataclass(frozen=True)
class BreakingSet:
    """Constructs removed or contract-altered between two surfaces."""

    removed: frozenset[ConstructId]
    changed: frozenset[ConstructId]

    def __post_init__(self):
        if self.removed & self.changed:
            raise ValueError("a construct cannot be both removed and changed")

    @property
    def all(self) -> frozenset[ConstructId]:
        return self.removed | self.changed

    def __bool__(self) -> bool:
        return bool(self.removed or self.changed)


@dataclass(frozen=True)
class UsageModel:
    """Construct-level reference graph of the project.

    ``owners`` maps each construct to the package exporting it, or None for
    constructs belonging to the project itself.
    """

    entries: frozenset[ConstructId]
    edges: tuple[tuple[ConstructId, ConstructId], ...]
    owners: dict[ConstructId, PackageId | None]

    def __post_init__(self):
        for entry in self.entries:
            if self.owners.get(entry, "missing") is not None:
                raise DocumentFormatError(f"entry {entry} must be owned by the project")
        for src, dst in self.edges:
            for endpoint in (src, dst):
                if endpoint not in self.owners:
                    raise DocumentFormatError(f"edge endpoint {endpoint} has no owner")

    @classmethod
    def empty(cls) -> "UsageModel":
        return cls(entries=frozenset(), edges=(), owners={})


@dataclass(frozen=True)
class CompatCheck:
    """Outcome of one compatibility check, with the offending constructs."""

    compatible: bool
    evidence: tuple[ConstructId, ...]

    def __bool__(self) -> bool:
        return self.compatible


def breaking_changes(old: ApiSurface, new: ApiSurface) -> BreakingSet:
    """Diff two surfaces: removals and fingerprint changes break, additions never do."""
    removed = frozenset(c for c in old if c not in new)
    changed = frozenset(c for c in old if c in new and old[c] != new[c])
    return BreakingSet(removed=removed, changed=changed)


def reachable_used_constructs(usage: UsageModel, package: PackageId) -> frozenset[ConstructId]:
    """Constructs owned by ``package`` that the project transitively reaches."""
    adjacency: dict[ConstructId, list[ConstructId]] = {}
    for src, dst in usage.edges:
        adjacency.setdefault(src, []).append(dst)
    seen: set[ConstructId] = set(usage.entries)
    queue = deque(usage.entries)
    while queue:
        node = queue.popleft()
        for nxt in adjacency.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return frozenset(c for c in seen if usage.owners.get(c) == package)


def is_compatible(
    usage: UsageModel,
    package: PackageId,
    old_release: Release,
    candidate: Release,
) -> CompatCheck:
    """Check whether upgrading ``package`` breaks any reachable construct."""
    if old_release.package != package or candidate.package != package:
        raise PackageMismatchError(
            f"expected releases of {package}, got {old_release.package} and {candidate.package}"
        )
    broken = breaking_changes(old_release.api, candidate.api).all
    if not broken:
        return CompatCheck(compatible=True, evidence=())
    used = reachable_used_constructs(usage, package)
    overlap = tuple(sorted(broken & used))
    return CompatCheck(compatible=not overlap, evidence=overlap)


def usage_model_from_payload(payload: dict) -> UsageModel:
    """Build a usage model from an already-parsed JSON document."""
    _require_keys(payload, ("entries", "edges", "owners"), (), "usage model")
    owners: dict[ConstructId, PackageId | None] = {}
    for construct_text, owner_text in payload["owners"].items():
        construct = ConstructId.parse(construct_text)
        if construct in owners:
            raise DocumentFormatError(f"duplicate owner entry for {construct}")
        owners[construct] = None if owner_text == PROJECT_OWNER else PackageId.parse(owner_text)
    entries = frozenset(ConstructId.parse(e) for e in payload["entries"])
    edges = []
    for pair in payload["edges"]:
        if not isinstance(pair, list) or len(pair) != 2:
            raise DocumentFormatError(f"usage edge must be a [from, to] pair, got {pair!r}")
        edges.append((ConstructId.parse(pair[0]), ConstructId.parse(pair[1])))
    return UsageModel(entries=entries, edges=tuple(edges), owners=owners)


def load_usage_model(path: str | Path) -> UsageModel:
    """Load a usage model from a JSON file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputFileError(f"cannot read usage model {path}: {exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentFormatError(f"usage model {path} is not valid JSON: {exc}") from exc
    return usage_model_from_payload(payload)
