"""Offline registry snapshot: packages, releases, API surfaces, closures.

The registry is a closed world: every dependency declaration must resolve
to a release inside the snapshot, so planning is deterministic and needs
no network. API surfaces are stored per release so compatibility checks
can diff them without reading bytecode.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator, Mapping

from .errors import (
    DanglingTargetError,
    DocumentFormatError,
    DuplicateReleaseError,
    InputFileError,
    NoStableReleaseError,
    UnknownPackageError,
    UnknownReleaseError,
)
from .versioning import Version, is_stable, parse_version

SCOPES = ("compile", "runtime", "test", "provided")

# Scopes that put a dependency into the upgrade graph. Test and provided
# declarations are excluded at every depth, not just the first.
ACTIVE_SCOPES = frozenset({"compile", "runtime"})

CONSTRUCT_KINDS = ("class", "method", "field")

_TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M:%SZ"
_HEX8 = frozenset("0123456789abcdef")


@dataclass(frozen=True, order=True)
class PackageId:
    """Maven-style coordinate pair, rendered as "group:artifact"."""

    group: str
    artifact: str

    def __post_init__(self):
        if not self.group or not self.artifact:
            raise DocumentFormatError(
                f"package id needs non-empty group and artifact: {self.group!r}:{self.artifact!r}"
            )

    def __str__(self) -> str:
        return f"{self.group}:{self.artifact}"

    @classmethod
    def parse(cls, text: str) -> "PackageId":
        parts = text.split(":")
        if len(parts) != 2:
            raise DocumentFormatError(f"package id must be 'group:artifact', got {text!r}")
        return cls(group=parts[0], artifact=parts[1])


@dataclass(frozen=True, order=True)
class ConstructId:
    """A named API element: class, method, or field plus its signature."""

    kind: str
    signature: str

    def __post_init__(self):
        if self.kind not in CONSTRUCT_KINDS:
            raise DocumentFormatError(f"unknown construct kind: {self.kind!r}")
        if not self.signature:
            raise DocumentFormatError("construct signature must be non-empty")

    def __str__(self) -> str:
        return f"{self.kind}:{self.signature}"

    @classmethod
    def parse(cls, text: str) -> "ConstructId":
        kind, sep, signature = text.partition(":")
        if not sep:
            raise DocumentFormatError(f"construct must be 'kind:signature', got {text!r}")
        return cls(kind=kind, signature=signature)


def _check_fingerprint(fp: str, where: str) -> str:
    if len(fp) != 8 or not set(fp) <= _HEX8:
        raise DocumentFormatError(f"fingerprint must be 8 lower-case hex chars in {where}: {fp!r}")
    return fp


@dataclass(frozen=True)
class ApiSurface:
    """Exported constructs of one release, each with an 8-hex-char fingerprint."""

    entries: Mapping[ConstructId, str]

    def __iter__(self) -> Iterator[ConstructId]:
        return iter(self.entries)

    def __contains__(self, construct: ConstructId) -> bool:
        return construct in self.entries

    def __getitem__(self, construct: ConstructId) -> str:
        return self.entries[construct]

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def empty(cls) -> "ApiSurface":
        return cls(entries={})


@dataclass(frozen=True)
class DependencyDecl:
    """One declared dependency: exact version pin plus scope."""

    package: PackageId
    version: Version
    scope: str

    def __post_init__(self):
        if self.scope not in SCOPES:
            raise DocumentFormatError(f"unknown scope {self.scope!r} for {self.package}")


@dataclass(frozen=True)
class Release:
    package: PackageId
    version: Version
    released_at: datetime
    dependencies: tuple[DependencyDecl, ...]
    api: ApiSurface

    @property
    def coordinate(self) -> str:
        return f"{self.package}:{self.version}"


class RegistryIndex:
    """Immutable, validated universe of packages and releases.

    Construct via :func:`load_registry` or :meth:`from_releases`; both run
    the full closed-world validation.
    """

    def __init__(self, releases_by_package: dict[PackageId, list[Release]]):
        self._releases = releases_by_package
        self._by_key: dict[tuple[PackageId, Version], Release] = {}
        for package, releases in releases_by_package.items():
            for release in releases:
                self._by_key[(package, release.version)] = release
        self._closure_cache: dict[tuple[PackageId, Version], int] = {}

    @classmethod
    def from_releases(cls, releases: list[Release]) -> "RegistryIndex":
        grouped: dict[PackageId, list[Release]] = {}
        for release in releases:
            grouped.setdefault(release.package, []).append(release)
        for package, group in grouped.items():
            group.sort(key=lambda r: r.version)
            for earlier, later in zip(group, group[1:]):
                if earlier.version == later.version:
                    raise DuplicateReleaseError(
                        f"duplicate release {package}:{later.version} "
                        f"(compares equal to {earlier.version})"
                    )
        index = cls(grouped)
        index._validate_closed_world()
        return index

    def _validate_closed_world(self) -> None:
        for release in self._by_key.values():
            for decl in release.dependencies:
                if decl.package == release.package:
                    raise DocumentFormatError(
                        f"{release.coordinate} declares a self-dependency"
                    )
                if (decl.package, decl.version) not in self._by_key:
                    raise DanglingTargetError(
                        f"{release.coordinate} depends on {decl.package}:{decl.version}, "
                        f"which is not in the registry"
                    )

    def packages(self) -> tuple[PackageId, ...]:
        return tuple(sorted(self._releases))

    def has_package(self, package: PackageId) -> bool:
        return package in self._releases

    def has_release(self, package: PackageId, version: Version) -> bool:
        return (package, version) in self._by_key

    def releases_of(self, package: PackageId) -> tuple[Release, ...]:
        """All releases of ``package``, ascending by version."""
        try:
            return tuple(self._releases[package])
        except KeyError:
            raise UnknownPackageError(f"unknown package {package}") from None

    def release(self, package: PackageId, version: Version) -> Release:
        try:
            return self._by_key[(package, version)]
        except KeyError:
            if package not in self._releases:
                raise UnknownPackageError(f"unknown package {package}") from None
            raise UnknownReleaseError(f"unknown release {package}:{version}") from None

    def latest_stable(self, package: PackageId) -> Version:
        """Maximum stable version of ``package``."""
        stable = [r.version for r in self.releases_of(package) if is_stable(r.version)]
        if not stable:
            raise NoStableReleaseError(f"{package} has no stable release")
        return stable[-1]

    def closure_size(self, package: PackageId, version: Version) -> int:
        """Distinct packages in the isolated mediated closure of one release.

        The release is resolved as if it were the only dependency of a
        synthetic root: breadth-first, nearest declaration wins, first
        declaration breaks equal-depth ties, test/provided pruned at every
        level. The release's own package is not counted.
        """
        key = (package, version)
        cached = self._closure_cache.get(key)
        if cached is not None:
            return cached
        root = self.release(package, version)
        resolved: dict[PackageId, Version] = {package: version}
        frontier: list[tuple[PackageId, Version]] = [
            (d.package, d.version) for d in root.dependencies if d.scope in ACTIVE_SCOPES
        ]
        while frontier:
            added: list[PackageId] = []
            for pkg, ver in frontier:
                if pkg in resolved:
                    continue
                resolved[pkg] = ver
                added.append(pkg)
            frontier = [
                (d.package, d.version)
                for pkg in added
                for d in self.release(pkg, resolved[pkg]).dependencies
                if d.scope in ACTIVE_SCOPES and d.package not in resolved
            ]
        size = len(resolved) - 1
        self._closure_cache[key] = size
        return size


def _require_keys(obj: dict, required: tuple[str, ...], optional: tuple[str, ...], where: str) -> None:
    if not isinstance(obj, dict):
        raise DocumentFormatError(f"expected a JSON object in {where}, got {type(obj).__name__}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise DocumentFormatError(f"missing key(s) {missing} in {where}")
    unknown = [k for k in obj if k not in required and k not in optional]
    if unknown:
        raise DocumentFormatError(f"unknown key(s) {unknown} in {where}")


def parse_timestamp(text: str, where: str) -> datetime:
    """Parse a UTC timestamp of the form YYYY-MM-DDThh:mm:ssZ."""
    try:
        parsed = datetime.strptime(text, _TIMESTAMP_FORMAT)
    except (TypeError, ValueError):
        raise DocumentFormatError(
            f"timestamp must be YYYY-MM-DDThh:mm:ssZ in {where}: {text!r}"
        ) from None
    return parsed.replace(tzinfo=timezone.utc)


def _parse_decl(obj: dict, where: str) -> DependencyDecl:
    _require_keys(obj, ("package", "version", "scope"), (), where)
    return DependencyDecl(
        package=PackageId.parse(obj["package"]),
        version=parse_version(obj["version"]),
        scope=obj["scope"],
    )


def _parse_api(entries: list, where: str) -> ApiSurface:
    surface: dict[ConstructId, str] = {}
    for entry in entries:
        _require_keys(entry, ("id", "kind", "fingerprint"), (), where)
        construct = ConstructId(kind=entry["kind"], signature=entry["id"])
        if construct in surface:
            raise DocumentFormatError(f"duplicate construct {construct} in {where}")
        surface[construct] = _check_fingerprint(entry["fingerprint"], where)
    return ApiSurface(entries=surface)


def registry_from_payload(payload: dict) -> RegistryIndex:
    """Build a validated index from an already-parsed registry document."""
    if not isinstance(payload, dict):
        raise DocumentFormatError("registry document must be a JSON object")
    _require_keys(payload, ("packages",), (), "registry document")
    if not isinstance(payload["packages"], list):
        raise DocumentFormatError("'packages' must be a list")
    releases: list[Release] = []
    seen_packages: set[PackageId] = set()
    for pkg_obj in payload["packages"]:
        _require_keys(pkg_obj, ("group", "artifact", "releases"), (), "package entry")
        package = PackageId(group=pkg_obj["group"], artifact=pkg_obj["artifact"])
        if package in seen_packages:
            raise DocumentFormatError(f"duplicate package entry {package}")
        seen_packages.add(package)
        for rel_obj in pkg_obj["releases"]:
            where = f"{package}:{rel_obj.get('version', '?')}"
            _require_keys(rel_obj, ("version", "released_at"), ("dependencies", "api"), where)
            releases.append(
                Release(
                    package=package,
                    version=parse_version(rel_obj["version"]),
                    released_at=parse_timestamp(rel_obj["released_at"], where),
                    dependencies=tuple(
                        _parse_decl(d, where) for d in rel_obj.get("dependencies", [])
                    ),
                    api=_parse_api(rel_obj.get("api", []), where),
                )
            )
    return RegistryIndex.from_releases(releases)


def load_registry(path: str | Path) -> RegistryIndex:
    """Load and validate a registry snapshot from a JSON file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputFileError(f"cannot read registry file {path}: {exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentFormatError(f"registry file {path} is not valid JSON: {exc}") from exc
    return registry_from_payload(payload)
