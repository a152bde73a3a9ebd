"""Shared fixture builders: compact registry/manifest/usage constructors."""

from __future__ import annotations

import pytest

from laglift.compat import usage_model_from_payload
from laglift.graph import manifest_from_payload
from laglift.registry import PackageId, registry_from_payload
from laglift.versioning import parse_version

P = PackageId.parse
V = parse_version


def ts(day: str) -> str:
    """Expand a YYYY-MM-DD date to the registry timestamp format."""
    return f"{day}T00:00:00Z"


def release(version, at="2020-01-01", deps=(), api=None):
    """Shorthand release payload: deps are (package, version, scope) triples."""
    return {
        "version": version,
        "released_at": ts(at),
        "dependencies": [
            {"package": pkg, "version": ver, "scope": scope} for pkg, ver, scope in deps
        ],
        "api": [
            {"id": signature.split(":", 1)[1], "kind": signature.split(":", 1)[0], "fingerprint": fp}
            for signature, fp in (api or {}).items()
        ],
    }


def registry_payload(packages: dict) -> dict:
    """packages maps "group:artifact" to a list of release payloads."""
    return {
        "packages": [
            {
                "group": name.split(":")[0],
                "artifact": name.split(":")[1],
                "releases": releases,
            }
            for name, releases in packages.items()
        ]
    }


def make_registry(packages: dict):
    return registry_from_payload(registry_payload(packages))


def manifest_payload(module: str, deps) -> dict:
    return {
        "module": module,
        "dependencies": [
            {"package": pkg, "version": ver, "scope": scope} for pkg, ver, scope in deps
        ],
    }


def make_manifest(module: str, deps):
    return manifest_from_payload(manifest_payload(module, deps))


def make_usage(entries=(), edges=(), owners=None):
    return usage_model_from_payload(
        {
            "entries": list(entries),
            "edges": [list(edge) for edge in edges],
            "owners": dict(owners or {}),
        }
    )


@pytest.fixture
def chain_registry():
    """x:a -> x:b -> x:c, each with a couple of versions."""
    return make_registry(
        {
            "x:a": [
                release("1.0", "2020-01-01", deps=[("x:b", "1.0", "compile")]),
                release("2.0", "2020-06-01", deps=[("x:b", "1.0", "compile")]),
            ],
            "x:b": [
                release("1.0", "2020-01-01", deps=[("x:c", "1.0", "compile")]),
            ],
            "x:c": [
                release("1.0", "2020-01-01"),
            ],
        }
    )
