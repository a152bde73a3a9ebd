"""Registry loading, validation, queries, and closure sizes."""

from __future__ import annotations

import json

import pytest

from conftest import P, V, make_manifest, make_registry, registry_payload, release, ts
from laglift.errors import (
    DanglingTargetError,
    DocumentFormatError,
    DuplicateReleaseError,
    InputFileError,
    NoStableReleaseError,
    UnknownPackageError,
    UnknownReleaseError,
)
from laglift.graph import resolve_graph
from laglift.registry import load_registry, registry_from_payload


class TestLoading:
    def test_three_package_fixture(self, chain_registry):
        assert chain_registry.packages() == (P("x:a"), P("x:b"), P("x:c"))

    def test_dangling_target_named(self):
        with pytest.raises(DanglingTargetError, match=r"B:9\.9"):
            make_registry(
                {
                    "x:A": [release("1.0", deps=[("x:B", "9.9", "compile")])],
                    "x:B": [release("1.0")],
                }
            )

    def test_duplicate_release(self):
        with pytest.raises(DuplicateReleaseError):
            make_registry({"x:a": [release("1.0"), release("1.0", "2020-02-01")]})

    def test_duplicate_by_trailing_zero_equality(self):
        # "1.0" and "1.0.0" compare equal, so they collide at load time
        with pytest.raises(DuplicateReleaseError):
            make_registry({"x:a": [release("1.0"), release("1.0.0", "2020-02-01")]})

    def test_self_dependency_rejected(self):
        with pytest.raises(DocumentFormatError, match="self-dependency"):
            make_registry({"x:a": [release("1.0", deps=[("x:a", "1.0", "compile")])]})

    def test_unknown_keys_rejected(self):
        payload = registry_payload({"x:a": [release("1.0")]})
        payload["extra"] = True
        with pytest.raises(DocumentFormatError, match="extra"):
            registry_from_payload(payload)

    def test_bad_timestamp_rejected(self):
        payload = registry_payload({"x:a": [release("1.0")]})
        payload["packages"][0]["releases"][0]["released_at"] = "2020-01-01 00:00:00"
        with pytest.raises(DocumentFormatError, match="timestamp"):
            registry_from_payload(payload)

    def test_bad_fingerprint_rejected(self):
        payload = registry_payload(
            {"x:a": [release("1.0", api={"method:Foo#f()": "aaaaaaaa"})]}
        )
        payload["packages"][0]["releases"][0]["api"][0]["fingerprint"] = "AAAAAAAA"
        with pytest.raises(DocumentFormatError, match="fingerprint"):
            registry_from_payload(payload)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputFileError):
            load_registry(tmp_path / "nope.json")

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(DocumentFormatError):
            load_registry(path)

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "reg.json"
        path.write_text(json.dumps(registry_payload({"x:a": [release("1.0")]})))
        reg = load_registry(path)
        assert reg.has_release(P("x:a"), V("1.0"))


class TestQueries:
    def test_releases_sorted_ascending(self):
        reg = make_registry(
            {"x:a": [release("2.0", "2020-03-01"), release("1.0"), release("1.1", "2020-02-01")]}
        )
        assert [str(r.version) for r in reg.releases_of(P("x:a"))] == ["1.0", "1.1", "2.0"]

    def test_unknown_package(self, chain_registry):
        with pytest.raises(UnknownPackageError):
            chain_registry.releases_of(P("x:zzz"))

    def test_unknown_release(self, chain_registry):
        with pytest.raises(UnknownReleaseError):
            chain_registry.release(P("x:a"), V("9.9"))

    def test_latest_stable_skips_prerelease(self):
        reg = make_registry({"x:a": [release("1.0"), release("2.0-rc1", "2020-02-01")]})
        assert reg.latest_stable(P("x:a")) == V("1.0")

    def test_latest_stable_singleton(self):
        reg = make_registry({"x:a": [release("1.0")]})
        assert reg.latest_stable(P("x:a")) == V("1.0")

    def test_no_stable_release(self):
        reg = make_registry({"x:a": [release("2.0-beta")]})
        with pytest.raises(NoStableReleaseError):
            reg.latest_stable(P("x:a"))


class TestClosureSize:
    def test_chain_of_two(self, chain_registry):
        # hand resolution: a:1.0 -> {b:1.0}, b:1.0 -> {c:1.0} => {b, c}
        assert chain_registry.closure_size(P("x:a"), V("1.0")) == 2

    def test_leaf_is_zero(self, chain_registry):
        assert chain_registry.closure_size(P("x:c"), V("1.0")) == 0

    def test_test_scope_excluded(self):
        reg = make_registry(
            {
                "x:a": [release("1.0", deps=[("x:b", "1.0", "test")])],
                "x:b": [release("1.0")],
            }
        )
        assert reg.closure_size(P("x:a"), V("1.0")) == 0

    def test_scope_excluded_at_depth(self):
        reg = make_registry(
            {
                "x:a": [release("1.0", deps=[("x:b", "1.0", "compile")])],
                "x:b": [release("1.0", deps=[("x:c", "1.0", "provided")])],
                "x:c": [release("1.0")],
            }
        )
        assert reg.closure_size(P("x:a"), V("1.0")) == 1

    def test_deterministic(self, chain_registry):
        first = chain_registry.closure_size(P("x:a"), V("1.0"))
        assert all(
            chain_registry.closure_size(P("x:a"), V("1.0")) == first for _ in range(3)
        )

    def test_unknown_release(self, chain_registry):
        with pytest.raises(UnknownReleaseError):
            chain_registry.closure_size(P("x:a"), V("7.7"))

    def test_bounded_by_registry_size(self, chain_registry):
        total = len(chain_registry.packages())
        for pkg in chain_registry.packages():
            for rel in chain_registry.releases_of(pkg):
                assert chain_registry.closure_size(pkg, rel.version) <= total - 1

    def test_matches_synthetic_root_resolution(self, chain_registry):
        # cross-module oracle: closure == nodes of a single-dep resolution, minus the release itself
        for pkg in chain_registry.packages():
            for rel in chain_registry.releases_of(pkg):
                manifest = make_manifest("t:root", [(str(pkg), rel.version.raw, "compile")])
                graph = resolve_graph(manifest, chain_registry)
                assert chain_registry.closure_size(pkg, rel.version) == len(graph.nodes) - 1

    def test_mediation_nearest_wins_inside_closure(self):
        # a -> b:1.0 and a -> c; c -> b:2.0. b mediates to 1.0 (depth 1 beats 2);
        # b:1.0 pulls d, b:2.0 would not.
        reg = make_registry(
            {
                "x:a": [
                    release("1.0", deps=[("x:b", "1.0", "compile"), ("x:c", "1.0", "compile")])
                ],
                "x:b": [
                    release("1.0", deps=[("x:d", "1.0", "compile")]),
                    release("2.0", "2020-02-01"),
                ],
                "x:c": [release("1.0", deps=[("x:b", "2.0", "compile")])],
                "x:d": [release("1.0")],
            }
        )
        assert reg.closure_size(P("x:a"), V("1.0")) == 3  # b, c, d
