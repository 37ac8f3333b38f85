"""Structured-document I/O: YAML files with a versioned `schema` field.

All operator-editable inputs (config, topology, catalogs, SLA sets,
scenarios) share this envelope. The event log is JSON lines, handled in
events.py.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import yaml

from .errors import SchemaError


def load_document(path: str | Path, expected_schema: str | None = None) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    return parse_document(text, expected_schema, source=str(path))


def parse_document(text: str, expected_schema: str | None = None, source: str = "<doc>") -> dict:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise SchemaError(source, f"not valid YAML: {e}")
    if not isinstance(doc, dict):
        raise SchemaError(source, "document root must be a mapping")
    if expected_schema is not None:
        check_schema(doc, expected_schema, source)
    return doc


def check_schema(doc: dict, expected: str, source: str = "<doc>") -> None:
    got = doc.get("schema")
    if got != expected:
        raise SchemaError(f"{source}.schema", f"expected {expected!r}, got {got!r}")


def dump_document(doc: dict) -> str:
    """Byte-stable YAML rendering: insertion order preserved, no aliases."""
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=False)


def canonical_json(doc: object) -> str:
    """Canonical JSON used wherever byte-identical output is a contract."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def builtin_path(name: str) -> Path:
    """Path to a packaged default document, e.g. 'topology.yaml' or 'scenarios/wams-reference.yaml'."""
    root = resources.files("gridslice").joinpath("data")
    return Path(str(root.joinpath(name)))


def load_builtin(name: str, expected_schema: str | None = None) -> dict:
    return load_document(builtin_path(name), expected_schema)
