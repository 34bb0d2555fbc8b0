"""Instance files, report envelopes and their JSON schemas."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Optional

from .errors import InvalidInstanceError
from .model import StrengthMatrix, as_fraction

RATIONAL_PATTERN = r"^-?[0-9]+/[0-9]+$"

INSTANCE_SCHEMA = {
    "type": "object",
    "required": ["alpha"],
    "properties": {
        "alpha": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "array",
                "minItems": 1,
                "items": {"type": ["number", "string"]},
            },
        },
        "P": {"type": "number", "exclusiveMinimum": 1},
        "phases": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "label": {"type": "string"},
    },
}

REPORT_SCHEMA = {
    "type": "object",
    "required": ["command", "label", "status", "exit_code", "results"],
    "properties": {
        "command": {"type": "string"},
        "label": {"type": ["string", "null"]},
        "status": {"enum": ["pass", "fail", "error"]},
        "exit_code": {"enum": [0, 1, 2]},
        "results": {"type": ["object", "array"]},
    },
}

CONSTRAINT_SCHEMA = {
    "type": "object",
    "required": ["kind", "users", "rhs"],
    "properties": {
        "kind": {"enum": ["individual", "cycle"]},
        "users": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "rhs": {"type": "string", "pattern": RATIONAL_PATTERN},
    },
}

CERTIFICATE_SCHEMA = {
    "type": "object",
    "required": ["P", "achievable", "outer", "gap", "bound", "pass"],
    "properties": {
        "P": {"type": "number"},
        "achievable": {"type": ["number", "null"]},
        "outer": {"type": ["number", "null"]},
        "gap": {"type": ["number", "null"]},
        "bound": {"type": "number"},
        "pass": {"type": "boolean"},
    },
}

VERIFICATION_SCHEMA = {
    "type": "object",
    "required": ["check", "parameters", "cases_tested", "pass"],
    "properties": {
        "check": {"type": "string"},
        "parameters": {"type": "object"},
        "cases_tested": {"type": "integer", "minimum": 0},
        "pass": {"type": "boolean"},
        "witness": {},
    },
}


@dataclass(frozen=True)
class InstanceFile:
    alpha: StrengthMatrix
    P: Optional[float] = None
    phases: Optional[list] = None
    label: Optional[str] = None


def _exact(value):
    if isinstance(value, (Decimal, str)):
        return Fraction(str(value))
    return as_fraction(value)


def parse_instance(text: str) -> InstanceFile:
    """Parse an instance document; decimals become exact rationals."""
    import jsonschema

    try:
        doc = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise InvalidInstanceError(f"malformed JSON: {exc}") from exc
    plain = json.loads(text)
    try:
        jsonschema.validate(plain, INSTANCE_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise InvalidInstanceError(f"instance schema: {exc.message}") from exc
    try:
        alpha = StrengthMatrix([[_exact(a) for a in row] for row in doc["alpha"]])
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidInstanceError(f"bad strength entry: {exc}") from exc
    P = float(doc["P"]) if "P" in doc else None
    phases = plain.get("phases")
    if phases is not None and (
        len(phases) != alpha.n_receivers or any(len(r) != alpha.n_transmitters for r in phases)
    ):
        raise InvalidInstanceError("phase matrix must match the strength matrix")
    return InstanceFile(alpha, P, phases, plain.get("label"))


def load_instance(path: str) -> InstanceFile:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InvalidInstanceError(f"cannot read {path}: {exc}") from exc
    return parse_instance(text)


def make_report(command, label, exit_code, results):
    status = {0: "pass", 1: "fail", 2: "error"}[exit_code]
    return {
        "command": command,
        "label": label,
        "status": status,
        "exit_code": exit_code,
        "results": results,
    }


def validate_report(report):
    import jsonschema

    jsonschema.validate(report, REPORT_SCHEMA)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def write_atomic(path: Optional[str], text: str, stdout=None):
    """Write to ``path`` via a temporary file and rename; '-' or None means stdout."""
    if path in (None, "-"):
        import sys

        (stdout or sys.stdout).write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tinopt-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt_decimal(x) -> str:
    return f"{float(x):.12g}"
