"""System description files and deterministic report serialisation.

A system file is one JSON object::

    {"schema_version": 1,
     "algebra": {"blocks": [2, 1]},
     "group": {"cyclic": 3} | {"symmetric": 3} | {"permutations": [...]} | {"cayley": [[...]], "identity": 0},
     "action": {"type": "trivial"} | {"type": "explicit", "elements": [{"perm": [...], "unitaries": [...]}]},
     "functions": {"psi": [value at g0, value at g1, ...]},
     "chains": {"main": [[0], [0, 1], ...]},
     "families": {"h": ["name1", "name2"]},
     "tol": 1e-9 | {"eps": 1e-9, "relative": true}}

Algebra elements are lists of blocks, blocks are row-major matrices of
complex scalars written as ``[re, im]`` or plain numbers.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .algebra import AlgebraDescriptor, Tolerance
from .errors import StructuralError
from .group_action import Action, FiniteGroup, GroupFunction, validate_action

SCHEMA_VERSION = 1


class InputError(Exception):
    """Unreadable or invalid system file; ``location`` names the offending spot."""

    def __init__(self, message: str, location: str = "$"):
        super().__init__(f"{location}: {message}")
        self.location = location


@dataclass
class SystemFile:
    algebra: AlgebraDescriptor
    group: FiniteGroup
    action: Action
    functions: dict[str, GroupFunction] = field(default_factory=dict)
    chains: dict[str, list[list[int]]] = field(default_factory=dict)
    families: dict[str, list[str]] = field(default_factory=dict)
    tol: Tolerance | None = None
    digest: str = ""

    def function(self, name: str) -> GroupFunction:
        try:
            return self.functions[name]
        except KeyError:
            raise InputError(f"unknown function {name!r}; available: {sorted(self.functions)}", "$.functions") from None

    def to_json(self) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "algebra": self.algebra.to_json(),
            "group": self.group.to_json(),
            "action": self.action.to_json(),
            "functions": {k: [v.to_json() for v in f.elements()] for k, f in self.functions.items()},
        }
        if self.chains:
            out["chains"] = self.chains
        if self.families:
            out["families"] = self.families
        if self.tol is not None:
            out["tol"] = {"eps": self.tol.eps, "relative": self.tol.relative}
        return out


def _group_from(data: Any, loc: str) -> FiniteGroup:
    if not isinstance(data, dict):
        raise InputError("group must be an object", loc)
    try:
        if "cyclic" in data:
            return FiniteGroup.cyclic(int(data["cyclic"]))
        if "symmetric" in data:
            return FiniteGroup.symmetric(int(data["symmetric"]))
        if "permutations" in data:
            return FiniteGroup.from_permutations(data["permutations"], data.get("name", "G"))
        if "cayley" in data:
            return FiniteGroup.from_json(data)
    except StructuralError as exc:
        raise InputError(str(exc), loc) from None
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed group: {exc}", loc) from None
    raise InputError("group needs one of cyclic, symmetric, permutations, cayley", loc)


def _tol_from(data: Any, loc: str) -> Tolerance:
    try:
        if isinstance(data, (int, float)):
            return Tolerance(float(data))
        return Tolerance(float(data["eps"]), bool(data.get("relative", True)))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed tolerance: {exc}", loc) from None


def parse_system(data: Any, tol: Tolerance | None = None) -> SystemFile:
    """Build and validate a system from decoded JSON."""
    if not isinstance(data, dict):
        raise InputError("top level must be an object")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise InputError(f"unsupported schema_version {version!r}", "$.schema_version")
    for key in ("algebra", "group"):
        if key not in data:
            raise InputError(f"missing required key {key!r}")
    try:
        algebra = AlgebraDescriptor.from_json(data["algebra"])
    except (StructuralError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed algebra: {exc}", "$.algebra") from None
    group = _group_from(data["group"], "$.group")
    file_tol = _tol_from(data["tol"], "$.tol") if "tol" in data else None
    check_tol = tol or file_tol

    try:
        action = Action.from_json(group, algebra, data.get("action", {"type": "trivial"}))
    except (StructuralError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed action: {exc}", "$.action") from None
    report = validate_action(action, check_tol)
    if not report.valid:
        raise InputError("action fails validation: " + "; ".join(report.violations), "$.action")

    functions = {}
    for name, vals in (data.get("functions") or {}).items():
        loc = f"$.functions.{name}"
        try:
            functions[name] = GroupFunction.from_json(group, algebra, vals)
        except (StructuralError, KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed function: {exc}", loc) from None

    chains = {}
    for name, sets in (data.get("chains") or {}).items():
        loc = f"$.chains.{name}"
        try:
            chains[name] = [[int(g) for g in s] for s in sets]
        except (TypeError, ValueError) as exc:
            raise InputError(f"malformed chain: {exc}", loc) from None
    families = {}
    for name, members in (data.get("families") or {}).items():
        loc = f"$.families.{name}"
        if not isinstance(members, list) or not all(isinstance(m, str) for m in members):
            raise InputError("a family is a list of function names", loc)
        missing = [m for m in members if m not in functions]
        if missing:
            raise InputError(f"unknown functions {missing}", loc)
        families[name] = members

    digest = hashlib.sha256(json.dumps(data, sort_keys=True).encode()).hexdigest()
    return SystemFile(algebra, group, action, functions, chains, families, file_tol, digest)


def load(path: str | Path, tol: Tolerance | None = None) -> SystemFile:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"JSON parse error: {exc.msg}", f"{path}:{exc.lineno}:{exc.colno}") from None
    return parse_system(data, tol)


def _emit(obj: Any, indent: int, level: int, out: list[str]):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        if math.isnan(obj):
            out.append("NaN")
        elif math.isinf(obj):
            out.append("Infinity" if obj > 0 else "-Infinity")
        else:
            text = format(obj, ".17g")
            # keep floats recognisable as floats after a round trip
            out.append(text if any(c in text for c in ".en") else text + ".0")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            out.append(f"{pad}{json.dumps(str(k))}: ")
            _emit(v, indent, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            parts: list[str] = []
            for v in obj:
                _emit(v, indent, level, parts)
            out.append("[" + ", ".join(parts) + "]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad)
            _emit(v, indent, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON with fixed key order (insertion) and floats at 17 significant digits."""
    out: list[str] = []
    _emit(obj, indent, 0, out)
    return "".join(out) + "\n"
