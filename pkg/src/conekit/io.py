"""Lattice loading, argument parsing helpers, and versioned JSON reports."""

from __future__ import annotations

import json
import os
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

from .errors import ConfigError, DomainError
from .lattice import QuadLattice

SCHEMA = "1"
DATA_ENV = "CONEKIT_DATA_DIR"


def data_dir() -> Path:
    override = os.environ.get(DATA_ENV)
    if override:
        return Path(override)
    return Path(str(resources.files("conekit") / "data"))


def preset_names() -> list[str]:
    return sorted(p.stem for p in data_dir().glob("*.json"))


def lattice_from_dict(data: dict, source: str = "<dict>") -> QuadLattice:
    if not isinstance(data, dict) or "gram" not in data:
        raise ConfigError(f"{source}: lattice file needs a 'gram' field")
    gram = data["gram"]
    if (not isinstance(gram, list) or not gram
            or not all(isinstance(r, list) and all(isinstance(x, int) for x in r) for r in gram)):
        raise ConfigError(f"{source}: 'gram' must be a nonempty list of integer lists")
    rank = data.get("rank", len(gram))
    if rank != len(gram):
        raise ConfigError(f"{source}: rank {rank} does not match Gram size {len(gram)}")
    try:
        return QuadLattice(gram, data.get("label") or source)
    except DomainError as e:
        raise ConfigError(f"{source}: {e}") from e


def load_preset(name: str) -> QuadLattice:
    if name.startswith("diag:"):
        try:
            entries = [int(x) for x in name[5:].split(",") if x.strip()]
        except ValueError as e:
            raise ConfigError(f"bad diagonal lattice {name!r}") from e
        if not entries:
            raise ConfigError("diag: needs at least one entry")
        return QuadLattice.diag(*entries, label=name)
    path = data_dir() / f"{name}.json"
    if not path.is_file():
        raise ConfigError(f"unknown preset {name!r} (known: {', '.join(preset_names())})")
    return lattice_from_dict(json.loads(path.read_text()), name)


def load_lattice(source: str) -> QuadLattice:
    """Preset name, ``diag:a,b,...`` or path to a lattice JSON file."""
    p = Path(source)
    if source.endswith(".json") or (p.is_file() and not source.startswith("diag:")):
        if not p.is_file():
            raise ConfigError(f"lattice file {source} not found")
        try:
            data = json.loads(p.read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"{source}: invalid JSON ({e})") from e
        return lattice_from_dict(data, source)
    return load_preset(source)


def parse_vec(text: str, rational: bool = False) -> tuple:
    try:
        parts = [x.strip() for x in text.split(",") if x.strip()]
        return tuple(Fraction(x) if rational else int(x) for x in parts)
    except ValueError as e:
        raise ConfigError(f"cannot parse vector {text!r}") from e


def parse_vecs(text: str) -> list[tuple]:
    return [parse_vec(chunk) for chunk in text.split(";") if chunk.strip()]


def parse_ints(text: str) -> list[int]:
    try:
        return [abs(int(x)) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise ConfigError(f"cannot parse integer list {text!r}") from e


def load_group_file(path: str) -> tuple[str, list]:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"group file {path} not found")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from e
    gens = data.get("generators") if isinstance(data, dict) else data
    if not isinstance(gens, list):
        raise ConfigError(f"{path}: expected a list of generator matrices")
    name = data.get("name", p.stem) if isinstance(data, dict) else p.stem
    return name, gens


def _jsonable(obj: Any):
    if isinstance(obj, Fraction):
        return int(obj) if obj.denominator == 1 else str(obj)
    if isinstance(obj, tuple):
        return [_jsonable(x) for x in obj]
    if isinstance(obj, list):
        return [_jsonable(x) for x in obj]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    return obj


def report(command: str, config: dict, result: dict, tolerances: dict | None = None) -> dict:
    out = {"schema": SCHEMA, "command": command, "config": config, "result": result}
    if tolerances is not None:
        out["tolerances"] = tolerances
    return _jsonable(out)


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# revalidation of emitted reports
# ---------------------------------------------------------------------------

def revalidate(doc: dict) -> list[str]:
    """Recheck an emitted report; returns the list of discrepancies (empty when clean)."""
    from .chambers import Arrangement, Chamber, FaceResult, Wall, check_face_witness
    from .lattice import (divisibility, eval_form, is_isometry, is_primitive, mat_mul,
                          square, transpose)

    problems: list[str] = []
    if doc.get("schema") != SCHEMA:
        problems.append("schema mismatch")
    res = doc.get("result", {})
    cmd = doc.get("command", "")
    lat = res.get("lattice", res.get("plane"))
    L = lattice_from_dict(lat) if isinstance(lat, dict) else None

    if cmd == "lattice info":
        if list(L.signature) != res["signature"]:
            problems.append("signature mismatch")
    elif cmd == "enum":
        d = res["window"]["square"]
        for v in res["vectors"]:
            if square(L, v) != d or not is_primitive(v):
                problems.append(f"vector {v} fails the square/primitivity check")
            h = eval_form(L, res["window"]["anchor"], v)
            if not (0 <= h <= res["window"]["height"]):
                problems.append(f"vector {v} outside the height window")
    elif cmd == "orbits":
        for c in res["classes"]:
            inv = (c["invariants"]["square"], c["invariants"]["divisibility"])
            for v in c["input_members"] + c["new_vectors"]:
                if (square(L, v), divisibility(L, v)) != inv:
                    problems.append(f"class invariant mismatch at {v}")
    elif cmd.startswith("chambers"):
        arr = res["arrangement"]
        walls = tuple(Wall(tuple(w["vector"]), w["square"], w["divisibility"]) for w in arr["walls"])
        for w in walls:
            if square(L, w.vector) != w.square or divisibility(L, w.vector) != w.divisibility:
                problems.append(f"wall {w.vector} data mismatch")
        anchor = tuple(Fraction(x) for x in arr["anchor"])
        A = Arrangement(L, anchor, walls, arr["windows"], tuple(arr["window_anchor"]))
        for key in ("chamber", "result_chamber"):
            ch = res.get(key)
            if ch:
                pt = tuple(Fraction(x) for x in ch["point"])
                for w in walls:
                    s = "+" if eval_form(L, pt, w.vector) > 0 else "-"
                    if eval_form(L, pt, w.vector) == 0 or ch["signs"][w.key] != s:
                        problems.append(f"{key} sign mismatch at wall {w.key}")
        if res.get("faces") is not None and res.get("chamber"):
            ch = res["chamber"]
            C = Chamber(tuple(Fraction(x) for x in ch["point"]),
                        tuple(1 if ch["signs"][w.key] == "+" else -1 for w in walls))
            for f in res["faces"]:
                if f["is_face"]:
                    w = walls[A.index(tuple(f["wall"]))]
                    fr = FaceResult(w, True, tuple(Fraction(x) for x in f["witness"]))
                    if not check_face_witness(A, C, fr):
                        problems.append(f"face witness for {f['wall']} does not revalidate")
        for g in res.get("stabilizer", []):
            if not is_isometry(L, g):
                problems.append("stabilizer element is not an isometry")
    elif cmd == "hyp geodesic":
        g = tuple(tuple(r) for r in res["automorph"])
        gram = tuple(tuple(r) for r in res["complement_gram"])
        if mat_mul(mat_mul(transpose(g), gram), g) != gram:
            problems.append("automorph does not preserve the complement form")
        for v in res["complement_basis"]:
            if eval_form(L, v, res["wall"]) != 0:
                problems.append("complement basis vector not orthogonal to the wall")
    elif cmd == "hyp cusps":
        for c in res["cusps"]:
            if square(L, c) != 0 or not is_primitive(c):
                problems.append(f"cusp {c} is not primitive isotropic")
        t = res["threshold"]
        for gd in res["geodesics"]:
            if not (gd["min_height"] <= gd["max_height"] <= t):
                problems.append(f"geodesic {gd['wall']} heights exceed the threshold")
            if gd["meets_core"] != (gd["min_height"] <= t) or gd["margin"] != t - gd["min_height"]:
                problems.append(f"geodesic {gd['wall']} core data inconsistent")
    elif cmd == "hyp density":
        vals = [c["f_D"] for c in res["curve"] if c["f_D"] is not None]
        if any(b > a for a, b in zip(vals, vals[1:])):
            problems.append("density curve increases")
    elif cmd.startswith("period"):
        from .lattice import restrict_gram, signature_of_gram
        for key in ("picard", "target"):
            N = res.get(key)
            if N:
                gram = restrict_gram(L, N["basis"])
                if [list(r) for r in gram] != N["gram"]:
                    problems.append(f"{key} Gram mismatch")
                if list(signature_of_gram(gram)) != N["signature"]:
                    problems.append(f"{key} signature mismatch")
    return problems
