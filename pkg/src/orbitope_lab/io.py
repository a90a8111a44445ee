"""Fixed-precision JSON plus CSV and OFF text formats."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ConfigError, ParseError

DIGITS = 17


def to_jsonable(obj: Any) -> Any:
    """Convert numpy and dataclass values to plain JSON types.

    Complex scalars become [re, im] pairs.
    """
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return to_jsonable(np.stack([obj.real, obj.imag], axis=-1))
        return to_jsonable(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite value cannot be serialized")
    if x == 0:
        return "0.0"
    text = format(x, f".{DIGITS}g")
    return text if any(c in text for c in ".en") else text + ".0"


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (list, dict)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [pad + json.dumps(str(k)) + ": " + _encode(v, indent, level + 1) for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    """Deterministic JSON with every float printed to 17 significant digits."""
    return _encode(to_jsonable(obj), indent, 0) + "\n"


def write_json(path: str | Path, obj: Any) -> Path:
    path = Path(path)
    path.write_text(dumps(obj))
    return path


def read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError("file not found", path=str(path)) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("invalid JSON", path=str(path), line=exc.lineno, column=exc.colno) from exc


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------- polytopes
def polytope_to_dict(P) -> dict:
    return {
        "vertices": P.vertices,
        "facets": [{"normal": n, "offset": float(o)} for n, o in P.facets],
    }


def polytope_vertices_csv(P) -> str:
    d = P.ambient_dim
    return csv_text([f"a{i}" for i in range(d)], [[float(x) for x in v] for v in P.vertices])


def orbit_sample_csv(points: np.ndarray, moment_coords: np.ndarray) -> str:
    d = points.shape[1]
    header = [f"{p}{i}" for i in range(d) for p in ("re", "im")] + [f"mu{j}" for j in range(moment_coords.shape[1])]
    rows = []
    for x, m in zip(points, moment_coords):
        row = []
        for z in x:
            row += [float(z.real), float(z.imag)]
        rows.append(row + [float(v) for v in m])
    return csv_text(header, rows)


# -------------------------------------------------------------------- meshes
def mesh_to_off(mesh) -> str:
    lines = ["OFF", f"{len(mesh.vertices)} {len(mesh.triangles)} 0"]
    lines += [" ".join(format_float(float(c)) for c in v) for v in mesh.vertices]
    lines += ["3 " + " ".join(str(int(i)) for i in t) for t in mesh.triangles]
    return "\n".join(lines) + "\n"


def mesh_from_off(text: str):
    from .eigen import RiemannMesh

    tokens = [ln.split("#")[0].strip() for ln in text.splitlines()]
    tokens = [t for t in tokens if t]
    try:
        if tokens[0] != "OFF":
            raise ParseError("missing OFF header")
        nv, nf = (int(x) for x in tokens[1].split()[:2])
        verts = np.array([[float(x) for x in tokens[2 + i].split()[:3]] for i in range(nv)])
        faces = []
        for i in range(nf):
            parts = [int(x) for x in tokens[2 + nv + i].split()]
            if parts[0] != 3:
                raise ParseError("only triangular faces are supported", face=i)
            faces.append(parts[1:4])
    except (IndexError, ValueError) as exc:
        raise ParseError("malformed OFF mesh") from exc
    return RiemannMesh(verts, np.array(faces))


# ------------------------------------------------------------- parsing input
def parse_complex_vector(data) -> np.ndarray:
    """Accept a list of reals or a list of [re, im] pairs."""
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError("vector must be numeric", value=str(data)) from exc
    if arr.ndim == 1:
        return arr.astype(complex)
    if arr.ndim == 2 and arr.shape[1] == 2:
        return arr[:, 0] + 1j * arr[:, 1]
    raise ParseError("vector must be a list of reals or [re, im] pairs", shape=list(arr.shape))


def parse_matrix_or_coords(data) -> np.ndarray:
    """A real vector (coordinates), a real matrix, or a complex matrix of [re, im] pairs."""
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError("expected numeric data", value=str(data)) from exc
    if arr.ndim == 3 and arr.shape[2] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim in (1, 2):
        return arr
    raise ParseError("expected coordinates or a matrix", shape=list(arr.shape))
