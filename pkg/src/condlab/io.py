"""Problem-file parsing, Matrix Market interchange and report serialization."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import scipy.io
import scipy.sparse

from .errors import CondlabError


class InputError(CondlabError):
    """Malformed or inconsistent problem file."""


@dataclass
class ParsedProblem:
    id: str
    family: str
    data: dict


def load_schema(name: str) -> dict:
    return json.loads(resources.files("condlab").joinpath("schemas", name).read_text())


def read_matrix_market(path) -> np.ndarray:
    try:
        m = scipy.io.mmread(str(path))
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read Matrix Market file {path}: {exc}") from exc
    if hasattr(m, "toarray"):
        m = m.toarray()
    m = np.asarray(m)
    if np.iscomplexobj(m):
        raise InputError("Matrix Market import supports real matrices only")
    return m.astype(np.float64)


def write_matrix_market(path, matrix, sparse: bool = False) -> None:
    a = np.asarray(matrix, dtype=np.float64)
    if sparse:
        a = scipy.sparse.coo_matrix(a)
    scipy.io.mmwrite(str(path), a, precision=17)


def _scalar(x):
    if isinstance(x, list):
        return complex(x[0], x[1])
    return float(x)


def _vector(v, what) -> np.ndarray:
    vals = [_scalar(x) for x in v]
    dtype = np.complex128 if any(isinstance(x, complex) for x in vals) else np.float64
    return np.array(vals, dtype=dtype)


def _matrix(m, base: Path, what) -> np.ndarray:
    if isinstance(m, dict):
        p = Path(m["matrix_market"])
        return read_matrix_market(p if p.is_absolute() else base / p)
    widths = {len(r) for r in m}
    if len(widths) != 1:
        raise InputError(f"{what}: rows have unequal lengths {sorted(widths)}")
    rows = [_vector(r, what) for r in m]
    dtype = np.complex128 if any(np.iscomplexobj(r) for r in rows) else np.float64
    return np.array(rows, dtype=dtype)


def parse_problems(text: str, base: Path = Path(".")) -> list[ParsedProblem]:
    """Parse and validate a problem document; raises :class:`InputError` on any defect."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        jsonschema.validate(doc, load_schema("problem.schema.json"))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"schema violation at {where}: {exc.message}") from exc
    items = doc["problems"] if "problems" in doc else [doc]
    out = []
    for i, item in enumerate(items):
        pid = item.get("id", f"p{i}")
        out.append(ParsedProblem(pid, item["family"], _convert(item, base, pid)))
    return out


def read_problem_file(path) -> list[ParsedProblem]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    return parse_problems(text, path.parent)


def _convert(item: dict, base: Path, pid: str) -> dict:
    fam = item["family"]
    data = {}
    if fam in ("linear_fixed_b", "linear_general", "eigen", "kernel"):
        A = _matrix(item["A"], base, f"{pid}.A")
        data["A"] = A
        if fam in ("linear_fixed_b", "linear_general"):
            if A.shape[0] != A.shape[1]:
                raise InputError(f"{pid}: A must be square, got {A.shape[0]}x{A.shape[1]}")
            b = _vector(item["b"], f"{pid}.b")
            if b.size != A.shape[0]:
                raise InputError(f"{pid}: b has length {b.size}, A has {A.shape[0]} rows")
            data["b"] = b
        elif fam == "eigen":
            if A.shape[0] != A.shape[1]:
                raise InputError(f"{pid}: A must be square, got {A.shape[0]}x{A.shape[1]}")
            data["which"] = int(item.get("which", 0))
        else:
            data["rank"] = int(item["rank"])
    elif fam == "upoly":
        data["coefficients"] = _vector(item["coefficients"], f"{pid}.coefficients")
        data["root"] = _scalar(item["root"]) if "root" in item else None
        data["metric"] = item.get("metric", "weyl")
    elif fam == "hpoly_system":
        n = int(item["n"])
        degrees = [int(d) for d in item["degrees"]]
        polys = item["polynomials"]
        if len(degrees) != n or len(polys) != n:
            raise InputError(f"{pid}: need {n} degrees and {n} polynomials")
        parsed = []
        for d, terms in zip(degrees, polys):
            poly = {}
            for term in terms:
                alpha = tuple(int(e) for e in term["exponents"])
                if len(alpha) != n + 1 or sum(alpha) != d:
                    raise InputError(f"{pid}: exponents {list(alpha)} are not a degree-{d} monomial in {n + 1} variables")
                poly[alpha] = poly.get(alpha, 0) + _scalar(term["coefficient"])
            parsed.append(poly)
        data.update(n=n, degrees=degrees, polys=parsed)
        for key in ("root", "start"):
            if key in item:
                v = _vector(item[key], f"{pid}.{key}")
                if v.size != n + 1:
                    raise InputError(f"{pid}: {key} must have length {n + 1}")
                data[key] = v
    elif fam == "map":
        data["matrix"] = _matrix(item["matrix"], base, f"{pid}.matrix")
    return data


def number(x):
    """JSON-safe float: non-finite values become the strings 'inf', '-inf', 'nan'."""
    if x is None:
        return None
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def csv_cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g") if math.isfinite(x) else number(x)
    return str(x)


def dump_csv(columns, rows, comments=()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\r\n")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([csv_cell(r.get(c)) for c in columns])
    return buf.getvalue()
