"""JSON problem and result files.

Problem file (``"schema": 1``)::

    {"schema": 1, "m": 1, "h": [[1.0]], "g": [[[0.6, 0.0]]],
     "h0": ..., "lambda": 1.0,
     "quadrature": {"tau_points": 200, "sigma_points": 64, "abs_tol": 1e-8},
     "fock": {"cutoff": 64, "auto": true},
     "scalar_field": {"K": 4, "box_length": 10, "mass": 1,
                      "kappa": {"amplitude": 0.5, "width": 0.5}}}

Matrix entries are reals or ``[re, im]`` pairs.  With a ``scalar_field``
block the matrices are generated and ``m``, ``h``, ``g`` may be omitted.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .algebra import QuadraticProblem
from .errors import BogoliubovError
from .quadrature import QuadratureConfig

SCHEMA = 1
CONVENTION = "tau-measure: dtau/pi for loops, dtau/2pi elsewhere, corrected prefactors"
KNOWN_KEYS = {"schema", "m", "h", "g", "h0", "lambda", "quadrature", "fock", "scalar_field", "name"}


class ProblemParseError(BogoliubovError, ValueError):
    """A problem file is malformed; the message names the line or field."""


@dataclass(frozen=True)
class ProblemFile:
    problem: QuadraticProblem
    quadrature: QuadratureConfig
    fock_cutoff: Optional[int] = None
    fock_auto: bool = True
    scalar_field: Optional[dict] = None
    raw: dict = field(default_factory=dict, compare=False)


def _complex(x, where: str) -> complex:
    if isinstance(x, bool):
        raise ProblemParseError(f"{where}: expected a number or [re, im], got a boolean")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        return complex(x[0], x[1])
    raise ProblemParseError(f"{where}: expected a number or [re, im], got {x!r}")


def parse_matrix(rows, m: int, name: str) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != m:
        raise ProblemParseError(f"field '{name}': expected {m} rows")
    out = np.empty((m, m), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != m:
            raise ProblemParseError(f"field '{name}[{i}]': expected {m} entries")
        for j, x in enumerate(row):
            out[i, j] = _complex(x, f"field '{name}[{i}][{j}]'")
    if not np.all(np.isfinite(out)):
        raise ProblemParseError(f"field '{name}': entries must be finite")
    return out


def encode_matrix(a) -> list:
    """Real entries as floats, complex ones as ``[re, im]``."""
    a = np.atleast_2d(np.asarray(a))
    if np.iscomplexobj(a) and np.any(a.imag != 0):
        return [[[float(x.real), float(x.imag)] for x in row] for row in a]
    return [[float(x) for x in row.real] for row in a]


def _quadrature(block, defaults: QuadratureConfig) -> QuadratureConfig:
    if block is None:
        return defaults
    if not isinstance(block, dict):
        raise ProblemParseError("field 'quadrature': expected an object")
    unknown = set(block) - {"tau_points", "sigma_points", "abs_tol", "tau_rule"}
    if unknown:
        raise ProblemParseError(f"field 'quadrature': unknown keys {sorted(unknown)}")
    kw = {"tau_rule": defaults.tau_rule, "tau_points": defaults.tau_points,
          "sigma_points": defaults.sigma_points, "abs_tol": defaults.abs_tol}
    kw.update(block)
    try:
        return QuadratureConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise ProblemParseError(f"field 'quadrature': {exc}") from None


def _scalar_problem(block) -> QuadraticProblem:
    from .renorm import gaussian_kappa, scalar_field_instance
    if not isinstance(block, dict):
        raise ProblemParseError("field 'scalar_field': expected an object")
    try:
        kap = block.get("kappa", {})
        return scalar_field_instance(int(block["K"]), float(block["box_length"]),
                                     float(block["mass"]),
                                     gaussian_kappa(float(kap.get("amplitude", 0.0)),
                                                    float(kap.get("width", 1.0))),
                                     block.get("grid_points"))
    except KeyError as exc:
        raise ProblemParseError(f"field 'scalar_field': missing key {exc}") from None
    except (TypeError, AttributeError) as exc:
        raise ProblemParseError(f"field 'scalar_field': {exc}") from None


def problem_from_dict(doc: Any, defaults: QuadratureConfig = QuadratureConfig()) -> ProblemFile:
    if not isinstance(doc, dict):
        raise ProblemParseError("top level: expected a JSON object")
    unknown = set(doc) - KNOWN_KEYS
    if unknown:
        raise ProblemParseError(f"top level: unknown keys {sorted(unknown)}")
    if doc.get("schema", SCHEMA) != SCHEMA:
        raise ProblemParseError(f"field 'schema': unsupported version {doc.get('schema')!r}")
    qc = _quadrature(doc.get("quadrature"), defaults)
    fock = doc.get("fock") or {}
    if not isinstance(fock, dict):
        raise ProblemParseError("field 'fock': expected an object")
    cutoff = fock.get("cutoff")
    if cutoff is not None and (not isinstance(cutoff, int) or cutoff < 1):
        raise ProblemParseError("field 'fock.cutoff': expected a positive integer")
    sf = doc.get("scalar_field")
    if sf is not None and "h" not in doc:
        problem = _scalar_problem(sf)
    else:
        for key in ("m", "h", "g"):
            if key not in doc:
                raise ProblemParseError(f"field '{key}': missing")
        m = doc["m"]
        if not isinstance(m, int) or isinstance(m, bool) or m < 1:
            raise ProblemParseError("field 'm': expected a positive integer")
        h = parse_matrix(doc["h"], m, "h")
        g = parse_matrix(doc["g"], m, "g")
        h0 = parse_matrix(doc["h0"], m, "h0") if doc.get("h0") is not None else None
        lam = doc.get("lambda", 1.0)
        if not isinstance(lam, (int, float)) or isinstance(lam, bool):
            raise ProblemParseError("field 'lambda': expected a number")
        try:
            problem = QuadraticProblem(h, g, h0=h0, coupling=lam)
        except ValueError as exc:
            raise ProblemParseError(f"fields 'h'/'g': {exc}") from None
    return ProblemFile(problem, qc, cutoff, bool(fock.get("auto", True)), sf, doc)


def parse_problem(text: str, defaults: QuadratureConfig = QuadratureConfig()) -> ProblemFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return problem_from_dict(doc, defaults)


def load_problem(path, defaults: QuadratureConfig = QuadratureConfig()) -> ProblemFile:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ProblemParseError(f"{path}: {exc.strerror}") from None
    return parse_problem(text, defaults)


def problem_to_dict(p: QuadraticProblem, qc: Optional[QuadratureConfig] = None) -> dict:
    doc = {"schema": SCHEMA, "m": p.m, "h": encode_matrix(p.h), "g": encode_matrix(p.g)}
    if not np.array_equal(p.h0, p.h):
        doc["h0"] = encode_matrix(p.h0)
    if p.coupling != 1.0:
        doc["lambda"] = p.coupling
    if qc is not None:
        doc["quadrature"] = {"tau_rule": qc.tau_rule, "tau_points": qc.tau_points,
                             "sigma_points": qc.sigma_points, "abs_tol": qc.abs_tol}
    return doc


def to_jsonable(x):
    """Recursively convert numpy scalars/arrays and complex numbers."""
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        if x.ndim == 2:
            return encode_matrix(x)
        return [to_jsonable(v) for v in x.tolist()]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)] if x.imag != 0 else float(x.real)
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else None
    return x


def result_document(command: str, echo: dict, results: dict, timings: dict) -> dict:
    from . import __version__
    return {"schema": SCHEMA, "command": command, "version": __version__, "convention": CONVENTION,
            "input": to_jsonable(echo), "results": to_jsonable(results),
            "timings": to_jsonable(timings)}


def dumps_result(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def load_result(text: str) -> dict:
    """Parse a result file and check that its input echo is a valid problem."""
    doc = json.loads(text)
    if doc.get("schema") != SCHEMA or doc.get("convention") != CONVENTION:
        raise ProblemParseError("result file has an unknown schema or convention")
    problem_from_dict(doc["input"])
    return doc
