"""Scene files: torus, foliation, bundles, framings and task parameters.

A scene is JSON (or TOML) of the form::

    {
      "dim": 3,
      "foliation": {"type": "codim1", "kappa": <Form>, "omega": <Form>, "N": [<TrigScalar>, ...]},
      "bundles": [{"A": <Form>, "H": [[1]], "real": false, "partial": <Form>}],
      "normal": {"A": <Form>, "real": true},
      "framings": [{"A": <Form>}],
      "task": {"n": 2, "p": 1}
    }

Foliation types: ``max``, ``min``, ``coordinate`` (``axes``, 1-based),
``frame`` (``frame``: list of vector fields) and ``codim1``.  Loading runs
every verification and records the residuals.
"""

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from .connections import (
    CodimOneData,
    Connection,
    FramingData,
    HermMetric,
    PartialConnection,
    bott_connection,
    extension_residual,
)
from .errors import FolrhoError, ValidationError, VerificationError
from .forms import Form, Foliation
from .trigcalc import TrigScalar


@dataclass
class Check:
    name: str
    residual: float
    passed: bool
    detail: str = ""

    def to_json(self):
        return {"name": self.name, "residual": self.residual, "passed": self.passed, "detail": self.detail}


@dataclass
class Bundle:
    connection: Connection
    metric: HermMetric
    partial: PartialConnection


@dataclass
class Scene:
    dim: int
    foliation: Foliation
    codim1: Optional[CodimOneData]
    bundles: List[Bundle]
    normal: Optional[Connection]
    framings: List[FramingData]
    task: Dict[str, Any]
    checks: List[Check] = field(default_factory=list)
    raw: Dict[str, Any] = field(default_factory=dict, repr=False)

    def digest(self, extra=None):
        payload = json.dumps({"scene": self.raw, "flags": extra or {}}, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()

    def bundle(self, i=0):
        if i >= len(self.bundles):
            raise ValidationError(f"scene has no bundle {i}")
        return self.bundles[i]


def read_scene_file(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read scene {path}: {exc}") from exc
    if path.suffix.lower() == ".toml":
        try:
            import tomli
        except ImportError as exc:  # pragma: no cover
            raise ValidationError("TOML scenes need the 'tomli' package") from exc
        try:
            return tomli.loads(text)
        except tomli.TOMLDecodeError as exc:
            raise ValidationError(f"malformed TOML: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _metric(data, rank, where):
    if data is None:
        return HermMetric.identity(rank)
    try:
        rows = [[complex(v["re"], v.get("im", 0.0)) if isinstance(v, dict) else complex(v) for v in row] for row in data]
        H = np.array(rows, dtype=complex)
    except (TypeError, KeyError, ValueError) as exc:
        raise ValidationError(f"{where}: malformed metric ({exc})") from exc
    if H.shape != (rank, rank):
        raise ValidationError(f"{where}: metric must be {rank} x {rank}")
    try:
        return HermMetric(H)
    except ValidationError as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def _form(data, dim, where, degree=None):
    try:
        f = Form.from_json(data)
    except FolrhoError as exc:
        raise ValidationError(f"{where}: {exc}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{where}: malformed form ({exc})") from exc
    if f.dim != dim:
        raise ValidationError(f"{where}: form lives on T^{f.dim}, scene is T^{dim}")
    if degree is not None and f.degree != degree:
        raise ValidationError(f"{where}: expected degree {degree}, got {f.degree}")
    return f


def _connection(data, dim, where):
    if not isinstance(data, dict) or "A" not in data:
        raise ValidationError(f"{where}: connection needs an 'A' form")
    A = _form(data["A"], dim, f"{where}.A", degree=1)
    if "rank" in data and int(data["rank"]) != A.rank:
        raise ValidationError(f"{where}: declared rank {data['rank']} differs from form rank {A.rank}")
    return Connection(A, bool(data.get("real", False)))


def _foliation(data, dim, checks, waive):
    kind = (data or {}).get("type", "max")
    verify = "integrability" not in waive
    if kind == "max":
        return Foliation.maximal(dim), None
    if kind == "min":
        return Foliation.minimal(dim), None
    if kind == "coordinate":
        axes = [int(a) - 1 for a in data.get("axes", [])]
        if any(not 0 <= a < dim for a in axes):
            raise ValidationError("foliation.axes out of range")
        return Foliation.coordinate(dim, axes), None
    if kind == "frame":
        try:
            frame = [[TrigScalar.from_json(v, dim) for v in X] for X in data["frame"]]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"foliation.frame malformed ({exc})") from exc
        if any(len(X) != dim for X in frame):
            raise ValidationError(f"foliation.frame: each field needs {dim} components")
        F = Foliation(dim, frame, verify=verify)
        if F.report is not None:
            checks.append(Check("foliation.rank", F.report.min_gram, True, "min Gram determinant"))
            checks.append(Check("foliation.integrability", F.report.residual, True))
        return F, None
    if kind == "codim1":
        kappa = _form(data.get("kappa"), dim, "foliation.kappa", degree=1)
        omega = _form(data.get("omega"), dim, "foliation.omega", degree=1)
        try:
            N = [TrigScalar.from_json(v, dim) for v in data["N"]]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"foliation.N malformed ({exc})") from exc
        cd = CodimOneData(kappa, omega, N, verify=verify)
        for name, value in cd.residuals.items():
            checks.append(Check(f"codim1.{name}", value, True))
        return cd.foliation, cd
    raise ValidationError(f"foliation.type: unknown type {kind!r}")


def load_scene(source, waive=()):
    """Parse and verify a scene from a path or an already-decoded mapping."""
    raw = read_scene_file(source) if isinstance(source, (str, Path)) else source
    if not isinstance(raw, dict):
        raise ValidationError("scene must be an object")
    try:
        dim = int(raw["dim"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError("scene needs an integer 'dim'") from exc
    if dim < 1:
        raise ValidationError("dim must be positive")
    waive = set(waive)
    checks = []
    foliation, cd = _foliation(raw.get("foliation"), dim, checks, waive)

    bundles = []
    for i, b in enumerate(raw.get("bundles", [])):
        where = f"bundles[{i}]"
        conn = _connection(b, dim, where)
        metric = _metric(b.get("H"), conn.rank, f"{where}.H")
        if "partial" in b:
            base = Connection(_form(b["partial"], dim, f"{where}.partial", degree=1), conn.real)
        else:
            base = conn
        verify = "flatness" not in waive
        try:
            pc = PartialConnection(base, foliation, verify=verify)
        except VerificationError as exc:
            raise VerificationError(f"{where}: {exc}", exc.residual) from exc
        checks.append(Check(f"{where}.partial_flatness", pc.residual, True))
        if "partial" in b and "extension" not in waive:
            res = extension_residual(conn, pc)
            ok = res < 1e-9
            checks.append(Check(f"{where}.extension", res, ok))
            if not ok:
                raise VerificationError(f"{where}: connection does not extend its partial connection", res)
        bundles.append(Bundle(conn, metric, pc))

    normal = None
    if "normal" in raw:
        normal = _connection(raw["normal"], dim, "normal")
    elif cd is not None:
        normal = bott_connection(cd)
        checks.append(Check("codim1.bott", 0.0, True, "kappa([X, N]) - omega(X)"))

    framings = []
    for i, f in enumerate(raw.get("framings", [])):
        data = f["A"] if isinstance(f, dict) and "A" in f else f
        A = _form(data, dim, f"framings[{i}]", degree=1)
        try:
            fr = FramingData(A)
        except VerificationError as exc:
            raise VerificationError(f"framings[{i}]: {exc}", exc.residual) from exc
        checks.append(Check(f"framings[{i}].flatness", fr.residual, True))
        framings.append(fr)

    for w in sorted(waive):
        checks.append(Check(f"waived.{w}", 0.0, True, "check waived by flag"))
    return Scene(dim, foliation, cd, bundles, normal, framings, dict(raw.get("task", {})), checks, raw)
