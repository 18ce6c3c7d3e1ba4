"""Instance generation and JSON file I/O.

The on-disk format is a single JSON object::

    {
      "n": 3,
      "entries": [[{"re": 1.0, "im": 0.0}, ...], ...],
      "metadata": {"label": "gaussian-gram", "seed": 7}
    }

``entries`` is row-major with one ``{re, im}`` object per entry.
Serialization uses exact float repr, so parse(serialize(M)) reproduces
M bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BadRankError, ParseError, SchemaError
from .gram import HermitianPSD, Tolerances, validate_hermitian_psd
from .montecarlo import RngStream

__all__ = [
    "ENSEMBLES",
    "InstanceFile",
    "gen_instance",
    "random_unitary",
    "parse_instance",
    "write_instance",
    "instance_from_dict",
    "instance_to_dict",
]

ENSEMBLES = ("gaussian-gram", "identity", "all-ones", "diagonal")


def gen_instance(
    n: int,
    d: int,
    seed: int = 0,
    ensemble: str = "gaussian-gram",
    tolerances: Tolerances | None = None,
) -> HermitianPSD:
    """Generate a validated instance from a named ensemble.

    gaussian-gram
        ``A = G G^dagger`` with i.i.d. standard complex Gaussian ``G``
        of shape ``(n, d)``, normalized so the largest diagonal entry
        is 1.  Rank ``d`` (verified against the eigenvalue count).
    identity
        ``I_n``; requires ``d == n``.
    all-ones
        The all-ones matrix; requires ``d == 1``.
    diagonal
        Random positive diagonal, normalized so the largest entry is 1;
        requires ``d == n``.
    """
    if n < 1:
        raise BadRankError(f"n must be >= 1, got {n}")
    if not 1 <= d <= n:
        raise BadRankError(f"rank d must satisfy 1 <= d <= n, got d={d}, n={n}")
    if ensemble not in ENSEMBLES:
        raise ValueError(f"unknown ensemble {ensemble!r}; choose from {ENSEMBLES}")

    if ensemble == "gaussian-gram":
        gen = RngStream(seed=seed).generator()
        g = gen.standard_normal((n, d, 2))
        G = (g[..., 0] + 1j * g[..., 1]) / np.sqrt(2.0)
        A = G @ G.conj().T
        A = A / np.max(np.real(np.diag(A)))
    elif ensemble == "identity":
        if d != n:
            raise BadRankError(f"identity ensemble has rank n={n}, got d={d}")
        A = np.eye(n, dtype=complex)
    elif ensemble == "all-ones":
        if d != 1:
            raise BadRankError(f"all-ones ensemble has rank 1, got d={d}")
        A = np.ones((n, n), dtype=complex)
    else:  # diagonal
        if d != n:
            raise BadRankError(f"diagonal ensemble has rank n={n}, got d={d}")
        gen = RngStream(seed=seed).generator()
        vals = gen.uniform(0.1, 1.0, size=n)
        A = np.diag(vals / vals.max()).astype(complex)

    psd = validate_hermitian_psd(A, tolerances)
    if psd.rank != d:
        raise BadRankError(
            f"generated instance has numerical rank {psd.rank}, expected {d}"
        )
    return psd


def random_unitary(d: int, seed: int = 0) -> np.ndarray:
    """Haar-ish random unitary from the QR of a complex Gaussian matrix.

    Columns are phase-fixed by the R diagonal, so the result is exactly
    unitary (up to roundoff) and deterministic per seed.
    """
    gen = RngStream(seed=seed).generator()
    g = gen.standard_normal((d, d, 2))
    Z = (g[..., 0] + 1j * g[..., 1]) / np.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    diag = np.diag(R)
    phases = diag / np.abs(diag)
    return Q * phases


@dataclass(frozen=True)
class InstanceFile:
    """Matrix plus free-form metadata, as stored on disk."""

    matrix: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def _require(cond: bool, fieldname: str, message: str) -> None:
    if not cond:
        raise SchemaError(fieldname, message)


def _number(value, fieldname: str) -> float:
    _require(
        isinstance(value, (int, float)) and not isinstance(value, bool),
        fieldname,
        f"expected a number, got {type(value).__name__}",
    )
    x = float(value)
    _require(math.isfinite(x), fieldname, "must be finite")
    return x


def instance_from_dict(obj) -> InstanceFile:
    """Build an `InstanceFile` from a parsed JSON object, checking schema."""
    _require(isinstance(obj, dict), "$", "top level must be an object")
    _require("n" in obj, "n", "missing required field")
    n = obj["n"]
    _require(
        isinstance(n, int) and not isinstance(n, bool) and n >= 1,
        "n",
        "must be an integer >= 1",
    )
    _require("entries" in obj, "entries", "missing required field")
    entries = obj["entries"]
    _require(isinstance(entries, list) and len(entries) == n,
             "entries", f"must be a list of {n} rows")

    M = np.empty((n, n), dtype=complex)
    for i, row in enumerate(entries):
        _require(isinstance(row, list) and len(row) == n,
                 f"entries[{i}]", f"must be a list of {n} entries")
        for j, cell in enumerate(row):
            where = f"entries[{i}][{j}]"
            _require(isinstance(cell, dict), where, "must be an object")
            _require("re" in cell and "im" in cell, where, "needs 're' and 'im'")
            re = _number(cell["re"], where + ".re")
            im = _number(cell["im"], where + ".im")
            M[i, j] = complex(re, im)

    metadata = obj.get("metadata", {})
    _require(isinstance(metadata, dict), "metadata", "must be an object")
    M.setflags(write=False)
    return InstanceFile(matrix=M, metadata=dict(metadata))


def instance_to_dict(instance: InstanceFile) -> dict:
    M = np.asarray(instance.matrix, dtype=complex)
    n = M.shape[0]
    entries = [
        [{"re": float(M[i, j].real), "im": float(M[i, j].imag)} for j in range(n)]
        for i in range(n)
    ]
    out = {"n": n, "entries": entries}
    if instance.metadata:
        out["metadata"] = instance.metadata
    return out


def parse_instance(path) -> InstanceFile:
    """Read and schema-check an instance file.

    Raises `ParseError` (with byte offset) for malformed JSON and
    `SchemaError` (naming the offending field) for structural problems.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at byte {exc.pos}: {exc.msg}", offset=exc.pos) from None
    return instance_from_dict(obj)


def write_instance(instance: InstanceFile, path) -> None:
    """Serialize an instance to disk; round-trips bit for bit."""
    Path(path).write_text(
        json.dumps(instance_to_dict(instance), indent=2) + "\n", encoding="utf-8"
    )
