"""JSON kernel files.

Two forms, exactly one per file::

    {"n": 3, "matrix": [row-major n*n floats]}
    {"eigenvalues": [n floats], "eigenvectors": [row-major n*n floats, columns are eigenvectors]}

with optional "name" and "description". NaN and Infinity are rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import KernelFileError
from .linalg import SpectralForm, is_symmetric

ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class KernelFile:
    matrix: np.ndarray
    spectral: SpectralForm | None = None
    name: str | None = None
    description: str | None = None


def _reject_constant(token):
    raise KernelFileError(f"non-finite number {token!r} is not allowed in kernel files")


def _square_from(values, n: int, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size != n * n:
        raise KernelFileError(f"{what} must be a flat list of {n * n} numbers")
    return arr.reshape(n, n)


def parse_kernel(obj) -> KernelFile:
    if not isinstance(obj, dict):
        raise KernelFileError("kernel file must contain a JSON object")
    has_matrix = "matrix" in obj
    has_spec = "eigenvalues" in obj or "eigenvectors" in obj
    if has_matrix == has_spec:
        raise KernelFileError("kernel file needs exactly one of 'matrix' or 'eigenvalues'/'eigenvectors'")
    try:
        if has_matrix:
            n = obj.get("n")
            if not isinstance(n, int) or n < 1:
                raise KernelFileError("'n' must be a positive integer")
            m = _square_from(obj["matrix"], n, "matrix")
            if not is_symmetric(m):
                raise KernelFileError("matrix is not symmetric")
            spec = None
            m = 0.5 * (m + m.T)
        else:
            lam = np.asarray(obj.get("eigenvalues"), dtype=float)
            if lam.ndim != 1 or lam.size < 1:
                raise KernelFileError("'eigenvalues' must be a nonempty list")
            if "eigenvectors" not in obj:
                raise KernelFileError("spectral form needs 'eigenvectors'")
            u = _square_from(obj["eigenvectors"], lam.size, "eigenvectors")
            if np.max(np.abs(u.T @ u - np.eye(lam.size))) > ORTHO_TOL:
                raise KernelFileError("eigenvectors are not orthonormal")
            spec = SpectralForm(u, lam)
            m = spec.reconstruct()
            m = 0.5 * (m + m.T)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, KernelFileError):
            raise
        raise KernelFileError(f"malformed kernel file: {exc}") from exc
    if not np.all(np.isfinite(m)):
        raise KernelFileError("kernel entries must be finite")
    return KernelFile(m, spec, obj.get("name"), obj.get("description"))


def load_kernel(path) -> KernelFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise KernelFileError(f"cannot read {path}: {exc}") from exc
    try:
        obj = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise KernelFileError(f"{path}: invalid JSON ({exc})") from exc
    return parse_kernel(obj)


def kernel_to_json(matrix, name: str | None = None, description: str | None = None) -> dict:
    m = np.asarray(matrix, dtype=float)
    out = {"n": int(m.shape[0]), "matrix": m.ravel().tolist()}
    if name is not None:
        out["name"] = name
    if description is not None:
        out["description"] = description
    return out


def spectral_to_json(spec: SpectralForm, name: str | None = None) -> dict:
    out = {
        "eigenvalues": np.asarray(spec.lambdas, dtype=float).tolist(),
        "eigenvectors": np.asarray(spec.u, dtype=float).ravel().tolist(),
    }
    if name is not None:
        out["name"] = name
    return out


def save_kernel(path, matrix, **meta) -> None:
    Path(path).write_text(json.dumps(kernel_to_json(matrix, **meta), indent=2), encoding="utf-8")


def parse_subset_line(line: str) -> list[int] | None:
    """One data-file line -> 1-based elements; None for blank/comment lines."""
    body = line.split("#", 1)[0].strip()
    if not body:
        return None
    try:
        return [int(tok) for tok in body.split(",") if tok.strip()]
    except ValueError as exc:
        raise KernelFileError(f"bad subset line {line!r}") from exc
