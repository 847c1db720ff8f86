"""JSON wire formats.

Complex numbers are [re, im] pairs; matrices are row-major nested arrays of
such pairs; connections use the schema
{"kappa": [re, im], "points": [[re, im], ...], "residues": [matrix, ...],
 "trivial_at_infinity": bool}.
Decoding errors carry the offending field path for config diagnostics.
"""
from __future__ import annotations

import numpy as np

from .algebra import OrbitPoint
from .connection import FuchsianConnection

__all__ = [
    "ConfigError",
    "encode_complex",
    "decode_complex",
    "encode_matrix",
    "decode_matrix",
    "encode_connection",
    "decode_connection",
    "encode_jet",
    "decode_jet",
    "monodromy_report",
]


class ConfigError(ValueError):
    """Schema violation; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def encode_complex(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def decode_complex(v, path: str = "value") -> complex:
    if (not isinstance(v, (list, tuple)) or len(v) != 2
            or not all(isinstance(x, (int, float)) for x in v)):
        raise ConfigError(path, "expected a [re, im] pair")
    return complex(v[0], v[1])


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[encode_complex(x) for x in row] for row in m]


def decode_matrix(v, path: str = "matrix") -> np.ndarray:
    if not isinstance(v, list) or not v:
        raise ConfigError(path, "expected a nested array of [re, im] pairs")
    rows = []
    for i, row in enumerate(v):
        if not isinstance(row, list) or len(row) != len(v):
            raise ConfigError(f"{path}[{i}]", "matrix must be square")
        rows.append([decode_complex(x, f"{path}[{i}][{j}]")
                     for j, x in enumerate(row)])
    return np.array(rows, dtype=complex)


def encode_connection(conn: FuchsianConnection) -> dict:
    return {
        "kappa": encode_complex(conn.kappa),
        "points": [encode_complex(x) for x in conn.points],
        "residues": [encode_matrix(p.matrix) for p in conn.residues],
        "trivial_at_infinity": bool(conn.trivial_at_infinity),
    }


def decode_connection(d, path: str = "connection") -> FuchsianConnection:
    if not isinstance(d, dict):
        raise ConfigError(path, "expected an object")
    for key in ("kappa", "points", "residues"):
        if key not in d:
            raise ConfigError(f"{path}.{key}", "missing required field")
    kappa = decode_complex(d["kappa"], f"{path}.kappa")
    if kappa == 0:
        raise ConfigError(f"{path}.kappa", "must be nonzero")
    if not isinstance(d["points"], list) or not d["points"]:
        raise ConfigError(f"{path}.points", "expected a non-empty list")
    points = [decode_complex(x, f"{path}.points[{i}]")
              for i, x in enumerate(d["points"])]
    if not isinstance(d["residues"], list) or len(d["residues"]) != len(points):
        raise ConfigError(f"{path}.residues", "need one matrix per point")
    residues = []
    for i, m in enumerate(d["residues"]):
        mat = decode_matrix(m, f"{path}.residues[{i}]")
        eig = np.linalg.eigvals(mat)
        try:
            residues.append(OrbitPoint(mat, eig - eig.sum() / eig.size))
        except ValueError as exc:
            raise ConfigError(f"{path}.residues[{i}]", str(exc)) from exc
    trivial = d.get("trivial_at_infinity", True)
    if not isinstance(trivial, bool):
        raise ConfigError(f"{path}.trivial_at_infinity", "expected a boolean")
    try:
        return FuchsianConnection(kappa=kappa, points=points,
                                  residues=tuple(residues),
                                  trivial_at_infinity=trivial)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def encode_jet(jet) -> dict:
    return {
        "point": [encode_complex(jet.point[0]), encode_complex(jet.point[1])],
        "orders": list(jet.orders),
        "coeffs": [[encode_complex(c) for c in row] for row in jet.coeffs],
    }


def decode_jet(d, path: str = "jet"):
    from .jets import BiJet

    if not isinstance(d, dict):
        raise ConfigError(path, "expected an object")
    for key in ("point", "orders", "coeffs"):
        if key not in d:
            raise ConfigError(f"{path}.{key}", "missing required field")
    point = (decode_complex(d["point"][0], f"{path}.point[0]"),
             decode_complex(d["point"][1], f"{path}.point[1]"))
    coeffs = [[decode_complex(c, f"{path}.coeffs[{i}][{j}]")
               for j, c in enumerate(row)] for i, row in enumerate(d["coeffs"])]
    jet = BiJet(np.array(coeffs), point)
    if list(jet.orders) != list(d["orders"]):
        raise ConfigError(f"{path}.orders", "orders do not match the coefficient array")
    return jet


def monodromy_report(rep, max_len: int = 2) -> dict:
    """Conjugation-invariant summary of a monodromy representation."""
    from .monodromy import word_invariants, word_labels

    invariants = word_invariants(rep, max_len)
    labels = word_labels(rep.n_sites, max_len)
    return {
        "base": encode_complex(rep.base_point),
        "invariants": [{"word": lab, "trace": encode_complex(tr)}
                       for lab, tr in zip(labels, invariants)],
        "product_defect": rep.product_defect(),
    }
