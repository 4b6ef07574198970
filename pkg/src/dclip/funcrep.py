"""Max-affine convex functions on R^n and their JSON interchange format.

A :class:`MaxAffine` is ``x -> max_i <a_i, x> + b_i``.  It is finite
everywhere, convex and continuous, so it is the only function class the
rest of the toolkit needs to reason about.

JSON schemas::

    {"dim": n, "pieces": [{"a": [n floats], "b": float}, ...]}
    {"dim": n, "points": [[n floats], ...]}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import InputError, ModulusError, ParseError

__all__ = [
    "ACTIVE_TOL",
    "MaxAffine",
    "PointSet",
    "evaluate",
    "active_set",
    "validate_modulus",
    "parse_function",
    "parse_points",
    "serialize_function",
    "serialize_points",
    "load_function",
    "load_points",
    "as_point",
]

ACTIVE_TOL = 1e-9


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def as_point(x: Any, dim: int) -> np.ndarray:
    """Coerce ``x`` to a finite float vector of length ``dim``."""
    arr = np.array(x, dtype=float, ndmin=1)
    if arr.ndim != 1 or arr.shape[0] != dim:
        raise InputError(f"expected a vector of length {dim}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("point has non-finite entries")
    return arr


@dataclass(frozen=True, eq=False)
class MaxAffine:
    """Pointwise maximum of affine pieces ``<a_i, x> + b_i``.

    ``gradients`` has shape ``(m, dim)`` and ``intercepts`` shape ``(m,)``.
    Duplicate and dominated pieces are kept as given.
    """

    gradients: np.ndarray
    intercepts: np.ndarray

    def __post_init__(self):
        a = np.array(self.gradients, dtype=float)
        b = np.array(self.intercepts, dtype=float).reshape(-1)
        if a.ndim == 1:
            a = a.reshape(-1, 1)
        if a.ndim != 2 or a.shape[0] == 0 or a.shape[1] == 0:
            raise InputError("a max-affine function needs at least one piece and dim >= 1")
        if a.shape[0] != b.shape[0]:
            raise InputError(
                f"{a.shape[0]} gradients but {b.shape[0]} intercepts"
            )
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise InputError("coefficients must be finite")
        object.__setattr__(self, "gradients", _frozen(a))
        object.__setattr__(self, "intercepts", _frozen(b))

    @classmethod
    def from_pieces(cls, pieces: Iterable[tuple[Sequence[float], float]]) -> "MaxAffine":
        pieces = list(pieces)
        if not pieces:
            raise InputError("a max-affine function needs at least one piece")
        grads = [np.atleast_1d(np.asarray(a, dtype=float)) for a, _ in pieces]
        dims = {g.shape for g in grads}
        if len(dims) != 1:
            raise InputError(f"pieces have inconsistent gradient shapes {sorted(dims)}")
        return cls(np.vstack(grads), np.array([b for _, b in pieces], dtype=float))

    @classmethod
    def zero(cls, dim: int) -> "MaxAffine":
        return cls(np.zeros((1, dim)), np.zeros(1))

    @classmethod
    def norm(cls, dim: int, kind: str, scale: float = 1.0) -> "MaxAffine":
        """``scale * ||x||`` for the primal ``l1`` or ``linf`` norm, as pieces."""
        if kind == "linf":
            eye = np.eye(dim)
            grads = np.vstack([eye, -eye]) * scale
        elif kind == "l1":
            signs = np.array(np.meshgrid(*[[1.0, -1.0]] * dim, indexing="ij"))
            grads = signs.reshape(dim, -1).T * scale
        else:
            raise InputError(f"unknown norm {kind!r}")
        return cls(grads, np.zeros(grads.shape[0]))

    @property
    def dim(self) -> int:
        return self.gradients.shape[1]

    @property
    def n_pieces(self) -> int:
        return self.gradients.shape[0]

    def pieces(self) -> list[tuple[np.ndarray, float]]:
        return [(a.copy(), float(b)) for a, b in zip(self.gradients, self.intercepts)]

    def values(self, x) -> np.ndarray:
        """Values of every affine piece at ``x``."""
        x = as_point(x, self.dim)
        return self.gradients @ x + self.intercepts

    def __call__(self, x) -> float:
        return float(np.max(self.values(x)))

    def shifted(self, c: float) -> "MaxAffine":
        """The function ``x -> self(x) + c``."""
        return MaxAffine(self.gradients, self.intercepts + c)

    def scaled(self, t: float) -> "MaxAffine":
        if t < 0:
            raise InputError("scaling a convex function by a negative factor")
        return MaxAffine(self.gradients * t, self.intercepts * t)

    def same_as(self, other: "MaxAffine") -> bool:
        return (
            self.gradients.shape == other.gradients.shape
            and np.array_equal(self.gradients, other.gradients)
            and np.array_equal(self.intercepts, other.intercepts)
        )

    def __repr__(self):
        return f"MaxAffine(dim={self.dim}, pieces={self.n_pieces})"


@dataclass(frozen=True, eq=False)
class PointSet:
    """A finite list of points in R^dim, stored as a ``(k, dim)`` array."""

    dim: int
    points: np.ndarray

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise InputError(f"dim must be a positive integer, got {self.dim!r}")
        pts = np.array(self.points, dtype=float)
        if pts.size == 0:
            pts = pts.reshape(0, self.dim)
        if pts.ndim == 1 and self.dim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise InputError(f"points must have shape (k, {self.dim}), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InputError("points must be finite")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "points", _frozen(pts))

    @classmethod
    def lattice(cls, dim: int, lo: float, hi: float, per_dim: int) -> "PointSet":
        """Tensor lattice with ``per_dim`` evenly spaced values in ``[lo, hi]`` per axis."""
        if per_dim < 1:
            raise InputError("per_dim must be >= 1")
        if not lo <= hi:
            raise InputError("lattice needs lo <= hi")
        axis = np.linspace(lo, hi, per_dim)
        mesh = np.meshgrid(*[axis] * dim, indexing="ij")
        return cls(dim, np.stack([m.reshape(-1) for m in mesh], axis=1))

    def extended(self, extra) -> "PointSet":
        extra = np.asarray(extra, dtype=float).reshape(-1, self.dim)
        return PointSet(self.dim, np.vstack([self.points, extra]))

    def __len__(self):
        return self.points.shape[0]

    def __iter__(self):
        return iter(self.points)


def evaluate(f: MaxAffine, x) -> float:
    """Value of ``f`` at ``x``."""
    return f(x)


def active_set(f: MaxAffine, x, tol: float = ACTIVE_TOL) -> list[int]:
    """Indices of pieces within ``tol * max(1, |f(x)|)`` of the maximum at ``x``.

    Indices are zero-based.
    """
    if tol < 0:
        raise InputError("tol must be nonnegative")
    vals = f.values(x)
    top = float(np.max(vals))
    cut = top - tol * max(1.0, abs(top))
    return [int(i) for i in np.flatnonzero(vals >= cut)]


def validate_modulus(h: MaxAffine) -> MaxAffine:
    """Return ``h`` unchanged if ``h(0) = 0``, else raise :class:`ModulusError`."""
    value = float(np.max(h.intercepts))
    if value != 0.0:
        raise ModulusError(value)
    return h


# -- JSON -----------------------------------------------------------------


def _load_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{path}: expected a number, got {type(value).__name__}")
    out = float(value)
    if not math.isfinite(out):
        raise ParseError(f"{path}: non-finite number")
    return out


def _vector(value: Any, dim: int, path: str) -> list[float]:
    if not isinstance(value, list):
        raise ParseError(f"{path}: expected an array")
    if len(value) != dim:
        raise ParseError(f"{path}: expected {dim} entries, got {len(value)}")
    return [_number(v, f"{path}[{k}]") for k, v in enumerate(value)]


def _dim(doc: Any) -> int:
    if not isinstance(doc, dict):
        raise ParseError("$: expected an object")
    dim = doc.get("dim")
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise ParseError("$.dim: expected a positive integer")
    return dim


def function_from_doc(doc: Any) -> MaxAffine:
    dim = _dim(doc)
    pieces = doc.get("pieces")
    if not isinstance(pieces, list) or not pieces:
        raise ParseError("$.pieces: expected a nonempty array")
    extra = set(doc) - {"dim", "pieces"}
    if extra:
        raise ParseError(f"$: unexpected keys {sorted(extra)}")
    grads, icpts = [], []
    for k, piece in enumerate(pieces):
        path = f"$.pieces[{k}]"
        if not isinstance(piece, dict) or set(piece) != {"a", "b"}:
            raise ParseError(f"{path}: expected an object with keys 'a' and 'b'")
        grads.append(_vector(piece["a"], dim, f"{path}.a"))
        icpts.append(_number(piece["b"], f"{path}.b"))
    return MaxAffine(np.array(grads, dtype=float).reshape(len(pieces), dim), np.array(icpts))


def points_from_doc(doc: Any) -> PointSet:
    dim = _dim(doc)
    points = doc.get("points")
    if not isinstance(points, list):
        raise ParseError("$.points: expected an array")
    extra = set(doc) - {"dim", "points"}
    if extra:
        raise ParseError(f"$: unexpected keys {sorted(extra)}")
    rows = [_vector(p, dim, f"$.points[{k}]") for k, p in enumerate(points)]
    return PointSet(dim, np.array(rows, dtype=float).reshape(len(rows), dim))


def parse_function(text: str) -> MaxAffine:
    return function_from_doc(_load_json(text))


def parse_points(text: str) -> PointSet:
    return points_from_doc(_load_json(text))


def function_to_doc(f: MaxAffine) -> dict:
    return {
        "dim": f.dim,
        "pieces": [
            {"a": [float(v) for v in a], "b": float(b)}
            for a, b in zip(f.gradients, f.intercepts)
        ],
    }


def points_to_doc(p: PointSet) -> dict:
    return {"dim": p.dim, "points": [[float(v) for v in row] for row in p.points]}


def serialize_function(f: MaxAffine) -> str:
    # json emits repr() of floats, which is the shortest round-trip form
    return json.dumps(function_to_doc(f), separators=(",", ":"))


def serialize_points(p: PointSet) -> str:
    return json.dumps(points_to_doc(p), separators=(",", ":"))


def load_function(path) -> MaxAffine:
    with open(path, encoding="utf-8") as fh:
        return parse_function(fh.read())


def load_points(path) -> PointSet:
    with open(path, encoding="utf-8") as fh:
        return parse_points(fh.read())
