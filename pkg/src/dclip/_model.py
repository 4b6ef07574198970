"""Incremental assembly of LpProblem instances from variable blocks."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .lp import LpProblem, LpSolution, solve

# An affine image ``mat @ z[idx] + offset``; idx may be empty.
Image = tuple[np.ndarray, np.ndarray, np.ndarray]


class Model:
    def __init__(self):
        self.n = 0
        self._bounds: list[tuple[Optional[float], Optional[float]]] = []
        self._eq: list[tuple[list[tuple[np.ndarray, np.ndarray]], np.ndarray]] = []
        self._ub: list[tuple[list[tuple[np.ndarray, np.ndarray]], np.ndarray]] = []

    def variables(self, k: int, lo: Optional[float] = 0.0, hi: Optional[float] = None) -> np.ndarray:
        idx = np.arange(self.n, self.n + k)
        self.n += k
        self._bounds.extend([(lo, hi)] * k)
        return idx

    def eq(self, blocks, rhs) -> None:
        """Rows ``sum(mat @ z[idx] for idx, mat in blocks) == rhs``."""
        self._eq.append((blocks, np.atleast_1d(np.asarray(rhs, dtype=float))))

    def ub(self, blocks, rhs) -> None:
        self._ub.append((blocks, np.atleast_1d(np.asarray(rhs, dtype=float))))

    def image_eq(self, images: list[tuple[float, Image]], rhs, tol: float = 0.0) -> None:
        """Constrain ``sum(sign * image) == rhs`` (or within ``tol`` per coordinate)."""
        blocks = []
        const = np.asarray(rhs, dtype=float).copy()
        for sign, (idx, mat, offset) in images:
            if idx.size:
                blocks.append((idx, sign * mat))
            const = const - sign * offset
        if not blocks:
            return
        if tol > 0:
            self.ub(blocks, const + tol)
            self.ub([(i, -m) for i, m in blocks], -const + tol)
        else:
            self.eq(blocks, const)

    @staticmethod
    def _dense(rows, n):
        if not rows:
            return None, None
        total = sum(r.shape[0] for _, r in rows)
        A = np.zeros((total, n))
        b = np.empty(total)
        k = 0
        for blocks, rhs in rows:
            h = rhs.shape[0]
            for idx, mat in blocks:
                A[k:k + h, idx] += np.asarray(mat).reshape(h, idx.size)
            b[k:k + h] = rhs
            k += h
        return A, b

    def problem(self, cost: Optional[np.ndarray] = None) -> LpProblem:
        c = np.zeros(self.n) if cost is None else cost
        A_eq, b_eq = self._dense(self._eq, self.n)
        A_ub, b_ub = self._dense(self._ub, self.n)
        return LpProblem(c, A_eq, b_eq, A_ub, b_ub, list(self._bounds))

    def minimize(self, terms: list[tuple[np.ndarray, np.ndarray]] = ()) -> LpSolution:
        cost = np.zeros(self.n)
        for idx, coef in terms:
            cost[idx] += coef
        return solve(self.problem(cost))


def image_value(image: Image, z: np.ndarray) -> np.ndarray:
    idx, mat, offset = image
    if idx.size == 0:
        return offset.copy()
    return mat @ z[idx] + offset
