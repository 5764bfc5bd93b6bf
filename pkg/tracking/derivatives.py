"""Sparse Jacobians by colored complex-step differentiation.

Residual and distortion evaluations in this package accept complex input, so
one complex evaluation per column group gives exact directional derivatives
(no subtractive cancellation). Columns that never share a nonzero row are
grouped by a greedy coloring of the sparsity pattern.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import sparse

COMPLEX_STEP = 1e-20


def csafe_abs(x: np.ndarray) -> np.ndarray:
    """|x| for real parts, analytic in the imaginary perturbation."""
    return np.where(np.real(x) < 0, -x, x)


def csafe_maximum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.where(np.real(a) >= np.real(b), a, b)


def csafe_minimum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.where(np.real(a) <= np.real(b), a, b)


def csafe_max(x: np.ndarray, axis: int = -1) -> np.ndarray:
    index = np.expand_dims(np.argmax(np.real(x), axis=axis), axis)
    return np.take_along_axis(x, index, axis=axis).squeeze(axis)


def greedy_coloring(pattern: sparse.spmatrix) -> np.ndarray:
    """Color columns so that columns of one color have disjoint row supports."""
    pattern = sparse.csc_matrix(pattern, dtype=float)
    pattern.data[:] = 1.0
    conflict = (pattern.T @ pattern).tocsr()
    colors = np.full(conflict.shape[0], -1, dtype=np.int64)
    for j in range(conflict.shape[0]):
        neighbours = colors[conflict.indices[conflict.indptr[j]:conflict.indptr[j + 1]]]
        taken = set(neighbours[neighbours >= 0].tolist())
        color = 0
        while color in taken:
            color += 1
        colors[j] = color
    return colors


@dataclass(frozen=True, eq=False)
class ColoredPattern:
    pattern: sparse.coo_matrix
    colors: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.pattern.shape

    @property
    def n_colors(self) -> int:
        return int(self.colors.max()) + 1 if self.colors.size else 0

    @classmethod
    def from_pattern(cls, pattern: sparse.spmatrix) -> 'ColoredPattern':
        pattern = sparse.coo_matrix(pattern, dtype=float)
        return cls(pattern, greedy_coloring(pattern))

    @classmethod
    def from_blocks(cls, block_pattern: sparse.spmatrix, row_block: int, col_block: int) -> 'ColoredPattern':
        """Pattern of dense (row_block x col_block) blocks placed on the nonzeros of `block_pattern`.

        The coloring is done on the block level; column j of block column b gets
        color block_color[b] * col_block + j.
        """
        block_pattern = sparse.csr_matrix(block_pattern, dtype=float)
        block_pattern.data[:] = 1.0
        block_colors = greedy_coloring(block_pattern)
        pattern = sparse.kron(block_pattern, np.ones((row_block, col_block)), format='coo')
        colors = (block_colors[:, None] * col_block + np.arange(col_block)[None, :]).ravel()
        return cls(pattern, colors)


def complex_step_jacobian(
    fun: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    colored: ColoredPattern,
    step: float = COMPLEX_STEP,
) -> sparse.csr_matrix:
    """d fun / d x at x0 on the given sparsity pattern, one complex evaluation per color."""
    x0 = np.asarray(x0, dtype=float)
    rows, cols = colored.pattern.row, colored.pattern.col
    values = np.zeros(rows.size)
    for color in range(colored.n_colors):
        group = colored.colors == color
        x = x0.astype(complex)
        x[group] += 1j * step
        derivative = np.imag(fun(x)) / step
        hit = group[cols]
        values[hit] = derivative[rows[hit]]
    return sparse.csr_matrix((values, (rows, cols)), shape=colored.shape)


def directional_derivatives(
    fun: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    directions: np.ndarray,
    step: float = COMPLEX_STEP,
) -> np.ndarray:
    """Columns d fun(x0 + t v_j)/dt at t = 0 for every column v_j of `directions`."""
    x0 = np.asarray(x0, dtype=float)
    directions = np.asarray(directions, dtype=float).reshape(x0.size, -1)
    columns = [np.imag(fun(x0 + 1j * step * v)) / step for v in directions.T]
    if not columns:
        return np.zeros((np.asarray(fun(x0)).size, 0))
    return np.column_stack(columns)
