#  Licensed to the Apache Software Foundation (ASF) under one or more
#  contributor license agreements.  See the NOTICE file distributed with
#  this work for additional information regarding copyright ownership.
#  The ASF licenses this file to You under the Apache License, Version 2.0
#  (the "License"); you may not use this file except in compliance with
#  the License.  You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
#  Unless required by applicable law or agreed to in writing, software
#  distributed under the License is distributed on an "AS IS" BASIS,
#  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#  See the License for the specific language governing permissions and
#  limitations under the License.

"""Symmetric positive definite matrices held through their Cholesky factor.

Sigma inverse is never formed: every application of it goes through a
triangular solve against the cached lower factor.
"""

from typing import Sequence, Union

import numpy as np
from scipy.linalg import LinAlgError, cholesky, solve_triangular

from normal_ratio.utils.exceptions import (
    DimensionMismatchError,
    NonFiniteInputError,
    NotPositiveDefiniteError,
    NotSymmetricError,
)

SYMMETRY_RTOL = 1e-12

ArrayLike = Union[np.ndarray, Sequence[float], Sequence[Sequence[float]]]


class SpdMatrix:
    """Immutable SPD matrix with its lower Cholesky factor."""

    def __init__(self, entries: np.ndarray, chol: np.ndarray):
        self.__entries = entries
        self.__chol = chol
        self.__entries.setflags(write=False)
        self.__chol.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.__entries.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self.__entries

    @property
    def chol(self) -> np.ndarray:
        return self.__chol

    def __repr__(self):
        return f"SpdMatrix(dim={self.dim}, entries={self.__entries.tolist()})"


def factorize(matrix: ArrayLike) -> SpdMatrix:
    """Validate, symmetrize and factorize a covariance matrix.

    Raises NotSymmetricError when |m_ij - m_ji| exceeds 1e-12 * max(1, |m_ij|),
    NotPositiveDefiniteError on a nonpositive pivot.
    """
    entries = np.array(matrix, dtype=np.float64)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.shape[0] == 0:
        raise DimensionMismatchError(f"expected a non-empty square matrix, got shape {entries.shape}")
    if not np.all(np.isfinite(entries)):
        raise NonFiniteInputError("matrix has non-finite entries")

    gap = np.abs(entries - entries.T)
    allowed = SYMMETRY_RTOL * np.maximum(1.0, np.abs(entries))
    if np.any(gap > allowed):
        i, j = np.unravel_index(np.argmax(gap - allowed), gap.shape)
        raise NotSymmetricError(
            f"matrix is not symmetric: entry ({i}, {j}) = {entries[i, j]!r} vs ({j}, {i}) = {entries[j, i]!r}"
        )
    # exact symmetric inputs are kept bit-for-bit
    if np.any(gap > 0):
        entries = 0.5 * (entries + entries.T)

    try:
        chol = cholesky(entries, lower=True, check_finite=False)
    except LinAlgError as e:
        raise NotPositiveDefiniteError(f"matrix is not positive definite: {e}") from e
    if np.any(np.diag(chol) <= 0.0) or not np.all(np.isfinite(chol)):
        raise NotPositiveDefiniteError("matrix is not positive definite: nonpositive pivot")
    return SpdMatrix(entries, chol)


def _as_vector(m: SpdMatrix, v: ArrayLike, name: str = "v") -> np.ndarray:
    vec = np.asarray(v, dtype=np.float64)
    if vec.shape != (m.dim,):
        raise DimensionMismatchError(f"{name} has shape {vec.shape}, expected ({m.dim},)")
    return vec


def whiten(m: SpdMatrix, v: ArrayLike) -> np.ndarray:
    """Return L^{-1} v, so that v' Sigma^{-1} v = |L^{-1} v|^2."""
    vec = _as_vector(m, v)
    return solve_triangular(m.chol, vec, lower=True, check_finite=False)


def quad_form(m: SpdMatrix, v: ArrayLike) -> float:
    """v' Sigma^{-1} v."""
    z = whiten(m, v)
    return float(np.dot(z, z))


def bilinear_form(m: SpdMatrix, u: ArrayLike, v: ArrayLike) -> float:
    """u' Sigma^{-1} v; symmetric in (u, v) and equal to quad_form when u is v."""
    zu = whiten(m, _as_vector(m, u, "u"))
    zv = whiten(m, _as_vector(m, v, "v"))
    return float(np.dot(zu, zv))


def log_det(m: SpdMatrix) -> float:
    """ln|Sigma| = 2 * sum(ln diag(L))."""
    return float(2.0 * np.sum(np.log(np.diag(m.chol))))
