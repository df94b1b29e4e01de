"""Pfaffians of complex skew-symmetric matrices."""

from __future__ import annotations

import numpy as np

from .errors import DomainError


class SkewMatrix:
    """Dense skew-symmetric matrix built from its strict upper triangle.

    The lower triangle of the input is ignored, so antisymmetry holds
    exactly.
    """

    def __init__(self, entries):
        a = np.asarray(entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError("skew matrix must be square")
        if a.shape[0] % 2:
            raise DomainError("Pfaffian needs even dimension")
        if a.shape[0] == 0:
            raise DomainError("empty matrix")
        up = np.triu(a, 1)
        self.entries = up - up.T

    @classmethod
    def from_upper(cls, values, n):
        """Build from the row-major strict upper triangle ``(a12, a13, ...)``."""
        a = np.zeros((n, n), dtype=complex)
        a[np.triu_indices(n, 1)] = values
        return cls(a)

    @property
    def dimension(self):
        return self.entries.shape[0]


def _pf_recursive(a):
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0j
    if n == 2:
        return a[0, 1]
    total = 0j
    rest = np.arange(1, n)
    for j in range(1, n):
        if a[0, j] == 0:
            continue
        keep = rest[rest != j]
        sub = a[np.ix_(keep, keep)]
        sign = 1.0 if j % 2 == 1 else -1.0
        total += sign * a[0, j] * _pf_recursive(sub)
    return total


def _pf_parlett_reid(a):
    a = a.copy()
    n = a.shape[0]
    pf = 1.0 + 0j
    for k in range(0, n - 1, 2):
        # pivot the largest entry of column k below the diagonal into row k+1
        p = k + 1 + int(np.argmax(np.abs(a[k + 1:, k])))
        if p != k + 1:
            a[[k + 1, p], :] = a[[p, k + 1], :]
            a[:, [k + 1, p]] = a[:, [p, k + 1]]
            pf = -pf
        piv = a[k + 1, k]
        if abs(piv) <= 1e-300:
            return 0.0 + 0j
        pf *= a[k, k + 1]
        if k + 2 < n:
            tau = a[k, k + 2:] / a[k, k + 1]
            # rank-2 skew update of the trailing block
            u = a[k + 2:, k + 1]
            a[k + 2:, k + 2:] += np.outer(tau, u) - np.outer(u, tau)
    return pf


def pfaffian(A, algorithm="parlett_reid"):
    """Pfaffian of a skew-symmetric matrix.

    Parameters
    ----------
    A : SkewMatrix or array_like
    algorithm : {"parlett_reid", "recursive"}
        ``recursive`` expands along the first row and is meant as an oracle
        for dimension <= 12.
    """
    if not isinstance(A, SkewMatrix):
        A = SkewMatrix(A)
    a = A.entries
    if algorithm == "recursive":
        if A.dimension > 12:
            raise DomainError("recursive expansion limited to dimension <= 12")
        return complex(_pf_recursive(a))
    if algorithm == "parlett_reid":
        return complex(_pf_parlett_reid(a))
    raise DomainError(f"unknown algorithm {algorithm!r}")
