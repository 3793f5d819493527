"""Dense LU with partial pivoting, vectorized over a leading batch axis.

MNA systems here are tiny (a handful to ~20 unknowns) and solved at hundreds
of frequencies at once, so the elimination loop runs over the matrix order
while every step is a numpy operation across the whole frequency batch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class LUFactor:
    lu: np.ndarray  # (batch, n, n): unit-lower L below the diagonal, U on and above
    perm: np.ndarray  # (batch, n): row permutation, P @ A == L @ U
    row_scale: np.ndarray  # (batch, n) power-of-two equilibration
    col_scale: np.ndarray

    @property
    def pivots(self) -> np.ndarray:
        return np.abs(np.diagonal(self.lu, axis1=-2, axis2=-1))

    def pivot_ratio(self) -> np.ndarray:
        """max|pivot| / min|pivot| per batch entry (inf when a pivot is zero or not finite)."""
        p = self.pivots
        lo = p.min(axis=-1)
        ok = (lo > 0) & np.isfinite(p).all(axis=-1)
        return np.where(ok, p.max(axis=-1) / np.where(ok, lo, 1.0), np.inf)


def _pow2_scale(mag: np.ndarray) -> np.ndarray:
    # Exact scaling: multiply by 2**-e so no rounding is introduced.
    safe = np.where(mag > 0, mag, 1.0)
    _, e = np.frexp(safe)
    # clipped so subnormal rows cannot push the scale to inf
    return np.ldexp(1.0, np.clip(-e, -1022, 1023))


def lu_factor(a: np.ndarray) -> LUFactor:
    """Factor ``a`` of shape (n, n) or (batch, n, n)."""
    a = np.asarray(a, dtype=complex)
    single = a.ndim == 2
    if single:
        a = a[None]
    batch, n, m = a.shape
    if n != m:
        raise ValueError(f"matrix must be square, got {n}x{m}")

    r = _pow2_scale(np.abs(a).max(axis=2))
    a = a * r[:, :, None]
    c = _pow2_scale(np.abs(a).max(axis=1))
    lu = a * c[:, None, :]

    perm = np.tile(np.arange(n), (batch, 1))
    rows = np.arange(batch)
    for k in range(n):
        p = k + np.argmax(np.abs(lu[:, k:, k]), axis=1)
        swap = p != k
        if swap.any():
            idx = rows[swap]
            pk = p[swap]
            tmp = lu[idx, k, :].copy()
            lu[idx, k, :] = lu[idx, pk, :]
            lu[idx, pk, :] = tmp
            tp = perm[idx, k].copy()
            perm[idx, k] = perm[idx, pk]
            perm[idx, pk] = tp
        piv = lu[:, k, k]
        nz = piv != 0
        mult = np.zeros((batch, n - k - 1), dtype=complex)
        mult[nz] = lu[nz, k + 1 :, k] / piv[nz, None]
        lu[:, k + 1 :, k] = mult
        lu[:, k + 1 :, k + 1 :] -= mult[:, :, None] * lu[:, k, None, k + 1 :]

    return LUFactor(lu, perm, r, c)


def lu_solve(f: LUFactor, b: np.ndarray) -> np.ndarray:
    """Solve A x = b for every batch entry. ``b`` is (n,) or (batch, n)."""
    lu = f.lu
    batch, n, _ = lu.shape
    b = np.broadcast_to(np.asarray(b, dtype=complex), (batch, n))
    rows = np.arange(batch)[:, None]
    y = (b * f.row_scale)[rows, f.perm]
    for i in range(n):
        y[:, i] -= np.einsum("bj,bj->b", lu[:, i, :i], y[:, :i])
    x = y
    for i in range(n - 1, -1, -1):
        x[:, i] = (x[:, i] - np.einsum("bj,bj->b", lu[:, i, i + 1 :], x[:, i + 1 :])) / lu[:, i, i]
    return x * f.col_scale


def refine(a: np.ndarray, f: LUFactor, b: np.ndarray, x: np.ndarray, steps: int = 2) -> np.ndarray:
    """Mixed-precision iterative refinement.

    Residuals are formed in extended precision (``clongdouble``) and the
    returned solution stays in extended precision, so quantities that cancel
    heavily downstream (sums of large, nearly opposite node voltages) keep
    their accuracy. Falls back to plain double where longdouble is double.
    """
    a_ext = np.asarray(a).astype(np.clongdouble)
    if a_ext.ndim == 2:
        a_ext = a_ext[None]
    b_ext = np.broadcast_to(np.asarray(b).astype(np.clongdouble), x.shape)
    x_ext = x.astype(np.clongdouble)
    for _ in range(steps):
        r = b_ext - np.einsum("bij,bj->bi", a_ext, x_ext)
        x_ext = x_ext + lu_solve(f, r.astype(complex))
    return x_ext


def solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    f = lu_factor(a)
    x = lu_solve(f, b)
    return x[0] if a.ndim == 2 else x
