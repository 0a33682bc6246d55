"""Small dense linear algebra: cyclic Jacobi eigensolver and elimination kernels."""

from __future__ import annotations

import numpy as np


def jacobi_eigh(a, tol: float = 1e-12, max_sweeps: int = 60):
    """Eigen-decomposition of a stack of real symmetric matrices by cyclic Jacobi.

    ``a`` has shape (..., n, n).  Sweeps rotate every (p, q) pair in row order
    until the off-diagonal Frobenius norm of every matrix in the stack is at
    most ``tol * max(1, ||a||_F)``.  Returns eigenvalues in ascending order and
    the matching eigenvectors as columns.
    """
    a = np.array(a, dtype=float, copy=True)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError("jacobi_eigh needs square matrices")
    batch_shape = a.shape[:-2]
    n = a.shape[-1]
    a = a.reshape((-1, n, n))
    a = 0.5 * (a + a.transpose(0, 2, 1))
    v = np.broadcast_to(np.eye(n), a.shape).copy()
    scale = np.maximum(1.0, np.linalg.norm(a, axis=(1, 2)))
    off_mask = ~np.eye(n, dtype=bool)

    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(a[:, off_mask] ** 2, axis=1))
        if np.all(off <= tol * scale):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                active = apq != 0.0
                if not np.any(active):
                    continue
                theta = np.zeros_like(apq)
                with np.errstate(over="ignore"):
                    theta[active] = (a[active, q, q] - a[active, p, p]) / (2.0 * apq[active])
                sign = np.where(theta >= 0.0, 1.0, -1.0)
                t = np.where(active, sign / (np.abs(theta) + np.hypot(theta, 1.0)), 0.0)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                cc = c[:, None]
                ss = s[:, None]
                ap = a[:, :, p].copy()
                aq = a[:, :, q]
                a[:, :, p] = cc * ap - ss * aq
                a[:, :, q] = ss * ap + cc * aq
                rp = a[:, p, :].copy()
                rq = a[:, q, :]
                a[:, p, :] = cc * rp - ss * rq
                a[:, q, :] = ss * rp + cc * rq
                a[:, p, q] = 0.0
                a[:, q, p] = 0.0
                vp = v[:, :, p].copy()
                vq = v[:, :, q]
                v[:, :, p] = cc * vp - ss * vq
                v[:, :, q] = ss * vp + cc * vq
    else:
        raise RuntimeError("Jacobi iteration did not converge")

    w = np.diagonal(a, axis1=1, axis2=2).copy()
    order = np.argsort(w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    return w.reshape(batch_shape + (n,)), v.reshape(batch_shape + (n, n))


def hermitian_to_real(g):
    """Real symmetric embedding [[Re, -Im], [Im, Re]] of a (stack of) Hermitian matrices."""
    g = np.asarray(g)
    re, im = g.real, g.imag
    top = np.concatenate([re, -im], axis=-1)
    bottom = np.concatenate([im, re], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def rref(a, tol: float = 1e-10):
    """Reduced row echelon form by Gauss-Jordan with partial pivoting.

    Returns the reduced matrix and the list of pivot columns.  A column is
    treated as pivot-free when its best remaining entry is at most
    ``tol * max(1, max|a|)``.
    """
    r = np.array(a, dtype=float, copy=True)
    rows, cols = r.shape
    thresh = tol * max(1.0, float(np.max(np.abs(r), initial=0.0)))
    pivots = []
    row = 0
    for col in range(cols):
        if row >= rows:
            break
        k = row + int(np.argmax(np.abs(r[row:, col])))
        if abs(r[k, col]) <= thresh:
            r[row:, col] = 0.0
            continue
        if k != row:
            r[[row, k]] = r[[k, row]]
        r[row] /= r[row, col]
        others = np.arange(rows) != row
        r[others] -= np.outer(r[others, col], r[row])
        pivots.append(col)
        row += 1
    return r, pivots


def kernel_basis(a, tol: float = 1e-10) -> np.ndarray:
    """Basis (as columns, shape N x d) of the null space of a real matrix."""
    a = np.asarray(a, dtype=float)
    n = a.shape[1]
    r, pivots = rref(a, tol)
    free = [j for j in range(n) if j not in pivots]
    basis = np.zeros((n, len(free)))
    for k, f in enumerate(free):
        basis[f, k] = 1.0
        for i, pcol in enumerate(pivots):
            basis[pcol, k] = -r[i, f]
    return basis
