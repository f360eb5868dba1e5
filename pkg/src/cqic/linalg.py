"""Dense linear algebra for small Hermitian operators.

The eigensolver is a cyclic Jacobi iteration with a fixed sweep order
instead of a LAPACK call: every matrix in this package is tiny (a few
dozen rows, a few hundred in the tilting experiments), and Jacobi gives
bit-identical results across BLAS builds, which the reproducibility
contract of the CLI relies on.
"""

from __future__ import annotations

import numpy as np

from .config import active_tolerances
from .errors import DimensionMismatch, NotHermitian, NumericalFailure

_MAX_SWEEPS = 100


def _as_matrix(m) -> np.ndarray:
    arr = m.mat if hasattr(m, "mat") else m
    a = np.asarray(arr, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {a.shape}")
    return a


def eig_hermitian(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(w, v)`` with eigenvalues ``w`` real and descending and
    ``v`` unitary, columns matching ``w``, so that ``m = v @ diag(w) @ v†``.
    Column phases are canonicalized (largest-magnitude entry real
    positive) so repeated runs agree exactly.
    """
    tol = active_tolerances()
    a = _as_matrix(m).copy()
    n = a.shape[0]
    scale = max(1.0, float(np.abs(a).max()))
    if float(np.abs(a - a.conj().T).max()) > tol.herm * scale:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    a = (a + a.conj().T) / 2.0
    v = np.eye(n, dtype=complex)

    for _ in range(_MAX_SWEEPS):
        offm = a.copy()
        np.fill_diagonal(offm, 0.0)
        off = float(np.linalg.norm(offm))
        if off <= 1e-14 * scale * n:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= 1e-18 * scale:
                    continue
                tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
                sgn = 1.0 if tau >= 0.0 else -1.0
                t = sgn / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                ph = apq / r
                # A <- J† A J with J the (p,q)-plane rotation
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - (s * ph.conjugate()) * col_q
                a[:, q] = (s * ph) * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - (s * ph) * row_q
                a[q, :] = (s * ph.conjugate()) * row_p + c * row_q
                vcol_p = v[:, p].copy()
                vcol_q = v[:, q].copy()
                v[:, p] = c * vcol_p - (s * ph.conjugate()) * vcol_q
                v[:, q] = (s * ph) * vcol_p + c * vcol_q
    else:
        raise NumericalFailure("Jacobi sweep did not converge")

    w = np.diag(a).real.copy()
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = v[:, order]
    for j in range(n):
        k = int(np.argmax(np.abs(v[:, j])))
        piv = v[k, j]
        if abs(piv) > 0.0:
            v[:, j] *= piv.conjugate() / abs(piv)
    return w, v


def tensor(a, b) -> np.ndarray:
    """Kronecker product; index of the first factor varies slowest."""
    return np.kron(_as_matrix(a), _as_matrix(b))


def tensor_all(factors) -> np.ndarray:
    out = _as_matrix(factors[0])
    for f in factors[1:]:
        out = np.kron(out, _as_matrix(f))
    return out


def partial_trace(rho, dims, keep):
    """Trace out the factors not listed in ``keep``.

    ``dims`` are the tensor-factor dimensions in slowest-varying-first
    order; ``keep`` is a set of factor indices.  The relative order of
    kept factors is preserved.  Accepts a raw matrix or anything with a
    ``.mat`` attribute, and returns the same kind.
    """
    arr = _as_matrix(rho)
    dims = [int(d) for d in dims]
    keep_sorted = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep_sorted):
        raise DimensionMismatch("keep indices outside factor range")
    if int(np.prod(dims)) != arr.shape[0]:
        raise DimensionMismatch(
            f"factor dims {dims} do not match operator dim {arr.shape[0]}")
    traced = [i for i in range(len(dims)) if i not in keep_sorted]
    t = arr.reshape(tuple(dims) + tuple(dims))
    cur = list(range(len(dims)))
    for factor in sorted(traced, reverse=True):
        pos = cur.index(factor)
        t = np.trace(t, axis1=pos, axis2=pos + len(cur))
        cur.remove(factor)
    d_keep = int(np.prod([dims[i] for i in keep_sorted])) if keep_sorted else 1
    out = np.ascontiguousarray(t.reshape(d_keep, d_keep))
    if hasattr(rho, "mat"):
        from .states import DensityOperator
        return DensityOperator(out)
    return out


def singular_values(a) -> np.ndarray:
    """Singular values (descending) via the Hermitian eigenproblem of a†a."""
    arr = _as_matrix(a)
    w, _ = eig_hermitian(arr.conj().T @ arr)
    return np.sqrt(np.clip(w, 0.0, None))


def trace_norm(a) -> float:
    """Sum of singular values."""
    return float(np.sum(singular_values(a)))


def operator_norm(a) -> float:
    """Largest singular value."""
    sv = singular_values(a)
    return float(sv[0]) if sv.size else 0.0
