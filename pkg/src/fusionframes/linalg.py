"""Self-contained dense real linear algebra.

Factorizations, spectra, pseudo-inverses and the positive-semidefinite
calculus used by every other module.  The scalar field is the reals, so
adjoint means transpose throughout.

Algorithms, sized for desk-scale matrices (n <= 64 or so):

* symmetric eigenproblem: cyclic Jacobi sweeps until the off-diagonal
  Frobenius norm falls below 1e-12 times the matrix norm (at most 100
  sweeps),
* SVD: one-sided Jacobi on the columns (applied to the transpose when that
  is the thin side), left vectors recovered from the orthogonalized columns,
* rank decisions: singular values below ``tol`` times the largest one are
  treated as zero; the default ``tol`` is 1e-10 and every operation accepts
  an explicit override.

All functions are pure: arguments are never mutated and results are fresh
arrays, safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InputError, NotPSDError

DEFAULT_TOL = 1e-10
_EIG_SWEEP_TOL = 1e-12
_SVD_PAIR_TOL = 1e-14
_MAX_SWEEPS = 100
_SYM_TOL = 1e-8


def as_matrix(obj, name: str = "matrix") -> np.ndarray:
    """Validate ``obj`` as a finite real matrix and return it as float64."""
    try:
        m = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name}: not interpretable as a real matrix: {exc}") from None
    if m.ndim != 2:
        raise InputError(f"{name}: expected a 2-D matrix, got ndim={m.ndim}")
    if m.size and not np.all(np.isfinite(m)):
        raise InputError(f"{name}: entries must be finite (no NaN/Inf)")
    return m


def as_vector(obj, name: str = "vector") -> np.ndarray:
    """Validate ``obj`` as a finite real vector and return it as float64."""
    try:
        v = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name}: not interpretable as a real vector: {exc}") from None
    if v.ndim != 1:
        raise InputError(f"{name}: expected a 1-D vector, got ndim={v.ndim}")
    if v.size and not np.all(np.isfinite(v)):
        raise InputError(f"{name}: entries must be finite (no NaN/Inf)")
    return v


def require_square(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    if m.shape[0] != m.shape[1]:
        raise InputError(f"{name}: expected square, got {m.shape[0]}x{m.shape[1]}")
    return m


# ---------------------------------------------------------------------------
# JSON wire format


def matrix_to_json(m: np.ndarray) -> dict:
    """Matrix wire object: {"rows": r, "cols": c, "data": [row-major]}."""
    m = np.asarray(m, dtype=float)
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]), "data": [float(x) for x in m.ravel()]}


def matrix_from_json(obj, name: str = "matrix", min_cols: int = 1) -> np.ndarray:
    """Parse the matrix wire object, rejecting wrong-length data and
    non-finite values.  ``min_cols=0`` admits empty bases (zero subspaces)."""
    if not isinstance(obj, dict):
        raise InputError(f"{name}: expected an object with rows/cols/data")
    for key in ("rows", "cols", "data"):
        if key not in obj:
            raise InputError(f"{name}: missing field '{key}'")
    rows, cols, data = obj["rows"], obj["cols"], obj["data"]
    if not isinstance(rows, int) or isinstance(rows, bool) or rows < 1:
        raise InputError(f"{name}.rows: expected a positive integer, got {rows!r}")
    if not isinstance(cols, int) or isinstance(cols, bool) or cols < min_cols:
        raise InputError(f"{name}.cols: expected an integer >= {min_cols}, got {cols!r}")
    if not isinstance(data, list):
        raise InputError(f"{name}.data: expected a list of reals")
    if len(data) != rows * cols:
        raise InputError(
            f"{name}.data: expected {rows * cols} entries for {rows}x{cols}, got {len(data)}"
        )
    out = np.empty(rows * cols, dtype=float)
    for i, x in enumerate(data):
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
            raise InputError(f"{name}.data[{i}]: expected a finite real, got {x!r}")
        out[i] = float(x)
    return out.reshape(rows, cols)


# ---------------------------------------------------------------------------
# Orthonormalization


def qr_orthonormalize(m, tol: float = DEFAULT_TOL):
    """Orthonormal basis of the column space of ``m``.

    Pivoted modified Gram-Schmidt with one reorthogonalization pass.
    Columns whose residual after projection drops below ``tol`` times the
    largest column norm of ``m`` are dropped.  Returns (Q, rank) where Q is
    ``m.shape[0] x rank`` with Q.T @ Q = I.
    """
    m = as_matrix(m)
    if tol <= 0:
        raise InputError("tol must be positive")
    if m.shape[1] == 0:
        return np.zeros((m.shape[0], 0)), 0
    work = m.copy()
    norms = np.sqrt((work * work).sum(axis=0))
    scale = norms.max()
    if scale == 0.0:
        return np.zeros((m.shape[0], 0)), 0
    cols = []
    max_rank = min(m.shape)
    while len(cols) < max_rank:
        norms = np.sqrt((work * work).sum(axis=0))
        j = int(np.argmax(norms))
        if norms[j] <= tol * scale:
            break
        q = work[:, j] / norms[j]
        if cols:
            basis = np.column_stack(cols)
            q = q - basis @ (basis.T @ q)  # second pass for orthogonality
            nq = np.linalg.norm(q)
            if nq <= tol:
                work[:, j] = 0.0
                continue
            q = q / nq
        cols.append(q)
        work -= np.outer(q, q @ work)
    if not cols:
        return np.zeros((m.shape[0], 0)), 0
    q = np.column_stack(cols)
    return q, q.shape[1]


# ---------------------------------------------------------------------------
# Symmetric eigenproblem


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition of a symmetric matrix.

    ``eigenvalues`` ascending; ``eigenvectors`` has unit-norm, pairwise
    orthogonal columns in matching order, so S = V diag(w) V.T.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def smallest(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def largest(self) -> float:
        return float(self.eigenvalues[-1])

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def sym_eig(s, symtol: float = _SYM_TOL) -> Spectrum:
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi.

    Raises InputError when ``s`` is not symmetric within ``symtol`` relative
    to its norm.
    """
    s = require_square(as_matrix(s, "sym_eig input"), "sym_eig input")
    scale = np.linalg.norm(s)
    if scale > 0 and np.linalg.norm(s - s.T) > symtol * scale:
        raise InputError("sym_eig: input is not symmetric within tolerance")
    a = 0.5 * (s + s.T)
    w, v = _kernels.jacobi_eigh(np.ascontiguousarray(a), _EIG_SWEEP_TOL, _MAX_SWEEPS)
    order = np.argsort(w, kind="stable")
    return Spectrum(eigenvalues=w[order], eigenvectors=np.ascontiguousarray(v[:, order]))


# ---------------------------------------------------------------------------
# SVD and friends


def svd(m):
    """Compact SVD: returns (U, s, Vt) with s descending and
    U (m x k), Vt (k x n) for k = min(m, n).  m = U @ diag(s) @ Vt."""
    m = as_matrix(m, "svd input")
    rows, cols = m.shape
    if rows == 0 or cols == 0:
        k = min(rows, cols)
        return np.zeros((rows, k)), np.zeros(k), np.zeros((k, cols))
    if rows >= cols:
        b = np.ascontiguousarray(m.copy())
        v = np.eye(cols)
        _kernels.onesided_jacobi(b, v, _SVD_PAIR_TOL, _MAX_SWEEPS)
        s = np.sqrt((b * b).sum(axis=0))
        u = np.zeros((rows, cols))
        nz = s > 0
        u[:, nz] = b[:, nz] / s[nz]
        order = np.argsort(-s, kind="stable")
        return u[:, order], s[order], v[:, order].T
    u2, s2, vt2 = svd(m.T)
    return vt2.T, s2, u2.T


def singular_values(m) -> np.ndarray:
    return svd(m)[1]


def operator_norm(m) -> float:
    """Spectral norm (largest singular value); 0 for empty matrices."""
    s = singular_values(m)
    return float(s[0]) if s.size else 0.0


def matrix_rank(m, tol: float = DEFAULT_TOL) -> int:
    s = singular_values(m)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def pseudo_inverse(m, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via the Jacobi SVD.

    Singular values below ``tol`` times the largest are treated as zero.
    The result satisfies the four Penrose identities; its kernel is the
    orthogonal complement of the column space of ``m`` and its range is the
    orthogonal complement of the kernel of ``m``.
    """
    m = as_matrix(m, "pseudo_inverse input")
    if tol <= 0:
        raise InputError("tol must be positive")
    u, s, vt = svd(m)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((m.shape[1], m.shape[0]))
    inv = np.where(s > tol * s[0], 1.0 / np.where(s > 0, s, 1.0), 0.0)
    return (vt.T * inv) @ u.T


def sqrt_psd(s, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Symmetric PSD square root R with R @ R = s.

    Eigenvalues within tol * ||s|| of zero are flattened to exactly zero
    before the root: the square root would otherwise amplify rank-cut
    noise (lambda ~ eps) into phantom directions of size sqrt(eps) with
    meaningless eigenvectors.  Anything below -tol * ||s|| raises
    NotPSDError.
    """
    spec = sym_eig(s)
    scale = max(abs(spec.smallest), abs(spec.largest))
    if spec.smallest < -tol * max(scale, 1e-300):
        raise NotPSDError(
            f"matrix is not PSD: smallest eigenvalue {spec.smallest:.3e} "
            f"(tolerance {-tol * scale:.3e})"
        )
    w = np.where(spec.eigenvalues > tol * scale, spec.eigenvalues, 0.0)
    w = np.sqrt(w)
    v = spec.eigenvectors
    r = (v * w) @ v.T
    return 0.5 * (r + r.T)


def psd_leq(p, q, tol: float) -> bool:
    """Loewner-order test: True iff the smallest eigenvalue of q - p is at
    least -tol.  Both matrices must be symmetric and of equal size."""
    p = require_square(as_matrix(p, "psd_leq lhs"), "psd_leq lhs")
    q = require_square(as_matrix(q, "psd_leq rhs"), "psd_leq rhs")
    if p.shape != q.shape:
        raise InputError(f"psd_leq: dimension mismatch {p.shape} vs {q.shape}")
    return sym_eig(q - p).smallest >= -tol
