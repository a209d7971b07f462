"""Numeric kernels: Jacobi eigensolver, one-sided Jacobi SVD, xorshift64* fills.

The functions here are written as plain Python loops over numpy arrays and
are JIT-compiled with numba when it is importable.  Without numba the same
source runs interpreted (slow but identical results); a test pins the two
modes to bit-identical outputs for the PRNG fills.

All kernels are pure: inputs are never aliased to outputs except where a
buffer is explicitly documented as modified in place.
"""

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


# xorshift64* / splitmix64 constants (see generator module for the contract)
_SH11 = np.uint64(11)
_SH12 = np.uint64(12)
_SH25 = np.uint64(25)
_SH27 = np.uint64(27)
_SH30 = np.uint64(30)
_SH31 = np.uint64(31)
_XS_MULT = np.uint64(2685821657736338717)
_SM_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM_M1 = np.uint64(0xBF58476D1CE4E5B9)
_SM_M2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


@njit(cache=True)
def jacobi_eigh(a, sweep_tol, max_sweeps):
    """Cyclic Jacobi diagonalization of the symmetric matrix ``a`` (modified
    in place).  Returns (diagonal, accumulated rotations); eigenvalues are
    unsorted.  Sweeps stop once the off-diagonal Frobenius norm drops below
    sweep_tol times the Frobenius norm of the input."""
    n = a.shape[0]
    v = np.eye(n)
    scale = 0.0
    for i in range(n):
        for j in range(n):
            scale += a[i, j] * a[i, j]
    scale = np.sqrt(scale)
    w = np.empty(n)
    if scale == 0.0:
        for i in range(n):
            w[i] = 0.0
        return w, v
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += a[p, q] * a[p, q]
        off = np.sqrt(2.0 * off)
        if off <= sweep_tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    for i in range(n):
        w[i] = a[i, i]
    return w, v


@njit(cache=True)
def onesided_jacobi(b, v, pair_tol, max_sweeps):
    """One-sided Jacobi orthogonalization of the columns of ``b`` (m >= n
    expected for efficiency, not required).  ``b`` and ``v`` are modified in
    place; on exit b = B0 @ v with pairwise-orthogonal columns, so the SVD
    of the original B0 is read off from column norms."""
    m, n = b.shape
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = 0.0
                beta = 0.0
                gamma = 0.0
                for k in range(m):
                    alpha += b[k, p] * b[k, p]
                    beta += b[k, q] * b[k, q]
                    gamma += b[k, p] * b[k, q]
                if alpha == 0.0 or beta == 0.0:
                    continue
                if abs(gamma) <= pair_tol * np.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                if zeta >= 0.0:
                    t = 1.0 / (zeta + np.sqrt(1.0 + zeta * zeta))
                else:
                    t = -1.0 / (-zeta + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(m):
                    bp = b[k, p]
                    bq = b[k, q]
                    b[k, p] = c * bp - s * bq
                    b[k, q] = s * bp + c * bq
                for k in range(n):
                    vp = v[k, p]
                    vq = v[k, q]
                    v[k, p] = c * vp - s * vq
                    v[k, q] = s * vp + c * vq
        if not rotated:
            break


@njit(cache=True)
def splitmix64(z):
    """One splitmix64 step: returns (output, advanced state)."""
    z = z + _SM_GAMMA
    x = z
    x = (x ^ (x >> _SH30)) * _SM_M1
    x = (x ^ (x >> _SH27)) * _SM_M2
    return x ^ (x >> _SH31), z


@njit(cache=True)
def fill_u64(state, out):
    """Fill ``out`` (uint64) from the xorshift64* stream; returns new state."""
    s = state
    for i in range(out.size):
        s ^= s >> _SH12
        s ^= s << _SH25
        s ^= s >> _SH27
        out[i] = s * _XS_MULT
    return s


@njit(cache=True)
def fill_uniforms(state, out):
    """Fill ``out`` (float64) with uniforms in [0, 1); returns new state."""
    s = state
    for i in range(out.size):
        s ^= s >> _SH12
        s ^= s << _SH25
        s ^= s >> _SH27
        out[i] = ((s * _XS_MULT) >> _SH11) * _INV53
    return s


@njit(cache=True)
def fill_normals(state, out, have_spare, spare):
    """Fill ``out`` (float64) with standard normals via the polar method.

    The spare variate of each accepted pair is emitted before new uniforms
    are drawn, so interleaved calls continue one well-defined stream.
    Returns (new state, have_spare, spare).
    """
    s = state
    i = 0
    n = out.size
    while i < n:
        if have_spare:
            out[i] = spare
            have_spare = False
            i += 1
            continue
        s ^= s >> _SH12
        s ^= s << _SH25
        s ^= s >> _SH27
        u = ((s * _XS_MULT) >> _SH11) * _INV53
        s ^= s >> _SH12
        s ^= s << _SH25
        s ^= s >> _SH27
        v = ((s * _XS_MULT) >> _SH11) * _INV53
        x = 2.0 * u - 1.0
        y = 2.0 * v - 1.0
        r2 = x * x + y * y
        if r2 >= 1.0 or r2 == 0.0:
            continue
        f = np.sqrt(-2.0 * np.log(r2) / r2)
        out[i] = x * f
        spare = y * f
        have_spare = True
        i += 1
    return s, have_spare, spare


if not HAVE_NUMBA:  # pragma: no cover
    # numpy warns on wrapping uint64 arithmetic; the wrap is intentional.
    def _quiet(fn):
        def wrapped(*args):
            with np.errstate(over="ignore"):
                return fn(*args)

        return wrapped

    splitmix64 = _quiet(splitmix64)
    fill_u64 = _quiet(fill_u64)
    fill_uniforms = _quiet(fill_uniforms)
    fill_normals = _quiet(fill_normals)
