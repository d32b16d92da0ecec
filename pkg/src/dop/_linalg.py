"""Dense helpers on lists of lists of mpf.

Matrices are plain row-major ``list[list]``; every routine works at the
ambient mpmath precision, so callers wrap them in ``mp.workprec``.
"""
from __future__ import annotations

from mpmath import mp

from .errors import NumericBreakdown, SingularBlock


def zeros(n, m=None):
    m = n if m is None else m
    return [[mp.zero] * m for _ in range(n)]


def identity(n):
    out = zeros(n)
    for i in range(n):
        out[i][i] = mp.one
    return out


def diag(values):
    out = zeros(len(values))
    for i, v in enumerate(values):
        out[i][i] = v
    return out


def transpose(A):
    return [list(col) for col in zip(*A)]


def matmul(A, B):
    n, inner, m = len(A), len(B), len(B[0]) if B else 0
    out = zeros(n, m)
    for i in range(n):
        Ai = A[i]
        row = out[i]
        for k in range(inner):
            a = Ai[k]
            if not a:
                continue
            Bk = B[k]
            for j in range(m):
                b = Bk[j]
                if b:
                    row[j] += a * b
    return out


def matvec(A, x):
    return [mp.fsum(a * v for a, v in zip(row, x)) for row in A]


def add(A, B, beta=1):
    return [[a + beta * b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def scale_rows(d, A):
    """``diag(d) @ A``."""
    return [[di * a for a in row] for di, row in zip(d, A)]


def scale_cols(A, d):
    """``A @ diag(d)``."""
    return [[a * di for a, di in zip(row, d)] for row in A]


def window(A, n, m=None):
    m = n if m is None else m
    return [row[:m] for row in A[:n]]


def max_abs(A):
    return max((abs(a) for row in A for a in row), default=mp.zero)


def max_abs_diff(A, B):
    return max((abs(a - b) for ra, rb in zip(A, B) for a, b in zip(ra, rb)),
               default=mp.zero)


def rel_diff(A, B):
    """Normwise relative distance ``max|A-B| / max(|A|, |B|)``."""
    scale = max(max_abs(A), max_abs(B))
    diff = max_abs_diff(A, B)
    if not scale:
        return diff
    return diff / scale


def inv_unit_lower(L):
    """Inverse of a unit lower triangular matrix by forward substitution."""
    n = len(L)
    X = identity(n)
    for j in range(n):
        for i in range(j + 1, n):
            Li = L[i]
            s = mp.fsum(Li[k] * X[k][j] for k in range(j, i))
            X[i][j] = -s
    return X


def ldl(A, pivot_floor=None):
    """Square-root-free factorization ``A = L diag(d) L^T`` without pivoting.

    Raises NumericBreakdown when a pivot is not strictly positive or falls
    below ``pivot_floor`` in absolute value.
    """
    n = len(A)
    L = identity(n)
    d = [mp.zero] * n
    for j in range(n):
        dj = A[j][j] - mp.fsum(L[j][k] ** 2 * d[k] for k in range(j))
        if dj <= 0 or (pivot_floor is not None and abs(dj) <= pivot_floor):
            raise NumericBreakdown(f"non-positive pivot at step {j}: {mp.nstr(dj, 8)}")
        d[j] = dj
        for i in range(j + 1, n):
            s = A[i][j] - mp.fsum(L[i][k] * L[j][k] * d[k] for k in range(j))
            L[i][j] = s / dj
    return L, d


def solve(A, b, pivot_rel=None):
    """Solve ``A x = b`` by Gaussian elimination with partial pivoting.

    ``b`` may be a vector or a matrix (list of rows).  A pivot smaller than
    ``pivot_rel * max|A|`` raises SingularBlock.
    """
    n = len(A)
    vector = bool(b) and not isinstance(b[0], list)
    rhs = [[v] for v in b] if vector else [list(r) for r in b]
    M = [list(A[i]) + rhs[i] for i in range(n)]
    width = len(M[0]) if M else 0
    floor = max_abs(A) * pivot_rel if pivot_rel is not None else mp.zero
    for col in range(n):
        p = max(range(col, n), key=lambda r: abs(M[r][col]))
        if not M[p][col] or abs(M[p][col]) <= floor:
            raise SingularBlock(f"pivot {col} vanishes at working precision")
        M[col], M[p] = M[p], M[col]
        piv = M[col][col]
        for r in range(col + 1, n):
            f = M[r][col] / piv
            if f:
                Mr, Mc = M[r], M[col]
                for j in range(col, width):
                    Mr[j] -= f * Mc[j]
    X = [[mp.zero] * (width - n) for _ in range(n)]
    for i in range(n - 1, -1, -1):
        for j in range(width - n):
            s = M[i][n + j] - mp.fsum(M[i][k] * X[k][j] for k in range(i + 1, n))
            X[i][j] = s / M[i][i]
    return [r[0] for r in X] if vector else X


def poly_mul(p, q):
    """Product of ascending coefficient lists."""
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def horner(coeffs, z):
    """Evaluate an ascending coefficient list at ``z``."""
    acc = 0
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def matpoly(coeffs, A):
    """Horner evaluation of an ascending coefficient list at a square matrix."""
    n = len(A)
    acc = zeros(n)
    for c in reversed(coeffs):
        acc = matmul(acc, A)
        for i in range(n):
            acc[i][i] += c
    return acc
