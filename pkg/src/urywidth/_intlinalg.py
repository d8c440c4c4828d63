"""Exact integer linear algebra used for homology ranks.

Boundary matrices of the complexes handled here are small and have entries
in {-1, 0, 1}, so arbitrary-precision integer arithmetic is cheap and keeps
every rank computation exact.
"""

from __future__ import annotations

from fractions import Fraction


def smith_diagonal(rows: list[list[int]]) -> list[int]:
    """Diagonal of the Smith normal form of an integer matrix.

    Returns the nonnegative diagonal entries d_1 | d_2 | ... (zeros trimmed).
    """
    mat = [list(map(int, r)) for r in rows]
    m = len(mat)
    n = len(mat[0]) if m else 0
    diag = []
    top = 0
    while True:
        pivot = None
        best = None
        for i in range(top, m):
            for j in range(top, n):
                v = abs(mat[i][j])
                if v and (best is None or v < best):
                    best = v
                    pivot = (i, j)
        if pivot is None:
            break
        pi, pj = pivot
        mat[top], mat[pi] = mat[pi], mat[top]
        for r in mat:
            r[top], r[pj] = r[pj], r[top]
        # eliminate until the pivot divides its row and column
        while True:
            p = mat[top][top]
            dirty = False
            for i in range(top + 1, m):
                q = mat[i][top] // p
                if q:
                    for j in range(top, n):
                        mat[i][j] -= q * mat[top][j]
                if mat[i][top]:
                    mat[top], mat[i] = mat[i], mat[top]
                    dirty = True
                    break
            if dirty:
                continue
            for j in range(top + 1, n):
                q = mat[top][j] // p
                if q:
                    for i in range(top, m):
                        mat[i][j] -= q * mat[i][top]
                if mat[top][j]:
                    for i in range(m):
                        mat[i][top] += mat[i][j]
                    dirty = True
                    break
            if not dirty:
                break
        diag.append(abs(mat[top][top]))
        top += 1
        if top >= m or top >= n:
            break
    return diag


def integer_rank(rows: list[list[int]]) -> int:
    """Rank of an integer matrix (exact, via fraction-free elimination)."""
    mat = [list(map(int, r)) for r in rows]
    m = len(mat)
    n = len(mat[0]) if m else 0
    rank = 0
    prev = 1
    row = 0
    for col in range(n):
        piv = None
        for i in range(row, m):
            if mat[i][col]:
                piv = i
                break
        if piv is None:
            continue
        mat[row], mat[piv] = mat[piv], mat[row]
        for i in range(row + 1, m):
            for j in range(col + 1, n):
                mat[i][j] = (mat[row][col] * mat[i][j] - mat[i][col] * mat[row][j]) // prev
            mat[i][col] = 0
        prev = mat[row][col]
        rank += 1
        row += 1
        if row == m:
            break
    return rank


def kernel_basis(rows: list[list[int]]) -> list[list[int]]:
    """Integer basis of the rational kernel of an integer matrix.

    Rows are the matrix rows; vectors returned are primitive integer columns
    of the kernel (denominators cleared).
    """
    m = len(rows)
    n = len(rows[0]) if m else 0
    if n == 0:
        return []
    mat = [[Fraction(v) for v in r] for r in rows]
    pivots = []
    row = 0
    for col in range(n):
        piv = None
        for i in range(row, m):
            if mat[i][col]:
                piv = i
                break
        if piv is None:
            continue
        mat[row], mat[piv] = mat[piv], mat[row]
        pv = mat[row][col]
        mat[row] = [v / pv for v in mat[row]]
        for i in range(m):
            if i != row and mat[i][col]:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[row])]
        pivots.append(col)
        row += 1
        if row == m:
            break
    free = [j for j in range(n) if j not in pivots]
    basis = []
    for j in free:
        vec = [Fraction(0)] * n
        vec[j] = Fraction(1)
        for r, pc in enumerate(pivots):
            vec[pc] = -mat[r][j]
        denom = 1
        for v in vec:
            denom = denom * v.denominator // _gcd(denom, v.denominator)
        basis.append([int(v * denom) for v in vec])
    return basis


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a
