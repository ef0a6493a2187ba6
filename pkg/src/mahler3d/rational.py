"""Exact linear algebra over the rationals (Fraction entries)."""

from fractions import Fraction
from typing import List, Sequence, Tuple

Matrix = List[List[Fraction]]


def to_fractions(rows: Sequence[Sequence]) -> Matrix:
    return [[x if isinstance(x, Fraction) else Fraction(x) for x in row] for row in rows]


def rref(rows: Sequence[Sequence], ncols: int = None) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form and pivot columns."""
    A = to_fractions(rows)
    if ncols is None:
        ncols = len(A[0]) if A else 0
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        if r == len(A):
            break
        p = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    return A[:r], pivots


def rank(rows: Sequence[Sequence], ncols: int = None) -> int:
    return len(rref(rows, ncols)[1])


def nullspace(rows: Sequence[Sequence], ncols: int) -> Matrix:
    """Basis of the kernel, one vector per free column."""
    R, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(R, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def solve_affine_2d(p1, p2, p3, q) -> Tuple[Fraction, Fraction, Fraction]:
    """Coefficients (a, b, c), a + b + c = 1, with q = a p1 + b p2 + c p3 in the plane."""
    # q - p1 = b (p2 - p1) + c (p3 - p1), solved by Cramer's rule
    u = (p2[0] - p1[0], p2[1] - p1[1])
    v = (p3[0] - p1[0], p3[1] - p1[1])
    w = (q[0] - p1[0], q[1] - p1[1])
    det = u[0] * v[1] - u[1] * v[0]
    if det == 0:
        raise ZeroDivisionError("reference points are collinear")
    b = (w[0] * v[1] - w[1] * v[0]) / det
    c = (u[0] * w[1] - u[1] * w[0]) / det
    return 1 - b - c, b, c
