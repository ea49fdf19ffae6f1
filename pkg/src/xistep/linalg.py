"""Small dense exact linear solves over the rationals."""

from fractions import Fraction


def solve_exact(matrix, rhs):
    """Gaussian elimination with exact rationals. Returns (solution,
    determinant); raises ValueError on a singular matrix."""
    n = len(matrix)
    a = [[Fraction(x) for x in row] + [Fraction(rhs[i])]
         for i, row in enumerate(matrix)]
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise ValueError("singular matrix")
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det *= a[col][col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return [a[i][n] for i in range(n)], det


def determinant(matrix):
    n = len(matrix)
    try:
        _, det = solve_exact(matrix, [Fraction(0)] * n)
    except ValueError:
        return Fraction(0)
    return det
