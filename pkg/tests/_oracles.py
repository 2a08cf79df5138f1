"""Independent brute-force oracles; nothing here imports the package."""

from fractions import Fraction
from typing import Sequence

import numpy as np


def charpoly_coeffs(matrix: np.ndarray) -> np.ndarray:
    """Characteristic polynomial coefficients by the Faddeev-LeVerrier recursion."""
    n = matrix.shape[0]
    coeffs = [1.0]
    aux = np.zeros_like(matrix, dtype=float)
    for k in range(1, n + 1):
        aux = matrix @ aux + coeffs[-1] * np.eye(n)
        coeffs.append(-np.trace(matrix @ aux) / k)
    return np.array(coeffs)


def eigenvalues_by_charpoly(matrix: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues as roots of the characteristic polynomial."""
    roots = np.roots(charpoly_coeffs(np.asarray(matrix, dtype=float)))
    return np.sort(roots.real)


def brute_system_error(vectors: Sequence[Sequence[int]], truth: Sequence[bool]) -> Fraction:
    """Mean |belief - truth| on the unit scale, summed entry by entry."""
    total = Fraction(0)
    for row in vectors:
        for b, is_true in zip(row, truth):
            total += abs(Fraction(int(b), 2) - (1 if is_true else 0))
    return total / (len(vectors) * len(truth))


def brute_confusion(vectors: Sequence[Sequence[int]], truth: Sequence[bool]):
    tp = tn = fp = fn = u = 0
    for row in vectors:
        for b, is_true in zip(row, truth):
            if b == 1:
                u += 1
            elif b == 2 and is_true:
                tp += 1
            elif b == 2:
                fp += 1
            elif is_true:
                fn += 1
            else:
                tn += 1
    return tp, tn, fp, fn, u


def brute_f_score(vectors: Sequence[Sequence[int]], truth: Sequence[bool]) -> Fraction:
    """2(tp+tn) / (2(tp+tn) + fp + fn + u/2), written out longhand."""
    tp, tn, fp, fn, u = brute_confusion(vectors, truth)
    if tp + tn == 0:
        return Fraction(0)
    return Fraction(2 * (tp + tn)) / (2 * (tp + tn) + fp + fn + Fraction(u, 2))
