"""Cantor pairing π(i, j) = (i+j)(i+j+1)/2 + j and its inverse."""
from math import isqrt


def pair(i: int, j: int) -> int:
    s = i + j
    return s * (s + 1) // 2 + j


def unpair(n: int) -> tuple[int, int]:
    s = (isqrt(8 * n + 1) - 1) // 2
    j = n - s * (s + 1) // 2
    return s - j, j


def column(n: int) -> int:
    """First coordinate of π⁻¹(n)."""
    return unpair(n)[0]


def triangular_root(x: int) -> int:
    """Least i with π(i, 0) >= x."""
    if x <= 0:
        return 0
    i = (isqrt(8 * x + 1) - 1) // 2
    while i * (i + 1) // 2 < x:
        i += 1
    return i
