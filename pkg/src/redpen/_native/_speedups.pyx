# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twins of the pure-Python sequence kernels.

Must behave identically to ``redpen._native.pure`` — including the
tie-break rule for ``lcs_match_pairs`` (prefer consuming the left/xs
element on ties, so removals sort before additions).  See pure.py for the
full contract; the test suite runs both backends against each other.
"""

import numpy as np

cimport numpy as cnp

BACKEND_NAME = "speedups"


def _codepoints(s: str):
    try:
        buf = s.encode("utf-32-le")
    except UnicodeEncodeError:
        # Lone surrogates (surrogateescape artifacts) can't be encoded but
        # still have an ord(); fall back to the slow path.
        return np.fromiter((ord(c) for c in s), dtype=np.uint32, count=len(s))
    return np.frombuffer(buf, dtype=np.uint32)


cdef cnp.int64_t _lcs_length_u32(const cnp.uint32_t[::1] xa,
                                 const cnp.uint32_t[::1] ya):
    cdef Py_ssize_t n = xa.shape[0]
    cdef Py_ssize_t m = ya.shape[0]
    cdef cnp.int64_t[::1] prev = np.zeros(m + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] cur = np.zeros(m + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] tmp
    cdef Py_ssize_t i, j
    cdef cnp.uint32_t x
    cdef cnp.int64_t up, left
    for i in range(n):
        x = xa[i]
        cur[0] = 0
        for j in range(1, m + 1):
            if x == ya[j - 1]:
                cur[j] = prev[j - 1] + 1
            else:
                up = prev[j]
                left = cur[j - 1]
                cur[j] = up if up >= left else left
        tmp = prev
        prev = cur
        cur = tmp
    return prev[m]


def lcs_length(a: str, b: str) -> int:
    """Length of the longest common subsequence of two strings."""
    if not a or not b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    return _lcs_length_u32(_codepoints(a), _codepoints(b))


def lcs_match_pairs(xs: list, ys: list) -> list:
    """Indices (i, j) of one longest common subsequence of xs and ys.

    Elements must be hashable and are compared by equality.  Returns pairs
    in increasing order of both coordinates; ties prefer consuming xs.
    """
    cdef Py_ssize_t n = len(xs)
    cdef Py_ssize_t m = len(ys)
    if n == 0 or m == 0:
        return []
    # Map elements to dense int ids so the DP compares machine ints.
    ids = {}
    cdef cnp.int64_t[::1] xa = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] ya = np.empty(m, dtype=np.int64)
    cdef Py_ssize_t i, j
    for i in range(n):
        xa[i] = ids.setdefault(xs[i], len(ids))
    for j in range(m):
        ya[j] = ids.setdefault(ys[j], len(ids))
    cdef Py_ssize_t width = m + 1
    cdef cnp.int64_t[::1] table = np.zeros((n + 1) * width, dtype=np.int64)
    cdef cnp.int64_t x, up, left
    for i in range(1, n + 1):
        x = xa[i - 1]
        for j in range(1, m + 1):
            if x == ya[j - 1]:
                table[i * width + j] = table[(i - 1) * width + j - 1] + 1
            else:
                up = table[(i - 1) * width + j]
                left = table[i * width + j - 1]
                table[i * width + j] = up if up >= left else left
    pairs = []
    i = n
    j = m
    while i > 0 and j > 0:
        if xa[i - 1] == ya[j - 1] and table[i * width + j] == table[(i - 1) * width + j - 1] + 1:
            pairs.append((i - 1, j - 1))
            i -= 1
            j -= 1
        elif table[(i - 1) * width + j] >= table[i * width + j - 1]:
            i -= 1
        else:
            j -= 1
    pairs.reverse()
    return pairs
