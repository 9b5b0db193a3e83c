"""Pure-Python sequence kernels.

These are the reference implementations of the two hot loops — longest
common subsequence length (for similarity) and LCS pair matching (for
diffs).  A compiled twin lives in ``_speedups.pyx``; both must implement
exactly the same contract, including tie-breaking, so the backends are
interchangeable.

Tie-break contract for ``lcs_match_pairs``: when extending the LCS table,
ties between "skip an element of xs" and "skip an element of ys" are
resolved in favor of skipping the xs element first.  During backtracking
this means: at a tie, step in the xs direction (treat the xs element as
removed) before the ys direction.  The result is that removals sort before
additions within any ambiguous region, which downstream diff rendering
relies on.
"""

from __future__ import annotations

BACKEND_NAME = "pure"


def lcs_length(a: str, b: str) -> int:
    """Length of the longest common subsequence of two strings.

    O(len(a)*len(b)) time, O(min) memory.  Operates on characters.
    """
    if not a or not b:
        return 0
    # Keep the inner loop over the longer string to shrink the DP row.
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for ch_a in a:
        cur = [0]
        append = cur.append
        row_prev = prev
        best = 0
        for j, ch_b in enumerate(b, 1):
            if ch_a == ch_b:
                best = row_prev[j - 1] + 1
            else:
                up = row_prev[j]
                best = up if up >= best else best
            append(best)
        prev = cur
    return prev[-1]


def lcs_match_pairs(xs: list[str], ys: list[str]) -> list[tuple[int, int]]:
    """Indices (i, j) of one longest common subsequence of xs and ys.

    Elements are compared with ==.  Returns pairs in increasing order of
    both coordinates.  Deterministic: ties prefer consuming xs (see module
    docstring).
    """
    n, m = len(xs), len(ys)
    if n == 0 or m == 0:
        return []
    # Full table; backtracking needs it.  Row-major, (n+1) x (m+1).
    width = m + 1
    table = [0] * ((n + 1) * width)
    for i in range(1, n + 1):
        x = xs[i - 1]
        row = i * width
        above = row - width
        for j in range(1, m + 1):
            if x == ys[j - 1]:
                table[row + j] = table[above + j - 1] + 1
            else:
                up = table[above + j]
                left = table[row + j - 1]
                table[row + j] = up if up >= left else left
    pairs: list[tuple[int, int]] = []
    i, j = n, m
    while i > 0 and j > 0:
        if xs[i - 1] == ys[j - 1] and table[i * width + j] == table[(i - 1) * width + j - 1] + 1:
            pairs.append((i - 1, j - 1))
            i -= 1
            j -= 1
        elif table[(i - 1) * width + j] >= table[i * width + j - 1]:
            # Tie or better going up: consume the xs element (a removal).
            i -= 1
        else:
            j -= 1
    pairs.reverse()
    return pairs
