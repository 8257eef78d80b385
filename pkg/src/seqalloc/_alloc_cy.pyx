# cython: boundscheck=False, wraparound=False
"""Compiled picking kernel. Semantics must match ``_alloc_py.allocate``."""

from libc.stdlib cimport malloc, free


def allocate(prefs, seq, int m):
    """Simulate a picking sequence over integer-encoded preferences.

    Same contract as ``seqalloc._alloc_py.allocate``.
    """
    cdef int n = len(prefs)
    cdef int L = len(seq)
    cdef int *flat = <int *> malloc(n * m * sizeof(int))
    cdef int *cursor = <int *> malloc(n * sizeof(int))
    cdef int *seq_c = <int *> malloc(L * sizeof(int))
    cdef char *taken = <char *> malloc(m * sizeof(char))
    if flat == NULL or cursor == NULL or seq_c == NULL or taken == NULL:
        free(flat); free(cursor); free(seq_c); free(taken)
        raise MemoryError()
    cdef int i, k, t, agent, p, item
    try:
        for i in range(n):
            row = prefs[i]
            for k in range(m):
                flat[i * m + k] = row[k]
            cursor[i] = 0
        for t in range(L):
            seq_c[t] = seq[t]
        for k in range(m):
            taken[k] = 0

        picks = []
        for t in range(L):
            agent = seq_c[t]
            p = cursor[agent]
            while taken[flat[agent * m + p]]:
                p += 1
            item = flat[agent * m + p]
            taken[item] = 1
            cursor[agent] = p + 1
            picks.append(item)
        return picks
    finally:
        free(flat)
        free(cursor)
        free(seq_c)
        free(taken)
