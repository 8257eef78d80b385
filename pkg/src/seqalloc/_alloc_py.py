"""Pure-Python picking kernel.

Reference implementation of the inner loop shared with the compiled
kernel in ``_alloc_cy``; both must produce identical picks.
"""


def allocate(prefs, seq, m):
    """Simulate a picking sequence over integer-encoded preferences.

    prefs: per-agent preference lists, ``prefs[i][k]`` is the item index the
    agent with index ``i`` ranks k-th. Every list must be a permutation of
    ``range(m)``. seq: agent index per stage. Returns the list of picked item
    indices, one per stage.
    """
    taken = bytearray(m)
    cursor = [0] * len(prefs)
    picks = []
    for agent in seq:
        row = prefs[agent]
        p = cursor[agent]
        while taken[row[p]]:
            p += 1
        item = row[p]
        taken[item] = 1
        cursor[agent] = p + 1
        picks.append(item)
    return picks
