"""Pure-Python bit kernels: the readable reference implementation.

A fermionic mode p corresponds to bit p of an occupation bitmask.  Creation
operators are ordered by increasing mode index, so

    a+_p |mask>  =  (-1)^(number of set bits below p) |mask with bit p set>

when bit p is clear (zero otherwise), and the adjoint convention for a_p.
`hopping_entries` enumerates the nonzero matrix elements of a+_p a_q on a
particle-number sector whose bitmasks are sorted increasingly; both backends
must emit entries in the same (source-index ascending) order so results are
bit-for-bit interchangeable.
"""

from bisect import bisect_left

import numpy as np


def occupations(masks, num_modes):
    """Per-state mode occupations as a (dim, num_modes) float array."""
    dim = len(masks)
    occ = np.zeros((dim, num_modes))
    for i in range(dim):
        m = int(masks[i])
        while m:
            low = m & -m
            occ[i, low.bit_length() - 1] = 1.0
            m ^= low
    return occ


def hopping_entries(masks, p, q):
    """Nonzero elements <row| a+_p a_q |col> = sign on a sorted sector basis.

    Requires p != q.  Returns (rows, cols, signs) as int64/int64/float64
    arrays; `rows` indexes the target mask, `cols` the source mask.
    """
    if p == q:
        raise ValueError("hopping_entries requires p != q; the diagonal is occupations")
    sorted_masks = [int(m) for m in masks]
    pbit = 1 << p
    qbit = 1 << q
    below_p = pbit - 1
    below_q = qbit - 1
    rows, cols, signs = [], [], []
    for col, mask in enumerate(sorted_masks):
        if not mask & qbit:
            continue
        interm = mask ^ qbit
        if interm & pbit:
            continue
        parity = (mask & below_q).bit_count() + (interm & below_p).bit_count()
        target = interm | pbit
        row = bisect_left(sorted_masks, target)
        rows.append(row)
        cols.append(col)
        signs.append(-1.0 if parity & 1 else 1.0)
    return (
        np.asarray(rows, dtype=np.int64),
        np.asarray(cols, dtype=np.int64),
        np.asarray(signs, dtype=np.float64),
    )
