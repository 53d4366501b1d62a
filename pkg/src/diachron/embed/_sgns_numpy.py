"""Pure numpy SGNS kernel, used when the compiled extension is absent.

Processes one staged batch of (input, target, negatives) pairs per call.
All dot products and row updates for the batch are computed against the
matrices as they were at call entry (vectorized batch semantics); gradients
for duplicate rows accumulate via ``np.add.at``. This is statistically
equivalent to the sequential compiled kernel but not bit-identical to it.
"""

from __future__ import annotations

import numpy as np

KERNEL_NAME = "numpy"


def run_pairs(syn0, syn1, inputs, targets, negatives, lr, work=None):
    """Apply one SGD step per pair; returns (loss_sum, term_count).

    inputs, targets: int32 arrays of row ids (context row in syn0, center
    row in syn1). negatives: int32 matrix, one row of sampled ids per pair;
    a negative equal to the pair's target is skipped.
    """
    n = inputs.shape[0]
    if n == 0:
        return 0.0, 0
    k = negatives.shape[1]
    dim = syn0.shape[1]

    rows_idx = np.concatenate([targets[:, None], negatives], axis=1)
    valid = np.ones((n, k + 1), dtype=bool)
    valid[:, 1:] = negatives != targets[:, None]

    l1 = syn0[inputs]  # (n, dim) copies
    rows = syn1[rows_idx]  # (n, k+1, dim) copies

    f = np.einsum("nkd,nd->nk", rows, l1)
    np.clip(f, -6.0, 6.0, out=f)
    sig = 1.0 / (1.0 + np.exp(-f))

    g = -sig
    g[:, 0] += 1.0
    g *= np.float32(lr)
    g[~valid] = 0.0

    loss = -float(np.log(sig[:, 0]).sum())
    neg_sig = sig[:, 1:][valid[:, 1:]]
    loss -= float(np.log(1.0 - neg_sig).sum())
    terms = int(valid.sum())

    grad_in = np.einsum("nk,nkd->nd", g, rows)
    np.add.at(syn0, inputs, grad_in)
    updates = (g[:, :, None] * l1[:, None, :]).reshape(-1, dim)
    np.add.at(syn1, rows_idx.reshape(-1), updates)
    return loss, terms
