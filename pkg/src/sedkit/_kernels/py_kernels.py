"""Pure-numpy kernels; semantics match the compiled extension exactly."""

from __future__ import annotations

import numpy as np

# log of a positive double far below any reachable record probability; keeps
# zero-probability records finite instead of poisoning the whole likelihood.
LOG_FLOOR = -708.0


def joint_counts(cfg: np.ndarray, child: np.ndarray, q: int, r: int) -> np.ndarray:
    """Contingency table: rows are parent configurations, columns child states."""
    flat = cfg * r + child
    return np.bincount(flat, minlength=q * r).reshape(q, r)


def em_estep(
    hidden_cfg: np.ndarray,
    theta_h: np.ndarray,
    child_base: np.ndarray,
    child_stride: np.ndarray,
    child_code: np.ndarray,
    theta_c_flat: np.ndarray,
    child_offset: np.ndarray,
    child_card: np.ndarray,
    en_h: np.ndarray,
    en_c_flat: np.ndarray,
) -> float:
    """One expectation sweep for a single hidden variable.

    Per record: weight each hidden state by its own CPT row times each child
    CPT entry, normalize into a posterior (uniform if all weights vanish),
    and accumulate posterior-weighted counts for every family touching the
    hidden node.  Returns the hidden-part log-likelihood
    ``sum_m log(sum_h w_m[h])``.
    """
    rh = theta_h.shape[1]
    hs = np.arange(rh, dtype=np.int64)
    w = theta_h[hidden_cfg].copy()
    flat_per_child = []
    for c in range(len(child_stride)):
        cfg = child_base[c][:, None] + child_stride[c] * hs[None, :]
        flat = child_offset[c] + cfg * child_card[c] + child_code[c][:, None]
        w *= theta_c_flat[flat]
        flat_per_child.append(flat)

    tot = w.sum(axis=1)
    dead = tot <= 0.0
    safe = np.where(dead, 1.0, tot)
    ll = float(np.log(safe).sum() + LOG_FLOOR * dead.sum())
    post = np.where(dead[:, None], 1.0 / rh, w / safe[:, None])

    qh = en_h.shape[0]
    for h in range(rh):
        en_h[:, h] += np.bincount(hidden_cfg, weights=post[:, h], minlength=qh)
    for c in range(len(child_stride)):
        flat = flat_per_child[c]
        for h in range(rh):
            en_c_flat += np.bincount(
                flat[:, h], weights=post[:, h], minlength=en_c_flat.shape[0]
            )
    return ll
