"""Span tracking and forced-zero analysis for affine matrix families.

The feasibility systems assembled here routinely have empty interior: some
diagonal slots of a sign-constrained block are linear consequences of other
equalities and are therefore pinned to zero, which forces their whole row.
Interior-point solvers stall on such problems, so the solver detects the
forced structure first. Functionals are tracked together with their constant
part; membership in the span means the functional vanishes on the whole
feasible set.
"""

import numpy as np


class SpanTracker:
    """Incremental orthonormal basis for augmented linear functionals."""

    def __init__(self, dim, tol=1e-9):
        self.dim = dim
        self.tol = tol
        self.basis = np.zeros((0, dim))

    def _residual(self, v):
        r = v
        if len(self.basis):
            # reorthogonalize once for stability
            r = r - self.basis.T @ (self.basis @ r)
            r = r - self.basis.T @ (self.basis @ r)
        return r

    def contains(self, v):
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return True
        return np.linalg.norm(self._residual(v)) <= self.tol * max(1.0, nv)

    def add(self, v):
        """Track v; True if it contributed a new direction."""
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return False
        r = self._residual(v)
        nr = np.linalg.norm(r)
        if nr <= self.tol * max(1.0, nv):
            return False
        self.basis = np.vstack([self.basis, r / nr])
        return True


def forced_zero_cascade(families, dim, seed_rows=(), tol=1e-9):
    """Find diagonal slots of sign-constrained affine families forced to zero.

    families: list of (F0, F, keep0) where the block value is
    F0 + sum_r y_r F[r] and keep0 is an optional initial index list. A kept
    diagonal slot whose augmented functional lies in the tracked span is
    removed, and semidefinite ordering then forces its entire row; the row
    functionals join the span and the sweep repeats to a fixpoint.

    Returns (keeps, rows, tracker) with keeps the per-family surviving index
    lists and rows the independent discovered equalities as (vector, const).
    """
    tracker = SpanTracker(dim + 1, tol=tol)
    rows = []

    def track(vec, const):
        if tracker.add(np.concatenate([vec, [const]])):
            rows.append((np.asarray(vec, float).copy(), float(const)))

    for vec, const in seed_rows:
        track(np.asarray(vec, float), float(const))

    keeps = []
    for F0, F, keep0 in families:
        keeps.append(list(keep0) if keep0 is not None else list(range(F0.shape[0])))

    changed = True
    while changed:
        changed = False
        for fi, (F0, F, _) in enumerate(families):
            kept = keeps[fi]
            for s in list(kept):
                v = np.concatenate([F[:, s, s], [F0[s, s]]])
                if tracker.contains(v):
                    kept.remove(s)
                    changed = True
                    for t in range(F0.shape[0]):
                        track(F[:, s, t], F0[s, t])
    return keeps, rows, tracker
