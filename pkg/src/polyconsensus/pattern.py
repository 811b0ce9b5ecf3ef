"""Symmetric pattern (generalized Laplacian) matrices and their spectra.

A pattern matrix couples N identical agents; admissible patterns are
symmetric with zero row sums and a simple zero eigenvalue (connected
influence graph). Spectra come from the in-repo Jacobi solver and are
reported with the zero eigenvalue first, then ascending.
"""

from dataclasses import dataclass

import numpy as np

from ._jacobi import jacobi_eigh


def cycle_laplacian(N, weight=1.0):
    """Laplacian of the N-cycle with uniform edge weight; N >= 3."""
    if N < 3:
        raise ValueError("cycle needs N >= 3")
    P = np.zeros((N, N))
    idx = np.arange(N)
    P[idx, idx] = 2.0 * weight
    P[idx, (idx + 1) % N] = -weight
    P[(idx + 1) % N, idx] = -weight
    return P


def from_edge_list(N, edges):
    """Weighted graph Laplacian from 1-based (i, j, weight) edges."""
    if N < 2:
        raise ValueError("need N >= 2")
    P = np.zeros((N, N))
    for i, j, w in edges:
        i, j = int(i), int(j)
        if not (1 <= i <= N and 1 <= j <= N):
            raise ValueError(f"edge ({i},{j}) out of range 1..{N}")
        if i == j:
            raise ValueError(f"self-loop at node {i}")
        a, b = i - 1, j - 1
        P[a, a] += w
        P[b, b] += w
        P[a, b] -= w
        P[b, a] -= w
    return P


def check_assumption1(P, tol=1e-8):
    """Admissibility check; returns a list of violation labels (empty = ok).

    Conditions: symmetry, zero row sums, and a simple zero eigenvalue
    (relative to max |entry|). Labels: 'asymmetric', 'row-sum',
    'zero-multiplicity'.
    """
    P = np.asarray(P, dtype=float)
    N = P.shape[0]
    if P.ndim != 2 or P.shape != (N, N):
        raise ValueError("pattern must be a square matrix")
    scale = max(1.0, float(np.max(np.abs(P))))
    violations = []
    if np.max(np.abs(P - P.T)) > tol * scale:
        violations.append("asymmetric")
    if np.max(np.abs(P @ np.ones(N))) > tol * scale:
        violations.append("row-sum")
    if "asymmetric" not in violations:
        w, _ = jacobi_eigh(P)
        if int(np.sum(np.abs(w) <= tol * scale)) != 1:
            violations.append("zero-multiplicity")
    return violations


@dataclass
class SpectralData:
    """Spectrum of a pattern matrix, zero eigenvalue first then ascending."""

    lambdas: np.ndarray      # (N,)
    S: np.ndarray            # (N, N), orthonormal columns matching lambdas
    distinct_nonzero: tuple  # deduplicated nonzero eigenvalues, ascending
    lambda_min: float        # smallest nonzero eigenvalue
    lambda_max: float        # largest nonzero eigenvalue

    @property
    def N(self):
        return len(self.lambdas)


def eigendecompose(P, zero_tol=1e-8, dedup_tol=1e-9):
    """SpectralData of an admissible pattern matrix via cyclic Jacobi."""
    P = np.asarray(P, dtype=float)
    scale = max(1.0, float(np.max(np.abs(P))))
    w, V = jacobi_eigh(P)
    zero_pos = int(np.argmin(np.abs(w)))
    if abs(w[zero_pos]) > zero_tol * scale:
        raise ValueError("pattern has no zero eigenvalue within tolerance")
    order = [zero_pos] + [i for i in range(len(w)) if i != zero_pos]
    lam = w[order]
    S = V[:, order]
    nonzero = [float(v) for v in lam[1:] if abs(v) > zero_tol * scale]
    distinct = []
    for v in sorted(nonzero):
        if not distinct or abs(v - distinct[-1]) > dedup_tol * max(1.0, abs(v)):
            distinct.append(v)
    if not distinct:
        raise ValueError("pattern has no nonzero eigenvalues")
    return SpectralData(
        lambdas=lam,
        S=S,
        distinct_nonzero=tuple(distinct),
        lambda_min=distinct[0],
        lambda_max=distinct[-1],
    )
