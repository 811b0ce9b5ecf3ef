"""Cyclic Jacobi eigensolver for real symmetric matrices.

Deliberately self-contained: certificate verification and pattern spectra go
through this routine so they share no eigensolver code with the optimization
path.
"""

import numpy as np


def _off_norm(A):
    # summing the off-diagonal squares directly avoids the cancellation in
    # ||A||_F^2 - ||diag||_F^2, which floors near sqrt(eps) * ||A||_F
    off = A.copy()
    np.fill_diagonal(off, 0.0)
    return np.sqrt(np.sum(off * off))


def jacobi_eigh(A, rel_tol=1e-12, max_sweeps=100):
    """Eigenvalues (ascending) and orthonormal eigenvectors of symmetric A.

    Rotates until the off-diagonal Frobenius mass is <= rel_tol times the
    Frobenius norm of A.
    """
    A = np.array(A, dtype=float)
    m = A.shape[0]
    if A.ndim != 2 or A.shape != (m, m):
        raise ValueError("matrix must be square")
    if m == 0:
        return np.zeros(0), np.zeros((0, 0))
    if np.max(np.abs(A - A.T)) > 1e-10 * max(1.0, np.max(np.abs(A))):
        raise ValueError("matrix must be symmetric")
    A = 0.5 * (A + A.T)
    V = np.eye(m)
    norm = np.sqrt(np.sum(A * A))
    if m == 1 or norm == 0.0:
        order = np.argsort(np.diag(A))
        return np.diag(A)[order], V[:, order]
    tol = rel_tol * norm
    skip = tol / (m * m)
    for _ in range(max_sweeps):
        if _off_norm(A) <= tol:
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = A[p, q]
                if abs(apq) <= skip:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                cp = A[:, p].copy()
                cq = A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                rp = A[p, :].copy()
                rq = A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                A[p, q] = 0.0
                A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        if _off_norm(A) > tol:
            raise RuntimeError("Jacobi sweep limit reached without convergence")
    w = np.diag(A).copy()
    order = np.argsort(w)
    return w[order], V[:, order]


def min_eigenvalue(A, rel_tol=1e-12):
    w, _ = jacobi_eigh(A, rel_tol=rel_tol)
    return float(w[0])


def max_eigenvalue(A, rel_tol=1e-12):
    w, _ = jacobi_eigh(A, rel_tol=rel_tol)
    return float(w[-1])
