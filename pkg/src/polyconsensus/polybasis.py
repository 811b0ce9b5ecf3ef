"""Graded-lex monomial bases, gram maps and slack (kernel) matrices.

The vector chi(x) stacks every monomial of total degree <= d in n variables,
constant first, degrees ascending, and within a degree lexicographic with the
power of x_1 descending. Quadratic forms chi(x)^T X chi(x) are polynomials of
degree <= 2d; gram_map extracts their coefficient vectors and the slack basis
spans the kernel of that map (matrices Q with chi^T Q chi identically zero).
"""

from dataclasses import dataclass, field
from math import comb

import numpy as np


def count_rho(n, d):
    """Number of monomials of degree <= d in n variables."""
    return comb(n + d, n)


def count_iota(n, d):
    """Dimension of the slack space for the degree-d basis in n variables."""
    r = comb(d + n, d)
    return (r * r + r) // 2 - comb(n + 2 * d, 2 * d)


def _degree_slice(n, total):
    # lex within a fixed total degree, first variable takes the largest power
    if n == 1:
        return [(total,)]
    out = []
    for k in range(total, -1, -1):
        for rest in _degree_slice(n - 1, total - k):
            out.append((k,) + rest)
    return out


def _exponents_upto(n, d):
    out = []
    for total in range(d + 1):
        out.extend(_degree_slice(n, total))
    return out


@dataclass
class MonomialBasis:
    """Monomial basis of degree <= d in n variables (graded-lex order)."""

    n: int
    d: int
    exponents: tuple
    rho: int = field(init=False)
    exponent_array: np.ndarray = field(init=False, repr=False)
    index: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.rho = len(self.exponents)
        self.exponent_array = np.array(self.exponents, dtype=np.int64)
        self.index = {e: i for i, e in enumerate(self.exponents)}


def build_basis(n, d):
    """Construct the graded-lex monomial basis for (n, d)."""
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    basis = MonomialBasis(n=n, d=d, exponents=tuple(_exponents_upto(n, d)))
    assert basis.rho == count_rho(n, d)
    return basis


def eval_chi(basis, x):
    """Evaluate the monomial vector at x; batched over leading axes of x."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != basis.n:
        raise ValueError(f"state dimension {x.shape[-1]} != n = {basis.n}")
    return np.prod(x[..., None, :] ** basis.exponent_array, axis=-1)


def product_exponents(basis):
    """Exponent tuples of degree <= 2d, graded-lex (the gram_map index set)."""
    return tuple(_exponents_upto(basis.n, 2 * basis.d))


def _pair_target_index(basis):
    targets = product_exponents(basis)
    tindex = {e: i for i, e in enumerate(targets)}
    rho = basis.rho
    pair = np.empty((rho, rho), dtype=np.int64)
    for a in range(rho):
        ea = basis.exponents[a]
        for b in range(rho):
            eb = basis.exponents[b]
            pair[a, b] = tindex[tuple(p + q for p, q in zip(ea, eb))]
    return targets, pair


def gram_map(basis, X):
    """Coefficients of chi^T X chi as a vector over all degree <= 2d monomials."""
    X = np.asarray(X, dtype=float)
    targets, pair = _pair_target_index(basis)
    return np.bincount(pair.ravel(), weights=X.ravel(), minlength=len(targets))


@dataclass
class SlackBasis:
    """Integer matrices spanning the kernel of gram_map (chi^T Q chi == 0)."""

    iota: int
    matrices: np.ndarray  # (iota, rho, rho), symmetric, integer entries


def build_slack_basis(basis):
    """Enumerate kernel matrices: one per extra representation of a product monomial.

    Unordered index pairs {a, b} with exponent(a) + exponent(b) equal are
    alternative gram positions for the same monomial. Consecutive pairs give
    difference matrices, weighted so both terms contribute coefficient one,
    then doubled to keep entries integer.
    """
    rho = basis.rho
    reps = {}
    for a in range(rho):
        ea = basis.exponents[a]
        for b in range(a, rho):
            eb = basis.exponents[b]
            gamma = tuple(p + q for p, q in zip(ea, eb))
            reps.setdefault(gamma, []).append((a, b))
    mats = []
    for gamma in sorted(reps, key=lambda g: (sum(g), tuple(-p for p in g))):
        pairs = reps[gamma]
        for (a, b), (c, e) in zip(pairs, pairs[1:]):
            Q = np.zeros((rho, rho), dtype=np.int64)
            if a == b:
                Q[a, a] += 2
            else:
                Q[a, b] += 1
                Q[b, a] += 1
            if c == e:
                Q[c, c] -= 2
            else:
                Q[c, e] -= 1
                Q[e, c] -= 1
            mats.append(Q)
    iota = count_iota(basis.n, basis.d)
    mats = np.array(mats, dtype=np.int64) if mats else np.zeros((0, rho, rho), np.int64)
    assert len(mats) == iota
    return SlackBasis(iota=iota, matrices=mats)


def selector_gamma(basis):
    """Linear selector with selector_gamma @ chi(x) == x; shape (n, rho)."""
    G = np.zeros((basis.n, basis.rho))
    for i in range(basis.n):
        e = tuple(1 if j == i else 0 for j in range(basis.n))
        G[i, basis.index[e]] = 1.0
    return G


def selector_pi(basis):
    """Selector dropping the constant monomial; shape (rho - 1, rho)."""
    P = np.zeros((basis.rho - 1, basis.rho))
    P[:, 1:] = np.eye(basis.rho - 1)
    return P
