"""Assembly of the LMI families that certify formation consensus.

Route one builds a pair of blocks per distinct nonzero pattern eigenvalue:
a positivity block sum_j lambda^j L_j and a projected decrease block that
must be negative semidefinite. Route two replaces the eigenvalue enumeration
by a single interval [lambda_min, lambda_max], lifting the eigenvalue
dependence with a generalized KYP argument: each polynomial family becomes
one parameter-free pencil with multipliers D (symmetric) and G (skew).

Decision variables are the Lyapunov coefficients L_1..L_l, the slack
multipliers tau, and for the interval route the KYP multipliers. All blocks
are affine in the packed decision vector y.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from ._span import forced_zero_cascade
from .polybasis import selector_gamma, selector_pi


def _sym_pairs(k):
    return [(i, j) for i in range(k) for j in range(i, k)]


def _skew_pairs(k):
    return [(i, j) for i in range(k) for j in range(i + 1, k)]


def _sym_dim(k):
    return k * (k + 1) // 2


def _skew_dim(k):
    return k * (k - 1) // 2


_GROUP_DIMS = {"sym": _sym_dim, "skew": _skew_dim, "vec": lambda k: k}


@dataclass
class DecisionLayout:
    """Packing of named matrix/vector variable groups into one flat vector."""

    groups: tuple  # of (name, kind, k) with kind in {'sym', 'skew', 'vec'}
    offsets: dict = field(init=False, repr=False)
    size: int = field(init=False)

    def __post_init__(self):
        self.offsets = {}
        pos = 0
        for name, kind, k in self.groups:
            dim = _GROUP_DIMS[kind](k)
            self.offsets[name] = (pos, pos + dim)
            pos += dim
        self.size = pos

    def group_spec(self, name):
        for gname, kind, k in self.groups:
            if gname == name:
                return kind, k
        raise KeyError(name)

    def unpack(self, y, name):
        """Matrix (sym/skew) or vector (vec) for one group from packed y."""
        y = np.asarray(y, dtype=float)
        kind, k = self.group_spec(name)
        lo, hi = self.offsets[name]
        vals = y[lo:hi]
        if kind == "vec":
            return vals.copy()
        M = np.zeros((k, k))
        pairs = _sym_pairs(k) if kind == "sym" else _skew_pairs(k)
        for v, (i, j) in zip(vals, pairs):
            M[i, j] = v
            if i != j:
                M[j, i] = v if kind == "sym" else -v
        return M

    def pack(self, values):
        """Inverse of unpack for a dict name -> matrix/vector."""
        y = np.zeros(self.size)
        for name, kind, k in self.groups:
            lo, hi = self.offsets[name]
            V = np.asarray(values[name], dtype=float)
            if kind == "vec":
                y[lo:hi] = V
            else:
                pairs = _sym_pairs(k) if kind == "sym" else _skew_pairs(k)
                y[lo:hi] = [V[i, j] for i, j in pairs]
        return y

    def scalars(self, name):
        """Yield (global_index, basis_matrix_or_None) for one group."""
        kind, k = self.group_spec(name)
        lo, _ = self.offsets[name]
        if kind == "vec":
            for i in range(k):
                yield lo + i, None
            return
        pairs = _sym_pairs(k) if kind == "sym" else _skew_pairs(k)
        for w, (i, j) in enumerate(pairs):
            B = np.zeros((k, k))
            B[i, j] = 1.0
            if i != j:
                B[j, i] = 1.0 if kind == "sym" else -1.0
            yield lo + w, B


@dataclass
class LmiBlock:
    """One affine matrix constraint: value(y) = F0 + sum_r y_r F[r].

    orientation 'pos' demands positive semidefiniteness, 'neg' negative.
    Strict blocks additionally carry the maximized margin t (>= t*I resp.
    <= -t*I); non-strict blocks are required at zero. keep, when set, lists
    the indices that remain after forced-zero reduction (a solver hint; the
    stored F/F0 are always the full matrices).
    """

    name: str
    size: int
    orientation: str
    strict: bool
    F0: np.ndarray
    F: np.ndarray
    keep: list = None
    eigenvalue: float = None


@dataclass
class FeasibilityProblem:
    layout: DecisionLayout
    blocks: list
    equalities: np.ndarray  # (k, p), homogeneous rows A y = 0
    delta_pos: float
    delta_neg: float
    meta: dict


def evaluate_blocks(layout, blocks, y):
    """Numeric block values at a packed decision vector."""
    y = np.asarray(y, dtype=float)
    if y.shape != (layout.size,):
        raise ValueError(f"decision vector must have length {layout.size}")
    return [b.F0 + np.tensordot(y, b.F, axes=1) for b in blocks]


def _theorem_layout(n, l, iota, kyp=None):
    groups = [(f"L{j}", "sym", n) for j in range(1, l + 1)]
    groups.append(("tau", "vec", iota))
    if kyp is not None:
        s1, s2 = kyp
        groups += [("D1", "sym", s1), ("G1", "skew", s1),
                   ("D2", "sym", s2), ("G2", "skew", s2)]
    return DecisionLayout(groups=tuple(groups))


def decision_variables(layout, y):
    """Unpack y into L (list), tau, and KYP multipliers when present."""
    names = {name for name, _, _ in layout.groups}
    out = {"L": [], "tau": layout.unpack(y, "tau")}
    j = 1
    while f"L{j}" in names:
        out["L"].append(layout.unpack(y, f"L{j}"))
        j += 1
    for extra in ("D1", "G1", "D2", "G2"):
        if extra in names:
            out[extra] = layout.unpack(y, extra)
    return out


def _check_model_shapes(basis, A_a, A_b):
    A_a = np.asarray(A_a, dtype=float)
    A_b = np.asarray(A_b, dtype=float)
    want = (basis.n, basis.rho)
    if A_a.shape != want or A_b.shape != want:
        raise ValueError(f"agent/coupling matrices must have shape {want}")
    return A_a, A_b


def _decrease_inner_parts(basis, A_a, A_b, epsilon):
    """Per L-scalar projected coefficient matrices of the decrease family.

    For each symmetric scalar B of size n the decrease block gains
    lambda^j * inner_a[B] + lambda^(j+1) * inner_b[B] from L_j, and each
    slack scalar contributes the lambda-free projected kernel matrix.
    """
    Gamma = selector_gamma(basis)
    Pi = selector_pi(basis)
    inner_a, inner_b = [], []
    for i, j in _sym_pairs(basis.n):
        B = np.zeros((basis.n, basis.n))
        B[i, j] = B[j, i] = 1.0
        Ta = Gamma.T @ B @ A_a
        Tb = Gamma.T @ B @ A_b
        inner_a.append(Pi @ (Ta + Ta.T + epsilon * (Gamma.T @ B @ Gamma)) @ Pi.T)
        inner_b.append(Pi @ (Tb + Tb.T) @ Pi.T)
    return inner_a, inner_b


def _projected_slack(basis, slack):
    Pi = selector_pi(basis)
    return [Pi @ Q @ Pi.T for Q in np.asarray(slack.matrices, dtype=float)]


def lyapunov_positivity_matrix(L_list, lam):
    """sum_j lambda^j L_j (j starting at 1); must be positive definite."""
    L_list = [np.asarray(L, dtype=float) for L in L_list]
    out = np.zeros_like(L_list[0])
    for j, L in enumerate(L_list, start=1):
        out += lam ** j * L
    return out


def decrease_matrix(basis, slack, A_a, A_b, L_list, tau, lam, epsilon, project=True):
    """Decrease-condition matrix at one eigenvalue; negative semidefinite iff ok.

    project=False returns the unprojected rho x rho form (constant monomial
    row retained), which the slack matrices leave invariant in the quadratic
    sense: they contribute exactly zero to chi^T M chi.
    """
    A_a, A_b = _check_model_shapes(basis, A_a, A_b)
    Gamma = selector_gamma(basis)
    M = np.zeros((basis.rho, basis.rho))
    tau = np.asarray(tau, dtype=float)
    if len(tau):
        M += np.tensordot(tau, np.asarray(slack.matrices, dtype=float), axes=1)
    for j, L in enumerate(L_list, start=1):
        L = np.asarray(L, dtype=float)
        Ta = Gamma.T @ L @ A_a
        Tb = Gamma.T @ L @ A_b
        M += lam ** j * (Ta + Ta.T + epsilon * (Gamma.T @ L @ Gamma))
        M += lam ** (j + 1) * (Tb + Tb.T)
    if project:
        Pi = selector_pi(basis)
        M = Pi @ M @ Pi.T
    return M


def assemble_theorem1(basis, slack, A_a, A_b, spectral, l, epsilon=1.0,
                      delta_pos=1e-6, delta_neg=0.0):
    """Per-eigenvalue feasibility system over L_1..L_l and tau.

    One strict positivity block and one non-strict decrease block per
    distinct nonzero pattern eigenvalue; the slack multipliers are shared
    across eigenvalues.
    """
    A_a, A_b = _check_model_shapes(basis, A_a, A_b)
    if l < 1:
        raise ValueError("need l >= 1")
    N = spectral.N
    if l > N:
        warnings.warn(f"l={l} exceeds agent count N={N}; extra pattern powers "
                      "are linearly dependent", UserWarning, stacklevel=2)
    n = basis.n
    layout = _theorem_layout(n, l, slack.iota)
    p = layout.size
    inner_a, inner_b = _decrease_inner_parts(basis, A_a, A_b, epsilon)
    slack_proj = _projected_slack(basis, slack)
    r1 = basis.rho - 1

    blocks = []
    for lam in spectral.distinct_nonzero:
        Fpos = np.zeros((p, n, n))
        Fneg = np.zeros((p, r1, r1))
        for j in range(1, l + 1):
            base = layout.offsets[f"L{j}"][0]
            for w, (i, jj) in enumerate(_sym_pairs(n)):
                B = np.zeros((n, n))
                B[i, jj] = B[jj, i] = 1.0
                Fpos[base + w] += lam ** j * B
                Fneg[base + w] += lam ** j * inner_a[w] + lam ** (j + 1) * inner_b[w]
        tbase = layout.offsets["tau"][0]
        for k, Qp in enumerate(slack_proj):
            Fneg[tbase + k] += Qp
        blocks.append(LmiBlock(name=f"positivity[{lam:.10g}]", size=n,
                               orientation="pos", strict=True,
                               F0=np.zeros((n, n)), F=Fpos, eigenvalue=lam))
        blocks.append(LmiBlock(name=f"decrease[{lam:.10g}]", size=r1,
                               orientation="neg", strict=False,
                               F0=np.zeros((r1, r1)), F=Fneg, eigenvalue=lam))

    meta = {
        "method": "theorem1",
        "n": n,
        "d": basis.d,
        "l": l,
        "epsilon": epsilon,
        "N": N,
        "eigenvalues": [float(v) for v in spectral.distinct_nonzero],
    }
    return FeasibilityProblem(layout=layout, blocks=blocks,
                              equalities=np.zeros((0, p)),
                              delta_pos=delta_pos, delta_neg=delta_neg,
                              meta=meta)


@dataclass
class KypRealization:
    """Shift realization generating stacked powers of the interval parameter.

    phi(theta) stacks theta^m I_nu .. theta^0 I_nu; with psi(theta) the lower
    m blocks, the lifted stack [I 0; A B] maps phi to [theta*psi; psi].
    [C D] is the identity splitting of phi into its psi part and its constant
    block.
    """

    nu: int
    m: int
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def w2(self):
        s = self.nu * self.m
        top = np.hstack([np.eye(s), np.zeros((s, self.nu))])
        bottom = np.hstack([self.A, self.B])
        return np.vstack([top, bottom])


def kyp_realization(nu, l):
    """Realization of order m = (l+2)//2 for block size nu."""
    if nu < 1 or l < 1:
        raise ValueError("need nu >= 1 and l >= 1")
    m = (l + 2) // 2
    U = np.eye(m, k=1)
    A = np.kron(U, np.eye(nu))
    B = np.kron(np.eye(m)[:, -1:], np.eye(nu))
    C = np.kron(np.vstack([np.eye(m), np.zeros((1, m))]), np.eye(nu))
    D = np.kron(np.vstack([np.zeros((m, 1)), np.ones((1, 1))]), np.eye(nu))
    return KypRealization(nu=nu, m=m, A=A, B=B, C=C, D=D)


def kyp_stacked_powers(nu, m, theta):
    """phi(theta): theta^m I, ..., theta^0 I stacked; shape ((m+1)nu, nu)."""
    return np.vstack([theta ** (m - a) * np.eye(nu) for a in range(m + 1)])


def kyp_phi_from_realization(real, theta):
    """Rebuild phi(theta) from the realization state equation.

    psi solves psi = theta * A @ psi + B, so psi = (I - theta A)^-1 B stacks
    theta^(m-1) .. theta^0; phi = C (theta psi) + D appends the constant block.
    """
    s = real.nu * real.m
    psi = np.linalg.solve(np.eye(s) - theta * real.A, real.B)
    return real.C @ (theta * psi) + real.D


def polynomial_to_gram(coeffs, m):
    """Gram lift of a matrix polynomial: phi^T M phi = sum_k theta^k C_k.

    coeffs[k] is the (nu, nu) coefficient of theta^k or None; each
    coefficient is shared equally across the anti-diagonal block positions
    (a, b) with a + b = 2m - k.
    """
    mats = [np.asarray(C, dtype=float) for C in coeffs if C is not None]
    if not mats:
        raise ValueError("need at least one coefficient")
    nu = mats[0].shape[0]
    if len(coeffs) > 2 * m + 1:
        raise ValueError("degree exceeds 2m")
    M = np.zeros(((m + 1) * nu, (m + 1) * nu))
    for k, C in enumerate(coeffs):
        if C is None:
            continue
        _gram_add(M, np.asarray(C, dtype=float), k, m, nu)
    return M


def _gram_add(M, C, k, m, nu):
    pos = [(a, 2 * m - k - a) for a in range(m + 1) if 0 <= 2 * m - k - a <= m]
    share = C / len(pos)
    for a, b in pos:
        M[a * nu:(a + 1) * nu, b * nu:(b + 1) * nu] += share


def _multiplier_add(M, B, kind, lo, hi, nu, m):
    """Add the KYP multiplier quadratic W2^T Theta(B) W2 in embedded form.

    The lifted stack maps phi to [theta*psi; psi], whose components are the
    row blocks 0..m-1 and 1..m of phi, so the Theta blocks embed at offsets
    0 and nu without any matrix products.
    """
    s = nu * m
    if kind == "sym":
        sig = lo + hi
        M[0:s, 0:s] += -2.0 * B
        M[0:s, nu:nu + s] += sig * B
        M[nu:nu + s, 0:s] += sig * B
        M[nu:nu + s, nu:nu + s] += -2.0 * lo * hi * B
    else:
        M[0:s, nu:nu + s] += B
        M[nu:nu + s, 0:s] -= B


def kyp_pencil(M, D, G, lo, hi, nu, m):
    """M + W2^T Theta(D, G) W2 for explicit multipliers (test/verify aid)."""
    out = np.array(M, dtype=float, copy=True)
    _multiplier_add(out, np.asarray(D, dtype=float), "sym", lo, hi, nu, m)
    _multiplier_add(out, np.asarray(G, dtype=float), "skew", lo, hi, nu, m)
    return out


def theorem2_gram_matrices(basis, slack, A_a, A_b, l, epsilon, L_list, tau):
    """The two gram-lifted polynomial matrices for explicit decisions.

    Returns (M1, M2) with phi_n^T M1 phi_n = -sum_j theta^j L_j and
    phi^T M2 phi the projected decrease polynomial (slack at power zero).
    """
    A_a, A_b = _check_model_shapes(basis, A_a, A_b)
    m = (l + 2) // 2
    n = basis.n
    r1 = basis.rho - 1
    Gamma = selector_gamma(basis)
    Pi = selector_pi(basis)
    coeffs1 = [None] * (2 * m + 1)
    for j, L in enumerate(L_list, start=1):
        L = np.asarray(L, dtype=float)
        prev = coeffs1[j] if coeffs1[j] is not None else np.zeros((n, n))
        coeffs1[j] = prev - L
    coeffs2 = [np.zeros((r1, r1)) for _ in range(2 * m + 1)]
    tau = np.asarray(tau, dtype=float)
    if len(tau):
        coeffs2[0] += Pi @ np.tensordot(tau, np.asarray(slack.matrices, float), axes=1) @ Pi.T
    for j, L in enumerate(L_list, start=1):
        L = np.asarray(L, dtype=float)
        Ta = Gamma.T @ L @ A_a
        Tb = Gamma.T @ L @ A_b
        coeffs2[j] += Pi @ (Ta + Ta.T + epsilon * (Gamma.T @ L @ Gamma)) @ Pi.T
        coeffs2[j + 1] += Pi @ (Tb + Tb.T) @ Pi.T
    return polynomial_to_gram(coeffs1, m), polynomial_to_gram(coeffs2, m)


def _theorem1_negative_family(basis, slack, A_a, A_b, layout, l, epsilon, lam):
    """Decrease-family coefficient tensor at a fixed eigenvalue."""
    inner_a, inner_b = _decrease_inner_parts(basis, A_a, A_b, epsilon)
    slack_proj = _projected_slack(basis, slack)
    r1 = basis.rho - 1
    F = np.zeros((layout.size, r1, r1))
    for j in range(1, l + 1):
        base = layout.offsets[f"L{j}"][0]
        for w in range(_sym_dim(basis.n)):
            F[base + w] += lam ** j * inner_a[w] + lam ** (j + 1) * inner_b[w]
    tbase = layout.offsets["tau"][0]
    for k, Qp in enumerate(slack_proj):
        F[tbase + k] += Qp
    return F


def assemble_theorem2(basis, slack, A_a, A_b, lambda_min, lambda_max, l,
                      epsilon=1.0, delta_pos=1e-6, delta_neg=0.0):
    """Interval feasibility system of size independent of the agent count.

    Covers every pattern eigenvalue in [lambda_min, lambda_max]; refuses
    intervals containing zero (the consensus direction must stay excluded).
    Forced-zero structure of the decrease family is detected at the interval
    midpoint and attached as equalities plus keep hints, because the KYP
    cross terms hide that structure from generic diagonal inspection.
    """
    A_a, A_b = _check_model_shapes(basis, A_a, A_b)
    if l < 1:
        raise ValueError("need l >= 1")
    lo, hi = float(lambda_min), float(lambda_max)
    if not (lo <= hi):
        raise ValueError("need lambda_min <= lambda_max")
    if lo <= 0.0 <= hi:
        raise ValueError("interval [lambda_min, lambda_max] must exclude zero")
    n = basis.n
    r1 = basis.rho - 1
    m = (l + 2) // 2
    s1, s2 = n * m, r1 * m
    S1, S2 = n * (m + 1), r1 * (m + 1)
    layout = _theorem_layout(n, l, slack.iota, kyp=(s1, s2))
    p = layout.size

    inner_a, inner_b = _decrease_inner_parts(basis, A_a, A_b, epsilon)
    slack_proj = _projected_slack(basis, slack)

    # pencil 1: gram lift of -sum theta^j L_j plus multiplier (D1, G1)
    F1 = np.zeros((p, S1, S1))
    for j in range(1, l + 1):
        base = layout.offsets[f"L{j}"][0]
        for w, (i, jj) in enumerate(_sym_pairs(n)):
            B = np.zeros((n, n))
            B[i, jj] = B[jj, i] = 1.0
            _gram_add(F1[base + w], -B, j, m, n)
    for g, B in layout.scalars("D1"):
        _multiplier_add(F1[g], B, "sym", lo, hi, n, m)
    for g, B in layout.scalars("G1"):
        _multiplier_add(F1[g], B, "skew", lo, hi, n, m)

    # pencil 2: gram lift of the decrease polynomial plus multiplier (D2, G2)
    F2 = np.zeros((p, S2, S2))
    for j in range(1, l + 1):
        base = layout.offsets[f"L{j}"][0]
        for w in range(_sym_dim(n)):
            _gram_add(F2[base + w], inner_a[w], j, m, r1)
            _gram_add(F2[base + w], inner_b[w], j + 1, m, r1)
    tbase = layout.offsets["tau"][0]
    for k, Qp in enumerate(slack_proj):
        _gram_add(F2[tbase + k], Qp, 0, m, r1)
    for g, B in layout.scalars("D2"):
        _multiplier_add(F2[g], B, "sym", lo, hi, r1, m)
    for g, B in layout.scalars("G2"):
        _multiplier_add(F2[g], B, "skew", lo, hi, r1, m)

    # multiplier sign blocks (identity coefficient tensors)
    FD1 = np.zeros((p, s1, s1))
    for g, B in layout.scalars("D1"):
        FD1[g] += B
    FD2 = np.zeros((p, s2, s2))
    for g, B in layout.scalars("D2"):
        FD2[g] += B

    # forced structure: reduce the per-eigenvalue decrease family at the
    # interval midpoint, then lift the removed slots through the gram stack
    mid = 0.5 * (lo + hi)
    Fmid = _theorem1_negative_family(basis, slack, A_a, A_b, layout, l, epsilon, mid)
    keeps, _, _ = forced_zero_cascade([(np.zeros((r1, r1)), Fmid, None)], p)
    removed = sorted(set(range(r1)) - set(keeps[0]))

    seed = []
    if removed:
        lifted = {a * r1 + s for a in range(m + 1) for s in removed}
        for r in sorted(lifted):
            for c in range(S2):
                seed.append((F2[:, r, c], 0.0))
        stacked = {a * r1 + s for a in range(m) for s in removed}
        for g, B in layout.scalars("D2"):
            i, j = np.argwhere(B != 0.0)[0]
            if i in stacked or j in stacked:
                e = np.zeros(p)
                e[g] = 1.0
                seed.append((e, 0.0))
    _, rows, _ = forced_zero_cascade([], p, seed_rows=seed)
    if rows:
        equalities = np.array([r[0] for r in rows])
        equalities /= np.linalg.norm(equalities, axis=1, keepdims=True)
    else:
        equalities = np.zeros((0, p))

    keep2 = [r for r in range(S2) if (r % r1) not in removed]
    keepD2 = [r for r in range(s2) if (r % r1) not in removed]

    blocks = [
        LmiBlock(name="interval-positivity", size=S1, orientation="neg",
                 strict=True, F0=np.zeros((S1, S1)), F=F1),
        LmiBlock(name="interval-decrease", size=S2, orientation="neg",
                 strict=False, F0=np.zeros((S2, S2)), F=F2,
                 keep=keep2 if removed else None),
        LmiBlock(name="multiplier-pos-1", size=s1, orientation="pos",
                 strict=True, F0=np.zeros((s1, s1)), F=FD1),
        LmiBlock(name="multiplier-pos-2", size=s2, orientation="pos",
                 strict=False, F0=np.zeros((s2, s2)), F=FD2,
                 keep=keepD2 if removed else None),
    ]
    meta = {
        "method": "theorem2",
        "n": n,
        "d": basis.d,
        "l": l,
        "m": m,
        "epsilon": epsilon,
        "lambda_min": lo,
        "lambda_max": hi,
        "removed_slots": removed,
    }
    return FeasibilityProblem(layout=layout, blocks=blocks,
                              equalities=equalities,
                              delta_pos=delta_pos, delta_neg=delta_neg,
                              meta=meta)
