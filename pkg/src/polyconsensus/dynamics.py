"""Polynomial formation dynamics, fixed-step integration, and witnesses.

A formation couples N identical agents: agent i evolves as
A_a chi(x_i) + sum_j P_ij A_b chi(x_j) with P the symmetric pattern matrix.
The module evaluates the vector field in batch, integrates with classical
RK4, and computes the certificate Lyapunov function and its decrease witness
along trajectories without ever forming Kronecker products.
"""

import json
from dataclasses import dataclass

import numpy as np

from .polybasis import build_basis, eval_chi


@dataclass
class PolynomialVectorField:
    """Polynomial map R^n -> R^n written as A @ chi(x)."""

    basis: object
    A: np.ndarray  # (n, rho)


def field_from_terms(n, terms, d=None):
    """Vector field from sparse terms {row (1-based), coeff, powers}.

    The basis degree defaults to the largest total degree present (at least
    one); pass d to embed into a fixed shared basis.
    """
    terms = list(terms)
    degrees = [sum(t["powers"]) for t in terms]
    if d is None:
        d = max([1] + degrees)
    if degrees and max(degrees) > d:
        raise ValueError(f"term degree {max(degrees)} exceeds basis degree {d}")
    basis = build_basis(n, d)
    A = np.zeros((n, basis.rho))
    for t in terms:
        row = int(t["row"])
        if not (1 <= row <= n):
            raise ValueError(f"term row {row} out of range 1..{n}")
        powers = tuple(int(pw) for pw in t["powers"])
        if len(powers) != n or any(pw < 0 for pw in powers):
            raise ValueError(f"term powers {powers} invalid for n={n}")
        A[row - 1, basis.index[powers]] += float(t["coeff"])
    return PolynomialVectorField(basis=basis, A=A)


@dataclass
class FormationModel:
    """N coupled copies of one polynomial agent over a pattern matrix."""

    name: str
    basis: object
    field_a: PolynomialVectorField
    field_b: PolynomialVectorField
    pattern: np.ndarray
    spectral: object
    model_hash: str = None
    pattern_hash: str = None

    @property
    def n(self):
        return self.basis.n

    @property
    def N(self):
        return self.pattern.shape[0]


_BUILTIN = {
    "vdp": {
        "schema_version": 1,
        "name": "vdp",
        "n": 2,
        "N": 10,
        "l": 6,
        "epsilon": 1.0,
        "c": 15.0,
        "pattern": {"cycle": 10},
        "agent_terms": [
            {"row": 1, "coeff": 1.0, "powers": [0, 1]},
            {"row": 2, "coeff": -1.0, "powers": [1, 0]},
            {"row": 2, "coeff": 0.5, "powers": [0, 1]},
            {"row": 2, "coeff": -0.5, "powers": [1, 1]},
        ],
        "coupling_terms": [
            {"row": 2, "coeff": -1.0, "powers": [1, 0]},
            {"row": 2, "coeff": -1.0, "powers": [0, 1]},
        ],
    },
    "lorenz": {
        "schema_version": 1,
        "name": "lorenz",
        "n": 3,
        "N": 8,
        "l": 6,
        "epsilon": 1.0,
        "c": 50.0,
        "pattern": {"cycle": 8},
        "agent_terms": [
            {"row": 1, "coeff": -10.0, "powers": [1, 0, 0]},
            {"row": 1, "coeff": 10.0, "powers": [0, 1, 0]},
            {"row": 2, "coeff": 28.0, "powers": [1, 0, 0]},
            {"row": 2, "coeff": -1.0, "powers": [0, 1, 0]},
            {"row": 2, "coeff": -1.0, "powers": [1, 0, 1]},
            {"row": 3, "coeff": -8.0 / 3.0, "powers": [0, 0, 1]},
            {"row": 3, "coeff": 1.0, "powers": [1, 1, 0]},
        ],
        "coupling_terms": [
            {"row": 1, "coeff": -1.0, "powers": [1, 0, 0]},
            {"row": 2, "coeff": -1.0, "powers": [0, 1, 0]},
            {"row": 3, "coeff": -1.0, "powers": [0, 0, 1]},
        ],
    },
}


def builtin_model(name):
    """Configuration dict for a built-in benchmark formation."""
    if name not in _BUILTIN:
        raise ValueError(f"unknown builtin model '{name}'; "
                         f"available: {sorted(_BUILTIN)}")
    return json.loads(json.dumps(_BUILTIN[name]))


def _rhs_states(model, X):
    C = eval_chi(model.basis, X)
    return C @ model.field_a.A.T + np.matmul(model.pattern, C) @ model.field_b.A.T


def rhs(model, x):
    """Formation vector field; x flat of length n*N (or shaped (N, n))."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite state")
    flat = x.ndim == 1
    X = x.reshape(model.N, model.n)
    out = _rhs_states(model, X)
    return out.reshape(-1) if flat else out


@dataclass
class SimulationTrace:
    times: np.ndarray
    states: np.ndarray        # (K, n*N)
    V: np.ndarray             # (K,) or None when no certificate given
    disagreement: np.ndarray  # (K,)
    diverged: bool
    meta: dict


DIVERGENCE_BOUND = 1e12


def rk4_simulate(model, x0, dt, t_final, certificate=None):
    """Classical fixed-step RK4 from a flat initial state.

    Aborts, returning the partial trace flagged diverged, as soon as any
    state entry exceeds 1e12 in magnitude or stops being finite.
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape != (model.n * model.N,):
        raise ValueError(f"initial state must have length {model.n * model.N}")
    if dt <= 0 or t_final <= 0:
        raise ValueError("need dt > 0 and t_final > 0")
    steps = int(round(t_final / dt))
    states = np.empty((steps + 1, x0.size))
    states[0] = x0
    diverged = False
    X = x0.reshape(model.N, model.n).copy()
    last = steps
    for k in range(steps):
        k1 = _rhs_states(model, X)
        k2 = _rhs_states(model, X + 0.5 * dt * k1)
        k3 = _rhs_states(model, X + 0.5 * dt * k2)
        k4 = _rhs_states(model, X + dt * k3)
        X = X + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(X)) or np.max(np.abs(X)) > DIVERGENCE_BOUND:
            diverged = True
            last = k
            break
        states[k + 1] = X.reshape(-1)
    states = states[:last + 1]
    times = np.arange(last + 1) * dt
    S3 = states.reshape(len(states), model.N, model.n)
    V = None
    if certificate is not None:
        L = [np.asarray(M, dtype=float) for M in certificate.L]
        V = _lyapunov_trajectory(L, model.pattern, S3)
    dis = _disagreement_trajectory(S3)
    meta = {"dt": dt, "t_final": t_final, "steps": steps, "diverged": diverged}
    return SimulationTrace(times=times, states=states, V=V,
                           disagreement=dis, diverged=diverged, meta=meta)


def _lyapunov_trajectory(L, P, S3):
    V = np.zeros(len(S3))
    M = S3
    for Lj in L:
        M = np.matmul(P, M)
        V += np.einsum("kia,ab,kib->k", M, Lj, S3)
    return V


def _lyapunov_gradient(L, P, S3):
    """Rows of (sum_j P^j (x) L_j) x per state; shape like S3."""
    G = np.zeros_like(S3)
    M = S3
    for Lj in L:
        M = np.matmul(P, M)
        G = G + M @ Lj
    return G


def lyapunov_value(certificate, pattern, x):
    """Certificate Lyapunov function at one flat formation state."""
    L = [np.asarray(M, dtype=float) for M in certificate.L]
    pattern = np.asarray(pattern, dtype=float)
    X = np.asarray(x, dtype=float).reshape(1, pattern.shape[0], -1)
    return float(_lyapunov_trajectory(L, pattern, X)[0])


def decrease_witness(model, certificate, states):
    """(V, Vdot) along recorded states.

    states: (K, n*N). Vdot is the exact derivative of V along the field,
    2 x^T (sum_j P^j (x) L_j) rhs(x), evaluated in batch; the certified
    inequality to check against is Vdot <= -epsilon*V up to rounding.
    """
    L = [np.asarray(M, dtype=float) for M in certificate.L]
    S3 = np.asarray(states, dtype=float).reshape(len(states), model.N, model.n)
    V = _lyapunov_trajectory(L, model.pattern, S3)
    G = _lyapunov_gradient(L, model.pattern, S3)
    R = _rhs_states(model, S3)
    Vdot = 2.0 * np.einsum("kia,kia->k", G, R)
    return V, Vdot


def disagreement(x, n, N):
    """Largest pairwise distance between agent states; x flat of length n*N."""
    X = np.asarray(x, dtype=float).reshape(N, n)
    worst = 0.0
    for i in range(N):
        for j in range(i + 1, N):
            worst = max(worst, float(np.linalg.norm(X[i] - X[j])))
    return worst


def _disagreement_trajectory(S3):
    K, N, _ = S3.shape
    worst = np.zeros(K)
    for i in range(N):
        for j in range(i + 1, N):
            d = np.linalg.norm(S3[:, i, :] - S3[:, j, :], axis=1)
            np.maximum(worst, d, out=worst)
    return worst


def write_trace(trace, path, n, N, extra_meta=None):
    """CSV trace plus a JSON sidecar describing the run.

    Header: t, x_1_1..x_N_n, V, disagreement. V is nan when the run had no
    certificate. The sidecar lands at <path>.meta.json.
    """
    K = len(trace.times)
    V = trace.V if trace.V is not None else np.full(K, np.nan)
    table = np.column_stack([trace.times, trace.states, V, trace.disagreement])
    cols = ["t"]
    cols += [f"x_{i}_{a}" for i in range(1, N + 1) for a in range(1, n + 1)]
    cols += ["V", "disagreement"]
    header = ", ".join(cols)
    np.savetxt(path, table, fmt="%.17g", delimiter=",", header=header,
               comments="")
    meta = dict(trace.meta)
    meta["schema_version"] = 1
    meta["rows"] = K
    if extra_meta:
        meta.update(extra_meta)
    with open(f"{path}.meta.json", "w") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return meta
