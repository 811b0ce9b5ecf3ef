"""Feasibility solving, certificates, verification, and SDPA interchange.

solve() maximizes a uniform margin t over the strict blocks of an assembled
problem, after detecting forced-zero structure that would otherwise leave the
feasible set without interior. Certificates store the raw decision variables;
verify_certificate re-derives the per-eigenvalue conditions from them alone,
with eigenvalues from the in-repo Jacobi solver, sharing no code path with
the optimizer.
"""

import json
import time
from dataclasses import dataclass, field

import numpy as np

from ._jacobi import max_eigenvalue, min_eigenvalue
from ._span import forced_zero_cascade
from .lmi import decision_variables, decrease_matrix, lyapunov_positivity_matrix

SCHEMA_VERSION = 1


@dataclass
class Certificate:
    method: str
    n: int
    d: int
    l: int
    epsilon: float
    L: list                 # l matrices as nested lists
    tau: list
    achieved_margin: float
    required_margin: float
    eigenvalues: list = None      # distinct eigenvalues used (per-eigenvalue route)
    lambda_min: float = None      # interval route
    lambda_max: float = None
    m: int = None
    D1: list = None
    G1: list = None
    D2: list = None
    G2: list = None
    normalizations: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    model_hash: str = None
    pattern_hash: str = None
    schema_version: int = SCHEMA_VERSION

    def to_dict(self):
        out = {}
        for key, val in self.__dict__.items():
            if val is None:
                continue
            out[key] = val
        return out

    @classmethod
    def from_dict(cls, data):
        known = {f for f in cls.__dataclass_fields__}
        kwargs = {k: v for k, v in data.items() if k in known}
        return cls(**kwargs)


def save_certificate(cert, path):
    with open(path, "w") as fh:
        json.dump(cert.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_certificate(path):
    with open(path) as fh:
        data = json.load(fh)
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported certificate schema_version "
                         f"{data.get('schema_version')!r}")
    return Certificate.from_dict(data)


@dataclass
class SolveResult:
    status: str             # 'certified' | 'infeasible' | 'unknown'
    margin: float
    y: np.ndarray
    certificate: Certificate
    evidence: str
    solver_stats: dict
    normalizations: dict


def _block_scale(block):
    s = max(float(np.max(np.abs(block.F0))), float(np.max(np.abs(block.F))))
    return max(s, 1e-12)


def _structural_analysis(problem):
    """Forced-zero reduction; returns (keeps, equality_rows, strict_hit).

    keeps maps block index -> surviving index list for non-strict blocks;
    equality_rows is an independent list of (vector, const); strict_hit
    names a strict-block diagonal slot forced to zero, if any.
    """
    p = problem.layout.size
    seeds = [(row, 0.0) for row in np.asarray(problem.equalities, dtype=float)]
    families = []
    nonstrict = []
    for bi, b in enumerate(problem.blocks):
        if not b.strict:
            s = _block_scale(b)
            families.append((b.F0 / s, b.F / s, b.keep))
            nonstrict.append(bi)
    keeps_list, rows, tracker = forced_zero_cascade(families, p, seed_rows=seeds)
    keeps = {bi: kept for bi, kept in zip(nonstrict, keeps_list)}
    strict_hit = None
    for b in problem.blocks:
        if not b.strict:
            continue
        s = _block_scale(b)
        for slot in range(b.size):
            v = np.concatenate([b.F[:, slot, slot] / s, [b.F0[slot, slot] / s]])
            if tracker.contains(v):
                strict_hit = (b.name, slot)
                break
        if strict_hit:
            break
    return keeps, rows, strict_hit


def _build_certificate(problem, y, margin, normalizations, solver_stats,
                       model_hash=None, pattern_hash=None):
    meta = problem.meta
    vals = decision_variables(problem.layout, y)
    cert = Certificate(
        method=meta.get("method", "theorem1"),
        n=meta["n"],
        d=meta["d"],
        l=meta["l"],
        epsilon=meta["epsilon"],
        L=[np.asarray(L).tolist() for L in vals["L"]],
        tau=np.asarray(vals["tau"]).tolist(),
        achieved_margin=float(margin),
        required_margin=float(problem.delta_pos),
        normalizations={k: float(v) for k, v in normalizations.items()},
        solver=solver_stats,
        model_hash=model_hash,
        pattern_hash=pattern_hash,
    )
    if cert.method == "theorem2":
        cert.lambda_min = float(meta["lambda_min"])
        cert.lambda_max = float(meta["lambda_max"])
        cert.m = int(meta["m"])
        for name in ("D1", "G1", "D2", "G2"):
            setattr(cert, name, np.asarray(vals[name]).tolist())
    else:
        cert.eigenvalues = [float(v) for v in meta["eigenvalues"]]
    return cert


def solve(problem, solver="clarabel", max_iters=None, tol=None, seed=None,
          box=1e3, verbose=False, model_hash=None, pattern_hash=None):
    """Maximize the strict-block margin; classify the outcome.

    The margin problem is homogeneous (y = 0, t = 0 always feasible), so a
    solver-level infeasibility cannot occur; an optimal margin below the
    required threshold is reported as infeasible with the margin supremum as
    evidence, a structurally forced strict diagonal short-circuits to
    infeasible before any solver call, and inaccurate solver exits map to
    unknown. The decision box widens once if it binds a sub-margin optimum.
    """
    import cvxpy as cp

    keeps, rows, strict_hit = _structural_analysis(problem)
    if strict_hit is not None:
        name, slot = strict_hit
        return SolveResult(
            status="infeasible", margin=float("-inf"), y=None, certificate=None,
            evidence=(f"structural: diagonal slot {slot} of strict block "
                      f"'{name}' is forced to zero by the equality structure"),
            solver_stats={"solver": "structural", "iterations": 0},
            normalizations={},
        )

    p = problem.layout.size
    normalizations = {b.name: _block_scale(b) for b in problem.blocks}
    if rows:
        eq_rows = np.array([r for r, _ in rows])
        eq_rows = eq_rows / np.linalg.norm(eq_rows, axis=1, keepdims=True)
    else:
        eq_rows = np.zeros((0, p))

    current_box = float(box)
    for attempt in range(2):
        y = cp.Variable(p)
        t = cp.Variable()
        cons = [y <= current_box, y >= -current_box, t <= 1.0]
        if len(eq_rows):
            cons.append(eq_rows @ y == 0)
        for bi, b in enumerate(problem.blocks):
            scale = normalizations[b.name]
            kept = keeps.get(bi, list(range(b.size)))
            k = len(kept)
            if k == 0:
                continue
            Fk = b.F[:, kept][:, :, kept] / scale
            F0k = b.F0[np.ix_(kept, kept)] / scale
            M = cp.reshape(Fk.reshape(p, k * k).T @ y, (k, k), order="C") + F0k
            M = 0.5 * (M + M.T)
            sign = 1.0 if b.orientation == "pos" else -1.0
            if b.strict:
                cons.append(sign * M - t * np.eye(k) >> 0)
            else:
                cons.append(sign * M - problem.delta_neg * np.eye(k) >> 0)
        prob = cp.Problem(cp.Maximize(t), cons)

        stats = {"solver": None, "iterations": None, "solve_time": None,
                 "box": current_box, "seed": seed}
        t0 = time.perf_counter()
        try:
            opts = {}
            if max_iters:
                opts["max_iter"] = int(max_iters)
            prob.solve(solver=cp.CLARABEL, verbose=verbose, **opts)
            stats["solver"] = "clarabel"
        except cp.error.SolverError:
            scs_opts = {"eps_abs": 1e-9, "eps_rel": 1e-9,
                        "max_iters": int(max_iters) if max_iters else 200000}
            prob.solve(solver=cp.SCS, verbose=verbose, **scs_opts)
            stats["solver"] = "scs"
        stats["solve_time"] = time.perf_counter() - t0
        if prob.solver_stats is not None:
            stats["iterations"] = prob.solver_stats.num_iters
        stats["status_raw"] = prob.status

        if prob.status == "optimal":
            tstar = float(t.value)
            yval = np.asarray(y.value, dtype=float)
            if tstar >= problem.delta_pos:
                cert = _build_certificate(problem, yval, tstar, normalizations,
                                          stats, model_hash, pattern_hash)
                return SolveResult(status="certified", margin=tstar, y=yval,
                                   certificate=cert, evidence="",
                                   solver_stats=stats,
                                   normalizations=normalizations)
            box_active = float(np.max(np.abs(yval))) >= 0.999 * current_box
            if box_active and attempt == 0:
                current_box *= 100.0
                continue
            if tstar < problem.delta_pos - 1e-9:
                return SolveResult(
                    status="infeasible", margin=tstar, y=yval, certificate=None,
                    evidence=(f"margin supremum {tstar:.3e} is below the "
                              f"required {problem.delta_pos:.3e}"),
                    solver_stats=stats, normalizations=normalizations)
            return SolveResult(
                status="unknown", margin=tstar, y=yval, certificate=None,
                evidence=(f"optimal margin {tstar:.3e} is within solver "
                          f"tolerance of the required {problem.delta_pos:.3e}"),
                solver_stats=stats, normalizations=normalizations)
        if prob.status == "optimal_inaccurate":
            tstar = float(t.value) if t.value is not None else float("nan")
            return SolveResult(
                status="unknown", margin=tstar, y=None, certificate=None,
                evidence=f"solver stopped at an inaccurate optimum t={tstar:.3e}",
                solver_stats=stats, normalizations=normalizations)
        return SolveResult(
            status="unknown", margin=float("nan"), y=None, certificate=None,
            evidence=f"unexpected solver status '{prob.status}' on a problem "
                     "that is feasible by construction",
            solver_stats=stats, normalizations=normalizations)


@dataclass
class VerificationReport:
    passed: bool
    tol: float
    checks: list
    message: str

    def to_dict(self):
        return {"passed": self.passed, "tol": self.tol,
                "checks": self.checks, "message": self.message}


def _check(checks, name, value, bound, ok):
    checks.append({"name": name, "value": float(value), "bound": float(bound),
                   "ok": bool(ok)})
    return ok


def verify_certificate(cert, basis, slack, A_a, A_b, spectral, tol_verify=1e-7):
    """Independent algebraic recheck of a certificate at the true eigenvalues.

    Rebuilds the positivity and decrease matrices from the certificate's L
    and tau alone, for every distinct nonzero pattern eigenvalue, and bounds
    their spectra with the in-repo Jacobi solver. Positivity must clear a
    small positive floor (tol_verify relative), which also rejects the
    all-zero certificate; the decrease side must stay below the matching
    tolerance. Multiplier structure (when present) is checked for sign and
    skewness.
    """
    checks = []
    ok_all = True

    L = [np.asarray(M, dtype=float) for M in cert.L]
    tau = np.asarray(cert.tau, dtype=float)
    arrays = L + [tau]
    for name in ("D1", "G1", "D2", "G2"):
        val = getattr(cert, name, None)
        if val is not None:
            arrays.append(np.asarray(val, dtype=float))
    finite = all(np.all(np.isfinite(a)) for a in arrays)
    ok_all &= _check(checks, "finite-entries", 0.0 if finite else 1.0, 0.5, finite)
    shapes = (len(L) == cert.l and all(M.shape == (cert.n, cert.n) for M in L)
              and len(tau) == slack.iota)
    ok_all &= _check(checks, "decision-shapes", 0.0 if shapes else 1.0, 0.5, shapes)
    if not (finite and shapes):
        return VerificationReport(passed=False, tol=tol_verify, checks=checks,
                                  message="malformed certificate")

    sym_ok = True
    for M in L:
        asym = float(np.max(np.abs(M - M.T)))
        bound = 1e-9 * max(1.0, float(np.max(np.abs(M))))
        sym_ok &= asym <= bound
        ok_all &= _check(checks, "L-symmetric", asym, bound, asym <= bound)
    if not sym_ok:
        return VerificationReport(passed=False, tol=tol_verify, checks=checks,
                                  message="asymmetric certificate")

    for lam in spectral.distinct_nonzero:
        P = lyapunov_positivity_matrix(L, lam)
        floor = tol_verify * max(1.0, float(np.max(np.abs(P))))
        mn = min_eigenvalue(P)
        ok_all &= _check(checks, f"positivity[{lam:.10g}]", mn, floor, mn >= floor)
        M9 = decrease_matrix(basis, slack, A_a, A_b, L, tau, lam,
                             cert.epsilon, project=True)
        cap = tol_verify * max(1.0, float(np.max(np.abs(M9))))
        mx = max_eigenvalue(M9)
        ok_all &= _check(checks, f"decrease[{lam:.10g}]", mx, cap, mx <= cap)

    if cert.method == "theorem2":
        lo, hi = float(cert.lambda_min), float(cert.lambda_max)
        covered = (lo <= spectral.lambda_min + tol_verify * max(1.0, abs(lo))
                   and spectral.lambda_max <= hi + tol_verify * max(1.0, abs(hi)))
        ok_all &= _check(checks, "interval-covers-spectrum",
                         0.0 if covered else 1.0, 0.5, covered)
        for name in ("D1", "D2"):
            D = np.asarray(getattr(cert, name), dtype=float)
            tolD = tol_verify * max(1.0, float(np.max(np.abs(D))))
            mn = min_eigenvalue(0.5 * (D + D.T))
            ok_all &= _check(checks, f"{name}-nonnegative", mn, -tolD, mn >= -tolD)
        for name in ("G1", "G2"):
            G = np.asarray(getattr(cert, name), dtype=float)
            skew = float(np.max(np.abs(G + G.T)))
            tolG = 1e-9 * max(1.0, float(np.max(np.abs(G))))
            ok_all &= _check(checks, f"{name}-skew", skew, tolG, skew <= tolG)

    failed = [c["name"] for c in checks if not c["ok"]]
    message = "all checks passed" if ok_all else "failed: " + ", ".join(failed)
    return VerificationReport(passed=bool(ok_all), tol=tol_verify,
                              checks=checks, message=message)


def _sdpa_float(v):
    return f"{v:.17g}"


def export_sdpa(problem, path):
    """Write the margin problem in SDPA sparse (.dat-s) format.

    Decision order is the packed vector followed by the margin t (so
    m = p + 1); the objective minimizes -t. Blocks appear in problem order,
    oriented so each required cone is 'positive semidefinite'; equalities
    become a paired diagonal block; a final 1x1 block caps t at 1. The full
    unreduced matrices are written.
    """
    p = problem.layout.size
    m = p + 1
    eq = np.asarray(problem.equalities, dtype=float)
    sizes = []
    for b in problem.blocks:
        sizes.append(b.size)
    if len(eq):
        sizes.append(-2 * len(eq))  # negative size = diagonal block
    sizes.append(-1)                # margin cap block
    lines = []
    lines.append(f"{m}")
    lines.append(f"{len(sizes)}")
    lines.append(" ".join(str(s) for s in sizes))
    c = ["0"] * p + ["-1"]
    lines.append(" ".join(c))

    def emit(mat_no, blk_no, i, j, val):
        if val != 0.0:
            lines.append(f"{mat_no} {blk_no} {i + 1} {j + 1} {_sdpa_float(val)}")

    blk = 0
    for b in problem.blocks:
        blk += 1
        sign = 1.0 if b.orientation == "pos" else -1.0
        # F0 term: sum_k x_k F_k - F0' >= 0 with F0' = -sign*F0 (+ delta shift)
        F0p = -sign * b.F0
        if not b.strict and problem.delta_neg:
            F0p = F0p + problem.delta_neg * np.eye(b.size)
        for i in range(b.size):
            for j in range(i, b.size):
                emit(0, blk, i, j, F0p[i, j])
        for r in range(p):
            Fr = sign * b.F[r]
            for i in range(b.size):
                for j in range(i, b.size):
                    emit(r + 1, blk, i, j, Fr[i, j])
        if b.strict:
            for i in range(b.size):
                emit(m, blk, i, i, -1.0)
    if len(eq):
        blk += 1
        k = len(eq)
        for r in range(p):
            for i in range(k):
                emit(r + 1, blk, i, i, eq[i, r])
                emit(r + 1, blk, k + i, k + i, -eq[i, r])
    blk += 1
    emit(0, blk, 0, 0, -1.0)
    emit(m, blk, 0, 0, -1.0)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_sdpa(path):
    """Parse a .dat-s file back into dense (c, F0s, Fs) per block."""
    with open(path) as fh:
        raw = [ln.strip() for ln in fh if ln.strip() and not ln.startswith(('"', "*"))]
    m = int(raw[0].split()[0])
    nblocks = int(raw[1].split()[0])
    sizes = [int(tok) for tok in raw[2].replace(",", " ").split()]
    assert len(sizes) == nblocks
    c = np.array([float(tok) for tok in raw[3].replace(",", " ").split()])
    dims = [abs(s) for s in sizes]
    F0s = [np.zeros((k, k)) for k in dims]
    Fs = [[np.zeros((k, k)) for k in dims] for _ in range(m)]
    for ln in raw[4:]:
        toks = ln.split()
        mat, blk, i, j, val = (int(toks[0]), int(toks[1]), int(toks[2]),
                               int(toks[3]), float(toks[4]))
        tgt = F0s[blk - 1] if mat == 0 else Fs[mat - 1][blk - 1]
        tgt[i - 1, j - 1] = val
        tgt[j - 1, i - 1] = val
    return c, F0s, Fs


def import_sdpa_solution(path):
    """Extract the primal vector xVec from an SDPA result file."""
    with open(path) as fh:
        text = fh.read()
    marker = text.find("xVec")
    if marker >= 0:
        start = text.find("{", marker)
        end = text.find("}", start)
        if start < 0 or end < 0:
            raise ValueError("malformed xVec section")
        body = text[start + 1:end]
    else:
        start = text.find("{")
        end = text.find("}", start)
        if start < 0 or end < 0:
            raise ValueError("no solution vector found")
        body = text[start + 1:end]
    vals = [float(tok) for tok in body.replace(",", " ").split()]
    if not vals:
        raise ValueError("empty solution vector")
    return np.array(vals)


def certificate_from_solution(problem, x, model_hash=None, pattern_hash=None,
                              solver_name="sdpa"):
    """Certificate from an external solver's primal vector [y; t]."""
    x = np.asarray(x, dtype=float)
    p = problem.layout.size
    if x.shape != (p + 1,):
        raise ValueError(f"solution vector must have length {p + 1}")
    y, tstar = x[:p], float(x[p])
    if tstar < problem.delta_pos:
        raise ValueError(f"imported margin {tstar:.3e} is below the required "
                         f"{problem.delta_pos:.3e}")
    stats = {"solver": solver_name, "iterations": None}
    normalizations = {b.name: 1.0 for b in problem.blocks}
    return _build_certificate(problem, y, tstar, normalizations, stats,
                              model_hash, pattern_hash)
