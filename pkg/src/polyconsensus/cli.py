"""Command line interface.

Exit codes: 0 certified (or requested action succeeded), 1 input or
configuration error, 2 not certified (infeasible, unknown, or failed
verification), 3 simulation divergence. A run only reports "certified"
after the independent verification pass accepts the certificate.
"""

import argparse
import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, load_model_config
from .dynamics import builtin_model, rk4_simulate, write_trace
from .lmi import assemble_theorem1, assemble_theorem2
from .polybasis import build_slack_basis
from .sdp import (certificate_from_solution, export_sdpa, import_sdpa_solution,
                  load_certificate, save_certificate, solve, verify_certificate)

SDPA_ENV = "POLYCONSENSUS_SDPA_SOLVER"


def _assemble(model, method, l, epsilon, margin):
    basis = model.basis
    slack = build_slack_basis(basis)
    A_a, A_b = model.field_a.A, model.field_b.A
    if method == "theorem1":
        problem = assemble_theorem1(basis, slack, A_a, A_b, model.spectral,
                                    l, epsilon, delta_pos=margin)
    else:
        problem = assemble_theorem2(basis, slack, A_a, A_b,
                                    model.spectral.lambda_min,
                                    model.spectral.lambda_max,
                                    l, epsilon, delta_pos=margin)
    return problem, basis, slack


def _verify_and_report(cert, model, basis, slack, tol):
    report = verify_certificate(cert, basis, slack, model.field_a.A,
                                model.field_b.A, model.spectral,
                                tol_verify=tol)
    return report


def _cmd_certify(args):
    model, options = load_model_config(args.config)
    l = args.l if args.l is not None else options["l"]
    epsilon = args.epsilon if args.epsilon is not None else options["epsilon"]
    problem, basis, slack = _assemble(model, args.method, l, epsilon, args.margin)

    if args.solver == "sdpa-export":
        dats = args.sdpa or (Path(args.config).stem + f".{args.method}.dat-s")
        export_sdpa(problem, dats)
        print(f"exported: {dats}")
        solver_bin = os.environ.get(SDPA_ENV)
        if not solver_bin:
            print(f"not certified: no external solver configured "
                  f"(set {SDPA_ENV} to solve the exported problem)")
            return 2
        result_path = str(dats) + ".result"
        run = subprocess.run([solver_bin, str(dats), result_path],
                             capture_output=True, text=True)
        if run.returncode != 0:
            print(f"not certified: external solver failed "
                  f"(exit {run.returncode})")
            return 2
        try:
            x = import_sdpa_solution(result_path)
            cert = certificate_from_solution(problem, x,
                                             model_hash=model.model_hash,
                                             pattern_hash=model.pattern_hash,
                                             solver_name=solver_bin)
        except ValueError as exc:
            print(f"not certified: {exc}")
            return 2
    else:
        result = solve(problem, model_hash=model.model_hash,
                       pattern_hash=model.pattern_hash)
        if result.status != "certified":
            print(f"not certified ({result.status}): {result.evidence}")
            return 2
        cert = result.certificate

    report = _verify_and_report(cert, model, basis, slack, args.tol_verify)
    if not report.passed:
        print(f"not certified: candidate failed independent verification "
              f"({report.message})")
        return 2
    if args.out:
        save_certificate(cert, args.out)
        print(f"certificate: {args.out}")
    print(f"certified: method {cert.method}, margin "
          f"{cert.achieved_margin:.6g} (required {cert.required_margin:.6g}), "
          f"verification {report.message}")
    return 0


def _cmd_verify(args):
    model, _ = load_model_config(args.config)
    cert = load_certificate(args.cert)
    if cert.model_hash and cert.model_hash != model.model_hash:
        print("warning: certificate was produced for a different "
              "configuration (hash mismatch); verifying anyway",
              file=sys.stderr)
    basis = model.basis
    slack = build_slack_basis(basis)
    report = _verify_and_report(cert, model, basis, slack, args.tol_verify)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0 if report.passed else 2


def _cmd_simulate(args):
    model, options = load_model_config(args.config)
    cert = None
    if args.cert:
        cert = load_certificate(args.cert)
        if cert.model_hash and cert.model_hash != model.model_hash:
            print("warning: certificate hash does not match this "
                  "configuration", file=sys.stderr)
    seed = args.seed if args.seed is not None else options["seed"]
    rng = np.random.default_rng(seed)
    x0 = rng.uniform(-2.0, 2.0, size=model.n * model.N)
    trace = rk4_simulate(model, x0, args.dt, args.t_final, certificate=cert)
    extra = {
        "seed": seed,
        "model_hash": model.model_hash,
        "certificate_hash": None,
        "config": str(args.config),
    }
    if cert is not None:
        from .config import canonical_hash
        extra["certificate_hash"] = canonical_hash(cert.to_dict())
    if args.out:
        write_trace(trace, args.out, model.n, model.N, extra_meta=extra)
        print(f"trace: {args.out}")
    d0 = trace.disagreement[0]
    d1 = trace.disagreement[-1]
    ratio = d1 / d0 if d0 > 0 else float("nan")
    print(f"simulated {trace.times[-1]:.6g}s in {len(trace.times) - 1} steps: "
          f"disagreement {d0:.6g} -> {d1:.6g} (ratio {ratio:.3e})"
          + (", DIVERGED" if trace.diverged else ""))
    if cert is not None and trace.V is not None and trace.V[0] != 0:
        print(f"lyapunov ratio V(T)/V(0) = {trace.V[-1] / trace.V[0]:.3e}")
    return 3 if trace.diverged else 0


def _cmd_example(args):
    cfg = builtin_model(args.name)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{args.name}.json"
    with open(path, "w") as fh:
        json.dump(cfg, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(str(path))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="polyconsensus",
        description="Certify and simulate consensus of coupled polynomial agents")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("certify", help="assemble, solve, and verify")
    c.add_argument("--config", required=True)
    c.add_argument("--method", choices=["theorem1", "theorem2"],
                   default="theorem1")
    c.add_argument("--l", type=int, default=None,
                   help="number of Lyapunov coefficient matrices")
    c.add_argument("--epsilon", type=float, default=None,
                   help="exponential decrease rate")
    c.add_argument("--margin", type=float, default=1e-6,
                   help="required strict-block margin")
    c.add_argument("--solver", choices=["builtin", "sdpa-export"],
                   default="builtin")
    c.add_argument("--sdpa", default=None,
                   help="path for the exported .dat-s problem")
    c.add_argument("--tol-verify", type=float, default=1e-7)
    c.add_argument("--out", default=None, help="certificate output path")
    c.set_defaults(func=_cmd_certify)

    v = sub.add_parser("verify", help="independently recheck a certificate")
    v.add_argument("--config", required=True)
    v.add_argument("--cert", required=True)
    v.add_argument("--tol-verify", type=float, default=1e-7)
    v.set_defaults(func=_cmd_verify)

    s = sub.add_parser("simulate", help="fixed-step RK4 formation simulation")
    s.add_argument("--config", required=True)
    s.add_argument("--cert", default=None)
    s.add_argument("--dt", type=float, default=1e-3)
    s.add_argument("--t-final", type=float, default=10.0)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--out", default=None, help="trace CSV output path")
    s.set_defaults(func=_cmd_simulate)

    e = sub.add_parser("example", help="write a built-in model configuration")
    e.add_argument("name", choices=["vdp", "lorenz"])
    e.add_argument("--out", default=".", help="output directory")
    e.set_defaults(func=_cmd_example)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
