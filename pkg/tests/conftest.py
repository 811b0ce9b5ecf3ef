"""Shared fixtures: small models, solved certificates, a session registry."""

import numpy as np
import pytest

import polyconsensus as pc

SINGLE_CFG = {
    "schema_version": 1,
    "name": "single-integrator",
    "n": 1,
    "N": 4,
    "l": 1,
    "agent_terms": [],
    "coupling_terms": [{"row": 1, "coeff": -1.0, "powers": [1]}],
    "pattern": {"cycle": 4},
}

PATH_CFG = {
    "schema_version": 1,
    "name": "damped-path",
    "n": 1,
    "N": 3,
    "l": 2,
    "agent_terms": [{"row": 1, "coeff": -0.5, "powers": [1]}],
    "coupling_terms": [{"row": 1, "coeff": -1.0, "powers": [1]}],
    "pattern": {"edges": [[1, 2, 1.0], [2, 3, 2.0]]},
}

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def build_problem(model, method, l, epsilon=1.0):
    basis = model.basis
    slack = pc.build_slack_basis(basis)
    A_a = model.field_a.A
    A_b = model.field_b.A
    if method == "theorem1":
        return pc.assemble_theorem1(basis, slack, A_a, A_b, model.spectral,
                                    l=l, epsilon=epsilon)
    return pc.assemble_theorem2(basis, slack, A_a, A_b,
                                model.spectral.lambda_min,
                                model.spectral.lambda_max,
                                l=l, epsilon=epsilon)


def certify(model, method, l, epsilon=1.0):
    problem = build_problem(model, method, l, epsilon)
    result = pc.solve(problem, model_hash=model.model_hash,
                      pattern_hash=model.pattern_hash)
    return problem, result


def reverify(cert, model, tol_verify=1e-7):
    slack = pc.build_slack_basis(model.basis)
    return pc.verify_certificate(cert, model.basis, slack, model.field_a.A,
                                 model.field_b.A, model.spectral,
                                 tol_verify=tol_verify)


def random_connected_laplacian(rng, N):
    """Random weighted graph containing a spanning path, so it is connected."""
    P = np.zeros((N, N))

    def add(i, j, w):
        P[i, i] += w
        P[j, j] += w
        P[i, j] -= w
        P[j, i] -= w

    order = rng.permutation(N)
    for a, b in zip(order[:-1], order[1:]):
        add(a, b, rng.uniform(0.5, 3.0))
    for _ in range(int(rng.integers(0, N))):
        i, j = rng.integers(0, N, size=2)
        if i != j:
            add(i, j, rng.uniform(0.1, 2.0))
    return P


@pytest.fixture(scope="session")
def cert_registry():
    """(certificate, model) for every certificate produced by the suite."""
    return []


@pytest.fixture(scope="session")
def single_model():
    model, _ = pc.parse_model_config(SINGLE_CFG)
    return model


@pytest.fixture(scope="session")
def path_model():
    model, _ = pc.parse_model_config(PATH_CFG)
    return model


@pytest.fixture(scope="session")
def lorenz_model():
    return pc.parse_model_config(pc.builtin_model("lorenz"))


@pytest.fixture(scope="session")
def vdp_model():
    return pc.parse_model_config(pc.builtin_model("vdp"))


@pytest.fixture(scope="session")
def single_thm1(single_model, cert_registry):
    problem, result = certify(single_model, "theorem1", l=1)
    assert result.status == "certified"
    cert_registry.append((result.certificate, single_model))
    return problem, result


@pytest.fixture(scope="session")
def single_thm2(single_model, cert_registry):
    problem, result = certify(single_model, "theorem2", l=1)
    assert result.status == "certified"
    cert_registry.append((result.certificate, single_model))
    return problem, result


@pytest.fixture(scope="session")
def path_thm2(path_model, cert_registry):
    problem, result = certify(path_model, "theorem2", l=2)
    assert result.status == "certified"
    cert_registry.append((result.certificate, path_model))
    return problem, result


@pytest.fixture(scope="session")
def lorenz_thm1(lorenz_model, cert_registry):
    model, options = lorenz_model
    problem, result = certify(model, "theorem1", l=options["l"],
                              epsilon=options["epsilon"])
    assert result.status == "certified"
    cert_registry.append((result.certificate, model))
    return problem, result


@pytest.fixture(scope="session")
def vdp_thm2_result(vdp_model, cert_registry):
    """Interval-route attempt on the oscillator model; status not asserted."""
    model, options = vdp_model
    problem, result = certify(model, "theorem2", l=options["l"],
                              epsilon=options["epsilon"])
    if result.certificate is not None:
        cert_registry.append((result.certificate, model))
    return problem, result
