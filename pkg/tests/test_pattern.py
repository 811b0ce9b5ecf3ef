"""Pattern graphs: admissibility checks and spectral decomposition."""

import numpy as np
import pytest

import polyconsensus as pc
from conftest import random_connected_laplacian


def test_cycle_laplacian_matrix():
    P = pc.cycle_laplacian(4)
    expected = np.array([[2., -1., 0., -1.],
                         [-1., 2., -1., 0.],
                         [0., -1., 2., -1.],
                         [-1., 0., -1., 2.]])
    np.testing.assert_array_equal(P, expected)
    np.testing.assert_array_equal(pc.cycle_laplacian(4, weight=2.5), 2.5 * expected)
    with pytest.raises(ValueError):
        pc.cycle_laplacian(2)


def test_from_edge_list_matches_cycle():
    edges = [[1, 2, 1.0], [2, 3, 1.0], [3, 4, 1.0], [4, 1, 1.0]]
    np.testing.assert_array_equal(pc.from_edge_list(4, edges),
                                  pc.cycle_laplacian(4))


def test_from_edge_list_rejects_bad_edges():
    with pytest.raises(ValueError):
        pc.from_edge_list(3, [[1, 1, 1.0]])
    with pytest.raises(ValueError):
        pc.from_edge_list(3, [[0, 2, 1.0]])
    with pytest.raises(ValueError):
        pc.from_edge_list(3, [[1, 4, 1.0]])


def test_admissibility_violation_labels():
    assert pc.check_assumption1(pc.cycle_laplacian(5)) == []
    asym = pc.cycle_laplacian(4)
    asym[0, 1] = -2.0
    assert any("asymmetric" in v for v in pc.check_assumption1(asym))
    shifted = pc.cycle_laplacian(4) + np.eye(4)
    assert any("row-sum" in v for v in pc.check_assumption1(shifted))
    blocks = np.zeros((6, 6))
    blocks[:3, :3] = pc.cycle_laplacian(3)
    blocks[3:, 3:] = pc.cycle_laplacian(3)
    assert any("zero-multiplicity" in v for v in pc.check_assumption1(blocks))


def test_cycle_spectra_frozen():
    s4 = pc.eigendecompose(pc.cycle_laplacian(4))
    np.testing.assert_allclose(s4.lambdas, [0.0, 2.0, 2.0, 4.0], atol=1e-10)
    np.testing.assert_allclose(s4.distinct_nonzero, [2.0, 4.0], atol=1e-9)
    assert s4.lambda_min == pytest.approx(2.0, abs=1e-9)
    assert s4.lambda_max == pytest.approx(4.0, abs=1e-9)
    s3 = pc.eigendecompose(pc.cycle_laplacian(3))
    np.testing.assert_allclose(s3.lambdas, [0.0, 3.0, 3.0], atol=1e-10)
    assert len(s3.distinct_nonzero) == 1


def test_eigendecompose_requires_kernel():
    with pytest.raises(ValueError):
        pc.eigendecompose(np.eye(3))


def test_random_connected_graph_invariants():
    rng = np.random.default_rng(42)
    for _ in range(10):
        N = int(rng.integers(3, 21))
        P = random_connected_laplacian(rng, N)
        spec = pc.eigendecompose(P)
        S, lams = spec.S, spec.lambdas
        assert np.max(np.abs(S.T @ S - np.eye(N))) <= 1e-10
        assert np.max(np.abs(S @ np.diag(lams) @ S.T - P)) <= 1e-9
        kernel = S[:, 0] * np.sign(S[:, 0].sum())
        assert np.max(np.abs(kernel - 1.0 / np.sqrt(N))) <= 1e-9
        assert abs(lams[0]) <= 1e-9
        assert np.all(np.diff(lams[1:]) >= -1e-12)
        assert lams[1] > 1e-8
        assert spec.lambda_min == pytest.approx(min(spec.distinct_nonzero))
        assert spec.lambda_max == pytest.approx(max(spec.distinct_nonzero))
