import math

import numpy as np
import pytest

from ctclab import (
    DensityMatrix,
    Ensemble,
    MeasurementBasis,
    PureState,
    bell_singlet,
    bloch_state,
    kron,
    measure,
    proper_mixture,
    reduce,
    remote_collapse,
    trace_distance,
)

S2 = 1 / math.sqrt(2)
X_PLUS = np.array([S2, S2])
X_MINUS = np.array([S2, -S2])


def test_pure_state_validation():
    psi = PureState([1, 0, 0, 0], (2, 2))
    assert psi.dim == 4 and psi.split == (2, 2)
    assert PureState([S2, S2]).split == (2,)
    with pytest.raises(ValueError, match="norm"):
        PureState([1, 1])
    with pytest.raises(ValueError):
        PureState([1, 0, 0], (2, 2))


def test_pure_state_overlaps_is_phase_blind():
    psi = PureState(X_PLUS)
    assert psi.overlaps(PureState(X_PLUS * np.exp(0.7j)))
    assert not psi.overlaps(PureState([1, 0]))


def test_density_matrix_validation():
    DensityMatrix(np.eye(2) / 2, provenance="improper")
    with pytest.raises(ValueError, match="provenance"):
        DensityMatrix(np.eye(2) / 2, provenance="mystery")
    with pytest.raises(ValueError, match="trace"):
        DensityMatrix(np.eye(2))
    with pytest.raises(ValueError, match="positivity"):
        DensityMatrix(np.diag([1.5, -0.5]))


def test_bloch_state_poles_and_equator():
    np.testing.assert_allclose(bloch_state(0.0, 1.3).amplitudes, [1, 0], atol=1e-12)
    np.testing.assert_allclose(bloch_state(math.pi, 0.0).amplitudes, [0, 1], atol=1e-12)
    np.testing.assert_allclose(bloch_state(math.pi / 2, 0.0).amplitudes, X_PLUS, atol=1e-12)


def test_bloch_antipodal_orthogonality():
    rng = np.random.default_rng(37)
    for _ in range(30):
        theta = rng.uniform(0, math.pi)
        phi = rng.uniform(0, 2 * math.pi)
        a = bloch_state(theta, phi).amplitudes
        b = bloch_state(math.pi - theta, phi + math.pi).amplitudes
        assert abs(np.vdot(a, b)) < 1e-12


def test_bell_singlet_amplitudes_and_reductions():
    psi = bell_singlet()
    np.testing.assert_allclose(psi.amplitudes, [0, S2, -S2, 0], atol=1e-15)
    for keep in (0, 1):
        red = reduce(psi, keep)
        assert red.provenance == "improper"
        np.testing.assert_allclose(red.matrix, np.eye(2) / 2, atol=1e-12)


def test_bell_singlet_is_basis_covariant():
    # rewriting in the x basis gives the same vector up to a global phase
    psi = bell_singlet().amplitudes
    rebuilt = (np.kron(X_PLUS, X_MINUS) - np.kron(X_MINUS, X_PLUS)) / math.sqrt(2)
    assert abs(abs(np.vdot(rebuilt, psi)) - 1.0) < 1e-12


def test_proper_mixture_examples():
    single = proper_mixture(Ensemble([(1.0, PureState([1, 0]))]))
    assert single.provenance == "proper"
    np.testing.assert_allclose(single.matrix, np.diag([1.0, 0.0]), atol=0)

    coin = proper_mixture(
        Ensemble([(0.5, PureState([1, 0])), (0.5, PureState([0, 1]))])
    )
    np.testing.assert_allclose(coin.matrix, np.eye(2) / 2, atol=1e-15)

    skew = proper_mixture(
        Ensemble([(0.5, PureState([1, 0])), (0.5, PureState(X_PLUS))])
    )
    np.testing.assert_allclose(
        skew.matrix, np.array([[0.75, 0.25], [0.25, 0.25]]), atol=1e-12
    )


def test_ensemble_validation():
    with pytest.raises(ValueError, match="at least one"):
        Ensemble([])
    with pytest.raises(ValueError, match="sum"):
        Ensemble([(0.5, PureState([1, 0]))])
    with pytest.raises(ValueError, match="nonnegative"):
        Ensemble([(1.5, PureState([1, 0])), (-0.5, PureState([0, 1]))])
    with pytest.raises(ValueError, match="dimensions"):
        Ensemble([(0.5, PureState([1, 0])), (0.5, PureState([1, 0, 0, 0], (2, 2)))])


def test_reduce_examples():
    prod = PureState(np.kron([1, 0], [0, 1]), (2, 2))
    np.testing.assert_allclose(reduce(prod, 0).matrix, np.diag([1.0, 0.0]), atol=0)
    half = PureState(np.array([1, 1, 0, 0]) / math.sqrt(2), (2, 2))
    np.testing.assert_allclose(
        reduce(half, 1).matrix, np.array([[0.5, 0.5], [0.5, 0.5]]), atol=1e-12
    )
    with pytest.raises(ValueError):
        reduce(PureState([1, 0]), 0)
    with pytest.raises(ValueError):
        reduce(prod, 2)


def test_reduce_defining_identity():
    # <Psi| O (x) I |Psi> = tr(reduce(Psi) O) over a spanning operator set
    paulis = [
        np.eye(2, dtype=complex),
        np.array([[0, 1], [1, 0]], dtype=complex),
        np.array([[0, -1j], [1j, 0]]),
        np.diag([1.0, -1.0]).astype(complex),
    ]
    rng = np.random.default_rng(41)
    for _ in range(10):
        amps = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi = PureState(amps / np.linalg.norm(amps), (2, 2))
        red = reduce(psi, 0)
        for op in paulis:
            lhs = np.vdot(psi.amplitudes, kron(op, np.eye(2)) @ psi.amplitudes)
            rhs = np.trace(red.matrix @ op)
            assert abs(lhs - rhs) < 1e-10


def test_measurement_basis_validation():
    with pytest.raises(ValueError, match="idempotent"):
        MeasurementBasis([np.eye(2) / 2, np.eye(2) / 2], ["a", "b"])
    with pytest.raises(ValueError, match="orthogonal"):
        MeasurementBasis.from_vectors([[1, 0], X_PLUS], ["a", "b"])
    with pytest.raises(ValueError, match="identity"):
        MeasurementBasis([np.diag([1.0, 0.0])], ["a"])
    with pytest.raises(ValueError, match="label"):
        MeasurementBasis([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])], ["a"])


def test_measure_examples():
    res = measure(DensityMatrix(np.diag([1.0, 0.0])), MeasurementBasis.z_basis())
    assert res.probabilities == {"z+": 1.0, "z-": 0.0}
    assert "z-" not in res.collapsed

    res = measure(DensityMatrix(np.eye(2) / 2), MeasurementBasis.x_basis())
    np.testing.assert_allclose(
        [res.probabilities["x+"], res.probabilities["x-"]], [0.5, 0.5], atol=1e-12
    )

    res = measure(DensityMatrix(np.outer(X_PLUS, X_PLUS)), MeasurementBasis.z_basis())
    np.testing.assert_allclose(
        [res.probabilities["z+"], res.probabilities["z-"]], [0.5, 0.5], atol=1e-12
    )
    np.testing.assert_allclose(res.collapsed["z+"].matrix, np.diag([1.0, 0.0]), atol=1e-12)
    np.testing.assert_allclose(res.collapsed["z-"].matrix, np.diag([0.0, 1.0]), atol=1e-12)
    assert res.collapsed["z+"].provenance == "proper"


def test_measure_normalization_on_random_states():
    from ctclab import random_density

    rng = np.random.default_rng(43)
    basis = MeasurementBasis.z_basis()
    for _ in range(20):
        rho = DensityMatrix(random_density(2, rng))
        res = measure(rho, basis)
        probs = np.array(list(res.probabilities.values()))
        assert probs.min() >= 0.0
        assert abs(probs.sum() - 1.0) < 1e-10


def test_measure_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension"):
        measure(DensityMatrix(np.eye(4) / 4), MeasurementBasis.z_basis())


def test_remote_collapse_singlet_anticorrelation():
    psi = bell_singlet()
    seen = set()
    for seed in range(40):
        rng = np.random.default_rng(seed)
        label, bob = remote_collapse(psi, MeasurementBasis.z_basis(), rng)
        seen.add(label)
        want = [0, 1] if label == "z+" else [1, 0]
        assert abs(abs(np.vdot(bob.amplitudes, want)) - 1.0) < 1e-12
    assert seen == {"z+", "z-"}  # both outcomes occur across seeds

    for seed in range(40):
        rng = np.random.default_rng(seed)
        label, bob = remote_collapse(psi, MeasurementBasis.x_basis(), rng)
        want = X_MINUS if label == "x+" else X_PLUS
        assert abs(abs(np.vdot(bob.amplitudes, want)) - 1.0) < 1e-12


def test_remote_collapse_product_state_leaves_bob_alone():
    prod = PureState(np.kron([1, 0], [1, 0]), (2, 2))
    for basis in (MeasurementBasis.z_basis(), MeasurementBasis.x_basis()):
        _, bob = remote_collapse(prod, basis, np.random.default_rng(1))
        assert abs(abs(np.vdot(bob.amplitudes, [1, 0])) - 1.0) < 1e-12


def test_remote_collapse_requires_bipartite():
    with pytest.raises(ValueError, match="bipartite"):
        remote_collapse(PureState([1, 0]), MeasurementBasis.z_basis(), np.random.default_rng(0))
