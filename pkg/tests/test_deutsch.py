import numpy as np
import pytest

from ctclab import (
    DensityMatrix,
    DeutschInstance,
    FixedPointError,
    brun_circuit,
    cr_output,
    deutsch_map,
    entropy,
    evolve,
    four_state_alphabet,
    is_density,
    iterate_fixed_point,
    kron,
    random_density,
    random_unitary,
    solve_fixed_points,
    superoperator,
    swap_operator,
    trace_distance,
    unvec,
    vec,
)

CNOT = np.kron(np.diag([1.0, 0.0]), np.eye(2)) + np.kron(
    np.diag([0.0, 1.0]), np.array([[0.0, 1.0], [1.0, 0.0]])
)

ALPHABET, FLAGS = four_state_alphabet()
BRUN = brun_circuit(ALPHABET, FLAGS)


def _flag_projector(s):
    u = FLAGS.vectors[s]
    return np.outer(u, u.conj())


def _random_instance(rng, d):
    return DeutschInstance(
        random_unitary(d * d, rng), DensityMatrix(random_density(d, rng)), (d, d)
    )


def test_instance_validation():
    with pytest.raises(ValueError, match="unitar"):
        DeutschInstance(np.eye(4) * 2, DensityMatrix(np.eye(2) / 2), (2, 2))
    with pytest.raises(ValueError):
        DeutschInstance(np.eye(4), DensityMatrix(np.eye(2) / 2), (2, 3))
    with pytest.raises(ValueError):
        DeutschInstance(np.eye(4), DensityMatrix(np.eye(3) / 3), (2, 2))


def test_deutsch_map_swap_is_constant():
    rng = np.random.default_rng(47)
    rho_in = random_density(2, rng)
    inst = DeutschInstance(swap_operator(2), DensityMatrix(rho_in), (2, 2))
    for _ in range(5):
        sigma = random_density(2, rng)
        np.testing.assert_allclose(deutsch_map(inst, sigma).matrix, rho_in, atol=1e-12)


def test_deutsch_map_identity_returns_loop_state():
    inst = DeutschInstance(np.eye(4), DensityMatrix(np.eye(2) / 2), (2, 2))
    rng = np.random.default_rng(53)
    sigma = random_density(2, rng)
    np.testing.assert_allclose(deutsch_map(inst, sigma).matrix, sigma, atol=1e-12)


def test_deutsch_map_cnot_example():
    # CR control |z->: the loop qubit gets flipped
    inst = DeutschInstance(CNOT, DensityMatrix(np.diag([0.0, 1.0])), (2, 2))
    out = deutsch_map(inst, np.diag([1.0, 0.0]))
    np.testing.assert_allclose(out.matrix, np.diag([0.0, 1.0]), atol=1e-12)


def test_deutsch_map_affine_in_loop_state():
    rng = np.random.default_rng(59)
    for d in (2, 3):
        inst = _random_instance(rng, d)
        r1, r2 = random_density(d, rng), random_density(d, rng)
        alpha = rng.uniform()
        lhs = deutsch_map(inst, alpha * r1 + (1 - alpha) * r2).matrix
        rhs = alpha * deutsch_map(inst, r1).matrix + (1 - alpha) * deutsch_map(inst, r2).matrix
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_deutsch_map_is_cptp_on_random_instances():
    rng = np.random.default_rng(61)
    for d in (2, 3, 4):
        for _ in range(15):
            inst = _random_instance(rng, d)
            out = deutsch_map(inst, random_density(d, rng))
            assert is_density(out.matrix)


def test_cr_output_identity_and_swap():
    rng = np.random.default_rng(67)
    rho_in = random_density(2, rng)
    sigma = random_density(2, rng)
    inst = DeutschInstance(np.eye(4), DensityMatrix(rho_in), (2, 2))
    np.testing.assert_allclose(cr_output(inst, sigma).matrix, rho_in, atol=1e-12)
    inst = DeutschInstance(swap_operator(2), DensityMatrix(rho_in), (2, 2))
    np.testing.assert_allclose(cr_output(inst, sigma).matrix, sigma, atol=1e-12)


def test_cr_output_brun_fixed_flag():
    inst = DeutschInstance(BRUN, ALPHABET.states[0].density(), (4, 4))
    out = cr_output(inst, _flag_projector(0))
    np.testing.assert_allclose(out.matrix, _flag_projector(0), atol=1e-10)
    assert abs(np.trace(out.matrix) - 1.0) < 1e-10


def test_superoperator_identity_and_swap():
    inst = DeutschInstance(np.eye(4), DensityMatrix(np.eye(2) / 2), (2, 2))
    np.testing.assert_allclose(superoperator(inst), np.eye(4), atol=1e-12)

    rng = np.random.default_rng(71)
    rho_in = random_density(2, rng)
    inst = DeutschInstance(swap_operator(2), DensityMatrix(rho_in), (2, 2))
    s = superoperator(inst)
    for _ in range(5):
        sigma = random_density(2, rng)
        np.testing.assert_allclose(unvec(s @ vec(sigma), 2), rho_in, atol=1e-12)


def test_superoperator_matches_map_on_random_inputs():
    rng = np.random.default_rng(73)
    for d in (2, 3):
        inst = _random_instance(rng, d)
        s = superoperator(inst)
        for _ in range(20):
            sigma = random_density(d, rng)
            np.testing.assert_allclose(
                unvec(s @ vec(sigma), d), deutsch_map(inst, sigma).matrix, atol=1e-12
            )


def test_solve_identity_picks_maximum_entropy():
    inst = DeutschInstance(np.eye(4), DensityMatrix(np.diag([1.0, 0.0])), (2, 2))
    rep = solve_fixed_points(inst)
    assert rep.fixed_space_dim == 4
    np.testing.assert_allclose(rep.chosen.matrix, np.eye(2) / 2, atol=1e-9)
    assert abs(rep.entropy_bits - 1.0) < 1e-9
    assert len(rep.basis_of_fixed_space) == 4


def test_solve_swap_returns_input():
    rng = np.random.default_rng(79)
    rho_in = random_density(2, rng)
    inst = DeutschInstance(swap_operator(2), DensityMatrix(rho_in), (2, 2))
    rep = solve_fixed_points(inst)
    assert rep.fixed_space_dim == 1
    np.testing.assert_allclose(rep.chosen.matrix, rho_in, atol=1e-10)


def test_solve_brun_symbol_one():
    inst = DeutschInstance(BRUN, ALPHABET.states[1].density(), (4, 4))
    rep = solve_fixed_points(inst)
    assert rep.fixed_space_dim == 1
    assert trace_distance(rep.chosen.matrix, _flag_projector(1)) < 1e-9


def test_solve_random_instances_report_invariants():
    rng = np.random.default_rng(83)
    for d in (2, 3, 4):
        for _ in range(10):
            rep = solve_fixed_points(_random_instance(rng, d))
            assert rep.fixed_space_dim >= 1
            assert rep.residual <= 1e-10
            assert -1e-12 <= rep.entropy_bits <= np.log2(d) + 1e-12
            assert rep.method in ("kernel", "iteration")
            assert is_density(rep.chosen.matrix)
            assert len(rep.basis_of_fixed_space) == rep.fixed_space_dim


def test_solve_block_channel_needs_entropy_ascent():
    # CTC map P rho P + |0><2| rho |2><0| for P = |0><0| + |1><1|: the fixed
    # space is the whole upper 2x2 block (dim 4) but the maximum-entropy
    # point diag(1/2,1/2,0) is not the projection of the seed, so the ascent
    # has to move.
    proj = np.diag([1.0, 1.0, 0.0]).astype(complex)
    hop = np.zeros((3, 3), dtype=complex)
    hop[0, 2] = 1.0
    block_col = np.vstack([proj, hop])  # 6x3 isometry
    u_svd = np.linalg.svd(block_col, full_matrices=True)[0]
    unitary = np.hstack([block_col, u_svd[:, 3:]])
    inst = DeutschInstance(unitary, DensityMatrix(np.diag([1.0, 0.0])), (2, 3))
    rep = solve_fixed_points(inst)
    assert rep.fixed_space_dim == 4
    assert rep.residual <= 1e-10
    assert trace_distance(rep.chosen.matrix, np.diag([0.5, 0.5, 0.0])) < 1e-3
    assert rep.entropy_bits > 1.0 - 1e-6


def test_report_serializes_to_json_dict():
    import json

    inst = DeutschInstance(swap_operator(2), DensityMatrix(np.eye(2) / 2), (2, 2))
    doc = solve_fixed_points(inst).to_dict()
    text = json.dumps(doc)
    assert "fixed_space_dim" in text and "entropy_bits" in text


def test_iterate_swap_and_identity():
    rng = np.random.default_rng(89)
    rho_in = random_density(2, rng)
    inst = DeutschInstance(swap_operator(2), DensityMatrix(rho_in), (2, 2))
    np.testing.assert_allclose(iterate_fixed_point(inst).matrix, rho_in, atol=1e-10)

    seed = random_density(2, rng)
    inst = DeutschInstance(np.eye(4), DensityMatrix(np.eye(2) / 2), (2, 2))
    np.testing.assert_allclose(iterate_fixed_point(inst, rho0=seed).matrix, seed, atol=1e-12)


def test_iterate_brun_seed_independence():
    inst = DeutschInstance(BRUN, ALPHABET.states[2].density(), (4, 4))
    kernel_answer = solve_fixed_points(inst).chosen.matrix
    rng = np.random.default_rng(97)
    for _ in range(50):
        seed = random_density(4, rng)
        fixed = iterate_fixed_point(inst, rho0=seed, tol=1e-12)
        assert trace_distance(fixed.matrix, kernel_answer) < 1e-8


def test_iterate_validation_and_exhaustion():
    inst = DeutschInstance(swap_operator(2), DensityMatrix(np.eye(2) / 2), (2, 2))
    with pytest.raises(ValueError, match="seed"):
        iterate_fixed_point(inst, rho0=np.eye(2))
    with pytest.raises(ValueError, match="dimension"):
        iterate_fixed_point(inst, rho0=np.eye(3) / 3)
    with pytest.raises(FixedPointError, match="residual"):
        iterate_fixed_point(inst, max_iter=0)


def test_evolve_identity_and_brun():
    rng = np.random.default_rng(101)
    rho_in = random_density(2, rng)
    inst = DeutschInstance(np.eye(4), DensityMatrix(rho_in), (2, 2))
    np.testing.assert_allclose(evolve(inst).matrix, rho_in, atol=1e-10)

    inst = DeutschInstance(BRUN, ALPHABET.states[2].density(), (4, 4))
    np.testing.assert_allclose(evolve(inst).matrix, _flag_projector(2), atol=1e-9)


def test_evolve_is_nonlinear_on_brun_circuit():
    mix = 0.5 * ALPHABET.states[0].projector() + 0.5 * ALPHABET.states[2].projector()
    collective = evolve(DeutschInstance(BRUN, DensityMatrix(mix), (4, 4))).matrix
    members = [
        evolve(DeutschInstance(BRUN, ALPHABET.states[s].density(), (4, 4))).matrix
        for s in (0, 2)
    ]
    gap = trace_distance(collective, 0.5 * members[0] + 0.5 * members[1])
    assert gap > 0.1
    assert abs(gap - 0.3469696850362447) < 1e-9


def test_cr_output_trace_preserved_on_random_instances():
    rng = np.random.default_rng(103)
    for d in (2, 3):
        inst = _random_instance(rng, d)
        sigma = random_density(d, rng)
        out = cr_output(inst, sigma)
        assert abs(np.trace(out.matrix) - 1.0) < 1e-10
        assert out.matrix.shape == (d, d)


def test_entropy_of_chosen_matches_report():
    rng = np.random.default_rng(107)
    inst = _random_instance(rng, 3)
    rep = solve_fixed_points(inst)
    assert abs(rep.entropy_bits - entropy(rep.chosen.matrix)) < 1e-12


def test_brun_flag_projectors_are_products():
    # sanity on the embedding: flags live on the pair space
    assert BRUN.shape == (16, 16)
    for s in range(4):
        pi = _flag_projector(s)
        assert abs(np.trace(pi) - 1.0) < 1e-12
        assert kron(pi, np.eye(4)).shape == BRUN.shape
