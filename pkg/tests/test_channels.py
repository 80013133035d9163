import numpy as np
import pytest
from sklearn.base import clone

from ctclab import (
    DeutschChannel,
    PostSelectedChannel,
    PostSelectionError,
    brun_circuit,
    four_state_alphabet,
    random_density,
    trace_distance,
)
from ctclab.validation import check_density_stack

ALPHABET, FLAGS = four_state_alphabet()
BRUN = brun_circuit(ALPHABET, FLAGS)

CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def test_get_params_round_trip():
    ch = DeutschChannel(dims=(4, 4), kernel_tol=1e-8)
    params = ch.get_params()
    assert params["dims"] == (4, 4)
    assert params["kernel_tol"] == 1e-8
    rebuilt = DeutschChannel(**params)
    assert rebuilt.get_params() == params
    ch.set_params(residual_tol=1e-9)
    assert ch.get_params()["residual_tol"] == 1e-9


def test_clone_drops_fitted_state():
    ch = DeutschChannel().fit()
    assert hasattr(ch, "unitary_")
    fresh = clone(ch)
    assert not hasattr(fresh, "unitary_")
    assert fresh.get_params() == ch.get_params()


def test_default_swap_channel_is_identity():
    ch = DeutschChannel().fit()
    rng = np.random.default_rng(5)
    for _ in range(5):
        rho = random_density(2, rng)
        np.testing.assert_allclose(ch.transform(rho), rho, atol=1e-10)
    assert ch.predict(np.diag([0.2, 0.8]))[0] == 1


def test_transform_shape_follows_input_shape():
    ch = DeutschChannel().fit()
    single = ch.transform(np.eye(2) / 2)
    assert single.shape == (2, 2)
    stack = ch.transform(np.stack([np.eye(2) / 2, np.diag([1.0, 0.0])]))
    assert stack.shape == (2, 2, 2)
    assert len(ch.reports_) == 2
    assert ch.reports_[0].residual <= 1e-10


def test_unfitted_channels_refuse_to_run():
    with pytest.raises(RuntimeError, match="not fitted"):
        DeutschChannel().transform(np.eye(2) / 2)
    with pytest.raises(RuntimeError, match="not fitted"):
        PostSelectedChannel().predict(np.eye(2) / 2)


def test_fit_validation():
    with pytest.raises(ValueError, match="two positive factors"):
        DeutschChannel(dims=(2,)).fit()
    with pytest.raises(ValueError, match="equal factor dimensions"):
        DeutschChannel(dims=(2, 3)).fit()
    with pytest.raises(ValueError, match="does not match dims"):
        DeutschChannel(unitary=np.eye(4), dims=(2, 3)).fit()
    with pytest.raises(ValueError, match="not unitary"):
        DeutschChannel(unitary=np.ones((4, 4)), dims=(2, 2)).fit()
    with pytest.raises(ValueError, match="equal factor dimensions"):
        PostSelectedChannel(dims=(2, 4)).fit()


def test_transform_rejects_wrong_input_dimension():
    ch = DeutschChannel().fit()
    with pytest.raises(ValueError, match="channel expects 2"):
        ch.transform(np.eye(3) / 3)


def test_brun_channel_discriminates_the_alphabet():
    ch = DeutschChannel(unitary=BRUN, dims=(4, 4)).fit()
    stack = np.stack([s.density().matrix for s in ALPHABET.states])
    outs = ch.transform(stack)
    for s in range(4):
        u = FLAGS.vectors[s]
        assert trace_distance(outs[s], np.outer(u, u.conj())) < 1e-9
        assert ch.reports_[s].fixed_space_dim == 1
    # flag vectors interleave the computational order, so the decoded
    # indices come out permuted
    np.testing.assert_array_equal(ch.predict(stack), [0, 2, 1, 3])


def test_post_selected_channel_swap_is_identity():
    ch = PostSelectedChannel().fit()
    np.testing.assert_allclose(ch.operator_, np.eye(2), atol=1e-12)
    rng = np.random.default_rng(11)
    rho = random_density(2, rng)
    np.testing.assert_allclose(ch.transform(rho), rho, atol=1e-12)
    np.testing.assert_allclose(ch.weights_, [1.0], atol=1e-12)


def test_post_selected_channel_cnot_filters_the_control():
    ch = PostSelectedChannel(unitary=CNOT, dims=(2, 2)).fit()
    np.testing.assert_allclose(ch.operator_, np.diag([2.0, 0.0]), atol=1e-12)
    out = ch.transform(np.eye(2) / 2)
    np.testing.assert_allclose(out, np.diag([1.0, 0.0]), atol=1e-12)
    np.testing.assert_allclose(ch.weights_, [2.0], atol=1e-12)
    with pytest.raises(PostSelectionError, match="post-selection"):
        ch.transform(np.diag([0.0, 1.0]))


def test_post_selected_channel_predict():
    ch = PostSelectedChannel(unitary=CNOT, dims=(2, 2)).fit()
    stack = np.stack([np.eye(2) / 2, np.diag([1.0, 0.0])])
    np.testing.assert_array_equal(ch.predict(stack), [0, 0])


def test_check_density_stack_shapes():
    stack, single = check_density_stack(np.eye(2) / 2)
    assert single and stack.shape == (1, 2, 2)
    stack, single = check_density_stack(np.stack([np.eye(2) / 2] * 3))
    assert not single and stack.shape == (3, 2, 2)


def test_check_density_stack_errors():
    with pytest.raises(ValueError, match="got shape"):
        check_density_stack(np.zeros((2, 3)))
    with pytest.raises(ValueError, match="got shape"):
        check_density_stack(np.zeros((2, 2, 2, 2)))
    bad = np.stack([np.eye(2) / 2, np.eye(2)])  # second entry has trace 2
    with pytest.raises(ValueError, match=r"X\[1\]"):
        check_density_stack(bad)
