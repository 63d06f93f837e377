import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kron_trace.errors import ZeroMass
from kron_trace.generators import gen_half_strip, gen_path, gen_sg_slit, gen_star
from kron_trace.network import energy
from kron_trace.potential import harmonic_extension
from kron_trace.trace import (
    TraceForm,
    generator_matrix,
    schur_trace,
    star_closed_form,
    tower_check,
    trace_energy,
)


def test_star_examples():
    tf = schur_trace(gen_star([1.0, 1.0]).net)
    assert tf.c_hat[0, 1] == pytest.approx(0.5) and np.all(tf.kappa == 0)
    tf = schur_trace(gen_star([1.0, 2.0, 3.0]).net)
    C = tf.c_hat
    assert (C[0, 1], C[0, 2], C[1, 2]) == pytest.approx((1 / 3, 1 / 2, 1.0))
    assert tf.J[1, 2] == pytest.approx(0.5)


def test_star_closed_form_examples():
    assert star_closed_form([1, 1]).c_hat[0, 1] == 0.5
    C = star_closed_form([1, 2, 3]).c_hat
    assert (C[0, 1], C[0, 2], C[1, 2]) == pytest.approx((1 / 3, 1 / 2, 1.0))


def test_path_series_conductance():
    assert schur_trace(gen_path(2).net).c_hat[0, 1] == pytest.approx(0.5)


def test_trace_energy_examples():
    tf = TraceForm(("x", "y"), np.array([[0, 0.5], [0.5, 0]]), np.zeros(2))
    assert trace_energy(tf, [0.0, 1.0]) == pytest.approx(0.5)
    assert trace_energy(schur_trace(gen_sg_slit(3).net), np.ones(16)) == pytest.approx(0, abs=1e-12)


def test_transient_constant_energy_is_total_killing():
    tf = schur_trace(gen_half_strip(8, 4, "absorbing").net)
    assert tf.capacity > 0
    assert trace_energy(tf, np.ones(tf.n)) == pytest.approx(tf.capacity, rel=1e-12)


def test_trace_identity_on_gasket():
    net = gen_sg_slit(4).net
    tf = schur_trace(net)
    U = np.random.default_rng(5).standard_normal((tf.n, 8))
    H = harmonic_extension(net, U)
    for k in range(8):
        assert trace_energy(tf, U[:, k]) == pytest.approx(energy(net, H[:, k]), rel=1e-10)


def test_trace_matrix_is_a_generator():
    tf = schur_trace(gen_sg_slit(4).net)
    assert np.all(tf.c_hat >= 0) and np.allclose(tf.c_hat, tf.c_hat.T)
    np.testing.assert_allclose(tf.matrix.sum(axis=1), 0.0, atol=1e-12)


def test_gasket_trace_is_mirror_symmetric():
    d = gen_sg_slit(4)
    tf = schur_trace(d.net)
    bpos = np.full(d.net.n, -1)
    bpos[d.boundary] = np.arange(len(d.boundary))
    p = bpos[d.mirror[d.boundary]]
    np.testing.assert_allclose(tf.c_hat[np.ix_(p, p)], tf.c_hat, rtol=1e-12, atol=1e-15)


def test_tower_examples():
    net = gen_path(6).net
    mid = np.zeros(net.n, dtype=bool)
    mid[[0, 3, 6]] = True
    assert tower_check(net, mid) <= 1e-10
    d = gen_sg_slit(3)
    mid = d.net.boundary.copy()
    for i, vid in enumerate(d.net.ids):
        if "," in vid and all(int(p) % 2 == 0 for p in vid.split(",")):
            mid[i] = True
    assert tower_check(d.net, mid) <= 1e-9


def test_generator_matrix_rates():
    tf = schur_trace(gen_star([1.0, 1.0]).net)
    Q = generator_matrix(tf, [0.5, 0.5])
    np.testing.assert_allclose(Q, [[1, -1], [-1, 1]])
    with pytest.raises(ZeroMass):
        generator_matrix(tf, None)
    with pytest.raises(ZeroMass):
        generator_matrix(tf, [0.5, 0.0])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=2, max_size=50))
def test_star_identity_property(logc):
    c = 10.0 ** np.array(logc)
    tf = schur_trace(gen_star(c).net)
    gap = np.max(np.abs(tf.c_hat - star_closed_form(c).c_hat))
    assert gap <= 1e-10 * c.sum()
    assert np.all(tf.kappa == 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 12), st.lists(st.floats(0.1, 10), min_size=12, max_size=12))
def test_path_trace_is_series_conductance(n, c):
    c = np.array(c[:n])
    tf = schur_trace(gen_path(n, c).net)
    assert tf.c_hat[0, 1] == pytest.approx(1.0 / np.sum(1.0 / c), rel=1e-10)
