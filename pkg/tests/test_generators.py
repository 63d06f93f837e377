import numpy as np
import pytest

from kron_trace.errors import BadDimensions, LevelOutOfRange
from kron_trace.generators import (
    gen_attenuated_strip,
    gen_comb,
    gen_grid_slit,
    gen_half_strip,
    gen_path,
    gen_sg_slit,
    gen_star,
    word_distance,
)
from kron_trace.trace import schur_trace


def test_star_shapes():
    d = gen_star([1.0, 1.0])
    assert len(d.boundary) == 2 and d.net.interior_idx.tolist() == [0]
    d = gen_star([1.0, 2.0, 3.0])
    assert len(d.boundary) == 3 and d.net.cond.sum() == 6.0
    with pytest.raises(ValueError):
        gen_star([1.0])


def test_path_two_edges():
    d = gen_path(2, [2.0, 2.0])
    assert len(d.net.interior_idx) == 1
    tf = schur_trace(d.net)
    assert tf.c_hat[0, 1] == pytest.approx(1.0)


def test_gasket_level_one():
    d = gen_sg_slit(1)
    net = d.net
    assert (net.n, net.n_edges, len(net.boundary_idx)) == (7, 7, 4)
    np.testing.assert_allclose(net.cond, 5.0 / 3.0)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_gasket_boundary_count(n):
    assert len(gen_sg_slit(n).boundary) == 2 ** (n + 1)


@pytest.mark.parametrize("n", [0, 9])
def test_gasket_level_range(n):
    with pytest.raises(LevelOutOfRange):
        gen_sg_slit(n)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_adjacent_corners_distance(n):
    d = gen_sg_slit(n)
    pos = {d.net.ids[v]: k for k, v in enumerate(d.boundary)}
    a, b = pos["b:" + "1" * (n + 1)], pos["b:" + "1" * n + "2"]
    assert d.geom.rho_b[a, b] == pytest.approx(1.5 * 2.0 ** (-n))


def test_word_distance_oracle():
    rho = word_distance(["111", "112", "121", "211"])
    assert rho[0, 1] == 1.5 / 4 and rho[0, 2] == 1.5 / 2 and rho[0, 3] == 1.5
    assert np.all(np.diag(rho) == 0) and np.allclose(rho, rho.T)


def test_gasket_mirror_is_an_automorphism():
    d = gen_sg_slit(3)
    net, m = d.net, d.mirror
    assert sorted(m.tolist()) == list(range(net.n))
    edges = {frozenset((u, v)): c for u, v, c in zip(net.edge_u, net.edge_v, net.cond)}
    for (u, v), c in zip(zip(net.edge_u, net.edge_v), net.cond):
        assert edges[frozenset((m[u], m[v]))] == c
    np.testing.assert_array_equal(net.boundary[m], net.boundary)


def test_half_strip_modes():
    tf = schur_trace(gen_half_strip(8, 8).net)
    assert np.max(np.abs(tf.kappa)) == 0.0
    tf = schur_trace(gen_half_strip(8, 8, "absorbing").net)
    assert tf.kappa.max() > 0
    with pytest.raises(BadDimensions):
        gen_half_strip(4, 4)


def test_grid_slit_opposite_copies():
    W, L = 16, 6
    d = gen_grid_slit(W, L)
    net, rho = d.net, d.geom.rho_b
    pos = {net.ids[v]: k for k, v in enumerate(d.boundary)}
    x0 = (W - L) // 2
    y0 = W // 2
    for x in range(x0 + 1, x0 + L):
        depth = min(x - x0, x0 + L - x)
        a, b = pos[f"{x},{y0}+"], pos[f"{x},{y0}-"]
        # out to the nearer tip on one side, back on the other, plus the detour around it
        assert rho[a, b] == 2 * depth + 4
    with pytest.raises(BadDimensions):
        gen_grid_slit(16, 0)


def test_stress_domains_build():
    c = gen_comb(8)
    assert len(c.boundary) == 8 and c.net.cond.max() == 4.0 ** 7
    a = gen_attenuated_strip(16)
    touch = a.net.boundary[a.net.edge_u] | a.net.boundary[a.net.edge_v]
    np.testing.assert_allclose(a.net.cond[touch], 3.0 ** -2)
    np.testing.assert_allclose(a.net.cond[~touch], 1.0)
