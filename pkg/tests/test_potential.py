import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kron_trace.errors import BadSet, NotInterior, SingularRestriction
from kron_trace.generators import gen_half_strip, gen_path, gen_sg_slit, gen_star
from kron_trace.network import build_network
from kron_trace.potential import (
    SolverConfig,
    c_functional,
    capacity,
    equilibrium_boundary_measure,
    equilibrium_potential,
    green_function,
    green_matrix,
    harmonic_extension,
    harmonic_measure,
    solve_dirichlet,
    sweep,
)


def test_star_harmonic_extension_and_measure():
    net = gen_star([1.0, 2.0, 3.0]).net
    f = harmonic_extension(net, [1.0, 0.0, 0.0])
    assert f[net.idx("o")] == pytest.approx(1 / 6)
    np.testing.assert_allclose(harmonic_measure(net, net.idx("o")), [1 / 6, 1 / 3, 1 / 2])


def test_constants_extend_to_constants():
    net = gen_sg_slit(3).net
    np.testing.assert_allclose(harmonic_extension(net, np.full(len(net.boundary_idx), 2.5)), 2.5)


def test_path_interpolation():
    net = gen_path(3).net
    np.testing.assert_allclose(harmonic_extension(net, [0.0, 1.0]), [0, 1 / 3, 2 / 3, 1])
    np.testing.assert_allclose(harmonic_measure(gen_path(2).net, 1), [0.5, 0.5])


def test_harmonic_measure_rejects_boundary_pole():
    net = gen_path(2).net
    with pytest.raises(NotInterior):
        harmonic_measure(net, 0)


def test_gasket_harmonic_measure_is_mirror_symmetric():
    d = gen_sg_slit(2)
    w = harmonic_measure(d.net, d.pole)
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    bpos = np.full(d.net.n, -1)
    bpos[d.boundary] = np.arange(len(d.boundary))
    np.testing.assert_allclose(w[bpos[d.mirror[d.boundary]]], w, atol=1e-14)
    # dense oracle
    from kron_trace.network import laplacian
    L = laplacian(d.net).toarray()
    I, B = d.net.interior_idx, d.net.boundary_idx
    e = np.zeros(len(I))
    e[np.searchsorted(I, d.pole)] = 1.0
    np.testing.assert_allclose(w, -L[np.ix_(B, I)] @ np.linalg.solve(L[np.ix_(I, I)], e), atol=1e-14)


def _one_sided_path():
    ids = ["0", "1", "2", "3"]
    edges = [("0", "1", 1.0), ("1", "2", 1.0), ("2", "3", 1.0)]
    return build_network(ids, edges, [1, 1, 1, 0], [False, False, False, True])


def test_equilibrium_potential_on_chain():
    net = _one_sided_path()
    np.testing.assert_allclose(equilibrium_potential(net, [0]), [1, 2 / 3, 1 / 3, 0])
    np.testing.assert_allclose(equilibrium_potential(net, [0, 1, 2])[:3], 1.0)


def test_equilibrium_potential_maximum_principle():
    d = gen_sg_slit(3)
    K = [d.pole] + [v for v in d.net.interior_idx if d.net.ids[v] in ("1,7", "0,7")]
    e = equilibrium_potential(d.net, K)
    off = np.ones(d.net.n, dtype=bool)
    off[K] = False
    assert np.all(e[K] == 1.0)
    assert np.all((e[off] >= 0) & (e[off] < 1))
    assert np.all(e[d.net.interior_idx[~np.isin(d.net.interior_idx, K)]] > 0)


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_path_capacity(n):
    net = gen_path(n).net
    O2 = np.ones(net.n, dtype=bool)
    O2[n] = False
    assert capacity(net, [0], O2) == pytest.approx(1.0 / n)


def test_star_capacity_grounded_leaves():
    assert capacity(gen_star([1.0, 1.0]).net, [0], [0]) == pytest.approx(2.0)


def test_capacity_rejects_bad_sets():
    net = gen_path(3).net
    with pytest.raises(BadSet):
        capacity(net, [], [0, 1])
    with pytest.raises(BadSet):
        capacity(net, [0, 1], [0])
    with pytest.raises(BadSet):
        capacity(net, [0], np.ones(net.n, dtype=bool))


def test_green_two_by_two_oracle():
    net = gen_path(3).net
    G, idx = green_matrix(net, [1, 2])
    np.testing.assert_allclose(G, np.linalg.inv([[2.0, -1.0], [-1.0, 2.0]]))
    assert green_function(net, [1, 2], 1, 1) == pytest.approx(2 / 3)
    assert green_function(net, [1, 2], 1, 2) == pytest.approx(1 / 3)


def test_sweep_identities():
    d = gen_sg_slit(3)
    net = d.net
    nb = len(net.boundary_idx)
    h = np.random.default_rng(1).uniform(0, 1, nb)
    np.testing.assert_allclose(sweep(net, h, []), harmonic_extension(net, h), atol=1e-13)
    K = [d.pole]
    np.testing.assert_allclose(sweep(net, np.ones(nb), K),
                               1 - equilibrium_potential(net, K), atol=1e-13)
    s, Hh = sweep(net, h, K), harmonic_extension(net, h)
    assert np.all(s >= -1e-14) and np.all(s <= Hh + 1e-14)


def test_c_functional_bounds_and_flux_formula():
    d = gen_sg_slit(3)
    net = d.net
    K = list(net.interior_idx[:5])
    assert c_functional(net, np.ones(len(net.boundary_idx)), K) == pytest.approx(1.0)
    rng = np.random.default_rng(2)
    for _ in range(5):
        h = rng.uniform(0, 1, len(net.boundary_idx))
        c = c_functional(net, h, K)
        Hh = harmonic_extension(net, h)[K]
        assert Hh.min() - 1e-12 <= c <= Hh.max() + 1e-12
        # the flux measure integrates h to the same number
        assert equilibrium_boundary_measure(net, K) @ h == pytest.approx(c, rel=1e-10)
    assert equilibrium_boundary_measure(net, K).sum() == pytest.approx(1.0)


def test_equilibrium_measure_of_star_center():
    net = gen_star([1.0, 1.0]).net
    np.testing.assert_allclose(equilibrium_boundary_measure(net, [0]), [0.5, 0.5])


def test_singular_restriction_detected():
    # nothing fixed and no ghost: the restricted Laplacian has constants in its kernel
    ids = ["a", "b", "c", "d"]
    net = build_network(ids, [("a", "b", 1.0), ("b", "c", 1.0), ("c", "d", 1.0)],
                        [0, 1, 1, 1], [True, False, False, False])
    fixed = np.zeros(4, dtype=bool)
    fixed[0] = True
    assert solve_dirichlet(net, fixed, np.zeros(4)).shape == (4,)
    with pytest.raises(SingularRestriction):
        solve_dirichlet(net, np.zeros(4, dtype=bool), np.zeros(4))


def test_cg_matches_direct():
    net = gen_half_strip(16, 16).net
    u = np.random.default_rng(3).standard_normal(len(net.boundary_idx))
    a = harmonic_extension(net, u, SolverConfig("direct"))
    b = harmonic_extension(net, u, SolverConfig("cg"))
    np.testing.assert_allclose(a, b, atol=1e-9)


def test_results_independent_of_threads(monkeypatch):
    net = gen_sg_slit(4).net
    U = np.random.default_rng(4).standard_normal((len(net.boundary_idx), 6))
    ref = harmonic_extension(net, U, SolverConfig("cg"))
    monkeypatch.setenv("KRON_TRACE_THREADS", "1")
    one = harmonic_extension(net, U, SolverConfig("cg"))
    np.testing.assert_array_equal(ref, one)
    out = []
    ts = [threading.Thread(target=lambda: out.append(harmonic_extension(net, U))) for _ in range(4)]
    for t in ts:
        t.start()
    for t in ts:
        t.join()
    for r in out:
        np.testing.assert_allclose(r, ref, atol=1e-10)


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig("lu")
    with pytest.raises(ValueError):
        SolverConfig(rtol=1e-3)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(1e-3, 1e3), min_size=2, max_size=12))
def test_star_harmonic_measure_is_conductance_share(c):
    net = gen_star(c).net
    c = np.array(c)
    np.testing.assert_allclose(harmonic_measure(net, 0), c / c.sum(), rtol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=16, max_size=16))
def test_maximum_principle(u):
    net = gen_sg_slit(3).net
    f = harmonic_extension(net, np.array(u))
    assert f.max() <= max(u) + 1e-12 and f.min() >= min(u) - 1e-12
