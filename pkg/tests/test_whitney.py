import numpy as np
import pytest

from kron_trace.besov import GASKET_WALK_DIMENSION, ScaleFunction, ThetaField, besov_seminorm
from kron_trace.errors import ResolutionTooCoarse
from kron_trace.generators import gen_half_strip, gen_path, gen_sg_slit
from kron_trace.network import energy
from kron_trace.potential import harmonic_extension
from kron_trace.trace import schur_trace, trace_energy
from kron_trace.whitney import (
    build_cover,
    cover_stats,
    cover_violations,
    extend,
    extension_report,
    partition_of_unity,
    restriction_report,
)

PSI = ScaleFunction(GASKET_WALK_DIMENSION)


@pytest.fixture(scope="module")
def gasket5():
    d = gen_sg_slit(5)
    cover = build_cover(d.geom, 0.125)
    return d, cover, partition_of_unity(d.net, cover, PSI)


def test_radius_rule(gasket5):
    d, cover, _ = gasket5
    np.testing.assert_allclose(cover.radii, d.geom.d_D[cover.centers] / 9)


@pytest.mark.parametrize("level", [3, 4, 5, 6])
def test_cover_invariants(level):
    assert cover_violations(build_cover(gen_sg_slit(level).geom)) == []


def test_cover_on_strip_grows_with_height():
    d = gen_half_strip(32, 32)
    cover = build_cover(d.geom)
    assert cover_violations(cover) == []
    heights = d.geom.d_D[cover.centers]
    np.testing.assert_allclose(cover.radii / heights, 1 / 9)
    assert heights.max() >= 4 * heights.min()


def test_rejected_center_would_overlap(gasket5):
    d, cover, _ = gasket5
    admitted = set(cover.centers.tolist())
    k = cover.eps / (1 + cover.eps)
    for x in np.flatnonzero(cover.covered):
        if x in admitted:
            continue
        r = k * d.geom.d_D[x]
        assert np.any(cover.dist[:, x] <= r + cover.radii + 1e-9)
        break


def test_overlap_statistics(gasket5):
    _, cover, _ = gasket5
    assert cover_stats(cover, lam=1.0).extra["max_overlap"] == 1
    rep = cover_stats(cover, lam=2.0)
    assert rep.passed and rep.extra["max_radius_ratio"] <= rep.extra["sandwich"]


def test_too_coarse():
    with pytest.raises(ResolutionTooCoarse):
        build_cover(gen_path(4).geom)


def test_single_center_partition():
    d = gen_path(8)
    cover = build_cover(d.geom)
    assert len(cover) == 1
    pou = partition_of_unity(d.net, cover)
    np.testing.assert_array_equal(pou.psi[0, cover.covered], 1.0)


def test_partition_sums_to_one(gasket5):
    _, cover, pou = gasket5
    np.testing.assert_allclose(pou.psi[:, cover.covered].sum(axis=0), 1.0)
    assert np.all(pou.tent_energy > 0) and np.all(pou.budget > 0)


def test_constants_extend_to_constants(gasket5):
    d, cover, pou = gasket5
    np.testing.assert_allclose(extend(np.full(64, 2.0), cover, pou, d.sigma), 2.0)


def test_left_half_indicator(gasket5):
    d, cover, pou = gasket5
    words = [d.geom.labels[v] for v in d.boundary]
    u = np.array([1.0 if w[0] == "1" else 0.0 for w in words])
    f = extend(u, cover, pou, d.sigma)
    assert f.min() >= -1e-12 and f.max() <= 1 + 1e-12
    deep_left = d.net.idx("4,4")
    assert f[deep_left] == pytest.approx(1.0)


def test_extension_and_restriction_reports(gasket5):
    d, cover, pou = gasket5
    field_ = ThetaField(PSI, d.sigma, d.net.m0, d.geom)
    U = np.random.default_rng(7).standard_normal((64, 10))
    rep = extension_report(d.net, cover, pou, d.sigma, field_, U)
    assert np.all(np.isfinite(rep.ratios)) and rep.min > 0
    H = harmonic_extension(d.net, U)
    res = restriction_report(d.net, field_, H)
    tf = schur_trace(d.net)
    for k, r in enumerate(res.records):
        expect = besov_seminorm(U[:, k], field_, squared=True) / trace_energy(tf, U[:, k])
        assert r.ratio == pytest.approx(expect, rel=1e-9)
    f = np.zeros(d.net.n)
    f[d.pole] = 1.0
    f[d.boundary] = 3.0
    assert restriction_report(d.net, field_, f).records[0].lhs == 0.0
    # the extension of u is never cheaper than the harmonic one
    E = extend(U, cover, pou, d.sigma)
    for k in range(10):
        assert energy(d.net, E[:, k]) >= energy(d.net, H[:, k]) - 1e-12
