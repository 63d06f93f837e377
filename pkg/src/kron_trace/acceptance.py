"""The fifteen acceptance criteria as callable checks.

Each check returns a :class:`Criterion` carrying the pass flag and the
statistics it was judged on. Constants here are the calibrations recorded
in the run manifest; level-stability (max/min of a statistic across levels
or widths) is the binding requirement wherever it appears.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .besov import GASKET_WALK_DIMENSION, ScaleFunction, ThetaField, besov_squared_batch
from .estimates import (
    cap_density_report,
    cap_doubling_report,
    effective_resistance,
    exit_time_report,
    heat_kernel,
    hk_report,
    hm_doubling_report,
    jump_kernel_report,
    killing_report,
)
from .generators import (
    GeneratedDomain,
    gen_attenuated_strip,
    gen_comb,
    gen_grid_slit,
    gen_half_strip,
    gen_path,
    gen_sg_slit,
    gen_star,
)
from .network import energy
from .potential import harmonic_extension, harmonic_measure
from .report import exponent_fit, level_spread
from .trace import schur_trace, star_closed_form, tower_check, trace_energy
from .whitney import build_cover, extension_report, partition_of_unity, restriction_report

STABILITY = 1.2
STRESS_TREND = 4.0

RESISTANCE_TARGET = np.log(5 / 3) / np.log(2)
THETA_TARGET = np.log(10 / 3) / np.log(2)
JUMP_TARGET = -np.log(20 / 3) / np.log(2)
GASKET_HK_TARGET = -0.5757
SLIT_HK_TARGET = -1.0

HALF_STRIP_JUMP_WIDTH = 128
SLIT_GRID = (64, 16)
WHITNEY_EPS = 0.125


@dataclass
class Criterion:
    number: int
    title: str
    passed: bool
    stats: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        shown = ", ".join(f"{k}={_fmt(v)}" for k, v in self.stats.items())
        return f"[{flag}] {self.number:2d}. {self.title}: {shown}"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def gasket_psi() -> ScaleFunction:
    return ScaleFunction(GASKET_WALK_DIMENSION)


def lattice_psi() -> ScaleFunction:
    return ScaleFunction(2.0)


def gasket_field(d: GeneratedDomain, sigma=None) -> ThetaField:
    return ThetaField(gasket_psi(), d.sigma if sigma is None else sigma, d.net.m0, d.geom)


def pole_measure(d: GeneratedDomain) -> np.ndarray:
    return harmonic_measure(d.net, d.pole)


def gaussian_samples(nb: int, k: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal((nb, k))


def tower_mid(d: GeneratedDomain) -> np.ndarray:
    """Boundary plus the vertices whose integer coordinates are all even;
    falls back to every other interior vertex when that adds nothing."""
    net = d.net
    mid = net.boundary.copy()
    for i, vid in enumerate(net.ids):
        parts = vid.split(",")
        if all(p.lstrip("-").isdigit() for p in parts) and all(int(p) % 2 == 0 for p in parts):
            mid[i] = True
    if mid.sum() == net.boundary.sum():
        mid[net.interior_idx[::2]] = True
    if mid.all():
        mid[net.interior_idx[0]] = False
    return mid


# ---------------------------------------------------------------------------


def c01_star_identity(seed: int = 0, n_stars: int = 100) -> Criterion:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_stars):
        n = int(rng.integers(2, 51))
        c = 10.0 ** rng.uniform(-3, 3, n)
        tf = schur_trace(gen_star(c).net)
        gap = np.max(np.abs(tf.c_hat - star_closed_form(c).c_hat)) / c.sum()
        worst = max(worst, float(gap))
    return Criterion(1, "star identity", worst <= 1e-10,
                     {"max_gap_over_sum_c": worst, "stars": n_stars})


def c02_conservative() -> Criterion:
    domains = [gen_sg_slit(n) for n in range(1, 7)] + [gen_half_strip(16, 16)]
    gaps = []
    for d in domains:
        rep = killing_report(schur_trace(d.net), d.sigma)
        gaps.append(rep.extra["max_row_sum"] / rep.extra["diag_scale"])
    worst = float(max(gaps))
    return Criterion(2, "conservativeness", worst <= 1e-10,
                     {"max_kappa_over_diag": worst, "domains": len(domains)})


def c03_tower() -> Criterion:
    domains = [gen_star([1.0, 2.0, 3.0, 4.0]), gen_path(8), gen_half_strip(8, 8),
               gen_half_strip(8, 4, "absorbing"), gen_grid_slit(12, 4)]
    domains += [gen_sg_slit(n) for n in range(1, 6)]
    devs = [tower_check(d.net, tower_mid(d)) for d in domains]
    worst = float(max(devs))
    return Criterion(3, "Schur tower", worst <= 1e-9,
                     {"max_relative_gap": worst, "domains": len(domains)})


def c04_energy_minimality(seed: int = 0, n_data: int = 50, n_pert: int = 20) -> Criterion:
    d = gen_sg_slit(4)
    net = d.net
    tf = schur_trace(net)
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((len(net.boundary_idx), n_data))
    H = harmonic_extension(net, U)
    iidx = net.interior_idx
    min_gain, worst_identity, strict = np.inf, 0.0, True
    for k in range(n_data):
        eh = energy(net, H[:, k])
        et = trace_energy(tf, U[:, k])
        worst_identity = max(worst_identity, abs(et - eh) / eh)
        for _ in range(n_pert):
            phi = np.zeros(net.n)
            phi[iidx] = rng.standard_normal(len(iidx)) * 10.0 ** rng.uniform(-3, 0)
            gain = energy(net, H[:, k] + phi) - eh
            strict &= gain > 0
            min_gain = min(min_gain, gain / energy(net, phi))
        strict &= energy(net, H[:, k]) - eh == 0.0
    ok = strict and worst_identity <= 1e-10
    return Criterion(4, "energy minimality", bool(ok),
                     {"min_gain_over_perturbation_energy": float(min_gain),
                      "identity_gap": float(worst_identity)})


def c05_resistance_exponent(levels=range(3, 8)) -> Criterion:
    scales, R = [], []
    for n in levels:
        d = gen_sg_slit(n)
        tf = schur_trace(d.net, check=False)
        pos = {b: i for i, b in enumerate(tf.ids)}
        i, j = pos["b:" + "1" * (n + 1)], pos["b:" + "1" * n + "2"]
        scales.append(2.0 ** (-n))
        R.append(effective_resistance(tf, i, j))
    fit = exponent_fit(scales, R)
    return Criterion(5, "resistance exponent", 0.69 <= fit.exponent <= 0.79,
                     {"exponent": fit.exponent, "target": RESISTANCE_TARGET,
                      "residual": fit.residual})


def c06_theta_exponent(levels=(4, 5, 6)) -> Criterion:
    from .besov import ls_report

    slopes = []
    for n in levels:
        f = gasket_field(gen_sg_slit(n))
        rep = ls_report(f, min_radius=2 * float(np.min(f.radius_grid)))
        slopes.append(rep.fit.exponent)
    ok = all(1.64 <= s <= 1.84 for s in slopes)
    return Criterion(6, "Theta exponent", ok, {"slopes": slopes, "target": THETA_TARGET})


def half_strip_jump_fit(W: int = HALF_STRIP_JUMP_WIDTH) -> float:
    """Fit of c_hat against distance over pairs 2 <= d <= W/4 that sit at
    least d away from both side walls."""
    d = gen_half_strip(W, W)
    tf = schur_trace(d.net, check=False)
    field_ = ThetaField(lattice_psi(), d.sigma, d.net.m0, d.geom)
    wall = np.minimum.outer(d.wall_distance, d.wall_distance)
    mask = wall >= d.geom.rho_b * (1 - 1e-12)
    rep = jump_kernel_report(tf, d.sigma, field_, fit_window=(2.0, W / 4), pair_mask=mask)
    return rep.fit.exponent


def c07_jump_exponent(levels=(4, 5, 6)) -> Criterion:
    slopes = []
    for n in levels:
        d = gen_sg_slit(n)
        tf = schur_trace(d.net, check=False)
        f = gasket_field(d)
        lo = 2 * float(np.min(f.radius_grid))
        rep = jump_kernel_report(tf, d.sigma, f, fit_window=(lo, d.geom.diam_boundary / 2))
        slopes.append(rep.fit.exponent)
    hs = half_strip_jump_fit()
    ok = all(-2.94 <= s <= -2.54 for s in slopes) and -2.3 <= hs <= -1.8
    return Criterion(7, "jump exponent", ok,
                     {"gasket_slopes": slopes, "gasket_target": JUMP_TARGET,
                      "half_strip_slope": hs})


def c08_jump_comparability(levels=(4, 5, 6)) -> Criterion:
    spreads = []
    for n in levels:
        d = gen_sg_slit(n)
        w = pole_measure(d)
        tf = schur_trace(d.net, check=False)
        rep = jump_kernel_report(tf, w, gasket_field(d, w))
        spreads.append(rep.spread)
    change = abs(spreads[-1] / spreads[-2] - 1)
    ok = all(s <= 50 for s in spreads) and change < 0.2
    return Criterion(8, "jump-kernel comparability", ok,
                     {"spreads": spreads, "last_level_change": float(change)})


def c09_restriction_extension(levels=(3, 4, 5, 6), n_samples: int = 50,
                              seed: int = 7) -> Criterion:
    ext, res = [], []
    for n in levels:
        d = gen_sg_slit(n)
        net = d.net
        f = gasket_field(d)
        cover = build_cover(d.geom, WHITNEY_EPS)
        pou = partition_of_unity(net, cover, gasket_psi())
        U = gaussian_samples(len(net.boundary_idx), n_samples, seed)
        ext.append(extension_report(net, cover, pou, d.sigma, f, U).max)
        res.append(restriction_report(net, f, harmonic_extension(net, U)).max)
    se, sr = level_spread(ext), level_spread(res)
    return Criterion(9, "restriction/extension", se <= 2 and sr <= 2,
                     {"extension_max": ext, "restriction_max": res,
                      "extension_level_spread": se, "restriction_level_spread": sr})


def c10_comparability(levels=(4, 5, 6), n_samples: int = 100, seed: int = 0) -> Criterion:
    spreads = []
    for n in levels:
        d = gen_sg_slit(n)
        tf = schur_trace(d.net, check=False)
        U = gaussian_samples(tf.n, n_samples, seed)
        b = besov_squared_batch(U, gasket_field(d))
        e = np.einsum("ik,ik->k", U, tf.matrix @ U)
        r = e / b
        spreads.append(float(r.max() / r.min()))
    ls = level_spread(spreads)
    ok = all(s <= 100 for s in spreads) and ls <= STABILITY
    return Criterion(10, "energy/Besov comparability", ok,
                     {"spreads": spreads, "level_spread": ls})


def c11_exit_time(levels=(4, 5, 6)) -> Criterion:
    spreads = []
    for n in levels:
        d = gen_sg_slit(n)
        w = pole_measure(d)
        tf = schur_trace(d.net, check=False)
        spreads.append(exit_time_report(tf, w, gasket_field(d, w)).spread)
    ls = level_spread(spreads)
    ok = all(s <= 50 for s in spreads) and ls <= STABILITY
    return Criterion(11, "exit time", ok, {"spreads": spreads, "level_spread": ls})


def _hk_exactness(tf, omega, t_grid) -> tuple[float, float]:
    hk = heat_kernel(tf, omega)
    asym, rise = 0.0, 0.0
    prev = None
    for t in np.sort(t_grid):
        P = (hk.phi * np.exp(-hk.lam * t)) @ hk.phi.T
        asym = max(asym, float(np.max(np.abs(P - P.T)) / np.max(np.abs(P))))
        m = hk.mass(t)
        if prev is not None:
            rise = max(rise, float(np.max(m - prev)))
        prev = m
    return asym, rise


def c12_heat_kernel(levels=(4, 5, 6)) -> Criterion:
    slopes, asym, rise = [], 0.0, 0.0
    for n in levels:
        d = gen_sg_slit(n)
        w = pole_measure(d)
        tf = schur_trace(d.net, check=False)
        rep = hk_report(tf, w, gasket_field(d, w))
        slopes.append(rep.fit.exponent)
        a, m = _hk_exactness(tf, w, rep.extra["t_grid"])
        asym, rise = max(asym, a), max(rise, m)
    W, L = SLIT_GRID
    d = gen_grid_slit(W, L)
    tf = schur_trace(d.net, check=False)
    f = ThetaField(lattice_psi(), d.sigma, d.net.m0, d.geom)
    rep = hk_report(tf, d.sigma, f)
    a, m = _hk_exactness(tf, d.sigma, rep.extra["t_grid"])
    asym, rise = max(asym, a), max(rise, m)
    slit = rep.fit.exponent
    ok = (all(abs(s - GASKET_HK_TARGET) <= 0.10 for s in slopes)
          and abs(slit - SLIT_HK_TARGET) <= 0.15 and asym <= 1e-12 and rise <= 1e-12)
    return Criterion(12, "heat kernel", ok,
                     {"gasket_slopes": slopes, "slit_slope": slit, "max_asymmetry": asym,
                      "max_mass_increase": rise})


def doubling_constants(d: GeneratedDomain, psi: ScaleFunction) -> dict:
    net, g = d.net, d.geom
    return {"hm_doubling": hm_doubling_report(net, g, [d.pole]).max,
            "cap_doubling": cap_doubling_report(net, g).max,
            "cap_density": cap_density_report(net, g, psi).min}


def _trend(rows: list[dict]) -> dict:
    return {k: level_spread([r[k] for r in rows]) for k in rows[0]}


def c13_doubling_density() -> Criterion:
    sg = _trend([doubling_constants(gen_sg_slit(n), gasket_psi()) for n in (3, 4, 5, 6)])
    hs = _trend([doubling_constants(gen_half_strip(W, W), lattice_psi()) for W in (8, 16, 32)])
    comb = [gen_comb(n) for n in (8, 12, 16)]
    comb_trend = {
        "hm_doubling": level_spread([hm_doubling_report(c.net, c.geom, [c.pole]).max
                                     for c in comb]),
        "cap_doubling": level_spread([cap_doubling_report(c.net, c.geom).max for c in comb]),
    }
    att_trend = level_spread([cap_density_report(a.net, a.geom, lattice_psi()).min
                              for a in (gen_attenuated_strip(W) for W in (8, 16, 32))])
    stable = all(v <= STABILITY for v in list(sg.values()) + list(hs.values()))
    flagged = max(comb_trend.values()) > STRESS_TREND and att_trend > STRESS_TREND
    return Criterion(13, "doubling and capacity density", stable and flagged,
                     {"gasket_spread": max(sg.values()), "half_strip_spread": max(hs.values()),
                      "comb_trend": max(comb_trend.values()), "attenuated_trend": att_trend})


def c14_killing(widths=(8, 16, 32)) -> Criterion:
    spreads, gap = [], 0.0
    for W in widths:
        d = gen_half_strip(W, W, "absorbing")
        tf = schur_trace(d.net, check=False)
        rep = killing_report(tf, pole_measure(d))
        spreads.append(rep.spread)
        gap = max(gap, rep.extra["identity_gap"] / rep.extra["sum_kappa"])
    ls = level_spread(spreads)
    ok = all(s <= 50 for s in spreads) and ls <= STABILITY and gap <= 1e-12
    return Criterion(14, "killing estimate", ok,
                     {"spreads": spreads, "width_spread": ls, "identity_gap": gap})


def c15_harmonic_vs_uniform(levels=(3, 4, 5, 6)) -> Criterion:
    spreads = []
    for n in levels:
        d = gen_sg_slit(n)
        r = pole_measure(d) / d.sigma
        spreads.append(float(r.max() / r.min()))
    return Criterion(15, "harmonic vs uniform measure", max(spreads) <= 10, {"spreads": spreads})


CRITERIA = [
    c01_star_identity, c02_conservative, c03_tower, c04_energy_minimality,
    c05_resistance_exponent, c06_theta_exponent, c07_jump_exponent,
    c08_jump_comparability, c09_restriction_extension, c10_comparability,
    c11_exit_time, c12_heat_kernel, c13_doubling_density, c14_killing,
    c15_harmonic_vs_uniform,
]


def run(check) -> Criterion:
    t0 = time.perf_counter()
    out = check()
    out.seconds = time.perf_counter() - t0
    return out


def run_all(only=None) -> list[Criterion]:
    chosen = CRITERIA if only is None else [CRITERIA[k - 1] for k in only]
    return [run(c) for c in chosen]
