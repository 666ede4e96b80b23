import numpy as np
import pytest

from ewkg.core import CauchyState, SimConfig, apply_axis_parity, build_grid
from ewkg.diagnostics import (axis_geometry, cone_energy_series, densities,
                              energy, energy_cone, fit_loglog_slope, flux_PT,
                              identity_residuals, morawetz_integral,
                              nonconcentration_suite, trace_cone, weighted_sups)
from ewkg.errors import ConeOutOfRangeError


def flat_state(grid, **fields):
    st = CauchyState.zero(grid)
    g = grid.n_ghost
    for name, arr in fields.items():
        getattr(st, name)[g:-g] = arr
    return apply_axis_parity(st)


def test_densities_vacuum_zero():
    grid = build_grid(SimConfig(n_cells=64, r_max=16.0))
    d = densities(flat_state(grid), 1.0)
    for arr in (d.e, d.m_dens, d.f, d.e_kin):
        assert np.all(arr == 0.0)


def test_densities_constant_field_dropout():
    # phi = c, gamma = 0, flat metric, m = 1: e = c^2/2 = f/2, m_dens = 0
    grid = build_grid(SimConfig(n_cells=64, r_max=16.0))
    c = 0.4
    d = densities(flat_state(grid, phi=np.full(64, c)), 1.0)
    assert np.allclose(d.e, 0.5 * c**2, atol=1e-14)
    assert np.allclose(d.f, c**2, atol=1e-14)
    assert np.allclose(d.m_dens, 0.0, atol=1e-14)


def test_momentum_bounded_by_energy(cauchy):
    run = cauchy(mass_m=1.0, n_cells=256, r_max=24.0, t_final=2.0,
                 snapshot_every=8, amp_phi=0.08, center=4.0, width=1.0)
    for st in run.snapshots:
        d = densities(st, 1.0)
        assert np.all(d.e >= np.abs(d.m_dens) - 1e-15)
        assert np.all(d.e - d.e_kin - 0.5 * d.f >= -1e-15)


def test_energy_against_fine_quadrature():
    # E(0) for the gaussian via an independent 10x-resolution quadrature
    from ewkg.initial_data import build_initial_state
    from ewkg.core import InitialDataFamily

    fam = InitialDataFamily(amp_phi=0.1, center=4.0, width=1.0)
    cfg = SimConfig(mass_m=1.0, n_cells=2048, r_max=24.0, data_family=fam)
    grid = build_grid(cfg)
    st = build_initial_state(fam, grid, 1.0)
    e_coarse = energy(st, 1.0)
    grid_f = build_grid(SimConfig(mass_m=1.0, n_cells=20480, r_max=24.0, data_family=fam))
    st_f = build_initial_state(fam, grid_f, 1.0)
    e_fine = energy(st_f, 1.0)
    assert abs(e_coarse - e_fine) / e_fine < 1e-4


def test_partial_energy_full_ball_equals_total(cauchy):
    run = cauchy(mass_m=1.0, n_cells=256, r_max=24.0, t_final=2.0,
                 snapshot_every=8, amp_phi=0.08, center=4.0, width=1.0)
    st = run.snapshots[-1]
    assert energy(st, 1.0, up_to_r=run.grid.r_max) == energy(st, 1.0)
    assert energy(st, 1.0, up_to_r=4.0) < energy(st, 1.0)


def test_cone_mantle_near_flat(cauchy):
    run = cauchy(mass_m=1.0, n_cells=256, r_max=24.0, t_final=2.0,
                 snapshot_every=8, amp_phi=0.08, center=4.0, width=1.0)
    cone = trace_cone(run, apex_time=4.0)
    # small data: mantle within O(amp^2) of the flat line apex - t
    assert np.max(np.abs(cone.r2 - (4.0 - run.times))) < 0.05
    assert cone.r1_of_t(0.0) == pytest.approx(0.5 * cone.r2_of_t(0.0))


def test_cone_requires_apex_in_range(cauchy):
    run = cauchy(mass_m=1.0, n_cells=256, r_max=24.0, t_final=2.0,
                 snapshot_every=8, amp_phi=0.08, center=4.0, width=1.0)
    with pytest.raises(ConeOutOfRangeError):
        trace_cone(run, apex_time=30.0)  # mantle exits the grid
    cone = trace_cone(run, apex_time=4.0)
    with pytest.raises(ConeOutOfRangeError):
        energy_cone(run, cone, 5.0)


def test_cone_energy_disjoint_data(cauchy):
    # data causally disjoint from the cone: every cone quantity vanishes
    run = cauchy(mass_m=1.0, n_cells=256, r_max=48.0, t_final=2.0,
                 snapshot_every=8, amp_phi=0.1, center=16.0, width=0.5)
    cone = trace_cone(run, apex_time=4.0)
    assert energy_cone(run, cone, run.times[0]) <= 1e-10
    suite = nonconcentration_suite(run, cone)
    for series in (suite.potential_cone, suite.e_ext, suite.kin_rate,
                   suite.radial_rate):
        assert np.max(np.abs(series)) <= 1e-10


def test_flux_monotone_series_and_stokes(cauchy):
    run = cauchy(mass_m=1.0, n_cells=512, r_max=24.0, t_final=6.0,
                 snapshot_every=8, apex_time=7.5, amp_phi=0.08,
                 center=4.0, width=1.0)
    cone = trace_cone(run)
    e0 = energy(run.snapshots[0], 1.0)
    series = cone_energy_series(run, cone)
    assert np.max(np.diff(series)) <= 1e-8 * e0
    fx = flux_PT(run, cone, run.times[2], run.times[-3])
    assert fx.value >= -1e-8 * e0
    assert fx.residual <= 1e-2 * e0


def test_nonconcentration_trends(cauchy):
    # slow potential-kinetic exchange (small mass) and data that clear the
    # mantle before the run ends keep every series transport-dominated
    run = cauchy(mass_m=0.25, n_cells=512, r_max=32.0, t_final=6.5,
                 snapshot_every=8, apex_time=7.0, cone_fraction=0.25,
                 amp_phi=0.08, center=5.0, width=1.25)
    cone = trace_cone(run)
    suite = nonconcentration_suite(run, cone)
    for series in (suite.potential_cone, suite.e_ext, suite.kin_rate,
                   suite.radial_rate):
        jitter = 0.05 * np.max(series)
        assert np.all(np.diff(series[:-1]) <= jitter)
        assert series[-2] < 0.5 * np.max(series)


def test_identity_residuals_vacuum(cauchy):
    run = cauchy(mass_m=1.0, n_cells=64, r_max=16.0, t_final=0.5,
                 snapshot_every=2, kind="zero")
    r324, r325, F2, G2, Fh, Gh = identity_residuals(run, len(run.snapshots) // 2)
    assert r324 <= 1e-12 and r325 <= 1e-12


def test_identity_residual_convergence(cauchy):
    vals = {}
    for n in (256, 512, 1024):
        run = cauchy(mass_m=1.0, n_cells=n, r_max=24.0, t_final=0.75,
                     snapshot_every=4, amp_phi=0.05, center=4.0, width=1.0)
        i = run.index_at(0.375)
        r324, r325, *_ = identity_residuals(run, i)
        vals[n] = (r324, r325)
    for c in (0, 1):
        assert 2.8 <= vals[256][c] / vals[512][c] <= 5.5
        assert 2.8 <= vals[512][c] / vals[1024][c] <= 5.5


def test_null_energy_quantities_exact_identities(cauchy):
    run = cauchy(mass_m=1.0, n_cells=256, r_max=24.0, t_final=2.0,
                 snapshot_every=8, amp_phi=0.08, center=4.0, width=1.0)
    i = len(run.snapshots) // 2
    _, _, F2, G2, Fh, Gh = identity_residuals(run, i)
    d = densities(run.snapshots[i], 1.0)
    r = run.grid.centers
    assert np.allclose(G2 - F2, 2.0 * r * d.m_dens, rtol=1e-12, atol=1e-18)
    assert np.allclose(G2 + F2, 2.0 * r * d.e, rtol=1e-12, atol=1e-18)
    assert np.all(F2 >= -1e-16) and np.all(G2 >= -1e-16)
    eb = np.exp(run.snapshots[i].interior("beta"))
    assert np.allclose(Fh, eb * np.sqrt(np.maximum(F2, 0)), atol=1e-15)


def test_weighted_sups_vacuum_and_response(cauchy):
    runz = cauchy(mass_m=1.0, n_cells=64, r_max=16.0, t_final=0.5,
                  snapshot_every=2, kind="zero")
    conez = trace_cone(runz, apex_time=1.0)
    s = weighted_sups(runz, conez, 0.6)
    assert s.x_sup == 0.0 and s.ru2_sup == 0.0 and s.x0_sup == 0.0
    assert s.y0_sup == 0.0 and s.l0_sup == 0.0

    big = cauchy(mass_m=1.0, n_cells=256, r_max=24.0, t_final=4.0,
                 snapshot_every=8, apex_time=6.0, amp_phi=0.08,
                 center=4.0, width=1.0)
    small = cauchy(mass_m=1.0, n_cells=256, r_max=24.0, t_final=4.0,
                   snapshot_every=8, apex_time=6.0, amp_phi=0.04,
                   center=4.0, width=1.0)
    xb = weighted_sups(big, trace_cone(big), 0.6).x_sup
    xs = weighted_sups(small, trace_cone(small), 0.6).x_sup
    assert xs < xb  # monotone amplitude response


def test_morawetz_vacuum_and_sigma_variants(cauchy):
    runz = cauchy(mass_m=1.0, n_cells=64, r_max=16.0, t_final=0.5,
                  snapshot_every=2, kind="zero")
    conez = trace_cone(runz, apex_time=1.0)
    total, partial = morawetz_integral(runz, conez, 1.5)
    assert total == 0.0

    run = cauchy(mass_m=1.0, n_cells=256, r_max=24.0, t_final=4.0,
                 snapshot_every=8, apex_time=6.0, amp_phi=0.08,
                 center=4.0, width=1.0)
    cone = trace_cone(run)
    t1, p1 = morawetz_integral(run, cone, 1.5)
    t2, p2 = morawetz_integral(run, cone, 1.4)
    assert np.isfinite(t1) and np.isfinite(t2) and t1 > 0 and t2 > 0
    assert np.all(np.diff(p1) >= 0)  # cumulative series


def test_axis_geometry_vacuum(nullrun):
    run = nullrun(mass_m=1.0, n_cells=64, r_max=16.0, t_final=3.0, kind="zero")
    geo = axis_geometry(run)
    assert np.max(geo.max_dev_ru) == 0.0
    assert np.max(geo.max_dev_rv) == 0.0
    assert np.max(geo.max_dev_r) == 0.0


def test_axis_geometry_amplitude_scaling(nullrun):
    big = nullrun(mass_m=1.0, n_cells=256, r_max=16.0, t_final=4.0,
                  amp_phi=0.08, center=2.0, width=0.5)
    small = nullrun(mass_m=1.0, n_cells=256, r_max=16.0, t_final=4.0,
                    amp_phi=0.04, center=2.0, width=0.5)
    gb, gs = axis_geometry(big), axis_geometry(small)
    ratio = np.max(gb.max_dev_ru) / np.max(gs.max_dev_ru)
    assert 2.0 <= ratio <= 8.0  # quadratic-in-amplitude response, factor-2 slack


def test_loglog_fit_drops_floor_values():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    y = np.array([1e-16, 4.0, 16.0, 64.0])
    assert fit_loglog_slope(x, y) == pytest.approx(2.0, abs=1e-6)


def test_divergence_identities_symbolic():
    # the residual operators implement genuine on-shell identities
    import sympy as sp

    t, r, m = sp.symbols("t r m", positive=True)
    al, be, ga, ph = (sp.Function(n)(t, r) for n in ("al", "be", "ga", "ph"))
    dt = lambda f: sp.diff(f, t)
    dr = lambda f: sp.diff(f, r)
    common = (r * sp.exp(2 * be - 2 * al) * (dt(ga) ** 2 + dt(ph) ** 2 / 2)
              + r * (dr(ga) ** 2 + dr(ph) ** 2 / 2))
    mass = m**2 / 2 * r * sp.exp(2 * be - 2 * ga) * ph**2
    beta_r, alpha_r = common + mass, common - mass
    beta_t = 2 * r * dt(ga) * dr(ga) + r * dt(ph) * dr(ph)
    wave = lambda f, src: (-(dt(be) - dt(al)) * dt(f)
                           + sp.exp(2 * al - 2 * be)
                           * (dr(dr(f)) + dr(f) / r + (dr(al) - dr(be)) * dr(f))
                           + src)
    gamma_tt = wave(ga, m**2 / 2 * sp.exp(2 * al - 2 * ga) * ph**2)
    phi_tt = wave(ph, -m**2 * sp.exp(2 * al - 2 * ga) * ph)
    e = (sp.exp(-2 * al) * dt(ga) ** 2 + sp.exp(-2 * be) * dr(ga) ** 2
         + sp.exp(-2 * al) * dt(ph) ** 2 / 2 + sp.exp(-2 * be) * dr(ph) ** 2 / 2
         + m**2 / 2 * sp.exp(-2 * ga) * ph**2)
    mom = sp.exp(-al - be) * (2 * dt(ga) * dr(ga) + dt(ph) * dr(ph))

    def on_shell(expr):
        expr = expr.subs({sp.diff(ga, t, t): gamma_tt, sp.diff(ph, t, t): phi_tt})
        expr = expr.subs({sp.diff(be, t, r): dr(beta_t),
                          sp.diff(al, t, r): sp.diff(alpha_r, t)})
        return expr.subs({sp.diff(be, r): beta_r, sp.diff(al, r): alpha_r,
                          sp.diff(be, t): beta_t})

    res1 = dt(r * sp.exp(be) * e) - dr(r * sp.exp(al) * mom)
    assert sp.simplify(on_shell(on_shell(sp.expand(res1)))) == 0

    Tg, Tp = sp.exp(-al) * dt(ga), sp.exp(-al) * dt(ph)
    Rg, Rp = sp.exp(-be) * dr(ga), sp.exp(-be) * dr(ph)
    f_dens = m**2 * sp.exp(-2 * ga) * ph**2
    L0 = (sp.Rational(1, 2) * (-2 * Tg**2 - Tp**2 + 2 * Rg**2 + Rp**2)
          - 2 * m**2 * sp.exp(-2 * ga) * r * (ph * dr(ph) - ph**2 * dr(ga))
          - sp.Rational(1, 2) * m**2 * sp.exp(-2 * ga) * ph**2)
    L = (r * sp.exp(al) * dr(al) / 2 * (2 * Tg**2 + Tp**2 + 2 * Rg**2 + Rp**2 - f_dens)
         + sp.exp(al) * L0 - r * dt(be) * sp.exp(be) * mom)
    res2 = dt(r * sp.exp(be) * mom) - dr(r * sp.exp(al) * e) - L
    assert sp.simplify(on_shell(on_shell(sp.expand(res2)))) == 0
