"""Acceptance suite: one test per primary criterion, each printing PASS/FAIL.

Tolerances are pinned here, nothing deferred.  Reference resolution is
n_cells = 1024; convergence statements use resolution doublings ending at
the reference, with orders measured either per doubling or by least-squares
across three resolutions where a fitted order is called for.
"""

import numpy as np

from ewkg.core import InitialDataFamily, SimConfig, build_grid
from ewkg.cauchy import residual_evolution_2_13, residual_momentum, sample_field
from ewkg.diagnostics import (axis_geometry, cone_energy_series, densities,
                              energy, energy_cone, flux_PT,
                              identity_residuals, morawetz_integral,
                              nonconcentration_suite, trace_cone, weighted_sups)
from ewkg.flat_oracle import AnalyticData, data_layer, weighted_tail_integral
from ewkg.initial_data import build_initial_state, validate_data
from ewkg.nullev import residual_raychaudhuri

# small-data reference family for the cone diagnostics (slow Klein-Gordon
# exchange so transport dominates the trend criteria)
CONE_KW = dict(mass_m=0.25, r_max=32.0, t_final=6.5, apex_time=7.0,
               cone_fraction=0.25, snapshot_every=8,
               amp_phi=0.08, center=5.0, width=1.25)
# coupled m = 1 family for the residual-convergence criteria
M1_KW = dict(mass_m=1.0, r_max=24.0, t_final=0.75, snapshot_every=4,
             amp_phi=0.05, center=4.0, width=1.0)
NULL_KW = dict(mass_m=1.0, r_max=16.0, t_final=3.0,
               amp_phi=0.05, center=2.0, width=0.5)


def report(criterion, passed, detail):
    print(f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}")
    assert passed, f"criterion {criterion}: {detail}"


def test_criterion_01_vacuum_exactness(cauchy, nullrun):
    # 1000 steps in each scheme keep every field at round-off zero
    run = cauchy(mass_m=1.0, n_cells=64, r_max=16.0, t_final=125.0,
                 snapshot_every=100, kind="zero")
    assert round(run.config.t_final / run.dt) >= 1000
    worst_c = max(max(np.max(np.abs(s.interior(f))) for f in
                      ("gamma", "gamma_t", "phi", "phi_t", "alpha", "beta"))
                  for s in run.snapshots)
    nr = nullrun(mass_m=0.0, n_cells=2048, r_max=16.0, t_final=8.0, kind="zero")
    assert len(nr.slices) >= 1000
    worst_n = max(max(np.max(np.abs(s.gamma)), np.max(np.abs(s.phi)),
                      np.max(np.abs(s.lam))) for s in nr.slices)
    r_exact = max(np.max(np.abs(s.r - s.R)) for s in nr.slices[1:])
    ok = worst_c <= 1e-12 and worst_n <= 1e-12 and r_exact == 0.0
    report(1, ok, f"cauchy max {worst_c:.1e}, null max {worst_n:.1e}, "
                  f"|r-(v-u)/2| = {r_exact:.1e} over {len(nr.slices)} slices")


def test_criterion_02_flat_oracle_agreement(cauchy):
    fam = dict(mass_m=0.0, r_max=24.0, t_final=6.5, frozen_metric=True,
               snapshot_every=4, amp_phi=0.1, center=4.0, width=1.0)
    data_an = AnalyticData.gaussian(0.1, 4.0, 1.0)
    events = [(1.5, 0.0), (2.0, 1.0), (2.5, 2.0), (3.0, 0.5), (3.5, 1.5),
              (4.0, 0.0), (4.5, 2.5), (5.0, 1.0), (2.25, 3.0), (5.5, 0.25),
              (1.0, 2.0), (6.0, 2.0), (3.75, 0.75), (4.25, 4.0), (2.75, 1.25),
              (5.25, 3.25), (1.75, 0.25), (6.0, 0.5), (3.25, 2.25), (4.75, 1.75)]
    exact = np.array([data_layer(data_an, T, R, tol=1e-9) for T, R in events])
    scale = np.max(np.abs(exact))
    errs = {}
    for n in (512, 1024, 2048):
        run = cauchy(n_cells=n, **fam)
        vals = np.array([sample_field(run, "phi", T, R) for T, R in events])
        errs[n] = np.max(np.abs(vals - exact)) / scale
    o1 = np.log2(errs[512] / errs[1024])
    o2 = np.log2(errs[1024] / errs[2048])
    ok = errs[2048] <= 1e-3 and 1.9 <= o1 <= 2.1 and 1.9 <= o2 <= 2.1
    report(2, ok, f"rel err {errs[2048]:.2e} at n=2048 (<= 1e-3), "
                  f"orders {o1:.2f}, {o2:.2f} in [1.9, 2.1]")


def test_criterion_03_constraint_propagation(cauchy, nullrun):
    mom, r213 = {}, {}
    for n in (512, 1024):
        run = cauchy(n_cells=n, **M1_KW)
        i = run.index_at(0.375)
        mom[n] = residual_momentum(run, i)
        r213[n] = residual_evolution_2_13(run, i)
    ray = {}
    for n in (512, 1024):
        nr = nullrun(n_cells=n, **NULL_KW)
        k = round(2.25 / nr.h)
        ray[n] = residual_raychaudhuri(nr.slices[k], nr.slices[k - 1],
                                       nr.slices[k + 1])
    ratios = dict(momentum=mom[512] / mom[1024],
                  evolution=r213[512] / r213[1024],
                  ray_u=ray[512][0] / ray[1024][0],
                  ray_v=ray[512][1] / ray[1024][1])
    ok = all(3.0 <= r <= 5.0 for r in ratios.values())
    report(3, ok, "per-doubling shrink " + ", ".join(
        f"{k} {v:.2f}" for k, v in ratios.items()) + " (all in [3, 5])")


def test_criterion_04_energy_monotonicity(cauchy):
    run = cauchy(n_cells=1024, **CONE_KW)
    cone = trace_cone(run)
    e0 = energy(run.snapshots[0], run.config.mass_m)
    series = cone_energy_series(run, cone)
    worst = float(np.max(np.diff(series)))
    quad_series = np.array([energy_cone(run, cone, t) for t in run.times])
    ok = worst <= 1e-8 * e0
    report(4, ok, f"max increase of the flux-drained E^O series {worst:.2e} "
                  f"<= 1e-8 E(0) = {1e-8 * e0:.2e} "
                  f"(raw quadrature series jitter {np.max(np.diff(quad_series)):.1e})")


def test_criterion_05_discrete_stokes(cauchy):
    res = {}
    for n in (256, 512, 1024):
        run = cauchy(n_cells=n, **CONE_KW)
        cone = trace_cone(run)
        fx = flux_PT(run, cone, 1.0, 5.0)
        res[n] = fx.residual
    run = cauchy(n_cells=1024, **CONE_KW)
    e0 = energy(run.snapshots[0], run.config.mass_m)
    order = np.log2(res[256] / res[1024]) / 2.0
    ok = res[1024] <= 1e-2 * e0 and order >= 1.5
    report(5, ok, f"Stokes residual {res[1024]:.2e} <= 1e-2 E(0) = {1e-2 * e0:.2e}, "
                  f"order {order:.2f} >= 1.5")


def test_criterion_06_cross_scheme_agreement(cauchy, nullrun):
    from ewkg.cli import cauchy_axis_series

    kw = dict(mass_m=1.0, r_max=24.0, t_final=7.0, snapshot_every=4,
              amp_phi=0.025, center=4.0, width=1.0)
    worst = {}
    for n in (256, 512, 1024):
        crun = cauchy(n_cells=n, apex_time=9.0, **kw)
        nrun = nullrun(n_cells=n, apex_time=9.0, **kw)
        tc, gc, pc = cauchy_axis_series(crun)
        tn, gn, pn = nrun.axis_series()
        times = np.linspace(0.15 * 7.0, 0.95 * 7.0, 20)
        sg = max(np.max(np.abs(gc)), 1e-30)
        sp = max(np.max(np.abs(pc)), 1e-30)
        w = 0.0
        for t in times:
            w = max(w, abs(np.interp(t, tc, gc) - np.interp(t, tn, gn)) / sg,
                    abs(np.interp(t, tc, pc) - np.interp(t, tn, pn)) / sp)
        worst[n] = w
    order = np.polyfit(np.log2([256, 512, 1024]),
                       np.log2([worst[256], worst[512], worst[1024]]), 1)[0]
    ok = worst[1024] <= 5e-3 and -order >= 1.9
    report(6, ok, f"worst axis rel diff {worst[1024]:.2e} <= 5e-3 at n=1024, "
                  f"fitted order {-order:.2f} >= 1.9 over three resolutions")


def test_criterion_07_data_validation():
    cfg = SimConfig(mass_m=1.0, n_cells=512, r_max=24.0,
                    data_family=InitialDataFamily(amp_phi=0.1, center=4.0, width=1.0))
    grid = build_grid(cfg)
    state = build_initial_state(cfg.data_family, grid, cfg.mass_m)
    rep = validate_data(state, cfg)
    sweep_amp, sweep_reason = None, "none"
    amp = 0.1
    while amp < 100.0:
        try:
            fam = InitialDataFamily(amp_phi=amp, center=4.0, width=1.0)
            st = build_initial_state(fam, grid, cfg.mass_m)
            r = validate_data(st, cfg)
            if not r.energy_below_2pi or not r.cond_1_19_ok:
                sweep_amp, sweep_reason = amp, (
                    "energy >= 2pi" if not r.energy_below_2pi else "data conditions")
                break
        except Exception as exc:
            sweep_amp, sweep_reason = amp, type(exc).__name__
            break
        amp *= 2.0
    ok = rep.energy_below_2pi and rep.cond_1_19_ok and sweep_amp is not None
    report(7, ok, f"default family E(0) = {rep.total_energy:.4f} < 2pi, "
                  f"conditions ok; sweep first violation at amp_phi = "
                  f"{sweep_amp} ({sweep_reason})")


def test_criterion_08_identity_residuals(cauchy):
    runz = cauchy(mass_m=1.0, n_cells=64, r_max=16.0, t_final=0.5,
                  snapshot_every=2, kind="zero")
    rz = identity_residuals(runz, len(runz.snapshots) // 2)
    vac_ok = rz[0] <= 1e-12 and rz[1] <= 1e-12
    vals = {}
    for n in (256, 512, 1024):
        run = cauchy(n_cells=n, **M1_KW)
        i = run.index_at(0.375)
        r324, r325, F2, G2, Fh, Gh = identity_residuals(run, i)
        vals[n] = (r324, r325)
        d = densities(run.snapshots[i], run.config.mass_m)
        r = run.grid.centers
        alg_ok = (np.allclose(G2 - F2, 2 * r * d.m_dens, rtol=1e-12, atol=1e-18)
                  and np.allclose(G2 + F2, 2 * r * d.e, rtol=1e-12, atol=1e-18))
        assert alg_ok
    orders = [0.5 * np.log2(vals[256][c] / vals[1024][c]) for c in (0, 1)]
    ok = vac_ok and all(1.7 <= o <= 2.4 for o in orders)
    report(8, ok, f"vacuum residuals {rz[0]:.1e}/{rz[1]:.1e} <= 1e-12; "
                  f"coupled orders {orders[0]:.2f}, {orders[1]:.2f} "
                  f"(2nd order); G^2 +- F^2 identities hold to round-off")


def test_criterion_09_axis_geometry(nullrun):
    kw = dict(mass_m=1.0, n_cells=512, r_max=16.0, t_final=4.0,
              center=2.0, width=0.5)
    big = nullrun(amp_phi=0.08, **kw)
    small = nullrun(amp_phi=0.04, **kw)
    gb, gs = axis_geometry(big), axis_geometry(small)
    half = len(gb.v) // 2
    slope = float(np.nanmedian(gb.slope_r[half:]))
    ratio = float(np.max(gb.max_dev_ru) / np.max(gs.max_dev_ru))
    ok = slope >= 1.9 and 3.0 <= ratio <= 5.0
    report(9, ok, f"|r - R| log-log slope {slope:.2f} >= 1.9 (innermost decade), "
                  f"|r_u + 1/2| amplitude-halving ratio {ratio:.2f} in [3, 5]")


def test_criterion_10_boundedness_sups(cauchy):
    sups = {}
    for n in (512, 1024):
        run = cauchy(n_cells=n, **CONE_KW)
        s = weighted_sups(run, trace_cone(run), run.config.delta)
        sups[n] = (s.ru2_sup, s.x_sup)
    rel_ru2 = abs(sups[512][0] - sups[1024][0]) / sups[1024][0]
    rel_x = abs(sups[512][1] - sups[1024][1]) / sups[1024][1]
    ok = rel_ru2 <= 0.05 and rel_x <= 0.05
    report(10, ok, f"sup r|U|^2 changes {100 * rel_ru2:.2f}%, "
                   f"X = sup r^d|U_v| changes {100 * rel_x:.2f}% "
                   f"across one doubling (<= 5%)")


def test_criterion_11_morawetz(cauchy):
    vals = {}
    for amp in (0.08, 0.04, 0.02, 0.01):
        run = cauchy(n_cells=512, **{**CONE_KW, "amp_phi": amp})
        cone = trace_cone(run)
        total, _ = morawetz_integral(run, cone, run.config.sigma)
        e0 = energy(run.snapshots[0], run.config.mass_m)
        vals[amp] = total / e0
        assert np.isfinite(total)
    ratios = [vals[0.08] / vals[0.04], vals[0.04] / vals[0.02],
              vals[0.02] / vals[0.01]]
    ok = all(0.5 <= r <= 2.0 for r in ratios)
    report(11, ok, "value/E(0) ratios across amplitude halvings "
                   + ", ".join(f"{r:.2f}" for r in ratios) + " (within factor 2)")


def test_criterion_12_tail_integral():
    errs = []
    for mu in (0.1, 1.0, 10.0):
        value, _ = weighted_tail_integral(mu, 1.0, 0.5)
        errs.append(abs(value - np.pi / np.sqrt(mu)))
    ratios = [weighted_tail_integral(mu, 1.0, 0.5)[1]
              for mu in np.logspace(-2, 2, 9)]
    spread = (max(ratios) - min(ratios)) / min(ratios)
    ok = max(errs) <= 1e-6 and spread <= 0.10
    report(12, ok, f"max |integral - pi mu^-1/2| = {max(errs):.1e} <= 1e-6, "
                   f"bound ratio spread {100 * spread:.2f}% <= 10% over mu in [1e-2, 1e2]")


def test_criterion_13_nonconcentration(cauchy):
    disjoint = cauchy(mass_m=1.0, n_cells=256, r_max=48.0, t_final=2.0,
                      snapshot_every=8, apex_time=4.0, amp_phi=0.1,
                      center=16.0, width=0.5)
    cone_d = trace_cone(disjoint)
    sd = nonconcentration_suite(disjoint, cone_d)
    vanish = max(np.max(np.abs(g)) for g in
                 (sd.potential_cone, sd.e_ext, sd.kin_rate, sd.radial_rate))
    run = cauchy(n_cells=1024, **CONE_KW)
    suite = nonconcentration_suite(run, trace_cone(run))
    worst_jump = 0.0
    for series in (suite.potential_cone, suite.e_ext, suite.kin_rate,
                   suite.radial_rate):
        worst_jump = max(worst_jump,
                         float(np.max(np.diff(series[:-1])) / np.max(series)))
    ok = vanish <= 1e-10 and worst_jump <= 0.05
    report(13, ok, f"disjoint-cone quantities <= {vanish:.1e} (<= 1e-10); "
                   f"worst trend increase {100 * worst_jump:.1f}% of max (<= 5%)")
