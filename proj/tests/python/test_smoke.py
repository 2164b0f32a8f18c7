import math

import pyorbistab as po


def test_registry_and_orbit():
    assert "bh-circle" in po.registered_system_names()
    reg = po.make_system("bh-circle", {"a": 1.0})
    rep = po.verify_orbit(reg.system, reg.orbit, 256)
    assert rep.max_residual < 1e-10


def test_projection_frame():
    reg = po.make_system("bh-circle", {"a": 1.0})
    s = po.project(reg.orbit, [1.1, 0.0, 0.2])
    assert abs(s - math.pi / 2.0) < 1e-8
    fr = po.frame_at(reg.system, reg.orbit, 0.7)
    assert abs(fr.rho - 1.0) < 1e-10


def test_design_pipeline():
    reg = po.make_system("bh-circle", {"a": 1.0})
    grid = 192
    comp = po.comparison_system(reg.system, reg.orbit, grid)
    sol = po.solve_prde(comp, [[1, 0, 0], [0, 1, 0], [0, 0, 1]], [[1.0]])
    assert sol.converged
    gain = po.gain_from_riccati(sol, comp, [[1.0]])

    tvl = po.tvl_orthogonal(reg.system, reg.orbit, grid)
    M = po.monodromy(tvl, gain, po.GainClosure.gain_times_omega)
    spec = po.spectrum(M, tvl.time_period())
    verdict = po.andronov_vitt_verdict(spec)
    assert verdict == po.StabilityVerdict.orbitally_stable

    trace = po.simulate_closed_loop(
        reg.system, reg.orbit, gain, [1.15, 0.0, 0.05], 6
    )
    assert not trace.truncated
    metrics = po.orbital_convergence_metrics(trace, reg.system, reg.orbit)
    assert metrics.final_distance < 1e-3


def test_analytic_gain():
    gain = po.analytic_example_gain(1.0, 128)
    K = gain.K(0.0)
    assert abs(K[0][1] + 1.0) < 1e-12
