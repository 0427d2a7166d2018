#!/usr/bin/env python3
"""Smoke test for the szilard_py extension module.

Build and run with:
    bash python/run_smoke.sh
"""
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import szilard_py as sz


def close(value, target, tol, label):
    assert abs(value - target) <= tol, f"{label}: {value} vs {target} (tol {tol})"
    print(f"  {label}: {value:.6g}  ok")


print("model:")
params = sz.SystemParams()
rates = sz.coupling_ladder(params)
close(rates[len(rates) // 2], 21.70e3, 10.0, "resonant coupling rate (1/s)")
close(sz.total_coupling(params), 35.7e3, 100.0, "total coupling (1/s)")
close(params.gamma_1(), 1.0 / 21.5e-6, 0.02 / 21.5e-6, "gamma_1 (1/s)")
g, delta = sz.derive_g_delta(params, 0.5e6)
close(g / (2 * math.pi), 11.7e3, 0.3e3, "g / 2pi (Hz)")
close(delta / (2 * math.pi), 166e3, 2e3, "delta / 2pi (Hz)")
close(sz.thermal_population(1.2e9, 0.0283), 0.1156, 5e-4, "p_th at 28.3 mK")
close(sz.population_to_temperature(0.029, 1.2e9) * 1e3, 16.4, 0.1, "T(p=0.029) (mK)")
pops = sz.multilevel_thermal([0.0, 1.2e9, 7.8e9], 0.075)
close(pops[0], 0.680, 0.005, "ground population at 75 mK")

print("dynamics:")
exp = sz.Experiment()
exp.stabilize("e", 10_000, 2e-6)
exp.initialize("g")
exp.monitor(50e-3, 2e-6)
det = sz.run_deterministic(params, exp, [0.0, 1e-6, 100e-6])
close(det["p_eq"][0], 0.777, 0.01, "p_eq(0+) after heating")
assert det["p_q"][0] < 1e-12
curve = sz.heat_extraction_curve(params, 0.0283)
close(curve["peak"], 0.1304, 0.002, "heat extraction peak (k_B T)")
close(curve["peak_time"] * 1e6, 68.4, 2.0, "heat extraction peak time (us)")

print("trajectories:")
short = sz.Experiment()
short.stabilize("g", 200, 2e-6)
short.initialize("e")
short.monitor(400e-6, 2e-6)
series = sz.run_population_series(params, sz.ReadoutModel.ideal(), short, 2e-6, 42, 400)
assert 0.7 < series["p_q"][0] <= 1.0, series["p_q"][0]
rates = sz.run_rate_series(params, sz.ReadoutModel(), short, 2e-6, 42, 400, smooth_window=5)
finite = [g1 for g1 in rates["gamma_1"] if g1 is not None]
assert len(finite) > 100, "rate series mostly present"

print("thermo:")
beta = math.log(1.0 / 0.12 - 1.0)
close(beta * sz.internal_energy(1, beta), 0.239, 2e-3, "delta_U (k_B T)")
s_rev, s_irr, s = sz.entropy_split(1, beta)
close(s, 0.367, 1e-3, "entropy (k_B)")
close(sz.measurement_entropy_reduction(2, math.log(2.0)), math.log(2.0), 1e-12, "dS max (k_B)")
assert sz.cop(0.3, 0.0283, 0.1) < 0.0283 / (0.3 - 0.0283)
cycle = sz.cycle_summary(params, 0.3, 0.0283)
close(cycle["dq_r"], cycle["delta_u"], 1e-15, "dQ_R = dU")

print("device:")
phi_s, phi_l, phi_ls = sz.flux_partition(50.0, 21.48)
close(phi_s, 0.4253, 1e-4, "phi_s (2pi units)")
close(phi_ls, 21.6927, 1e-4, "phi_l + phi_s (2pi units)")
ok, witness = sz.interference_condition(50.0)
assert not ok and witness is None
ok, witness = sz.interference_condition(50.5)
assert ok and witness == (1, 51)
ej, offset = sz.effective_junction(3.0e9, 3.0e9, 0.0)
close(ej, 6.0e9, 1.0, "symmetric effective junction (Hz)")

print("szilard_py smoke test passed")
