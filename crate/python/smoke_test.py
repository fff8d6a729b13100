"""Smoke test for the gkdv extension module.

Build and install first:  pip install --no-build-isolation ./crates/py
"""

import math

import gkdv

grid = gkdv.Grid(1024, 64.0)
q = gkdv.ground_state(grid)
q_mass = math.sqrt(3.0) * math.pi / 2.0
assert abs(q.mass() - q_mass) < 1e-8, q.mass()
assert abs(q.energy()) < 1e-6, q.energy()
assert abs(gkdv.gn_ratio(q) - 1.0) < 1e-6

params = gkdv.IParams.from_index(32.0, 0.5, grid)
assert params.m(0.0) == 1.0
assert params.m(10.0 * params.n) < 1.0
iq = gkdv.apply_i(q, params)
assert len(iq) == grid.n
print("E1(Q) =", gkdv.e1(q, params))

# E2 sums over sextic mode tuples, so keep the spectrum sparse
small = gkdv.Grid(128, 2.0 * math.pi)
u = gkdv.Field(small, [0.4 * math.cos(x) + 0.2 * math.sin(3.0 * x) for x in small.points()])
pu = gkdv.IParams.from_index(2.0, 0.5, small)
print("E1(u) =", gkdv.e1(u, pu), " E2(u) =", gkdv.e2(u, pu))

times, fields, drift = gkdv.solve(q, dt=1e-3, t_end=0.2, snapshots=4)
assert len(times) == len(fields) == 5
assert drift["mass_drift"] < 1e-8, drift

try:
    gkdv.solve(q.scaled(1.6), dt=1e-3, t_end=0.2, blowup_cap=2.0)
    raise AssertionError("expected blow-up")
except gkdv.BlowUpError:
    pass

try:
    gkdv.Grid(0, 1.0)
    raise AssertionError("expected an error")
except gkdv.GkdvError:
    pass

p = gkdv.IParams(4.0, 0.5)
assert gkdv.sigma_tilde6([1, -1, 2, -2, 3, -3], p) == gkdv.sigma_tilde6([-3, 3, -2, 2, -1, 1], p)

t = gkdv.threshold("6/13")
assert t["root"] == "6/13" and not t["admissible"], t
assert gkdv.threshold("1/2")["admissible"]

sweep = gkdv.verify_sigma_tilde([32.0, 64.0], 0.5, samples=2000, seed=7)
assert all(r["sup"] > 0 for r in sweep["reports"])
assert sweep == gkdv.verify_sigma_tilde([32.0, 64.0], 0.5, samples=2000, seed=7)

d = gkdv.diff_check()
assert d["rel_err_e1"] < 1e-3 and d["rel_err_e2"] < 1e-3, d

gn = gkdv.gn_check(grid, 5, 3)
assert gn["ok"], gn

assert gkdv.CSV_COLUMNS[0] == "experiment" and gkdv.CSV_COLUMNS[-1] == "wall_ms"

print("smoke test ok")
