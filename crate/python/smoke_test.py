"""Smoke test for the compiled extension. Run after `maturin develop` or
installing the wheel: python python/smoke_test.py"""

import math

import stochcone as sc


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


s = sc.Operator([[0.2, 0.1], [0.3, 0.4]])
assert s.classify() == "strictly-substochastic", s.classify()
assert all(close(m, w) for m, w in zip(s.column_mass(), [0.5, 0.5]))

c = s.complete([1.0, 1.0])
assert close(c.lam, 1.0)
for row, want in zip(c.a.matrix, [[0.55, 0.45], [0.45, 0.55]]):
    assert all(close(x, y, 1e-14) for x, y in zip(row, want)), row
assert all(close(m, 1.0) for m in c.a.column_mass())

try:
    s.check_cone([1.0, 0.0])
except sc.RejectedError as e:
    assert "entry 2" in str(e), e
else:
    raise AssertionError("expected a rejection")
assert not s.in_cone([1.0, 0.0])
assert issubclass(sc.RejectedError, ValueError)

h = s.combine([[1.0, 1.0], [2.0, 3.0]], [0.5, 0.5])
assert s.in_cone(h)

rho, _ = s.spectral_radius()
assert 0.0 < rho < 1.0
assert s.in_cone(s.exp_apply([1.0, 1.0]), 1e-9)
assert s.in_cone(s.resolvent_apply([1.0, 1.0], rho + 0.1), 1e-9)

tech = sc.Operator([[0.2, 0.3], [0.4, 0.1]])
assert all(close(p, 2.0, 1e-9) for p in tech.leontief_solve([1.0, 1.0]))
web = sc.Operator([[0.0, 0.45], [0.45, 0.0]])
assert all(close(p, 20 / 11, 1e-9) for p in web.pagerank_solve([1.0, 1.0]))
y = tech.impact_matrix()
assert close(y[0][0], 1.5, 1e-12)

t, v = sc.young_argmin(2.0, 8.0, 0.5)
assert close(v, 4.0) and close(sc.young_eval(2.0, 8.0, 0.5, t), v)

k = sc.discretize_kernel("const:0.5", 4)
assert k.column_mass() == [0.5] * 4
kc = sc.kernel_completion_demo("const:0.5", 4)
assert all(abs(a - 1.0) <= 1e-12 for row in kc.a.matrix for a in row)
rows = sc.refinement_study("quadratic", [8, 16])
assert math.isclose(rows[0][1] / rows[1][1], 4.0, rel_tol=0.1)

reports = sc.run_property_suite(seed=42, trials=50, n_max=8)
assert reports and all(r["passed"] for r in reports), reports

try:
    sc.Operator([[1.0, -1.0], [0.0, 1.0]])
except ValueError:
    pass
else:
    raise AssertionError("negative entries must be refused")

print(f"smoke test passed ({len(reports)} properties)")
