"""Smoke tests for the python bindings."""

import math

import mixprec

FIG7 = """
func @f(%a: arr<f32,1>, %b: arr<f32,1>) -> f32 {
entry:
  %r1 = load f32 %a, 0
  %r2 = load f32 %b, 0
  %r3 = fmul f32 %r1, %r2
  %r4 = fsub f32 %r1, %r3
  ret %r4
}
"""


def test_parse_print_validate():
    p = mixprec.parse(FIG7)
    assert mixprec.validate(p) == []
    q = mixprec.parse(mixprec.print_text(p))
    assert mixprec.print_text(q) == mixprec.print_text(p)


def test_run_fig7():
    p = mixprec.parse(FIG7)
    out = mixprec.run(p, {"a": [1.5], "b": [1.0]})
    assert out["ret"] == 0.0


def test_profile_classify_rewrite_run():
    p = mixprec.parse(FIG7)
    prof, _ = mixprec.profile(p, {"a": [1.2], "b": [1.0 - 2.0**-20]})
    assert prof.size == 2
    t = {"t1": 75, "t2": 100, "t3": 75, "t4": 28, "t5": 16, "t6": 1e37, "t7": 1e-38}
    bins, ics = mixprec.classify_ics(p, prof, t)
    assert bins["cancellation"] == ["@f:%r4"]
    assert sorted(d for _, d in ics.promoted) == ["r3", "r4"]
    mixed = mixprec.rewrite(p, ics)
    assert mixprec.validate(mixed) == []
    assert "fmul f64" in mixprec.print_text(mixed)
    out = mixprec.run(mixed, {"a": [1.2], "b": [1.0 - 2.0**-20]})
    assert abs(out["ret"] - 1.2 * 2.0**-20) < 1e-9


def test_lu_matches_reference():
    n = 6
    p = mixprec.lu_program(n)
    a = mixprec.gen_matrix(n, seed=3)
    out = mixprec.run(p, {"A": a}, precision="f64")
    got = out["arrays"]["A"]
    # reference factorization with the same pivoting and loop order
    m = [row[:] for row in (a[i * n:(i + 1) * n] for i in range(n))]
    for k in range(n):
        for i in range(k, n):
            s = m[i][k]
            for t in range(k):
                s -= m[i][t] * m[t][k]
            m[i][k] = s
        piv = max(range(k, n), key=lambda i: (abs(m[i][k]), -i))
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
        for i in range(k + 1, n):
            m[i][k] /= m[k][k]
        for j in range(k + 1, n):
            s = m[k][j]
            for t in range(k):
                s -= m[k][t] * m[t][j]
            m[k][j] = s
    flat = [v for row in m for v in row]
    assert all(x == y for x, y in zip(got, flat))


def test_quad_sweep():
    p = mixprec.quad_program(order=8, panels=4)
    x, w = mixprec.quad_arrays(8, 4)
    arrays = {"X": x, "W": w}
    res = mixprec.sweep(p, arrays, arrays, grid_samples=2, metric="abs")
    assert res["grid_size"] == 128
    assert sum(r["vector_count"] for r in res["results"]) == 128
    assert res["single_error"] >= 0
    total = sum(wi * math.sin(xi) * math.exp(xi) for xi, wi in zip(x, w))
    out = mixprec.run(p, arrays, precision="f64")
    assert abs(out["ret"] - total) < 1e-9
