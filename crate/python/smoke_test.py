"""Smoke test for the tugemm_py extension module.

Build and install it first:

    pip install maturin
    cd crates/py && maturin develop --release
"""

import tugemm_py as tg


def main():
    p = tg.GemmProblem([[3, -2], [1, 0]], [[2, 1], [-1, 2]], w=4)
    assert tg.gemm_exact(p) == [[8, -1], [2, 1]]

    s = tg.serial_run(p)
    q = tg.parallel_run(p)
    assert (s.y, s.cycles) == ([[8, -1], [2, 1]], 10)
    assert (q.y, q.cycles) == ([[8, -1], [2, 1]], 6)
    assert s.output_cell_updates == q.output_cell_updates == 18
    assert s.transition_bound_holds and q.transition_bound_holds

    lat = tg.analytic_latency(p)
    assert (lat.per_step, lat.serial_total, lat.parallel_total) == ([6, 4], 10, 6)
    assert tg.serial_step_trace(p).per_step == [6, 4]
    assert tg.parallel_cell_trace(tg.GemmProblem([[2]], [[3]], w=4), 0, 0) == [1] * 6

    assert tg.worst_case_latency(16, 8, "serial") == 262144
    assert tg.worst_case_latency(16, 8, "parallel") == 16384
    assert tg.avg_latency_from_max(41, 16, "serial") == 26896

    again = tg.GemmProblem.parse(p.to_text())
    assert again.a == p.a and again.b == p.b and again.w == 4

    try:
        tg.GemmProblem([[8]], [[1]], w=4)
    except ValueError:
        pass
    else:
        raise AssertionError("out-of-range operand accepted")

    stats = tg.profile_maxima([[0, 0], [41, -3], [-41, 7]], 8)
    assert stats.n_operations == 3 and stats.histogram[41] == 2
    summary = tg.estimate_workload_latency(stats, 16, "serial")
    assert summary["worst_case"] == 262144

    trials, failed = tg.verify(trials=200, seed=1)
    assert (trials, failed) == (200, 0)

    r = tg.GemmProblem.random(4, 4, 4, 8, 7)
    assert tg.serial_run(r).y == tg.parallel_run(r).y == tg.gemm_exact(r)

    print("tugemm_py smoke test passed")


if __name__ == "__main__":
    main()
