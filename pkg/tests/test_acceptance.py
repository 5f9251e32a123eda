"""The ten acceptance criteria, each at its stated tolerance and time budget.

Every criterion records one PASS/FAIL line, printed in the pytest terminal
summary (see conftest.py).
"""
import pytest

from hopfheat.validation import run_suite

# (criterion number, suite name, budget in seconds)
CRITERIA = [
    (1, "cross-rep", 120),
    (2, "residual", 30),
    (3, "normalization", 30),
    (4, "intertwining", 60),
    (5, "green", 120),
    (6, "cp-routes", 180),
    (7, "asymptotics", 300),
    (8, "distance", 30),
    (9, "pde", 120),
    (10, "orthopoly", 10),
]

LINES = []


@pytest.mark.parametrize("num,name,budget", CRITERIA, ids=[f"c{c[0]}-{c[1]}" for c in CRITERIA])
def test_criterion(num, name, budget):
    res = run_suite(name, (1, 2))
    in_time = res.elapsed <= budget
    ok = res.passed and in_time
    LINES.append(f"criterion {num:>2} {'PASS' if ok else 'FAIL'}  {name:<14} measured={res.measured:.3e} "
                 f"tol={res.tolerance:.1e} time={res.elapsed:.2f}s/{budget}s")
    print(res.line())
    for d in res.details:
        print("    " + d)
    assert res.passed, f"{name}: measured {res.measured:.3e} vs tolerance {res.tolerance:.1e}"
    assert in_time, f"{name}: {res.elapsed:.1f}s over the {budget}s budget"
