"""The ten acceptance criteria, one test each.

Every criterion prints a single PASS/FAIL line (also collected into the
terminal summary). Run directly with ``python3 tests/test_acceptance.py``.
"""
import sys

import pytest

from circleflow.verify import run_suite

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # pragma: no cover
    ACCEPTANCE_LINES = []

# (number, title, suite, runtime limit in seconds or None)
CRITERIA = [
    (1, "multi-symbol equivalence", "multi-symbol", 30.0),
    (2, "operator derivative vs finite differences", "derivative", 10.0),
    (3, "Lagrangian/Eulerian agreement", "lagrangian-eulerian", 60.0),
    (4, "conservation laws", "conservation", None),
    (5, "specialized-equation residuals", "residuals", None),
    (6, "structure identities", "structure", None),
    (7, "equivariance", "equivariance", None),
    (8, "exponential and logarithm maps", "expmap", None),
    (9, "symbol checker", "symbols", None),
    (10, "homogeneous constraints", "homogeneous", None),
]


def evaluate(number, title, suite, limit, seed=0):
    res = run_suite(suite, seed=seed)
    problems = list(res.failing())
    if limit is not None and res.seconds > limit:
        problems.append(f"runtime {res.seconds:.1f} s > {limit:g} s")
    worst = "; ".join(f"{c.label} = {c.value:.2e}" for c in res.checks[:3])
    status = "FAIL" if problems else "PASS"
    line = f"{status} criterion {number}: {title} ({res.seconds:.1f} s) {worst}"
    if problems:
        line += " | failing: " + ", ".join(problems)
    return line, problems, res


@pytest.mark.parametrize("number,title,suite,limit", CRITERIA,
                         ids=[f"criterion_{c[0]}_{c[2]}" for c in CRITERIA])
def test_criterion(number, title, suite, limit):
    line, problems, res = evaluate(number, title, suite, limit)
    print(line)
    for c in res.checks:
        print(f"    {'ok ' if c.passed else 'BAD'} {c.label}: {c.value:.3e} ({c.mode} {c.threshold:g})")
    ACCEPTANCE_LINES.append(line)
    assert not problems, line


if __name__ == "__main__":
    failed = 0
    for crit in CRITERIA:
        line, problems, _ = evaluate(*crit)
        print(line, flush=True)
        failed += bool(problems)
    sys.exit(1 if failed else 0)
