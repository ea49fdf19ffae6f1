import random
from fractions import Fraction

import pytest

from xistep import (BaseMeasure, DyadicSet, ModelParams, MutationSpec,
                    ScalarParams, SimplexAtom, TensorFunction, XiMeasure,
                    build_rate_table)

F = Fraction

# the two reference measures used throughout: pure Kingman mass 1, and a
# single simplex atom at (1/2, 1/4)
KINGMAN = XiMeasure(kingman_mass=F(1))
ATOM_HALF_QUARTER = XiMeasure(atoms=(SimplexAtom((F(1, 2), F(1, 4)), F(1)),))
STAR = XiMeasure(atoms=(SimplexAtom((F(1),), F(1)),))

# E* = [0, 1/2) under the uniform base law, so alpha = 1/2
E_STAR = DyadicSet(1, frozenset({0}))


@pytest.fixture
def uniform_base():
    return BaseMeasure.uniform()


def kingman_model(theta=F(1), u1=F(1), u2=F(1), b_max=6):
    return ModelParams(KINGMAN, MutationSpec(theta, base=BaseMeasure.uniform()),
                       u1, u2, build_rate_table(KINGMAN, b_max))


def kingman_scalar(theta=F(1), alpha=F(1, 2), u1=F(1), u2=F(1)):
    table = build_rate_table(KINGMAN, 4)
    return ScalarParams.from_rate_table(table, theta, alpha, u1, u2)


def indicator_power(n):
    return TensorFunction.indicator_power(E_STAR, n)


def rand_consistent_params(rng, symmetric=False, alpha=None):
    """Random ScalarParams whose rates satisfy the sampling identities by
    construction (built directly, not via a measure, so degenerate corners
    like a4 > 0 with tiny a211 get exercised too)."""
    def fr(lo, hi):
        return F(rng.randint(lo, hi), rng.randint(1, 4))
    a4, a31, a22, a211 = fr(0, 2), fr(0, 2), fr(0, 2), fr(0, 3)
    a3 = a31 + a4
    a21 = a211 + a22 + a31
    a2 = a21 + a3
    u1 = fr(1, 5)
    return ScalarParams(theta=fr(1, 5),
                        alpha=F(rng.randint(1, 7), 8) if alpha is None
                        else alpha,
                        u1=u1, u2=u1 if symmetric else fr(1, 5),
                        a2=a2, a21=a21, a3=a3, a211=a211, a22=a22,
                        a31=a31, a4=a4)


def seeded(n):
    return random.Random(f"xistep-tests:{n}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    lines = []
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance" in nodeid and "::" in nodeid:
                lines.append((nodeid.split("::")[-1], status == "passed"))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, ok in sorted(lines):
            terminalreporter.write_line(
                f"{name}: {'PASS' if ok else 'FAIL'}")
