"""Forward generator on moment monomials, exact stationary moment systems,
and the complete-monotonicity (moment-problem) check.

M[n, m] denotes the stationary expectation of the colony-1 mass of a fixed
reference set raised to n times the colony-2 mass raised to m; M[0, 0] = 1.
All arithmetic here is exact rational.
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .linalg import solve_exact
from .partitions import profile_multiplicity

# symbolic profile tables for up to four same-colony blocks:
# (merge_sizes, s, multiplicity, rate attribute name)
_SYMBOLIC_PROFILES = {
    2: (((2,), 0, 1, "a2"),),
    3: (((2,), 1, 3, "a21"), ((3,), 0, 1, "a3")),
    4: (((2,), 2, 6, "a211"), ((2, 2), 0, 3, "a22"),
        ((3,), 1, 4, "a31"), ((4,), 0, 1, "a4")),
}


@dataclass(frozen=True)
class ScalarParams:
    """Scalar inputs of the moment systems: mutation rate theta, reference
    mass alpha, migration rates, and the seven collision rates for up to
    four lineages."""

    theta: Fraction
    alpha: Fraction
    u1: Fraction
    u2: Fraction
    a2: Fraction = Fraction(0)
    a21: Fraction = Fraction(0)
    a3: Fraction = Fraction(0)
    a211: Fraction = Fraction(0)
    a22: Fraction = Fraction(0)
    a31: Fraction = Fraction(0)
    a4: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("theta", "alpha", "u1", "u2", "a2", "a21", "a3",
                     "a211", "a22", "a31", "a4"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.theta <= 0:
            raise ValueError("theta must be positive")
        if not 0 <= self.alpha <= 1:
            raise ValueError("alpha must lie in [0,1]")

    def consistency_violations(self):
        """The rate identities tying adjacent block counts; empty when the
        rates come from an actual simplex measure."""
        out = []
        if self.a2 != self.a21 + self.a3:
            out.append("a2 != a21 + a3")
        if self.a3 != self.a31 + self.a4:
            out.append("a3 != a31 + a4")
        if self.a21 != self.a211 + self.a22 + self.a31:
            out.append("a21 != a211 + a22 + a31")
        return out

    @classmethod
    def from_rate_table(cls, table, theta, alpha, u1, u2):
        return cls(theta, alpha, u1, u2,
                   a2=table.rate_of(2, (2,), 0),
                   a21=table.rate_of(3, (2,), 1),
                   a3=table.rate_of(3, (3,), 0),
                   a211=table.rate_of(4, (2,), 2),
                   a22=table.rate_of(4, (2, 2), 0),
                   a31=table.rate_of(4, (3,), 1),
                   a4=table.rate_of(4, (4,), 0))

    def swapped(self):
        """Same parameters with the two colonies' roles exchanged."""
        return ScalarParams(self.theta, self.alpha, self.u2, self.u1,
                            self.a2, self.a21, self.a3, self.a211,
                            self.a22, self.a31, self.a4)


class MomentPolynomial(dict):
    """Finite linear combination of moment monomials; the key (0, 0) is the
    constant term. Values are Fractions; zero coefficients are dropped."""

    def __init__(self, data=()):
        super().__init__()
        for idx, c in dict(data).items():
            self.add(idx, c)

    def add(self, idx, c):
        c = c + self.get(idx, Fraction(0))
        if c == 0:
            self.pop(idx, None)
        else:
            self[idx] = c

    def shifted(self, dn, dm):
        """Multiply by the (dn, dm) monomial: indices add."""
        return MomentPolynomial({(n + dn, m + dm): c
                                 for (n, m), c in self.items()})

    def __sub__(self, other):
        out = MomentPolynomial(self)
        for idx, c in other.items():
            out.add(idx, -c)
        return out

    def evaluate(self, values):
        return sum(c * values[idx] for idx, c in self.items())

    def substitute(self, knowns):
        """Replace the given indices by fixed values (folded into the
        constant term)."""
        out = MomentPolynomial()
        for idx, c in self.items():
            if idx in knowns and idx != (0, 0):
                out.add((0, 0), c * knowns[idx])
            else:
                out.add(idx, c)
        return out


def _coalescence_profiles(b, params, rate_table):
    if rate_table is not None and b <= rate_table.b_max:
        return [(prof.merge_sizes, prof.s, mult, rate)
                for prof, rate, mult in rate_table.profiles(b)]
    if b in _SYMBOLIC_PROFILES:
        return [(ks, s, mult, getattr(params, name))
                for ks, s, mult, name in _SYMBOLIC_PROFILES[b]]
    raise ValueError(f"no rates available for {b} lineages; "
                     "supply a rate table covering them")


def generator_on_monomial(idx, params, rate_table=None):
    """Forward-generator action on the (n, m) moment monomial as a
    MomentPolynomial: mutation, same-colony coalescence (grouped by
    profile), and per-block migration differences."""
    n, m = idx
    poly = MomentPolynomial()
    if n == m == 0:
        return poly
    theta, alpha = params.theta, params.alpha
    # mutation: each variable independently at rate theta/2
    poly.add((n, m), -theta * (n + m) / 2)
    if n:
        poly.add((n - 1, m), theta * alpha * n / 2)
    if m:
        poly.add((n, m - 1), theta * alpha * m / 2)
    # coalescence within each colony
    for count, other, place in ((n, m, 0), (m, n, 1)):
        if count >= 2:
            for merge_sizes, s, mult, rate in _coalescence_profiles(
                    count, params, rate_table):
                if rate == 0:
                    continue
                drop = sum(k - 1 for k in merge_sizes)
                low = ((count - drop, other) if place == 0
                       else (other, count - drop))
                poly.add(low, mult * rate)
                poly.add((n, m), -mult * rate)
    # migration, per block
    if m:
        poly.add((n + 1, m - 1), m * params.u1)
        poly.add((n, m), -m * params.u1)
    if n:
        poly.add((n - 1, m + 1), n * params.u2)
        poly.add((n, m), -n * params.u2)
    return poly


@dataclass(frozen=True)
class LinearSystem:
    """One order's stationary equations: square exact system plus its
    determinant (rows and unknowns ordered by descending first index)."""

    unknowns: tuple
    matrix: tuple
    rhs: tuple
    determinant: Fraction
    solution: dict


def order_indices(k):
    return tuple((k - j, j) for j in range(k + 1))


def stationary_system(N, params, rate_table=None):
    """Zero-expectation equations order by order, each order's unknowns
    solved exactly with the lower orders substituted as knowns."""
    knowns = {(0, 0): Fraction(1)}
    systems = []
    for k in range(1, N + 1):
        unknowns = order_indices(k)
        pos = {idx: j for j, idx in enumerate(unknowns)}
        matrix, rhs = [], []
        for idx in unknowns:
            poly = generator_on_monomial(idx, params, rate_table)
            row = [Fraction(0)] * len(unknowns)
            b = Fraction(0)
            for jdx, c in poly.items():
                if jdx in pos:
                    row[pos[jdx]] = c
                elif jdx in knowns:
                    b -= c * knowns[jdx]
                else:
                    raise AssertionError(f"index {jdx} unresolved at order {k}")
            matrix.append(row)
            rhs.append(b)
        solution, det = solve_exact(matrix, rhs)
        sol = dict(zip(unknowns, solution))
        systems.append(LinearSystem(unknowns, tuple(map(tuple, matrix)),
                                    tuple(rhs), det, sol))
        knowns.update(sol)
    return systems


def solve_stationary(N, params, rate_table=None):
    """Exact stationary moments for all total orders <= N."""
    values = {(0, 0): Fraction(1)}
    for system in stationary_system(N, params, rate_table):
        values.update(system.solution)
    return values


def system_determinants(N, params, rate_table=None):
    return {k + 1: s.determinant
            for k, s in enumerate(stationary_system(N, params, rate_table))}


@dataclass(frozen=True)
class HausdorffReport:
    min_value: Fraction
    violations: tuple   # ((m, n), value) pairs with value < 0
    checked: int

    @property
    def passed(self):
        return not self.violations


def hausdorff_check(psi):
    """Evaluate every alternating finite difference whose full stencil lies
    inside the support of psi (a mapping from index tuples to rationals).
    Nonnegativity of all of them is the k-dimensional moment condition."""
    keys = set(psi)
    if not keys:
        raise ValueError("empty moment array")
    dim = len(next(iter(keys)))
    min_value = None
    violations = []
    checked = 0
    for m in sorted(keys):
        for top in sorted(keys):
            nvec = tuple(t - s for t, s in zip(top, m))
            if any(v < 0 for v in nvec):
                continue
            stencil = list(itertools.product(*(range(v + 1) for v in nvec)))
            if not all(tuple(a + b for a, b in zip(m, p)) in keys
                       for p in stencil):
                continue
            value = Fraction(0)
            for p in stencil:
                sign = -1 if sum(p) % 2 else 1
                coef = 1
                for nv, pv in zip(nvec, p):
                    coef *= math.comb(nv, pv)
                value += sign * coef * psi[tuple(a + b
                                                 for a, b in zip(m, p))]
            checked += 1
            if min_value is None or value < min_value:
                min_value = value
            if value < 0:
                violations.append(((m, nvec), value))
    return HausdorffReport(min_value, tuple(violations), checked)


@dataclass(frozen=True)
class CrossCheckRow:
    index: tuple
    exact: Fraction
    estimate: float
    std_error: float
    z: float


def mc_cross_check(N, model, e_star, pi_tilde, replicas, seed,
                   max_z=3.0):
    """Compare the exact stationary moments against the absorption-time
    Monte Carlo estimator, index by index."""
    from .setfun import TensorFunction
    from .simulator import estimate_stationary

    alpha = pi_tilde.measure(e_star)
    params = ScalarParams.from_rate_table(model.rate_table, model.mutation.theta,
                                          alpha, model.u1, model.u2)
    exact = solve_stationary(N, params, model.rate_table)
    rows = []
    for k in range(0, N + 1):
        for idx in order_indices(k):
            n, m = idx
            if n + m == 0:
                continue
            eta = (1,) * n + (2,) * m
            f = TensorFunction.indicator_power(e_star, n + m)
            est = estimate_stationary(f, eta, pi_tilde, replicas, model,
                                      seed + 1000 * n + m)
            diff = est.mean - float(exact[idx])
            z = diff / est.std_error if est.std_error > 0 else (
                0.0 if diff == 0 else math.inf)
            rows.append(CrossCheckRow(idx, exact[idx], est.mean,
                                      est.std_error, z))
    ok = all(abs(r.z) <= max_z for r in rows)
    return rows, ok
