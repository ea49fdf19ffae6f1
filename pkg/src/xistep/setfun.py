"""Dyadic sets on [0,1], the set-function algebra, base measures, and the
uniform jump mutation generator/semigroup.

A set function is stored as one coefficient per cell of a dyadic grid,
reduced to the coarsest level that represents it; this makes equality,
products (cell-wise) and integrals exact. Coefficients are Fractions in
exact mode and may be floats in simulation mode.
"""

import math
from dataclasses import dataclass
from fractions import Fraction


def _reduce_cells(level, values):
    """Drop to the coarsest grid level representing the same step function."""
    while level > 0 and all(values[2 * i] == values[2 * i + 1]
                            for i in range(len(values) // 2)):
        values = values[::2]
        level -= 1
    return level, tuple(values)


def _lift(values, from_level, to_level):
    reps = 1 << (to_level - from_level)
    out = []
    for v in values:
        out.extend([v] * reps)
    return out


def cell_index(level, point):
    """Index of the level-`level` cell containing `point` in [0,1]; cells
    are half-open except the last, which is closed at 1."""
    if not 0 <= point <= 1:
        raise ValueError("point outside [0,1]")
    i = int(point * (1 << level))
    return min(i, (1 << level) - 1)


@dataclass(frozen=True)
class DyadicSet:
    """Canonical finite union of dyadic cells at a common level."""

    level: int
    cells: frozenset

    def __post_init__(self):
        if any(not 0 <= c < (1 << self.level) for c in self.cells):
            raise ValueError("cell index out of range for level")
        lvl, vals = _reduce_cells(self.level,
                                  [c in self.cells
                                   for c in range(1 << self.level)])
        object.__setattr__(self, "level", lvl)
        object.__setattr__(self, "cells",
                           frozenset(i for i, v in enumerate(vals) if v))

    @classmethod
    def empty(cls):
        return cls(0, frozenset())

    @classmethod
    def full(cls):
        return cls(0, frozenset({0}))

    def _at_level(self, level):
        out = set()
        shift = level - self.level
        for c in self.cells:
            out.update(range(c << shift, (c + 1) << shift))
        return out

    def union(self, other):
        lvl = max(self.level, other.level)
        return DyadicSet(lvl, frozenset(self._at_level(lvl)
                                        | other._at_level(lvl)))

    def intersection(self, other):
        lvl = max(self.level, other.level)
        return DyadicSet(lvl, frozenset(self._at_level(lvl)
                                        & other._at_level(lvl)))

    def complement(self):
        full = set(range(1 << self.level))
        return DyadicSet(self.level, frozenset(full - self.cells))

    def contains(self, point):
        return cell_index(self.level, point) in self.cells

    @property
    def lebesgue(self):
        return Fraction(len(self.cells), 1 << self.level)


@dataclass(frozen=True)
class SetFunction:
    """Piecewise-constant function on a dyadic grid (one coefficient per
    cell), kept at the coarsest representing level."""

    level: int
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != (1 << self.level):
            raise ValueError("need one coefficient per cell")
        lvl, vals = _reduce_cells(self.level, tuple(self.coeffs))
        object.__setattr__(self, "level", lvl)
        object.__setattr__(self, "coeffs", vals)

    @classmethod
    def constant(cls, c):
        return cls(0, (c,))

    @classmethod
    def indicator(cls, dset):
        return cls(dset.level,
                   tuple(Fraction(1) if c in dset.cells else Fraction(0)
                         for c in range(1 << dset.level)))

    def _coeffs_at(self, level):
        return _lift(self.coeffs, self.level, level)

    def __add__(self, other):
        lvl = max(self.level, other.level)
        a, b = self._coeffs_at(lvl), other._coeffs_at(lvl)
        return SetFunction(lvl, tuple(x + y for x, y in zip(a, b)))

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        return SetFunction(self.level, tuple(c * v for v in self.coeffs))

    def axpy(self, a, b):
        """a * self + b * 1, in one pass."""
        return SetFunction(self.level, tuple(a * v + b for v in self.coeffs))

    def multiply(self, other):
        """Pointwise product; indicators multiply via set intersection."""
        lvl = max(self.level, other.level)
        a, b = self._coeffs_at(lvl), other._coeffs_at(lvl)
        return SetFunction(lvl, tuple(x * y for x, y in zip(a, b)))

    def value_at(self, point):
        return self.coeffs[cell_index(self.level, point)]

    def terms(self):
        """View as a finite combination of indicators of disjoint dyadic
        sets, one term per distinct nonzero coefficient."""
        groups = {}
        for i, c in enumerate(self.coeffs):
            if c != 0:
                groups.setdefault(c, set()).add(i)
        return [(c, DyadicSet(self.level, frozenset(cells)))
                for c, cells in sorted(groups.items(), key=lambda t: str(t[0]))]

    @property
    def is_nonnegative(self):
        return all(c >= 0 for c in self.coeffs)


ONE = SetFunction.constant(Fraction(1))


def multiply(g, h):
    return g.multiply(h)


@dataclass(frozen=True)
class TensorFunction:
    """Ordered tensor product of single-variable set functions."""

    factors: tuple

    def __post_init__(self):
        if not self.factors:
            raise ValueError("tensor needs at least one factor")

    @property
    def arity(self):
        return len(self.factors)

    @classmethod
    def indicator_power(cls, dset, n):
        return cls((SetFunction.indicator(dset),) * n)


@dataclass(frozen=True)
class BaseMeasure:
    """Probability measure on [0,1]: piecewise-constant density on a dyadic
    grid plus finitely many atoms, all rational."""

    grid_level: int
    densities: tuple
    atoms: tuple = ()  # (position, mass) pairs

    def __post_init__(self):
        dens = tuple(Fraction(d) for d in self.densities)
        atoms = tuple((Fraction(p), Fraction(m)) for p, m in self.atoms)
        object.__setattr__(self, "densities", dens)
        object.__setattr__(self, "atoms", atoms)
        if len(dens) != (1 << self.grid_level):
            raise ValueError("need one density per grid cell")
        if any(d < 0 for d in dens) or any(m < 0 for _, m in atoms):
            raise ValueError("measure must be nonnegative")
        if any(not 0 <= p <= 1 for p, _ in atoms):
            raise ValueError("atom position outside [0,1]")
        total = (sum(dens) / (1 << self.grid_level)
                 + sum(m for _, m in atoms))
        if total != 1:
            raise ValueError(f"total mass must be 1, got {total}")

    @classmethod
    def uniform(cls):
        return cls(0, (Fraction(1),))

    def measure(self, dset):
        lvl = max(self.grid_level, dset.level)
        cells = dset._at_level(lvl)
        shift = lvl - self.grid_level
        mass = sum((self.densities[c >> shift] for c in cells),
                   Fraction(0)) / (1 << lvl)
        mass += sum(m for p, m in self.atoms if dset.contains(p))
        return mass

    def integrate(self, g):
        lvl = max(self.grid_level, g.level)
        coeffs = g._coeffs_at(lvl)
        shift = lvl - self.grid_level
        if any(type(c) is float for c in coeffs):
            # float fast path for simulation mode
            try:
                fdens = self._fdens
            except AttributeError:
                fdens = tuple(float(d) for d in self.densities)
                object.__setattr__(self, "_fdens", fdens)
            total = sum(c * fdens[i >> shift]
                        for i, c in enumerate(coeffs) if c) / (1 << lvl)
            return total + sum(float(m) * g.value_at(p)
                               for p, m in self.atoms)
        total = sum(c * self.densities[i >> shift]
                    for i, c in enumerate(coeffs) if c) / (1 << lvl)
        total += sum(m * g.value_at(p) for p, m in self.atoms)
        return total

    def sample(self, rng):
        """Draw a point; density cells are uniform within the cell."""
        u = rng.random()
        acc = 0.0
        for p, m in self.atoms:
            acc += float(m)
            if u < acc:
                return float(p)
        width = 1.0 / (1 << self.grid_level)
        for i, d in enumerate(self.densities):
            acc += float(d) * width
            if u < acc:
                return (i + rng.random()) * width
        return 1.0  # guard against float round-off at the top


def integrate(measure, g):
    return measure.integrate(g)


@dataclass(frozen=True)
class MutationSpec:
    """Jump mutation at rate theta/2 per variable. Uniform kind draws the
    new type from `base` independently of the current one; a general
    kernel supplies a sampler(x, rng) -> y."""

    theta: Fraction
    base: BaseMeasure = None
    kernel: object = None

    def __post_init__(self):
        object.__setattr__(self, "theta", Fraction(self.theta))
        if self.theta < 0:
            raise ValueError("theta must be nonnegative")
        if (self.base is None) == (self.kernel is None):
            raise ValueError("exactly one of base/kernel must be given")

    @property
    def is_uniform(self):
        return self.base is not None


def apply_generator_uniform(g, spec):
    """(theta/2) * (<nu0, g> * 1 - g), exactly."""
    if not spec.is_uniform:
        raise ValueError("uniform mutation spec required")
    half = spec.theta / 2
    return g.axpy(-half, half * spec.base.integrate(g))


def decay_factor(theta, t, exact=False):
    """exp(-theta t / 2); in exact mode the float is embedded as the exact
    dyadic rational it represents, so downstream algebra stays rational."""
    if t < 0:
        raise ValueError("negative time")
    p = math.exp(-float(theta) * float(t) / 2.0)
    return Fraction(p) if exact else p


def semigroup_apply_uniform(g, t, spec, exact=False):
    """Closed-form mutation semigroup:
    e^{-theta t/2} g + (1 - e^{-theta t/2}) <nu0, g> 1."""
    if not spec.is_uniform:
        raise ValueError("uniform mutation spec required")
    p = decay_factor(spec.theta, t, exact=exact)
    return g.axpy(p, (1 - p) * spec.base.integrate(g))


def _poisson(mean, rng):
    if mean <= 0:
        return 0
    # Knuth inversion; fine for the moderate means used here.
    limit = math.exp(-mean)
    k, prod = 0, rng.random()
    while prod > limit:
        k += 1
        prod *= rng.random()
    return k


def sample_mutation_path(x0, t, spec, rng):
    """Terminal type of the mutation jump process started at x0 run for
    time t. Uniform kernels collapse to: keep x0 with prob e^{-theta t/2},
    else one fresh draw from the base."""
    if t < 0:
        raise ValueError("negative time")
    if spec.is_uniform:
        if rng.random() < math.exp(-float(spec.theta) * float(t) / 2.0):
            return x0
        return spec.base.sample(rng)
    x = x0
    for _ in range(_poisson(float(spec.theta) * float(t) / 2.0, rng)):
        x = spec.kernel(x, rng)
    return x
