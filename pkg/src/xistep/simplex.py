"""Finite measures on the infinite simplex and exact coalescence rates.

A measure is a Kingman mass at the zero sequence plus finitely many atoms
with finitely many positive coordinates, so every collision rate is an
exact rational.
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .partitions import (MAX_PARTITION_SIZE, iter_profiles,
                         profile_multiplicity, profile_of,
                         is_singleton_partition)

MAX_ATOM_SUPPORT = 8


@dataclass(frozen=True)
class SimplexAtom:
    """A point of the simplex with finite support, carrying a weight."""

    coords: tuple  # non-increasing positive Fractions, sum <= 1
    weight: Fraction

    def __post_init__(self):
        coords = tuple(Fraction(c) for c in self.coords)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "weight", Fraction(self.weight))
        if not coords:
            raise ValueError("atom needs at least one coordinate; "
                             "use kingman_mass for the zero point")
        if any(c <= 0 for c in coords):
            raise ValueError("atom coordinates must be positive")
        if list(coords) != sorted(coords, reverse=True):
            raise ValueError("atom coordinates must be non-increasing")
        if sum(coords) > 1:
            raise ValueError("atom coordinate sum exceeds 1")
        if len(coords) > MAX_ATOM_SUPPORT:
            raise ValueError(f"atom support larger than {MAX_ATOM_SUPPORT}")
        if self.weight <= 0:
            raise ValueError("atom weight must be positive")

    @property
    def coord_sum(self):
        return sum(self.coords)

    @property
    def square_sum(self):
        return sum(c * c for c in self.coords)


@dataclass(frozen=True)
class XiMeasure:
    """Kingman mass plus finitely many simplex atoms."""

    kingman_mass: Fraction = Fraction(0)
    atoms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "kingman_mass", Fraction(self.kingman_mass))
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if self.kingman_mass < 0:
            raise ValueError("kingman_mass must be nonnegative")

    @property
    def total_mass(self):
        return self.kingman_mass + sum(a.weight for a in self.atoms)

    def scaled(self, c):
        c = Fraction(c)
        return XiMeasure(self.kingman_mass * c,
                         tuple(SimplexAtom(a.coords, a.weight * c)
                               for a in self.atoms))


@dataclass(frozen=True)
class CollisionProfile:
    """(n; k1,...,kr; s): n blocks collide into r merged groups of sizes
    k1 >= ... >= kr >= 2 while s blocks stay untouched."""

    n: int
    merge_sizes: tuple
    s: int

    def __post_init__(self):
        ks = tuple(self.merge_sizes)
        object.__setattr__(self, "merge_sizes", ks)
        if not ks or any(k < 2 for k in ks):
            raise ValueError("merge sizes must all be >= 2 and nonempty")
        if list(ks) != sorted(ks, reverse=True):
            raise ValueError("merge sizes must be non-increasing")
        if self.s < 0 or self.n != self.s + sum(ks):
            raise ValueError("need n = s + sum(k_i) with s >= 0")

    @property
    def r(self):
        return len(self.merge_sizes)

    @property
    def block_drop(self):
        return sum(k - 1 for k in self.merge_sizes)

    @property
    def multiplicity(self):
        return profile_multiplicity(self.n, self.merge_sizes, self.s)


def _atom_rate(atom, profile):
    """Unnormalized finite sum for one atom: sum over l of C(s,l) times the
    injective-index sums, times (1 - sum x)^(s-l); divided by sum x^2."""
    xs = atom.coords
    r = profile.r
    s = profile.s
    one_minus = 1 - atom.coord_sum
    total = Fraction(0)
    for ell in range(s + 1):
        if r + ell > len(xs):
            break
        if one_minus == 0 and s - ell > 0:
            continue
        inj = Fraction(0)
        powers = profile.merge_sizes + (1,) * ell
        for idx in itertools.permutations(range(len(xs)), r + ell):
            term = Fraction(1)
            for i, k in zip(idx, powers):
                term *= xs[i] ** k
            inj += term
        total += math.comb(s, ell) * inj * one_minus ** (s - ell)
    return total / atom.square_sum


def collision_rate(xi, profile, b_max=None):
    """Exact rate of a (n; k1..kr; s)-collision under xi. The Kingman mass
    contributes only to the pairwise profile (r, k1) = (1, 2)."""
    if b_max is not None and profile.n > b_max:
        raise ValueError(f"profile n={profile.n} exceeds b_max={b_max}")
    rate = Fraction(0)
    if profile.r == 1 and profile.merge_sizes == (2,):
        rate += xi.kingman_mass
    for atom in xi.atoms:
        rate += atom.weight * _atom_rate(atom, profile)
    return rate


def per_partition_rate(xi, pi_prime):
    """Rate of the collision induced by a concrete partition of [b];
    zero for the singleton (no-collision) partition."""
    if is_singleton_partition(pi_prime):
        return Fraction(0)
    n, merge_sizes, s = profile_of(pi_prime)
    return collision_rate(xi, CollisionProfile(n, merge_sizes, s))


@dataclass(frozen=True)
class RateTable:
    """Per block count b: every achievable profile with its per-partition
    rate and multiplicity. Immutable and freely shareable."""

    b_max: int
    # rows[b] = tuple of (CollisionProfile, rate, multiplicity)
    rows: dict = field(default_factory=dict)

    def profiles(self, b):
        if b > self.b_max:
            raise ValueError(f"block count {b} exceeds table b_max={self.b_max}")
        return self.rows.get(b, ())

    def total_rate(self, b):
        return sum(rate * mult for _, rate, mult in self.profiles(b))

    def rate_of(self, b, merge_sizes, s):
        for prof, rate, _ in self.profiles(b):
            if prof.merge_sizes == tuple(merge_sizes) and prof.s == s:
                return rate
        return Fraction(0)


def build_rate_table(xi, b_max=8):
    """Tabulate rates and multiplicities for all profiles with n <= b_max."""
    if b_max < 1:
        raise ValueError("b_max must be >= 1")
    if b_max > MAX_PARTITION_SIZE:
        raise ValueError(f"b_max={b_max} exceeds hard cap {MAX_PARTITION_SIZE}")
    rows = {}
    for b in range(2, b_max + 1):
        entries = []
        for merge_sizes, s in iter_profiles(b):
            prof = CollisionProfile(b, merge_sizes, s)
            entries.append((prof, collision_rate(xi, prof, b_max=b_max),
                            prof.multiplicity))
        rows[b] = tuple(entries)
    return RateTable(b_max, rows)


@dataclass(frozen=True)
class ConsistencyReport:
    checks: tuple  # (name, lhs, rhs, passed)

    @property
    def all_pass(self):
        return all(p for _, _, _, p in self.checks)


def check_consistency(table):
    """Verify the sampling-consistency identities exactly: restricting the
    (b+1)-block chain to [b] must reproduce the b-block rates. Includes the
    named identities a2 = a21 + a3, a3 = a31 + a4, a21 = a211 + a22 + a31."""
    if table.b_max < 4:
        raise ValueError("consistency check needs a table covering b <= 4")
    checks = []
    named = {
        "a2 = a21 + a3": ((2, (2,), 0), [(3, (2,), 1, 1), (3, (3,), 0, 1)]),
        "a3 = a31 + a4": ((3, (3,), 0), [(4, (3,), 1, 1), (4, (4,), 0, 1)]),
        "a21 = a211 + a22 + a31": ((3, (2,), 1),
                                   [(4, (2,), 2, 1), (4, (2, 2), 0, 1),
                                    (4, (3,), 1, 1)]),
    }
    for name, (lhs_key, rhs_terms) in named.items():
        lhs = table.rate_of(*lhs_key)
        rhs = sum(c * table.rate_of(b, ks, s) for b, ks, s, c in rhs_terms)
        checks.append((name, lhs, rhs, lhs == rhs))
    for b in range(2, table.b_max):
        for prof, rate, _ in table.profiles(b):
            rhs = table.rate_of(b + 1, prof.merge_sizes, prof.s + 1)
            ks = list(prof.merge_sizes)
            for i in range(len(ks)):
                grown = tuple(sorted(ks[:i] + [ks[i] + 1] + ks[i + 1:],
                                     reverse=True))
                rhs += table.rate_of(b + 1, grown, prof.s)
            if prof.s >= 1:
                paired = tuple(sorted(ks + [2], reverse=True))
                rhs += prof.s * table.rate_of(b + 1, paired, prof.s - 1)
            name = f"restriction b={b} profile {prof.merge_sizes};{prof.s}"
            checks.append((name, rate, rhs, rate == rhs))
    return ConsistencyReport(tuple(checks))
