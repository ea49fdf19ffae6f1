"""Set partitions of [n], colony-labeled partitions, and merge bookkeeping.

Partitions are tuples of blocks; each block is a sorted tuple of 1-based
integers and blocks are ordered by least element, which makes equality
canonical.
"""

from dataclasses import dataclass

MAX_PARTITION_SIZE = 12

COLONY_1 = 1
COLONY_2 = 2


def canonical(blocks):
    """Sort block contents and order blocks by least element."""
    bs = [tuple(sorted(b)) for b in blocks]
    bs.sort(key=lambda b: b[0])
    return tuple(bs)


def validate_partition(pi, n=None):
    """Check that pi is a canonical partition of [n] (n inferred if omitted)."""
    seen = set()
    for b in pi:
        if not b:
            raise ValueError("empty block")
        if tuple(sorted(b)) != tuple(b):
            raise ValueError(f"block {b} not sorted")
        if seen & set(b):
            raise ValueError("blocks not disjoint")
        seen |= set(b)
    mins = [b[0] for b in pi]
    if mins != sorted(mins):
        raise ValueError("blocks not ordered by least element")
    ground = set(range(1, (n if n is not None else len(seen)) + 1))
    if seen != ground:
        raise ValueError(f"blocks do not cover [{len(ground)}]")


def singleton_partition(n):
    return tuple((i,) for i in range(1, n + 1))


def is_singleton_partition(pi):
    return all(len(b) == 1 for b in pi)


def coag(pi, pi_prime):
    """Coagulate pi by pi_prime: block j of the result is the union of the
    pi-blocks indexed by block j of pi_prime. Indices of pi_prime beyond
    |pi| contribute nothing."""
    n = len(pi)
    k = max((max(b) for b in pi_prime), default=0)
    if n > k:
        raise ValueError(f"arity mismatch: |pi|={n} > {k}")
    merged = []
    for group in pi_prime:
        items = []
        for i in group:
            if i <= n:
                items.extend(pi[i - 1])
        if items:
            merged.append(items)
    return canonical(merged)


def profile_of(pi_prime):
    """Collision profile (n; k1..kr; s) induced by a partition of [b]:
    merge_sizes are the block sizes >= 2, s counts singletons."""
    n = sum(len(b) for b in pi_prime)
    merge_sizes = tuple(sorted((len(b) for b in pi_prime if len(b) >= 2),
                               reverse=True))
    s = sum(1 for b in pi_prime if len(b) == 1)
    return n, merge_sizes, s


@dataclass(frozen=True)
class LabeledPartition:
    """A partition with one colony label (1 or 2) per block."""

    partition: tuple
    labels: tuple

    def __post_init__(self):
        validate_partition(self.partition)
        if len(self.labels) != len(self.partition):
            raise ValueError("one label per block required")
        if any(c not in (COLONY_1, COLONY_2) for c in self.labels):
            raise ValueError("labels must be colony 1 or 2")

    @property
    def block_count(self):
        return len(self.partition)

    def count(self, colony):
        return sum(1 for c in self.labels if c == colony)

    def colony_positions(self, colony):
        """1-based positions of the blocks carrying `colony`, in order."""
        return tuple(i + 1 for i, c in enumerate(self.labels) if c == colony)


def relabel(eta, k, colony):
    """Copy of label list eta with position k (1-based) set to colony."""
    if not 1 <= k <= len(eta):
        raise IndexError(f"label position {k} out of range")
    return tuple(colony if i == k - 1 else c for i, c in enumerate(eta))


def _coag_labeled_blocks(lp, colony, pi_prime):
    """New (blocks, labels) after coagulating the colony sub-partition,
    before canonical reordering; returns list of (block, label)."""
    sub = [lp.partition[p - 1] for p in lp.colony_positions(colony)]
    if len(sub) != sum(len(b) for b in pi_prime):
        raise ValueError(
            f"pi_prime covers {sum(len(b) for b in pi_prime)} blocks, "
            f"colony {colony} has {len(sub)}")
    merged = coag(sub, pi_prime) if sub else ()
    tagged = [(b, colony) for b in merged]
    other = ({COLONY_1, COLONY_2} - {colony}).pop()
    tagged += [(lp.partition[p - 1], other)
               for p in lp.colony_positions(other)]
    tagged.sort(key=lambda t: t[0][0])
    return tagged


def coag_labeled(lp, colony, pi_prime):
    """Coagulate the blocks of lp carrying `colony` by pi_prime; the other
    colony's blocks pass through; block order re-established by least
    element and labels recomputed."""
    tagged = _coag_labeled_blocks(lp, colony, pi_prime)
    return LabeledPartition(tuple(b for b, _ in tagged),
                            tuple(c for _, c in tagged))


@dataclass(frozen=True)
class MergeMap:
    """Sends each pre-collision block position to its post-collision one."""

    source_arity: int
    target_arity: int
    index_map: tuple  # index_map[j-1] = new 1-based position of old block j

    def __post_init__(self):
        if set(self.index_map) != set(range(1, self.target_arity + 1)):
            raise ValueError("index_map must be surjective onto targets")


def merge_map_of(lp, colony, pi_prime):
    """MergeMap for the coalescence of lp's `colony` blocks by pi_prime,
    used to identify tensor variables of merged blocks."""
    tagged = _coag_labeled_blocks(lp, colony, pi_prime)
    locate = {}
    for new_pos, (block, _) in enumerate(tagged, start=1):
        for elem in block:
            locate[elem] = new_pos
    index_map = tuple(locate[block[0]] for block in lp.partition)
    return MergeMap(lp.block_count, len(tagged), index_map)


def enumerate_partitions(b, skip_singleton=False):
    """All Bell(b) partitions of [b] via restricted growth strings."""
    if b > MAX_PARTITION_SIZE:
        raise ValueError(f"b={b} exceeds cap {MAX_PARTITION_SIZE}")
    if b < 1:
        raise ValueError("b must be >= 1")
    out = []
    rgs = [0] * b

    def rec(i, maxval):
        if i == b:
            blocks = [[] for _ in range(maxval + 1)]
            for elem, g in enumerate(rgs, start=1):
                blocks[g].append(elem)
            pi = tuple(tuple(blk) for blk in blocks)
            if not (skip_singleton and is_singleton_partition(pi)):
                out.append(pi)
            return
        for v in range(maxval + 2):
            rgs[i] = v
            rec(i + 1, max(maxval, v))

    rgs[0] = 0
    rec(1, 0)
    return out


def partitions_with_profile(b, merge_sizes, s):
    """Concrete partitions of [b] realizing a collision profile."""
    want = (b, tuple(sorted(merge_sizes, reverse=True)), s)
    return [pi for pi in enumerate_partitions(b) if profile_of(pi) == want]


def random_partition_with_profile(b, merge_sizes, s, rng):
    """Uniform partition of [b] with the given profile, without enumerating
    all of P_[b]: consecutive groups of a uniform random permutation induce
    each qualifying partition equally often."""
    perm = list(range(1, b + 1))
    rng.shuffle(perm)
    blocks = []
    pos = 0
    for k in merge_sizes:
        blocks.append(perm[pos:pos + k])
        pos += k
    for _ in range(s):
        blocks.append(perm[pos:pos + 1])
        pos += 1
    return canonical(blocks)


def profile_multiplicity(b, merge_sizes, s):
    """Number of partitions of [b] realizing the profile:
    b! / (prod k_i! * prod_j m_j!) with m_j counting blocks of size j."""
    import math
    counts = {}
    for k in tuple(merge_sizes) + (1,) * s:
        counts[k] = counts.get(k, 0) + 1
    denom = 1
    for k in merge_sizes:
        denom *= math.factorial(k)
    for m in counts.values():
        denom *= math.factorial(m)
    return math.factorial(b) // denom


def iter_profiles(b):
    """All collision profiles (merge_sizes, s) achievable from b blocks,
    excluding the trivial no-collision profile. Generated as integer
    partitions of b with at least one part >= 2."""
    profiles = []

    def rec(remaining, max_part, parts):
        if remaining == 0:
            merge_sizes = tuple(p for p in parts if p >= 2)
            if merge_sizes:
                s = len(parts) - len(merge_sizes)
                profiles.append((merge_sizes, s))
            return
        for p in range(min(remaining, max_part), 0, -1):
            rec(remaining - p, p, parts + [p])

    rec(b, b, [])
    return sorted(profiles)
