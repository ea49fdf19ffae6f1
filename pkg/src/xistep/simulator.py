"""The labeled-coalescent dual as a simulatable jump chain, with duality
functional evaluation and Monte Carlo moment estimators.

Replicas draw independent random streams derived deterministically from a
master seed, so every reported number is reproducible.
"""

import bisect
import concurrent.futures
import math
import random
import statistics
from dataclasses import dataclass
from fractions import Fraction

from . import partitions as pt
from .partitions import (COLONY_1, COLONY_2, LabeledPartition, coag_labeled,
                         merge_map_of, random_partition_with_profile, relabel,
                         singleton_partition)
from .setfun import (SetFunction, TensorFunction, decay_factor,
                     sample_mutation_path)


@dataclass(frozen=True)
class ModelParams:
    """Everything the dual generator needs."""

    xi: object            # XiMeasure
    mutation: object      # MutationSpec
    u1: Fraction
    u2: Fraction
    rate_table: object    # RateTable

    def __post_init__(self):
        object.__setattr__(self, "u1", Fraction(self.u1))
        object.__setattr__(self, "u2", Fraction(self.u2))
        if self.u1 <= 0 or self.u2 <= 0:
            raise ValueError("migration rates must be positive")


@dataclass(frozen=True)
class DualState:
    lp: LabeledPartition
    y: TensorFunction
    clock: float = 0.0
    events: int = 0

    def __post_init__(self):
        if self.y.arity != self.lp.block_count:
            raise ValueError("tensor arity must equal block count")


def initial_state(f, eta):
    """Dual started from n singleton blocks labeled by eta carrying f."""
    lp = LabeledPartition(singleton_partition(len(eta)), tuple(eta))
    return DualState(lp, f)


@dataclass(frozen=True)
class EventRecord:
    time: float
    dt: float
    kind: str             # "coalescence" | "migration"
    colony: int           # colony coalescing, or colony of origin
    detail: object        # concrete pi_prime, or 1-based block index
    block_count: int      # after the event


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    replicas: int
    seed: int


def replica_rng(seed, replica):
    """Independent deterministic stream per replica."""
    return random.Random(f"xistep:{seed}:{replica}")


def total_jump_rate(state, params):
    """Per-block migration plus per-colony total coalescence rate."""
    return _jump_rate(state.lp, params)


def _jump_rate(lp, params):
    n1, n2 = lp.count(COLONY_1), lp.count(COLONY_2)
    rate = n2 * params.u1 + n1 * params.u2
    for b in (n1, n2):
        if b >= 2:
            rate += params.rate_table.total_rate(b)
    return rate


def _float_jump_rate(lp, params):
    fu1, fu2, profs = _float_tables(params)
    n1, n2 = lp.count(COLONY_1), lp.count(COLONY_2)
    rate = n2 * fu1 + n1 * fu2
    if n1 >= 2:
        rate += profs[n1][2]
    if n2 >= 2:
        rate += profs[n2][2]
    return rate


def _advance_tensor(y, dt, spec, exact):
    p = decay_factor(spec.theta, dt, exact=exact)
    q = 1 - p
    # each factor's base integral is invariant under the mutation flow
    # (the flow is a convex combination with that same integral), so it is
    # computed once per tensor and carried forward
    cache = getattr(y, "_ints", None)
    if cache is None or cache[0] is not spec.base:
        ints = tuple(spec.base.integrate(g) for g in y.factors)
    else:
        ints = cache[1]
    factors = tuple(g.axpy(p, q * ints[i])
                    for i, g in enumerate(y.factors))
    out = TensorFunction(factors)
    object.__setattr__(out, "_ints", (spec.base, ints))
    return out


def _float_tables(params):
    """Per-parameter cache of float migration rates and, per block count,
    the positive-rate coalescence profiles with cumulative float weights."""
    try:
        return params._ftables
    except AttributeError:
        pass
    profs = {}
    for b in range(2, params.rate_table.b_max + 1):
        rows = [(prof, float(rate * mult))
                for prof, rate, mult in params.rate_table.profiles(b)
                if rate > 0]
        cum, acc = [], 0.0
        for _, w in rows:
            acc += w
            cum.append(acc)
        profs[b] = ([p for p, _ in rows], cum, acc)
    tables = (float(params.u1), float(params.u2), profs)
    object.__setattr__(params, "_ftables", tables)
    return tables


def _pick_event(lp, params, rng):
    """Categorical sample over migrations (per block) and coalescences
    (per colony, then profile, then a uniform concrete partition)."""
    fu1, fu2, profs = _float_tables(params)
    n1, n2 = lp.count(COLONY_1), lp.count(COLONY_2)
    # colony-2 blocks migrate at rate u1, colony-1 blocks at rate u2
    weights = [n2 * fu1, n1 * fu2,
               profs[n1][2] if n1 >= 2 else 0.0,
               profs[n2][2] if n2 >= 2 else 0.0]
    pick = rng.random() * sum(weights)
    if pick < weights[0] + weights[1]:
        label = COLONY_2 if pick < weights[0] else COLONY_1
        positions = [i for i, l in enumerate(lp.labels, start=1)
                     if l == label]
        return "migration", label, positions[rng.randrange(len(positions))]
    pick -= weights[0] + weights[1]
    colony, b = (COLONY_1, n1) if pick < weights[2] else (COLONY_2, n2)
    if colony == COLONY_2:
        pick -= weights[2]
    rows, cum, _ = profs[b]
    prof = rows[bisect.bisect_right(cum, pick, hi=len(rows) - 1)]
    detail = random_partition_with_profile(b, prof.merge_sizes, prof.s, rng)
    return "coalescence", colony, detail


def _apply_event(state, kind, colony, detail):
    lp, y = state.lp, state.y
    if kind == "migration":
        target = COLONY_1 if colony == COLONY_2 else COLONY_2
        new_lp = LabeledPartition(lp.partition,
                                  relabel(lp.labels, detail, target))
        return DualState(new_lp, y, state.clock, state.events)
    mm = merge_map_of(lp, colony, detail)
    new_lp = coag_labeled(lp, colony, detail)
    groups = [[] for _ in range(mm.target_arity)]
    for j, dest in enumerate(mm.index_map):
        groups[dest - 1].append(y.factors[j])
    merged = []
    for fs in groups:
        g = fs[0]
        for h in fs[1:]:
            g = g.multiply(h)
        merged.append(g)
    return DualState(new_lp, TensorFunction(tuple(merged)),
                     state.clock, state.events)


def step(state, params, rng, exact=False):
    """One jump: Exp holding time, mutation semigroup advance, then a
    migration or coalescence chosen proportionally to its rate."""
    rate = _float_jump_rate(state.lp, params)
    if rate <= 0:
        raise RuntimeError("no jump possible from this state")
    dt = rng.expovariate(rate)
    y = _advance_tensor(state.y, dt, params.mutation, exact)
    state = DualState(state.lp, y, state.clock + dt, state.events + 1)
    kind, colony, detail = _pick_event(state.lp, params, rng)
    state = _apply_event(state, kind, colony, detail)
    record = EventRecord(state.clock, dt, kind, colony, detail,
                         state.lp.block_count)
    return record, state


@dataclass(frozen=True)
class StopRule:
    """Stop at a fixed time, at absorption (one block), or both; max_events
    caps the run and sets `truncated` when exhausted first."""

    at_time: float = None
    at_absorption: bool = False
    max_events: int = 100_000

    def __post_init__(self):
        if self.at_time is None and not self.at_absorption:
            raise ValueError("stop rule needs a time or absorption target")


@dataclass(frozen=True)
class Trajectory:
    events: tuple
    truncated: bool = False


def run_until(state, params, stop, rng, exact=False):
    """Run the jump chain; on a time stop the tensor is advanced by the
    remaining holding time so Y is evaluated exactly at the stop time."""
    if params.xi.total_mass == 0 and stop.at_absorption and stop.max_events is None:
        raise ValueError("absorption needs an event cap when xi has no mass")
    events = []
    truncated = False
    while True:
        if stop.at_absorption and state.lp.block_count == 1 and stop.at_time is None:
            break
        dt = rng.expovariate(_float_jump_rate(state.lp, params))
        if stop.at_time is not None and state.clock + dt >= stop.at_time:
            y = _advance_tensor(state.y, stop.at_time - state.clock,
                                params.mutation, exact)
            state = DualState(state.lp, y, stop.at_time, state.events)
            break
        if stop.max_events is not None and len(events) >= stop.max_events:
            truncated = True
            break
        y = _advance_tensor(state.y, dt, params.mutation, exact)
        state = DualState(state.lp, y, state.clock + dt, state.events + 1)
        kind, colony, detail = _pick_event(state.lp, params, rng)
        state = _apply_event(state, kind, colony, detail)
        events.append(EventRecord(state.clock, dt, kind, colony, detail,
                                  state.lp.block_count))
        if stop.at_absorption and state.lp.block_count == 1 and stop.at_time is None:
            break
    return state, Trajectory(tuple(events), truncated)


def replay(f, eta, trajectory, params, exact=True):
    """Re-apply a recorded event stream to a fresh initial tensor. Uses the
    recorded holding times, so two replays share identical semigroup
    factors; linearity checks then hold exactly in rational mode."""
    state = initial_state(f, eta)
    for ev in trajectory.events:
        y = _advance_tensor(state.y, ev.dt, params.mutation, exact)
        state = DualState(state.lp, y, state.clock + ev.dt, state.events + 1)
        state = _apply_event(state, ev.kind, ev.colony, ev.detail)
    return state


def evaluate_dual(state, mu):
    """<mu_eta, Y>: the product over blocks of the factor integrated
    against the block label's colony measure."""
    mu1, mu2 = mu
    value = 1
    for g, label in zip(state.y.factors, state.lp.labels):
        m = mu1 if label == COLONY_1 else mu2
        value *= m.integrate(g)
    return value


def _mc(values, replicas, seed):
    mean = sum(values) / replicas
    if replicas > 1:
        sd = statistics.stdev(values)
        se = sd / math.sqrt(replicas)
    else:
        se = 0.0
    return McEstimate(float(mean), float(se), replicas, seed)


def _floatified(f):
    """Float coefficients up front so replicas avoid repeated mixed
    Fraction/float arithmetic."""
    return TensorFunction(tuple(
        SetFunction(g.level, tuple(float(c) for c in g.coeffs))
        for g in f.factors))


def _qt_values(f, eta, mu, t, params, seed, exact, lo, hi):
    if not exact:
        f = _floatified(f)
    values = []
    for rep in range(lo, hi):
        rng = replica_rng(seed, rep)
        state = initial_state(f, eta)
        state, _ = run_until(state, params, StopRule(at_time=t), rng,
                             exact=exact)
        values.append(float(evaluate_dual(state, mu)))
    return values


def _stationary_values(f, eta, pi_tilde, params, seed, exact, max_events,
                       lo, hi):
    if not exact:
        f = _floatified(f)
    values = []
    stop = StopRule(at_absorption=True, max_events=max_events)
    for rep in range(lo, hi):
        rng = replica_rng(seed, rep)
        state = initial_state(f, eta)
        state, traj = run_until(state, params, stop, rng, exact=exact)
        if traj.truncated:
            raise RuntimeError(f"replica {rep} truncated before absorption")
        values.append(float(pi_tilde.integrate(state.y.factors[0])))
    return values


def _fan_out(fn, args, replicas, workers):
    """Split the replica index range across workers; per-replica seeding
    makes the merged result identical to a sequential run."""
    if workers <= 1 or replicas < 2 * workers:
        return fn(*args, 0, replicas)
    chunk = -(-replicas // workers)
    spans = [(lo, min(lo + chunk, replicas))
             for lo in range(0, replicas, chunk)]
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as ex:
        futures = [ex.submit(fn, *args, lo, hi) for lo, hi in spans]
        return [v for fut in futures for v in fut.result()]


def estimate_Qt(f, eta, mu, t, replicas, params, seed, exact=False,
                workers=1):
    """Monte Carlo transition moment at time t via the duality identity."""
    if not params.mutation.is_uniform:
        return genealogical_evaluate(f, eta, mu, t, replicas, params, seed)
    values = _fan_out(_qt_values, (f, eta, mu, t, params, seed, exact),
                      replicas, workers)
    return _mc(values, replicas, seed)


def estimate_stationary(f, eta, pi_tilde, replicas, params, seed,
                        exact=False, max_events=100_000, workers=1):
    """Runs each replica to absorption and pairs the single surviving
    factor with the mutation-invariant measure."""
    if params.xi.total_mass == 0:
        raise ValueError("stationary estimate needs coalescence (xi mass > 0)")
    if not params.mutation.is_uniform:
        return genealogical_evaluate(f, eta, (pi_tilde, pi_tilde), None,
                                     replicas, params, seed)
    values = _fan_out(_stationary_values,
                      (f, eta, pi_tilde, params, seed, exact, max_events),
                      replicas, workers)
    return _mc(values, replicas, seed)


def _label_chain(eta, params, t, rng, max_events):
    """Simulate only the labeled-partition skeleton; returns the list of
    (lp, segment_duration) pairs from time 0 up to t (or absorption when
    t is None), oldest first."""
    lp = LabeledPartition(singleton_partition(len(eta)), tuple(eta))
    segments = []     # (lp during segment, duration, event applied at end)
    clock = 0.0
    for _ in range(max_events):
        if t is None and lp.block_count == 1:
            break
        rate = _jump_rate(lp, params)
        dt = rng.expovariate(float(rate))
        if t is not None and clock + dt >= t:
            segments.append((lp, t - clock, None))
            return segments
        kind, colony, detail = _pick_event(lp, params, rng)
        segments.append((lp, dt, (kind, colony, detail)))
        clock += dt
        if kind == "migration":
            target = COLONY_1 if colony == COLONY_2 else COLONY_2
            lp = LabeledPartition(lp.partition, relabel(lp.labels, detail,
                                                        target))
        else:
            lp = coag_labeled(lp, colony, detail)
    else:
        raise RuntimeError("event cap exhausted in genealogical simulation")
    segments.append((lp, 0.0, None))
    return segments


def genealogical_evaluate(f, eta, mu_or_pi, t_or_none, replicas, params,
                          seed, max_events=100_000):
    """Unbiased sampler for the same dual expectations, drawing types at
    the top of the genealogy and running mutation paths down each lineage
    segment; f (a tensor of indicator-style factors) is evaluated at the
    leaves. Works for general mutation kernels."""
    if isinstance(mu_or_pi, tuple):
        mu1, mu2 = mu_or_pi
    else:
        mu1 = mu2 = mu_or_pi
    spec = params.mutation
    values = []
    for rep in range(replicas):
        rng = replica_rng(seed, rep)
        segments = _label_chain(eta, params, t_or_none, rng, max_events)
        top_lp = segments[-1][0]
        types = {}
        for block, label in zip(top_lp.partition, top_lp.labels):
            m = mu1 if label == COLONY_1 else mu2
            types[block] = m.sample(rng)
        for lp, duration, _event in reversed(segments):
            new_types = {}
            for block in lp.partition:
                parent = next(b for b in types if block[0] in b)
                x = types[parent]
                if duration > 0 and spec.theta > 0:
                    x = sample_mutation_path(x, duration, spec, rng)
                new_types[block] = x
            types = new_types
        leaf_types = {b[0]: x for b, x in types.items()}
        value = 1.0
        for i, g in enumerate(f.factors, start=1):
            value *= float(g.value_at(leaf_types[i]))
        values.append(value)
    return _mc(values, replicas, seed)


def dual_generator_value(f, eta, mu, params):
    """Exact action of the dual generator on G_mu(f, eta): mutation term
    plus coalescence differences over nontrivial colony partitions plus
    per-block migration differences."""
    from .setfun import apply_generator_uniform
    from .simplex import per_partition_rate

    lp = LabeledPartition(singleton_partition(len(eta)), tuple(eta))
    base_state = DualState(lp, f)
    mu1, mu2 = mu
    g0 = evaluate_dual(base_state, mu)
    total = Fraction(0)
    # mutation: sum over variables of <A g_k> with the other factors fixed
    for k in range(f.arity):
        factors = list(f.factors)
        factors[k] = apply_generator_uniform(factors[k], params.mutation)
        total += evaluate_dual(DualState(lp, TensorFunction(tuple(factors))),
                               mu)
    # coalescence within each colony
    for colony in (COLONY_1, COLONY_2):
        b = lp.count(colony)
        if b >= 2:
            for pi_prime in pt.enumerate_partitions(b, skip_singleton=True):
                lam = per_partition_rate(params.xi, pi_prime)
                if lam == 0:
                    continue
                new_state = _apply_event(base_state, "coalescence", colony,
                                         pi_prime)
                total += lam * (evaluate_dual(new_state, mu) - g0)
    # migration per block
    for pos, label in enumerate(lp.labels, start=1):
        u = params.u1 if label == COLONY_2 else params.u2
        new_state = _apply_event(base_state, "migration", label, pos)
        total += u * (evaluate_dual(new_state, mu) - g0)
    return total
