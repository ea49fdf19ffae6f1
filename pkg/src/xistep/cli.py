"""Command-line harness: reproducible experiment runs with JSON/CSV
reports. Every report embeds the config hash, the master seed, and the
package version; a command rerun with the same inputs emits identical
bytes."""

import argparse
import json
import os
import random
import sys
from fractions import Fraction

from . import __version__
from .config import ConfigError, load_config
from .moments import (ScalarParams, generator_on_monomial, hausdorff_check,
                      order_indices, solve_stationary)
from .rationals import format_rational
from .reversibility import (F1_PROBE, F2_PROBE, S1_PROBE, T1_PROBE,
                            degenerate_params, final_contradiction,
                            residual_with_denominator)
from .setfun import (BaseMeasure, DyadicSet, MutationSpec, SetFunction,
                     TensorFunction, semigroup_apply_uniform)
from .simhelpers import (coupling_linearity_holds, normalization_holds,
                         random_scalar_params, random_xi)
from .simplex import build_rate_table, check_consistency
from .simulator import (StopRule, estimate_Qt, estimate_stationary,
                        initial_state, replay, replica_rng, run_until)


def _workers():
    raw = os.environ.get("XISTEP_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise SystemExit(f"XISTEP_THREADS must be an integer, got {raw!r}")
    return max(1, min(n, os.cpu_count() or 1))


def _meta(cfg):
    return {"config_sha256": cfg.digest, "seed": cfg.seed,
            "version": __version__}


def _emit(text, out_path):
    data = text if text.endswith("\n") else text + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data)


def _emit_json(report, out_path):
    _emit(json.dumps(report, indent=2, sort_keys=True), out_path)


def _profile_label(pi_prime):
    merged = sorted((len(b) for b in pi_prime if len(b) >= 2), reverse=True)
    s = sum(1 for b in pi_prime if len(b) == 1)
    return "+".join(str(k) for k in merged) + f";{s}"


def _monomial_inputs(cfg, n, m):
    f = TensorFunction.indicator_power(cfg.e_star, n + m)
    eta = (1,) * n + (2,) * m
    return f, eta


def cmd_rates(cfg, args):
    table = build_rate_table(cfg.xi, cfg.b_max)
    report = _meta(cfg)
    rows = {}
    for b in range(2, cfg.b_max + 1):
        rows[str(b)] = [
            {"profile": f"{prof.n};{'+'.join(map(str, prof.merge_sizes))}"
                        f";{prof.s}",
             "rate": format_rational(rate),
             "multiplicity": mult}
            for prof, rate, mult in table.profiles(b)]
    check = check_consistency(table)
    failures = [name for name, _, _, ok in check.checks if not ok]
    report["rates"] = rows
    report["consistency"] = {"checked": len(check.checks),
                             "failures": failures,
                             "ok": check.all_pass}
    return report, 0 if check.all_pass else 1


def cmd_simulate(cfg, args):
    eta = tuple(int(x) for x in cfg.options.get("eta", [1, 1]))
    t = cfg.options.get("t")
    f = TensorFunction.indicator_power(cfg.e_star, len(eta))
    stop = (StopRule(at_time=float(Fraction(t))) if t is not None
            else StopRule(at_absorption=True))
    seed = cfg.seed if args.seed is None else args.seed
    rng = replica_rng(seed, 0)
    params = cfg.model_params()
    _, traj = run_until(initial_state(f, eta), params, stop, rng)
    lines = [f"# config_sha256={cfg.digest}",
             f"# seed={seed}",
             f"# version={__version__}",
             "time,kind,colony,profile_or_block,block_count"]
    for ev in traj.events:
        detail = (_profile_label(ev.detail) if ev.kind == "coalescence"
                  else str(ev.detail))
        lines.append(f"{ev.time!r},{ev.kind},{ev.colony},{detail},"
                     f"{ev.block_count}")
    _emit("\n".join(lines), args.out)
    return None, 1 if traj.truncated else 0


def cmd_qt(cfg, args):
    n = int(cfg.options.get("n", 1))
    m = int(cfg.options.get("m", 0))
    if "t" not in cfg.options:
        raise ConfigError("options.t", "missing required field")
    t = float(Fraction(cfg.options["t"]))
    f, eta = _monomial_inputs(cfg, n, m)
    seed = cfg.seed if args.seed is None else args.seed
    replicas = cfg.replicas if args.replicas is None else args.replicas
    est = estimate_Qt(f, eta, (cfg.mu1, cfg.mu2), t, replicas,
                      cfg.model_params(), seed, workers=_workers())
    report = _meta(cfg)
    report.update({"seed": seed, "command": "qt",
                   "monomial": f"{n},{m}", "t": repr(t),
                   "estimate": {"mean": est.mean,
                                "std_error": est.std_error,
                                "replicas": est.replicas}})
    return report, 0


def cmd_stationary(cfg, args):
    mode = cfg.options.get("mode", "exact")
    order = int(cfg.options.get("order", 2))
    report = _meta(cfg)
    report["command"] = "stationary"
    if mode == "exact":
        moments = solve_stationary(order, cfg.scalar_params())
        report["moments"] = {f"{n},{m}": format_rational(v)
                             for (n, m), v in sorted(moments.items())}
        return report, 0
    if mode != "mc":
        raise ConfigError("options.mode", f"unknown mode {mode!r}")
    seed = cfg.seed if args.seed is None else args.seed
    replicas = cfg.replicas if args.replicas is None else args.replicas
    indices = [tuple(int(x) for x in idx)
               for idx in cfg.options.get("indices",
                                          [[i, order - i]
                                           for i in range(order + 1)])]
    exact = solve_stationary(max(n + m for n, m in indices),
                             cfg.scalar_params())
    params = cfg.model_params()
    rows = {}
    for n, m in indices:
        f, eta = _monomial_inputs(cfg, n, m)
        est = estimate_stationary(f, eta, cfg.base, replicas, params, seed,
                                  workers=_workers())
        rows[f"{n},{m}"] = {"mean": est.mean, "std_error": est.std_error,
                            "exact": format_rational(exact[(n, m)]),
                            "replicas": est.replicas}
    report.update({"seed": seed, "estimates": rows})
    return report, 0


def cmd_hausdorff(cfg, args):
    order = int(cfg.options.get("order", 4))
    moments = solve_stationary(order, cfg.scalar_params())
    check = hausdorff_check({idx: v for idx, v in moments.items()})
    report = _meta(cfg)
    report.update({
        "command": "hausdorff", "order": order,
        "passed": check.passed,
        "min_alternating_difference": format_rational(check.min_value),
        "differences_checked": check.checked,
        "violations": [f"{idx}" for idx in check.violations]})
    return report, 0 if check.passed else 1


def cmd_reversibility(cfg, args):
    p = cfg.scalar_params()
    report = _meta(cfg)
    probes = {}
    any_nonzero = False
    for name, probe in (("S1", S1_PROBE), ("T1", T1_PROBE),
                        ("F1", F1_PROBE), ("F2", F2_PROBE)):
        r, d = residual_with_denominator(probe, p)
        any_nonzero = any_nonzero or r != 0
        probes[name] = {"left": f"{probe.left[0]},{probe.left[1]}",
                        "right": f"{probe.right[0]},{probe.right[1]}",
                        "residual": format_rational(r),
                        "denominator": format_rational(d)}
    conditions = {"symmetric_migration": p.u1 == p.u2,
                  "reference_mass_half": p.alpha == Fraction(1, 2),
                  "no_triple_collisions": p.a3 == 0}
    if p.a3 == 0 and p.a2 > 0:
        contra = final_contradiction(p.a2, p.theta, p.u1)
        conditions["final_contradiction_nonzero"] = contra.nonzero
        any_nonzero = any_nonzero or contra.nonzero
        probes["final_contradiction"] = {
            "pair_rate": format_rational(contra.pair_rate),
            "residual": format_rational(contra.residual),
            "cubic_numerator": format_rational(contra.cubic_numerator)}
    if p.a2 == 0:
        verdict = "outside theorem hypotheses (no pairwise coalescence)"
    elif any_nonzero:
        verdict = "not reversible"
    else:
        verdict = "no probe detected irreversibility at tested orders"
    report.update({"command": "reversibility", "probes": probes,
                   "conditions": conditions, "verdict": verdict})
    return report, 0


def _selftest_suites(seed, perturb_rates=False):
    rng = random.Random(f"xistep-selftest:{seed}")
    suites = []

    failures = []
    for _ in range(10):
        table = build_rate_table(random_xi(rng), 5)
        if perturb_rates:
            table.rows[3] = tuple((prof, rate + Fraction(1, 7), mult)
                                  for prof, rate, mult in table.rows[3])
        check = check_consistency(table)
        failures.extend(name for name, _, _, ok in check.checks if not ok)
    suites.append(("rate_consistency", not failures,
                   "; ".join(failures[:3])))

    spec = MutationSpec(Fraction(3, 2), base=BaseMeasure.uniform())
    g = SetFunction.indicator(DyadicSet(2, frozenset({0, 3})))
    ok = True
    for _ in range(5):
        s, t = rng.random(), rng.random()
        lhs = semigroup_apply_uniform(semigroup_apply_uniform(g, s, spec),
                                      t, spec)
        rhs = semigroup_apply_uniform(g, s + t, spec)
        ok = ok and all(abs(a - b) < 1e-12
                        for a, b in zip(lhs._coeffs_at(2), rhs._coeffs_at(2)))
    suites.append(("semigroup_law", ok, ""))

    ok = all(coupling_linearity_holds(rng) for _ in range(5))
    suites.append(("coupling_linearity", ok, ""))
    ok = all(normalization_holds(rng) for _ in range(5))
    suites.append(("path_normalization", ok, ""))

    ok = True
    detail = ""
    for _ in range(5):
        p = random_scalar_params(rng)
        moments = solve_stationary(4, p)
        for idx in [i for k in range(1, 5) for i in order_indices(k)]:
            res = generator_on_monomial(idx, p).evaluate(moments)
            if res != 0:
                ok = False
                detail = f"generator residual {res} at {idx}"
        if not hausdorff_check(moments).passed:
            ok = False
            detail = "hausdorff violation on solved moments"
    suites.append(("stationary_moments", ok, detail))
    return suites


def cmd_selftest(cfg, args):
    seed = args.seed if args.seed is not None else (cfg.seed if cfg else 0)
    suites = _selftest_suites(seed)
    report = {"seed": seed, "version": __version__,
              "config_sha256": cfg.digest if cfg else None,
              "command": "selftest",
              "suites": [{"name": name, "passed": ok,
                          **({"detail": detail} if detail else {})}
                         for name, ok, detail in suites]}
    return report, 0 if all(ok for _, ok, _ in suites) else 1


COMMANDS = {"rates": cmd_rates, "simulate": cmd_simulate, "qt": cmd_qt,
            "stationary": cmd_stationary, "hausdorff": cmd_hausdorff,
            "reversibility": cmd_reversibility, "selftest": cmd_selftest}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="xistep",
        description="Two-colony coalescent dual: simulation, exact moments,"
                    " and reversibility checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=(name != "selftest"))
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--replicas", type=int, default=None)
        p.add_argument("--out", default=None)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else None
        report, status = COMMANDS[args.command](cfg, args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if report is not None:
        if args.seed is not None:
            report["seed"] = args.seed
        _emit_json(report, args.out)
    return status


if __name__ == "__main__":
    sys.exit(main())
