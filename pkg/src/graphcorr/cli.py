"""Command-line interface.

Subcommands: generate, orbit, test, gf, moments, enumerate, sweep, tv,
curves, verify.  File formats are the 1-based text formats of the graphs
module.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import acceptance, experiments
from .detect import (
    edge_count_test,
    likelihood_ratio_exact,
    qap_exact,
    qap_local_search,
    threshold_er,
    threshold_gaussian,
)
from .enumeration import (
    ConstructionParams,
    algorithm1_forests,
    algorithm2_pseudoforests,
    stream_bound_forest,
    stream_bound_pseudoforest,
)
from .graphs import (
    read_binary_graph,
    read_permutation,
    read_weighted_graph,
    write_binary_graph,
    write_permutation,
    write_weighted_graph,
)
from .moments import (
    gf_bound_forest,
    gf_bound_pseudoforest,
    gf_orbit_forests_bruteforce,
    gf_orbit_pseudoforests_bruteforce,
    second_moment_exact,
    second_moment_mc,
)
from .orbits import (
    CycleType,
    backbone,
    classify_orbit,
    cycle_type,
    edge_orbits,
    orbit_label,
)
from .sampling import (
    ErParams,
    GaussianParams,
    SeedSpec,
    sample_null_er,
    sample_null_gaussian,
    sample_planted_er,
    sample_planted_gaussian,
)


def _model_params(args) -> GaussianParams | ErParams:
    if args.model == "gaussian":
        if args.rho is None:
            raise SystemExit("--rho is required for the gaussian model")
        return GaussianParams(args.n, args.rho)
    if args.p is None or args.s is None:
        raise SystemExit("--p and --s are required for the er model")
    return ErParams(args.n, args.p, args.s)


def _cmd_generate(args) -> int:
    params = _model_params(args)
    seed = SeedSpec(args.seed, args.stream)
    os.makedirs(args.out, exist_ok=True)
    gaussian = args.model == "gaussian"
    writer = write_weighted_graph if gaussian else write_binary_graph
    if args.hypothesis == "null":
        a, b = (sample_null_gaussian if gaussian else sample_null_er)(params, seed)
        pi = None
    else:
        a, b, pi = (sample_planted_gaussian if gaussian else sample_planted_er)(params, seed)
    writer(a, os.path.join(args.out, "a.txt"))
    writer(b, os.path.join(args.out, "b.txt"))
    if pi is not None:
        write_permutation(pi, os.path.join(args.out, "pi.txt"))
    print(f"wrote {args.hypothesis} {args.model} pair (n={args.n}) to {args.out}")
    return 0


def _cmd_orbit(args) -> int:
    sigma = read_permutation(args.sigma)
    orbits, census = edge_orbits(sigma)
    ct = cycle_type(sigma)
    if args.k is not None:
        from .orbits import orbits_up_to

        orbits = orbits_up_to(sigma, args.k)
    rows = []
    for o in orbits:
        cls = classify_orbit(sigma, o)
        rows.append((cls.kind, str(cls), len(o), orbit_label(sigma, o), o.edges))
    rows.sort(key=lambda r: ("MBCS".index(r[0]), r[1], r[3] or 0))
    print(f"{'type':10s} {'length':>6s} {'label':>5s}  orbit")
    for kind, name, length, label, edges in rows:
        shown = ",".join(f"{i + 1}{j + 1}" if sigma.n < 10 else f"({i + 1},{j + 1})" for i, j in edges)
        print(f"{name:10s} {length:6d} {str(label or '-'):>5s}  ({shown})")
    dump = {
        "n": sigma.n,
        "cycle_type": {m + 1: c for m, c in enumerate(ct.counts) if c},
        "census": dict(sorted(census.by_length.items())),
        "orbit_count": len(rows),
    }
    print(json.dumps(dump))
    if args.backbone:
        h = read_binary_graph(args.backbone)
        gamma = backbone(sigma, h, args.k if args.k is not None else sigma.n)
        print("backbone nodes:")
        for nd in gamma.nodes:
            flag = " split" if nd.split else ""
            print(f"  {nd.gid}: length {nd.length}{flag} members {tuple(v + 1 for v in nd.members)}")
        print("backbone edges:")
        for e in gamma.edges:
            print(f"  {e.kind} {e.u} -- {e.v} label {e.label}")
    return 0


def _cmd_test(args) -> int:
    params = _model_params(args)
    reader = read_weighted_graph if args.model == "gaussian" else read_binary_graph
    a, b = reader(args.a), reader(args.b)
    argmax = None
    if args.stat == "qap-exact":
        stat, argmax = qap_exact(a, b)
    elif args.stat == "qap-ls":
        stat, argmax = qap_local_search(a, b, restarts=args.restarts, seed=args.seed)
    elif args.stat == "lr":
        stat = likelihood_ratio_exact(a, b, params)
    elif args.stat == "edges":
        outcome = edge_count_test(a, b, params)
        print(f"statistic {outcome.statistic:.6g} threshold {outcome.threshold:.6g} decision {outcome.decision}")
        return 0
    else:
        raise SystemExit(f"unknown statistic {args.stat}")
    if args.threshold == "auto":
        if args.stat == "lr":
            tau = 1.0
        elif args.model == "gaussian":
            tau = threshold_gaussian(params.n, params.rho)
        else:
            tau = threshold_er(params.n, params.p, params.s)
    else:
        tau = float(args.threshold)
    decision = "planted" if stat >= tau else "null"
    print(f"statistic {stat:.6g} threshold {tau:.6g} decision {decision}")
    if argmax is not None:
        print("argmax " + " ".join(str(v) for v in argmax.to_one_based()))
    return 0


def _cmd_gf(args) -> int:
    sigma = read_permutation(args.sigma)
    ct = cycle_type(sigma)
    if args.forest:
        brute = gf_orbit_forests_bruteforce(sigma, args.k, args.s)
        bound = gf_bound_forest(ct, args.k, args.s)
    else:
        brute = gf_orbit_pseudoforests_bruteforce(sigma, args.k, args.s)
        bound = gf_bound_pseudoforest(ct, args.k, args.s)
    kind = "forest" if args.forest else "pseudoforest"
    print(f"{kind} generating function: brute {brute:.12g}  bound {bound:.12g}  margin {bound - brute:.6g}")
    return 0 if brute <= bound + 1e-12 else 1


def _cmd_moments(args) -> int:
    params = _model_params(args)
    try:
        report = second_moment_exact(params)
    except Exception:
        report = second_moment_mc(params, trials=args.trials, seed=args.seed)
    print("model,n,value,exact,halfwidth")
    hw = "" if report.mc_halfwidth is None else f"{report.mc_halfwidth:.6g}"
    print(f"{report.model},{report.n},{report.value:.12g},{report.is_exact},{hw}")
    if report.contributions and args.table:
        print("cycle_type,weight,factor")
        for counts, weight, factor in report.contributions:
            name = " ".join(f"{m + 1}^{c}" for m, c in enumerate(counts) if c)
            print(f"{name},{weight:.10g},{factor:.10g}")
    return 0


def _parse_counts(text: str) -> dict[int, int]:
    out: dict[int, int] = {}
    if not text:
        return out
    for item in text.split(","):
        key, val = item.split(":")
        out[int(key)] = int(val)
    return out


def _cmd_enumerate(args) -> int:
    counts = _parse_counts(args.cycle_type)
    n = sum(m * c for m, c in counts.items())
    ct = CycleType.from_counts(n, counts)
    params = ConstructionParams(
        _parse_counts(args.a), _parse_counts(args.b), _parse_counts(args.c), _parse_counts(args.d)
    )
    if args.forest:
        stream = algorithm1_forests(ct, args.k, params)
        bound = stream_bound_forest(ct, args.k, params)
    else:
        stream = algorithm2_pseudoforests(ct, args.k, params)
        bound = stream_bound_pseudoforest(ct, args.k, params)
    total = valid = 0
    violation_tally: dict[str, int] = {}
    for item in stream:
        total += 1
        valid += item.valid
        for v in item.violations:
            violation_tally[v] = violation_tally.get(v, 0) + 1
    print(f"stream length {total} (bound {bound}), valid {valid}")
    if args.validate and violation_tally:
        for v, c in sorted(violation_tally.items()):
            print(f"  {v}: {c}")
    return 0 if total <= bound else 1


def _read_config(path) -> experiments.SweepConfig:
    kv = {}
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, val = line.split("=", 1)
            kv[key.strip()] = val.strip()

    def _floats(key):
        return tuple(float(x) for x in kv[key].split(",")) if key in kv else ()

    return experiments.SweepConfig(
        model=kv["model"],
        n_values=tuple(int(x) for x in kv["n"].split(",")),
        tests=tuple(kv["tests"].split(",")),
        trials=int(kv["trials"]),
        master_seed=int(kv.get("seed", "0")),
        rho_values=_floats("rho"),
        p_values=_floats("p"),
        s_values=_floats("s"),
        threshold_mode=kv.get("threshold", "auto"),
        restarts=int(kv.get("restarts", "20")),
        ls_rounds=int(kv.get("ls_rounds", "10")),
    )


def _cmd_sweep(args) -> int:
    config = _read_config(args.config)
    text = experiments.run_sweep(config, out_path=args.out)
    if args.out is None:
        sys.stdout.write(text)
    else:
        print(f"wrote {args.out}")
    return 0


def _cmd_tv(args) -> int:
    tv = experiments.exact_tv_er(ErParams(args.n, args.p, args.s))
    print(f"exact TV {tv:.12g}; minimal error sum {1 - tv:.12g}")
    return 0


def _cmd_curves(args) -> int:
    for row in experiments.threshold_curves(args.model, args.n_min, args.n_max, p=args.p):
        print(row)
    return 0


def _cmd_verify(args) -> int:
    ok = acceptance.verify(suite=args.suite, seed=args.seed)
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="graphcorr",
        description="Correlation testing for unlabeled random graph pairs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample a graph pair to files")
    g.add_argument("--model", choices=("gaussian", "er"), required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--rho", type=float)
    g.add_argument("--p", type=float)
    g.add_argument("--s", type=float)
    g.add_argument("--hypothesis", choices=("null", "planted"), required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--stream", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_generate)

    o = sub.add_parser("orbit", help="edge-orbit census of a permutation")
    o.add_argument("--sigma", required=True)
    o.add_argument("--k", type=int)
    o.add_argument("--table", action="store_true")
    o.add_argument("--backbone", help="orbit-graph file to summarize")
    o.set_defaults(func=_cmd_orbit)

    t = sub.add_parser("test", help="run a detection test on a graph pair")
    t.add_argument("--stat", choices=("qap-exact", "qap-ls", "lr", "edges"), required=True)
    t.add_argument("--a", required=True)
    t.add_argument("--b", required=True)
    t.add_argument("--model", choices=("gaussian", "er"), required=True)
    t.add_argument("--n", type=int, required=True)
    t.add_argument("--rho", type=float)
    t.add_argument("--p", type=float)
    t.add_argument("--s", type=float)
    t.add_argument("--threshold", default="auto")
    t.add_argument("--restarts", type=int, default=20)
    t.add_argument("--seed", type=int, default=0)
    t.set_defaults(func=_cmd_test)

    f = sub.add_parser("gf", help="orbit generating function: brute force vs bound")
    f.add_argument("--sigma", required=True)
    f.add_argument("--k", type=int, required=True)
    f.add_argument("--s", type=float, required=True)
    f.add_argument("--forest", action="store_true")
    f.set_defaults(func=_cmd_gf)

    m = sub.add_parser("moments", help="second moment of the likelihood ratio")
    m.add_argument("--model", choices=("gaussian", "er"), required=True)
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--rho", type=float)
    m.add_argument("--p", type=float)
    m.add_argument("--s", type=float)
    m.add_argument("--trials", type=int, default=2000)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--table", action="store_true")
    m.set_defaults(func=_cmd_moments)

    e = sub.add_parser("enumerate", help="backbone generation stream summary")
    e.add_argument("--cycle-type", required=True, help="length:count pairs, e.g. 2:2,4:1")
    e.add_argument("--k", type=int, required=True)
    e.add_argument("--a", default="", help="matchings per length, e.g. 2:1")
    e.add_argument("--b", default="", help="splits per length")
    e.add_argument("--c", default="", help="forward bridges per length")
    e.add_argument("--d", default="", help="backward bridges per length")
    e.add_argument("--forest", action="store_true")
    e.add_argument("--validate", action="store_true")
    e.set_defaults(func=_cmd_enumerate)

    s = sub.add_parser("sweep", help="detection-error sweep from a config file")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.set_defaults(func=_cmd_sweep)

    v = sub.add_parser("tv", help="exact total variation at small n (er)")
    v.add_argument("--n", type=int, required=True)
    v.add_argument("--p", type=float, required=True)
    v.add_argument("--s", type=float, required=True)
    v.set_defaults(func=_cmd_tv)

    c = sub.add_parser("curves", help="asymptotic threshold boundary curves")
    c.add_argument("--model", choices=("gaussian", "er"), required=True)
    c.add_argument("--n-min", type=int, required=True)
    c.add_argument("--n-max", type=int, required=True)
    c.add_argument("--p", type=float)
    c.set_defaults(func=_cmd_curves)

    w = sub.add_parser("verify", help="run the acceptance suite")
    w.add_argument("--suite", help="substring filter on criterion names")
    w.add_argument("--seed", type=int, default=acceptance.DEFAULT_SEED)
    w.set_defaults(func=_cmd_verify)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
