"""Command-line surface: generate instances, run the approximation
pipeline, run experiments, inspect information metrics, and query the
exact oracles.

Exit codes: 0 success, 2 input error, 3 size guard exceeded, 4 internal
invariant failure.  Every command is deterministic given its inputs and
seed; reports embed the seed and parameter echo, JSON reports carry a
schema-version field, and experiment reports render a matplotlib figure
next to the delimited output unless --no-figure is passed.

The environment variable DENSECSP_CAP overrides the default size guards
(oracle search spaces and relaxation variable counts).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

from . import csp, dksh, games, hierarchy, info, oracle, rounding
from .rng import SplitMix64
from .errors import CapExceeded, DenseCspError, InputError, InternalInvariantError
from .experiments import EXPERIMENT_NAMES, run_experiment
from .plots import render_figure

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CAP = 3
EXIT_INTERNAL = 4


def env_cap(default: int) -> int:
    raw = os.environ.get("DENSECSP_CAP")
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise InputError(f"DENSECSP_CAP must be an integer, got {raw!r}") from exc


def _read_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _dump(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _detect(data: dict) -> str:
    if {"n", "q", "k", "constraints"} <= data.keys():
        return "instance"
    if {"x_count", "y_count", "edges"} <= data.keys():
        return "game"
    if {"n", "d", "edges"} <= data.keys():
        return "hypergraph"
    raise InputError("input JSON is not an instance, game, or hypergraph")


# ---------------------------------------------------------------------------
# generate


def cmd_generate(args) -> int:
    kind = args.generator
    if kind == "3xor":
        inst = csp.random_3xor(args.n, Fraction(args.d), seed=args.seed)
        _write_text(args.output, _dump(csp.to_json_dict(inst)))
    elif kind == "fully-dense":
        plant = None
        if args.satisfiable:
            rng_plant = args.seed * 7919 + 1
            plant_rng = SplitMix64(rng_plant)
            plant = tuple(plant_rng.below(args.q) for _ in range(args.n))
        inst = csp.random_fully_dense(
            args.n, args.q, args.k, seed=args.seed,
            payoff_density=args.payoff_density, plant_assignment=plant,
        )
        _write_text(args.output, _dump(csp.to_json_dict(inst)))
    elif kind == "clause-variable":
        inst = csp.from_json_dict(_read_json(args.input))
        _write_text(args.output, _dump(games.to_json_dict(games.clause_variable_game(inst))))
    elif kind == "parallel":
        g = games.from_json_dict(_read_json(args.input))
        rep = games.parallel_repetition(g, args.r, cap=env_cap(games.DEFAULT_QUESTION_CAP))
        _write_text(args.output, _dump(games.to_json_dict(rep)))
    elif kind == "birthday-game":
        g = games.from_json_dict(_read_json(args.input))
        rep = games.birthday_repetition(
            g, args.k, args.l, cap=env_cap(games.DEFAULT_QUESTION_CAP)
        )
        _write_text(args.output, _dump(games.to_json_dict(rep)))
    elif kind == "birthday-csp":
        g = games.from_json_dict(_read_json(args.input))
        inst = games.birthday_kcsp(
            g, args.l, args.arity, cap_vars=env_cap(games.DEFAULT_QUESTION_CAP)
        )
        _write_text(args.output, _dump(csp.to_json_dict(inst)))
    elif kind == "hypergraph":
        from math import comb

        if args.edges > comb(args.n, args.d):
            raise InputError(
                f"cannot place {args.edges} distinct {args.d}-sets on {args.n} vertices"
            )
        rng = SplitMix64(args.seed)
        chosen: set[tuple[int, ...]] = set()
        while len(chosen) < args.edges:
            chosen.add(tuple(sorted(rng.sample_without_replacement(args.n, args.d))))
        h = dksh.make_hypergraph(args.n, args.d, sorted(chosen))
        _write_text(args.output, _dump(dksh.to_json_dict(h)))
    else:
        raise InputError(f"unknown generator {kind!r}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# solve


def cmd_solve(args) -> int:
    inst = csp.from_json_dict(_read_json(args.input))
    bad = csp.validate(inst)
    if bad:
        raise InputError("invalid instance: " + "; ".join(bad))
    trace = rounding.approximate(
        inst,
        args.i,
        tol=args.tolerance,
        exact=args.exact,
        cap_lp_vars=env_cap(args.cap_lp_vars),
    )
    report = rounding.trace_to_json_dict(trace)
    report["parameters"] = {
        "input": args.input,
        "i": args.i,
        "tolerance": args.tolerance,
        "exact": args.exact,
    }
    lines = [
        f"instance: n={inst.n} q={inst.q} k={inst.k} "
        f"constraints={inst.num_constraints} density={trace.delta_density}",
        f"relaxation: level {trace.level_solved} (requested {trace.level_requested}), "
        f"floor lambda = {float(trace.lambda_):.9f}",
        f"rounding: best of {trace.conditionings_tried} conditionings, "
        f"set {list(trace.conditioning_set)} -> {list(trace.conditioning_assignment)}",
        f"achieved value: {trace.achieved} = {float(trace.achieved):.9f}",
    ]
    if args.oracle:
        best = oracle.exact_csp_opt(inst, cap=env_cap(oracle.DEFAULT_SEARCH_CAP))
        delta = 1 - best.value
        floor = rounding.guaranteed_bound(inst, args.i, float(delta))
        report["oracle"] = {
            "optimum": str(best.value),
            "optimum_float": float(best.value),
            "witness": list(best.witness),
            "guarantee_floor": floor,
            "gap": float(best.value - trace.achieved),
        }
        lines.append(
            f"oracle: optimum {best.value} = {float(best.value):.9f}, "
            f"guarantee floor {floor:.9f}, gap {float(best.value - trace.achieved):.9f}"
        )
    if args.output:
        _write_text(args.output, _dump(report))
        lines.append(f"trace written to {args.output}")
    print("\n".join(lines))
    return EXIT_OK


def cmd_relax(args) -> int:
    inst = csp.from_json_dict(_read_json(args.input))
    if args.sac:
        res = hierarchy.solve_sac(inst, args.level, tol=args.tolerance, exact=args.exact)
        value, mu = res.lambda_, res.solution
        print(
            f"conditioned relaxation level {res.level}: lambda = {value} "
            f"(plain optimum {res.sa_optimum})"
        )
    else:
        value, mu = hierarchy.solve_sa(inst, args.level, exact=args.exact, tol=args.tolerance)
        print(f"relaxation level {args.level}: optimum = {value}")
    if args.output:
        _write_text(args.output, _dump(hierarchy.solution_to_json_dict(mu)))
        print(f"solution written to {args.output}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# experiment


def _format_cell(x) -> object:
    if isinstance(x, float):
        return repr(x)
    return x


def cmd_experiment(args) -> int:
    kwargs = {}
    if args.trials is not None:
        kwargs["trials"] = args.trials
    header, rows = run_experiment(args.name, seed=args.seed, jobs=args.jobs, **kwargs)
    echo = f"experiment={args.name} seed={args.seed} jobs={args.jobs}" + (
        f" trials={args.trials}" if args.trials is not None else ""
    )
    if args.format == "json":
        payload = {
            "schema_version": 1,
            "experiment": args.name,
            "seed": args.seed,
            "jobs": args.jobs,
            "trials": args.trials,
            "columns": header,
            "rows": rows,
        }
        text = _dump(payload)
    else:
        buf = io.StringIO()
        buf.write(f"# densecsp schema=1 {echo}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(x) for x in row])
        text = buf.getvalue()
    _write_text(args.output, text)
    if args.output and not args.no_figure:
        stem, _ = os.path.splitext(args.output)
        figure_path = stem + ".png"
        render_figure(args.name, header, rows, figure_path)
        print(f"wrote {args.output} and {figure_path}")
    elif args.output:
        print(f"wrote {args.output}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# metrics


def cmd_metrics(args) -> int:
    data = _read_json(args.input)
    if "tensor" in data:
        joint = info.JointDistribution.from_tensor(data["tensor"])
        result = {
            "schema_version": 1,
            "axes": list(joint.tensor.shape),
            "entropy": info.entropy(joint),
            "marginal_entropies": [
                info.entropy(joint.marginal((i,))) for i in range(joint.num_axes)
            ],
            "total_correlation": info.total_correlation(joint),
        }
        if joint.num_axes >= 2:
            result["mutual_information"] = info.mutual_information(joint)
    elif "probs" in data:
        dist = info.FiniteDistribution.from_probs(data["probs"])
        result = {
            "schema_version": 1,
            "outcomes": int(dist.probs.size),
            "entropy": info.entropy(dist),
            "support_size": int(len(dist.support)),
        }
        if "reference" in data:
            ref = info.FiniteDistribution.from_probs(data["reference"])
            result["kl_divergence"] = info.kl_divergence(dist, ref)
    else:
        raise InputError('metrics input needs a "tensor" or "probs" field')
    _write_text(args.output, _dump(result))
    return EXIT_OK


# ---------------------------------------------------------------------------
# oracle / dksh


def cmd_oracle(args) -> int:
    data = _read_json(args.input)
    kind = _detect(data)
    cap = env_cap(oracle.DEFAULT_SEARCH_CAP)
    if kind == "instance":
        res = oracle.exact_csp_opt(csp.from_json_dict(data), cap=cap)
        witness = list(res.witness)
    elif kind == "game":
        res = oracle.exact_game_value(games.from_json_dict(data), cap=cap)
        witness = {
            "x_answers": list(res.witness.x_answers),
            "y_answers": list(res.witness.y_answers),
        }
    else:
        if args.k is None:
            raise InputError("oracle on a hypergraph needs --k")
        res = oracle.exact_densest(dksh.from_json_dict(data), args.k, cap=cap)
        witness = list(res.witness)
    report = {
        "schema_version": 1,
        "kind": kind,
        "value": str(res.value),
        "value_float": float(res.value),
        "witness": witness,
        "search_space": res.search_space,
    }
    _write_text(args.output, _dump(report))
    return EXIT_OK


def cmd_dksh(args) -> int:
    h = dksh.from_json_dict(_read_json(args.input))
    res = dksh.densest_k_subhypergraph(
        h,
        args.k,
        args.i,
        seed=args.seed,
        brute_force_threshold=args.brute_force_threshold,
        cap=env_cap(oracle.DEFAULT_SEARCH_CAP),
    )
    report = dksh.result_to_json_dict(res)
    report["parameters"] = {"k": args.k, "i": args.i, "seed": args.seed}
    _write_text(args.output, _dump(report))
    print(
        f"{res.mode}: vertices {list(res.vertices)} density {res.density} "
        f"= {float(res.density):.6f}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="densecsp",
        description="Dense Max k-CSP approximation, game transforms, and oracles",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write an instance/game/hypergraph JSON file")
    gsub = gen.add_subparsers(dest="generator", required=True)

    g3 = gsub.add_parser("3xor", help="random 3-XOR instance with d*n constraints")
    g3.add_argument("--n", type=int, required=True)
    g3.add_argument("--d", type=str, required=True, help="constraint density, rational")
    g3.add_argument("--seed", type=int, default=0)
    g3.add_argument("--output", type=str, default=None)
    g3.set_defaults(func=cmd_generate)

    gf = gsub.add_parser("fully-dense", help="random fully-dense instance")
    gf.add_argument("--n", type=int, required=True)
    gf.add_argument("--q", type=int, required=True)
    gf.add_argument("--k", type=int, required=True)
    gf.add_argument("--seed", type=int, default=0)
    gf.add_argument("--payoff-density", type=float, default=0.5)
    gf.add_argument("--satisfiable", action="store_true")
    gf.add_argument("--output", type=str, default=None)
    gf.set_defaults(func=cmd_generate)

    gc = gsub.add_parser("clause-variable", help="clause/variable game of an instance")
    gc.add_argument("--input", type=str, required=True)
    gc.add_argument("--output", type=str, default=None)
    gc.set_defaults(func=cmd_generate)

    gp = gsub.add_parser("parallel", help="parallel repetition of a game")
    gp.add_argument("--input", type=str, required=True)
    gp.add_argument("--r", type=int, required=True)
    gp.add_argument("--output", type=str, default=None)
    gp.set_defaults(func=cmd_generate)

    gb = gsub.add_parser("birthday-game", help="birthday repetition of a game")
    gb.add_argument("--input", type=str, required=True)
    gb.add_argument("--k", type=int, required=True)
    gb.add_argument("--l", type=int, required=True)
    gb.add_argument("--output", type=str, default=None)
    gb.set_defaults(func=cmd_generate)

    gk = gsub.add_parser("birthday-csp", help="fully-dense CSP from a game")
    gk.add_argument("--input", type=str, required=True)
    gk.add_argument("--l", type=int, required=True)
    gk.add_argument("--arity", type=int, required=True, help="constraint arity k")
    gk.add_argument("--output", type=str, default=None)
    gk.set_defaults(func=cmd_generate)

    gh = gsub.add_parser("hypergraph", help="random d-uniform hypergraph")
    gh.add_argument("--n", type=int, required=True)
    gh.add_argument("--d", type=int, required=True)
    gh.add_argument("--edges", type=int, required=True)
    gh.add_argument("--seed", type=int, default=0)
    gh.add_argument("--output", type=str, default=None)
    gh.set_defaults(func=cmd_generate)

    sol = sub.add_parser("solve", help="run the approximation pipeline on an instance")
    sol.add_argument("--input", type=str, required=True)
    sol.add_argument("--i", type=int, required=True, help="approximation parameter")
    sol.add_argument("--tolerance", type=float, default=1e-9)
    sol.add_argument("--exact", action="store_true", help="exact rational relaxations")
    sol.add_argument("--cap-lp-vars", type=int, default=rounding.DEFAULT_LP_VAR_CAP)
    sol.add_argument("--oracle", action="store_true", help="also brute-force the optimum")
    sol.add_argument("--output", type=str, default=None, help="trace JSON path")
    sol.set_defaults(func=cmd_solve)

    rel = sub.add_parser("relax", help="solve a relaxation and export the solution")
    rel.add_argument("--input", type=str, required=True)
    rel.add_argument("--level", type=int, required=True)
    rel.add_argument("--sac", action="store_true", help="conditioned variant")
    rel.add_argument("--exact", action="store_true")
    rel.add_argument("--tolerance", type=float, default=1e-9)
    rel.add_argument("--output", type=str, default=None)
    rel.set_defaults(func=cmd_relax)

    exp = sub.add_parser(
        "experiment",
        help="run a named experiment, write CSV + figure",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=(
            "CSV columns (stable across versions; first line is a '#' echo "
            "of the parameters):\n"
            "  birthday-decay   k, l, value, value_float, base_value\n"
            "  edge-tail        config, x_count, y_count, edges, d_max, k, l,\n"
            "                   gamma, expected_edges, empirical_tail, bound,\n"
            "                   bound_below_one\n"
            "  funcbound-sweep  trial, domain, kappa, delta, expected_y, floor, slack\n"
            "  corr-sum         fixture, solution, n, q, k, l, delta, corr_sum,\n"
            "                   bound, slack\n"
            "  dksh-bench       graph, n, d, k, mode, density, oracle_density,\n"
            "                   matches_oracle, seconds"
        ),
    )
    exp.add_argument("name", choices=EXPERIMENT_NAMES)
    exp.add_argument("--seed", type=int, default=0)
    exp.add_argument("--trials", type=int, default=None)
    exp.add_argument("--jobs", type=int, default=1)
    exp.add_argument("--format", choices=("csv", "json"), default="csv")
    exp.add_argument("--output", type=str, default=None)
    exp.add_argument("--no-figure", action="store_true")
    exp.set_defaults(func=cmd_experiment)

    met = sub.add_parser("metrics", help="information metrics of a JSON tensor")
    met.add_argument("--input", type=str, required=True)
    met.add_argument("--output", type=str, default=None)
    met.set_defaults(func=cmd_metrics)

    orc = sub.add_parser("oracle", help="exact brute-force value of any input")
    orc.add_argument("--input", type=str, required=True)
    orc.add_argument("--k", type=int, default=None, help="subset size for hypergraphs")
    orc.add_argument("--output", type=str, default=None)
    orc.set_defaults(func=cmd_oracle)

    dk = sub.add_parser("dksh", help="densest k-subhypergraph pipeline")
    dk.add_argument("--input", type=str, required=True)
    dk.add_argument("--k", type=int, required=True)
    dk.add_argument("--i", type=int, default=1)
    dk.add_argument("--seed", type=int, default=0)
    dk.add_argument("--brute-force-threshold", type=int, default=None)
    dk.add_argument("--output", type=str, default=None)
    dk.set_defaults(func=cmd_dksh)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapExceeded as exc:
        print(f"size guard exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InternalInvariantError as exc:
        print(f"internal invariant failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except DenseCspError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
