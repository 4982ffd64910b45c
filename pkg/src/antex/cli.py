"""Command-line entry point: ``antex {train,eval,sweep,analyze}``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, evolution
from .baselines import HandCodedController, NetworkController, NullController
from .sim import (
    DETECTOR_NAMES, Blueprint, BlueprintError, ScenarioConfig, ScenarioError, SimRng, evaluate_batch, step,
)
from .tissue import DevelopmentError, GenomeFormatError, load_genome


class CliError(Exception):
    pass


def parse_area(text: str) -> tuple:
    try:
        w, h = text.lower().split("x")
        area = (int(w), int(h))
    except ValueError:
        raise argparse.ArgumentTypeError(f"area must look like WxH, got {text!r}")
    if min(area) < 1:
        raise argparse.ArgumentTypeError("area dimensions must be positive")
    return area


def parse_int_list(text: str) -> list:
    """'1-10' or '1,2,4' or a mix like '1-3,6'."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return out


def _shared(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--robots", type=int, default=None)
    p.add_argument("--area", type=parse_area, default=None, help="excavation area WxH (default 8x8)")
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--timesteps", type=int, default=None)
    p.add_argument("--scenarios", type=int, default=None)
    p.add_argument("--blueprint", type=Path, default=None, help="ASCII blueprint file")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--profile", choices=sorted(evolution.PROFILES), default="desk")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="antex", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("train", help="evolve a controller")
    _shared(tr)
    tr.add_argument("--generations", type=int, default=None)
    tr.add_argument("--population", type=int, default=None)
    tr.add_argument("--controller", choices=("ant", "fixed"), default="ant")
    tr.add_argument("--evolve-robots", action="store_true", help="evolve the team size N as well")
    tr.add_argument("--freeze-scenarios", action="store_true")
    tr.add_argument("--checkpoint-every", type=int, default=0)
    tr.add_argument("--config", type=Path, default=None, help="re-run an archived config.json")
    tr.add_argument("--quiet", action="store_true")

    for name, helptext in (("eval", "evaluate a controller"), ("sweep", "scalability sweep")):
        p = sub.add_parser(name, help=helptext)
        _shared(p)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--genome", type=Path)
        src.add_argument("--controller", choices=("handcoded", "null"))
        if name == "eval":
            p.add_argument("--snapshots", type=Path, default=None, help="write final heightfields here")
            p.add_argument("--activity", type=Path, default=None,
                           help="write the decision-neuron activity matrix of scenario 0")
        else:
            p.add_argument("--robots-range", type=parse_int_list, default=None)
            p.add_argument("--areas", default=None, help="comma list of WxH")
            p.add_argument("--depths", type=parse_int_list, default=None)

    an = sub.add_parser("analyze", help="summarize training runs")
    an.add_argument("runs", nargs="+", type=Path, help="run directories or metrics CSV files")
    an.add_argument("--out", type=Path, default=None)
    an.add_argument("--alpha", type=float, default=0.01)
    return parser


def _blueprint(args):
    if args.blueprint is None:
        return None
    try:
        return Blueprint.load(args.blueprint)
    except OSError as e:
        raise CliError(f"cannot read blueprint {args.blueprint}: {e.strerror}")


def _config_from_args(args) -> evolution.EvolutionConfig:
    if args.config is not None:
        cfg = evolution.EvolutionConfig.from_dict(json.loads(args.config.read_text()))
        return cfg
    bp = _blueprint(args)
    return evolution.profile_config(
        args.profile,
        rng_seed=args.seed,
        robots=args.robots,
        area=args.area,
        depth=args.depth,
        timesteps=args.timesteps,
        scenarios_per_eval=args.scenarios,
        generations=args.generations,
        population_size=args.population,
        controller=args.controller,
        evolvable_robot_count=args.evolve_robots or None,
        freeze_scenarios=args.freeze_scenarios or None,
        blueprint=bp.to_ascii() if bp is not None else None,
    )


def cmd_train(args) -> int:
    cfg = _config_from_args(args)
    out = args.out or Path("runs") / f"seed{cfg.rng_seed}"
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise CliError(f"cannot create output directory {out}: {e.strerror}")
    workers = args.workers if args.workers is not None else evolution.default_workers()

    def log(m):
        if not args.quiet:
            print(f"gen {m.generation:5d}  best {m.best_fitness:.4f}  mean {m.mean_fitness:.4f}  "
                  f"neurons {m.neuron_count_best}  N {m.n_best}", flush=True)

    res = evolution.evolve(cfg, workers=workers, out_dir=out, checkpoint_every=args.checkpoint_every, log=log)
    print(f"best fitness {res.best.fitness:.4f}; artifacts in {out}")
    return 0


def _scenario(args, profile_cfg) -> ScenarioConfig:
    return ScenarioConfig(
        area=args.area or profile_cfg.area,
        depth=args.depth if args.depth is not None else profile_cfg.depth,
        robots=args.robots if args.robots is not None else profile_cfg.robots,
        timesteps=args.timesteps or profile_cfg.timesteps,
        blueprint=_blueprint(args),
    )


def _controller(args):
    if args.genome is not None:
        try:
            genome = load_genome(args.genome)
        except OSError as e:
            raise CliError(f"cannot read genome {args.genome}: {e.strerror}")
        ctrl = NetworkController(genome)
        return ctrl, genome.tissue.robot_count
    return (HandCodedController() if args.controller == "handcoded" else NullController()), None


def cmd_eval(args) -> int:
    prof = evolution.profile_config(args.profile)
    ctrl, evolved_n = _controller(args)
    sc = _scenario(args, prof)
    if args.robots is None and evolved_n is not None:
        sc.robots = evolved_n
    n_scen = args.scenarios or prof.scenarios_per_eval
    seeds = list(range(args.seed, args.seed + n_scen))
    fit, det = evaluate_batch(ctrl, sc, seeds, sc.timesteps)
    for s, f in zip(seeds, fit):
        print(f"scenario {s}: fitness {f:.6f}")
    print(f"mean fitness {fit.mean():.6f} (std {fit.std():.6f}, {len(seeds)} scenarios, "
          f"{sc.robots} robots, T={sc.timesteps})")
    totals = det.sum(axis=0)
    print("detectors " + " ".join(f"{n}={int(c)}" for n, c in zip(DETECTOR_NAMES, totals)))
    if args.snapshots is not None:
        args.snapshots.mkdir(parents=True, exist_ok=True)
        for s in seeds:
            ws = sc.make(s)
            rng = SimRng(s)
            for _ in range(sc.timesteps):
                step(ws, ctrl, rng)
            (args.snapshots / f"scenario_{s}.txt").write_text(ws.snapshot())
    if args.activity is not None:
        run = analysis.instrumented_run(ctrl, sc, seeds[0], log_activity=True)
        if run.activity is None:
            raise CliError("activity logging needs a genome controller")
        analysis.write_activity(args.activity, run.activity)
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "eval.json").write_text(json.dumps({
            "seeds": seeds, "fitness": [float(f) for f in fit], "mean": float(fit.mean()),
            "robots": sc.robots, "timesteps": sc.timesteps,
            "detectors": {n: int(c) for n, c in zip(DETECTOR_NAMES, totals)},
        }, indent=2) + "\n")
    return 0


def cmd_sweep(args) -> int:
    prof = evolution.profile_config(args.profile)
    ctrl, _ = _controller(args)
    robots = args.robots_range if args.robots_range is not None else (
        [args.robots] if args.robots is not None else list(range(1, 11)))
    areas = [parse_area(a) for a in args.areas.split(",") if a.strip()] if args.areas is not None else [
        args.area or prof.area]
    depths = args.depths if args.depths is not None else [args.depth if args.depth is not None else prof.depth]
    if not robots or not areas or not depths:
        raise CliError("sweep ranges must be non-empty")
    reps = args.scenarios if args.scenarios is not None else 30
    T = args.timesteps or prof.timesteps
    res = analysis.scalability_sweep(ctrl, robots, areas, depths, reps, T, seed_base=args.seed,
                                     blueprint=_blueprint(args))
    out = args.out or Path("sweep")
    out.mkdir(parents=True, exist_ok=True)
    res.write_csv(out / "sweep.csv")
    for c in res.cells:
        print(f"robots {c.robots:2d} area {c.area[0]}x{c.area[1]} depth {c.depth}: "
              f"{c.mean_fitness:.4f} +- {c.std_fitness:.4f}")
    print(f"wrote {out / 'sweep.csv'}")
    return 0


def cmd_analyze(args) -> int:
    paths = []
    for r in args.runs:
        p = r / "metrics.csv" if r.is_dir() else r
        if not p.exists():
            raise CliError(f"no metrics file at {p}")
        paths.append(p)
    summary = {"runs": []}
    for p in paths:
        rows = analysis.read_metrics(p)
        if not rows:
            raise CliError(f"{p}: metrics file has no rows")
        best = max(float(r["best_fitness"]) for r in rows)
        ns = [int(r["n_best"]) for r in rows]
        vals, counts = np.unique(ns, return_counts=True)
        summary["runs"].append({"metrics": str(p), "generations": len(rows) - 1, "best_fitness": best,
                                "final_n_best": ns[-1], "n_mode": int(vals[np.argmax(counts)])})
        print(f"{p}: {len(rows) - 1} generations, best fitness {best:.4f}, final N {ns[-1]}")
    hist = analysis.robot_count_histogram(paths)
    summary["n_histogram"] = {int(v): int(c) for v, c in zip(hist.values, hist.counts)}
    summary["chi2"] = hist.chi2
    summary["p_value"] = hist.p_value
    summary["uniform_at_alpha"] = hist.is_uniform(args.alpha)
    print("N histogram " + " ".join(f"{v}:{c}" for v, c in zip(hist.values, hist.counts)))
    print(f"chi2 {hist.chi2:.3f} p {hist.p_value:.4f} ({'uniform' if hist.is_uniform(args.alpha) else 'non-uniform'}"
          f" at alpha={args.alpha})")
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(json.dumps(summary, indent=2) + "\n")
    return 0


COMMANDS = {"train": cmd_train, "eval": cmd_eval, "sweep": cmd_sweep, "analyze": cmd_analyze}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (CliError, BlueprintError, ScenarioError, GenomeFormatError, DevelopmentError, ValueError) as e:
        print(f"antex {args.command}: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
