"""Command-line orchestration: sample, corrupt, learn, correct, evaluate, and
benchmark sweeps emitting one JSON line per cell.

Exit codes: 0 success, 2 usage error, 3 input parse error, 4 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .data import read_csv, write_csv
from .errors import (
    NodeNotFound,
    NotADag,
    ParseError,
    SchemaMismatch,
    SedkitError,
    UnknownState,
)
from .evaluation import clique_count, compare_cpdags
from .graph import dag_to_cpdag, find_3_cliques, load_graph, save_graph
from .learn import HcConfig, hill_climb, import_graph
from .model import (
    BayesNet,
    NoiseChannel,
    corrupt,
    draw_noise_channel,
    forward_sample,
    load_network,
    random_bn,
)
from .sed import SedConfig, run_sed
from .seeding import stable_seed

_INPUT_ERRORS = (
    ParseError,
    UnknownState,
    SchemaMismatch,
    NodeNotFound,
    NotADag,
    FileNotFoundError,
    json.JSONDecodeError,
)


def _add_sed_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epsilon", type=float, default=1e-3, help="EM convergence threshold")
    p.add_argument("--max-iter", type=int, default=200, help="EM iteration cap")
    p.add_argument("--restarts", type=int, default=3, help="EM restarts per reconstruction")
    p.add_argument("--base", choices=["gmod", "literal"], default="gmod",
                   help="reconstruction base graph policy")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sedkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="forward-sample a network to CSV")
    p.add_argument("--net", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("corrupt", help="apply a randomized measurement-error channel")
    p.add_argument("--net", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--alpha-max", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--channel-out", default=None, help="sidecar JSON (default: OUT.channel.json)")
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("learn", help="hill-climb a DAG from data")
    p.add_argument("--data", required=True)
    p.add_argument("--net", default=None, help="network file fixing state order")
    p.add_argument("--max-parents", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("sed", help="remove spurious edges from a learned graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--net", default=None, help="network file fixing state order")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--log", default=None, help="removal log JSON (default: OUT.log.json)")
    _add_sed_flags(p)
    p.set_defaults(func=cmd_sed)

    p = sub.add_parser("eval", help="compare a learned graph against the truth")
    p.add_argument("--graph", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--net", default=None, help="network file supplying the full node set")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("cliques", help="count 3-vertex cliques in a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_cliques)

    p = sub.add_parser("bench", help="run a benchmark sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None, help="override the config's output path")
    p.set_defaults(func=cmd_bench)

    return parser


def cmd_sample(args) -> int:
    bn = load_network(args.net)
    write_csv(forward_sample(bn, args.n, args.seed), args.out)
    return 0


def cmd_corrupt(args) -> int:
    bn = load_network(args.net)
    data = read_csv(args.data, schema=bn.schema)
    channel = draw_noise_channel(bn.schema, args.alpha_max, args.seed)
    write_csv(corrupt(data, channel, stable_seed(args.seed, "corrupt")), args.out)
    sidecar = args.channel_out or f"{args.out}.channel.json"
    Path(sidecar).write_text(json.dumps(channel.to_json(), indent=2) + "\n", encoding="utf-8")
    return 0


def cmd_learn(args) -> int:
    schema = load_network(args.net).schema if args.net else None
    data = read_csv(args.data, schema=schema)
    g = hill_climb(data, HcConfig(max_parents=args.max_parents, seed=args.seed))
    save_graph(g, args.out)
    return 0


def cmd_sed(args) -> int:
    schema = load_network(args.net).schema if args.net else None
    data = read_csv(args.data, schema=schema)
    g = import_graph(args.graph, data.schema)
    if g.is_dag:
        g = dag_to_cpdag(g)
    cfg = SedConfig(
        epsilon=args.epsilon,
        max_iter=args.max_iter,
        restarts=args.restarts,
        seed=args.seed,
        base=args.base,
    )
    modified, log = run_sed(g, data, cfg)
    save_graph(modified, args.out)
    log_path = args.log or f"{args.out}.log.json"
    Path(log_path).write_text(
        json.dumps([rec.to_json() for rec in log], indent=2) + "\n", encoding="utf-8"
    )
    return 0


def _emit(obj: dict, out: str | None) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def cmd_eval(args) -> int:
    learned = load_graph(args.graph)
    truth = load_graph(args.truth)
    if args.net:
        names = [v.name for v in load_network(args.net).schema]
        learned = learned.with_nodes([v for v in names if v not in learned.node_set])
        truth = truth.with_nodes([v for v in names if v not in truth.node_set])
    report = compare_cpdags(learned, truth)
    _emit(report.to_json(), args.out)
    return 0


def cmd_cliques(args) -> int:
    g = load_graph(args.graph)
    triples = sorted(sorted(t) for t in find_3_cliques(g))
    _emit({"count": len(triples), "triples": triples}, args.out)
    return 0


# ----------------------------------------------------------------- benchmark


@dataclass(frozen=True)
class BenchConfig:
    networks: tuple
    sample_sizes: tuple
    alpha_max: float
    seeds: tuple
    learner: dict
    sed: dict
    output: str
    seed: int = 0
    noise: str = "dirichlet"

    @classmethod
    def from_json(cls, obj: dict) -> "BenchConfig":
        try:
            return cls(
                networks=tuple(obj["networks"]),
                sample_sizes=tuple(obj["sample_sizes"]),
                alpha_max=float(obj.get("alpha_max", 0.1)),
                seeds=tuple(obj["seeds"]),
                learner=dict(obj.get("learner", {"hc": {}})),
                sed=dict(obj.get("sed", {})),
                output=str(obj["output"]),
                seed=int(obj.get("seed", 0)),
                noise=str(obj.get("noise", "dirichlet")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad bench config: {exc}") from exc

    def __post_init__(self):
        if not (self.networks and self.sample_sizes and self.seeds):
            raise ParseError("networks, sample_sizes and seeds must be nonempty")


def _network_label(spec) -> str:
    if isinstance(spec, str):
        return Path(spec).stem
    return spec.get("label", "random")


def _load_bench_network(spec) -> BayesNet:
    if isinstance(spec, str):
        return load_network(spec)
    params = dict(spec["random"])
    return random_bn(
        n_nodes=int(params["n_nodes"]),
        arity=int(params.get("arity", 2)),
        max_parents=int(params.get("max_parents", 3)),
        edge_prob=float(params.get("edge_prob", 0.15)),
        seed=int(params.get("seed", 0)),
    )


def _learn_condition(cell: dict, data, condition: str):
    learner = cell["learner"]
    if "import" in learner:
        pattern = learner["import"]
        path = pattern.format(
            network=cell["label"], n=cell["n"], replicate=cell["replicate"], condition=condition
        )
        return import_graph(path, data.schema)
    hc = learner.get("hc", {})
    return hill_climb(
        data,
        HcConfig(
            max_parents=int(hc.get("max_parents", 4)),
            max_iterations=int(hc.get("max_iterations", 1000)),
            seed=cell["cell_seed"],
        ),
    )


def bench_cell(cell: dict) -> dict:
    """Run one (network, sample size, replicate) cell; returns its JSON record."""
    bn = _load_bench_network(cell["network"])
    truth = dag_to_cpdag(bn.graph)
    cell_seed = cell["cell_seed"]
    clean = forward_sample(bn, cell["n"], stable_seed(cell_seed, "sample"))
    if cell["noise"] == "fixed":
        channel = NoiseChannel.fixed(bn.schema, cell["alpha_max"])
    else:
        channel = draw_noise_channel(bn.schema, cell["alpha_max"], stable_seed(cell_seed, "channel"))
    noisy = corrupt(clean, channel, stable_seed(cell_seed, "corrupt"))

    record = {
        "network": cell["label"],
        "n": cell["n"],
        "replicate": cell["replicate"],
        "cell_seed": cell_seed,
        "cliques_true": clique_count(truth),
    }
    sed_cfg = SedConfig(
        epsilon=float(cell["sed"].get("epsilon", 1e-3)),
        max_iter=int(cell["sed"].get("max_iter", 200)),
        restarts=int(cell["sed"].get("restarts", 3)),
        seed=cell_seed,
        base=cell["sed"].get("base", "gmod"),
    )
    for condition, data in (("error_free", clean), ("noisy", noisy)):
        learned = _learn_condition(cell, data, condition)
        if learned.is_dag:
            learned = dag_to_cpdag(learned)
        modified, log = run_sed(learned, data, sed_cfg)
        original_report = compare_cpdags(learned, truth)
        modified_report = compare_cpdags(modified, truth)
        record[condition] = {
            "original": original_report.to_json(),
            "modified": modified_report.to_json(),
            "removals": [rec.to_json() for rec in log],
        }
    return record


def _cell_key(record: dict) -> tuple:
    return (record["network"], record["n"], record["replicate"])


def cmd_bench(args) -> int:
    cfg = BenchConfig.from_json(json.loads(Path(args.config).read_text(encoding="utf-8")))
    out_path = Path(args.out or cfg.output)

    cells = []
    for spec in cfg.networks:
        label = _network_label(spec)
        for n in cfg.sample_sizes:
            for replicate, _ in enumerate(cfg.seeds):
                cells.append(
                    {
                        "network": spec,
                        "label": label,
                        "n": int(n),
                        "replicate": replicate,
                        "cell_seed": stable_seed(cfg.seed, label, n, replicate),
                        "alpha_max": cfg.alpha_max,
                        "noise": cfg.noise,
                        "learner": cfg.learner,
                        "sed": cfg.sed,
                    }
                )

    done = set()
    if out_path.exists():
        for line in out_path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                done.add(_cell_key(json.loads(line)))
    pending = [c for c in cells if (c["label"], c["n"], c["replicate"]) not in done]

    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "a", encoding="utf-8") as fh:
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                futures = [pool.submit(bench_cell, c) for c in pending]
                for fut in futures:  # submission order keeps output deterministic
                    fh.write(json.dumps(fut.result()) + "\n")
                    fh.flush()
        else:
            for c in pending:
                fh.write(json.dumps(bench_cell(c)) + "\n")
                fh.flush()
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (SedkitError, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 4


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
