"""``epcluster`` command line: cluster, verify, sample, convert.

Exit codes: 0 success, 1 a verification check failed, 2 unreadable or
invalid input, 3 inconsistent configuration, 4 an enumeration cap was hit.
"""

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ._format import fmt_float, json_float
from .bow import Corpus, FibreIndex, build_vocab, word_ray_system
from .digraph import PATH_CAP, graph_ray_system, read_edgelist_csv, read_transfers_csv, transfer_graph
from .epspace import EpSpace, Surjection, check_axioms, quotient, read_matrix_csv, write_matrix_csv
from .exceptions import (
    AxiomViolation,
    ConfigError,
    EmptyInputError,
    EnumerationLimitError,
    EpClusterError,
    ShapeError,
)
from .filtration import (
    SIMPLEX_CAP,
    MergeEvent,
    MergeTree,
    compare_pi0,
    merge_tree,
    n_components,
    neighborhood_complex,
    neighborhood_graph,
    pi0,
    ray_complex,
    rips_graph,
)
from .neighborhoods import complete_k_bounded_system, k_complete_system
from .patch import WeightedRaySystem, global_metric, ray_graph, umap_complex_pi0, verify_excision
from .regimes import (
    CheckResult,
    check_bounded_large_scale,
    check_bounded_small_scale,
    check_chains,
    check_complete_regimes,
    check_containment,
    k_bounded_neighborhood_graph,
    k_bounded_ray_graph,
)
from .sampling import (
    DEFAULT_ROUNDS,
    DEFAULT_SAMPLE_COUNT,
    SyntheticUniverse,
    cluster_sampled,
    run_report,
)

INPUT_KINDS = ("points-csv", "distance-csv", "edgelist", "transfers", "corpus", "synthetic")
STRATEGIES = ("k-complete", "k-bounded", "complete-k-bounded", "graph-k", "bow-r")
METRIC_KINDS = ("points-csv", "distance-csv", "synthetic")
COMPATIBLE = {
    "k-complete": METRIC_KINDS,
    "k-bounded": METRIC_KINDS,
    "complete-k-bounded": METRIC_KINDS,
    "graph-k": ("edgelist", "transfers"),
    "bow-r": ("corpus",),
}
DEFAULT_STRATEGY = {
    "points-csv": "k-complete",
    "distance-csv": "k-complete",
    "synthetic": "k-complete",
    "edgelist": "graph-k",
    "transfers": "graph-k",
    "corpus": "bow-r",
}
# Pairwise chain checks are quadratic in points times scales.
_CHAIN_CHECK_LIMIT = 64

# Option name -> (type, default). Everything a config file may set.
OPTIONS = {
    "input_kind": (str, None),
    "strategy": (str, None),
    "k": (int, 5),
    "S": (float, None),
    "r": (int, 2),
    "scales": (list, None),
    "dim_cap": (int, 2),
    "transform": (str, None),
    "seed": (int, 0),
    "complex": (str, "ray"),
    "undirected": (bool, False),
    "path_weight": (str, "min"),
    "stop_threshold": (float, 1.0),
    "rare_threshold": (int, 1),
    "base": (int, 0),
    "samples": (int, DEFAULT_SAMPLE_COUNT),
    "rounds": (int, DEFAULT_ROUNDS),
    "max_sample": (int, None),
    "refine": (str, "accumulate"),
    "cluster": (bool, False),
}


@dataclass
class RunConfig:
    """Resolved options for one command."""

    command: str
    input: str
    out: str = None
    to: str = None
    options: dict = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.__dict__["options"][name]
        except KeyError:
            raise AttributeError(name) from None


def _dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _parse_scales(value):
    if value is None:
        return None
    if isinstance(value, str):
        try:
            value = [float(v) for v in value.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"scales must be comma-separated numbers, got {value!r}") from None
    scales = [float(v) for v in value]
    if any(b < a for a, b in zip(scales, scales[1:])):
        raise ConfigError("scales must be sorted ascending")
    return scales


def _load_config(path):
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file is not valid TOML: {exc}") from None
    data = {key.replace("-", "_"): v for key, v in data.items()}
    unknown = sorted(set(data) - set(OPTIONS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return data


def resolve(args):
    """Merge defaults, config file and flags (flags win) into a :class:`RunConfig`."""
    file_opts = _load_config(args.config) if args.config else {}
    opts = {}
    for name, (kind, default) in OPTIONS.items():
        value = getattr(args, name, None)
        if value is None:
            value = file_opts.get(name, default)
        if value is not None and kind in (int, float) and not isinstance(value, bool):
            try:
                value = kind(value)
            except (TypeError, ValueError):
                raise ConfigError(f"option {name} must be {kind.__name__}") from None
        opts[name] = value
    opts["scales"] = _parse_scales(opts["scales"])
    kind = opts["input_kind"]
    if kind is None:
        raise ConfigError("--input-kind is required")
    if kind not in INPUT_KINDS:
        raise ConfigError(f"unknown input kind {kind!r}")
    if opts["strategy"] is None:
        opts["strategy"] = DEFAULT_STRATEGY[kind]
    strategy = opts["strategy"]
    if strategy not in STRATEGIES:
        raise ConfigError(f"unknown strategy {strategy!r}")
    if args.command in ("cluster", "verify") and kind not in COMPATIBLE[strategy]:
        raise ConfigError(f"strategy {strategy} does not apply to {kind} input")
    if strategy in ("k-bounded", "complete-k-bounded") and opts["S"] is None:
        raise ConfigError(f"strategy {strategy} needs -S")
    if opts["k"] < 1:
        raise ConfigError("-k must be a positive integer")
    if opts["complex"] not in ("ray", "neighborhood", "rips"):
        raise ConfigError(f"unknown complex {opts['complex']!r}")
    if opts["transform"] not in (None, "identity", "exp", "inverse"):
        raise ConfigError(f"unknown transform {opts['transform']!r}")
    return RunConfig(args.command, args.input, getattr(args, "out", None), getattr(args, "to", None), opts)


def _open_text(path):
    if path == "-":
        return sys.stdin
    return open(path, encoding="utf-8", newline="")


def _read_points(source):
    with _open_text(source) as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if rows:
        try:
            float(rows[0][0])
        except ValueError:
            rows = rows[1:]
    if not rows:
        raise EmptyInputError("points CSV has no rows")
    try:
        pts = np.array([[float(c) for c in r] for r in rows], dtype=np.float64)
    except ValueError as exc:
        raise ShapeError(f"points CSV: {exc}") from None
    return pts


def _euclidean(points):
    diff = points[:, None, :] - points[None, :, :]
    d = np.sqrt((diff**2).sum(axis=2))
    return EpSpace.trusted(d)


def _universe(path, cfg):
    try:
        with _open_text(path) as fh:
            spec = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"universe spec is not JSON: {exc}") from None
    if cfg.max_sample is not None:
        spec = dict(spec, max_sample=cfg.max_sample)
    return SyntheticUniverse.from_spec(spec)


@dataclass
class Loaded:
    """What an input turned into: an ambient space or a bare weighted ray system."""

    names: list
    space: EpSpace = None
    rays: WeightedRaySystem = None


def load_input(cfg):
    kind = cfg.input_kind
    if kind == "distance-csv":
        with _open_text(cfg.input) as fh:
            space = read_matrix_csv(fh)
        return Loaded([str(i) for i in range(space.n)], space=space)
    if kind == "points-csv":
        space = _euclidean(_read_points(cfg.input))
        return Loaded([str(i) for i in range(space.n)], space=space)
    if kind == "synthetic":
        universe = _universe(cfg.input, cfg)
        return Loaded([str(i) for i in range(universe.size)], space=_euclidean(universe.points))
    if kind in ("edgelist", "transfers"):
        with _open_text(cfg.input) as fh:
            if kind == "edgelist":
                graph = read_edgelist_csv(fh)
                names = [str(v) for v in graph.labels]
            else:
                graph = transfer_graph(read_transfers_csv(fh))
                names = [f"{a}@{t}" for a, t in graph.labels]
        if cfg.path_weight not in ("min", "sum"):
            raise ConfigError(f"unknown path weight {cfg.path_weight!r}")
        rays = graph_ray_system(graph, cfg.k, directed=not cfg.undirected, path_weight=cfg.path_weight, cap=PATH_CAP)
        return Loaded(names, rays=rays)
    if kind == "corpus":
        if cfg.input != "-" and os.path.isdir(cfg.input):
            corpus = Corpus.from_directory(cfg.input)
        else:
            with _open_text(cfg.input) as fh:
                corpus = Corpus.from_jsonl(fh)
        vocab = build_vocab(corpus, cfg.stop_threshold, cfg.rare_threshold)
        index = FibreIndex.build(corpus, vocab)
        return Loaded(list(index.words), rays=word_ray_system(index, cfg.r, cfg.transform))
    raise ConfigError(f"unknown input kind {kind!r}")


def _metric_system(cfg, space):
    if cfg.strategy == "k-complete":
        return k_complete_system(space, min(cfg.k, space.n))
    if cfg.strategy == "complete-k-bounded":
        return complete_k_bounded_system(space, cfg.k, cfg.S)
    return None


def _graphs(cfg, loaded):
    """``{"ray", "neighborhood", "rips"}`` filtered graphs, plus the system if explicit."""
    if loaded.space is not None:
        space = loaded.space
        system = _metric_system(cfg, space)
        if system is None:
            graphs = {
                "ray": k_bounded_ray_graph(space, cfg.S),
                "neighborhood": k_bounded_neighborhood_graph(space, cfg.k, cfg.S),
            }
        else:
            graphs = {"ray": ray_complex(system), "neighborhood": neighborhood_graph(system)}
        graphs["rips"] = rips_graph(space)
        return graphs, system
    metric = global_metric(loaded.rays)
    return {"ray": ray_graph(loaded.rays), "rips": rips_graph(metric)}, None


def _default_scales(tree):
    return sorted({0.0} | set(tree.thresholds))


def _regimes(cfg, system, t):
    flags = []
    if cfg.strategy == "k-bounded":
        if t <= cfg.S:
            flags.append("bounded_small_scale")
        if t >= cfg.S:
            flags.append("bounded_large_scale")
    elif system is not None:
        radii = [nb.radius for nb in system]
        lo = min(cfg.S, min(radii)) if cfg.strategy == "complete-k-bounded" else min(radii)
        if t <= lo:
            flags.append("complete_small_scale")
        if t >= max(radii):
            flags.append("complete_large_scale")
    else:
        flags.append("excision")
    return flags


def _pi0_map(a, b, t):
    cmp = compare_pi0(a, b, t)
    return {"surjective": cmp.surjective, "bijective": cmp.bijective}


def cmd_cluster(cfg):
    if not cfg.out:
        raise ConfigError("cluster needs --out DIR")
    loaded = load_input(cfg)
    graphs, system = _graphs(cfg, loaded)
    if loaded.rays is not None and cfg.complex == "neighborhood":
        raise ConfigError("ray-system inputs have no neighborhood complex; use ray or rips")
    chosen = graphs[cfg.complex]
    tree = merge_tree(chosen)
    scales = cfg.scales if cfg.scales is not None else _default_scales(tree)

    rows = []
    comparison = []
    for t in scales:
        labels = pi0(chosen, t)
        rows.extend((fmt_float(t), loaded.names[i], loaded.names[labels[i]]) for i in range(len(labels)))
        entry = {"scale": json_float(t), "components": {}, "regimes": _regimes(cfg, system, t)}
        for name, g in graphs.items():
            entry["components"][name] = n_components(pi0(g, t))
        if "neighborhood" in graphs:
            entry["ray_to_neighborhood"] = _pi0_map(graphs["ray"], graphs["neighborhood"], t)
            entry["neighborhood_to_rips"] = _pi0_map(graphs["neighborhood"], graphs["rips"], t)
        else:
            entry["components"]["glued"] = n_components(umap_complex_pi0(loaded.rays, t))
            entry["ray_to_rips"] = _pi0_map(graphs["ray"], graphs["rips"], t)
        comparison.append(entry)

    report = {
        "input_kind": cfg.input_kind,
        "n": len(loaded.names),
        "strategy": cfg.strategy,
        "complex": cfg.complex,
        "parameters": _parameters(cfg),
        "scales": [json_float(t) for t in scales],
        "comparison": comparison,
    }
    if system is not None:
        cx = neighborhood_complex(system, dim_cap=cfg.dim_cap, cap=SIMPLEX_CAP)
        report["neighborhood_simplices"] = {str(d): cx.count(d) for d in range(cfg.dim_cap + 1)}

    os.makedirs(cfg.out, exist_ok=True)
    with open(os.path.join(cfg.out, "clusters.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["scale", "point", "cluster"])
        writer.writerows(rows)
    _write(os.path.join(cfg.out, "merge_tree.json"), tree.dumps())
    _write(os.path.join(cfg.out, "merge_tree.dot"), tree.to_dot())
    _write(os.path.join(cfg.out, "report.json"), _dumps(report))
    for i, t in enumerate(scales):
        _write(os.path.join(cfg.out, f"graph_{i}.dot"), chosen.to_dot(t, name=f"scale_{i}"))
    return 0


def _parameters(cfg):
    keys = {
        "k-complete": ("k",),
        "k-bounded": ("k", "S"),
        "complete-k-bounded": ("k", "S"),
        "graph-k": ("k", "path_weight", "undirected"),
        "bow-r": ("r", "transform", "stop_threshold", "rare_threshold"),
    }[cfg.strategy]
    return {k: (json_float(v) if isinstance(v, float) else v) for k, v in ((k, getattr(cfg, k)) for k in keys)}


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _emit(cfg, text):
    if cfg.out:
        _write(cfg.out, text)
    else:
        sys.stdout.write(text)


def _violation_report(exc):
    v = exc.violation
    return {
        "passed": False,
        "checks": [{"name": "axioms", "passed": False, "detail": str(v), "indices": list(v.indices)}],
    }


def cmd_verify(cfg):
    try:
        loaded = load_input(cfg)
    except AxiomViolation as exc:
        _emit(cfg, _dumps(_violation_report(exc)))
        return 2
    checks = []
    if loaded.space is not None:
        space = loaded.space
        checks.extend(_space_checks(space))
        system = _metric_system(cfg, space)
        scales = cfg.scales or _default_scales(merge_tree(rips_graph(space)))
        if cfg.strategy == "k-bounded":
            checks += check_bounded_small_scale(space, cfg.k, cfg.S, scales)
            checks += check_bounded_large_scale(space, cfg.k, cfg.S, scales)
        else:
            checks += check_containment(system, scales)
            radii = [nb.radius for nb in system]
            if cfg.strategy == "k-complete":
                checks += check_complete_regimes(space, radii, scales, S=max(radii))
            if space.n <= _CHAIN_CHECK_LIMIT:
                checks += check_chains(system, scales)
            rays = list(system.rays())
            if all(w > 0 for _, _, w in rays):
                checks += verify_excision(WeightedRaySystem(space.n, tuple(rays)), scales).checks
    else:
        checks += verify_excision(loaded.rays, cfg.scales).checks
    report = {
        "input_kind": cfg.input_kind,
        "n": len(loaded.names),
        "strategy": cfg.strategy,
        "parameters": _parameters(cfg),
        "passed": all(c.passed for c in checks),
        "checks": [c.to_json() for c in checks],
    }
    _emit(cfg, _dumps(report))
    return 0 if report["passed"] else 1


def _space_checks(space):
    ok_axioms = check_axioms(space.dist) is None
    ok_quotient = quotient(space, Surjection.identity(space.n)).allclose(space)
    return [
        CheckResult("axioms", float("inf"), ok_axioms),
        CheckResult("identity_quotient", float("inf"), ok_quotient),
    ]


def cmd_sample(cfg):
    if cfg.input_kind != "synthetic":
        raise ConfigError("sample runs on synthetic universes only")
    universe = _universe(cfg.input, cfg)
    report = run_report(universe, cfg.base, cfg.k, cfg.samples, cfg.rounds, cfg.refine, cfg.seed)
    report["universe"] = {"size": universe.size, "dim": int(universe.points.shape[1])}
    if cfg.cluster:
        rng = np.random.default_rng(cfg.seed)
        samples = [universe.sample(rng, cfg.base) for _ in range(cfg.samples)]
        result = cluster_sampled(universe, samples, cfg.k, cfg.scales)
        report["clusters"] = {
            "points": int(result.space.n),
            "merges": len(result.merge_tree.events),
            "final_components": n_components(result.merge_tree.labels_at(float("inf"))),
            "excision_passed": None if result.excision is None else result.excision.passed,
        }
    _emit(cfg, _dumps(report))
    return 0


CONVERSIONS = {
    "points-csv": ("distance-csv", "space-json"),
    "distance-csv": ("distance-csv", "space-json"),
    "space-json": ("distance-csv",),
    "edgelist": ("rays-json",),
    "transfers": ("rays-json",),
    "corpus": ("rays-json", "fibres-json"),
    "merge-tree-json": ("dot",),
}


def cmd_convert(cfg):
    kind = cfg.input_kind
    if cfg.to not in CONVERSIONS.get(kind, ()):
        raise ConfigError(f"cannot convert {kind} to {cfg.to}")
    if kind in ("points-csv", "distance-csv"):
        space = load_input(cfg).space
    elif kind == "space-json":
        with _open_text(cfg.input) as fh:
            space = EpSpace.from_json(json.load(fh))
    if cfg.to == "distance-csv":
        buf = io.StringIO()
        write_matrix_csv(space, buf)
        text = buf.getvalue()
    elif cfg.to == "space-json":
        text = _dumps(space.to_json())
    elif cfg.to == "rays-json":
        text = load_input(cfg).rays.dumps()
    elif cfg.to == "fibres-json":
        if cfg.input != "-" and os.path.isdir(cfg.input):
            corpus = Corpus.from_directory(cfg.input)
        else:
            with _open_text(cfg.input) as fh:
                corpus = Corpus.from_jsonl(fh)
        index = FibreIndex.build(corpus, build_vocab(corpus, cfg.stop_threshold, cfg.rare_threshold))
        text = _dumps(index.to_json())
    else:
        with _open_text(cfg.input) as fh:
            text = _tree_from_json(json.load(fh)).to_dot()
    _emit(cfg, text)
    return 0


def _tree_from_json(obj):
    try:
        events = tuple(MergeEvent(float(m["threshold"]), tuple(m["components"])) for m in obj["merges"])
        return MergeTree(int(obj["n"]), tuple(float(t) for t in obj["thresholds"]), (), events)
    except (KeyError, TypeError, ValueError) as exc:
        raise ShapeError(f"not a merge tree document: {exc}") from None


def build_parser():
    parser = argparse.ArgumentParser(prog="epcluster", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("input", help="input path, or - for stdin")
        p.add_argument("--input-kind", dest="input_kind")
        p.add_argument("--config", help="TOML file with default options; flags win")
        p.add_argument("--out")
        p.add_argument("-k", type=int, dest="k")
        p.add_argument("--seed", type=int)
        p.add_argument("--scales", help="comma-separated ascending scales")

    def neighbourhood_opts(p):
        p.add_argument("--strategy", choices=STRATEGIES)
        p.add_argument("-S", type=float, dest="S")
        p.add_argument("-r", type=int, dest="r")
        p.add_argument("--dim-cap", type=int, dest="dim_cap")
        p.add_argument("--transform", choices=("identity", "exp", "inverse"))
        p.add_argument("--complex", choices=("ray", "neighborhood", "rips"))
        p.add_argument("--undirected", action="store_const", const=True)
        p.add_argument("--path-weight", dest="path_weight", choices=("min", "sum"))
        p.add_argument("--stop-threshold", type=float, dest="stop_threshold")
        p.add_argument("--rare-threshold", type=int, dest="rare_threshold")

    p = sub.add_parser("cluster", help="multi-scale clusters, merge tree and comparison report")
    common(p)
    neighbourhood_opts(p)
    p = sub.add_parser("verify", help="run the equivalence checks on an input")
    common(p)
    neighbourhood_opts(p)
    p = sub.add_parser("sample", help="sampled neighbourhood discovery on a synthetic universe")
    common(p)
    p.add_argument("--base", type=int)
    p.add_argument("--samples", type=int, help="samples per round")
    p.add_argument("--rounds", type=int)
    p.add_argument("--max-sample", type=int, dest="max_sample")
    p.add_argument("--refine", choices=("accumulate", "expand"))
    p.add_argument("--cluster", action="store_const", const=True)
    p = sub.add_parser("convert", help="translate between the documented file formats")
    common(p)
    neighbourhood_opts(p)
    p.add_argument("--to", required=True)
    return parser


COMMANDS = {"cluster": cmd_cluster, "verify": cmd_verify, "sample": cmd_sample, "convert": cmd_convert}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "convert" and args.input_kind in ("space-json", "merge-tree-json"):
            cfg = RunConfig("convert", args.input, args.out, args.to, {"input_kind": args.input_kind})
        else:
            cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"epcluster: configuration error: {exc}", file=sys.stderr)
        return 3
    except EnumerationLimitError as exc:
        print(f"epcluster: {exc}", file=sys.stderr)
        return 4
    except (EpClusterError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"epcluster: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
