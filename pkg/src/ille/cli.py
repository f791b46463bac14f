"""Command-line front end.

Every subcommand reads header-less CSV and writes CSV/JSON into an output
directory chosen by ``--out``, then the ``ILLE_OUT`` environment variable,
then the config file's ``out`` key, then ``./ille_out``.

Subcommands: ``run`` (full iterative pipeline), ``kernel``, ``similarity``,
``embed``, ``cluster``, ``ssl``, ``metrics``.
"""

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .embedding import build_graph, embed
from .evaluation import (
    cluster_scores,
    clustering_metrics,
    harmonic_label_prop,
    kmeans,
    lg_consistency,
    spectral_normalize,
    ssl_scores,
)
from .exceptions import IlleError, ParameterError
from .kernel import gaussian_kernel, linear_kernel, median_gamma, shift_nonnegative
from .pipeline import IlleConfig, input_kernel, iterative_lle
from .similarity import learn_sparse_similarity, lle_weights_knn, nonneg_lle_weights_knn, symmetrize

ENV_OUT = "ILLE_OUT"
DEFAULT_OUT = "ille_out"


@dataclass
class EvalOptions:
    c: int = None  # None: number of distinct labels
    n_init: int = 10
    clustering: bool = True
    ssl: bool = True
    label_fractions: list = field(default_factory=lambda: [0.1, 0.2])
    n_splits: int = 5
    lgc_alpha: float = 0.99


@dataclass
class RunConfig:
    """Everything a ``run`` needs. Defaults, as written by ``run --print-config``:

    ``input_kernel='gaussian'`` with ``input_gamma=None`` (median heuristic),
    ``shift_nonnegative=False`` (negative kernels are an error), the
    :class:`IlleConfig` defaults (T=4, sparse learner, alpha=beta=0.1,
    tol=1e-8, multiplicative combination) and :class:`EvalOptions`.
    """

    data: str = None
    labels: str = None
    out: str = None
    seed: int = 0
    input_kernel: str = "gaussian"
    input_gamma: float = None
    shift_nonnegative: bool = False
    save_kernels: bool = False
    ille: IlleConfig = field(default_factory=IlleConfig)
    eval: EvalOptions = field(default_factory=EvalOptions)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        ille = IlleConfig.from_dict(d.pop("ille", {}))
        ev = d.pop("eval", {})
        unknown = set(ev) - set(EvalOptions.__dataclass_fields__)
        if unknown:
            raise ParameterError(f"unknown eval keys: {sorted(unknown)}")
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ParameterError(f"unknown configuration keys: {sorted(unknown)}")
        return cls(ille=ille, eval=EvalOptions(**ev), **d)

    def to_dict(self):
        return {
            "data": self.data,
            "labels": self.labels,
            "out": self.out,
            "seed": self.seed,
            "input_kernel": self.input_kernel,
            "input_gamma": self.input_gamma,
            "shift_nonnegative": self.shift_nonnegative,
            "save_kernels": self.save_kernels,
            "ille": self.ille.to_dict(),
            "eval": dict(self.eval.__dict__),
        }


def _out_dir(args, config_out=None):
    out = args.out or os.environ.get(ENV_OUT) or config_out or DEFAULT_OUT
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_config(args):
    if args.config is None:
        return {}
    return io.load_json(args.config)


def run_pipeline(cfg: RunConfig, out: Path):
    """Execute the full pipeline and write its artifacts into ``out``."""
    if cfg.data is None:
        raise ParameterError("no input data: pass --data or set 'data' in the config")
    X, labels = io.load_dataset(cfg.data, cfg.labels)
    cfg.ille.seed = cfg.seed
    K1 = input_kernel(X, cfg.input_kernel, cfg.input_gamma)
    if cfg.shift_nonnegative:
        K1 = shift_nonnegative(K1)
    result = iterative_lle(K1, cfg.ille)

    io.save_json(out / "config.json", cfg)
    for record in result.history:
        io.save_embedding(out / f"Y_t{record.t}.csv", record.Y)
    io.save_json(out / "history.json", result.history)
    io.save_json(out / "eigenvalues.json", result.embedding.eigenvalues)
    if cfg.save_kernels:
        io.save_matrix(out / "kernel_final.csv", result.kernel)
        io.save_matrix(out / "similarity_final.csv", result.similarity.values)

    Y = result.embedding.Y
    coords = np.zeros((Y.shape[1], 2))
    coords[:, : min(2, Y.shape[0])] = Y[:2].T
    tag = labels if labels is not None else -np.ones(Y.shape[1], dtype=np.int64)
    with open(out / "embedding_2d.csv", "w") as fh:
        for (a, b), lab in zip(coords, tag):
            fh.write(f"{a:.17g},{b:.17g},{int(lab)}\n")

    if labels is None:
        return result, None
    ev = cfg.eval
    c = ev.c if ev.c is not None else int(np.unique(labels).size)
    final = kmeans(Y.T, c, n_init=ev.n_init, seed=cfg.seed)
    io.save_labels(out / "labels_pred.csv", final.labels)

    stages = {}
    if np.all(K1 >= 0):
        stages["K0"] = (embed(build_graph(K1), cfg.ille.embed_k, cfg.ille.drop_trivial), build_graph(K1))
    for record, G in zip(result.history, result.graphs):
        stages[f"LLE{record.t}"] = (record.Y, G)
    metrics = {"n": int(labels.size), "c": c}
    if ev.clustering:
        metrics["clustering"] = {
            name: cluster_scores(Ys, labels, c=c, n_init=ev.n_init, seed=cfg.seed)
            for name, (Ys, _) in stages.items()
        }
    if ev.ssl:
        metrics["ssl"] = {
            name: ssl_scores(G, labels, ev.label_fractions, ev.n_splits, cfg.seed, ev.lgc_alpha)
            for name, (_, G) in stages.items()
        }
    metrics["final"] = clustering_metrics(final.labels, labels).to_dict()
    io.save_json(out / "metrics.json", metrics)
    return result, metrics


def cmd_run(args):
    raw = _load_config(args)
    cfg = RunConfig.from_dict(raw)
    if args.config is not None:
        # paths inside a config file are relative to that file
        base = Path(args.config).parent
        for key in ("data", "labels"):
            value = getattr(cfg, key)
            if value is not None and not Path(value).is_absolute():
                setattr(cfg, key, str(base / value))
    if args.data:
        cfg.data = args.data
    if args.labels:
        cfg.labels = args.labels
    if args.seed is not None:
        cfg.seed = args.seed
    if args.print_config:
        print(io.dumps_json(cfg), end="")
        return 0
    out = _out_dir(args, cfg.out)
    args.resolved_out = out
    stale = out / "error.json"
    if stale.exists():
        stale.unlink()
    _, metrics = run_pipeline(cfg, out)
    if metrics is not None:
        print(io.dumps_json(metrics["final"]), end="")
    return 0


def cmd_kernel(args):
    X = io.load_matrix(args.data)
    if args.method == "linear":
        K = linear_kernel(X)
    else:
        K = gaussian_kernel(X, args.gamma if args.gamma is not None else median_gamma(X))
    if args.shift_nonnegative:
        K = shift_nonnegative(K)
    io.save_matrix(_out_dir(args) / "kernel.csv", K)
    return 0


def cmd_similarity(args):
    K = io.load_matrix(args.kernel)
    out = _out_dir(args)
    if args.method == "sparse":
        S, report = learn_sparse_similarity(
            K, alpha=args.alpha, beta=args.beta, tol=args.tol, max_iter=args.max_iter
        )
        io.save_json(out / "report.json", report)
    elif args.method == "knn":
        S = nonneg_lle_weights_knn(K, args.k_nn)
    else:
        S = lle_weights_knn(K, args.k_nn)
    io.save_matrix(out / "similarity.csv", S.values)
    return 0


def cmd_embed(args):
    W = io.load_matrix(args.similarity)
    Z = symmetrize(W) if not args.symmetric else W
    emb = embed(build_graph(Z), args.k, drop_trivial=args.drop_trivial)
    out = _out_dir(args)
    io.save_embedding(out / "embedding.csv", emb)
    io.save_json(out / "eigenvalues.json", emb.eigenvalues)
    return 0


def cmd_cluster(args):
    P = io.load_matrix(args.embedding)
    Y = P.T
    if args.spectral:
        Y = spectral_normalize(Y)
    seed = args.seed if args.seed is not None else 0
    result = kmeans(Y.T, args.c, n_init=args.n_init, seed=seed)
    out = _out_dir(args)
    io.save_labels(out / "labels.csv", result.labels)
    if args.truth:
        report = clustering_metrics(result.labels, io.load_labels(args.truth))
        io.save_json(out / "metrics.json", report)
        print(io.dumps_json(report), end="")
    return 0


def cmd_ssl(args):
    Z = io.load_matrix(args.graph)
    seeds = io.load_labels(args.seeds)
    mask = seeds >= 0
    if args.method == "harmonic":
        pred = harmonic_label_prop(Z, seeds, mask)
    else:
        pred = lg_consistency(Z, seeds, mask, alpha=args.alpha)
    io.save_labels(_out_dir(args) / "predictions.csv", pred)
    return 0


def cmd_metrics(args):
    pred = io.load_labels(args.pred)
    truth = io.load_labels(args.truth)
    print(io.dumps_json(clustering_metrics(pred, truth)), end="")
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--seed", type=int, default=None, help="random seed")
    common.add_argument("--out", help=f"output directory (env {ENV_OUT})")

    parser = argparse.ArgumentParser(prog="ille", description="Iterative locally linear embedding")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="run the full iterative pipeline")
    p.add_argument("--data", help="CSV, one point per row")
    p.add_argument("--labels", help="CSV with one integer label per row")
    p.add_argument("--print-config", action="store_true", help="print the resolved config and exit")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("kernel", parents=[common], help="build an input kernel")
    p.add_argument("--data", required=True)
    p.add_argument("--method", choices=["gaussian", "linear"], default="gaussian")
    p.add_argument("--gamma", type=float)
    p.add_argument("--shift-nonnegative", action="store_true")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("similarity", parents=[common], help="learn weights from a kernel")
    p.add_argument("--kernel", required=True)
    p.add_argument("--method", choices=["sparse", "knn", "knn-affine"], default="sparse")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--beta", type=float, default=0.1)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--k-nn", type=int, default=5)
    p.set_defaults(func=cmd_similarity)

    p = sub.add_parser("embed", parents=[common], help="embed a similarity graph")
    p.add_argument("--similarity", required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--drop-trivial", action="store_true")
    p.add_argument("--symmetric", action="store_true", help="input is already symmetric")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("cluster", parents=[common], help="K-means on an embedding")
    p.add_argument("--embedding", required=True, help="CSV, one point per row")
    p.add_argument("--c", type=int, required=True)
    p.add_argument("--n-init", type=int, default=10)
    p.add_argument("--spectral", action="store_true", help="normalize points to the unit sphere")
    p.add_argument("--truth", help="ground-truth labels for scoring")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("ssl", parents=[common], help="semi-supervised label propagation")
    p.add_argument("--graph", required=True, help="symmetric nonnegative affinity CSV")
    p.add_argument("--seeds", required=True, help="labels CSV, -1 for unlabeled points")
    p.add_argument("--method", choices=["harmonic", "lgc"], default="harmonic")
    p.add_argument("--alpha", type=float, default=0.99)
    p.set_defaults(func=cmd_ssl)

    p = sub.add_parser("metrics", parents=[common], help="ACC/NMI/purity of two label files")
    p.add_argument("pred")
    p.add_argument("truth")
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IlleError as exc:
        report = {
            "error": type(exc).__name__,
            "message": str(exc),
            "iteration": getattr(exc, "iteration", None),
        }
        print(io.dumps_json(report), end="", file=sys.stderr)
        if args.command == "run":
            try:
                out = getattr(args, "resolved_out", None) or _out_dir(args)
                io.save_json(out / "error.json", report)
            except OSError:
                pass
        return 2


if __name__ == "__main__":
    sys.exit(main())
