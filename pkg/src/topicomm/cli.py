"""Command-line interface: generate / detect / sweep / compare / metrics."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import _kernels
from .graph import Config, EmptyDatasetError
from .pipeline import run_compare, run_detect, run_sweep, rescore_communities
from .synthgen import PARTICIPATION_MODES, PlantedSpec, generate_planted_esbn, write_planted_tsv

logger = logging.getLogger(__name__)


def _parse_floats(values: list[str]) -> list[float]:
    out: list[float] = []
    for chunk in values:
        out.extend(float(part) for part in chunk.split(",") if part)
    return out


def _add_config_args(sub: argparse.ArgumentParser, include_alpha: bool = True) -> None:
    if include_alpha:
        sub.add_argument("--alpha", type=float, default=0.3,
                         help="weight of the user-latent similarity (default 0.3)")
    sub.add_argument("--beta", action="append", default=None, metavar="B",
                     help="PurQ beta; repeat or comma-separate (default 0.5,2)")
    sub.add_argument("--svd-k", type=int, default=10, help="latent dimensions")
    sub.add_argument("--min-clusters", type=int, default=2,
                     help="cluster floor of the merge loop (use the topic count when known)")
    sub.add_argument("--epsilon", type=float, default=1e-4,
                     help="minimum significant SemQ improvement")
    sub.add_argument("--min-tag-freq", type=int, default=0,
                     help="drop tags occurring in fewer events (0 disables)")
    sub.add_argument("--min-shared", type=int, default=0,
                     help="candidate-pair threshold (0 disables candidate selection)")
    sub.add_argument("--theta", type=float, default=0.3,
                     help="profile-similarity cosine threshold")
    sub.add_argument("--seed", type=int, default=0, help="random seed")


def _config_from(args: argparse.Namespace) -> tuple[Config, tuple[float, ...]]:
    betas = tuple(_parse_floats(args.beta)) if args.beta else (0.5, 2.0)
    cfg = Config(
        alpha=args.alpha,
        beta=betas[0],
        min_clusters=args.min_clusters,
        epsilon=args.epsilon,
        svd_k=args.svd_k,
        min_tag_freq=args.min_tag_freq,
        min_shared=args.min_shared,
        profile_theta=args.theta,
        rng_seed=args.seed,
    )
    return cfg, betas


def cmd_generate(args: argparse.Namespace) -> int:
    spec = PlantedSpec(
        n_topics=args.topics,
        events_per_topic=args.events_per_topic,
        users_per_topic=args.users_per_topic,
        tags_per_topic=args.tags_per_topic,
        p_in=args.p_in,
        p_out=args.p_out,
        tag_noise=args.tag_noise,
        rng_seed=args.seed,
        tags_per_event=args.tags_per_event,
        participation=args.participation,
        friend_prob=args.friend_prob,
    )
    dataset, truth = generate_planted_esbn(spec)
    write_planted_tsv(dataset, truth, args.out_dir)
    print(
        f"wrote planted dataset to {args.out_dir}: "
        f"{len(dataset.events)} events, {len(dataset.users)} users, "
        f"{len(dataset.tags)} tags"
    )
    return 0


def cmd_detect(args: argparse.Namespace) -> int:
    cfg, betas = _config_from(args)
    report = run_detect(
        args.input_dir,
        args.out_dir,
        cfg,
        betas,
        dump_embedding=args.dump_embedding,
        dump_similarity=args.dump_similarity,
        dump_trace=args.dump_trace,
    )
    agg = report.aggregate
    print(
        f"{agg['n_communities']} communities | purity={agg['purity']:.4f} "
        f"f_purity={agg['f_purity']:.4f} q={agg['q']:.4f} "
        f"purq={ {k: round(v, 4) for k, v in agg['purq'].items()} }"
    )
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    alphas = _parse_floats(args.alpha) if args.alpha else [0.0, 0.25, 0.5, 0.75, 1.0]
    betas = _parse_floats(args.beta) if args.beta else [0.5, 2.0]
    args.alpha = alphas[0]
    cfg, _ = _config_from(args)
    rows = run_sweep(args.input_dir, args.out_dir, cfg, alphas, betas)
    print(f"wrote {len(rows)} sweep rows to {Path(args.out_dir) / 'report.csv'}")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    cfg, betas = _config_from(args)
    comparison = run_compare(args.input_dir, args.out_dir, cfg, betas)
    topical, base = comparison["topical"], comparison["baseline"]
    print(
        f"topical: {topical['n_communities']} communities q={topical['q']:.4f} "
        f"purity={topical['purity']:.4f} mean_size={topical['mean_community_size']:.1f}"
    )
    print(
        f"baseline: {base['n_communities']} communities q={base['q']:.4f} "
        f"mean_size={base['mean_community_size']:.1f}"
    )
    return 0


def cmd_metrics(args: argparse.Namespace) -> int:
    cfg, betas = _config_from(args)
    report = rescore_communities(
        args.input_dir, args.communities, args.out_dir, cfg, betas
    )
    agg = report.aggregate
    print(f"purity={agg['purity']:.4f} f_purity={agg['f_purity']:.4f} q={agg['q']:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topicomm",
        description="Overlapping topical community detection in event-based social networks",
    )
    parser.add_argument("--log-level", default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a seeded planted-community dataset")
    gen.add_argument("--out-dir", required=True)
    gen.add_argument("--topics", type=int, default=4)
    gen.add_argument("--events-per-topic", type=int, default=10)
    gen.add_argument("--users-per-topic", type=int, default=50)
    gen.add_argument("--tags-per-topic", type=int, default=8)
    gen.add_argument("--tags-per-event", type=int, default=4)
    gen.add_argument("--p-in", type=float, default=0.3)
    gen.add_argument("--p-out", type=float, default=0.01)
    gen.add_argument("--tag-noise", type=float, default=0.05)
    gen.add_argument("--participation", choices=PARTICIPATION_MODES, default="uniform")
    gen.add_argument("--friend-prob", type=float, default=0.3)
    gen.add_argument("--seed", type=int, default=7)
    gen.set_defaults(func=cmd_generate)

    det = sub.add_parser("detect", help="detect communities in a TSV dataset")
    det.add_argument("--input-dir", required=True)
    det.add_argument("--out-dir", required=True)
    _add_config_args(det)
    det.add_argument("--dump-embedding", metavar="PREFIX",
                     help="write PREFIX_user.tsv and PREFIX_semantic.tsv")
    det.add_argument("--dump-similarity", metavar="PATH",
                     help="write the combined similarity upper triangle")
    det.add_argument("--dump-trace", metavar="PATH",
                     help="write the merge trace as JSON")
    det.set_defaults(func=cmd_detect)

    swp = sub.add_parser("sweep", help="grid of detection runs over alpha and beta")
    swp.add_argument("--input-dir", required=True)
    swp.add_argument("--out-dir", required=True)
    swp.add_argument("--alpha", action="append", metavar="A",
                     help="alpha grid; repeat or comma-separate (default 0,0.25,0.5,0.75,1)")
    _add_config_args(swp, include_alpha=False)
    swp.set_defaults(func=cmd_sweep)

    cmp_ = sub.add_parser("compare", help="topical method vs greedy modularity")
    cmp_.add_argument("--input-dir", required=True)
    cmp_.add_argument("--out-dir", required=True)
    _add_config_args(cmp_)
    cmp_.set_defaults(func=cmd_compare)

    met = sub.add_parser("metrics", help="re-score an existing communities.json")
    met.add_argument("--input-dir", required=True)
    met.add_argument("--communities", required=True)
    met.add_argument("--out-dir", required=True)
    _add_config_args(met)
    met.set_defaults(func=cmd_metrics)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    logger.debug("kernel backend: %s", _kernels.BACKEND)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, EmptyDatasetError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
