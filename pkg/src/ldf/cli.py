"""Command-line front end: ``ldf <subcommand> ...``.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""
import argparse
import logging
import os
import sys

log = logging.getLogger("ldf")


def _jobs_default():
    try:
        return max(1, int(os.environ.get("LDF_JOBS", "1")))
    except ValueError:
        return 1


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _sibling(path, suffix):
    root, _ = os.path.splitext(path)
    return root + suffix


def cmd_decouple(args):
    from .decouple import decouple_dataset

    count = decouple_dataset(args.gt, args.out, jobs=args.jobs)
    if count == 0:
        raise RuntimeError(f"no readable masks in {args.gt}")
    print(f"decoupled {count} masks into {args.out}")


def cmd_eval(args):
    from .metrics import evaluate_dataset, write_curve, write_report

    report = evaluate_dataset(args.pred, args.gt, jobs=args.jobs)
    curves = args.curves or _sibling(args.out, ".curves.csv")
    write_report(report, args.out, args.report)
    write_curve(report.curve, curves)
    agg = report.aggregate()
    print(f"{len(report.names)} images  MAE {agg['mae']:.4f}  "
          f"mF {agg['mean_f']:.4f}  E {agg['e_measure']:.4f}")


def cmd_errdist(args):
    from .distance import NoEdge
    from .errdist import (aggregate_hists, error_distance_hist, mae_edge_split,
                          write_edge_band, write_hist)
    from .metrics import load_pairs

    names, preds, masks = load_pairs(args.pred, args.gt)
    hists, bands = [], []
    for name, pred, gt in zip(names, preds, masks):
        try:
            hists.append(error_distance_hist(pred, gt, args.bins))
            bands.append((name, mae_edge_split(pred, gt, args.band)))
        except NoEdge:
            log.warning("skipping %s: ground truth is constant", name)
    if not hists:
        raise RuntimeError("every ground-truth mask is constant; nothing to analyse")
    edge_out = args.edge_out or _sibling(args.out, ".edgeband.csv")
    write_hist(aggregate_hists(hists), args.out)
    write_edge_band(bands, edge_out)
    print(f"{len(hists)} images analysed, {len(names) - len(hists)} skipped")


def cmd_synth(args):
    from .synth import synth_generate, write_dataset

    images, masks = synth_generate(args.n, args.size, args.seed)
    write_dataset(images, masks, args.out)
    print(f"wrote {args.n} image/mask pairs to {args.out}")


def cmd_train(args):
    from .train import TrainConfig, load_image_dir, save_checkpoint, train, write_log

    config = TrainConfig(steps=args.steps, batch_size=args.batch, lr=args.lr,
                         seed=args.seed, mode=args.mode,
                         n_interactions=args.interactions, n_train=args.n,
                         side=args.size)
    images = masks = None
    if args.data:
        images, masks = load_image_dir(args.data)
    model, rows = train(config, images, masks)
    os.makedirs(args.out, exist_ok=True)
    save_checkpoint(model, os.path.join(args.out, "checkpoint.ldft"))
    write_log(rows, os.path.join(args.out, "loss_log.csv"))
    final = [r[5] for r in rows if r[1] == 0][-1]
    print(f"trained {args.steps} steps, final loss {final:.4f}")


def cmd_gradcheck(args):
    from .train import gradcheck_default

    err = gradcheck_default(args.interactions, args.mode, args.reduction,
                            args.seed, args.params)
    print(f"max relative error {err:.3e}")
    if not err < args.tol:
        print(f"above tolerance {args.tol:g}", file=sys.stderr)
        return 1
    return 0


def build_parser():
    from .train import MODES

    parser = argparse.ArgumentParser(prog="ldf", description="Label decoupling toolkit for salient object detection.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_jobs(p):
        p.add_argument("--jobs", type=_positive_int, default=_jobs_default(),
                       help="worker threads (default: $LDF_JOBS or 1)")

    p = sub.add_parser("decouple", help="write body/detail labels for a mask folder")
    p.add_argument("--gt", required=True)
    p.add_argument("--out", required=True)
    add_jobs(p)
    p.set_defaults(func=cmd_decouple)

    p = sub.add_parser("eval", help="MAE, mean F and E-measure of a prediction folder")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--out", required=True, help="report file")
    p.add_argument("--curves", help="curve CSV (default: <out>.curves.csv)")
    p.add_argument("--report", choices=("csv", "json"), default="csv")
    add_jobs(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("errdist", help="error vs distance-to-edge analysis")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--bins", type=_positive_int, default=20)
    p.add_argument("--band", type=_nonneg_int, default=2, help="edge band radius in pixels")
    p.add_argument("--out", required=True, help="histogram CSV")
    p.add_argument("--edge-out", help="edge-band CSV (default: <out>.edgeband.csv)")
    add_jobs(p)
    p.set_defaults(func=cmd_errdist)

    p = sub.add_parser("synth", help="generate a synthetic image/mask set")
    p.add_argument("--n", type=_positive_int, default=64)
    p.add_argument("--size", type=_positive_int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train the toy network")
    p.add_argument("--data", help="folder with images/ and masks/ (default: synthetic)")
    p.add_argument("--n", type=_positive_int, default=64, help="synthetic set size")
    p.add_argument("--size", type=_positive_int, default=32, help="synthetic image side")
    p.add_argument("--steps", type=_positive_int, default=2000)
    p.add_argument("--batch", type=_positive_int, default=8)
    p.add_argument("--lr", type=_positive_float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=MODES, default="body+detail")
    p.add_argument("--interactions", type=_nonneg_int, default=1)
    p.add_argument("--out", required=True, help="output folder")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("gradcheck", help="finite-difference check of the toy network")
    p.add_argument("--interactions", type=_nonneg_int, default=1)
    p.add_argument("--mode", choices=MODES, default="body+detail")
    p.add_argument("--reduction", choices=("sum", "mean"), default="sum")
    p.add_argument("--params", type=_positive_int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=_positive_float, default=1e-4)
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("synth", "train") and args.size % 16:
        parser.error("--size must be a multiple of 16")
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        code = args.func(args)
    except Exception as exc:
        print(f"ldf {args.command}: {exc}", file=sys.stderr)
        return 1
    return code or 0


if __name__ == "__main__":
    sys.exit(main())
