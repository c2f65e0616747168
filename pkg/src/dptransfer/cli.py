"""Command-line entry point: ``dptransfer <subcommand> ...``.

Exit status is 0 on success, 1 on invalid input and 2 on I/O failure; the
diagnostic is a single line on stderr.
"""
import argparse
import json
import sys

from . import calibration, classes, correspondence, descriptors, distillation, mesh
from .errors import ValidationError


class _UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _fraction(text):
    x = float(text)
    if not 0.0 <= x <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} not in [0, 1]")
    return x


def _positive_int(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"{text} is not a positive integer")
    return n


def _nonneg_int(text):
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError(f"{text} is negative")
    return n


def _positive_float(text):
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"{text} is not positive")
    return x


def cmd_descriptors(args):
    m = mesh.load_mesh(args.mesh)
    chart = mesh.load_chart(args.chart, m)
    if args.L is not None and args.L != chart.n_parts:
        raise ValidationError(f"--L {args.L} disagrees with chart L={chart.n_parts}")
    field = descriptors.compute_descriptors(m, chart, stride=args.stride)
    if args.normalize:
        field = descriptors.normalize_descriptors(field, chart)
    descriptors.save_descriptors(field, args.out)


def cmd_match(args):
    src = descriptors.load_descriptors(args.src)
    dst = descriptors.load_descriptors(args.dst)
    if args.reverse:
        src, dst = dst, src
    correspondence.save_map(correspondence.match(src, dst), args.out)


def cmd_transfer(args):
    vmap = correspondence.load_map(args.map)
    coords = mesh.load_chart_coords(args.coords, n_charts=args.C)
    mesh.save_chart_coords(correspondence.transfer_chart_coords(vmap, coords), args.out)


def cmd_distort(args):
    vmap = correspondence.load_map(args.map)
    report = correspondence.map_distortion(
        mesh.load_mesh(args.src_mesh), mesh.load_mesh(args.dst_mesh), vmap)
    with open(args.out, "w") as f:
        json.dump(report, f)


def cmd_calib_check(args):
    results = calibration.run_checks(seed=args.seed, sigma_min=args.sigma_min, n=args.n)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    return 0 if all(r.passed for r in results) else 1


def cmd_mine(args):
    records = distillation.load_detections(args.manifest, sigma_min=args.sigma_min)
    for r in records:
        if r.part_posterior.shape[0] != args.KI:
            raise ValidationError(
                f"detection {r.id}: part posterior has {r.part_posterior.shape[0]} channels, expected {args.KI}")
    sets, manifest = distillation.build_dataset(
        records, args.strategy, k=args.k, tau=args.tau, seed=args.seed, uv_combine=args.uv_combine)
    manifest["manifest"] = args.manifest
    distillation.save_label_sets(sets, args.out, manifest)


def cmd_rank_classes(args):
    ranked = classes.rank_classes(classes.load_table(args.table))
    n = len(ranked) if args.n is None else args.n
    classes.save_subset(classes.top_n_subset(ranked, n), args.out)


def build_parser():
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="dptransfer", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("descriptors", help="mesh + chart -> descriptor tensor", formatter_class=fmt)
    p.add_argument("--mesh", required=True, help="OBJ mesh")
    p.add_argument("--chart", required=True, help="part chart JSON")
    p.add_argument("--out", required=True, help="output .dpt tensor (sidecar written to OUT.json)")
    p.add_argument("--L", type=_positive_int, default=None, help="expected part count (default: from chart)")
    p.add_argument("--stride", type=_positive_int, default=1, help="use every Nth part vertex as a source")
    p.add_argument("--normalize", action="store_true", help="divide each column by its part average")
    p.set_defaults(func=cmd_descriptors)

    p = sub.add_parser("match", help="two descriptor tensors -> vertex map JSON", formatter_class=fmt)
    p.add_argument("--src", required=True)
    p.add_argument("--dst", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--reverse", action="store_true", help="map dst -> src instead")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("transfer", help="vertex map + target chart coords -> source chart coords",
                       formatter_class=fmt)
    p.add_argument("--map", required=True)
    p.add_argument("--coords", required=True, help="ChartCoords JSON for target vertices")
    p.add_argument("--out", required=True)
    p.add_argument("--C", type=_positive_int, default=mesh.DEFAULT_NUM_CHARTS, help="number of charts")
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("distort", help="vertex map + meshes -> edge distortion report", formatter_class=fmt)
    p.add_argument("--map", required=True)
    p.add_argument("--src-mesh", required=True)
    p.add_argument("--dst-mesh", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_distort)

    p = sub.add_parser("calib-check", help="run calibration self-checks", formatter_class=fmt)
    p.add_argument("--seed", type=_nonneg_int, default=0, help="RNG seed for the random instances")
    p.add_argument("--sigma-min", type=_positive_float, default=calibration.DEFAULT_SIGMA_MIN,
                   help="sigma clamp floor")
    p.add_argument("--n", type=_positive_int, default=1000, help="random instances per check")
    p.set_defaults(func=cmd_calib_check)

    p = sub.add_parser("mine", help="teacher detections -> pseudo-label JSON", formatter_class=fmt)
    p.add_argument("--manifest", required=True, help="detection manifest JSON")
    p.add_argument("--out", required=True, help="label JSON (run manifest at OUT.manifest.json)")
    p.add_argument("--strategy", choices=distillation.STRATEGIES, default="part", help="pixel sampling strategy")
    p.add_argument("--k", type=_positive_int, default=distillation.DEFAULT_K, help="pixels per detection")
    p.add_argument("--tau", type=_fraction, default=distillation.DEFAULT_TAU, help="detection score threshold")
    p.add_argument("--seed", type=_nonneg_int, default=0, help="seed for uniform sampling")
    p.add_argument("--KI", type=_positive_int, default=distillation.DEFAULT_NUM_PART_CLASSES,
                   help="part classes including background")
    p.add_argument("--sigma-min", type=_positive_float, default=calibration.DEFAULT_SIGMA_MIN,
                   help="minimum admissible uv sigma")
    p.add_argument("--uv-combine", choices=distillation.UV_COMBINE, default="sum_var",
                   help="how sigma_u and sigma_v combine into one uncertainty")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("rank-classes", help="class score table -> top-n subset manifest", formatter_class=fmt)
    p.add_argument("--table", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=_positive_int, default=None, help="subset size (default: all classes)")
    p.set_defaults(func=cmd_rank_classes)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return args.func(args) or 0
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
