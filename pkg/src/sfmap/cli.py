"""Command line front end: sfmap gen|compute|dist|classify|embed|match.

Every flag that encodes a tunable constant has an environment variable
mirror (SFMAP_N, SFMAP_M, SFMAP_EPSILON, SFMAP_SEED, SFMAP_RESTARTS,
SFMAP_MDS_MODE, SFMAP_DENSE_THRESHOLD, SFMAP_LARGEST_COMPONENT); explicit
flags win over the environment. Exit codes: 0 success, 1 usage error,
2 data or validation error, 3 numerical failure.
"""

import argparse
import csv
import logging
import os
import sys
from multiprocessing import Pool

import numpy as np

from . import __version__, reports, shapes
from .cluster import (DistanceMatrix, distance_matrix, kmeans_classify,
                      silhouette_from_distances)
from .embedding import DEFAULT_RESTARTS as MDS_RESTARTS
from .embedding import mds_embed
from .errors import EigensolverError, MeshError
from .manifest import ManifestError, load_manifest
from .matching import match_shapes
from .meshio import load_mesh, write_off
from .operators import DEFAULT_EPSILON, build_operators
from .selfmap import (read_signature_csv, signature_from_bases,
                      write_signature_csv, write_signature_pgm)
from .spectral import DENSE_THRESHOLD, build_basis, write_basis_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

log = logging.getLogger("sfmap")


class DependencyError(Exception):
    """A command needs artifacts an earlier command has not produced."""


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _env_int(name, fallback):
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    return int(raw)


def _env_str(name, fallback):
    return os.environ.get(name, fallback)


def _env_bool(name):
    raw = os.environ.get(name, "")
    return raw.strip().lower() in ("1", "true", "yes", "on")


def build_parser():
    parser = _Parser(prog="sfmap",
                     description="Self functional map signatures of "
                                 "triangulated surfaces.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="debug logging")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    spectral = argparse.ArgumentParser(add_help=False)
    spectral.add_argument("--n", type=int, default=_env_int("SFMAP_N", 7),
                          help="regular basis size (default 7)")
    spectral.add_argument("--m", type=int, default=_env_int("SFMAP_M", 7),
                          help="scale-invariant basis size (default 7)")
    spectral.add_argument("--epsilon",
                          default=_env_str("SFMAP_EPSILON", DEFAULT_EPSILON),
                          help="curvature regularization: a number, "
                               "abs:<value>, or rel:<factor> "
                               f"(default {DEFAULT_EPSILON})")
    spectral.add_argument("--dense-threshold", type=int,
                          default=_env_int("SFMAP_DENSE_THRESHOLD",
                                           DENSE_THRESHOLD),
                          help="vertex count above which the iterative "
                               "eigensolver is used")
    spectral.add_argument("--largest-component", action="store_true",
                          default=_env_bool("SFMAP_LARGEST_COMPONENT"),
                          help="keep only the largest connected component "
                               "of each input mesh")

    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument("--seed", type=int,
                        default=_env_int("SFMAP_SEED", 0),
                        help="master random seed (default 0)")

    p = sub.add_parser("gen", help="generate a synthetic mesh",
                       description="Write a deterministic OFF mesh.")
    p.add_argument("kind", choices=shapes.KINDS)
    p.add_argument("--out", required=True, help="output OFF path")
    p.add_argument("--radius", type=float, help="sphere/cap/major radius")
    p.add_argument("--tube-radius", type=float, help="torus tube radius")
    p.add_argument("--height", type=float,
                   help="cylinder height or sheet height")
    p.add_argument("--width", type=float, help="sheet width")
    p.add_argument("--level", type=int, help="icosphere subdivision level")
    p.add_argument("--segments", type=int, help="around-axis resolution")
    p.add_argument("--rings", type=int, help="uvsphere ring count")
    p.add_argument("--cap-rings", type=int,
                   help="spherocylinder rings per cap")
    p.add_argument("--tube-segments", type=int,
                   help="torus around-tube resolution")
    p.add_argument("--nx", type=int, help="sheet grid columns")
    p.add_argument("--ny", type=int, help="sheet grid rows")
    p.add_argument("--angle", type=float, help="bent_sheet total turn, radians")
    p.add_argument("--scale", type=float, default=1.0,
                   help="uniform scale factor")
    p.add_argument("--rotate-seed", type=int,
                   help="apply a seeded random rotation")
    p.add_argument("--noise", type=float, default=0.0,
                   help="normal-direction noise, relative to mean edge length")
    p.add_argument("--noise-seed", type=int, default=0)
    p.add_argument("--permute-seed", type=int,
                   help="apply a seeded vertex permutation")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("compute", parents=[spectral, seeded],
                       help="signatures for every manifest entry")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel workers (default 1)")
    p.add_argument("--dump-bases", action="store_true",
                   help="also write eigenbasis CSV dumps")
    p.add_argument("--force", action="store_true",
                   help="recompute signatures that already exist")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("dist", help="pairwise distance matrix")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("classify", parents=[seeded],
                       help="k-means over the signature distances")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--k", type=int,
                   help="cluster count (default: number of classes)")
    p.add_argument("--restarts", type=int,
                   default=_env_int("SFMAP_RESTARTS", 200))
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("embed", parents=[seeded],
                       help="MDS embedding of the distance matrix")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--mds-mode", choices=("nonmetric", "metric"),
                   default=_env_str("SFMAP_MDS_MODE", "nonmetric"))
    p.add_argument("--restarts", type=int,
                   default=_env_int("SFMAP_RESTARTS", MDS_RESTARTS))
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("match", parents=[spectral, seeded],
                       help="vertex correspondence between two shapes")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--source", required=True, metavar="ID")
    p.add_argument("--target", required=True, metavar="ID")
    p.add_argument("--match-k", type=int, default=120,
                   help="basis size for the correspondence (default 120)")
    p.set_defaults(func=cmd_match)
    return parser


# ---------------------------------------------------------------------------
# gen


_PARAM_NAMES = {
    "icosphere": {"radius": "radius", "level": "subdivisions"},
    "uvsphere": {"radius": "radius", "segments": "segments", "rings": "rings"},
    "spherocylinder": {"radius": "radius", "height": "height",
                       "segments": "segments", "cap_rings": "cap_rings"},
    "torus": {"radius": "major_radius", "tube_radius": "minor_radius",
              "segments": "major_segments", "tube_segments": "minor_segments"},
    "plane_patch": {"width": "width", "height": "height", "nx": "nx",
                    "ny": "ny"},
    "bent_sheet": {"width": "width", "height": "height", "nx": "nx",
                   "ny": "ny", "angle": "angle"},
}


def cmd_gen(args):
    params = {}
    for flag, kwarg in _PARAM_NAMES[args.kind].items():
        value = getattr(args, flag)
        if value is not None:
            params[kwarg] = value
    spec = shapes.ShapeSpec(kind=args.kind, params=params, scale=args.scale,
                            rotate_seed=args.rotate_seed, noise=args.noise,
                            noise_seed=args.noise_seed,
                            permute_seed=args.permute_seed)
    mesh = shapes.generate(spec)
    write_off(mesh, args.out)
    log.info("wrote %s (%d vertices, %d faces)", args.out, mesh.n_vertices,
             mesh.n_faces)
    return EXIT_OK


# ---------------------------------------------------------------------------
# compute


def _signature_paths(out_dir, shape_id):
    stem = os.path.join(out_dir, shape_id)
    return stem + ".csv", stem + ".pgm", stem + ".png"


def _compute_one(task):
    """Worker for one manifest entry; returns (shape_id, status)."""
    (entry_path, shape_id, out_dir, n, m, epsilon, seed, dense_threshold,
     largest_component, dump_bases, force) = task
    csv_path, pgm_path, png_path = _signature_paths(out_dir, shape_id)
    sm = None
    if not force and os.path.isfile(csv_path):
        try:
            cached = read_signature_csv(csv_path)
        except ValueError:
            cached = None
        if cached is not None and cached.m == m and cached.n == n:
            sm = cached
            status = "reused"
        else:
            status = "stale, recomputing"
            log.info("%s: cached signature has wrong shape, recomputing",
                     shape_id)
    if sm is None:
        status = "computed"
        mesh = load_mesh(entry_path, largest_component=largest_component)
        ops = build_operators(mesh, epsilon=epsilon)
        regular = build_basis(ops, "regular", n,
                              dense_threshold=dense_threshold, seed=seed)
        scale_inv = build_basis(ops, "scale_invariant", m,
                                dense_threshold=dense_threshold, seed=seed)
        sm = signature_from_bases(scale_inv, regular, ops, mesh_id=shape_id)
        write_signature_csv(sm, csv_path)
        if dump_bases:
            stem = os.path.join(out_dir, shape_id)
            write_basis_csv(regular, stem + ".regular.basis.csv")
            write_basis_csv(scale_inv, stem + ".scale_invariant.basis.csv")
    write_signature_pgm(sm, pgm_path)
    reports.signature_figure(sm, png_path)
    return shape_id, status


def cmd_compute(args):
    man = load_manifest(args.manifest, n=args.n, m=args.m,
                        epsilon=args.epsilon, seed=args.seed)
    os.makedirs(args.out_dir, exist_ok=True)
    tasks = [(e.path, e.shape_id, args.out_dir, man.n, man.m, man.epsilon,
              man.seed, args.dense_threshold, args.largest_component,
              args.dump_bases, args.force)
             for e in man.entries]
    if args.jobs > 1:
        with Pool(args.jobs) as pool:
            results = pool.map(_compute_one, tasks)
    else:
        results = [_compute_one(t) for t in tasks]
    for shape_id, status in results:
        log.info("%s: %s", shape_id, status)
    return EXIT_OK


# ---------------------------------------------------------------------------
# signature-consuming commands


def _load_signatures(man, out_dir):
    maps = []
    for e in man.entries:
        csv_path = _signature_paths(out_dir, e.shape_id)[0]
        if not os.path.isfile(csv_path):
            raise DependencyError(
                f"missing signature for {e.shape_id!r} ({csv_path}); "
                "run `sfmap compute` first")
        maps.append(read_signature_csv(csv_path))
    shape = {(sm.m, sm.n) for sm in maps}
    if len(shape) != 1:
        raise DependencyError(
            f"signatures disagree on basis sizes: {sorted(shape)}; "
            "recompute with a single configuration")
    return maps


def _write_distance_csv(D, path):
    with open(path, "w", newline="\n") as fh:
        fh.write("id," + ",".join(D.shape_ids) + "\n")
        for sid, row in zip(D.shape_ids, D.values):
            fh.write(sid + "," + ",".join(f"{v:.17g}" for v in row) + "\n")


def read_distance_csv(path):
    with open(path) as fh:
        header = fh.readline().rstrip("\n").split(",")
        ids = header[1:]
        values = []
        for line in fh:
            cells = line.rstrip("\n").split(",")
            values.append([float(v) for v in cells[1:]])
    return DistanceMatrix(values=np.asarray(values), shape_ids=ids)


def cmd_dist(args):
    man = load_manifest(args.manifest)
    maps = _load_signatures(man, args.out_dir)
    D = distance_matrix(maps, shape_ids=man.shape_ids)
    _write_distance_csv(D, os.path.join(args.out_dir, "distances.csv"))
    reports.distance_figure(D, os.path.join(args.out_dir, "distances.png"))
    off_diag = D.values[~np.eye(D.n, dtype=bool)]
    log.info("distance matrix for %d shapes, mean off-diagonal %.4g",
             D.n, off_diag.mean() if off_diag.size else 0.0)
    return EXIT_OK


def cmd_classify(args):
    man = load_manifest(args.manifest)
    maps = _load_signatures(man, args.out_dir)
    k = args.k if args.k is not None else len(man.class_names)
    labeling = kmeans_classify(maps, k, restarts=args.restarts,
                               seed=args.seed, true_labels=man.labels)
    with open(os.path.join(args.out_dir, "labels.csv"), "w",
              newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "predicted", "class"])
        for e, pred in zip(man.entries, labeling.predicted):
            writer.writerow([e.shape_id, int(pred), e.label])
    conf = labeling.confusion
    with open(os.path.join(args.out_dir, "confusion.csv"), "w",
              newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class"] + labeling.class_names)
        for name, row in zip(labeling.class_names, conf):
            writer.writerow([name] + [f"{v:.17g}" for v in row])
    table = reports.confusion_text(conf, labeling.class_names)
    with open(os.path.join(args.out_dir, "confusion.txt"), "w") as fh:
        fh.write(table)
    reports.confusion_figure(conf, labeling.class_names,
                             os.path.join(args.out_dir, "confusion.png"))
    diag = float(np.trace(conf)) / conf.shape[0]
    log.info("k-means cost %.4g, mean diagonal fraction %.3f",
             labeling.cost, diag)
    sys.stdout.write(table)
    return EXIT_OK


def cmd_embed(args):
    man = load_manifest(args.manifest)
    maps = _load_signatures(man, args.out_dir)
    D = distance_matrix(maps, shape_ids=man.shape_ids)
    emb = mds_embed(D, d=args.dim, mode=args.mds_mode, seed=args.seed,
                    restarts=args.restarts)
    with open(os.path.join(args.out_dir, "embedding.csv"), "w",
              newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id"] + [f"x{i + 1}" for i in range(args.dim)]
                        + ["class"])
        for e, point in zip(man.entries, emb.points):
            writer.writerow([e.shape_id] + [f"{v:.17g}" for v in point]
                            + [e.label])
    reports.embedding_figure(emb, man.labels, man.shape_ids,
                             os.path.join(args.out_dir, "embedding.svg"))
    message = f"stress {emb.stress:.6g}"
    if len(man.class_names) >= 2:
        diff = emb.points[:, None, :] - emb.points[None, :, :]
        euclid = np.sqrt((diff * diff).sum(axis=2))
        names = {name: i for i, name in enumerate(man.class_names)}
        labels = np.array([names[lab] for lab in man.labels])
        sil = silhouette_from_distances(euclid, labels)
        message += f", silhouette {sil:.3f}"
    sys.stdout.write(message + "\n")
    return EXIT_OK


def cmd_match(args):
    man = load_manifest(args.manifest)
    src = man.entry(args.source)
    dst = man.entry(args.target)
    os.makedirs(args.out_dir, exist_ok=True)
    k = args.match_k

    def bases_for(entry):
        mesh = load_mesh(entry.path,
                         largest_component=args.largest_component)
        if k >= mesh.n_vertices:
            raise ValueError(
                f"--match-k {k} must be below the vertex count "
                f"({mesh.n_vertices}) of {entry.shape_id!r}")
        ops = build_operators(mesh, epsilon=args.epsilon)
        reg = build_basis(ops, "regular", k,
                          dense_threshold=args.dense_threshold,
                          seed=args.seed)
        si = build_basis(ops, "scale_invariant", k,
                         dense_threshold=args.dense_threshold,
                         seed=args.seed)
        return si, reg

    si_S, reg_S = bases_for(src)
    si_Q, reg_Q = bases_for(dst)
    result = match_shapes(si_S, reg_S, si_Q, reg_Q)
    out = os.path.join(args.out_dir,
                       f"match_{src.shape_id}_{dst.shape_id}.csv")
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["source_vertex", "target_vertex"])
        for j, i in enumerate(result.correspondence):
            writer.writerow([j, int(i)])
    message = (f"matched {len(result.correspondence)} vertices, "
               f"spectral consistency {result.consistency:.3g}")
    sys.stdout.write(message + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------


def main(argv=None):
    try:
        parser = build_parser()
    except ValueError as exc:
        sys.stderr.write(f"sfmap: bad environment override: {exc}\n")
        return EXIT_USAGE
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    # LinAlgError subclasses ValueError; numerical failures must win.
    except (EigensolverError, np.linalg.LinAlgError,
            FloatingPointError) as exc:
        sys.stderr.write(f"sfmap: numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except (ManifestError, MeshError, DependencyError, OSError,
            ValueError) as exc:
        sys.stderr.write(f"sfmap: {exc}\n")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
