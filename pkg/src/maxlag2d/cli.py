"""Command line interface ``maxlag2d``.

Exit codes: 0 success, 2 numerical failure, 3 configuration or input error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .bench import ConfigError, ExperimentConfig, Perturbation, PipelineError, run_convergence, run_spectrum
from .eig import ConvergenceWarning, FactorizationError
from .mesh import MeshError, generate_jittered, generate_structured, read_mesh, write_mesh
from .refine import read_provenance, refine, write_provenance
from .singular import classify

EXIT_OK, EXIT_NUMERICAL, EXIT_CONFIG = 0, 2, 3
INPUT_STAGES = ("mesh", "refine", "space")

log = logging.getLogger("maxlag2d")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"maxlag2d: {category.__name__}: {message}", file=sys.stderr)


def _emit(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(path).write_text(text)


def cmd_mesh_gen(args) -> int:
    if args.jitter > 0:
        mesh = generate_jittered(args.n, args.seed, args.jitter, diagonals=args.diagonals,
                                 domain=args.domain)
    else:
        mesh = generate_structured(args.n, args.pattern, args.domain)
    write_mesh(mesh, args.output)
    log.info("wrote %d vertices, %d triangles to %s", mesh.n_vertices, mesh.n_triangles, args.output)
    return EXIT_OK


def cmd_refine(args) -> int:
    refined = refine(read_mesh(args.input), args.split)
    write_mesh(refined.mesh, args.output)
    if args.provenance:
        write_provenance(refined, args.provenance)
    return EXIT_OK


def cmd_singular(args) -> int:
    mesh = read_mesh(args.input)
    constructed = None
    if args.provenance:
        constructed = read_provenance(mesh, args.provenance).constructed_singular_points
    cls = classify(mesh, tol_singular=args.tol, constructed=constructed)
    if args.report == "json":
        _emit(json.dumps(cls.to_dict(), indent=1), args.output)
    else:
        lines = [f"vertices {mesh.n_vertices}",
                 f"singular interior {cls.singular_interior.tolist()}",
                 f"singular boundary {cls.singular_boundary.tolist()}",
                 f"singular corner {cls.singular_corner.tolist()}",
                 f"theta_min {cls.theta_min:.6g}",
                 f"nearly singular {cls.nearly_singular.tolist()}"]
        _emit("\n".join(lines), args.output)
    return EXIT_OK


def _config_from(args, **overrides) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.from_json(args.config)
        for key, value in overrides.items():
            if value is not None:
                setattr(cfg, key, value)
        cfg.__post_init__()
        return cfg
    return ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})


def _finish(converged: bool) -> int:
    if not converged:
        log.error("eigensolver did not converge")
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_spectrum(args) -> int:
    pert = None
    if args.perturb_alpha is not None:
        pert = Perturbation(args.perturb_selector, args.perturb_alpha, args.perturb_seed)
    if args.input:
        cfg = _config_from(args, family="imported", mesh_path=args.input,
                           provenance_path=args.provenance, split=args.split or "none",
                           degree=args.degree, nev=args.nev, shift=args.shift,
                           zero_tol=args.zero_tol, domain=args.domain, perturbation=pert,
                           csv_path=args.out, json_path=args.json)
    else:
        cfg = _config_from(args, family=args.family, levels=None if args.n is None else [args.n],
                           jitter=args.jitter, mesh_seed=args.seed,
                           degree=args.degree, split=args.split, nev=args.nev,
                           shift=args.shift, zero_tol=args.zero_tol, domain=args.domain,
                           perturbation=pert, csv_path=args.out, json_path=args.json)
    table = run_spectrum(cfg)
    if not cfg.csv_path:
        sys.stdout.write(table.to_csv())
    return _finish(table.converged)


def cmd_convergence(args) -> int:
    cfg = _config_from(args, domain=args.domain, family=args.family, split=args.split,
                       degree=args.degree, levels=args.levels, jitter=args.jitter,
                       mesh_seed=args.seed, target=args.target,
                       nev=args.target or (None if args.config else 1),
                       csv_path=args.out, json_path=args.json)
    table = run_convergence(cfg)
    if not cfg.csv_path:
        sys.stdout.write(table.to_csv())
    log.info("least-squares rate %.4f", table.slope)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_verification
    mesh = read_mesh(args.input)
    refined = read_provenance(mesh, args.provenance) if args.provenance else refine(mesh, args.split)
    report = run_verification(refined, args.degree, norm=args.norm)
    _emit(json.dumps(report.to_dict(), indent=1), args.report)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="maxlag2d", description="Maxwell eigenvalues with vector Lagrange elements.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("mesh-gen", help="generate a structured or jittered mesh")
    s.add_argument("--pattern", default="right-split",
                   choices=["right-split", "right", "criss-cross", "crisscross"])
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--domain", default="unit-square", choices=["unit-square", "L-shape"])
    s.add_argument("--jitter", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--diagonals", default="right", choices=["right", "random"])
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_mesh_gen)

    s = sub.add_parser("refine", help="Powell-Sabin or Clough-Tocher split")
    s.add_argument("--split", required=True, choices=["ps", "ct"])
    s.add_argument("-i", "--input", required=True)
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--provenance")
    s.set_defaults(func=cmd_refine)

    s = sub.add_parser("singular", help="classify singular vertices")
    s.add_argument("-i", "--input", required=True)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--provenance")
    s.add_argument("--report", default="json", choices=["json", "text"])
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_singular)

    s = sub.add_parser("spectrum", help="smallest nonzero eigenvalues of one mesh")
    s.add_argument("-i", "--input")
    s.add_argument("--provenance")
    s.add_argument("--config")
    s.add_argument("--family", choices=["right-split", "criss-cross"])
    s.add_argument("--n", type=int)
    s.add_argument("--jitter", type=float)
    s.add_argument("--seed", type=int)
    s.add_argument("--split", choices=["ps", "ct", "none"])
    s.add_argument("--degree", type=int)
    s.add_argument("--nev", type=int)
    s.add_argument("--shift", type=float)
    s.add_argument("--zero-tol", dest="zero_tol", type=float)
    s.add_argument("--domain", choices=["unit-square", "L-shape"])
    s.add_argument("--perturb-selector", default="singular-vertices",
                   choices=["singular-vertices", "interior-valence-4"])
    s.add_argument("--perturb-alpha", type=float)
    s.add_argument("--perturb-seed", type=int, default=0)
    s.add_argument("--out")
    s.add_argument("--json")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("convergence", help="error and rates over mesh levels")
    s.add_argument("--config")
    s.add_argument("--domain", choices=["unit-square", "L-shape"])
    s.add_argument("--family", choices=["right-split", "criss-cross"])
    s.add_argument("--split", choices=["ps", "ct", "none"])
    s.add_argument("--degree", type=int)
    s.add_argument("--levels", type=int, nargs="+")
    s.add_argument("--jitter", type=float)
    s.add_argument("--seed", type=int)
    s.add_argument("--target", type=int)
    s.add_argument("--out")
    s.add_argument("--json")
    s.set_defaults(func=cmd_convergence)

    s = sub.add_parser("verify", help="exactness and inf-sup checks")
    s.add_argument("-i", "--input", required=True)
    s.add_argument("--split", default="ps", choices=["ps", "ct", "none"])
    s.add_argument("--provenance")
    s.add_argument("--degree", type=int, default=1)
    s.add_argument("--norm", default="h1", choices=["h1", "l2"])
    s.add_argument("--report")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always", ConvergenceWarning)
            warnings.showwarning = _show_warning
            return args.func(args)
    except PipelineError as exc:
        if exc.stage in INPUT_STAGES and isinstance(exc.cause, (ValueError, OSError)):
            print(f"maxlag2d: error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"maxlag2d: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (FactorizationError, np.linalg.LinAlgError) as exc:
        print(f"maxlag2d: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, MeshError, ValueError, OSError) as exc:
        print(f"maxlag2d: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
