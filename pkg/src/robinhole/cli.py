"""Command line entry point: solve | sweep | certify | oracle | report.

Exit codes: 0 success, 2 assertion failure, 3 configuration error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import experiments
from .errors import ConfigError, RobinholeError
from .fem import save_forms
from .mesh import save_mesh
from .oracle import annulus_robin_eigs, disk_eigs, rect_eigs


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _add_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="declarative config file (key = value sections)")
    p.add_argument("--epsilon-list", help="comma or space separated epsilons")
    p.add_argument("--alpha", type=float, help="gamma law exponent: gamma = eps^(1-alpha)")
    p.add_argument("--bc", choices=["neumann", "dirichlet"])
    p.add_argument("--k", type=int, help="eigenvalue count")
    p.add_argument("--out", help="output directory")
    p.add_argument("--cache", help="cache directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--allow-nonregime", action="store_true")


def _config_from_args(args) -> experiments.ExperimentConfig:
    cfg = experiments.load_config(args.config) if args.config else experiments.ExperimentConfig()
    updates = {}
    if getattr(args, "epsilon_list", None):
        updates["epsilons"] = tuple(
            float(t) for t in args.epsilon_list.replace(",", " ").split()
        )
    if getattr(args, "alpha", None) is not None:
        updates["alpha"] = args.alpha
        updates["gamma_list"] = None
    if getattr(args, "bc", None):
        updates["bc"] = args.bc
    if getattr(args, "k", None):
        updates["k"] = args.k
    if getattr(args, "out", None):
        updates["outdir"] = args.out
    if getattr(args, "cache", None):
        updates["cache_dir"] = args.cache
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "allow_nonregime", False):
        updates["allow_nonregime"] = True
    if updates:
        from dataclasses import replace

        cfg = replace(cfg, **updates)
    return cfg.validate()


def _cmd_solve(args) -> int:
    cfg = _config_from_args(args)
    eps = cfg.epsilons[0] if args.eps is None else args.eps
    idx = cfg.epsilons.index(eps) if eps in cfg.epsilons else 0
    gamma = args.gamma if args.gamma is not None else cfg.gamma_for(idx)
    mesh, forms, spec = experiments.solve_punctured(cfg, eps, gamma, cfg.k)
    if args.dump_mesh:
        save_mesh(mesh, args.dump_mesh)
    if args.dump_forms:
        save_forms(forms, args.dump_forms)
    print(f"eps={eps} gamma={gamma} bc={cfg.bc} "
          f"vertices={mesh.num_vertices} triangles={mesh.num_triangles}")
    for i, (lam, res) in enumerate(zip(spec.eigenvalues, spec.residuals), start=1):
        print(f"  lambda_{i} = {lam:.10g}   residual {res:.2e}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    result = experiments.run_sweep(cfg)
    certificates = None
    if args.certify:
        certificates = experiments.run_certification(cfg)
    written = experiments.emit_outputs(result, cfg.outdir, certificates)
    print(f"wrote {written['csv']}")
    print(f"wrote {written['json']}")
    for p in written["plots"]:
        print(f"wrote {p}")
    if args.dump_mesh or args.dump_forms:
        eps = cfg.epsilons[-1]
        mesh, forms, _ = experiments.solve_punctured(cfg, eps, cfg.gamma_for(len(cfg.epsilons) - 1), 1)
        if args.dump_mesh:
            save_mesh(mesh, args.dump_mesh)
            print(f"wrote {args.dump_mesh}")
        if args.dump_forms:
            save_forms(forms, args.dump_forms)
            print(f"wrote {args.dump_forms}.K/.M/.B")
    if result.regime:
        violations = experiments.sweep_violations(result)
        if certificates:
            violations += experiments.certification_violations(certificates)
        if violations:
            for v in violations:
                print(f"ASSERTION FAILED: {v}", file=sys.stderr)
            return 2
    return 0


def _cmd_certify(args) -> int:
    cfg = _config_from_args(args)
    reports = experiments.run_certification(cfg)
    outdir = cfg.outdir
    os.makedirs(os.path.join(outdir, "certificates"), exist_ok=True)
    for rep in reports:
        path = os.path.join(outdir, "certificates", f"eps_{rep.epsilon!r}.json")
        with open(path, "w") as fh:
            json.dump(rep.to_dict(), fh, indent=1)
        print(f"wrote {path}")
        print(f"  eps={rep.epsilon} delta1..4=({rep.delta1:.1e},{rep.delta2:.1e},"
              f"{rep.delta3:.1e},{rep.delta4:.1e}) "
              f"delta5'={rep.delta5prime:.4f} delta6={rep.delta6:.4f} delta7={rep.delta7:.4f}")
    if cfg.regime:
        violations = experiments.certification_violations(reports)
        if violations:
            for v in violations:
                print(f"ASSERTION FAILED: {v}", file=sys.stderr)
            return 2
    else:
        print("theorem-regime gate off: no assertions checked")
    return 0


def _cmd_oracle(args) -> int:
    count = args.count
    if args.shape == "rect":
        spec = rect_eigs(args.outer, args.outer2 or args.outer, args.bc, count)
    elif args.shape == "disk":
        spec = disk_eigs(args.outer, args.bc, count)
    elif args.shape == "annulus":
        spec = annulus_robin_eigs(args.inner, args.outer, args.gamma, args.bc, count)
    else:
        raise ConfigError(f"unknown shape {args.shape}")
    payload = {
        "descriptor": spec.descriptor,
        "eigenvalues": spec.eigenvalues.tolist(),
        "multiplicities": list(spec.multiplicities),
        "residuals": spec.residuals.tolist(),
    }
    if args.format == "json":
        text = json.dumps(payload, indent=1)
    else:
        lines = ["index,eigenvalue,residual"]
        for i, (v, r) in enumerate(zip(spec.eigenvalues, spec.residuals), start=1):
            lines.append(f"{i},{v!r},{r!r}")
        text = "\n".join(lines)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote {args.output}")
    else:
        print(text)
    return 0


def _cmd_report(args) -> int:
    with open(args.results) as fh:
        result = experiments.SweepResult.from_dict(json.load(fh))
    outdir = args.out or os.path.dirname(os.path.abspath(args.results)) or "."
    written = experiments.emit_outputs(result, outdir)
    print(f"wrote {written['csv']}")
    for p in written["plots"]:
        print(f"wrote {p}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="robinhole", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="single punctured solve")
    _add_overrides(p)
    p.add_argument("--eps", type=float, help="hole scale (default: first sweep value)")
    p.add_argument("--gamma", type=float, help="Robin coefficient override")
    p.add_argument("--dump-mesh", metavar="PATH")
    p.add_argument("--dump-forms", metavar="PATH")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("sweep", help="epsilon sweep with outputs")
    _add_overrides(p)
    p.add_argument("--certify", action="store_true", help="also emit closeness certificates")
    p.add_argument("--dump-mesh", metavar="PATH")
    p.add_argument("--dump-forms", metavar="PATH")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("certify", help="closeness certification per epsilon")
    _add_overrides(p)
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("oracle", help="analytic reference spectra")
    p.add_argument("--shape", required=True, choices=["rect", "disk", "annulus"])
    p.add_argument("--bc", default="dirichlet", choices=["dirichlet", "neumann"])
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--inner", type=float, default=0.1)
    p.add_argument("--outer", type=float, default=1.0)
    p.add_argument("--outer2", type=float, help="second rectangle side")
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--format", default="json", choices=["json", "csv"])
    p.add_argument("--output", metavar="PATH")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("report", help="re-emit outputs from a results.json")
    p.add_argument("--results", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 3
    except RobinholeError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
