"""Epsilon sweeps under the gamma scaling law, with outputs and caching.

The orchestration meshes each punctured domain, assembles the Robin form with
gamma = eps * M_eps, solves for the lowest eigenvalues, and compares them to
the unperturbed reference spectrum (oracle where one exists, fine-mesh FEM
otherwise). Certification runs the closeness lab per epsilon.
"""
from __future__ import annotations

import configparser
import hashlib
import json
import os
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .closeness import ClosenessLab, ClosenessReport, certify
from .eigensolve import SolverConfig, Spectrum, solve_lowest
from .errors import ConfigError, FatalConfig, RobinholeError
from .fem import DIRICHLET_OUTER, NEUMANN_OUTER, assemble, assemble_plain, robin_form, save_forms
from .geometry import HoleSpec, OuterDomain, PuncturedDomain, make_punctured
from .mesh import matched_mesh_pair, save_mesh, triangulate, triangulate_domain
from .oracle import disk_eigs, rect_eigs
from .probes import rough_fields, standard_smooth_family
from .spectral_metrics import (
    FiniteSpectrumWindow,
    dbar,
    fit_rate,
    match_with_multiplicity,
    window_cap,
)
from .svgplot import loglog_plot

ALPHA_MAX = 1.5
EXTRA_EIGS = 4  # solve a few past k so the dbar window stays populated


@dataclass(frozen=True)
class ExperimentConfig:
    outer_kind: str = "rectangle"
    outer_params: tuple = (0.0, 0.0, 1.0, 1.0)  # rectangle corners or (cx, cy, R)
    hole_shape: str = "disk"
    hole_center: tuple = (0.5, 0.5)
    epsilons: tuple = (0.2, 0.1, 0.05, 0.025)
    alpha: float | None = 1.0
    gamma_list: tuple | None = None
    bc: str = "neumann"
    k: int = 5
    h_coeff: float = 0.25
    h_cap: float = 0.02
    h_fixed: float | None = None
    tol: float = 1e-9
    max_iter: int = 400
    seed: int = 1234
    window: float | None = None
    outdir: str = "out"
    cache_dir: str | None = None
    allow_nonregime: bool = False

    def validate(self) -> "ExperimentConfig":
        if not self.epsilons or any(e <= 0 for e in self.epsilons):
            raise ConfigError("epsilons must be positive (the hole must have eps > 0)")
        if any(a <= b for a, b in zip(self.epsilons[:-1], self.epsilons[1:])):
            raise ConfigError("epsilons must be strictly decreasing")
        if self.bc not in ("neumann", "dirichlet"):
            raise ConfigError(f"unknown bc {self.bc!r}")
        if (self.alpha is None) == (self.gamma_list is None):
            raise ConfigError("specify exactly one of alpha or gamma_list")
        if self.gamma_list is not None and len(self.gamma_list) != len(self.epsilons):
            raise ConfigError("gamma_list must match epsilons in length")
        if self.alpha is not None and not self.allow_nonregime:
            if not (0.0 < self.alpha < ALPHA_MAX):
                raise FatalConfig(
                    f"alpha={self.alpha} outside the theorem regime (0, {ALPHA_MAX}); "
                    "pass allow_nonregime to run anyway"
                )
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        return self

    @property
    def regime(self) -> bool:
        return self.alpha is not None and 0.0 < self.alpha < ALPHA_MAX

    @property
    def mode(self) -> str:
        return NEUMANN_OUTER if self.bc == "neumann" else DIRICHLET_OUTER

    def gamma_for(self, i: int) -> float:
        eps = self.epsilons[i]
        if self.gamma_list is not None:
            return float(self.gamma_list[i])
        # gamma = eps * M_eps with M_eps = eps^(-alpha)
        return float(eps ** (1.0 - self.alpha))

    def h_for(self, eps: float) -> float:
        if self.h_fixed is not None:
            return self.h_fixed
        return min(self.h_coeff * eps, self.h_cap)

    def outer_domain(self) -> OuterDomain:
        if self.outer_kind == "rectangle":
            return OuterDomain.rectangle(*self.outer_params)
        if self.outer_kind == "disk":
            cx, cy, r = self.outer_params
            return OuterDomain.disk((cx, cy), r)
        return OuterDomain.polygon(np.asarray(self.outer_params, dtype=float).reshape(-1, 2))

    def punctured(self, eps: float) -> PuncturedDomain:
        if self.hole_shape == "disk":
            hole = HoleSpec.disk(self.hole_center, eps)
        elif self.hole_shape == "square":
            hole = HoleSpec.square(self.hole_center, eps)
        else:
            raise ConfigError(f"unknown hole shape {self.hole_shape!r}")
        return make_punctured(self.outer_domain(), hole)

    def solver(self, k: int) -> SolverConfig:
        return SolverConfig(k=k, tol=self.tol, max_iter=self.max_iter, seed=self.seed)


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    gamma: float
    n_vertices: int
    n_triangles: int
    h_max: float
    quality: float
    eigenvalues: list
    residual_max: float
    errors: list
    dbar_value: float
    dbar_bias: float
    runtime: float
    failure: str | None = None


@dataclass(frozen=True)
class SweepResult:
    config: dict
    reference: dict
    rows: list
    per_k_fits: list
    dbar_fit: dict | None
    regime: bool

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "reference": self.reference,
            "rows": [asdict(r) for r in self.rows],
            "per_k_fits": self.per_k_fits,
            "dbar_fit": self.dbar_fit,
            "regime": self.regime,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SweepResult":
        return cls(
            config=d["config"],
            reference=d["reference"],
            rows=[SweepRow(**r) for r in d["rows"]],
            per_k_fits=d["per_k_fits"],
            dbar_fit=d["dbar_fit"],
            regime=d["regime"],
        )


def cache_key(fragment: dict) -> str:
    """Stable content hash of a canonicalized config fragment."""
    blob = json.dumps(fragment, sort_keys=True, separators=(",", ":"), default=repr)
    return hashlib.sha256(blob.encode()).hexdigest()


def reference_spectrum(config: ExperimentConfig, count: int) -> dict:
    """Unperturbed spectrum: oracle for rectangles/disks, fine FEM otherwise."""
    outer = config.outer_domain()
    if config.outer_kind == "rectangle":
        x0, y0, x1, y1 = config.outer_params
        spec = rect_eigs(x1 - x0, y1 - y0, config.bc, count)
        return {"values": spec.eigenvalues.tolist(), "provenance": "oracle",
                "richardson_error": 0.0}
    if config.outer_kind == "disk":
        spec = disk_eigs(config.outer_params[2], config.bc, count)
        return {"values": spec.eigenvalues.tolist(), "provenance": "oracle",
                "richardson_error": 0.0}
    h_ref = 0.5 * min(config.h_for(e) for e in config.epsilons)
    vals_h = _fem_reference(outer, config, h_ref, count)
    vals_2h = _fem_reference(outer, config, 2 * h_ref, count)
    rich = float(np.max(np.abs(vals_2h - vals_h)) / 3.0)
    return {"values": vals_h.tolist(), "provenance": "fem", "richardson_error": rich}


def _fem_reference(outer, config, h, count) -> np.ndarray:
    mesh = triangulate_domain(outer, h)
    forms = assemble_plain(mesh, config.mode)
    spec = solve_lowest(forms.K, forms.M, config.solver(count))
    return spec.eigenvalues


def solve_punctured(config: ExperimentConfig, eps: float, gamma: float,
                    k_solve: int) -> tuple:
    """Mesh, assemble, and solve one punctured configuration."""
    domain = config.punctured(eps)
    mesh = triangulate(domain, config.h_for(eps))
    forms = assemble(mesh, config.mode, gamma)
    A = robin_form(forms)
    spec = solve_lowest(A, forms.M, config.solver(k_solve))
    return mesh, forms, spec


def _row_fragment(config: ExperimentConfig, eps: float, gamma: float) -> dict:
    return {
        "outer_kind": config.outer_kind,
        "outer_params": list(config.outer_params),
        "hole_shape": config.hole_shape,
        "hole_center": list(config.hole_center),
        "eps": eps,
        "gamma": gamma,
        "bc": config.bc,
        "k": config.k,
        "h": config.h_for(eps),
        "tol": config.tol,
        "seed": config.seed,
    }


def run_sweep(config: ExperimentConfig) -> SweepResult:
    """Per-epsilon solve/compare pipeline with per-row failure isolation."""
    config = config.validate()
    k = config.k
    ref = reference_spectrum(config, k + EXTRA_EIGS + 2)
    ref_values = np.asarray(ref["values"])
    cap = config.window if config.window is not None else window_cap(ref_values, k)
    ref_win = FiniteSpectrumWindow.from_values(ref_values, cap, "oracle")
    ref["window_cap"] = cap

    rows = []
    for i, eps in enumerate(config.epsilons):
        gamma = config.gamma_for(i)
        frag = _row_fragment(config, eps, gamma)
        key = cache_key(frag)
        cached = _cache_load(config.cache_dir, key)
        if cached is not None:
            rows.append(cached)
            continue
        t0 = time.perf_counter()
        try:
            mesh, forms, spec = solve_punctured(config, eps, gamma, k + EXTRA_EIGS)
            pairs = match_with_multiplicity(ref_values, spec.eigenvalues, k)
            fem_win = FiniteSpectrumWindow.from_values(spec.eigenvalues, cap, "FEM")
            db = dbar(ref_win, fem_win)
            row = SweepRow(
                epsilon=eps,
                gamma=gamma,
                n_vertices=mesh.num_vertices,
                n_triangles=mesh.num_triangles,
                h_max=mesh.h_max,
                quality=mesh.quality,
                eigenvalues=[float(v) for v in spec.eigenvalues],
                residual_max=float(spec.residuals.max()),
                errors=[gap for (_, _, gap) in pairs],
                dbar_value=db.value,
                dbar_bias=db.truncation_bias,
                runtime=time.perf_counter() - t0,
            )
        except RobinholeError as err:
            row = SweepRow(
                epsilon=eps, gamma=gamma, n_vertices=0, n_triangles=0,
                h_max=0.0, quality=0.0, eigenvalues=[], residual_max=np.inf,
                errors=[], dbar_value=np.inf, dbar_bias=0.0,
                runtime=time.perf_counter() - t0, failure=str(err),
            )
        _cache_store(config.cache_dir, key, row)
        rows.append(row)

    good = [r for r in rows if r.failure is None]
    per_k_fits = []
    for kk in range(k):
        try:
            slope, intercept, r2 = fit_rate(
                [r.epsilon for r in good], [r.errors[kk] for r in good]
            )
            per_k_fits.append({"k": kk + 1, "slope": slope, "intercept": intercept, "r2": r2})
        except RobinholeError:
            per_k_fits.append({"k": kk + 1, "slope": None, "intercept": None, "r2": None})
    try:
        s, c, r2 = fit_rate([r.epsilon for r in good], [r.dbar_value for r in good])
        dbar_fit = {"slope": s, "intercept": c, "r2": r2}
    except RobinholeError:
        dbar_fit = None

    return SweepResult(
        config=_config_dict(config),
        reference=ref,
        rows=rows,
        per_k_fits=per_k_fits,
        dbar_fit=dbar_fit,
        regime=config.regime,
    )


def run_certification(config: ExperimentConfig,
                      n_random: int = 6) -> list[ClosenessReport]:
    """One closeness report per epsilon (Neumann-outer machinery)."""
    config = config.validate()
    reports = []
    for i, eps in enumerate(config.epsilons):
        gamma = config.gamma_for(i)
        domain = config.punctured(eps)
        pair = matched_mesh_pair(domain, config.h_for(eps))
        lab = ClosenessLab(pair, domain, gamma)
        rect = _bounding_rect(config)
        smooth = standard_smooth_family(rect, tuple(config.hole_center))
        rough = rough_fields(pair.punct, n_random=n_random, seed=config.seed)
        reports.append(certify(lab, smooth, rough))
    return reports


def _bounding_rect(config: ExperimentConfig) -> tuple:
    if config.outer_kind == "rectangle":
        x0, y0, x1, y1 = config.outer_params
        return (x0, x1, y0, y1)
    if config.outer_kind == "disk":
        cx, cy, r = config.outer_params
        s = r / np.sqrt(2.0)
        return (cx - s, cx + s, cy - s, cy + s)
    v = np.asarray(config.outer_params, dtype=float).reshape(-1, 2)
    return (v[:, 0].min(), v[:, 0].max(), v[:, 1].min(), v[:, 1].max())


def _config_dict(config: ExperimentConfig) -> dict:
    d = asdict(config)
    d["epsilons"] = list(config.epsilons)
    d["outer_params"] = list(config.outer_params)
    d["hole_center"] = list(config.hole_center)
    if config.gamma_list is not None:
        d["gamma_list"] = list(config.gamma_list)
    return d


def _cache_load(cache_dir, key):
    if not cache_dir:
        return None
    path = os.path.join(cache_dir, key + ".json")
    if not os.path.exists(path):
        return None
    with open(path) as fh:
        return SweepRow(**json.load(fh))


def _cache_store(cache_dir, key, row: SweepRow) -> None:
    if not cache_dir:
        return
    os.makedirs(cache_dir, exist_ok=True)
    tmp = os.path.join(cache_dir, key + ".tmp")
    with open(tmp, "w") as fh:
        json.dump(asdict(row), fh)
    os.replace(tmp, os.path.join(cache_dir, key + ".json"))


# ---------------------------------------------------------------------------
# outputs
# ---------------------------------------------------------------------------


def write_csv(result: SweepResult, path: str) -> None:
    """One row per epsilon per k; runtime stays out so reruns are byte-identical."""
    lines = ["epsilon,gamma,k,lambda,error,dbar,residual_max"]
    for row in result.rows:
        if row.failure is not None:
            continue
        for kk in range(len(row.errors)):
            lines.append(
                f"{row.epsilon!r},{row.gamma!r},{kk + 1},{row.eigenvalues[kk]!r},"
                f"{row.errors[kk]!r},{row.dbar_value!r},{row.residual_max!r}"
            )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_outputs(result: SweepResult, outdir: str,
                 certificates: list[ClosenessReport] | None = None) -> dict:
    """Write results.csv, results.json, and log-log SVG plots."""
    os.makedirs(outdir, exist_ok=True)
    plots = os.path.join(outdir, "plots")
    os.makedirs(plots, exist_ok=True)
    csv_path = os.path.join(outdir, "results.csv")
    write_csv(result, csv_path)
    json_path = os.path.join(outdir, "results.json")
    with open(json_path, "w") as fh:
        json.dump(result.to_dict(), fh, indent=1)

    good = [r for r in result.rows if r.failure is None]
    written = {"csv": csv_path, "json": json_path, "plots": []}
    if len(good) >= 2:
        eps = np.array([r.epsilon for r in good])
        series = {
            f"k={kk + 1}": [r.errors[kk] for r in good]
            for kk in range(len(good[0].errors))
        }
        notes = [
            f"k={f['k']}: slope {f['slope']:.3f}" for f in result.per_k_fits
            if f["slope"] is not None
        ]
        p = os.path.join(plots, "error_vs_eps.svg")
        loglog_plot(p, eps, series, title="eigenvalue error vs eps",
                    xlabel="eps", ylabel="|lambda_k - lambda_k(ref)|", annotations=notes)
        written["plots"].append(p)
        p = os.path.join(plots, "dbar_vs_eps.svg")
        note = (
            [f"slope {result.dbar_fit['slope']:.3f}"] if result.dbar_fit else []
        )
        loglog_plot(p, eps, {"dbar": [r.dbar_value for r in good]},
                    title="dbar vs eps", xlabel="eps", ylabel="dbar", annotations=note)
        written["plots"].append(p)
    if certificates:
        cert_dir = os.path.join(outdir, "certificates")
        os.makedirs(cert_dir, exist_ok=True)
        for rep in certificates:
            cp = os.path.join(cert_dir, f"eps_{rep.epsilon!r}.json")
            with open(cp, "w") as fh:
                json.dump(rep.to_dict(), fh, indent=1)
        eps = np.array([rep.epsilon for rep in certificates])
        if len(eps) >= 2:
            series = {
                "delta5prime": [rep.delta5prime for rep in certificates],
                "delta6": [rep.delta6 for rep in certificates],
                "delta7": [rep.delta7 for rep in certificates],
                "envelope(5,6)": [rep.envelope_56 for rep in certificates],
            }
            p = os.path.join(plots, "delta_vs_eps.svg")
            loglog_plot(p, eps, series, title="closeness ratios vs eps",
                        xlabel="eps", ylabel="sup ratio")
            written["plots"].append(p)
    return written


def sweep_violations(result: SweepResult) -> list[str]:
    """Theorem-regime assertions: monotone errors and dbar decay."""
    good = [r for r in result.rows if r.failure is None]
    out = []
    for r in result.rows:
        if r.failure is not None:
            out.append(f"eps={r.epsilon}: {r.failure}")
    if len(good) >= 2:
        for kk in range(len(good[0].errors)):
            errs = [r.errors[kk] for r in good]
            if any(a <= b for a, b in zip(errs[:-1], errs[1:])):
                out.append(f"eigenvalue error k={kk + 1} not monotone decreasing: {errs}")
        dvals = [r.dbar_value for r in good]
        if any(a <= b for a, b in zip(dvals[:-1], dvals[1:])):
            out.append(f"dbar not monotone decreasing: {dvals}")
    return out


def certification_violations(reports: list[ClosenessReport]) -> list[str]:
    out = []
    for rep in reports:
        for name, val in (("delta1", rep.delta1), ("delta2", rep.delta2), ("delta3", rep.delta3)):
            if val > 1e-12:
                out.append(f"eps={rep.epsilon}: {name}={val:.2e} above 1e-12")
        if rep.factor_restriction > 2 or rep.factor_extension > 2:
            out.append(f"eps={rep.epsilon}: boundedness factor above 2")
    worst = [max(r.delta5prime, r.delta6, r.delta7) for r in reports]
    if any(a <= b for a, b in zip(worst[:-1], worst[1:])):
        out.append(f"max(delta5', delta6, delta7) not decreasing: {worst}")
    return out


# ---------------------------------------------------------------------------
# config file parsing (key = value sections)
# ---------------------------------------------------------------------------


def load_config(path: str) -> ExperimentConfig:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ConfigError(f"cannot read config file {path}")
    kw = {}
    if cp.has_section("domain"):
        kind = cp.get("domain", "kind", fallback="rectangle")
        kw["outer_kind"] = kind
        if kind == "rectangle":
            kw["outer_params"] = tuple(
                cp.getfloat("domain", key, fallback=d)
                for key, d in (("x0", 0.0), ("y0", 0.0), ("x1", 1.0), ("y1", 1.0))
            )
        elif kind == "disk":
            kw["outer_params"] = (
                cp.getfloat("domain", "cx", fallback=0.0),
                cp.getfloat("domain", "cy", fallback=0.0),
                cp.getfloat("domain", "radius", fallback=1.0),
            )
        else:
            kw["outer_params"] = tuple(
                float(t) for t in cp.get("domain", "vertices").split()
            )
    if cp.has_section("hole"):
        kw["hole_shape"] = cp.get("hole", "shape", fallback="disk")
        kw["hole_center"] = (
            cp.getfloat("hole", "cx", fallback=0.5),
            cp.getfloat("hole", "cy", fallback=0.5),
        )
    if cp.has_section("sweep"):
        if cp.has_option("sweep", "epsilons"):
            kw["epsilons"] = tuple(float(t) for t in cp.get("sweep", "epsilons").split())
        if cp.has_option("sweep", "alpha"):
            kw["alpha"] = cp.getfloat("sweep", "alpha")
        if cp.has_option("sweep", "gamma_list"):
            kw["gamma_list"] = tuple(float(t) for t in cp.get("sweep", "gamma_list").split())
            kw["alpha"] = None
        kw["bc"] = cp.get("sweep", "bc", fallback="neumann")
        kw["k"] = cp.getint("sweep", "k", fallback=5)
        if cp.has_option("sweep", "window"):
            kw["window"] = cp.getfloat("sweep", "window")
        if cp.has_option("sweep", "allow_nonregime"):
            kw["allow_nonregime"] = cp.getboolean("sweep", "allow_nonregime")
    if cp.has_section("mesh"):
        kw["h_coeff"] = cp.getfloat("mesh", "h_coeff", fallback=0.25)
        kw["h_cap"] = cp.getfloat("mesh", "h_cap", fallback=0.02)
        if cp.has_option("mesh", "h_fixed"):
            kw["h_fixed"] = cp.getfloat("mesh", "h_fixed")
    if cp.has_section("solver"):
        kw["tol"] = cp.getfloat("solver", "tol", fallback=1e-9)
        kw["max_iter"] = cp.getint("solver", "max_iter", fallback=400)
        kw["seed"] = cp.getint("solver", "seed", fallback=1234)
    if cp.has_section("output"):
        kw["outdir"] = cp.get("output", "directory", fallback="out")
        if cp.has_option("output", "cache"):
            cache = cp.get("output", "cache")
            kw["cache_dir"] = cache or None
    return ExperimentConfig(**kw)
