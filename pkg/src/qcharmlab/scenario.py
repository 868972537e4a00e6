"""Scenario files and the end-to-end certification run.

A scenario is a JSON object (TOML is accepted with the same keys)::

    {
      "schema_version": 1,
      "name": "unit_disk_identity",
      "curve": {"shape": "circle", "radius": 1.0},
      "boundary": {"type": "correspondence", "phase": "uniform"},
      "N": 1024,
      "grids": {"qc": [64, 1024], "barrier": [64, 1024], "pairs": 100000},
      "B": 0.0,
      "seed": 0,
      "outputs": ["audit", "field", "map", "plots"]
    }

Curve specs: ``{"shape": "circle"|"ellipse"|"polar"|"image", ...}``,
``{"points": [[x, y], ...]}`` or ``{"path": "file"}``. Boundary specs:
``{"type": "correspondence", "phase": "uniform"|"perturbed_uniform"|
"tabulated"|"native", ...}``, ``{"type": "affine", "k": ..., "rotation": ...}``
or ``{"type": "coefficients", "terms": [[n, re, im], ...]}``.
"""

import json
import re
import time
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import errors, plots
from .barrier import BarrierSpec, audit_subharmonicity
from .curves import DistanceField, JordanCurve, load_curve
from .harmonic import BoundaryCorrespondence, HarmonicMap, poisson_extend
from .lipschitz import boundary_colip, hopf_bound, interior_extension, lipschitz_report
from .qc import (MIN_GRID, certify_diffeomorphism, check_qc_inequality, dilatation_profile,
                 disk_grid, moebius_normalize)

SCHEMA_VERSION = 1
MIN_N = 64
MIN_PAIRS = 10_000
OUTPUT_KINDS = ("audit", "field", "map", "plots")
DEFAULTS = {
    "N": 1024,
    "grids": {"qc": [64, 1024], "barrier": [64, 1024], "pairs": 100_000},
    "B": 0.0,
    "seed": 0,
    "normalize": False,
    "outputs": list(OUTPUT_KINDS),
}
ALIASES = {"identity": "unit_disk_identity"}
STAGES = ("build", "extend", "certify", "qc", "barrier", "hopf", "boundary", "interior", "empirical")
_NAME = re.compile(r"^[A-Za-z0-9_.-]+$")


# -- loading and validation ---------------------------------------------------

def bundled_dir():
    return resources.files("qcharmlab") / "scenarios"


def list_scenarios():
    """Names of the bundled scenarios, sorted."""
    return sorted(p.name[:-5] for p in bundled_dir().iterdir() if p.name.endswith(".json"))


def resolve(path):
    """A config path, or the name of a bundled scenario."""
    p = Path(path)
    if p.exists():
        return p
    name = ALIASES.get(str(path), str(path))
    candidate = bundled_dir() / f"{name}.json"
    if candidate.is_file():
        return Path(str(candidate))
    raise errors.ConfigError(f"no such config file or bundled scenario: {path}")


def read_config(path):
    """Parse a JSON or TOML config into a dict (no schema checks)."""
    p = resolve(path)
    text = p.read_text()
    try:
        if p.suffix == ".toml":
            try:
                import tomllib
            except ModuleNotFoundError:
                import tomli as tomllib
            data = tomllib.loads(text)
        else:
            data = json.loads(text)
    except ValueError as exc:
        raise errors.ConfigError(f"{p}: cannot parse config: {exc}") from exc
    if not isinstance(data, dict):
        raise errors.ConfigError(f"{p}: config must be an object")
    data.setdefault("_base", str(p.parent))
    return data


def _is_grid(g):
    return (isinstance(g, (list, tuple)) and len(g) == 2
            and all(isinstance(v, int) and not isinstance(v, bool) for v in g))


def _check_curve(c, out):
    if not isinstance(c, dict):
        out.append("curve must be an object")
        return
    keys = [k for k in ("shape", "points", "path") if k in c]
    if len(keys) != 1:
        out.append("curve needs exactly one of shape, points, path")
        return
    if c.get("kind", "trig_poly") not in ("trig_poly", "periodic_spline"):
        out.append(f"unknown curve kind {c.get('kind')!r}")
    if "shape" in c:
        shape = c["shape"]
        if shape not in ("circle", "ellipse", "polar", "image"):
            out.append(f"unknown curve shape {shape!r}")
        if shape == "ellipse" and not (c.get("a", 0) > 0 and c.get("b", 0) > 0):
            out.append("ellipse needs positive a and b")
        if shape == "circle" and not c.get("radius", 1.0) > 0:
            out.append("circle radius must be positive")
        if c.get("n", 256) < 8:
            out.append("curve n below minimum 8")
    elif "points" in c and len(c["points"]) < 8:
        out.append("curve points below minimum 8")


def _flat_phase(b):
    # {"phase": {"kind": "uniform", ...}} is the same as {"phase": "uniform", ...}
    if isinstance(b.get("phase"), dict):
        inner = dict(b["phase"])
        return {**b, **inner, "phase": inner.get("kind")}
    return b


def _check_boundary(b, curve, out):
    if not isinstance(b, dict):
        out.append("boundary must be an object")
        return
    kind = b.get("type")
    if kind == "correspondence":
        b = _flat_phase(b)
        phase = b.get("phase")
        if phase not in ("uniform", "perturbed_uniform", "tabulated", "native"):
            out.append(f"unknown correspondence phase {phase!r}")
        if phase == "perturbed_uniform" and ("eps" not in b or "m" not in b):
            out.append("perturbed_uniform needs eps and m")
        if phase == "tabulated" and ("theta" not in b or "s" not in b):
            out.append("tabulated needs theta and s")
        if isinstance(curve, dict) and curve.get("shape") == "image":
            out.append("a correspondence needs an explicit target curve")
    elif kind == "affine":
        if "k" not in b:
            out.append("affine boundary needs k")
    elif kind == "coefficients":
        terms = b.get("terms")
        if not terms or not all(isinstance(t, (list, tuple)) and len(t) == 3 for t in terms):
            out.append("coefficients need terms [[n, re, im], ...]")
    else:
        out.append(f"unknown boundary type {kind!r}")


def diagnostics(cfg):
    """Schema findings for a parsed config; an empty list means valid."""
    out = []
    if cfg.get("schema_version") != SCHEMA_VERSION:
        out.append(f"schema_version must be {SCHEMA_VERSION}")
    name = cfg.get("name")
    if not isinstance(name, str) or not _NAME.match(name):
        out.append("name must be a nonempty filesystem-safe string")
    for key in ("curve", "boundary"):
        if key not in cfg:
            out.append(f"missing {key}")
    if "curve" in cfg:
        _check_curve(cfg["curve"], out)
    if "boundary" in cfg:
        _check_boundary(cfg["boundary"], cfg.get("curve"), out)
    N = cfg.get("N", DEFAULTS["N"])
    if not isinstance(N, int) or isinstance(N, bool):
        out.append("N must be an integer")
    elif N < MIN_N:
        out.append(f"N below minimum {MIN_N}")
    elif N & (N - 1):
        out.append("N must be a power of two")
    grids = cfg.get("grids", {})
    if not isinstance(grids, dict):
        out.append("grids must be an object")
        grids = {}
    for key in ("qc", "barrier"):
        g = grids.get(key, DEFAULTS["grids"][key])
        if not _is_grid(g):
            out.append(f"grids.{key} must be [radial, angular]")
        elif g[0] < MIN_GRID[0] or g[1] < MIN_GRID[1]:
            out.append(f"grids.{key} below minimum {MIN_GRID[0]}x{MIN_GRID[1]}")
    pairs = grids.get("pairs", DEFAULTS["grids"]["pairs"])
    if not isinstance(pairs, int) or pairs < MIN_PAIRS:
        out.append(f"grids.pairs below minimum {MIN_PAIRS}")
    B = cfg.get("B", 0.0)
    if not isinstance(B, (int, float)) or B < 0:
        out.append("B must be a nonnegative number")
    if not isinstance(cfg.get("seed", 0), int):
        out.append("seed must be an integer")
    bad = [o for o in cfg.get("outputs", []) if o not in OUTPUT_KINDS]
    if bad:
        out.append(f"unknown outputs {bad}")
    known = {"schema_version", "name", "curve", "boundary", "N", "grids", "B", "seed",
             "normalize", "outputs", "description", "_base"}
    extra = sorted(set(cfg) - known)
    if extra:
        out.append(f"unknown keys {extra}")
    return out


def validate(path):
    """Schema diagnostics for a config file; raises ConfigError if it cannot be parsed."""
    return diagnostics(read_config(path))


def load_scenario(path, seed=None, qc_grid=None):
    """Parse and validate; returns the config with defaults filled in.

    ``seed`` and ``qc_grid`` override the config values when given.
    """
    cfg = read_config(path)
    if qc_grid is not None:
        cfg["grids"] = {**cfg.get("grids", {}), "qc": [int(qc_grid[0]), int(qc_grid[1])]}
    found = diagnostics(cfg)
    if found:
        raise errors.ConfigError("; ".join(found), witness=found)
    full = {**DEFAULTS, **cfg}
    full["grids"] = {**DEFAULTS["grids"], **cfg.get("grids", {})}
    if seed is not None:
        full["seed"] = int(seed)
    return full


# -- building -------------------------------------------------------------------

def _curve_points(spec, boundary_map):
    n = int(spec.get("n", 256))
    t = 2 * np.pi * np.arange(n) / n
    c = complex(*spec.get("center", (0.0, 0.0)))
    shape = spec["shape"]
    if shape == "circle":
        return c + spec.get("radius", 1.0) * np.exp(1j * t)
    if shape == "ellipse":
        return c + spec["a"] * np.cos(t) + 1j * spec["b"] * np.sin(t)
    if shape == "polar":
        r = np.full(n, float(spec.get("r0", 1.0)))
        for m, amp, *phase in spec.get("terms", []):
            r = r + spec.get("r0", 1.0) * amp * np.cos(m * t + (phase[0] if phase else 0.0))
        return c + r * np.exp(1j * t)
    return boundary_map.boundary_values(t)


def build_map(cfg):
    """``(curve, map)`` for a loaded scenario."""
    cspec, bspec = cfg["curve"], cfg["boundary"]
    direct = None
    if bspec["type"] == "affine":
        direct = HarmonicMap.affine(bspec["k"], bspec.get("rotation", 0.0),
                                    complex(*bspec.get("shift", (0.0, 0.0))))
    elif bspec["type"] == "coefficients":
        direct = HarmonicMap.from_json(bspec["terms"])

    kind = cspec.get("kind", "trig_poly")
    if "path" in cspec:
        curve = load_curve(Path(cfg.get("_base", ".")) / cspec["path"], cspec.get("kind"))
    elif "points" in cspec:
        curve = JordanCurve(np.asarray(cspec["points"], float), kind)
    else:
        if cspec["shape"] == "image" and direct is None:
            raise errors.ConfigError("curve shape 'image' needs an affine or coefficients boundary")
        curve = JordanCurve(_curve_points(cspec, direct), kind)

    if direct is not None:
        direct.curve = curve
        return curve, direct
    bspec = _flat_phase(bspec)
    phase = bspec["phase"]
    offset = bspec.get("offset", 0.0)
    if phase == "uniform":
        corr = BoundaryCorrespondence.uniform(curve, offset)
    elif phase == "perturbed_uniform":
        corr = BoundaryCorrespondence.perturbed_uniform(curve, bspec["eps"], bspec["m"], offset)
    elif phase == "tabulated":
        corr = BoundaryCorrespondence.tabulated(curve, bspec["theta"], bspec["s"])
    else:
        corr = BoundaryCorrespondence.native(curve, offset)
    if not corr.is_monotone():
        raise errors.NotHomeomorphism("boundary phase map is not monotone")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", errors.AliasWarning)
        w = poisson_extend(corr, cfg["N"])
    w.alias_warnings = [str(c.message) for c in caught if issubclass(c.category, errors.AliasWarning)]
    return curve, w


# -- the run ------------------------------------------------------------------

def _clean(v):
    """JSON-ready copy: numpy scalars unwrapped, complex as ``[re, im]``, non-finite as strings."""
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_clean(x) for x in v.tolist()]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [_clean(float(v.real)), _clean(float(v.imag))]
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if np.isfinite(v) else repr(v)
    return v


@dataclass
class RunReport:
    """Everything a run produced; ``timings`` stay out of ``report.json``."""

    scenario: dict
    stages: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)

    @property
    def errors(self):
        return {k: v["error"] for k, v in self.stages.items() if v["status"] == "error"}

    @property
    def passed(self):
        return not self.errors and bool(self.checks) and all(self.checks.values())

    @property
    def exit_code(self):
        return 0 if self.passed else 1

    def to_dict(self):
        scenario = {k: v for k, v in self.scenario.items() if k != "_base"}
        return _clean({
            "schema_version": SCHEMA_VERSION,
            "scenario": scenario,
            "stages": self.stages,
            "checks": self.checks,
            "values": self.values,
            "passed": self.passed,
            "exit_code": self.exit_code,
        })

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def summary_table(self):
        rows = [f"run {self.scenario['name']}  seed {self.scenario['seed']}",
                f"{'stage':<10} {'status':<8} {'seconds':>8}"]
        for name in STAGES:
            st = self.stages.get(name, {"status": "skipped"})
            note = f"  {st['error']['error']}: {st['error']['message']}" if st["status"] == "error" else ""
            rows.append(f"{name:<10} {st['status']:<8} {self.timings.get(name, 0.0):8.2f}{note}")
        v = self.values
        cols = ["scenario", "K", "kappa0", "A", "rho", "M(rho)", "C", "C/K", "emp_colip", "margin"]
        vals = [v.get(k) for k in ("K", "kappa0", "A", "rho", "M_rho", "boundary_bound",
                                   "theoretical_colip", "empirical_colip")]
        margin = (v["empirical_colip"] - v["theoretical_colip"]
                  if "empirical_colip" in v and "theoretical_colip" in v else None)
        cells = [self.scenario["name"]] + ["-" if x is None else f"{x:.6g}" for x in vals + [margin]]
        width = max(len(c) for c in cells + cols) + 1
        rows += ["", "".join(c.ljust(width) for c in cols).rstrip(),
                 "".join(c.ljust(width) for c in cells).rstrip(), ""]
        for key, val in v.items():
            rows.append(f"{key:<22} {val!r}")
        rows.append("")
        for key, ok in self.checks.items():
            rows.append(f"{'PASS' if ok else 'FAIL'}  {key}")
        rows.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(rows) + "\n"


class _Runner:
    def __init__(self, report):
        self.report = report
        self.halted = False

    def stage(self, name, func):
        if self.halted:
            self.report.stages[name] = {"status": "skipped"}
            return None
        t0 = time.perf_counter()
        try:
            result = func()
        except errors.QcHarmError as exc:
            self.report.stages.setdefault(name, {}).update(status="error", error=exc.to_dict())
            self.halted = True
            result = None
        else:
            self.report.stages.setdefault(name, {})["status"] = "ok"
        self.report.timings[name] = time.perf_counter() - t0
        return result


def execute(cfg):
    """Run every stage for a loaded config; returns ``(report, artifacts)``."""
    report = RunReport(scenario=cfg)
    run = _Runner(report)
    art = {}
    st, chk, val = report.stages, report.checks, report.values

    built = run.stage("build", lambda: build_map(cfg))
    if built is not None:
        curve, w = built
        fieldobj = DistanceField(curve)
        art.update(curve=curve, field=fieldobj)
        st["build"].update(length=curve.length, kappa0=fieldobj.kappa0, reach=fieldobj.reach_mu,
                           curve_kind=curve.kind, reversed_input=curve.reversed_input)
        val["kappa0"] = fieldobj.kappa0

    def extend():
        out = moebius_normalize(w) if cfg["normalize"] else w
        return out

    w = run.stage("extend", extend)
    if w is not None:
        art["map"] = w
        st["extend"].update(degree=w.degree, N=w.N, boundary_tail=w.boundary_tail(),
                            alias_warnings=getattr(built[1], "alias_warnings", []))
        if getattr(w, "automorphism", None) is not None:
            st["extend"]["automorphism"] = {"alpha": w.automorphism.alpha, "a": w.automorphism.a}

    def certify():
        cert = certify_diffeomorphism(w)
        st["certify"] = cert.to_dict()
        val["min_boundary_jacobian"] = cert.min_jacobian
        chk["diffeomorphism"] = cert.certified
        if not cert.certified:
            # keep the dilatation picture of the rejected map for debugging
            art["qc"] = dilatation_profile(w, tuple(cfg["grids"]["qc"]), strict=False)
            st["qc"] = {"status": "partial", **art["qc"].to_dict()}
            raise errors.OrientationFailure(
                f"boundary Jacobian {cert.min_jacobian:.9g} <= 0 at theta = {cert.argmin_theta:.6f}",
                witness=cert.argmin_theta)
        return cert

    run.stage("certify", certify)

    def qc():
        prof = dilatation_profile(w, tuple(cfg["grids"]["qc"]))
        ineq = check_qc_inequality(w, prof.K_global, prof.grid)
        art["qc"] = prof
        st["qc"] = {**prof.to_dict(), "qc_inequality_ratio": ineq.worst_ratio}
        val["K"] = prof.K_global
        chk["qc_inequality"] = ineq.passed
        chk["qc_converged"] = prof.converged
        return prof

    prof = run.stage("qc", qc) if "qc" not in st else None

    def barrier():
        spec = BarrierSpec(fieldobj.kappa0, prof.K_global, float(cfg["B"]))
        audit = audit_subharmonicity(w, fieldobj, spec, tuple(cfg["grids"]["barrier"]))
        art.update(spec=spec, audit=audit)
        st["barrier"] = {**audit.summary()}
        val["A"] = spec.A
        chk["barrier_subharmonic"] = audit.passed
        chk["gradient_sandwich"] = audit.sandwich_failures == 0
        chk["laplacian_formula_vs_fd"] = audit.fd_frac_below_5e4 >= 0.99 and audit.fd_rel_max < 5e-3
        return audit

    audit = run.stage("barrier", barrier)

    def hopf():
        cert = hopf_bound(w, fieldobj, art["spec"], audit)
        art["hopf"] = cert
        st["hopf"] = {**cert.to_dict()}
        val.update(rho=cert.rho, M_rho=cert.M_rho, hopf_constant=cert.hopf_constant)
        chk["hopf_boundary_derivative"] = cert.hopf_verified
        return cert

    cert = run.stage("hopf", hopf)

    def boundary():
        bb = boundary_colip(w, fieldobj, art["spec"], cert)
        st["boundary"] = {**bb.to_dict()}
        val["boundary_bound"] = bb.value
        chk["boundary_radial_bound"] = True
        return bb

    bb = run.stage("boundary", boundary)

    def interior():
        ib = interior_extension(w, bb.value, prof.K_global, tuple(cfg["grids"]["qc"]))
        art["interior"] = ib
        st["interior"] = {"theoretical_colip": ib.theoretical_colip,
                          "ab_check": ib.ab_check, "ab_witness": ib.ab_witness,
                          "min_l_norm": ib.min_l_norm, "grid": ib.grid}
        val.update(theoretical_colip=ib.theoretical_colip, ab_check=ib.ab_check)
        chk["max_principle"] = ib.ab_check <= 1 + 1e-8
        return ib

    ib = run.stage("interior", interior)

    def empirical():
        rep = lipschitz_report(w, ib, cfg["grids"]["pairs"], cfg["seed"])
        st["empirical"] = {**rep.to_dict()}
        val.update(empirical_lip=rep.empirical_lip, empirical_colip=rep.empirical_colip)
        chk["theorem_instance"] = rep.theorem_holds
        return rep

    run.stage("empirical", empirical)
    for name in STAGES:
        st.setdefault(name, {"status": "skipped"})
    return report, art


def write_artifacts(report, art, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    outputs = report.scenario.get("outputs", [])
    (out / "report.json").write_text(report.to_json())
    (out / "timings.json").write_text(json.dumps(report.timings, indent=2, sort_keys=True) + "\n")
    (out / "summary.txt").write_text(report.summary_table())
    if "audit" in outputs and "audit" in art:
        art["audit"].write_csv(out / "audit.csv")
        art["audit"].write_json(out / "audit.json")
    if "field" in outputs and "map" in art:
        pts = art["map"].eval(disk_grid(32, 256, boundary=False).ravel())
        art["field"].dump_csv(out / "field.csv", pts)
    if "map" in outputs and "map" in art:
        art["map"].dump(out / "map.json")
    if "plots" in outputs and "map" in art:
        (out / "plots").mkdir(exist_ok=True)
        plots.circle_images(art["map"], art.get("curve"), out / "plots" / "circles.svg")
        if "audit" in art:
            plots.lap_phi_heatmap(art["audit"], out / "plots" / "lap_phi.svg")


def run_scenario(path, out_dir=None, seed=None, qc_grid=None):
    """Load, run and (if ``out_dir`` is given) write artifacts; returns ``(report, exit_code)``."""
    cfg = load_scenario(path, seed, qc_grid)
    report, art = execute(cfg)
    if out_dir is not None:
        write_artifacts(report, art, out_dir)
    return report, report.exit_code
