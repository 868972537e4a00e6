"""The composed distance ``chi = -d(w(z))`` and the exponential barrier built from it.

Everything here works on arrays of disk points at once. The pointwise
quantities are:

* ``|grad chi|`` from the chain rule with ``grad d = inner normal at the foot``;
* ``Lap chi = kappa/(1 - kappa d) |Dw^T T|^2 - <nu, Lap w>`` where ``T`` and
  ``nu`` are the unit tangent and inner normal at the foot point;
* ``phi = (exp(-A d) - 1)/A`` and ``Lap phi = exp(-A d) (A |grad chi|^2 + Lap chi)``.
"""

import csv
import json
from dataclasses import asdict, dataclass

import numpy as np

from . import errors
from .qc import disk_grid

FD_STEP = 1e-4
SANDWICH_TOL = 1e-9


@dataclass(frozen=True)
class BarrierSpec:
    """Barrier parameters; ``A`` defaults to ``(2 kappa0 + B) K^2``."""

    kappa0: float
    K: float
    B: float = 0.0
    A: float = None

    def __post_init__(self):
        if self.A is None:
            object.__setattr__(self, "A", (2 * self.kappa0 + self.B) * self.K ** 2)

    @property
    def collar_bound(self):
        return 1.0 / (2 * self.kappa0)

    @property
    def A_required(self):
        return (2 * self.kappa0 + self.B) * self.K ** 2

    @property
    def A_sufficient(self):
        return self.A >= self.A_required

    def g(self, t):
        return -1.0 / self.A + np.exp(self.A * t) / self.A

    def to_dict(self):
        return {"A": self.A, "B": self.B, "kappa0": self.kappa0, "K": self.K,
                "collar_bound": self.collar_bound, "A_required": self.A_required}


def _local(map_, field, z, laplacian_w=None):
    """Pointwise map derivatives and foot-point frame for arrays of disk points."""
    z = np.asarray(z, dtype=complex)
    w = map_.eval(z)
    g = map_.gradient(z)
    d, t, amb = field.query(w)
    _, T, nu, kappa = field.curve.frame_t(t)
    # |grad <n, w>| = |conj(n) w_z + n conj(w_zbar)| for a fixed unit vector n
    grad_chi = np.abs(np.conj(nu) * g.wz + nu * np.conj(g.wzbar))
    tangential = np.abs(np.conj(T) * g.wz + T * np.conj(g.wzbar))
    lap_w = map_.laplacian(z) if laplacian_w is None else np.asarray(laplacian_w(z), dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        lap_chi = kappa / (1 - kappa * d) * tangential ** 2 - (np.conj(nu) * lap_w).real
    return {"z": z, "w": w, "wz": g.wz, "wzbar": g.wzbar, "grad_w": g.grad_norm,
            "l_w": g.l_norm, "d": d, "t": t, "ambiguous": amb, "kappa": kappa,
            "grad_chi": grad_chi, "tangential": tangential, "lap_chi": lap_chi}


def _fd_laplacian(map_, field, z, t_hint, h):
    """Five-point Laplacian of ``chi`` using signed distance, seeded at the centre's foot."""
    total = -4 * (-field.query(map_.eval(z), t_hint=t_hint)[0])
    for step in (h, -h, 1j * h, -1j * h):
        total = total - field.query(map_.eval(z + step), t_hint=t_hint)[0]
    return total / h ** 2


def _single(z):
    return np.array([complex(z)])


def chi(map_, field, z):
    """``-d(w(z))``; raises :class:`OutsideDomain` if ``w(z)`` leaves the target domain."""
    d, _, _ = field.query(map_.eval(_single(z)))
    if d[0] < -1e-12:
        raise errors.OutsideDomain(f"w({complex(z)}) lies outside the target curve", witness=complex(z))
    return -max(float(d[0]), 0.0)


def _admissible(loc, z):
    if loc["ambiguous"][0]:
        raise errors.AmbiguousFoot(f"w({z}) has several nearest boundary points", witness=complex(z))
    if loc["d"][0] <= 0:
        raise errors.OutsideDomain(f"w({z}) is not inside the target curve", witness=complex(z))


@dataclass
class SandwichResult:
    grad_chi: float
    grad_w: float
    passed: bool


def gradient_sandwich(map_, field, z, K):
    """``|grad chi| <= |grad w| <= K |grad chi|`` at one point, tolerance 1e-9."""
    loc = _local(map_, field, _single(z))
    _admissible(loc, z)
    gc, gw = float(loc["grad_chi"][0]), float(loc["grad_w"][0])
    ok = gc <= gw + SANDWICH_TOL and gw <= K * gc + SANDWICH_TOL
    return SandwichResult(gc, gw, bool(ok))


def laplacian_chi(map_, field, z, h=FD_STEP, laplacian_w=None):
    """``(formula value, finite-difference value)`` of ``Lap chi`` at ``z``."""
    loc = _local(map_, field, _single(z), laplacian_w)
    _admissible(loc, z)
    k, d = loc["kappa"][0], loc["d"][0]
    if 1 - k * d <= 0:
        raise errors.SingularCollar(f"1 - kappa*d = {1 - k * d:.3g} <= 0", witness=complex(z))
    fd = _fd_laplacian(map_, field, loc["z"], loc["t"], h)
    return float(loc["lap_chi"][0]), float(fd[0])


def barrier(map_, field, spec, z, laplacian_w=None):
    """``(phi_w, Lap phi_w)`` at ``z``."""
    loc = _local(map_, field, _single(z), laplacian_w)
    _admissible(loc, z)
    e = np.exp(-spec.A * loc["d"][0])
    phi = (e - 1) / spec.A
    lap = e * (spec.A * loc["grad_chi"][0] ** 2 + loc["lap_chi"][0])
    return float(phi), float(lap)


@dataclass
class BarrierAudit:
    """Per-point collar data plus the summary the certifier consumes."""

    spec: BarrierSpec
    points: dict
    passed: bool
    n_points: int
    min_lap_phi: float
    max_abs_lap_phi: float
    witness: complex
    sandwich_pass_fraction: float
    sandwich_failures: int
    sandwich_witness: complex
    fd_rel_max: float
    fd_frac_below_5e4: float
    fd_step_spread_max: float
    delc_ratio_max: float
    phi_max: float
    grid: tuple

    def summary(self):
        out = {k: v for k, v in asdict(self).items() if k not in ("points", "spec")}
        out["spec"] = self.spec.to_dict()
        out["grid"] = list(self.grid)
        for key in ("witness", "sandwich_witness"):
            v = out[key]
            out[key] = None if v is None else [v.real, v.imag]
        return out

    def write_csv(self, path):
        cols = ["x", "y", "chi", "grad_chi", "grad_w", "lap_chi_formula", "lap_chi_fd",
                "phi", "lap_phi", "sandwich_ok"]
        p = self.points
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(cols)
            for row in zip(p["z"].real, p["z"].imag, p["chi"], p["grad_chi"], p["grad_w"],
                           p["lap_chi"], p["lap_chi_fd"], p["phi"], p["lap_phi"], p["sandwich_ok"]):
                out.writerow([repr(float(v)) for v in row[:-1]] + [int(row[-1])])

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)


def collar_points(map_, field, spec, grid=(64, 1024), laplacian_w=None, h=FD_STEP):
    """Interior grid points whose image lies in ``{0 < d < 1/(2 kappa0)}`` with a unique foot."""
    z = disk_grid(*grid, boundary=False).ravel()
    z = z[np.abs(z) <= 1 - 2 * h]
    loc = _local(map_, field, z, laplacian_w)
    keep = (loc["d"] > 0) & (loc["d"] < spec.collar_bound) & ~loc["ambiguous"]
    return {k: v[keep] for k, v in loc.items()}


def audit_subharmonicity(map_, field, spec, grid=(64, 1024), h=FD_STEP, laplacian_w=None):
    """Evaluate ``Lap phi_w`` (and the checks feeding it) over the collar preimage.

    Passes iff ``min Lap phi_w >= -1e-8 (1 + max |Lap phi_w|)``. The sandwich
    and formula-versus-finite-difference statistics are recorded alongside.
    """
    p = collar_points(map_, field, spec, grid, laplacian_w, h)
    n = len(p["z"])
    if n == 0:
        raise errors.EmptyCollar(f"no {grid[0]}x{grid[1]} grid point maps into the collar")
    A = spec.A
    e = np.exp(-A * p["d"])
    p["chi"] = -p["d"]
    p["phi"] = (e - 1) / A
    p["lap_phi"] = e * (A * p["grad_chi"] ** 2 + p["lap_chi"])
    p["lap_chi_fd"] = _fd_laplacian(map_, field, p["z"], p["t"], h)
    fd_half = _fd_laplacian(map_, field, p["z"], p["t"], h / 2)
    rel = np.abs(p["lap_chi"] - p["lap_chi_fd"]) / (1 + np.abs(p["lap_chi"]))
    ok = (p["grad_chi"] <= p["grad_w"] + SANDWICH_TOL) & (p["grad_w"] <= spec.K * p["grad_chi"] + SANDWICH_TOL)
    p["sandwich_ok"] = ok
    delc = np.abs(p["lap_chi"]) / (spec.A_required * p["grad_chi"] ** 2)

    lap = p["lap_phi"]
    jmin = int(np.argmin(lap))
    floor = -1e-8 * (1 + float(np.max(np.abs(lap))))
    bad = np.flatnonzero(~ok)
    return BarrierAudit(
        spec=spec, points=p, passed=bool(lap[jmin] >= floor), n_points=n,
        min_lap_phi=float(lap[jmin]), max_abs_lap_phi=float(np.max(np.abs(lap))),
        witness=complex(p["z"][jmin]),
        sandwich_pass_fraction=float(ok.mean()), sandwich_failures=int(bad.size),
        sandwich_witness=complex(p["z"][bad[0]]) if bad.size else None,
        fd_rel_max=float(rel.max()), fd_frac_below_5e4=float(np.mean(rel < 5e-4)),
        fd_step_spread_max=float(np.max(np.abs(p["lap_chi_fd"] - fd_half) / (1 + np.abs(p["lap_chi"])))),
        delc_ratio_max=float(delc.max()), phi_max=float(p["phi"].max()), grid=tuple(grid))
