"""Dilatation of harmonic maps, Jacobian certification and Moebius normalization."""

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import errors
from .harmonic import BoundaryCorrespondence, poisson_extend

MIN_GRID = (32, 256)


def disk_grid(radial, angular, boundary=True):
    """Polar grid with radii ``sin(pi/2 * i/radial)``, clustered toward ``|z| = 1``.

    ``boundary=True`` includes the unit circle as the last row; otherwise the
    rows stop at ``i = radial - 1``. Doubling both resolutions nests the grid.
    """
    i = np.arange(1, radial + 1 if boundary else radial)
    r = np.sin(0.5 * np.pi * i / radial)
    theta = 2 * np.pi * np.arange(angular) / angular
    return r[:, None] * np.exp(1j * theta)[None, :]


def _check_grid(grid):
    R, A = grid
    if R < MIN_GRID[0] or A < MIN_GRID[1]:
        raise ValueError(f"grid {R}x{A} below minimum {MIN_GRID[0]}x{MIN_GRID[1]}")


@dataclass
class QcProfile:
    K_global: float
    k_global: float
    K_boundary: float
    min_boundary_jacobian: float
    argmin_boundary_theta: float
    certified: bool
    grid: tuple
    witness: complex
    refinements: list = field(default_factory=list)
    converged: bool = True

    def to_dict(self):
        out = asdict(self)
        out["grid"] = list(self.grid)
        out["witness"] = [self.witness.real, self.witness.imag]
        return out


def _profile_at(map_, R, A, strict=True):
    z = np.concatenate([[0j], disk_grid(R, A).ravel()])
    g = map_.gradient(z)
    J = g.jacobian
    scale = max(1.0, float(np.max(g.grad_norm)))
    bad = (J <= 0) | (np.abs(g.wz) <= 1e-12 * scale)
    if bad.any() and strict:
        j = int(np.argmin(np.where(bad, J, np.inf)))
        raise errors.OrientationFailure(
            f"Jacobian {J[j]:.6g} <= 0 at z = {z[j]:.6g}", witness=complex(z[j]))
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.where(bad, np.inf, np.abs(g.wzbar) / np.abs(g.wz))
        K = np.where(bad, np.inf, g.grad_norm / g.l_norm)
    boundary = slice(len(z) - A, len(z))
    jb = int(np.argmin(J[boundary]))
    return {
        "K_global": float(K.max()),
        "k_global": float(k.max()),
        "K_boundary": float(K[boundary].max()),
        "min_boundary_jacobian": float(J[boundary][jb]),
        "argmin_boundary_theta": float(2 * np.pi * jb / A),
        "witness": complex(z[int(np.argmax(K))]),
    }


def dilatation_profile(map_, grid=(64, 1024), refine=True, tol=1e-3, max_doublings=2, strict=True):
    """Grid maxima of the pointwise dilatation ``(|w_z|+|w_zbar|)/(|w_z|-|w_zbar|)``.

    The grid is doubled until ``K_global`` moves by less than ``tol`` (at most
    ``max_doublings`` times); ``converged`` records whether that happened.
    Raises :class:`~qcharmlab.errors.OrientationFailure` if ``J <= 0`` anywhere,
    unless ``strict=False``, which reports ``K = inf`` there instead (for
    debugging a rejected map) without refining.
    """
    _check_grid(grid)
    R, A = grid
    cur = _profile_at(map_, R, A, strict)
    if not np.isfinite(cur["K_global"]):
        return QcProfile(certified=False, grid=(R, A), refinements=[[R, A, cur["K_global"]]],
                         converged=False, **cur)
    history = [[R, A, cur["K_global"]]]
    converged = not refine
    for _ in range(max_doublings if refine else 0):
        R, A = 2 * R, 2 * A
        nxt = _profile_at(map_, R, A)
        history.append([R, A, nxt["K_global"]])
        done = abs(nxt["K_global"] - cur["K_global"]) < tol
        cur = nxt
        if done:
            converged = True
            break
    return QcProfile(certified=cur["min_boundary_jacobian"] > 1e-10, grid=(R, A),
                     refinements=history, converged=converged, **cur)


@dataclass
class QcCheck:
    passed: bool
    worst_ratio: float
    worst_point: complex


def check_qc_inequality(map_, K, grid=(64, 1024)):
    """Check ``|grad w|^2 <= K J`` on the grid (with a 1e-12 absolute slack)."""
    if K < 1:
        raise ValueError("K must be >= 1")
    z = np.concatenate([[0j], disk_grid(*grid).ravel()])
    g = map_.gradient(z)
    lhs, J = g.grad_norm ** 2, g.jacobian
    with np.errstate(divide="ignore"):
        ratio = np.where(J > 0, lhs / np.where(J > 0, J, 1), np.inf)
    j = int(np.argmax(ratio))
    return QcCheck(bool(np.all(lhs <= K * J + 1e-12)), float(ratio[j]), complex(z[j]))


@dataclass
class DiffeoCertificate:
    certified: bool
    min_jacobian: float
    argmin_theta: float
    samples: int

    def to_dict(self):
        return asdict(self)


def certify_diffeomorphism(map_, boundary_samples=4096):
    """Certify a harmonic extension as a diffeomorphism from ``J > 0`` on the circle."""
    corr = map_.correspondence
    if corr is not None and not corr.is_monotone():
        raise errors.NotHomeomorphism("boundary phase map is not monotone")
    theta = 2 * np.pi * np.arange(boundary_samples) / boundary_samples
    J = map_.gradient(np.exp(1j * theta)).jacobian
    j = int(np.argmin(J))
    return DiffeoCertificate(bool(J[j] > 1e-10), float(J[j]), float(theta[j]), boundary_samples)


@dataclass(frozen=True)
class DiskAutomorphism:
    """``phi(z) = e^{i alpha} (z - a) / (1 - conj(a) z)``."""

    alpha: float
    a: complex

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.exp(1j * self.alpha) * (z - self.a) / (1 - np.conj(self.a) * z)

    def boundary_angle(self, theta):
        """Continuous lift of ``arg phi(e^{i theta})``."""
        theta = np.asarray(theta, dtype=float)
        return self.alpha + theta - 2 * np.angle(1 - np.conj(self.a) * np.exp(1j * theta))

    @classmethod
    def from_three_points(cls, x, y):
        """Automorphism sending the circle points ``x[k]`` to ``y[k]`` (same cyclic order)."""
        M = np.linalg.solve(_cross_ratio_matrix(*y), _cross_ratio_matrix(*x))
        (p, q), (_, s) = M
        return cls(float(np.angle(p / s)), complex(-q / p))


def _cross_ratio_matrix(x1, x2, x3):
    return np.array([[x2 - x3, -x1 * (x2 - x3)], [x2 - x1, -x3 * (x2 - x1)]], dtype=complex)


def boundary_arc_position(map_, theta):
    """Arc-length position on the target curve of ``w(e^{i theta})``, modulo the length."""
    curve = map_.curve
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if map_.correspondence is not None:
        s = map_.correspondence.phase(theta)
    else:
        t, _, _ = curve.nearest(map_.boundary_values(theta))
        s = curve.arclength_of(t)
    return np.mod(s, curve.length)


def moebius_normalize(map_, anchor="curve_origin", N=None):
    """Precompose with the disk automorphism that makes ``map_`` normalized.

    The three cube roots of unity are sent to boundary points splitting the
    target curve into arcs of length ``L/3``. With ``anchor="curve_origin"``
    the trisection starts at the curve's arc-length origin; with
    ``anchor="image_of_one"`` it starts at ``w(1)``.
    """
    if map_.curve is None:
        raise ValueError("map has no target curve")
    cert = certify_diffeomorphism(map_)
    if not cert.certified:
        raise errors.OrientationFailure(
            f"boundary Jacobian {cert.min_jacobian:.6g} <= 0", witness=cert.argmin_theta)
    L = map_.curve.length
    s_at_one = float(boundary_arc_position(map_, 0.0)[0])
    start = 0.0 if anchor == "curve_origin" else s_at_one
    targets = [start, start + L / 3, start + 2 * L / 3]

    def rel(th):
        return float(np.mod(boundary_arc_position(map_, th)[0] - s_at_one, L))

    angles = []
    for target in targets:
        goal = np.mod(target - s_at_one, L)
        if goal < 1e-14 * L or L - goal < 1e-14 * L:
            angles.append(0.0)
            continue
        angles.append(brentq(lambda th: rel(th) - goal, 1e-15, 2 * np.pi - 1e-15, xtol=1e-14))
    roots = np.exp(2j * np.pi * np.arange(3) / 3)
    phi = DiskAutomorphism.from_three_points(roots, np.exp(1j * np.array(angles)))

    N = N or map_.N or 1024
    corr = map_.correspondence
    if corr is not None:
        new_corr = BoundaryCorrespondence(
            corr.curve, lambda th: corr.phase(phi.boundary_angle(th)), "normalized",
            {"base": corr.kind, "alpha": phi.alpha, "a": [phi.a.real, phi.a.imag]})
        out = poisson_extend(new_corr, N)
    else:
        out = poisson_extend(lambda th: map_.boundary_values(phi.boundary_angle(th)), N)
        out.curve = map_.curve
    out.automorphism = phi
    return out
