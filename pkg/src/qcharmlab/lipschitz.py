"""From the barrier to a co-Lipschitz constant.

The chain is: the depth radius ``rho`` where the image first reaches depth
``1/(2 kappa0)``, the maximum ``M`` of the barrier on ``|z| = rho``, the Hopf
constant ``2M / (rho^2 (1 - exp(1/rho^2 - 1)))``, the boundary lower bound
``exp(-K^2) * hopf_constant`` for ``|dw/dr|``, and finally the interior bound
``l(grad w) >= C/K`` through the holomorphic pair ``a = conj(w_zbar)/w_z``,
``b = C/(K w_z)`` with ``|a| + |b| <= 1``.
"""

from dataclasses import asdict, dataclass

import numpy as np

from . import errors
from .qc import disk_grid


def ray_roots(map_, field, depth, n_angles=1024, n_radii=128, tol=1e-12):
    """Largest ``r`` on each ray ``r e^{i theta}`` with ``d(w(r e^{i theta})) = depth``.

    No monotonicity in ``r`` is assumed: the last sign change of
    ``d - depth`` on a uniform radial scan is refined by bisection.
    """
    theta = 2 * np.pi * np.arange(n_angles) / n_angles
    u = np.exp(1j * theta)
    r = np.linspace(0.0, 1.0, n_radii + 1)
    f = field.distance(map_.eval(r[:, None] * u[None, :]).ravel()).reshape(len(r), n_angles) - depth
    above = f >= 0
    # a root sits between consecutive radii where d - depth goes from >= 0 to < 0
    down = above[:-1] & ~above[1:]
    if not down.any(axis=0).all():
        j = int(np.flatnonzero(~down.any(axis=0))[0])
        raise errors.CollarEscape(f"ray at theta={theta[j]:.4f} never crosses depth {depth:.4g}",
                                  witness=float(theta[j]))
    last = n_radii - 1 - np.argmax(down[::-1], axis=0)
    lo, hi = r[last], r[last + 1]
    while np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        fm = field.distance(map_.eval(mid * u)) - depth
        lo = np.where(fm >= 0, mid, lo)
        hi = np.where(fm >= 0, hi, mid)
    return theta, 0.5 * (lo + hi)


def compute_rho(map_, field, spec, n_angles=1024):
    """``rho = max{|z| : d(w(z)) = 1/(2 kappa0)}``."""
    _, roots = ray_roots(map_, field, spec.collar_bound, n_angles)
    return float(roots.max())


@dataclass
class HopfCertificate:
    rho: float
    M_rho: float
    hopf_constant: float
    boundary_bound: float
    A: float
    kappa0: float
    K: float
    n_ring: int
    min_boundary_dphi_dr: float
    hopf_verified: bool

    def to_dict(self):
        return asdict(self)


def hopf_bound(map_, field, spec, audit, rho=None, n_ring=2048, n_boundary=2048):
    """Quantitative Hopf constant for ``phi_w`` on the annulus ``rho <= |z| < 1``.

    Also measures the boundary radial derivative of ``phi_w`` at
    ``n_boundary`` angles; ``hopf_verified`` says whether it exceeds the
    constant at every sampled angle (a finite check, not a proof).
    """
    if not audit.passed:
        raise errors.NotSubharmonic(f"barrier audit failed, min Lap phi = {audit.min_lap_phi:.3g}",
                                    witness=audit.witness)
    rho = compute_rho(map_, field, spec) if rho is None else rho
    annulus = np.abs(audit.points["z"]) >= rho
    if annulus.any() and audit.points["phi"][annulus].max() >= 0:
        raise errors.SignError("phi_w is not negative on the annulus")
    ring = rho * np.exp(2j * np.pi * np.arange(n_ring) / n_ring)
    d = field.distance(map_.eval(ring))
    phi = (np.exp(-spec.A * d) - 1) / spec.A
    M = float(phi.max())
    if M >= 0:
        raise errors.SignError(f"max of phi_w on |z| = rho is {M:.3g} >= 0")
    hopf = 2 * M / (rho ** 2 * (1 - np.exp(1 / rho ** 2 - 1)))

    # at the boundary g'(0) = 1, so d(phi)/dr = -<nu, dw/dr>
    theta = 2 * np.pi * np.arange(n_boundary) / n_boundary
    _, t, _ = field.query(map_.eval(np.exp(1j * theta)), ties=False)
    _, _, nu, _ = field.curve.frame_t(t)
    dphi = -(np.conj(nu) * map_.radial_derivative(theta)).real
    return HopfCertificate(
        rho=float(rho), M_rho=M, hopf_constant=float(hopf),
        boundary_bound=float(np.exp(-spec.K ** 2) * hopf), A=spec.A, kappa0=spec.kappa0,
        K=spec.K, n_ring=n_ring, min_boundary_dphi_dr=float(dphi.min()),
        hopf_verified=bool(dphi.min() > hopf))


@dataclass
class BoundaryBound:
    value: float
    min_radial: float
    witness_theta: float
    n_angles: int

    def to_dict(self):
        return asdict(self)


def boundary_colip(map_, field, spec, cert, n_angles=2048):
    """Lower bound ``exp(-K^2) * hopf_constant`` for ``|dw/dr|`` on the circle, checked at ``n_angles``."""
    value = float(np.exp(-spec.K ** 2) * cert.hopf_constant)
    theta = 2 * np.pi * np.arange(n_angles) / n_angles
    radial = np.abs(map_.radial_derivative(theta))
    j = int(np.argmin(radial))
    if radial[j] < value:
        raise errors.VerificationFailure(
            f"|dw/dr| = {radial[j]:.6g} < {value:.6g} at theta = {theta[j]:.6f}", witness=float(theta[j]))
    return BoundaryBound(value, float(radial[j]), float(theta[j]), n_angles)


@dataclass
class InteriorBound:
    theoretical_colip: float
    ab_check: float
    ab_witness: complex
    min_l_norm: float
    grid: tuple


def interior_extension(map_, colip_boundary, K, grid=(64, 1024)):
    """Realize the maximum principle for ``|a| + |b|`` on a boundary-clustered grid.

    ``colip_boundary`` is the boundary constant ``C``; the returned
    ``theoretical_colip`` is ``C/K``.
    """
    C = float(colip_boundary)
    z = np.concatenate([[0j], disk_grid(*grid).ravel()])
    g = map_.gradient(z)
    awz = np.abs(g.wz)
    if awz.min() <= 1e-12:
        j = int(np.argmin(awz))
        raise errors.LewyViolation(f"|w_z| = {awz[j]:.3g} at z = {z[j]:.6g}", witness=complex(z[j]))
    ab = np.abs(g.wzbar) / awz + C / (K * awz)
    j = int(np.argmax(ab))
    if ab[j] > 1 + 1e-8:
        raise errors.MaxPrincipleFailure(f"|a| + |b| = {ab[j]:.12g} > 1 at z = {z[j]:.6g}",
                                         witness=complex(z[j]))
    lw = g.l_norm
    if lw.min() < C / K - 1e-8:
        k = int(np.argmin(lw))
        raise errors.MaxPrincipleFailure(f"l(grad w) = {lw[k]:.6g} < C/K", witness=complex(z[k]))
    return InteriorBound(C / K, float(ab[j]), complex(z[j]), float(lw.min()), tuple(grid))


def _pair_sets(n_pairs, rng):
    # random pairs, uniform in the closed disk
    r = np.sqrt(rng.uniform(0, 1, (2, n_pairs)))
    z = r * np.exp(2j * np.pi * rng.uniform(0, 1, (2, n_pairs)))
    sets = [(z[0], z[1])]

    # short segments in 16 fixed directions (affine extremes are direction-only)
    base = 0.999 * np.sqrt(rng.uniform(0, 1, 2048)) * np.exp(2j * np.pi * rng.uniform(0, 1, 2048))
    dirs = np.exp(1j * np.pi * np.arange(16) / 16)
    for length in (1e-3, 1e-2):
        sets.append((base[:, None].repeat(16, 1).ravel(), (base[:, None] + length * dirs[None, :]).ravel()))

    # radial and tangential pairs, and pairs hugging the boundary
    theta = 2 * np.pi * np.arange(512) / 512
    radii = np.array([0.0, 0.25, 0.5, 0.75, 0.9, 0.99, 0.999, 1.0])
    r1, r2 = np.meshgrid(radii, radii)
    off = r1 != r2
    sets.append(((r1[off][:, None] * np.exp(1j * theta)).ravel(), (r2[off][:, None] * np.exp(1j * theta)).ravel()))
    for rad in radii[1:]:
        for dth in (1e-3, 0.05, 0.5):
            sets.append((rad * np.exp(1j * theta), rad * np.exp(1j * (theta + dth))))
    rb = 1 - 0.02 * rng.uniform(0, 1, (2, 4096))
    sets.append(tuple(rb * np.exp(2j * np.pi * rng.uniform(0, 1, (2, 4096)))))
    z1 = np.concatenate([s[0] for s in sets])
    z2 = np.concatenate([s[1] for s in sets])
    keep = (np.abs(z1 - z2) > 1e-12) & (np.abs(z1) <= 1) & (np.abs(z2) <= 1)
    return z1[keep], z2[keep]


def empirical_bilipschitz(map_, n_pairs=100_000, seed=0):
    """``(max, min)`` of ``|w(z1) - w(z2)| / |z1 - z2|`` over random and structured pairs."""
    if n_pairs < 10_000:
        raise ValueError("n_pairs must be at least 10^4")
    z1, z2 = _pair_sets(n_pairs, np.random.default_rng(seed))
    q = np.abs(map_.eval(z1) - map_.eval(z2)) / np.abs(z1 - z2)
    return float(q.max()), float(q.min())


@dataclass
class LipschitzReport:
    theoretical_colip: float
    empirical_lip: float
    empirical_colip: float
    ab_check: float
    n_pairs: int
    seed: int

    @property
    def theorem_holds(self):
        return self.theoretical_colip <= self.empirical_colip + 1e-6

    def to_dict(self):
        out = asdict(self)
        out["theorem_holds"] = self.theorem_holds
        return out


def lipschitz_report(map_, interior, n_pairs=100_000, seed=0):
    lip, colip = empirical_bilipschitz(map_, n_pairs, seed)
    return LipschitzReport(interior.theoretical_colip, lip, colip, interior.ab_check, n_pairs, seed)
