"""Closed C^{1,1} Jordan curves and the interior distance function.

Points in the plane are complex numbers throughout. A curve is built from an
ordered list of points by a C^2 periodic interpolant (trigonometric polynomial
or periodic cubic spline) and then reparametrized by arc length. The
distance machinery (foot points, inner normals, the Hessian of ``d`` in the
tangent/normal frame) lives in :class:`DistanceField`.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree

from . import errors
from ._parallel import chunked

KINDS = ("trig_poly", "periodic_spline")

_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


def as_complex(points):
    """Accept complex arrays or ``(n, 2)`` real arrays; return a 1-D complex array."""
    arr = np.asarray(points)
    if np.iscomplexobj(arr):
        return arr.astype(complex).ravel()
    arr = np.asarray(arr, dtype=float)
    if arr.ndim == 1 and arr.shape[0] == 2:
        return np.array([arr[0] + 1j * arr[1]])
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise errors.DegenerateInput(f"expected (n, 2) points, got shape {arr.shape}")
    return arr[:, 0] + 1j * arr[:, 1]


def _cross(a, b):
    return (np.conj(a) * b).imag


def polygon_area(z):
    return 0.5 * np.sum(_cross(z, np.roll(z, -1)))


def find_crossing(z, rows=256):
    """First pair ``(i, j)`` of properly crossing non-adjacent edges of the closed polygon, or None."""
    n = len(z)
    a, b = z, np.roll(z, -1)
    idx = np.arange(n)
    for start in range(0, n, rows):
        i = idx[start:start + rows, None]
        ai, bi = a[i], b[i]
        o1 = _cross(bi - ai, a[None, :] - ai)
        o2 = _cross(bi - ai, b[None, :] - ai)
        o3 = _cross(b[None, :] - a[None, :], ai - a[None, :])
        o4 = _cross(b[None, :] - a[None, :], bi - a[None, :])
        gap = np.abs(i - idx[None, :])
        adjacent = (gap <= 1) | (gap == n - 1)
        hit = (o1 * o2 < 0) & (o3 * o4 < 0) & ~adjacent
        if hit.any():
            r, c = np.argwhere(hit)[0]
            return int(start + r), int(c)
    return None


class _TrigParam:
    """Trigonometric interpolant on t in [0, 2*pi) through equispaced nodes."""

    def __init__(self, z):
        n = len(z)
        a = np.fft.fft(z) / n
        k = np.fft.fftfreq(n, 1.0 / n)
        if n % 2 == 0:
            nyq = n // 2
            a[nyq] *= 0.5
            a = np.append(a, a[nyq])
            k = np.append(k, float(nyq))
        keep = np.abs(a) > 1e-15 * np.abs(a).max()
        self.k = k[keep]
        self.a = a[keep]
        self.period = 2 * np.pi
        self.nodes = 2 * np.pi * np.arange(n) / n

    def derivs(self, t):
        E = np.exp(1j * np.outer(t, self.k))
        ik = 1j * self.k
        return E @ self.a, E @ (ik * self.a), E @ (ik * ik * self.a)

    @property
    def bandwidth(self):
        return int(np.max(np.abs(self.k)))


class _SplineParam:
    """Periodic cubic spline on chord-length parameter t in [0, T)."""

    def __init__(self, z):
        closed = np.append(z, z[0])
        u = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(closed)))])
        self.spline = CubicSpline(u, closed, bc_type="periodic")
        self.period = float(u[-1])
        self.nodes = u[:-1]
        self.knots = u

    def derivs(self, t):
        t = np.mod(t, self.period)
        return self.spline(t), self.spline(t, 1), self.spline(t, 2)

    @property
    def bandwidth(self):
        return len(self.nodes)


@dataclass(frozen=True)
class CurvePoint:
    """A point of the curve with its unit-speed frame and signed curvature."""

    position: complex
    arclength: float
    tangent: complex
    inner_normal: complex
    curvature: float

    @property
    def xy(self):
        return (self.position.real, self.position.imag)

    @property
    def normal_xy(self):
        return (self.inner_normal.real, self.inner_normal.imag)


class JordanCurve:
    """Simple closed curve, counterclockwise, with arc-length parametrization.

    Args:
        points: ordered plane points, complex or ``(n, 2)``.
        kind: ``"trig_poly"`` (nodes equispaced in the parameter) or
            ``"periodic_spline"`` (chord-length parameter).

    Clockwise input is reversed; ``reversed_input`` records that it happened.
    """

    def __init__(self, points, kind="trig_poly"):
        if kind not in KINDS:
            raise errors.DegenerateInput(f"unknown curve kind {kind!r}")
        z = as_complex(points)
        if len(z) < 8:
            raise errors.DegenerateInput(f"need at least 8 points, got {len(z)}")
        if not np.all(np.isfinite(z)):
            raise errors.DegenerateInput("non-finite point coordinates")
        diam = np.ptp(z.real) + np.ptp(z.imag)
        gaps = np.abs(np.roll(z, -1) - z)
        if diam == 0 or gaps.min() < 1e-12 * diam:
            raise errors.DegenerateInput("duplicated consecutive points",
                                         witness=int(np.argmin(gaps)))
        crossing = find_crossing(z)
        if crossing is not None:
            raise errors.SelfIntersecting("sample polygon is not simple", witness=crossing)
        area = polygon_area(z)
        if abs(area) < 1e-6 * np.sum(gaps) ** 2:
            raise errors.DegenerateInput("points are nearly collinear")
        self.reversed_input = area < 0
        if self.reversed_input:
            z = np.concatenate([z[:1], z[:0:-1]])
        self.samples = z
        self.kind = kind
        self.ccw = True
        self._param = _TrigParam(z) if kind == "trig_poly" else _SplineParam(z)
        self.period = self._param.period
        self._build_arclength()

        m = int(min(4096, max(1024, 8 * len(z))))
        dense = self._param.derivs(np.linspace(0, self.period, m, endpoint=False))[0]
        crossing = find_crossing(dense)
        if crossing is not None:
            raise errors.SelfIntersecting("interpolant crosses itself", witness=crossing)
        self._coarse = None

    # -- raw parameter --------------------------------------------------
    def derivs(self, t):
        """Position, first and second derivative in the raw parameter."""
        return self._param.derivs(np.asarray(t, dtype=float))

    def speed(self, t):
        return np.abs(self.derivs(t)[1])

    def curvature_t(self, t):
        _, c1, c2 = self.derivs(t)
        return _cross(c1, c2) / np.abs(c1) ** 3

    # -- arc length -----------------------------------------------------
    def _build_arclength(self):
        p = self._param
        if isinstance(p, _TrigParam):
            M = max(1024, 16 * p.bandwidth)
            while True:
                t = 2 * np.pi * np.arange(M) / M
                b = np.fft.fft(np.abs(p.derivs(t)[1])) / M
                kb = np.fft.fftfreq(M, 1.0 / M)
                tail = np.abs(b[np.abs(kb) > M // 4])
                if tail.max() < 1e-15 * abs(b[0]) or M >= 2 ** 17:
                    break
                M *= 2
            keep = (np.abs(b) > 1e-16 * abs(b[0])) & (kb != 0)
            self._s_k = kb[keep]
            self._s_b = b[keep] / (1j * kb[keep])
            self._s_rate = b[0].real
            self.length = float(2 * np.pi * b[0].real)
        else:
            u = p.knots
            h = np.diff(u)
            nodes = u[:-1, None] + 0.5 * h[:, None] * (_GL_X[None, :] + 1)
            seg = 0.5 * h * (np.abs(p.spline(nodes, 1)) @ _GL_W)
            self._cum = np.concatenate([[0.0], np.cumsum(seg)])
            self.length = float(self._cum[-1])
        tab = np.linspace(0, self.period, 4097)
        self._tab_t = tab
        self._tab_s = self._arclength_raw(tab)

    def _arclength_raw(self, t):
        t = np.asarray(t, dtype=float)
        p = self._param
        if isinstance(p, _TrigParam):
            out = np.empty(t.shape)
            flat = t.ravel()

            def work(a, b):
                tt = flat[a:b]
                E = np.exp(1j * np.outer(tt, self._s_k)) - 1.0
                return (self._s_rate * tt + (E @ self._s_b).real,)

            out.ravel()[:] = chunked(work, flat.size, 4096)[0]
            return out
        wraps, tm = np.divmod(t, p.period)
        i = np.clip(np.searchsorted(p.knots, tm, side="right") - 1, 0, len(p.knots) - 2)
        u0 = p.knots[i]
        half = 0.5 * (tm - u0)
        nodes = u0[..., None] + half[..., None] * (_GL_X + 1)
        part = half * (np.abs(p.spline(nodes, 1)) @ _GL_W)
        return wraps * self.length + self._cum[i] + part

    def arclength_of(self, t):
        """Arc length s(t) measured from the first sample, unwrapped."""
        return self._arclength_raw(t)

    def param_of(self, s):
        """Invert s(t) by Newton iteration; ``s`` is taken modulo the length."""
        s = np.asarray(s, dtype=float)
        wraps, sm = np.divmod(s, self.length)
        t = np.interp(sm, self._tab_s, self._tab_t)
        for _ in range(30):
            step = (self._arclength_raw(t) - sm) / self.speed(t)
            t = t - step
            if np.all(np.abs(step) < 1e-14 * self.period):
                break
        return t + wraps * self.period

    # -- unit-speed quantities -----------------------------------------
    def point(self, s):
        return self.derivs(self.param_of(s))[0]

    def tangent(self, s):
        c1 = self.derivs(self.param_of(s))[1]
        return c1 / np.abs(c1)

    def inner_normal(self, s):
        return 1j * self.tangent(s)

    def curvature(self, s):
        return self.curvature_t(self.param_of(s))

    def curve_point(self, s):
        s = float(np.mod(s, self.length))
        t = self.param_of(s)
        c, c1, c2 = self.derivs(np.atleast_1d(t))
        tan = c1[0] / abs(c1[0])
        return CurvePoint(complex(c[0]), s, complex(tan), complex(1j * tan),
                          float(_cross(c1, c2)[0] / abs(c1[0]) ** 3))

    def arclength_samples(self, n):
        """Raw parameters of ``n`` points equispaced in arc length."""
        return self.param_of(self.length * np.arange(n) / n)

    # -- nearest points --------------------------------------------------
    def _coarse_table(self, n=1024):
        if self._coarse is None or len(self._coarse[0]) != n:
            t = self.arclength_samples(n)
            self._coarse = (t, self.derivs(t)[0])
            self._coarse_kmax = float(np.max(np.abs(self.curvature_t(t))))
            self._tree = cKDTree(np.column_stack([self._coarse[1].real, self._coarse[1].imag]))
        return self._coarse

    def _refine(self, z, t, lo, hi, iters=60):
        """Safeguarded Newton on ``Re(conj(c - z) c') = 0`` inside ``[lo, hi]``."""
        t, lo, hi = np.array(t, dtype=float), np.array(lo, dtype=float), np.array(hi, dtype=float)
        z = np.asarray(z)
        act = np.arange(len(t))
        tol = 1e-15 * self.period
        for _ in range(iters):
            ta = t[act]
            c, c1, c2 = self._param.derivs(ta)
            diff = c - z[act]
            f = (np.conj(diff) * c1).real
            fp = np.abs(c1) ** 2 + (np.conj(diff) * c2).real
            neg = f < 0
            la = np.where(neg, ta, lo[act])
            ha = np.where(neg, hi[act], ta)
            with np.errstate(divide="ignore", invalid="ignore"):
                tn = ta - f / fp
            bad = ~np.isfinite(tn) | (fp <= 0) | (tn < la) | (tn > ha)
            tn = np.where(bad, 0.5 * (la + ha), tn)
            t[act], lo[act], hi[act] = tn, la, ha
            act = act[(np.abs(tn - ta) > tol) & (ha - la > tol)]
            if not act.size:
                break
        return t

    def nearest(self, z, t_hint=None, n_coarse=1024, ties=True):
        """Nearest curve points for an array of plane points.

        Returns ``(t, signed_distance, ambiguous)``; the signed distance is
        positive inside. Without ``t_hint`` a global scan over ``n_coarse``
        arc-length samples seeds the refinement and, if ``ties``, a second
        well-separated local minimizer is refined to flag ties
        (``ambiguous``). With ``t_hint`` only a local refinement around the
        hint is done.
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        shape = z.shape
        z = z.ravel()
        tc, pc = self._coarse_table(n_coarse)
        T = self.period
        spacing = np.max(np.diff(np.append(tc, tc[0] + T)))
        ds = self.length / len(tc)
        kmax = self._coarse_kmax
        P2 = -2.0 * np.vstack([pc.real, pc.imag])

        def work(a, b):
            zz = z[a:b]
            if t_hint is not None:
                th = np.broadcast_to(np.asarray(t_hint, dtype=float).ravel(), z.shape)[a:b]
                t1 = self._refine(zz, th.copy(), th - 2 * spacing, th + 2 * spacing)
                amb = np.zeros(len(zz), bool)
            elif not ties:
                _, j1 = self._tree.query(np.column_stack([zz.real, zz.imag]))
                t1 = self._refine(zz, tc[j1], tc[j1] - _prev_gap(tc, j1, T), tc[j1] + _next_gap(tc, j1, T))
                amb = np.zeros(len(zz), bool)
            else:
                # expanded form goes through BLAS; only used to rank candidates
                Z = np.column_stack([zz.real, zz.imag])
                D = Z @ P2
                D += np.abs(pc) ** 2
                D += (np.abs(zz) ** 2)[:, None]
                np.maximum(D, 0.0, out=D)
                j1 = np.argmin(D, axis=1)
                t1 = self._refine(zz, tc[j1], tc[j1] - _prev_gap(tc, j1, T), tc[j1] + _next_gap(tc, j1, T))
                amb = np.zeros(len(zz), bool)
                rows = np.arange(len(zz))
                d1c = D[rows, j1]
                cols = (j1[:, None] + np.arange(-2, 3)[None, :]) % D.shape[1]
                saved = D[rows[:, None], cols]
                D[rows[:, None], cols] = np.inf
                # coarse samples overshoot a local minimum of d^2 by at most ~ds^2 (1 + kappa d)
                r1 = np.sqrt(d1c)
                margin = 0.5 * ds ** 2 * (1 + kmax * r1) + 4e-9 * r1 + 1e-15
                cand = np.flatnonzero(D.min(axis=1) <= d1c + margin)
                if cand.size:
                    Dc = D[cand]
                    Dfull = Dc.copy()
                    Dfull[np.arange(len(cand))[:, None], cols[cand]] = saved[cand]
                    local = (Dc <= np.roll(Dfull, 1, axis=1)) & (Dc <= np.roll(Dfull, -1, axis=1))
                    D2 = np.where(local, Dc, np.inf)
                    j2 = np.argmin(D2, axis=1)
                    has2 = np.isfinite(D2[np.arange(len(cand)), j2])
                    k = cand[has2]
                    jj = j2[has2]
                    if k.size:
                        t2 = self._refine(zz[k], tc[jj], tc[jj] - _prev_gap(tc, jj, T), tc[jj] + _next_gap(tc, jj, T))
                        d1 = np.abs(self._param.derivs(t1[k])[0] - zz[k])
                        d2 = np.abs(self._param.derivs(t2)[0] - zz[k])
                        tie = np.abs(d1 - d2) <= 1e-9
                        if tie.any():
                            s1 = np.mod(self._arclength_raw(t1[k][tie]), self.length)
                            s2 = np.mod(self._arclength_raw(t2[tie]), self.length)
                            sep = np.abs(s1 - s2)
                            sep = np.minimum(sep, self.length - sep)
                            amb[k[tie]] = sep > 1e-3
                        better = d2 < d1 - 1e-9
                        t1[k] = np.where(better, t2, t1[k])
            c, c1, _ = self._param.derivs(t1)
            diff = zz - c
            nu = 1j * c1 / np.abs(c1)
            side = (np.conj(diff) * nu).real
            d = np.abs(diff) * np.where(side < 0, -1.0, 1.0)
            return np.mod(t1, T), d, amb

        t, d, amb = chunked(work, len(z), 2048)
        return t.reshape(shape), d.reshape(shape), amb.reshape(shape)

    def frame_t(self, t):
        """``(position, unit tangent, inner normal, signed curvature)`` at raw parameters."""
        c, c1, c2 = self.derivs(t)
        speed = np.abs(c1)
        tan = c1 / speed
        return c, tan, 1j * tan, _cross(c1, c2) / speed ** 3

    def contains(self, z):
        """Interior test through the foot point of the nearest-point projection."""
        return self.nearest(z)[1] > 0


def _prev_gap(tc, j, T):
    return np.mod(tc[j] - tc[j - 1], T)


def _next_gap(tc, j, T):
    return np.mod(tc[(j + 1) % len(tc)] - tc[j], T)


# -- module-level helpers --------------------------------------------------

def build_curve(points, kind="trig_poly"):
    """Build a :class:`JordanCurve` through ``points`` (see class docs)."""
    return JordanCurve(points, kind)


def curvature_at(curve, s):
    """Signed curvature at arc length ``s``; positive on counterclockwise convex arcs."""
    return curve.curvature(s)


def kappa0(curve, n_samples=4096):
    """Max of ``|curvature|`` over ``n_samples`` equispaced arc-length samples."""
    if n_samples < 256:
        raise ValueError("n_samples must be at least 256")
    return float(np.max(np.abs(curve.curvature_t(curve.arclength_samples(n_samples)))))


def refined_kappa0(curve, n_samples=4096, tol=1e-4, max_samples=2 ** 17):
    k = kappa0(curve, n_samples)
    while n_samples < max_samples:
        n_samples *= 2
        k_new = kappa0(curve, n_samples)
        if abs(k_new - k) < tol:
            return k_new, n_samples
        k = k_new
    return k, n_samples


def inner_reach(curve, n=1024):
    """Smallest radius of a maximal interior ball touching the curve, from sample pairs."""
    t = curve.arclength_samples(n)
    x, _, nu, _ = curve.frame_t(t)
    best = np.inf
    for a in range(0, n, 256):
        V = x[None, :] - x[a:a + 256, None]
        p = (np.conj(V) * nu[a:a + 256, None]).real
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(p > 1e-14, np.abs(V) ** 2 / (2 * p), np.inf)
        best = min(best, float(r.min()))
    return best


@dataclass(frozen=True)
class HessianFrame:
    """Hessian of ``d`` at a point: ``eigenvalue`` along the foot tangent, 0 along the normal."""

    kappa_foot: float
    distance: float
    eigenvalue: float
    angle: float

    @property
    def rotation(self):
        """Rotation matrix whose columns are the foot tangent and inner normal."""
        c, s = np.cos(self.angle), np.sin(self.angle)
        return np.array([[c, -s], [s, c]])

    def matrix(self):
        O = self.rotation
        return O @ np.diag([self.eigenvalue, 0.0]) @ O.T


class DistanceField:
    """Distance to the boundary for points inside a :class:`JordanCurve`.

    ``kappa0`` is the sampled sup of ``|curvature|`` (4096 samples, doubled
    until it moves by less than 1e-4). ``reach_mu`` is ``min(inner reach,
    1/kappa0)``; the collar is ``{d < reach_mu}``.
    """

    def __init__(self, curve, n_samples=4096, n_coarse=1024):
        self.curve = curve
        self.n_coarse = n_coarse
        self.kappa0, self.kappa0_samples = refined_kappa0(curve, n_samples)
        self.reach_mu = min(inner_reach(curve), 1.0 / self.kappa0)

    @property
    def collar(self):
        return {"kind": "collar", "mu": self.reach_mu}

    def in_collar(self, z, mu=None):
        mu = self.reach_mu if mu is None else mu
        _, d, amb = self.curve.nearest(z, n_coarse=self.n_coarse)
        return (d > 0) & (d < mu) & ~amb

    def query(self, w, t_hint=None, ties=True):
        """Vectorized lookup: ``(signed d, foot t, ambiguous)`` for plane points ``w``.

        ``ties=False`` skips the tie detection (``ambiguous`` is all False);
        the distance itself is unaffected.
        """
        t, d, amb = self.curve.nearest(w, t_hint=t_hint, n_coarse=self.n_coarse, ties=ties)
        return d, t, amb

    def distance(self, w):
        return self.query(w, ties=False)[0]

    def distance_query(self, z):
        z = complex(z)
        t, d, amb = self.curve.nearest(np.array([z]), n_coarse=self.n_coarse)
        if d[0] <= 0:
            raise errors.OutsideDomain(f"point {z} is not inside the curve", witness=z)
        if amb[0]:
            raise errors.AmbiguousFoot(f"point {z} has several nearest boundary points", witness=z)
        s = float(np.mod(self.curve.arclength_of(t[0]), self.curve.length))
        return float(d[0]), self.curve.curve_point(s)

    def grad_distance(self, z):
        return self.distance_query(z)[1].inner_normal

    def hessian_distance_frame(self, z):
        d, foot = self.distance_query(z)
        k = foot.curvature
        if 1 - k * d <= 0:
            raise errors.SingularCollar(f"1 - kappa*d = {1 - k * d:.3g} <= 0", witness=complex(z))
        return HessianFrame(k, d, -k / (1 - k * d), float(np.angle(foot.tangent)))

    def dump_csv(self, path, points):
        """Write ``x,y,d,nu_x,nu_y,kappa_foot`` rows for interior, unambiguous ``points``."""
        pts = np.asarray(points, dtype=complex).ravel()
        d, t, amb = self.query(pts)
        ok = (d > 0) & ~amb
        _, _, nu, kap = self.curve.frame_t(t[ok])
        rows = np.column_stack([pts[ok].real, pts[ok].imag, d[ok], nu.real, nu.imag, kap])
        np.savetxt(path, rows, delimiter=",", header="x,y,d,nu_x,nu_y,kappa_foot",
                   comments="", fmt="%.17g")
        return int(ok.sum())


def distance_query(field, z):
    return field.distance_query(z)


def grad_distance(field, z):
    return field.grad_distance(z)


def hessian_distance_frame(field, z):
    return field.hessian_distance_frame(z)


# -- ingestion -------------------------------------------------------------

def load_curve(path, kind=None):
    """Read a point list from JSON (``{"points": ..., "kind": ...}``) or ``x y`` text lines."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json" or text.lstrip().startswith("{"):
        data = json.loads(text)
        return JordanCurve(np.asarray(data["points"], float), kind or data.get("kind", "trig_poly"))
    pts = np.loadtxt(path, ndmin=2)
    return JordanCurve(pts[:, :2], kind or "trig_poly")
