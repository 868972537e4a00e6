"""Harmonic maps of the unit disk given by the Poisson extension of boundary data.

A map is stored through its two-sided coefficient sequence::

    w(z) = sum_{n>=0} c_n z^n + sum_{n<0} c_n conj(z)^{|n|}

so that ``w = g + conj(h)`` with ``g = sum_{n>=0} c_n z^n`` and
``h = sum_{n>=1} conj(c_{-n}) z^n``. Derivatives and the boundary radial
derivative are term-wise; the Poisson integral itself is kept as an
independent quadrature (:func:`poisson_integral`).
"""

import json
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.interpolate import PchipInterpolator

from . import errors

DEFAULT_N = 1024
TRIM = 1e-15


def poisson_kernel(r, x):
    """``(1 - r^2) / (2 pi (1 - 2 r cos x + r^2))`` for ``0 <= r < 1``."""
    r = np.asarray(r, dtype=float)
    if np.any(r >= 1) or np.any(r < 0):
        raise errors.InvalidRadius("Poisson kernel needs 0 <= r < 1")
    return (1 - r ** 2) / (2 * np.pi * (1 - 2 * r * np.cos(x) + r ** 2))


class BoundaryCorrespondence:
    """Boundary data ``F(e^{i theta}) = g(s(theta))`` on a target curve.

    ``phase`` maps angles to unwrapped arc length, ``s(theta + 2 pi) = s(theta) + L``.
    Use the constructors :meth:`uniform`, :meth:`perturbed_uniform`,
    :meth:`tabulated` and :meth:`native`.
    """

    def __init__(self, curve, phase, kind="custom", params=None):
        self.curve = curve
        self.phase = phase
        self.kind = kind
        self.params = dict(params or {})

    def __call__(self, theta):
        return self.curve.point(self.phase(np.asarray(theta, dtype=float)))

    def samples(self, N):
        return self(2 * np.pi * np.arange(N) / N)

    def is_monotone(self, n=4096):
        theta = 2 * np.pi * np.arange(n + 1) / n
        s = self.phase(theta)
        return bool(np.all(np.diff(s) > 0) and abs(s[-1] - s[0] - self.curve.length) < 1e-8 * self.curve.length)

    @classmethod
    def uniform(cls, curve, offset=0.0):
        L = curve.length
        return cls(curve, lambda th: offset + L * np.asarray(th) / (2 * np.pi),
                   "uniform", {"offset": offset})

    @classmethod
    def perturbed_uniform(cls, curve, eps, m, offset=0.0):
        """``s = offset + L/(2 pi) (theta + eps sin(m theta))``; monotone iff ``|eps m| < 1``."""
        L = curve.length
        m = int(m)

        def phase(th):
            th = np.asarray(th)
            return offset + L / (2 * np.pi) * (th + eps * np.sin(m * th))

        return cls(curve, phase, "perturbed_uniform", {"eps": eps, "m": m, "offset": offset})

    @classmethod
    def tabulated(cls, curve, theta, s):
        """Interpolate a table of ``(theta, s)`` pairs, ``theta`` in ``[0, 2 pi)``.

        Increasing tables use a periodic PCHIP (monotone, C^1); anything
        else falls back to linear interpolation so certification can reject it.
        """
        theta = np.asarray(theta, dtype=float)
        s = np.asarray(s, dtype=float)
        L = curve.length
        th_ext = np.concatenate([theta - 2 * np.pi, theta, theta + 2 * np.pi])
        s_ext = np.concatenate([s - L, s, s + L])
        if np.all(np.diff(s_ext) > 0):
            interp = PchipInterpolator(th_ext, s_ext)
        else:
            def interp(x):
                return np.interp(x, th_ext, s_ext)

        def phase(th):
            wraps, tm = np.divmod(np.asarray(th, dtype=float), 2 * np.pi)
            return interp(tm) + wraps * L

        return cls(curve, phase, "tabulated", {"theta": theta.tolist(), "s": s.tolist()})

    @classmethod
    def native(cls, curve, offset=0.0):
        """Follow the curve's own interpolation parameter: ``F(e^{i theta}) = c(theta T / 2 pi)``."""
        scale = curve.period / (2 * np.pi)
        return cls(curve, lambda th: curve.arclength_of((np.asarray(th) + offset) * scale),
                   "native", {"offset": offset})


@dataclass
class GradientSample:
    """Complex derivatives and the derived norms at one or many disk points."""

    z: np.ndarray
    wz: np.ndarray
    wzbar: np.ndarray

    @property
    def grad_norm(self):
        return np.abs(self.wz) + np.abs(self.wzbar)

    @property
    def l_norm(self):
        return np.abs(np.abs(self.wz) - np.abs(self.wzbar))

    @property
    def jacobian(self):
        return np.abs(self.wz) ** 2 - np.abs(self.wzbar) ** 2

    @property
    def beltrami(self):
        """Second complex dilatation ``w_zbar / w_z``."""
        return self.wzbar / self.wz


class HarmonicMap:
    """Harmonic map ``w = g + conj(h)`` of the unit disk.

    Args:
        pos: ``c_0, c_1, ...`` (analytic part).
        neg: ``c_{-1}, c_{-2}, ...`` (anti-analytic part).
        N: number of boundary samples the coefficients came from, or None
            for an exact finite series.
        correspondence: the :class:`BoundaryCorrespondence` it extends, if any.
        curve: target curve (defaults to the correspondence's).
    """

    def __init__(self, pos, neg=(), N=None, correspondence=None, curve=None):
        scale = max(np.abs(np.asarray(pos, complex)).max(initial=0),
                    np.abs(np.asarray(neg, complex)).max(initial=0))
        pos = np.asarray(pos, dtype=complex)
        neg = np.asarray(neg, dtype=complex)
        if scale > 0:
            pos = np.where(np.abs(pos) > TRIM * scale, pos, 0)
            neg = np.where(np.abs(neg) > TRIM * scale, neg, 0)
        self.pos = _strip(pos, keep_one=True)
        self.neg = _strip(neg, keep_one=False)
        self.N = N
        self.correspondence = correspondence
        self.curve = curve if curve is not None else getattr(correspondence, "curve", None)
        self._neg0 = np.concatenate([[0], self.neg])
        n = np.arange(len(self.pos))
        self._dpos = (n * self.pos)[1:]
        m = np.arange(len(self._neg0))
        self._dneg = (m * self._neg0)[1:]

    @classmethod
    def from_terms(cls, terms, **kw):
        """Build from a ``{n: c_n}`` mapping (exact finite series)."""
        terms = {int(n): complex(c) for n, c in dict(terms).items()}
        top = max([n for n in terms if n >= 0], default=0)
        bot = max([-n for n in terms if n < 0], default=0)
        pos = np.zeros(top + 1, complex)
        neg = np.zeros(bot, complex)
        for n, c in terms.items():
            if n >= 0:
                pos[n] = c
            else:
                neg[-n - 1] = c
        return cls(pos, neg, **kw)

    @classmethod
    def affine(cls, k, rotation=0.0, shift=0.0, **kw):
        """``w = shift + e^{i rotation} z + k conj(z)``."""
        return cls.from_terms({0: shift, 1: np.exp(1j * rotation), -1: k}, **kw)

    def coeff(self, n):
        if n >= 0:
            return complex(self.pos[n]) if n < len(self.pos) else 0j
        return complex(self.neg[-n - 1]) if -n - 1 < len(self.neg) else 0j

    @property
    def base_value(self):
        return complex(self.pos[0])

    @property
    def degree(self):
        return max(len(self.pos) - 1, len(self.neg))

    def terms(self):
        """``(n, c_n)`` pairs with nonzero coefficients, ordered by n."""
        out = [(-(i + 1), c) for i, c in enumerate(self.neg) if c != 0][::-1]
        out += [(i, c) for i, c in enumerate(self.pos) if c != 0]
        return out

    # -- evaluation -----------------------------------------------------
    def eval(self, z):
        z = np.asarray(z, dtype=complex)
        return P.polyval(z, self.pos) + P.polyval(np.conj(z), self._neg0)

    __call__ = eval

    def _check_boundary(self, z):
        if np.any(np.abs(z) >= 1 - 1e-14):
            tail = self.boundary_tail()
            if tail >= 1e-8:
                raise errors.BoundaryDivergence(
                    f"coefficient tail {tail:.2e} too large to differentiate on |z| = 1")

    def boundary_tail(self):
        """Relative weight of ``|n c_n|`` in the upper half of the band (0 for exact series)."""
        if self.N is None:
            return 0.0
        n = np.arange(len(self.pos))
        m = np.arange(1, len(self.neg) + 1)
        wp, wn = n * np.abs(self.pos), m * np.abs(self.neg)
        cut = self.N // 4
        tail = wp[n > cut].sum() + wn[m > cut].sum()
        return float(tail / max(1.0, wp.sum() + wn.sum()))

    def gradient(self, z):
        z = np.asarray(z, dtype=complex)
        self._check_boundary(z)
        wz = P.polyval(z, self._dpos) if self._dpos.size else np.zeros_like(z)
        wzbar = P.polyval(np.conj(z), self._dneg) if self._dneg.size else np.zeros_like(z)
        return GradientSample(z, np.broadcast_to(wz, z.shape) * 1, np.broadcast_to(wzbar, z.shape) * 1)

    def radial_derivative(self, theta):
        """``dw/dr`` on the unit circle: ``sum |n| c_n e^{i n theta}``."""
        theta = np.asarray(theta, dtype=float)
        z = np.exp(1j * theta)
        g = self.gradient(z)
        return z * g.wz + np.conj(z) * g.wzbar

    def laplacian(self, z):
        return np.zeros_like(np.asarray(z, dtype=complex))

    def boundary_values(self, theta):
        return self.eval(np.exp(1j * np.asarray(theta, dtype=float)))

    # -- serialization --------------------------------------------------
    def to_json(self):
        return [[int(n), float(c.real), float(c.imag)] for n, c in self.terms()]

    def dump(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def from_json(cls, rows, **kw):
        return cls.from_terms({int(n): complex(re, im) for n, re, im in rows}, **kw)


def _strip(c, keep_one):
    nz = np.flatnonzero(c != 0)
    if nz.size == 0:
        return np.zeros(1 if keep_one else 0, complex)
    return c[: nz[-1] + 1].copy()


def poisson_extend(F, N=DEFAULT_N):
    """Spectral Poisson extension of boundary data sampled at ``N`` equispaced angles.

    ``F`` is a :class:`BoundaryCorrespondence`, any callable of the angle, or an
    array of ``N`` samples. Coefficients ``c_n``, ``-N/2 < n <= N/2``, come from
    the discrete Fourier transform. Emits :class:`~qcharmlab.errors.AliasWarning`
    when the top of the band is not negligible.
    """
    if N < 64 or N & (N - 1):
        raise ValueError(f"N must be a power of two >= 64, got {N}")
    if callable(F):
        values = np.asarray(F(2 * np.pi * np.arange(N) / N), dtype=complex)
    else:
        values = np.asarray(F, dtype=complex)
        if values.shape != (N,):
            raise ValueError("sample array must have length N")
    c = np.fft.fft(values) / N
    top = np.abs(c).max()
    n = np.fft.fftfreq(N, 1.0 / N).astype(int)
    n[N // 2] = N // 2
    edge = np.abs(c[np.abs(n) >= 7 * N // 16])
    if top > 0 and edge.max() > 1e-8 * top:
        warnings.warn(f"boundary data under-resolved at N={N}: edge/max = {edge.max() / top:.1e}",
                      errors.AliasWarning, stacklevel=2)
    pos = c[: N // 2 + 1]
    neg = c[N - 1: N // 2: -1]
    corr = F if isinstance(F, BoundaryCorrespondence) else None
    return HarmonicMap(pos, neg, N=N, correspondence=corr)


def poisson_integral(F, z, nodes=4096):
    """Direct trapezoid quadrature of the Poisson integral (independent oracle)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    x = 2 * np.pi * np.arange(nodes) / nodes
    Fx = np.asarray(F(x), dtype=complex)
    r, phi = np.abs(z), np.angle(z)
    K = poisson_kernel(r[:, None], x[None, :] - phi[:, None])
    return (K @ Fx) * (2 * np.pi / nodes)

