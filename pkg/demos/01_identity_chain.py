"""Walk the certification chain for the identity map of the unit disk.

Every constant has a closed form here, so each step prints the computed
value next to the value it should have.
"""

import numpy as np

from qcharmlab import (BarrierSpec, DistanceField, audit_subharmonicity, boundary_colip,
                       build_curve, dilatation_profile, empirical_bilipschitz, hopf_bound,
                       interior_extension, poisson_extend)
from qcharmlab.harmonic import BoundaryCorrespondence

t = 2 * np.pi * np.arange(64) / 64
circle = build_curve(np.exp(1j * t))
field = DistanceField(circle)
print(f"length {circle.length:.15f}   (2 pi = {2 * np.pi:.15f})")
print(f"kappa0 {field.kappa0!r}")

# uniform boundary speed on the circle gives back w(z) = z
w = poisson_extend(BoundaryCorrespondence.uniform(circle), 1024)
print("nonzero coefficients:", [(n, complex(np.round(c, 12))) for n, c in w.terms()])

K = dilatation_profile(w).K_global
spec = BarrierSpec(field.kappa0, K)
print(f"K = {K!r}, A = (2 kappa0 + B) K^2 = {spec.A!r}")

# Lap phi = e^{-2(1-r)} (2 + 1/r) on the collar 1/2 < r < 1
audit = audit_subharmonicity(w, field, spec)
r = np.abs(audit.points["z"])
err = np.max(np.abs(audit.points["lap_phi"] - np.exp(-2 * (1 - r)) * (2 + 1 / r)))
print(f"audit over {audit.n_points} points: passed={audit.passed}, min Lap phi {audit.min_lap_phi:.6f}, "
      f"closed-form error {err:.1e}")

cert = hopf_bound(w, field, spec, audit)
print(f"rho {cert.rho:.12f}   M(rho) {cert.M_rho:.9f}   (e^-1 - 1)/2 = {(np.exp(-1) - 1) / 2:.9f}")
print(f"hopf constant {cert.hopf_constant:.9f}   boundary d(phi)/dr {cert.min_boundary_dphi_dr:.6f}")

bb = boundary_colip(w, field, spec, cert)
ib = interior_extension(w, bb.value, K)
lip, colip = empirical_bilipschitz(w)
print(f"C = e^-1 * hopf = {bb.value:.9f}; max |a|+|b| = {ib.ab_check:.9f}")
print(f"empirical lip {lip!r}, colip {colip!r}; C/K = {ib.theoretical_colip:.6f} <= colip")
