"""Numerical certification of bi-Lipschitz bounds for quasiconformal harmonic maps of the disk."""

from . import errors
from .barrier import (BarrierAudit, BarrierSpec, audit_subharmonicity, barrier, chi,
                      gradient_sandwich, laplacian_chi)
from .curves import (CurvePoint, DistanceField, HessianFrame, JordanCurve, build_curve,
                     curvature_at, distance_query, grad_distance, hessian_distance_frame,
                     kappa0, load_curve)
from .harmonic import (BoundaryCorrespondence, GradientSample, HarmonicMap, poisson_extend,
                       poisson_integral, poisson_kernel)
from .lipschitz import (HopfCertificate, LipschitzReport, boundary_colip, compute_rho,
                        empirical_bilipschitz, hopf_bound, interior_extension, lipschitz_report)
from .qc import (DiskAutomorphism, QcProfile, certify_diffeomorphism, check_qc_inequality,
                 dilatation_profile, disk_grid, moebius_normalize)
from .scenario import RunReport, list_scenarios, run_scenario, validate

__version__ = "0.1.0"
