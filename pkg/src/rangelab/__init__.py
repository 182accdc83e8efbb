"""Numerical ranges, C-numerical ranges and unitary dilations of small matrices."""

from .cnum import (MembershipCertificate, circle_path_certify, is_rank_one_normal,
                   rank_one_nilpotent_disk, wc_sample, wc_support_opt, wc_support_realc,
                   wc_value, wca_ellipse)
from .dilation import (CanonicalCompression, DilationSpec, canonical_compression,
                       certify_membership, halmos_dilation, intersection_estimate,
                       sample_dilation)
from .distance import dual_orthopair, min_shift_norm, optimality_certificate
from .lab import ExperimentReport, normalize, verify_key, verify_main
from .linalg import (compress, haar_unitary, herm_eig, jacobi_eigh, psd_sqrt,
                     spectral_norm)
from .numrange import (ConvexRegion, Ellipse, boundary_certificate, ellipse_2x2,
                       nr_contains, nr_region, nr_support)

__version__ = "0.1.0"

__all__ = [
    "CanonicalCompression", "ConvexRegion", "DilationSpec", "Ellipse", "ExperimentReport",
    "MembershipCertificate", "boundary_certificate", "canonical_compression",
    "certify_membership", "circle_path_certify", "compress", "dual_orthopair", "ellipse_2x2",
    "halmos_dilation", "haar_unitary", "herm_eig", "intersection_estimate",
    "is_rank_one_normal", "jacobi_eigh", "min_shift_norm", "normalize", "nr_contains",
    "nr_region", "nr_support", "optimality_certificate", "psd_sqrt", "rank_one_nilpotent_disk",
    "sample_dilation", "spectral_norm", "verify_key", "verify_main", "wc_sample",
    "wc_support_opt", "wc_support_realc", "wc_value", "wca_ellipse",
]
