"""Rigidity certificates for bar-and-joint frameworks at singular configurations."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    Configuration,
    DofProfile,
    Framework,
    Graph,
    InvalidFramework,
    dof_profile,
    neighbor_sets,
    validate_framework,
)
from .matrixlab import (  # noqa: E402
    KernelData,
    PinSet,
    build_rigidity_matrix,
    kernel_data,
    pin_columns,
    rigidity_matrix_of_flex,
    select_pin_set,
    trivial_motion_basis,
    zero_pad,
)
from .certify import (  # noqa: E402
    CertificateReport,
    Settings,
    Verdict,
    cofactor_matrix,
    det_gradient_analytic,
    det_gradient_fd,
    equivalence_report,
    full_certification,
    prestress_test,
    stress_energy,
    stress_energy_bilinear,
    transverse_test,
    transverse_value,
)
