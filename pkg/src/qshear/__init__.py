"""Multivariate two-sided continuous quaternion shearlet transform.

Quaternion-valued signals on uniform grids over R^(2n), the two-sided
quaternion Fourier transform, the full shearlet group with Haar
quadrature, FFT-based forward/inverse shearlet transforms, admissibility
estimation, and a numerical certification suite for the associated
Plancherel, reconstruction, reproducing-kernel and uncertainty
inequalities.
"""

from .quat_core import (
    IncompatibleGridsError,
    InvalidParameterError,
    QShearError,
    QSignal,
    Quaternion,
    inner_q,
    inner_sc,
    lp_norm,
    qsignal,
    quat_abs,
    quat_conj,
    quat_mul,
    quat_sc,
    signal_from_planes,
    zero_signal,
)
from .qft import (
    GridTooLargeError,
    QSpectrum,
    convolve,
    qft_forward,
    qft_inverse,
    qft_reference,
)
from .shear_group import (
    GroupPoint,
    ParamGrid,
    apply_AtSt,
    apply_inv_SA,
    compose,
    identity,
    invert,
    make_param_grid,
    mat_A,
    mat_S,
)
from .atoms import (
    AdmissibilityReport,
    CommutationError,
    NonAdmissibleError,
    ShearletGenerator,
    admissibility_direct,
    admissibility_group,
    admissibility_report,
    check_commutation,
    make_atom,
    star,
)
from .transform import (
    CoeffStack,
    atom_signal,
    energy_fourier_oracle,
    energy_mu,
    kernel,
    mu_inner_q,
    mu_inner_sc,
    multiplier_slice_spectrum,
    sh_direct,
    sh_forward,
    sh_reconstruct,
)
from .uncertainty import (
    ConcentrationSet,
    VerdictReport,
    digamma,
    donoho_stark_check,
    entropy,
    entropy_check,
    essential_support,
    lieb_check,
    lieb_concentration_check,
    lieb_norm,
    log_constant,
    log_up_check,
)
from .signal_io import (
    BadMagicError,
    FileFormatError,
    TruncatedFileError,
    ingest_rgb,
    make_generator,
    read_ppm,
    read_qsig,
    read_stack,
    write_qsig,
    write_stack,
)
from .battery import BatteryConfig, band_limited_noise, modulated_gaussian, standard_battery

__version__ = "0.1.0"
